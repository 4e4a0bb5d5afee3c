"""Vertical geodesics and hyperbolic lengths in a mapped toy tract."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ..errors import DegenerateDistance, DomainError, TruncationError
from ..tract.toy import ToyTract
from .handle import MapHandle
from .stripmap import StripMap

TRACE_SAMPLES = 1000


@dataclass
class GeodesicTrace:
    """Preimage of the half-circle |w| = rho, listed from angle -pi/2 to pi/2."""

    rho: float
    angles: np.ndarray
    polyline: np.ndarray
    diameter: float
    start_on_boundary: bool
    end_on_boundary: bool

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["angle", "re_z", "im_z"])
        for t, z in zip(self.angles, self.polyline):
            out.writerow([repr(float(t)), repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()


def _diameter(points: np.ndarray) -> float:
    pts = np.asarray(points, complex)
    best = 0.0
    for chunk in np.array_split(pts, max(1, pts.size // 256)):
        best = max(best, float(np.max(np.abs(chunk[:, None] - pts[None, :]))))
    return best


def geodesic_trace(handle: MapHandle, rho: float, step: float = 0.5,
                   samples: int = TRACE_SAMPLES) -> GeodesicTrace:
    """Pull back the half-circle of radius ``rho`` through the map.

    Angles are refined until consecutive vertices are at most ``step`` apart.
    """
    if not rho > 0 or not step > 0:
        raise DomainError("rho and step must be positive")
    if rho > handle._trusted_rho():
        raise TruncationError(f"rho={rho:.6g} lies beyond the trusted image radius")
    theta = np.linspace(-np.pi / 2, np.pi / 2, samples)
    z = handle.inverse(rho * np.exp(1j * theta), check=False)
    for _ in range(30):
        gaps = np.abs(np.diff(z))
        bad = np.nonzero(gaps > step)[0]
        if bad.size == 0:
            break
        mids = 0.5 * (theta[bad] + theta[bad + 1])
        zm = handle.inverse(rho * np.exp(1j * mids), check=False)
        theta = np.insert(theta, bad + 1, mids)
        z = np.insert(z, bad + 1, zm)
    xmax = handle.tract.trusted_xmax()
    if np.max(z.real) > xmax:
        raise TruncationError(f"trace for rho={rho:.6g} leaves the trusted region re z <= {xmax:.3f}")
    dist = handle.tract.boundary_distance(z[[0, -1]])
    return GeodesicTrace(float(rho), theta, z, _diameter(z),
                         bool(dist[0] <= step), bool(dist[1] <= step))


def half_plane_distance(w1: complex, w2: complex) -> float:
    """Hyperbolic distance in the right half-plane (density 1/Re w)."""
    w1, w2 = complex(w1), complex(w2)
    if w1.real <= 0 or w2.real <= 0:
        raise DomainError("points must lie in the open right half-plane")
    return float(2.0 * np.arcsinh(abs(w1 - w2) / (2.0 * np.sqrt(w1.real * w2.real))))


def hyp_dist(handle: MapHandle, z1: complex, z2: complex) -> float:
    """Hyperbolic distance in the tract between ``z1`` and ``z2``."""
    if complex(z1) == complex(z2):
        return 0.0
    return half_plane_distance(handle.eval(z1), handle.eval(z2))


def _density_strip(sc: StripMap, s: complex) -> float:
    return 1.0 / (abs(sc.derivative(np.array([s]))[0]) * np.sin(s.imag))


def _pullback_segment(handle: MapHandle, p: complex, q: complex, s_p: complex) -> tuple[float, complex]:
    """Hyperbolic length of the segment p-q, and the strip coordinate of q."""
    known_t = [0.0]
    known_s = [s_p]
    length = abs(q - p)

    def strip_at(t: float) -> complex:
        k = int(np.argmin(np.abs(np.asarray(known_t) - t)))
        s = handle._continue(known_s[k], p + known_t[k] * (q - p), p + t * (q - p))
        known_t.append(t)
        known_s.append(s)
        return s

    def integrand(t: float) -> float:
        return _density_strip(handle.sc, strip_at(t)) * length

    val, _ = quad(integrand, 0.0, 1.0, epsabs=1e-11, epsrel=1e-10, limit=200)
    return float(val), strip_at(1.0)


def hyp_length_bounds(tract: ToyTract, polyline, handle: MapHandle | None = None
                      ) -> tuple[float, float, float | None]:
    """Standard-estimate bounds for the hyperbolic length of a polyline.

    Returns ``(lower, upper, pullback)`` where the bounds integrate
    1/(2 d) and 2/d against arc length, d being the distance to the
    boundary, and ``pullback`` is the length measured through the map
    (``None`` when no handle is given).
    """
    pts = np.asarray(polyline, complex).ravel()
    if pts.size < 2:
        raise DomainError("a polyline needs at least two vertices")
    if not np.all(tract.contains(pts)):
        raise DegenerateDistance("polyline vertex on or outside the boundary")
    for p, q in zip(pts[:-1], pts[1:]):
        if not tract.segment_visible(p, q):
            raise DegenerateDistance(f"segment {p}-{q} meets the boundary")

    integral = 0.0
    for p, q in zip(pts[:-1], pts[1:]):
        length = abs(q - p)
        if length == 0:
            continue
        val, _ = quad(lambda t: 1.0 / float(tract.boundary_distance(p + t * (q - p))),
                      0.0, 1.0, epsabs=1e-12, epsrel=1e-11, limit=200)
        integral += val * length
    lower, upper = 0.5 * integral, 2.0 * integral

    pullback = None
    if handle is not None:
        s = handle.strip_point(pts[0])
        pullback = 0.0
        for p, q in zip(pts[:-1], pts[1:]):
            if q == p:
                continue
            piece, s = _pullback_segment(handle, p, q, s)
            pullback += piece
    return float(lower), float(upper), pullback


# ------------------------------------------------------------ handle cache
def handle_to_json(handle: MapHandle) -> str:
    """Serialise a map handle as its boundary correspondence table."""
    data = {
        "tract": handle.tract.to_json(),
        "accuracy": handle.accuracy,
        "a": handle.a,
        "b": handle.b,
        "lower_prevertices": [float(v) for v in handle.sc.x],
        "upper_prevertices": [float(v) for v in handle.sc.y],
        "boundary_table": [[p, w] for p, w in handle.boundary_table()],
    }
    return json.dumps(data, sort_keys=True)


def handle_from_json(text: str) -> MapHandle:
    data = json.loads(text)
    tract = ToyTract.from_json(data["tract"])
    lo, le, up, ue = tract.arcs()
    sc = StripMap(lo, up, le, ue, tract.start_point, tract.infinity_proxy)
    sc.x = np.array(data["lower_prevertices"])
    sc.y = np.array(data["upper_prevertices"])
    sc._finish()
    h = MapHandle(tract, sc, float(data["a"]), float(data["b"]), float(data["accuracy"]), 0j)
    h.s_base = h.strip_point(tract.base_point, local=True)
    return h
