"""Desk-scale rectilinear tracts.

A toy tract is the half-strip {Re z > 4, |Im z| < pi} cut by a sequence of
wiggles and closed off by a vertical edge at ``x_close``.  Each wiggle with
turning abscissas r < R forces a path from the left to travel right along an
upper corridor (pi/3 < Im z < pi), back left along a middle corridor
(|Im z| < pi/3) and right again along a lower corridor (Im z < -pi/3).  The
upper corridor is blocked at ``tau`` by a wall with an opening of half-width
pi*eps/3 centred at height 2*pi/3.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import InvalidGeometry, NotInTract

PI = np.pi
X_LEFT = 4.0
BASE_POINT = 5.0 + 0.0j
STRIP_MARGIN = 16.0


@dataclass(frozen=True)
class Wiggle:
    r: float
    R: float
    tau: float
    eps: float

    @property
    def has_gate(self) -> bool:
        return self.eps < 1.0

    @property
    def gate_center(self) -> complex:
        return complex(self.tau, 2 * PI / 3)

    @property
    def gate_halfwidth(self) -> float:
        return PI * self.eps / 3


@dataclass(frozen=True)
class RegionTag:
    """Where a point sits relative to wiggle ``j``.

    ``region`` is 'X' (before the band), 'Y' (inside it) or 'Z' (after it);
    ``w_part`` is 'W+' or 'W-' when the point lies in the bottom two thirds
    of the wiggle, and ``in_gate`` flags the square around the gate opening.
    """

    j: int
    region: str
    delta: float
    w_part: str | None = None
    in_gate: bool = False

    @property
    def name(self) -> str:
        return f"{self.region}_{self.j}"


@dataclass(frozen=True)
class ToyTract:
    wiggles: tuple[Wiggle, ...]
    nu0: float
    x_close: float
    x_left: float = X_LEFT
    half_height: float = PI
    base_point: complex = BASE_POINT
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    # ---------------------------------------------------------------- arcs
    def arcs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Lower and upper boundary arcs with their angle exponents.

        The lower arc runs from the left end (z = 4) to the closing-edge
        midpoint, the upper arc back again; both in counterclockwise order.
        """
        if "arcs" in self._cache:
            return self._cache["arcs"]
        h = self.half_height
        lo: list[tuple[complex, float]] = [(complex(self.x_left, -h), -0.5)]
        for w in self.wiggles:
            lo.append((complex(w.r, -h), -0.5))
            lo.append((complex(w.r, h / 3), 0.5))
            if w.has_gate:
                lo.append((complex(w.tau, h / 3), -0.5))
                lo.append((complex(w.tau, h * (2 - w.eps) / 3), 1.0))
                lo.append((complex(w.tau, h / 3), -0.5))
            lo.append((complex(w.R - 1, h / 3), 1.0))
            lo.append((complex(w.r, h / 3), -0.5))
            lo.append((complex(w.r, -h), -0.5))
        lo.append((complex(self.x_close, -h), -0.5))
        up: list[tuple[complex, float]] = [(complex(self.x_close, h), -0.5)]
        for w in reversed(self.wiggles):
            up.append((complex(w.R, h), -0.5))
            up.append((complex(w.R, -h / 3), 0.5))
            up.append((complex(w.r + 1, -h / 3), 1.0))
            up.append((complex(w.R, -h / 3), -0.5))
            up.append((complex(w.R, h), -0.5))
            if w.has_gate:
                up.append((complex(w.tau, h), -0.5))
                up.append((complex(w.tau, h * (2 + w.eps) / 3), 1.0))
                up.append((complex(w.tau, h), -0.5))
        up.append((complex(self.x_left, h), -0.5))
        out = (np.array([p for p, _ in lo]), np.array([e for _, e in lo]),
               np.array([p for p, _ in up]), np.array([e for _, e in up]))
        self._cache["arcs"] = out
        return out

    def vertices(self) -> np.ndarray:
        """Closed counterclockwise vertex list, including both arc endpoints."""
        lo, _, up, _ = self.arcs()
        return np.concatenate([[complex(self.x_left, 0)], lo,
                               [complex(self.x_close, 0)], up])

    @property
    def start_point(self) -> complex:
        return complex(self.x_left, 0.0)

    @property
    def infinity_proxy(self) -> complex:
        return complex(self.x_close, 0.0)

    # ------------------------------------------------------------- segments
    def segments(self) -> np.ndarray:
        """Boundary as an (m, 2) array of segment endpoints (walls and slits)."""
        if "segments" in self._cache:
            return self._cache["segments"]
        h = self.half_height
        segs = [
            (complex(self.x_left, -h), complex(self.x_left, h)),
            (complex(self.x_left, -h), complex(self.x_close, -h)),
            (complex(self.x_left, h), complex(self.x_close, h)),
            (complex(self.x_close, -h), complex(self.x_close, h)),
        ]
        for w in self.wiggles:
            segs.append((complex(w.r, -h), complex(w.r, h / 3)))
            segs.append((complex(w.r, h / 3), complex(w.R - 1, h / 3)))
            segs.append((complex(w.R, -h / 3), complex(w.R, h)))
            segs.append((complex(w.r + 1, -h / 3), complex(w.R, -h / 3)))
            if w.has_gate:
                segs.append((complex(w.tau, h / 3), complex(w.tau, h * (2 - w.eps) / 3)))
                segs.append((complex(w.tau, h * (2 + w.eps) / 3), complex(w.tau, h)))
        arr = np.array(segs, complex)
        self._cache["segments"] = arr
        return arr

    def slit_segments(self) -> np.ndarray:
        return self.segments()[4:]

    def boundary_distance(self, z) -> np.ndarray:
        """Euclidean distance from each point to the boundary."""
        z = np.asarray(z, complex)
        segs = self.segments()
        a, b = segs[:, 0], segs[:, 1]
        flat = z.reshape(-1, 1)
        d = b - a
        t = np.clip(((flat - a) * np.conj(d)).real / np.abs(d) ** 2, 0.0, 1.0)
        dist = np.min(np.abs(flat - (a + t * d)), axis=1)
        return dist.reshape(z.shape)

    def contains(self, z, margin: float = 0.0) -> np.ndarray:
        """True for points of the open tract at distance > margin from the boundary."""
        z = np.asarray(z, complex)
        inside = ((z.real > self.x_left) & (z.real < self.x_close)
                  & (np.abs(z.imag) < self.half_height))
        return inside & (self.boundary_distance(z) > margin)

    def segment_visible(self, p: complex, q: complex) -> bool:
        """True if the open segment p-q crosses no boundary segment."""
        segs = self.segments()
        return not bool(np.any(_crosses(p, q, segs[:, 0], segs[:, 1])))

    # -------------------------------------------------------------- regions
    def band(self, j: int) -> tuple[float, float]:
        w = self.wiggles[j]
        return (w.R - 2 - 4 * self.nu0, w.R - 2 - 2 * self.nu0)

    def trusted_xmax(self) -> float:
        """Largest real part where truncation effects are treated as negligible."""
        if self.wiggles:
            last = self.wiggles[-1]
            width = last.R - last.r
        else:
            # map error from the closing edge decays like exp(-(x_close - x))
            width = STRIP_MARGIN
        return self.x_close - width

    # ---------------------------------------------------------------- JSON
    def to_json(self) -> dict:
        verts = self.vertices()
        anchors = {
            "base_point": [self.base_point.real, self.base_point.imag],
            "infinity_proxy": [self.x_close, 0.0],
            "gate_centers": [[w.tau, 2 * PI / 3] for w in self.wiggles],
            "band_edges": [list(self.band(j)) for j in range(len(self.wiggles))],
        }
        return {
            "wiggles": [{"r": w.r, "R": w.R, "tau": w.tau, "eps": w.eps} for w in self.wiggles],
            "nu0": self.nu0,
            "x_close": self.x_close,
            "x_left": self.x_left,
            "half_height": self.half_height,
            "vertices": [[v.real, v.imag] for v in verts],
            "anchors": anchors,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ToyTract":
        params = [{"r": w["r"], "R": w["R"], "eps": w["eps"]} for w in data["wiggles"]]
        return toy_tract_build(params, data["nu0"], data["x_close"])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def with_eps(self, eps: Sequence[float]) -> "ToyTract":
        """Same geometry with new gate sizes."""
        params = [{"r": w.r, "R": w.R, "eps": float(e)} for w, e in zip(self.wiggles, eps)]
        return toy_tract_build(params, self.nu0, self.x_close)

    @property
    def eps(self) -> np.ndarray:
        return np.array([w.eps for w in self.wiggles])


def _crosses(p, q, a, b) -> np.ndarray:
    """Segment p-q properly meets segment a-b (touching counts)."""
    def orient(u, v, w):
        return np.sign(((v - u) * np.conj(w - u)).imag)

    o1 = orient(p, q, a)
    o2 = orient(p, q, b)
    o3 = orient(a, b, p)
    o4 = orient(a, b, q)
    general = (o1 != o2) & (o3 != o4)
    # collinear overlap
    def on_seg(u, v, w):
        return ((np.minimum(u.real, v.real) - 1e-12 <= w.real) & (w.real <= np.maximum(u.real, v.real) + 1e-12)
                & (np.minimum(u.imag, v.imag) - 1e-12 <= w.imag) & (w.imag <= np.maximum(u.imag, v.imag) + 1e-12))
    col = ((o1 == 0) & on_seg(p, q, a)) | ((o2 == 0) & on_seg(p, q, b)) \
        | ((o3 == 0) & on_seg(a, b, p)) | ((o4 == 0) & on_seg(a, b, q))
    return general | col


def toy_tract_build(params: Iterable[dict], nu0_toy: float, x_close: float) -> ToyTract:
    """Build a toy tract from wiggle parameters ``{r, R, eps}``.

    The gate of each wiggle sits at tau = R - 2 - 3*nu0_toy.
    """
    params = list(params)
    if nu0_toy <= 0:
        raise InvalidGeometry("nu0_toy must be positive")
    wiggles = []
    prev_R = X_LEFT
    for j, p in enumerate(params):
        r, R, eps = float(p["r"]), float(p["R"]), float(p["eps"])
        tau = R - 2 - 3 * nu0_toy
        if not (0 < eps <= 1):
            raise InvalidGeometry(f"wiggle {j}: eps must lie in (0, 1]")
        if j == 0 and not r > X_LEFT + 1:
            raise InvalidGeometry("wiggle 0: need r > 5 so the base point stays clear")
        if j > 0 and not r > prev_R + 1:
            raise InvalidGeometry(f"wiggle {j}: r must exceed the previous R by more than 1")
        if not R - r > 3:
            raise InvalidGeometry(f"wiggle {j}: need R - r > 3")
        if not (r < tau < R - 1):
            raise InvalidGeometry(f"wiggle {j}: gate abscissa {tau} outside ({r}, {R - 1})")
        if R - 2 - 4 * nu0_toy < r:
            raise InvalidGeometry(f"wiggle {j}: band extends left of r")
        if eps < 1 and PI * eps / 3 > PI / 3:
            raise InvalidGeometry(f"wiggle {j}: gate wider than corridor")
        wiggles.append(Wiggle(r, R, tau, eps))
        prev_R = R
    if not x_close > prev_R + 1:
        raise InvalidGeometry("x_close must lie beyond the last wiggle")
    return ToyTract(tuple(wiggles), float(nu0_toy), float(x_close))


def region_classify(tract: ToyTract, z: complex, j: int) -> RegionTag:
    """Locate ``z`` relative to the band of wiggle ``j`` and return its signed distance."""
    z = complex(z)
    if not bool(tract.contains(z)):
        raise NotInTract(f"{z} is not an interior point of the tract")
    w = tract.wiggles[j]
    lo, hi = tract.band(j)
    x, y = z.real, z.imag
    h = tract.half_height
    mid = -h / 3 < y < h / 3
    inside_wiggle = w.r < x < w.R
    if mid and lo <= x <= hi:
        region, delta = "Y", (w.R - 2 - 3 * tract.nu0 - x) / tract.nu0
    elif x <= w.r:
        region, delta = "X", -1.0
    elif x >= w.R:
        region, delta = "Z", 1.0
    elif y >= h / 3:
        region, delta = "X", -1.0
    elif y <= -h / 3:
        region, delta = "Z", 1.0
    elif x > hi:
        region, delta = "X", -1.0
    else:
        region, delta = "Z", 1.0
    w_part = None
    if w.r <= x <= w.R and -h <= y <= h / 3:
        if -h / 3 < y < h / 3:
            w_part = "W+"
        elif y < -h / 3:
            w_part = "W-"
    hw = w.gate_halfwidth
    in_gate = inside_wiggle and abs(x - w.tau) <= hw and abs(y - 2 * h / 3) <= hw
    return RegionTag(j, region, float(delta), w_part, bool(in_gate))
