"""Checks on solved toy models: gate condition, ordering chain, growth, monotonicity, arc doubling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conformal.handle import MapHandle, map_build
from .conformal.metric import geodesic_trace, hyp_dist
from .errors import GeometryError, InvalidGeometry, TruncationError
from .report import CertLine, CertReport
from .shooting import delta_j, preimage
from .tract.toy import ToyTract

PI = math.pi
ARC_SAMPLES = 2000

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def exit_code(report) -> int:
    return EXIT_PASS if report.passed else EXIT_FAIL


def log_modulus(handle: MapHandle, z: complex) -> float:
    """log |F(z)| without forming F(z) itself."""
    s = handle.strip_point(complex(z))
    return float(handle.log_modulus_from_s(s))


# ----------------------------------------------------------- gate condition
def gate_condition_check(handle: MapHandle, tract: ToyTract, j: int, target: float,
                         tol: float = 1e-2) -> CertLine:
    """re F^-1(target) = tau_j within tol * nu0 and |im F^-1(target)| < pi/3."""
    z = preimage(handle, target)
    tau = tract.wiggles[j].tau
    off = abs(z.real - tau)
    ok_re = off <= tol * tract.nu0
    ok_im = abs(z.imag) < PI / 3
    delta = delta_j(handle, tract, j, target)
    detail = []
    if not ok_re:
        detail.append(f"re offset {off:.3e} above {tol * tract.nu0:.3e}")
    if not ok_im:
        detail.append(f"|im| = {abs(z.imag):.4f} outside (-pi/3, pi/3)")
    return CertLine(f"gate_condition[j={j}]", bool(ok_re and ok_im), off, tol * tract.nu0, "<=", tol,
                    "; ".join(detail), {"z": [z.real, z.imag], "tau": tau, "delta": delta,
                                        "im_bound": PI / 3})


# ---------------------------------------------------------- ordering chain
def _in_band(points: np.ndarray, wig, lower: float, upper: float, slack: float) -> bool:
    x, y = points.real, points.imag
    return bool(np.all((x >= wig.r - slack) & (x <= wig.R + slack)
                       & (y >= lower - slack) & (y <= upper + slack)))


def chain_check(handle: MapHandle, tract: ToyTract, j: int, target: float,
                r_next: float | None = None, R_next: float | None = None,
                slack: float = 1e-6) -> CertLine:
    """Ordering around w_j = F^-1(target) and wdot_j = w_j - 2 pi i/3.

    Asserted: |F(w)| < |F(wdot)|/2, the lower and upper bounds on the log
    ratio, and both geodesics lying in the lower two thirds of the wiggle.
    The endpoint comparisons with the next radii are only reported.
    """
    wig = tract.wiggles[j]
    w = preimage(handle, target)
    wd = w - 2j * PI / 3
    if not bool(tract.contains(wd)) or tract.boundary_distance(wd) < 1e-9:
        raise GeometryError(f"w_j - 2 pi i/3 = {wd} is not inside the tract")
    lf, lfd = log_modulus(handle, w), log_modulus(handle, wd)
    gap = lfd - lf
    width = wig.R - wig.r
    lower = 3 / PI * (width - 4 * tract.nu0 - 3)
    upper = 8 * width + 8 * PI / 3
    rho, rho_dot = math.exp(lf), math.exp(lfd)
    checks = {
        "claim3.half": (lf < lfd - math.log(2), lf, lfd - math.log(2), "<"),
        "claim3.lower": (gap >= lower, gap, lower, ">="),
        "claim3.log2": (gap > math.log(2), gap, math.log(2), ">"),
        "claim4.upper": (gap < upper, gap, upper, "<"),
    }
    lo_band, hi_band = tract.band(j)
    for name, r_, part in (("claim1.C", rho, (-PI / 3, PI / 3)), ("claim1.Cdot", rho_dot, (-PI, -PI / 3))):
        try:
            tr = geodesic_trace(handle, r_)
            inside = _in_band(tr.polyline, wig, part[0], part[1], slack)
            xs = tr.polyline.real
            checks[name] = (inside, float(xs.min()), float(xs.max()), "within W")
            checks[name + ".band"] = (bool(lo_band < xs.min() and xs.max() < hi_band),
                                      float(xs.min()), float(xs.max()), "within band")
        except TruncationError as exc:
            checks[name] = (False, r_, handle._trusted_rho(), f"trace truncated: {exc}")
    reported = {}
    if r_next is not None:
        lhs = r_next + wig.R + 1 + 2 * PI
        reported["claim2"] = {"lhs": lhs, "rhs": rho, "relation": "<", "holds": bool(lhs < rho)}
    if R_next is not None:
        rhs = R_next - 2 - 4 * tract.nu0
        reported["claim4.endpoint"] = {"lhs": rho_dot, "rhs": rhs, "relation": "<", "holds": bool(rho_dot < rhs)}
    asserted = ("claim3.half", "claim3.lower", "claim3.log2", "claim4.upper", "claim1.C", "claim1.Cdot")
    failed = [k for k in asserted if not checks[k][0]]
    measured = {"j": j, "w": [w.real, w.imag], "w_dot": [wd.real, wd.imag], "log_F_w": lf,
                "log_F_w_dot": lfd,
                "checks": {k: {"passed": bool(v[0]), "lhs": v[1], "rhs": v[2], "relation": v[3]}
                           for k, v in checks.items()},
                "reported": reported}
    return CertLine(f"chain[j={j}]", not failed, gap, lower, ">=", None,
                    "failed: " + ", ".join(failed) if failed else "", measured)


# ------------------------------------------------------------------ growth
def _eps_sum(tract: ToyTract, j: int) -> float:
    return float(sum(math.log(1 / w.eps) for w in tract.wiggles[: j + 1]))


def _sample_region(tract: ToyTract, box, count: int, rng, exclude=None, margin: float = 0.05):
    x0, x1, y0, y1 = box
    out = []
    tries = 0
    while len(out) < count and tries < 200 * count:
        tries += 1
        z = complex(rng.uniform(x0, x1), rng.uniform(y0, y1))
        if exclude is not None and exclude(z):
            continue
        if bool(tract.contains(z)) and tract.boundary_distance(z) > margin:
            out.append(z)
    return out


def growth_report(handle: MapHandle, tract: ToyTract, samples: int = 40, seed: int = 0) -> CertReport:
    """Ratios of log|F| to the growth model on each W_j and U_{j+1}; min and max give [1/C_emp, C_emp]."""
    rng = np.random.default_rng(seed)
    report = CertReport("growth")
    ratios_all = []
    xmax = tract.trusted_xmax()
    n = len(tract.wiggles)
    for j, wig in enumerate(tract.wiggles):
        scale = _eps_sum(tract, j)
        pts = _sample_region(tract, (wig.r, wig.R, -PI, PI / 3), samples, rng)
        ratios = [log_modulus(handle, z) / (wig.R + scale) for z in pts]
        nxt = tract.wiggles[j + 1] if j + 1 < n else None
        right = min(nxt.tau - 1, xmax) if nxt else xmax

        def in_next(z, nxt=nxt):
            return nxt is not None and nxt.r <= z.real <= nxt.R and -PI <= z.imag <= PI / 3

        upts = _sample_region(tract, (wig.R, right, -PI, PI), samples, rng, exclude=in_next) if right > wig.R else []
        uratios = [log_modulus(handle, z) / (z.real + scale) for z in upts]
        for name, rs in ((f"W[{j}]", ratios), (f"U[{j + 1}]", uratios)):
            if not rs:
                continue
            lo, hi = min(rs), max(rs)
            ratios_all += rs
            report.add(CertLine(f"growth.{name}", bool(lo > 0 and math.isfinite(hi)), lo, hi, "min/max",
                                None, "", {"samples": len(rs)}))
    if ratios_all:
        lo, hi = min(ratios_all), max(ratios_all)
        report.constants["ratio_min"] = lo
        report.constants["ratio_max"] = hi
        report.constants["C_emp"] = max(hi, 1 / lo) if lo > 0 else math.inf
    return report


# ------------------------------------------------------------ monotonicity
def monotonicity_check(tract: ToyTract, eps_a: Sequence[float], eps_b: Sequence[float], points,
                       tol: float = 1e-9, handles: tuple[MapHandle, MapHandle] | None = None,
                       accuracy: float = 1e-10) -> CertLine:
    """d_{T(eps_a)}(5, z) >= d_{T(eps_b)}(5, z) - tol for eps_a <= eps_b componentwise.

    The maps are built at ``accuracy``; the default keeps numerical noise in
    the distances an order below a 1e-9 tolerance."""
    ea, eb = np.asarray(eps_a, float), np.asarray(eps_b, float)
    if np.any(ea > eb):
        raise InvalidGeometry("eps_a must be componentwise at most eps_b")
    if handles is None:
        ha = map_build(tract.with_eps(ea), accuracy)
        hb = map_build(tract.with_eps(eb), accuracy, previous=ha)
    else:
        ha, hb = handles
    base = ha.tract.base_point
    margins = []
    for z in points:
        da = hyp_dist(ha, base, z)
        db = hyp_dist(hb, base, z)
        margins.append(da - db)
    worst = min(margins) if margins else 0.0
    return CertLine("monotonicity", bool(worst >= -tol), worst, -tol, ">=", tol, "",
                    {"margins": margins, "eps_a": ea.tolist(), "eps_b": eb.tolist()})


# ------------------------------------------------------------ arc doubling
@dataclass
class Annulus:
    """Preimages of the circles |w| = rho and |w| = rho_dot bound the pair C_n, Cdot_n."""

    rho: float
    rho_dot: float


def geodesic_pair(handle: MapHandle, tract: ToyTract, j: int, target: float) -> Annulus:
    """rho_{j+1} = |F(w_j)| and rho_dot_{j+1} = |F(w_j - 2 pi i/3)|."""
    w = preimage(handle, target)
    return Annulus(math.exp(log_modulus(handle, w)), math.exp(log_modulus(handle, w - 2j * PI / 3)))


def seed_arc(tract: ToyTract, handle: MapHandle, j: int, target: float, samples: int = ARC_SAMPLES) -> np.ndarray:
    """The piece of the explicit path joining w_j to w_j - 2 pi i/3 through the left turn of wiggle j."""
    wig = tract.wiggles[j]
    w = preimage(handle, target)
    wd = w - 2j * PI / 3
    x = wig.r + 0.5
    corners = [w, complex(x, w.imag), complex(x, wd.imag), wd]
    return _densify(np.array(corners), samples)


def _densify(corners: np.ndarray, samples: int) -> np.ndarray:
    seg = np.abs(np.diff(corners))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    t = np.linspace(0.0, cum[-1], samples)
    return np.interp(t, cum, corners.real) + 1j * np.interp(t, cum, corners.imag)


def crosses_gate_segment(arc: np.ndarray, r: float) -> bool:
    """Whether the arc meets the segment (r - pi i/3, r + 1 - pi i/3)."""
    y = arc.imag + PI / 3
    for k in np.nonzero(np.sign(y[:-1]) != np.sign(y[1:]))[0]:
        t = y[k] / (y[k] - y[k + 1]) if y[k] != y[k + 1] else 0.0
        x = arc[k].real + t * (arc[k + 1].real - arc[k].real)
        if r < x < r + 1:
            return True
    return bool(np.any((np.abs(y) < 1e-12) & (arc.real > r) & (arc.real < r + 1)))


def _crossings(moduli: np.ndarray, ann: Annulus) -> list[tuple[int, int]]:
    """Index ranges of maximal pieces running from one boundary circle of the annulus to the other."""
    state = np.where(moduli <= ann.rho, -1, np.where(moduli >= ann.rho_dot, 1, 0))
    pieces = []
    last_side, last_idx = 0, None
    for k, s in enumerate(state):
        if s == 0:
            continue
        if last_side != 0 and s != last_side:
            pieces.append((last_idx, k))
        last_side, last_idx = s, k
    return pieces


def arc_doubling(handle: MapHandle, tract: ToyTract, n: int, targets: Sequence[float], levels: int = 3,
                 shift: int = 0, samples: int = ARC_SAMPLES) -> list[int]:
    """Pull an arc joining C_{n+1} and Cdot_{n+1} back through F(z - 2 pi i m) level by level.

    At each level every arc is translated by 2 pi i * ``shift``; each maximal
    piece crossing the annulus rho_{k+1} <= |w| <= rho_dot_{k+1} is pulled back
    to an arc joining C_k and Cdot_k.  Returns the arc counts per level,
    starting with the seed arc.
    """
    if n + 1 >= len(tract.wiggles) or n - levels + 1 < 0:
        raise InvalidGeometry(f"need wiggles {n - levels + 1}..{n + 1} for {levels} levels from n={n}")
    arc = seed_arc(tract, handle, n + 1, targets[n + 1], samples)
    if not crosses_gate_segment(arc, tract.wiggles[n + 1].r):
        raise InvalidGeometry("seed arc does not cross (r - pi i/3, r + 1 - pi i/3)")
    return pull_back_arcs(handle, tract, [arc], n, targets, levels, shift, samples)


def pull_back_arcs(handle: MapHandle, tract: ToyTract, arcs: list[np.ndarray], n: int,
                   targets: Sequence[float], levels: int, shift: int = 0,
                   samples: int = ARC_SAMPLES) -> list[int]:
    counts = [len(arcs)]
    rho_max = handle._trusted_rho()
    for level in range(levels):
        k = n - level
        ann = geodesic_pair(handle, tract, k, targets[k])
        new_arcs = []
        for arc in arcs:
            image = arc + 2j * PI * shift
            if np.any(image.real <= 0):
                raise GeometryError("translated arc leaves the right half-plane")
            for a, b in _crossings(np.abs(image), ann):
                piece = _densify(image[a:b + 1], samples)
                if np.max(np.abs(piece)) > rho_max:
                    raise TruncationError("pullback leaves the trusted image radius")
                new_arcs.append(np.asarray(handle.inverse(piece, check=False)))
        arcs = new_arcs
        counts.append(len(arcs))
    return counts
