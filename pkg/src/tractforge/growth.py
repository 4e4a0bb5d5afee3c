"""Growth profiles Phi and the derived functions phi, phi^-1, Psi and psi.

Every profile is evaluated through ``log_theta(ell)``, the logarithm of
Phi(t) written as a function of ``ell = log t``.  Keeping both sides in the
log domain lets phi(t) = t^(1 + Phi(t)) be evaluated for arguments that are
themselves iterated exponentials.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConvergenceError, DomainError
from .tower import Ordering, TowerScalar, tower_cmp, tower_exp, tower_log, tower_normalize

T = TowerScalar.from_float
MAX_BISECT = 200
MAX_WIDEN = 60


def _tower(x) -> TowerScalar:
    return TowerScalar.parse(x)


def _log_float(x: TowerScalar) -> float:
    """log x as a float (may be inf)."""
    return float(tower_log(x))


# ------------------------------------------------------------------ profiles
@dataclass(frozen=True)
class GrowthProfile:
    t_min: float

    kind = "abstract"

    def log_theta(self, ell: TowerScalar) -> TowerScalar:
        raise NotImplementedError

    def log_slope(self, ell: float) -> float:
        """d log Phi / d ell at a moderate ``ell``."""
        h = 1e-6 * max(1.0, abs(ell))
        return (float(self.log_theta(T(ell + h))) - float(self.log_theta(T(ell - h)))) / (2 * h)

    def decreasing_at(self, ell: TowerScalar) -> bool:
        return self.log_slope(float(ell)) < 0

    def log_increasing_at(self, ell: TowerScalar) -> bool:
        """Whether Phi(t) * log t is increasing at t = e^ell."""
        e = float(ell)
        return 1.0 + e * self.log_slope(e) > 0

    def in_extension(self, ell: TowerScalar) -> bool:
        return False

    def theta(self, t) -> float:
        """Phi(t) as a float."""
        return math.exp(float(self.log_theta(tower_log(_tower(t)))))

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class LogLogAlpha(GrowthProfile):
    """Phi(t) = 1/(log log t)^alpha."""

    alpha: float = 1.0
    kind = "loglog_alpha"

    def log_theta(self, ell: TowerScalar) -> TowerScalar:
        ell = _tower(ell)
        if tower_cmp(ell, T(1.0)) is not Ordering.GT:
            raise DomainError("log log t must be positive")
        return -self.alpha * tower_log(tower_log(ell))

    def log_slope(self, ell: float) -> float:
        return -self.alpha / (ell * math.log(ell))

    def decreasing_at(self, ell: TowerScalar) -> bool:
        return tower_cmp(_tower(ell), T(1.0)) is Ordering.GT

    def log_increasing_at(self, ell: TowerScalar) -> bool:
        # (ell / (log ell)^alpha)' > 0  <=>  log ell > alpha
        return tower_cmp(tower_log(_tower(ell)), T(self.alpha)) is Ordering.GT

    def derivative(self, t: float) -> float:
        """Closed-form Phi'(t) for real t."""
        lt = math.log(t)
        return -self.alpha / (t * lt * math.log(lt) ** (1 + self.alpha))

    def to_json(self) -> dict:
        return {"kind": self.kind, "alpha": self.alpha, "t_min": self.t_min}


@dataclass(frozen=True)
class ScaledTheta(GrowthProfile):
    """factor * base, continued below the base's domain linearly in log t."""

    base: GrowthProfile = None  # type: ignore[assignment]
    factor: float = 1.0
    kind = "scaled_theta"

    @property
    def _ell0(self) -> float:
        return math.log(self.base.t_min)

    def in_extension(self, ell: TowerScalar) -> bool:
        return tower_cmp(_tower(ell), T(self._ell0)) is Ordering.LT

    def _linear(self, e: float) -> tuple[float, float]:
        e0 = self._ell0
        v0 = self.factor * math.exp(float(self.base.log_theta(T(e0))))
        slope = v0 * self.base.log_slope(e0)
        return v0 + slope * (e - e0), slope

    def log_theta(self, ell: TowerScalar) -> TowerScalar:
        ell = _tower(ell)
        if self.in_extension(ell):
            value, _ = self._linear(float(ell))
            return T(math.log(value))
        return self.base.log_theta(ell) + math.log(self.factor)

    def log_slope(self, ell: float) -> float:
        if ell < self._ell0:
            value, slope = self._linear(ell)
            return slope / value
        return self.base.log_slope(ell)

    def decreasing_at(self, ell: TowerScalar) -> bool:
        if self.in_extension(ell):
            return self._linear(float(ell))[1] < 0
        return self.base.decreasing_at(ell)

    def log_increasing_at(self, ell: TowerScalar) -> bool:
        if self.in_extension(ell):
            e = float(ell)
            value, slope = self._linear(e)
            return value + slope * e > 0
        return self.base.log_increasing_at(ell)

    def to_json(self) -> dict:
        return {"kind": self.kind, "factor": self.factor, "base": self.base.to_json(),
                "t_min": self.t_min}


@dataclass(frozen=True)
class TableProfile(GrowthProfile):
    """Monotone (PCHIP) interpolation of knots (t, Phi) in log log t / log Phi coordinates."""

    knots: tuple = ()
    kind = "table"
    _interp: PchipInterpolator = field(default=None, compare=False, repr=False)  # type: ignore

    def __post_init__(self):
        t = np.array([k[0] for k in self.knots], float)
        v = np.array([k[1] for k in self.knots], float)
        if t.size < 2 or np.any(np.diff(t) <= 0) or np.any(t <= 1) or np.any(v <= 0):
            raise DomainError("table knots need increasing t > 1 and positive values")
        object.__setattr__(self, "_interp", PchipInterpolator(np.log(np.log(t)), np.log(v)))

    def _x(self, ell: TowerScalar) -> float:
        ell = _tower(ell)
        x = float(tower_log(ell))
        lo, hi = self._interp.x[0], self._interp.x[-1]
        if not (lo - 1e-12 <= x <= hi + 1e-12):
            raise DomainError("argument outside the table range")
        return min(max(x, lo), hi)

    def log_theta(self, ell: TowerScalar) -> TowerScalar:
        return T(float(self._interp(self._x(ell))))

    def log_slope(self, ell: float) -> float:
        x = self._x(T(ell))
        return float(self._interp.derivative()(x)) / ell

    def to_json(self) -> dict:
        return {"kind": self.kind, "knots": [list(k) for k in self.knots], "t_min": self.t_min}


def loglog_alpha(alpha: float, t_min: float | None = None) -> LogLogAlpha:
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    return LogLogAlpha(t_min=float(t_min) if t_min is not None else math.exp(math.exp(alpha)),
                       alpha=float(alpha))


def scaled_theta(base: GrowthProfile, factor: float, t_min: float | None = None) -> ScaledTheta:
    if not 0 < factor <= 1:
        raise DomainError("factor must lie in (0, 1]")
    return ScaledTheta(t_min=float(t_min) if t_min is not None else base.t_min, base=base,
                       factor=float(factor))


def table_profile(knots: Sequence[Sequence[float]], t_min: float | None = None) -> TableProfile:
    knots = tuple((float(a), float(b)) for a, b in knots)
    return TableProfile(t_min=float(t_min) if t_min is not None else knots[0][0], knots=knots)


def profile_from_json(data: dict) -> GrowthProfile:
    kind = data.get("kind")
    if kind == "loglog_alpha":
        return loglog_alpha(data["alpha"], data.get("t_min"))
    if kind == "scaled_theta":
        return scaled_theta(profile_from_json(data["base"]), data["factor"], data.get("t_min"))
    if kind == "table":
        return table_profile(data["knots"], data.get("t_min"))
    raise DomainError(f"unknown profile kind {kind!r}")


def parse_profile(spec: str) -> GrowthProfile:
    """Short forms such as ``loglog:1``, ``table:knots.csv`` (rows t, Phi(t)) or a JSON object."""
    spec = spec.strip()
    if spec.startswith("{"):
        return profile_from_json(json.loads(spec))
    name, _, arg = spec.partition(":")
    if name in ("loglog", "loglog_alpha"):
        return loglog_alpha(float(arg or 1.0))
    if name == "table":
        try:
            with open(arg, newline="", encoding="utf-8") as fh:
                rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        except OSError as exc:
            raise DomainError(f"cannot read profile table {arg}: {exc}") from exc
        try:
            knots = [(float(r[0]), float(r[1])) for r in rows]
        except (ValueError, IndexError):
            # allow one header row
            try:
                knots = [(float(r[0]), float(r[1])) for r in rows[1:]]
            except (ValueError, IndexError) as exc:
                raise DomainError(f"profile table {arg}: expected rows t, Phi(t)") from exc
        return table_profile(knots)
    raise DomainError(f"cannot parse profile {spec!r}")


# --------------------------------------------------------------- phi family
def _check_domain(profile: GrowthProfile, t: TowerScalar) -> None:
    if tower_cmp(t, T(profile.t_min)) is Ordering.LT and \
            abs(float(t) - profile.t_min) > 1e-12 * profile.t_min:
        raise DomainError(f"t={t} lies below t_min={profile.t_min}")


def log_excess(profile: GrowthProfile, ell: TowerScalar) -> TowerScalar:
    """Phi(t) * log t = log phi(t) - log t, for ell = log t, without cancellation."""
    log_th = profile.log_theta(ell)
    if ell.level == 0:
        return T(math.exp(float(log_th)) * ell.mantissa)
    return tower_exp(tower_log(ell) + log_th)


def log_phi_of_log(profile: GrowthProfile, ell: TowerScalar) -> TowerScalar:
    """log phi(t) = (1 + Phi(t)) * log t for ell = log t."""
    return ell + log_excess(profile, ell)


def phi_eval(profile: GrowthProfile, t) -> TowerScalar:
    """phi(t) = t^(1 + Phi(t))."""
    t = _tower(t)
    _check_domain(profile, t)
    return tower_exp(log_phi_of_log(profile, tower_log(t)))


def phi_inverse(profile: GrowthProfile, w, rel_tol: float = 1e-12, M: float = 2.0) -> TowerScalar:
    """Solve phi(t) = w by bisection in log t, starting from the bracket
    [w^(1 - M Phi(w)), w^(1 - Phi(w)/M)] and widening it by factors of 2."""
    if not 1e-14 < rel_tol < 1e-3:
        raise DomainError("rel_tol must lie in (1e-14, 1e-3)")
    w = _tower(w)
    w_min = phi_eval(profile, profile.t_min)
    if tower_cmp(w, w_min) is Ordering.LT and abs(float(w) / float(w_min) - 1) > 1e-12:
        raise DomainError(f"w={w} lies below phi(t_min)")
    big_l = tower_log(w)
    if big_l.level == 0:
        return _inverse_flat(profile, big_l.mantissa, rel_tol, M)
    return _inverse_deep(profile, big_l, rel_tol, M)


def _rel_gap(d: float) -> float:
    # |w'/w - 1| for a log gap d, saturating instead of overflowing
    return abs(math.expm1(d)) if d < 700 else math.inf


def _inverse_flat(profile, big_l: float, rel_tol: float, M: float) -> TowerScalar:
    v_floor = math.log(profile.t_min)

    def g(v: float) -> float:
        return float(log_phi_of_log(profile, T(v)))

    theta_w = math.exp(float(profile.log_theta(T(big_l))))
    lo = max(big_l * (1 - M * theta_w), v_floor)
    hi = max(big_l * (1 - theta_w / M), v_floor)
    widen = 0
    while g(lo) > big_l:
        lo = max(v_floor, lo / 2 if lo > 0 else lo * 2)
        widen += 1
        if widen > MAX_WIDEN:
            raise ConvergenceError("lower bracket could not be established")
        if lo == v_floor and g(lo) > big_l:
            raise ConvergenceError("w is below phi(t_min)")
    while g(hi) < big_l:
        hi = min(hi * 2, big_l) if hi > 0 else big_l
        widen += 1
        if widen > MAX_WIDEN:
            raise ConvergenceError("upper bracket could not be established")
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if _rel_gap(gm - big_l) <= rel_tol * 1e-2 or hi - lo <= 4 * math.ulp(hi):
            lo = hi = mid
            break
        if gm < big_l:
            lo = mid
        else:
            hi = mid
    v = 0.5 * (lo + hi)
    gap = _rel_gap(g(v) - big_l)
    # once log w is large, float spacing of log w itself bounds the attainable relative error in w
    if gap > max(rel_tol, 16 * math.ulp(big_l)):
        raise ConvergenceError(f"inverse residual {gap:.3e} above {rel_tol}")
    return tower_exp(T(v))


def _inverse_deep(profile, big_l: TowerScalar, rel_tol: float, M: float) -> TowerScalar:
    """Bisection on y = log log t for w beyond exp(1e8); tolerance applies to log log w."""
    target = tower_log(big_l)
    if target.level != 0:
        raise DomainError("w is beyond the supported range for inversion")
    target_f = target.mantissa

    def g(y: float) -> float:
        v = tower_exp(T(y))
        return float(tower_log(log_phi_of_log(profile, v)))

    lo, hi = target_f - math.log(2.0), target_f
    widen = 0
    while g(lo) > target_f:
        lo -= 1.0
        widen += 1
        if widen > MAX_WIDEN:
            raise ConvergenceError("lower bracket could not be established")
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 4 * math.ulp(hi):
            break
        if g(mid) < target_f:
            lo = mid
        else:
            hi = mid
    y = 0.5 * (lo + hi)
    if abs(g(y) - target_f) > rel_tol * max(1.0, abs(target_f)):
        raise ConvergenceError("deep inversion did not converge")
    return tower_exp(tower_exp(T(y)))


def psi_eval(profile: GrowthProfile, t, rel_tol: float = 1e-12) -> tuple[float, TowerScalar]:
    """Psi(t) = 10 phi^-1(log t)/log t and psi(t) = t^(1 + Psi(t))."""
    ell = tower_log(_tower(t))
    inv = phi_inverse(profile, ell, rel_tol)
    big_psi = math.exp(float(tower_log(inv) - tower_log(ell))) * 10.0
    return big_psi, tower_exp(ell * (1.0 + big_psi))


def phiapp_bracket(profile: GrowthProfile, w, M: float = 2.0, rel_tol: float = 1e-12
                   ) -> tuple[float, float, float]:
    """(log lower bound, log phi^-1(w), log upper bound) for the bracket w^(1 -+ ...)."""
    w = _tower(w)
    big_l = float(tower_log(w))
    theta_w = math.exp(float(profile.log_theta(T(big_l))))
    inv = float(tower_log(phi_inverse(profile, w, rel_tol)))
    return big_l * (1 - M * theta_w), inv, big_l * (1 - theta_w / M)


def phiapp_threshold(profile: GrowthProfile, grid: Sequence[float], M: float = 2.0) -> dict:
    """Smallest sampled w from which the bracket holds at every larger sample."""
    ok = []
    for w in grid:
        lo, mid, hi = phiapp_bracket(profile, w, M)
        ok.append(lo <= mid <= hi)
    threshold = None
    for k in range(len(grid) - 1, -1, -1):
        if not ok[k]:
            break
        threshold = grid[k]
    return {"threshold": threshold, "holds": ok}


@dataclass
class ShiftThreshold:
    t_star: float
    phi_at_start: float
    extended: bool
    samples: list[float]
    passes: list[bool]

    @property
    def all_pass(self) -> bool:
        return all(self.passes)


def phi_shift_threshold(profile: GrowthProfile, alpha: float, M: float, n_check: int = 50
                        ) -> ShiftThreshold:
    """t* = alpha/(M^(1/(1+Phi(1))) - 1) and a check of phi(t+alpha) <= M phi(t) above it.

    When the profile starts after 1, Phi(t_min) stands in for Phi(1), and
    the check grid starts at max(t*, t_min).
    """
    if not (alpha > 0 and M > 1):
        raise DomainError("need alpha > 0 and M > 1")
    start = max(1.0, profile.t_min)
    extended = start > 1.0
    phi1 = profile.theta(start)
    t_star = alpha / (M ** (1.0 / (1.0 + phi1)) - 1.0)
    lo = max(t_star, profile.t_min)
    samples = list(np.geomspace(lo * (1 + 1e-6), lo * 1e12, n_check))
    passes = []
    for t in samples:
        lhs = phi_eval(profile, t + alpha)
        rhs = phi_eval(profile, t) * M
        passes.append(tower_cmp(lhs, rhs) is not Ordering.GT)
    return ShiftThreshold(float(t_star), float(phi1), extended, [float(s) for s in samples], passes)


# ----------------------------------------------------------- law reports
@dataclass
class PropertyResult:
    name: str
    values: list
    passes: list[bool]
    verdict: str
    monotone_fraction: float
    last_value: object

    def to_json(self) -> dict:
        return {"name": self.name, "verdict": self.verdict,
                "monotone_fraction": self.monotone_fraction,
                "last_value": str(self.last_value), "passed_points": int(sum(self.passes)),
                "points": len(self.passes)}


@dataclass
class LawReport:
    grid: list[TowerScalar]
    properties: dict[str, PropertyResult]
    flags: list[str] = field(default_factory=list)
    extension: list[bool] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.verdict == "pass" for p in self.properties.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        names = list(self.properties)
        out.writerow(["t"] + [f"{n}_{col}" for n in names for col in ("value", "pass")] + ["extension"])
        for i, t in enumerate(self.grid):
            row = [str(t)]
            for n in names:
                p = self.properties[n]
                row += [_render(p.values[i]), int(p.passes[i])]
            row.append(int(self.extension[i]) if self.extension else 0)
            out.writerow(row)
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"points": len(self.grid), "first": str(self.grid[0]), "last": str(self.grid[-1]),
                "properties": {k: v.to_json() for k, v in self.properties.items()},
                "flags": list(self.flags), "passed": self.passed}


def _render(v) -> str:
    if isinstance(v, TowerScalar):
        return str(v)
    if isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _as_float(v) -> float:
    return float(v)


def _safe(fn, arg):
    try:
        return fn(arg)
    except DomainError:
        return None


def _defined(v) -> bool:
    return isinstance(v, TowerScalar) or math.isfinite(v)


def _trend(values: list, direction: int) -> tuple[list[bool], float, bool]:
    """Per-point monotonicity in ``direction`` (+1 up, -1 down) and a tail verdict.

    Undefined values fail, and so does the point after them.
    """
    want = Ordering.GT if direction > 0 else Ordering.LT
    passes = [_defined(values[0])]
    for a, b in zip(values[:-1], values[1:]):
        ok = _defined(a) and _defined(b) and tower_cmp(_tower(b), _tower(a)) is want
        passes.append(ok)
    frac = sum(passes[1:]) / max(1, len(passes) - 1)
    tail = passes[len(passes) * 3 // 4:]
    first = next((v for v in values if _defined(v)), None)
    overall = (first is not None and _defined(values[-1]) and all(tail)
               and tower_cmp(_tower(values[-1]), _tower(first)) is want)
    return passes, frac, overall


def parse_grid(spec: str) -> list:
    """``geometric:n:lo:hi``, ``linear:n:lo:hi``, a comma-separated list, or
    ``loglog:n:lo:hi`` for the towers exp(exp(u)) with u geometric in [lo, hi]."""
    parts = spec.split(":")
    if parts[0] == "loglog" and len(parts) == 4:
        n, lo, hi = int(parts[1]), float(parts[2]), float(parts[3])
        return [tower_normalize(2, float(u)) for u in np.geomspace(lo, hi, n)]
    if parts[0] in ("geometric", "linear") and len(parts) == 4:
        n, lo, hi = int(parts[1]), float(parts[2]), float(parts[3])
        fn = np.geomspace if parts[0] == "geometric" else np.linspace
        return [float(x) for x in fn(lo, hi, n)]
    return [float(x) for x in spec.split(",")]


def theta_properties(profile: GrowthProfile, grid: Sequence, beta: float = 0.5) -> LawReport:
    """Check (a) decrease, (b) increase of Phi log t, (c) its divergence,
    (d) Phi(t^2)/Phi(t) -> 1 and (e) (log t)^(beta Phi(log t)) Phi(t) -> infinity."""
    pts = [_tower(t) for t in grid]
    if len(pts) < 20:
        raise DomainError("theta_properties needs at least 20 grid points")
    for a, b in zip(pts[:-1], pts[1:]):
        if tower_cmp(b, a) is not Ordering.GT:
            raise DomainError("grid must be strictly increasing")
    ells = [tower_log(t) for t in pts]
    log_th = [_safe(profile.log_theta, e) for e in ells]
    nan = float("nan")

    a_pass = [lt is not None and profile.decreasing_at(e) for e, lt in zip(ells, log_th)]
    b_pass = [lt is not None and profile.log_increasing_at(e) for e, lt in zip(ells, log_th)]
    prod = [nan if lt is None else tower_exp(tower_log(e) + lt) for e, lt in zip(ells, log_th)]
    c_pass, c_frac, c_ok = _trend(prod, +1)

    ratios = []
    for e, lt in zip(ells, log_th):
        sq = _safe(profile.log_theta, e * 2.0)
        ratios.append(nan if lt is None or sq is None else math.exp(float(sq - lt)))
    dist = [abs(r - 1.0) for r in ratios]
    d_pass, d_frac, d_ok = _trend(dist, -1)

    e_vals = []
    for e, lt in zip(ells, log_th):
        log_ell = _safe(tower_log, e)
        inner = None if log_ell is None else _safe(profile.log_theta, log_ell)
        if lt is None or inner is None:
            e_vals.append(nan)
            continue
        e_vals.append(tower_exp(tower_exp(inner) * beta * log_ell + lt))
    e_up, e_frac, e_ok = _trend(e_vals, +1)
    _, e_down_frac, e_zero = _trend(e_vals, -1)

    flags = []
    if e_zero:
        flags.append("property (e) trends to 0: the (log t)^(beta Phi(log t)) Phi(t) -> 0 regime")
    ext = [profile.in_extension(e) for e in ells]
    if any(ext):
        flags.append("extension region: some grid points lie where Phi is the linear continuation")

    def verdict(ok: bool) -> str:
        return "pass" if ok else "fail"

    props = {
        "a_decreasing": PropertyResult("a_decreasing", [bool(p) for p in a_pass], a_pass,
                                       verdict(all(a_pass)), sum(a_pass) / len(a_pass), a_pass[-1]),
        "b_log_increasing": PropertyResult("b_log_increasing", [bool(p) for p in b_pass], b_pass,
                                           verdict(all(b_pass)), sum(b_pass) / len(b_pass), b_pass[-1]),
        "c_log_divergence": PropertyResult("c_log_divergence", prod, c_pass, verdict(c_ok), c_frac, prod[-1]),
        "d_square_ratio": PropertyResult("d_square_ratio", ratios, d_pass, verdict(d_ok), d_frac, ratios[-1]),
        "e_beta_divergence": PropertyResult("e_beta_divergence", e_vals, e_up,
                                            "trend-to-zero" if e_zero else verdict(e_ok), e_frac, e_vals[-1]),
    }
    return LawReport(pts, props, flags, ext)


@dataclass
class DerivativeReport:
    grid: list[float]
    closed_form: list[float]
    finite_difference: list[float]
    rel_errors: list[float]
    h_rel: float
    tolerance: float = 1e-6

    @property
    def max_rel_error(self) -> float:
        return max(self.rel_errors)

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["t", "closed_form", "finite_difference", "rel_error"])
        for row in zip(self.grid, self.closed_form, self.finite_difference, self.rel_errors):
            out.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"points": len(self.grid), "h_rel": self.h_rel, "max_rel_error": self.max_rel_error,
                "tolerance": self.tolerance, "passed": self.passed,
                "rows": [{"t": t, "closed_form": c, "finite_difference": f, "rel_error": e}
                         for t, c, f, e in zip(self.grid, self.closed_form, self.finite_difference,
                                               self.rel_errors)]}


def theta_derivative_check(profile: LogLogAlpha, grid: Sequence[float], h_rel: float = 1e-4
                           ) -> DerivativeReport:
    """Closed-form Phi' against central differences with step h = h_rel * t."""
    if not isinstance(profile, LogLogAlpha):
        raise DomainError("the closed-form derivative is only available for loglog_alpha")

    def theta(t: float) -> float:
        return math.log(math.log(t)) ** (-profile.alpha)

    closed, fd, err = [], [], []
    for t in grid:
        t = float(t)
        h = h_rel * t
        d_fd = (theta(t + h) - theta(t - h)) / (2 * h)
        d_cf = profile.derivative(t)
        closed.append(d_cf)
        fd.append(d_fd)
        err.append(abs(d_fd - d_cf) / abs(d_cf))
    return DerivativeReport([float(t) for t in grid], closed, fd, err, h_rel)
