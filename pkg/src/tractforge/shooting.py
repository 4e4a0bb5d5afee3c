"""Choosing gate sizes so each target modulus pulls back onto its gate abscissa."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .conformal.handle import MapHandle, map_build
from .errors import NoBracket, NonConvergence, NotInTract, TruncationError
from .report import CertLine, CertReport
from .tract.toy import ToyTract, region_classify

SWEEP = np.geomspace(1e-3, 1.0, 13)
FACTOR = 2.0


@dataclass(frozen=True)
class GateVector:
    eps: tuple[float, ...]
    brackets: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for e, (a, b) in zip(self.eps, self.brackets):
            if not a < b:
                raise ValueError(f"degenerate bracket ({a}, {b})")
            if not a <= e <= b:
                raise ValueError(f"eps {e} outside its bracket ({a}, {b})")

    def to_json(self) -> dict:
        return {"eps": list(self.eps), "brackets": [list(b) for b in self.brackets]}


@dataclass(frozen=True)
class DeltaVector:
    delta: tuple[float, ...]

    @property
    def residual(self) -> float:
        return max((abs(d) for d in self.delta), default=0.0)

    def to_json(self) -> dict:
        return {"delta": list(self.delta), "residual": self.residual}


class Evaluator:
    """Builds maps for candidate gate vectors, warm-starting from the last build."""

    def __init__(self, template: ToyTract, accuracy: float = 1e-8):
        self.template = template
        self.accuracy = accuracy
        self.builds = 0
        self._last: MapHandle | None = None

    def handle(self, eps: Sequence[float]) -> tuple[ToyTract, MapHandle]:
        tract = self.template.with_eps(eps)
        h = map_build(tract, self.accuracy, previous=self._last)
        self._last = h
        self.builds += 1
        return tract, h

    def deltas(self, eps: Sequence[float], targets: Sequence[float], which=None) -> list[float]:
        tract, h = self.handle(eps)
        idx = range(len(targets)) if which is None else which
        return [delta_j(h, tract, j, targets[j]) for j in idx]


def preimage(handle: MapHandle, target_modulus: float) -> complex:
    """F^-1 of the positive real point with the given modulus.

    The trust test is made on the preimage's abscissa, which is equivalent on
    the real geodesic and avoids evaluating the trusted modulus per build."""
    z = complex(handle.inverse(complex(target_modulus, 0.0), check=False))
    if z.real > handle.tract.trusted_xmax():
        raise TruncationError(f"preimage of {target_modulus:.6g} lies beyond the trusted abscissa")
    return z


def delta_j(handle: MapHandle, tract: ToyTract, j: int, target_modulus: float) -> float:
    """Signed distance of F^-1(target) from the gate abscissa of wiggle j, in [-1, 1]."""
    z = preimage(handle, target_modulus)
    if not bool(tract.contains(z)):
        # boundary round-off: nudge into the domain along the imaginary direction
        z = complex(z.real, float(np.clip(z.imag, -math.pi + 1e-9, math.pi - 1e-9)))
        if not bool(tract.contains(z)):
            raise NotInTract(f"preimage {z} of {target_modulus} left the tract")
    return region_classify(tract, z, j).delta


def forward_targets(tract: ToyTract, handle: MapHandle | None = None, xtol: float = 1e-12) -> list[float]:
    """For each wiggle, the modulus whose preimage sits exactly at the gate abscissa (delta = 0)."""
    h = handle if handle is not None else map_build(tract)
    out = []
    for j, w in enumerate(tract.wiggles):
        def g(log_rho: float) -> float:
            return delta_j(h, tract, j, math.exp(log_rho))

        guess = math.log(abs(h.eval(complex(w.tau, 0.0), warn=False)))
        lo, hi = guess - 0.5, guess + 0.5
        for _ in range(40):
            if g(lo) < 0:
                break
            lo -= 1.0
        for _ in range(40):
            if g(hi) > 0:
                break
            hi += 1.0
        if not (g(lo) < 0 < g(hi)):
            raise NoBracket(f"no modulus brackets the gate of wiggle {j}")
        out.append(math.exp(brentq(g, lo, hi, xtol=xtol)))
    return out


def _mid(bracket: tuple[float, float]) -> float:
    return math.sqrt(bracket[0] * bracket[1])


def gate_bracket(template: ToyTract, j: int, target_modulus: float, others: Sequence[float] | None = None,
                 tol: float = 1e-6, refine: int = 4, evaluator: Evaluator | None = None
                 ) -> tuple[float, float]:
    """Interval [a*, b*] of eps_j with delta_j(a*) <= -1 + tol and delta_j(b*) >= 1 - tol.

    ``others`` fixes the remaining gates (default: the template's values).  A
    geometric walk from the current eps_j over [1e-3, 1] locates the two faces;
    each is then pulled inward by ``refine`` bisection steps in log eps.
    """
    ev = evaluator or Evaluator(template)
    base = list(template.eps if others is None else others)

    def d(e: float) -> float:
        vec = list(base)
        vec[j] = e
        return ev.deltas(vec, [0.0] * j + [target_modulus], which=[j])[0]

    # walk outward from the starting value by factors of FACTOR until both faces are seen
    low_face, high_face = (lambda v: v <= -1 + tol), (lambda v: v >= 1 - tol)
    e0 = float(min(max(base[j], SWEEP[0]), 1.0))
    vals = {e0: d(e0)}
    e = e0
    while not low_face(vals[e]):
        if e <= SWEEP[0]:
            raise NoBracket(f"gate {j}: delta never reaches -1 on [{SWEEP[0]:g}, 1]")
        e = max(e / FACTOR, float(SWEEP[0]))
        vals[e] = d(e)
    e = e0
    while not high_face(vals[e]):
        if e >= 1.0:
            raise NoBracket(f"gate {j}: delta never reaches +1 on [{SWEEP[0]:g}, 1]")
        e = min(e * FACTOR, 1.0)
        vals[e] = d(e)
    b = min(e for e, v in vals.items() if high_face(v) and any(low_face(w) for x, w in vals.items() if x < e))
    a = max(e for e, v in vals.items() if low_face(v) and e < b)
    a_out = min(e for e, v in vals.items() if e > a and not low_face(v))
    b_out = max(e for e, v in vals.items() if e < b and not high_face(v))
    for _ in range(refine):
        m = math.sqrt(a * a_out)
        if d(m) <= -1 + tol:
            a = m
        else:
            a_out = m
        m = math.sqrt(b * b_out)
        if d(m) >= 1 - tol:
            b = m
        else:
            b_out = m
    return a, b


@dataclass
class SolveTranscript:
    residuals: list[float] = field(default_factory=list)
    brackets: list[list[list[float]]] = field(default_factory=list)
    eps: list[list[float]] = field(default_factory=list)
    builds: int = 0

    def to_json(self) -> dict:
        return {"residuals": self.residuals, "brackets": self.brackets, "eps": self.eps,
                "map_builds": self.builds}


def establish_brackets(template: ToyTract, targets: Sequence[float], tol: float = 1e-6,
                       evaluator: Evaluator | None = None) -> list[tuple[float, float]]:
    """Brackets for every gate, low j first; bracketed gates sit at their geometric midpoints."""
    ev = evaluator or Evaluator(template)
    eps = list(template.eps)
    brackets = []
    for j, target in enumerate(targets):
        a, b = gate_bracket(template, j, target, eps, tol=tol, evaluator=ev)
        brackets.append((a, b))
        eps[j] = _mid((a, b))
    return brackets


def _solve_coordinate(ev: Evaluator, eps: list[float], j: int, bracket: tuple[float, float],
                      targets: Sequence[float], current: float, tol: float) -> tuple[float, float]:
    """Bisect eps_j (in log) until |delta_j| <= tol/2, starting from a sub-bracket around eps_j."""
    a, b = bracket

    def d(e: float) -> float:
        vec = list(eps)
        vec[j] = e
        return ev.deltas(vec, targets, which=[j])[0]

    x, dx = eps[j], current
    if abs(dx) <= tol / 2:
        return x, dx
    # grow a sub-bracket from the current point until delta changes sign
    lo, hi = (x, None) if dx < 0 else (None, x)
    step = 1.05
    while lo is None or hi is None:
        y = min(b, x * step) if dx < 0 else max(a, x / step)
        dy = d(y)
        if (dy < 0) == (dx < 0):
            if (dx < 0 and y >= b) or (dx > 0 and y <= a):
                return y, dy
            x, dx = y, dy
            lo, hi = (x, None) if dx < 0 else (None, x)
            step *= step
            continue
        if abs(dy) <= tol / 2:
            return y, dy
        lo, hi = (x, y) if dx < 0 else (y, x)
    best = (x, dx)
    for _ in range(60):
        m = math.sqrt(lo * hi)
        dm = d(m)
        if abs(dm) < abs(best[1]):
            best = (m, dm)
        if abs(dm) <= tol / 2 or hi / lo - 1 < 1e-13:
            break
        if dm < 0:
            lo = m
        else:
            hi = m
    return best


def shoot_solve(template: ToyTract, targets: Sequence[float], tol: float = 1e-3, max_rounds: int = 25,
                brackets: Sequence[tuple[float, float]] | None = None, evaluator: Evaluator | None = None
                ) -> tuple[GateVector, DeltaVector, SolveTranscript]:
    """Gauss-Seidel sweeps, low j to high j, bisecting each eps_j on its bracket.

    Returns the gate vector, its deltas re-evaluated on a fresh map build, and
    the solve transcript.  Raises NonConvergence when ``max_rounds`` pass
    without reaching ``tol`` or the residual stops improving.
    """
    if tol < 1e-4:
        raise ValueError("tol must be at least 1e-4")
    targets = list(targets)
    if len(targets) != len(template.wiggles):
        raise ValueError("one target per gate is required")
    ev = evaluator or Evaluator(template)
    if brackets is None:
        brackets = establish_brackets(template, targets, evaluator=ev)
    brackets = [tuple(map(float, b)) for b in brackets]
    eps = [_mid(b) for b in brackets]
    log = SolveTranscript(brackets=[list(b) for b in brackets])
    best_eps, best_res = list(eps), math.inf
    stall = 0
    for _ in range(max_rounds):
        deltas = ev.deltas(eps, targets)
        res = max(abs(v) for v in deltas)
        log.residuals.append(res)
        log.eps.append(list(eps))
        if res < best_res - 1e-12:
            best_eps, best_res, stall = list(eps), res, 0
        else:
            stall += 1
        if res <= tol:
            break
        if stall >= 3:
            log.builds = ev.builds
            raise NonConvergence(f"residual stalled at {best_res:.3e}",
                                 GateVector(tuple(best_eps), tuple(brackets)), list(log.residuals))
        for j in range(len(eps)):
            current = deltas[j] if j == 0 else ev.deltas(eps, targets, which=[j])[0]
            eps[j], _ = _solve_coordinate(ev, eps, j, brackets[j], targets, current, tol)
    else:
        log.builds = ev.builds
        raise NonConvergence(f"no convergence in {max_rounds} rounds (best {best_res:.3e})",
                             GateVector(tuple(best_eps), tuple(brackets)), list(log.residuals))
    fresh = Evaluator(template, ev.accuracy)
    final = DeltaVector(tuple(fresh.deltas(eps, targets)))
    ev.builds += fresh.builds
    log.builds = ev.builds
    if final.residual > tol:
        raise NonConvergence(f"fresh rebuild gives residual {final.residual:.3e}",
                             GateVector(tuple(eps), tuple(brackets)), list(log.residuals))
    return GateVector(tuple(eps), tuple(brackets)), final, log


def endpoint_sign_check(template: ToyTract, N: int, brackets: Sequence[tuple[float, float]],
                        targets: Sequence[float], perturbations: int = 0, seed: int = 0,
                        tol: float = 1e-6, evaluator: Evaluator | None = None) -> CertReport:
    """Pin eps_j to a_j* then b_j* (others at mid-bracket) and check delta_j = -1 then +1.

    With ``perturbations > 0`` each face is re-checked with the free gates drawn
    log-uniformly from the middle half of their brackets.
    """
    ev = evaluator or Evaluator(template)
    rng = np.random.default_rng(seed)
    mids = [_mid(b) for b in brackets[:N]]
    report = CertReport("endpoint faces")
    for j in range(N):
        for side, want in ((0, -1.0), (1, 1.0)):
            trials = [list(mids)]
            for _ in range(perturbations):
                vec = []
                for k, (a, b) in enumerate(brackets[:N]):
                    la, lb = math.log(a), math.log(b)
                    span = (lb - la) / 4
                    vec.append(math.exp(rng.uniform(la + span, lb - span)))
                trials.append(vec)
            for t, vec in enumerate(trials):
                vec = list(vec)
                vec[j] = brackets[j][side]
                dj = ev.deltas(vec, targets, which=[j])[0]
                ok = dj <= -1 + tol if want < 0 else dj >= 1 - tol
                name = f"face[j={j},{'a' if side == 0 else 'b'}]" + (f"[perturbed {t}]" if t else "")
                report.add(CertLine(name, ok, dj, want, "<=" if want < 0 else ">=", tol,
                                    measured={"eps": vec}))
    return report
