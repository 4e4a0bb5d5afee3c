"""Tract data at full scale: the r_j, R_j recurrence and its certificates."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidDatum
from ..growth import (GrowthProfile, log_excess, phi_eval, phi_inverse, profile_from_json, scaled_theta)
from ..report import CertLine
from ..tower import Ordering, TowerScalar, _log_ratio, tower_cmp, tower_exp, tower_log, tower_sum

PI = 3.141592653589793
T = TowerScalar.from_float


def _gt(a: TowerScalar, b: TowerScalar) -> bool:
    return tower_cmp(a, b) is Ordering.GT


def _eq(a: TowerScalar, b: TowerScalar) -> bool:
    return tower_cmp(a, b) is Ordering.EQ


@dataclass(frozen=True)
class WiggleRecord:
    j: int
    r: TowerScalar
    R: TowerScalar
    tau: TowerScalar
    log_a: TowerScalar
    log_b: TowerScalar
    eps: float | None = None
    log_gap: TowerScalar | None = None  # log R - log r, kept exactly from the recurrence

    def to_json(self) -> dict:
        out = {"j": self.j, "log_r": tower_log(self.r).to_json(), "log_R": tower_log(self.R).to_json(),
               "tau": self.tau.to_json(), "log_a": self.log_a.to_json(), "log_b": self.log_b.to_json()}
        if self.eps is not None:
            out["eps"] = self.eps
        if self.log_gap is not None:
            out["log_gap"] = self.log_gap.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "WiggleRecord":
        p = TowerScalar.from_json
        gap = p(data["log_gap"]) if "log_gap" in data else None
        return cls(int(data["j"]), tower_exp(p(data["log_r"])), tower_exp(p(data["log_R"])),
                   p(data["tau"]), p(data["log_a"]), p(data["log_b"]), data.get("eps"), gap)

    def gap(self) -> TowerScalar:
        """log R - log r, from the stored exact value when available."""
        if self.log_gap is not None:
            return self.log_gap
        return tower_log(self.R) - tower_log(self.r)


@dataclass
class TractDatum:
    profile: GrowthProfile
    r0: TowerScalar
    C: float
    nu0: float
    terms: list[WiggleRecord]
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"profile": self.profile.to_json(), "r0": self.r0.to_json(), "C": self.C,
                "nu0": self.nu0, "terms": [t.to_json() for t in self.terms], "flags": list(self.flags)}

    @classmethod
    def from_json(cls, data: dict) -> "TractDatum":
        return cls(profile_from_json(data["profile"]), TowerScalar.from_json(data["r0"]),
                   float(data["C"]), float(data["nu0"]),
                   [WiggleRecord.from_json(t) for t in data["terms"]], list(data.get("flags", [])))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _spacing(nu0: float) -> tuple[float, float]:
    return max(5 + 3 * nu0, 30.0), max(2 * nu0, 60.0)


def _inverse_profile(profile: GrowthProfile, w: TowerScalar) -> tuple[GrowthProfile, bool]:
    """The profile itself, or its continuation down to t = 1 when w < phi(t_min)."""
    if tower_cmp(w, phi_eval(profile, profile.t_min)) is Ordering.LT:
        return scaled_theta(profile, 1.0, t_min=1.0), True
    return profile, False


def initial_gap(profile: GrowthProfile, r0: TowerScalar) -> tuple[TowerScalar, bool]:
    """log R_0 - log r_0 = 9 phi^-1(log r_0 + 1) + 1."""
    w = tower_log(r0) + 1.0
    prof, extended = _inverse_profile(profile, w)
    inv = phi_inverse(prof, w, 1e-12)
    return inv * 9.0 + 1.0, extended


def initial_R(profile: GrowthProfile, r0: TowerScalar) -> tuple[TowerScalar, bool]:
    """R_0 = r_0 exp(9 phi^-1(log r_0 + 1) + 1)."""
    gap, extended = initial_gap(profile, r0)
    return r0 * tower_exp(gap), extended


def _record(profile, j, r, R, C, nu0, gap) -> tuple[WiggleRecord, TowerScalar]:
    phi_R = phi_eval(profile, R)
    tau = R - (2 + 3 * nu0)
    return WiggleRecord(j, r, R, tau, phi_R * (-2 * C), phi_R * (-1 / (2 * C)), None, gap), phi_R


def datum_generate(profile: GrowthProfile, r0, C: float = 30.0, nu0: float = 60.0, N: int = 1
                   ) -> TractDatum:
    """Run log r_{j+1} = phi(R_j) - 1, log R_{j+1} = phi(R_j) + 9 R_j from r_0."""
    r0 = TowerScalar.parse(r0)
    if N < 1 or not C > 1 or not nu0 > 0:
        raise InvalidDatum("need N >= 1, C > 1 and nu0 > 0")
    if not _gt(r0, T(6.0)):
        raise InvalidDatum("r0 too small: need r0 > 6")
    gap, extended = initial_gap(profile, r0)
    R0 = r0 * tower_exp(gap)
    gap_rR, _ = _spacing(nu0)
    if not _difference_exceeds(tower_log(r0), gap, gap_rR):
        raise InvalidDatum(f"r0 too small: R_0 = {R0} does not exceed r_0 + {gap_rR}")
    flags = ["R_0 uses phi^-1 in the extension region below t_min"] if extended else []
    terms = []
    r, R = r0, R0
    for j in range(N):
        rec, phi_R = _record(profile, j, r, R, C, nu0, gap)
        terms.append(rec)
        if j + 1 < N:
            gap = R * 9.0 + 1.0
            r = tower_exp(phi_R - 1.0)
            R = tower_exp(phi_R + R * 9.0)
    return TractDatum(profile, r0, float(C), float(nu0), terms, flags)


def _log_expm1(x: TowerScalar) -> TowerScalar:
    if x.level == 0:
        if x.mantissa <= 0:
            raise InvalidDatum("non-positive log gap")
        return T(float(np.log(np.expm1(x.mantissa)))) if x.mantissa < 40 else x
    return x


def _difference_exceeds(log_small: TowerScalar, gap: TowerScalar, amount: float) -> bool:
    """Whether e^(log_small + gap) - e^log_small > amount, given gap = log big - log small."""
    if _signum_nonpos(gap):
        return False
    return _gt(log_small + _log_expm1(gap), T(float(np.log(amount))))


def _signum_nonpos(x: TowerScalar) -> bool:
    return tower_cmp(x, T(0.0)) is not Ordering.GT


@dataclass
class ValidationReport:
    lines: list[CertLine]

    @property
    def passed(self) -> bool:
        return all(line.passed for line in self.lines)

    def failures(self) -> list[CertLine]:
        return [line for line in self.lines if not line.passed]

    def for_index(self, j: int) -> list[CertLine]:
        return [line for line in self.lines if line.measured.get("j") == j]

    def to_json(self) -> dict:
        return {"passed": self.passed, "lines": [line.to_json() for line in self.lines]}


def _line(claim: str, j: int, lhs, rhs, relation: str, ok: bool, detail: str = "") -> CertLine:
    return CertLine(f"{claim}[j={j}]", bool(ok), str(lhs), str(rhs), relation, None, detail, {"j": j})


def _diff_exceeds(log_small: TowerScalar, gap: TowerScalar, amount: float) -> bool:
    if amount <= 0:
        return tower_cmp(gap, T(0.0)) is Ordering.GT
    return _difference_exceeds(log_small, gap, amount)


def _difference(log_small: TowerScalar, gap: TowerScalar) -> TowerScalar:
    """e^(log_small + gap) - e^log_small, or 0 when gap <= 0."""
    if _signum_nonpos(gap):
        return T(0.0)
    return tower_exp(log_small + _log_expm1(gap))


def _tau_offset(t: WiggleRecord, nominal: float) -> tuple[float, str]:
    """R_j - tau_j.  Past double precision the stored tau cannot be told apart from
    R_j - nominal, so a value matching it is read as exactly that."""
    if _eq(t.tau, t.R - nominal):
        return nominal, ""
    d = t.R - t.tau
    return float(d), "tau offset from stored values"


def datum_validate(datum: TractDatum) -> ValidationReport:
    """Spacing, growth-of-index bounds, the summation lemma and recurrence consistency, per j.

    Differences of neighbouring radii are formed from log R - log r, which the
    datum keeps exactly; subtracting the radii themselves loses everything once
    they reach the second tower level."""
    if not datum.terms:
        raise InvalidDatum("datum has no terms")
    lines: list[CertLine] = []
    gap_rR, gap_Rr = _spacing(datum.nu0)
    nominal = 2 + 3 * datum.nu0
    C = datum.C
    M = 2 * C ** 2
    terms = datum.terms
    phis = [phi_eval(datum.profile, t.R) for t in terms]
    if not _gt(terms[0].r, T(6.0)):
        lines.append(_line("datasets.r0", 0, terms[0].r, 6, ">", False))
    for t, phi_R in zip(terms, phis):
        j = t.j
        log_r, gap = tower_log(t.r), t.gap()
        width = _difference(log_r, gap)
        lines.append(_line("datasets.R-r", j, width, 30.0, ">", _diff_exceeds(log_r, gap, 30.0)))
        lines.append(_line("rRspacing.R-r", j, width, gap_rR, ">", _diff_exceeds(log_r, gap, gap_rR)))
        offset, note = _tau_offset(t, nominal)
        lines.append(_line("datasets.tau", j, width, offset, ">", _diff_exceeds(log_r, gap, offset), note))
        lines.append(_line("datasets.tau_upper", j, offset, 1 + 3 * PI, ">", offset > 1 + 3 * PI, note))
        lines.append(_line("rjbounds.R", j, t.R, 36 + 90 * j, ">", _gt(t.R, T(36 + 90 * j))))
        lines.append(_line("rjbounds.r", j, t.r, 6 + 90 * j, ">", _gt(t.r, T(6 + 90 * j))))
        total = tower_sum(p * M for p in phis[:j])
        lines.append(_line("sumlem", j, total, t.R, "<", tower_cmp(total, t.R) is Ordering.LT))
        tau_expected = t.R - nominal
        lines.append(_line("recurrence.tau", j, t.tau, tau_expected, "==", _eq(t.tau, tau_expected)))
        la, lb = phi_R * (-2 * C), phi_R * (-1 / (2 * C))
        a_ok, b_ok = _eq(t.log_a, la), _eq(t.log_b, lb)
        lines.append(_line("recurrence.log_a", j, t.log_a, la, "==", a_ok))
        lines.append(_line("recurrence.log_b", j, t.log_b, lb, "==", b_ok))
        order = tower_cmp(t.log_a, t.log_b)
        note = ""
        if order is Ordering.EQ and a_ok and b_ok:
            # log_a / log_b = 4 C^2 exactly; the tower mantissas agree to double precision
            order, note = (Ordering.LT if 4 * C * C > 1 else Ordering.GT), "ratio 4 C^2"
        ordered = order is Ordering.LT and tower_cmp(t.log_b, T(0.0)) is Ordering.LT
        lines.append(_line("ajbj.order", j, t.log_a, t.log_b, "<", ordered, note))
    for prev, nxt, phi_R in zip(terms[:-1], terms[1:], phis[:-1]):
        j = nxt.j
        log_R = tower_log(prev.R)
        step = tower_log(nxt.r) - log_R
        width = _difference(log_R, step)
        lines.append(_line("datasets.r-R", j, width, 60.0, ">", _diff_exceeds(log_R, step, 60.0)))
        lines.append(_line("rRspacing.r-R", j, width, gap_Rr, ">", _diff_exceeds(log_R, step, gap_Rr)))
        lr, lR = tower_log(nxt.r), tower_log(nxt.R)
        lines.append(_line("recurrence.log_r", j, lr, phi_R - 1.0, "==", _eq(lr, phi_R - 1.0)))
        expect = phi_R + prev.R * 9.0
        lines.append(_line("recurrence.log_R", j, lR, expect, "==", _eq(lR, expect)))
        if nxt.log_gap is not None:
            expect = prev.R * 9.0 + 1.0
            lines.append(_line("recurrence.gap", j, nxt.log_gap, expect, "==", _eq(nxt.log_gap, expect)))
    gap0, _ = initial_gap(datum.profile, terms[0].r)
    R0 = terms[0].r * tower_exp(gap0)
    lines.append(_line("recurrence.R0", 0, terms[0].R, R0, "==", _eq(terms[0].R, R0)))
    if terms[0].log_gap is not None:
        lines.append(_line("recurrence.gap", 0, terms[0].log_gap, gap0, "==", _eq(terms[0].log_gap, gap0)))
    return ValidationReport(lines)


def range_bounds_certify(datum: TractDatum, j: int) -> CertLine:
    """Both derivation chains of the overshoot/undershoot bounds at index j, worst case eps_k = a_k.

    Each step is decided in an equivalent reduced form.  With E = Phi(R) log R,
    phi(R) = R e^E, so comparisons between R and phi(R) become comparisons of E
    against a constant; E itself is computed directly, never as a difference."""
    if not 0 <= j < len(datum.terms):
        raise IndexError(f"j={j} outside the datum")
    C = datum.C
    phis = [phi_eval(datum.profile, t.R) for t in datum.terms[: j + 1]]
    R, phi_R = datum.terms[j].R, phis[j]
    log_R = tower_log(R)
    excess = log_excess(datum.profile, log_R)
    past = tower_sum(p * (2 * C) for p in phis[:j])
    steps = []

    # chain (i), eps_j = a_j:  (R + past + 2C phi)/C >= 2 phi  <=>  (R + past)/C >= 0
    slack = (R + past) * (1 / C)
    steps.append(("i.1", "(R + past)/C", slack, ">=", T(0.0), tower_cmp(slack, T(0.0)) is not Ordering.LT))
    #   2 phi > phi + 9R  <=>  E > log 9
    steps.append(("i.2", "Phi(R) log R", excess, ">", T(math.log(9)), _gt(excess, T(math.log(9)))))

    # chain (ii), eps_j = b_j:  C(R + past + phi/(2C)) < (2/3) phi  <=>  6C(R + past) < phi
    #   <=>  log(6C) + log(1 + past/R) < E
    if past.is_zero:
        share = 0.0
    elif tower_cmp(past, R) is Ordering.LT:
        share = math.log1p(math.exp(_log_ratio(R, past)))
    else:
        share = math.inf
    bound = T(math.log(6 * C) + share) if math.isfinite(share) else tower_log(past) - log_R
    steps.append(("ii.1", "Phi(R) log R", excess, ">", bound, _gt(excess, bound)))
    #   (2/3) phi < phi - 1  <=>  phi > 3
    steps.append(("ii.2", "phi(R)", phi_R, ">", T(3.0), _gt(phi_R, T(3.0))))

    failed = next((s for s in steps if not s[5]), None)
    measured = {"j": j, "steps": [{"step": s[0], "quantity": s[1], "lhs": str(s[2]), "relation": s[3],
                                   "rhs": str(s[4]), "passed": bool(s[5])} for s in steps]}
    if failed is None:
        return CertLine(f"range_bounds[j={j}]", True, None, None, "", None, "both chains hold", measured)
    name, _, lhs, rel, rhs, _ = failed
    return CertLine(f"range_bounds[j={j}]", False, str(lhs), str(rhs), rel, None,
                    f"chain step {name} fails", measured)
