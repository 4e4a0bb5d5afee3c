"""Iterated-exponential scalars.

A :class:`TowerScalar` stores ``sign * exp^level(mantissa)``.  Normalised
values with ``level >= 1`` keep the mantissa in ``[L_MIN, L_MAX)``, so the
ordering of magnitudes is lexicographic in ``(level, mantissa)``.  Level 0
holds ordinary reals of magnitude below ``L_MAX``; its mantissa carries the
sign itself.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError, InvalidScalar

L_MAX = 1e8
L_MIN = math.log(L_MAX)
EQ_TOL = 1e-10
ABSORB_REL = 1e-15
_EXP_SAFE = 700.0


class Ordering(Enum):
    LT = -1
    EQ = 0
    GT = 1


@dataclass(frozen=True)
class TowerScalar:
    level: int
    mantissa: float
    sign: int = 1
    absorbed: bool = False

    # -------------------------------------------------------- construction
    @classmethod
    def from_float(cls, x: float) -> "TowerScalar":
        return tower_normalize(0, float(x))

    @classmethod
    def parse(cls, text: str | float | int | dict | "TowerScalar") -> "TowerScalar":
        """Accept a number, a ``{"level", "mantissa"}`` mapping or ``exp^k(m)``."""
        if isinstance(text, TowerScalar):
            return text
        if isinstance(text, dict):
            return cls.from_json(text)
        if isinstance(text, (int, float)):
            return cls.from_float(float(text))
        s = str(text).strip()
        neg = s.startswith("-")
        body = s[1:] if neg else s
        m = re.fullmatch(r"exp\^(\d+)\((.+)\)", body)
        if m:
            out = tower_normalize(int(m.group(1)), float(m.group(2)))
        else:
            try:
                out = cls.from_float(float(body))
            except ValueError as exc:
                raise InvalidScalar(f"cannot parse tower value {text!r}") from exc
        return negate(out) if neg else out

    # ---------------------------------------------------------- conversion
    @property
    def is_zero(self) -> bool:
        return self.level == 0 and self.mantissa == 0.0

    @property
    def positive(self) -> bool:
        return self.sign > 0 and (self.level > 0 or self.mantissa > 0)

    def __float__(self) -> float:
        v = self.mantissa
        for _ in range(self.level):
            if v > _EXP_SAFE:
                return self.sign * math.inf
            v = math.exp(v)
        return self.sign * v

    def to_json(self) -> dict:
        out = {"level": self.level, "mantissa": self.mantissa}
        if self.sign < 0:
            out["sign"] = -1
        return out

    @classmethod
    def from_json(cls, data: dict) -> "TowerScalar":
        try:
            level, mantissa = int(data["level"]), float(data["mantissa"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidScalar(f"bad tower JSON {data!r}") from exc
        out = tower_normalize(level, mantissa)
        return negate(out) if int(data.get("sign", 1)) < 0 else out

    def __str__(self) -> str:
        head = "-" if self.sign < 0 else ""
        return f"{head}exp^{self.level}({self.mantissa!r})"

    # ----------------------------------------------------------- operators
    def _coerce(self, other) -> "TowerScalar":
        return other if isinstance(other, TowerScalar) else TowerScalar.from_float(float(other))

    def __add__(self, other):
        return tower_combine(self, self._coerce(other), "add")

    __radd__ = __add__

    def __sub__(self, other):
        return tower_combine(self, negate(self._coerce(other)), "add")

    def __rsub__(self, other):
        return tower_combine(self._coerce(other), negate(self), "add")

    def __mul__(self, other):
        return tower_combine(self, self._coerce(other), "mul")

    __rmul__ = __mul__

    def __neg__(self):
        return negate(self)

    def __pow__(self, p):
        return tower_combine(self, self._coerce(p), "pow")

    def __lt__(self, other):
        return tower_cmp(self, self._coerce(other)) is Ordering.LT

    def __le__(self, other):
        return tower_cmp(self, self._coerce(other)) is not Ordering.GT

    def __gt__(self, other):
        return tower_cmp(self, self._coerce(other)) is Ordering.GT

    def __ge__(self, other):
        return tower_cmp(self, self._coerce(other)) is not Ordering.LT

    def __eq__(self, other):
        if not isinstance(other, (TowerScalar, int, float)):
            return NotImplemented
        return tower_cmp(self, self._coerce(other)) is Ordering.EQ

    def __hash__(self):
        return hash((self.level, round(self.mantissa, 8), self.sign))


# ------------------------------------------------------------ primitives
def tower_normalize(level: int, mantissa: float, sign: int = 1) -> TowerScalar:
    """Bring ``sign * exp^level(mantissa)`` to normal form."""
    if not math.isfinite(mantissa):
        raise InvalidScalar(f"non-finite mantissa {mantissa!r}")
    if level < 0:
        raise InvalidScalar("level must be nonnegative")
    level, m = int(level), float(mantissa)
    if level == 0 and m < 0:
        sign, m = -sign, -m
    while level >= 1 and m < L_MIN:
        m = math.exp(m)
        level -= 1
    while m >= L_MAX:
        m = math.log(m)
        level += 1
    if level == 0:
        return TowerScalar(0, sign * m + 0.0)
    return TowerScalar(level, m, 1 if sign > 0 else -1)


def negate(x: TowerScalar) -> TowerScalar:
    if x.level == 0:
        return TowerScalar(0, -x.mantissa + 0.0, 1, x.absorbed)
    return TowerScalar(x.level, x.mantissa, -x.sign, x.absorbed)


def _magnitude(x: TowerScalar) -> TowerScalar:
    return TowerScalar(0, abs(x.mantissa)) if x.level == 0 else TowerScalar(x.level, x.mantissa)


def tower_exp(x: TowerScalar) -> TowerScalar:
    if x.level == 0:
        return tower_normalize(1, x.mantissa) if x.mantissa >= L_MIN else TowerScalar(0, math.exp(x.mantissa))
    if x.sign < 0:
        return TowerScalar(0, 0.0)
    return tower_normalize(x.level + 1, x.mantissa)


def tower_log(x: TowerScalar) -> TowerScalar:
    if x.level == 0:
        if x.mantissa <= 0:
            raise DomainError(f"log of non-positive value {x.mantissa!r}")
        return TowerScalar(0, math.log(x.mantissa))
    if x.sign < 0:
        raise DomainError("log of a negative tower value")
    return tower_normalize(x.level - 1, x.mantissa)


def _cmp_mag(x: TowerScalar, y: TowerScalar) -> int:
    """Compare |x| and |y| (normalised); -1, 0 or 1."""
    ax, ay = _magnitude(x), _magnitude(y)
    if ax.level != ay.level:
        return -1 if ax.level < ay.level else 1
    tol = EQ_TOL * max(1.0, abs(ax.mantissa), abs(ay.mantissa))
    d = ax.mantissa - ay.mantissa
    if abs(d) <= tol:
        return 0
    return -1 if d < 0 else 1


def _signum(x: TowerScalar) -> int:
    if x.level == 0:
        return (x.mantissa > 0) - (x.mantissa < 0)
    return x.sign


def tower_cmp(x: TowerScalar, y: TowerScalar) -> Ordering:
    """Total order on represented values, with equality up to the mantissa tolerance."""
    if x.level == 0 and y.level == 0:
        tol = EQ_TOL * max(1.0, abs(x.mantissa), abs(y.mantissa))
        d = x.mantissa - y.mantissa
        return Ordering.EQ if abs(d) <= tol else (Ordering.LT if d < 0 else Ordering.GT)
    sx, sy = _signum(x), _signum(y)
    if sx != sy:
        return Ordering.LT if sx < sy else Ordering.GT
    c = _cmp_mag(x, y) * (sx if sx != 0 else 1)
    return Ordering(c)


# ------------------------------------------------------ log-domain helpers
def _log_ratio(big: TowerScalar, small: TowerScalar) -> float:
    """log(small / big) for positive magnitudes with big >= small; may be -inf."""
    if big.level == 0:
        return math.log(small.mantissa) - math.log(big.mantissa)
    return -_gap(tower_log(big), tower_log(small))


def _gap(a: TowerScalar, b: TowerScalar) -> float:
    """a - b as a float (a >= b), saturating at +inf."""
    if a.level == 0 and b.level == 0:
        return a.mantissa - b.mantissa
    if _signum(b) <= 0:
        if a.level >= 2 or b.level >= 1 or a.mantissa > _EXP_SAFE:
            return math.inf
        return math.exp(a.mantissa) - b.mantissa
    lr = _log_ratio(a, b)
    if lr == 0.0:
        return 0.0
    la = tower_log(a)
    if la.level > 0:
        return math.inf
    v = la.mantissa + math.log(-math.expm1(lr))
    return math.exp(v) if v < _EXP_SAFE else math.inf


def _add_mag(x: TowerScalar, y: TowerScalar, subtract: bool) -> TowerScalar:
    """|x| + |y| or |x| - |y| for |x| >= |y| > 0, as a positive scalar."""
    if x.level == 0 and y.level == 0:
        v = abs(x.mantissa) - abs(y.mantissa) if subtract else abs(x.mantissa) + abs(y.mantissa)
        return tower_normalize(0, v)
    ax, ay = _magnitude(x), _magnitude(y)
    lr = _log_ratio(ax, ay)
    if lr < math.log(ABSORB_REL):
        return TowerScalar(ax.level, ax.mantissa, 1, True)
    if subtract:
        if lr == 0.0:
            return TowerScalar(0, 0.0)
        shift = math.log(-math.expm1(lr))
    else:
        shift = math.log1p(math.exp(lr))
    return tower_exp(tower_combine(tower_log(ax), TowerScalar(0, shift), "add"))


def tower_combine(x: TowerScalar, y: TowerScalar, op: str) -> TowerScalar:
    """``x + y``, ``x * y`` or ``x ** y`` (y at level 0) evaluated in the log domain."""
    if op == "add":
        if y.is_zero:
            return x
        if x.is_zero:
            return y
        sx, sy = _signum(x), _signum(y)
        if _cmp_mag(x, y) >= 0:
            big, small, sign = x, y, sx
        else:
            big, small, sign = y, x, sy
        out = _add_mag(big, small, subtract=sx != sy)
        return negate(out) if sign < 0 else out
    if op == "mul":
        if x.is_zero or y.is_zero:
            return TowerScalar(0, 0.0)
        sign = _signum(x) * _signum(y)
        if x.level == 0 and y.level == 0:
            return tower_normalize(0, x.mantissa * y.mantissa)
        mag = tower_exp(tower_combine(tower_log(_magnitude(x)), tower_log(_magnitude(y)), "add"))
        return negate(mag) if sign < 0 else mag
    if op == "pow":
        if y.level != 0:
            raise DomainError("exponent must be a level-0 scalar")
        if _signum(x) <= 0:
            raise DomainError("power of a non-positive base")
        if x.level == 0:
            lv = y.mantissa * math.log(x.mantissa)
            return tower_exp(TowerScalar(0, lv)) if abs(lv) < _EXP_SAFE else \
                tower_exp(tower_normalize(0, lv))
        return tower_exp(tower_combine(tower_log(x), y, "mul"))
    raise ValueError(f"unknown operation {op!r}")


def tower_sum(values) -> TowerScalar:
    total = TowerScalar(0, 0.0)
    for v in values:
        total = tower_combine(total, v, "add")
    return total
