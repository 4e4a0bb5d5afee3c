"""Numerical conformal map of a toy tract onto the right half-plane.

The map is the composition

    z  --(strip SC inverse)-->  s in {0 < Im s < pi}  -->  w = a*(-i*e^s) + i*b

where the strip Schwarz-Christoffel map sends the left end of the strip to
z = 4 and the right end to the midpoint of the closing edge, and the affine
map (a > 0, b real) fixes F(5) = 5.  In strip coordinates the plain
half-strip becomes exactly the logarithm of the closed-form half-strip map,
so long tracts stay well conditioned.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import BuildError, DomainError, TruncationError, TruncationWarning
from ..tract.toy import ToyTract
from .seed import strip_seed
from .stripmap import StripMap, _rule

ROW_HEIGHTS = np.pi * (np.arange(6) + 0.5) / 6
ROW_STEP = 0.25


@dataclass
class MapHandle:
    """An evaluated conformal map T -> right half-plane with F(5) = 5."""

    tract: ToyTract
    sc: StripMap
    a: float
    b: float
    accuracy: float
    s_base: complex
    _table: tuple | None = field(default=None, repr=False)

    # ------------------------------------------------------------ witnesses
    @property
    def residual(self) -> float:
        return self.sc.residual

    def boundary_table(self) -> list[tuple[float, float]]:
        """(prevertex real part, image on the imaginary axis) in boundary order."""
        out = [(float(x), float(self.b - self.a * np.exp(x))) for x in self.sc.x]
        out += [(float(y), float(self.b + self.a * np.exp(y))) for y in self.sc.y]
        return out

    def boundary_monotone(self) -> bool:
        tab = self.boundary_table()
        nl = self.sc.x.size
        lower = np.array([t[1] for t in tab[:nl]])
        upper = np.array([t[1] for t in tab[nl:]])
        return bool(np.all(np.diff(lower) < 0) and np.all(np.diff(upper) < 0)
                    and lower[0] < self.b < upper[-1])

    def witnesses(self) -> dict:
        proxy_near = complex(self.tract.x_close - 1e-3, 0.0)
        return {
            "image_of_base": complex(self.eval(self.tract.base_point)),
            "proxy_neighbourhood_modulus": float(abs(self.eval(proxy_near, warn=False))),
            "boundary_monotone": self.boundary_monotone(),
            "residual": self.residual,
        }

    # ------------------------------------------------------- strip <-> plane
    def w_from_s(self, s):
        s = np.asarray(s, complex)
        return self.a * (-1j * np.exp(s)) + 1j * self.b

    def s_from_w(self, w):
        w = np.asarray(w, complex)
        return np.log((1j * w + self.b) / self.a)

    def log_modulus_from_s(self, s):
        """log|F| computed without forming F (safe for very deep points)."""
        s = np.asarray(s, complex)
        rest = np.abs(np.exp(1j * s.imag) - (self.b / self.a) * np.exp(-s.real))
        return np.log(self.a) + s.real + np.log(rest)

    # ------------------------------------------------------------- seeding
    def _seed_table(self, local: bool = False):
        if not local and self._table is not None:
            return self._table
        sc = self.sc
        pv = sc.prevertices
        lo, hi = float(np.min(pv.real)) - 6.0, float(np.max(pv.real)) + 6.0
        if local:
            hi = lo + 12.0
        xs = np.arange(lo, hi + ROW_STEP, ROW_STEP)
        t, w = _rule(0.0, 0.0)
        S, Z = [], []
        exps = sc.exponents
        for h in ROW_HEIGHTS:
            row = xs + 1j * h
            start = sc.evaluate(np.array([row[0]]))[0]
            p, q = row[:-1], row[1:]
            half = 0.5 * (q - p)
            nodes = p[:, None] + half[:, None] * (1.0 + t[None, :])
            vals = (np.exp(sc._logfactors(nodes, pv) @ exps) @ w) * half
            z = start + sc.A * np.concatenate([[0j], np.cumsum(vals)])
            S.append(row)
            Z.append(z)
        S, Z = np.concatenate(S), np.concatenate(Z)
        keep = self.tract.contains(Z)
        if local:
            return S[keep], Z[keep]
        self._table = (S[keep], Z[keep])
        return self._table

    # ------------------------------------------------------------- inverse SC
    def strip_point(self, z: complex, seed: tuple[complex, complex] | None = None,
                    local: bool = False) -> complex:
        """Strip coordinate of the tract point z (inverse Schwarz-Christoffel).

        ``local`` restricts seeding to the part of the strip near the left
        end, which is all that is needed for points close to the base point.
        """
        z = complex(z)
        if seed is None:
            S, Z = self._seed_table(local)
            order = np.argsort(np.abs(Z - z))
            for idx in order[:200]:
                if self.tract.segment_visible(Z[idx], z):
                    seed = (S[idx], Z[idx])
                    break
            else:
                raise DomainError(f"no visible seed for {z}")
        s0, z0 = seed
        return self._continue(complex(s0), complex(z0), z)

    def _continue(self, s: complex, zc: complex, z: complex) -> complex:
        sc = self.sc
        scale = max(1.0, abs(z))
        z0 = zc
        t, h = 0.0, 1.0
        while t < 1.0:
            tn = min(1.0, t + h)
            target = z0 + tn * (z - z0)
            ok, s_new, f_new = self._newton(s, zc, target, scale)
            if ok:
                t, s, zc = tn, s_new, f_new
                h = min(1.0, 2 * h)
            else:
                h *= 0.5
                if h < 1e-7:
                    raise DomainError(f"inverse map continuation failed at {z}")
        # polish with values integrated from the nearest prevertex
        for _ in range(3):
            fz = sc.evaluate(np.array([s]))[0]
            ds = (z - fz) / sc.derivative(np.array([s]))[0]
            s = s + ds
            if abs(ds) < 1e-14 * max(1.0, abs(s)):
                break
        return s

    def _newton(self, s, fs, target, scale):
        sc = self.sc
        for _ in range(12):
            ds = (target - fs) / sc.derivative(np.array([s]))[0]
            s_new = s + ds
            if not (0.0 < s_new.imag < np.pi):
                return False, s, fs
            fs = fs + sc.integrate(s, s_new)[0]
            s = s_new
            if abs(fs - target) < 1e-11 * scale:
                return True, s, fs
        return False, s, fs

    # --------------------------------------------------------------- public
    def eval(self, z: complex, warn: bool = True) -> complex:
        z = complex(z)
        if not bool(self.tract.contains(z)):
            raise DomainError(f"{z} is not an interior point of the tract")
        if warn and z.real > self.tract.trusted_xmax():
            warnings.warn(f"{z} lies beyond the trusted abscissa {self.tract.trusted_xmax():.3f}",
                          TruncationWarning, stacklevel=2)
        return complex(self.w_from_s(self.strip_point(z)))

    def trusted_modulus(self) -> float:
        """|F| at the trusted abscissa on the real-axis geodesic."""
        xt = self.tract.trusted_xmax()
        s = self.strip_point(complex(xt, 0.0)) if self.tract.contains(complex(xt, 0)) else None
        if s is None:
            return np.inf
        return float(np.exp(self.log_modulus_from_s(s)))

    def inverse(self, w, check: bool = True):
        """Preimage of right-half-plane points ``w``."""
        w = np.asarray(w, complex)
        if np.any(w.real < 0):
            raise DomainError("preimage requested outside the closed right half-plane")
        if check:
            lim = self._trusted_rho()
            if np.any(np.abs(w) > lim):
                raise TruncationError(f"|w| exceeds the trusted image radius {lim:.6g}")
        return self.sc.evaluate(self.s_from_w(w))

    def _trusted_rho(self) -> float:
        if not hasattr(self, "_rho_cache"):
            self._rho_cache = self.trusted_modulus()
        return self._rho_cache


def map_build(tract: ToyTract, accuracy: float = 1e-8, previous: MapHandle | None = None) -> MapHandle:
    """Construct the normalised map of ``tract``; ``previous`` warm-starts the solver."""
    if not (1e-10 <= accuracy <= 1e-3):
        raise BuildError("accuracy must lie in [1e-10, 1e-3]")
    lo, le, up, ue = tract.arcs()
    sc = StripMap(lo, up, le, ue, tract.start_point, tract.infinity_proxy)
    tol = min(1e-12, accuracy * 1e-3)
    if previous is not None and previous.sc.x.size == lo.size and previous.sc.y.size == up.size:
        sc.solve(previous.sc.x, previous.sc.y, tol=tol, jac=previous.sc.jac)
        if not sc.residual <= accuracy:
            x0, y0 = strip_seed(tract)
            sc.solve(x0, y0, tol=tol)
    else:
        x0, y0 = strip_seed(tract)
        sc.solve(x0, y0, tol=tol)
    if not np.isfinite(sc.residual) or sc.residual > accuracy:
        raise BuildError(f"map residual {sc.residual:.3e} above requested {accuracy:.1e}", sc.residual)
    h = MapHandle(tract, sc, 1.0, 0.0, accuracy, 0j)
    s5 = h.strip_point(tract.base_point, local=True)
    t5 = -1j * np.exp(s5)
    a = 5.0 / t5.real
    b = -a * t5.imag
    h.a, h.b, h.s_base = float(a), float(b), s5
    return h


def halfstrip_oracle(z):
    """Closed-form map of {Re z > 4, |Im z| < pi} onto the right half-plane with F(5) = 5."""
    z = np.asarray(z, complex)
    if np.any(z.real < 4) or np.any(np.abs(z.imag) > np.pi):
        raise DomainError("point outside the closed half-strip")
    out = (5.0 / np.sinh(0.5)) * np.sinh((z - 4.0) / 2.0)
    return out if out.ndim else complex(out)
