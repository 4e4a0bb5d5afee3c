"""The explicit path from the base point through every wiggle and gate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .toy import ToyTract

GATE_HEIGHT = 2 * np.pi / 3


@dataclass(frozen=True)
class AlphaPath:
    polyline: np.ndarray
    alpha0: list[tuple[complex, complex]]
    alpha1: list[np.ndarray]
    gate_integrals: list[float]

    @property
    def length(self) -> float:
        return polyline_length(self.polyline)

    @property
    def alpha1_length(self) -> float:
        return float(sum(polyline_length(piece) for piece in self.alpha1))


def polyline_length(points) -> float:
    pts = np.asarray(points, complex)
    return float(np.sum(np.abs(np.diff(pts))))


def gate_integral_closed_form(eps: float) -> float:
    """2 log(3/(pi eps)) + 2."""
    return float(2 * np.log(3 / (np.pi * eps)) + 2)


def gate_mu(t, tau: float, eps: float):
    """max(|t - tau|, pi*eps/3): the distance scale near a gate."""
    return np.maximum(np.abs(np.asarray(t, float) - tau), np.pi * eps / 3)


def gate_integral_quadrature(tau: float, eps: float) -> float:
    """Adaptive quadrature of dt/mu over [tau - 1, tau + 1]."""
    half = np.pi * eps / 3
    pts = [p for p in (tau - half, tau + half) if tau - 1 < p < tau + 1]
    val, _ = quad(lambda t: 1.0 / float(gate_mu(t, tau, eps)), tau - 1, tau + 1,
                  points=pts or None, epsabs=1e-13, epsrel=1e-13, limit=200)
    return float(val)


def _split(polyline: np.ndarray, taus: list[float]):
    """Cut the polyline into gate pieces (|re z - tau| <= 1 on the gate row) and the rest."""
    alpha0: list[tuple[complex, complex]] = []
    alpha1: list[np.ndarray] = []
    current = [polyline[0]]
    for p, q in zip(polyline[:-1], polyline[1:]):
        on_row = abs(p.imag - GATE_HEIGHT) < 1e-12 and abs(q.imag - GATE_HEIGHT) < 1e-12
        cut = None
        if on_row:
            for tau in taus:
                lo, hi = max(min(p.real, q.real), tau - 1), min(max(p.real, q.real), tau + 1)
                if lo < hi:
                    cut = (lo, hi)
                    break
        if cut is None:
            current.append(q)
            continue
        a, b = complex(cut[0], GATE_HEIGHT), complex(cut[1], GATE_HEIGHT)
        if abs(a - p) > 0:
            current.append(a)
        alpha1.append(np.array(current))
        alpha0.append((a, b))
        current = [b]
        if abs(q - b) > 0:
            current.append(q)
    if len(current) > 1:
        alpha1.append(np.array(current))
    return alpha0, alpha1


def alpha_path(tract: ToyTract) -> AlphaPath:
    """Polyline from 5 along each wiggle at heights 0 and +-2*pi/3, offset 1/2 from the turns."""
    h = GATE_HEIGHT
    pts: list[complex] = [complex(tract.base_point)]
    for w in tract.wiggles:
        pts += [complex(w.r - 0.5, 0), complex(w.r - 0.5, h), complex(w.R - 0.5, h),
                complex(w.R - 0.5, 0), complex(w.r + 0.5, 0), complex(w.r + 0.5, -h),
                complex(w.R + 0.5, -h), complex(w.R + 0.5, 0)]
    pts.append(complex(tract.x_close - 0.5, 0))
    polyline = np.array(pts)
    taus = [w.tau for w in tract.wiggles]
    alpha0, alpha1 = _split(polyline, taus)
    gates = [gate_integral_closed_form(w.eps) for w in tract.wiggles]
    return AlphaPath(polyline, alpha0, alpha1, gates)
