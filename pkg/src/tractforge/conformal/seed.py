"""Rough strip coordinates for toy-tract vertices, used to start the solver.

The estimate walks the channel of the tract and accumulates conformal
length: a section of width W and length L contributes pi*L/W, and each gate
of relative opening eps adds about (2/pi)*log(2/(pi*eps)).
"""

from __future__ import annotations

import numpy as np

from ..tract.toy import ToyTract


def _gate_extra(eps: float) -> float:
    return max((2 / np.pi) * np.log(2 / (np.pi * eps)), 0.0) + 0.3


def strip_seed(tract: ToyTract) -> tuple[np.ndarray, np.ndarray]:
    lo_pts: list[float] = [0.0]
    up_pts: list[list[float]] = []
    lam = 0.0
    prev = tract.x_left
    for w in tract.wiggles:
        lam_r = lam + (w.r - prev) / 2
        corridor = 1.5
        lam_u0 = lam_r + 0.5
        G = _gate_extra(w.eps) if w.has_gate else 0.0
        gate = lam_u0 + corridor * (w.tau - w.r)
        lam_U = lam_u0 + corridor * (w.R - 1 - w.r) + G
        lam_m_end = lam_U + 1.5 + corridor * (w.R - 2 - w.r)
        lam_l0 = lam_m_end + 1.5
        lam_L = lam_l0 + corridor * (w.R - w.r - 1)
        lo = [lam_r, lam_r + 0.5]
        if w.has_gate:
            lo += [gate - 0.1, gate + G / 2, gate + G + 0.1]
        lo += [lam_U + 0.75, lam_m_end + 0.6, lam_m_end + 1.0]
        lo_pts += lo
        up = [lam_L + 0.5, lam_L, lam_m_end + 0.75, lam_U + 1.0, lam_U + 0.5]
        if w.has_gate:
            up += [gate + G + 0.1, gate + G / 2, gate - 0.1]
        up_pts.append(up)
        lam = lam_L + 0.5
        prev = w.R
    lam_end = lam + (tract.x_close - prev) / 2
    lo_pts.append(lam_end)
    upper = [lam_end]
    for up in reversed(up_pts):
        upper += up
    upper.append(0.0)
    x = _monotone(np.array(lo_pts), increasing=True)
    y = _monotone(np.array(upper), increasing=False)
    shift = x[0]
    return x - shift, y - shift


def _monotone(v: np.ndarray, increasing: bool, gap: float = 0.05) -> np.ndarray:
    out = v.copy()
    if increasing:
        for k in range(1, out.size):
            out[k] = max(out[k], out[k - 1] + gap)
    else:
        for k in range(out.size - 2, -1, -1):
            out[k] = max(out[k], out[k + 1] + gap)
    return out
