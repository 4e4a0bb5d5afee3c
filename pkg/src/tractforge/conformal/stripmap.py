"""Schwarz-Christoffel map from the strip 0 < Im s < pi onto a slit polygon.

The polygon boundary is split into a lower arc and an upper arc.  The left
end of the strip (Re s -> -inf) lands on a straight boundary point between
the last upper vertex and the first lower vertex, and the right end lands on
a straight boundary point between the last lower vertex and the first upper
vertex.  Working in strip coordinates keeps long channels from crowding the
prevertices together, which is what makes elongated tracts tractable.

    f(s) = start + A * integral_{-inf}^{s} g(u) du
    g(u) = prod sinh((u - x_k)/2)^(b_k) * prod cosh((u - y_k)/2)^(c_k)

with x_k on the bottom edge, y_k + i*pi on the top edge, and exponents equal
to (interior angle / pi) - 1.  Integrals use compound Gauss-Jacobi panels
sized so that no foreign prevertex is closer than 2/3 of a panel length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

LN2 = np.log(2.0)
NODES = 14
TAIL = 44.0
SPLIT = 1.5
PV_MAX = 1e8


@lru_cache(maxsize=None)
def _rule(ea: float, eb: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [-1, 1] and weights already divided by (1+t)^ea (1-t)^eb,
    so that sum(w * f(t)) approximates the plain integral of f when f has
    those endpoint singularities."""
    t, w = roots_jacobi(NODES, eb, ea)
    w = w / ((1.0 + t) ** ea * (1.0 - t) ** eb)
    return np.asarray(t, float), np.asarray(w, float)


def _logsinh(v, side: float) -> np.ndarray:
    """log sinh(v) on the branch continuous on Im v in [0, pi/2] (side=+1)
    or [-pi/2, 0] (side=-1)."""
    v = np.asarray(v, complex)
    pos = v.real >= 0
    sgn = np.where(pos, 1.0, -1.0)
    sv = sgn * v
    out = sv - LN2 + np.log(-np.expm1(-2.0 * sv))
    return np.where(pos, out, out + 1j * np.pi * side)


def turning_exponents(vertices: np.ndarray) -> np.ndarray:
    """Exponents (interior angle/pi - 1) of a closed counterclockwise polygon.

    A full reversal is read as a slit tip (interior angle 2*pi)."""
    v = np.asarray(vertices, complex)
    din = v - np.roll(v, 1)
    dout = np.roll(v, -1) - v
    turn = np.angle(dout / din)
    turn = np.where(np.isclose(np.abs(turn), np.pi), -np.pi, turn)
    return -turn / np.pi


def _seg_dist(p: complex, q: complex, pts: np.ndarray) -> float:
    if pts.size == 0:
        return np.inf
    d = q - p
    if d == 0:
        return float(np.min(np.abs(pts - p)))
    t = np.clip(((pts - p) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return float(np.min(np.abs(pts - (p + t * d))))


def split_segment(p: complex, q: complex, i: int, j: int, sing: np.ndarray):
    """Fractions (f0, f1, left_singular, right_singular) of panels covering p-q.

    ``i``/``j`` are prevertex indices sitting at p/q (or -1)."""
    mask = np.ones(sing.size, bool)
    if i >= 0:
        mask[i] = False
    if j >= 0:
        mask[j] = False
    pts = sing[mask]
    out = []
    stack = [(0.0, 1.0, i >= 0, j >= 0)]
    d = q - p
    while stack:
        f0, f1, sa, sb = stack.pop()
        a, b = p + f0 * d, p + f1 * d
        length = abs(b - a)
        if length <= SPLIT * _seg_dist(a, b, pts) or length < 1e-13 or f1 - f0 < 1e-12:
            out.append((f0, f1, sa, sb))
        else:
            fm = 0.5 * (f0 + f1)
            stack.append((fm, f1, False, sb))
            stack.append((f0, fm, sa, False))
    out.sort()
    return out


@dataclass
class _Layout:
    """Frozen panel structure for the boundary integrals."""

    seg_a: np.ndarray  # prevertex index at the start of each segment, -1 for a far end
    seg_b: np.ndarray
    far: np.ndarray  # fixed far points for tail segments (complex)
    pan_seg: np.ndarray
    f0: np.ndarray
    f1: np.ndarray
    T: np.ndarray  # (panels, NODES)
    W: np.ndarray  # (panels, NODES)


@dataclass
class StripMap:
    """A strip Schwarz-Christoffel map.

    ``lower``/``upper`` list the vertices in counterclockwise order along
    each arc; ``start``/``end`` are the images of the left/right strip ends.
    """

    lower: np.ndarray
    upper: np.ndarray
    lower_exp: np.ndarray
    upper_exp: np.ndarray
    start: complex
    end: complex
    x: np.ndarray = field(default=None)
    y: np.ndarray = field(default=None)
    A: complex = 0j
    residual: float = np.inf
    jac: np.ndarray = field(default=None, repr=False)
    nfev: int = 0
    _fx: np.ndarray = field(default=None, repr=False)
    _fy: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.lower = np.asarray(self.lower, complex)
        self.upper = np.asarray(self.upper, complex)
        self.lower_exp = np.asarray(self.lower_exp, float)
        self.upper_exp = np.asarray(self.upper_exp, float)
        self._targets = np.concatenate([self.lower, self.upper, [self.end]])
        self._scale = max(float(np.ptp(self._targets.real)), 1.0)

    # ----------------------------------------------------------- integrand
    @property
    def exponents(self) -> np.ndarray:
        return np.concatenate([self.lower_exp, self.upper_exp])

    @property
    def prevertices(self) -> np.ndarray:
        return self._pv(self.x, self.y)

    def _pv(self, x, y) -> np.ndarray:
        return np.concatenate([np.asarray(x, float) + 0j, np.asarray(y, float) + 1j * np.pi])

    def _logfactors(self, s: np.ndarray, pv: np.ndarray) -> np.ndarray:
        """Matrix of per-prevertex log factors, shape s.shape + (n,)."""
        nl = self.lower.size
        s = np.asarray(s, complex)[..., None]
        out = np.empty(s.shape[:-1] + (pv.size,), complex)
        out[..., :nl] = _logsinh((s - pv[:nl]) / 2.0, 1.0)
        out[..., nl:] = 0.5j * np.pi + _logsinh((s - pv[nl:]) / 2.0, -1.0)
        return out

    def log_g(self, s) -> np.ndarray:
        return self._logfactors(s, self.prevertices) @ self.exponents

    def g(self, s) -> np.ndarray:
        return np.exp(self.log_g(s))

    # -------------------------------------------------------------- layout
    def _segments(self, pv: np.ndarray):
        nl, ny = self.lower.size, self.upper.size
        lo, hi = float(np.min(pv.real)) - TAIL, float(np.max(pv.real)) + TAIL
        a, b, far = [], [], []
        # bottom edge: far left -> x_0 -> ... -> x_{nl-1} -> far right
        a.append(-1), b.append(0), far.append((lo + 0j, 0j))
        for k in range(nl - 1):
            a.append(k), b.append(k + 1), far.append((0j, 0j))
        a.append(nl - 1), b.append(-1), far.append((0j, hi + 0j))
        # top edge from the left: far left -> y_{ny-1} -> ... -> y_0
        a.append(-1), b.append(nl + ny - 1), far.append((lo + 1j * np.pi, 0j))
        for k in range(ny - 1, 0, -1):
            a.append(nl + k), b.append(nl + k - 1), far.append((0j, 0j))
        return np.array(a), np.array(b), np.array(far, complex)

    def _endpoints(self, pv, seg_a, seg_b, far):
        P = np.where(seg_a >= 0, pv[np.maximum(seg_a, 0)], far[:, 0])
        Q = np.where(seg_b >= 0, pv[np.maximum(seg_b, 0)], far[:, 1])
        return P, Q

    def _layout(self, pv: np.ndarray) -> _Layout:
        seg_a, seg_b, far = self._segments(pv)
        P, Q = self._endpoints(pv, seg_a, seg_b, far)
        exps = self.exponents
        rows = []
        for s in range(seg_a.size):
            for f0, f1, sa, sb in split_segment(P[s], Q[s], seg_a[s], seg_b[s], pv):
                ea = exps[seg_a[s]] if sa else 0.0
                eb = exps[seg_b[s]] if sb else 0.0
                t, w = _rule(float(ea), float(eb))
                rows.append((s, f0, f1, t, w))
        return _Layout(seg_a, seg_b, far,
                       np.array([r[0] for r in rows]), np.array([r[1] for r in rows]),
                       np.array([r[2] for r in rows]), np.array([r[3] for r in rows]),
                       np.array([r[4] for r in rows]))

    def _nodes(self, lay: _Layout, pv: np.ndarray, panels=None):
        P, Q = self._endpoints(pv, lay.seg_a, lay.seg_b, lay.far)
        sel = slice(None) if panels is None else panels
        ps, f0, f1 = lay.pan_seg[sel], lay.f0[sel], lay.f1[sel]
        d = Q[ps] - P[ps]
        a = P[ps] + f0 * d
        half = 0.5 * (f1 - f0) * d
        nodes = a[:, None] + half[:, None] * (1.0 + lay.T[sel])
        wts = half[:, None] * lay.W[sel]
        return nodes, wts

    def _seg_integrals(self, lay, wts, lg):
        vals = np.sum(wts * np.exp(lg), axis=1)
        return np.bincount(lay.pan_seg, weights=vals.real, minlength=lay.seg_a.size) \
            + 1j * np.bincount(lay.pan_seg, weights=vals.imag, minlength=lay.seg_a.size)

    def _moments_from(self, seg: np.ndarray):
        nl, ny = self.lower.size, self.upper.size
        lower_cum = np.cumsum(seg[: nl + 1])
        ycum = np.cumsum(seg[nl + 1:])
        return np.concatenate([lower_cum[:nl], ycum[::-1], [lower_cum[nl]]])

    def _project(self, J: np.ndarray):
        """Best constant A for moments J and the scaled residual vector."""
        V = self._targets - self.start
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            # trial steps may overflow; the solver rejects non-finite residuals
            A = np.vdot(J, V) / np.vdot(J, J)
            r = (self.start + A * J - self._targets) / self._scale
        return A, np.concatenate([r.real, r.imag])

    # ------------------------------------------------------- parametrisation
    def _unpack(self, u):
        nl, ny = self.lower.size, self.upper.size
        x = np.concatenate([[0.0], np.cumsum(np.exp(u[: nl - 1]))])
        gaps = np.exp(u[nl: nl + ny - 1])
        y = u[nl - 1] + np.concatenate([np.cumsum(gaps[::-1])[::-1], [0.0]])
        return x, y

    def _pack(self, x, y):
        return np.concatenate([np.log(np.diff(x)), [y[-1]], np.log(y[:-1] - y[1:])])

    def _dpv_du(self, u) -> np.ndarray:
        nl, ny = self.lower.size, self.upper.size
        n = nl + ny
        D = np.zeros((n, n - 1))
        e = np.exp(u)
        for i in range(nl - 1):
            D[i + 1:nl, i] = e[i]
        D[nl:, nl - 1] = 1.0
        for i in range(ny - 1):
            D[nl:nl + i + 1, nl + i] = e[nl + i]
        return D

    # ----------------------------------------------------------- residuals
    def _state(self, u, lay=None):
        with np.errstate(over="ignore"):
            x, y = self._unpack(u)
        pv = self._pv(x, y)
        if not (np.all(np.isfinite(u)) and np.max(np.abs(pv.real)) < PV_MAX
                and np.all(np.diff(x) > 0) and np.all(np.diff(y) < 0)):
            # runaway or collapsed trial step: report an infinite residual instead of laying out panels
            return dict(u=u, x=x, y=y, pv=pv, r=np.full(2 * self._targets.size, np.inf))
        if lay is None:
            lay = self._layout(pv)
        nodes, wts = self._nodes(lay, pv)
        L = self._logfactors(nodes, pv)
        lg = L @ self.exponents
        seg = self._seg_integrals(lay, wts, lg)
        J = self._moments_from(seg)
        A, r = self._project(J)
        return dict(u=u, x=x, y=y, pv=pv, lay=lay, nodes=nodes, wts=wts, L=L, lg=lg, A=A, r=r)

    def _jacobian(self, st, h: float = 1e-7) -> np.ndarray:
        """Jacobian in the packed parameters via one-prevertex-at-a-time
        updates of the frozen quadrature."""
        pv, lay, L, lg, wts = st["pv"], st["lay"], st["L"], st["lg"], st["wts"]
        exps = self.exponents
        n = pv.size
        Jraw = np.empty((st["r"].size, n))
        touching = [np.nonzero((lay.seg_a[lay.pan_seg] == k) | (lay.seg_b[lay.pan_seg] == k))[0]
                    for k in range(n)]
        for k in range(n):
            pk = pv.copy()
            pk[k] += h
            nodes = st["nodes"]
            col = _column(self, nodes, pk, k)
            lgk = lg + exps[k] * (col - L[..., k])
            wk = wts
            tp = touching[k]
            if tp.size:
                nd, wt = self._nodes(lay, pk, tp)
                lgk = lgk.copy()
                lgk[tp] = self._logfactors(nd, pk) @ exps
                wk = wts.copy()
                wk[tp] = wt
            seg = self._seg_integrals(lay, wk, lgk)
            _, rk = self._project(self._moments_from(seg))
            Jraw[:, k] = (rk - st["r"]) / h
        return Jraw @ self._dpv_du(st["u"])

    # --------------------------------------------------------------- solve
    def solve(self, x0, y0, tol: float = 1e-13, max_iter: int = 80, jac=None):
        """Gauss-Newton with backtracking.  A Jacobian from a nearby
        configuration may be passed in and is reused while it contracts."""
        u = self._pack(np.asarray(x0, float), np.asarray(y0, float))
        st = self._state(u)
        J = jac if jac is not None and jac.shape == (st["r"].size, u.size) else None
        fresh = J is None
        if fresh:
            J = self._jacobian(st)
        nfev, njev = 1, int(fresh)
        for _ in range(max_iter):
            r = st["r"]
            err = np.linalg.norm(r)
            if np.max(np.abs(r)) < tol:
                break
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
            lam, accepted = 1.0, False
            while lam >= 1e-3:
                trial = self._state(st["u"] + lam * step)
                nfev += 1
                if np.all(np.isfinite(trial["r"])) and np.linalg.norm(trial["r"]) < err:
                    accepted = True
                    break
                if not fresh:
                    break
                lam *= 0.5
            if accepted:
                st = trial
                if np.linalg.norm(st["r"]) > 0.1 * err and np.max(np.abs(st["r"])) >= tol:
                    J, fresh = self._jacobian(st), True
                    njev += 1
                else:
                    fresh = False
            elif not fresh:
                J, fresh = self._jacobian(st), True
                njev += 1
            else:
                break
        self.x, self.y, self.A = st["x"], st["y"], st["A"]
        self.jac, self.nfev, self.njev = J, nfev, njev
        self._finish()
        return self

    def _finish(self):
        st = self._state(self._pack(self.x, self.y))
        self.A = st["A"]
        seg = self._seg_integrals(st["lay"], st["wts"], st["lg"])
        J = self._moments_from(seg)
        nl = self.lower.size
        f = self.start + self.A * J
        self._fx, self._fy = f[:nl], f[nl:-1]
        self.residual = float(np.max(np.abs(f - self._targets)) / self._scale)

    # ------------------------------------------------------------ evaluate
    def evaluate(self, s) -> np.ndarray:
        """Image of strip points ``s``; each is integrated from its nearest prevertex."""
        s = np.asarray(s, complex)
        flat = s.ravel()
        pv = self.prevertices
        exps = self.exponents
        fk = np.concatenate([self._fx, self._fy])
        nodes_l, w_l, owner = [], [], []
        base = np.empty(flat.size, complex)
        for n, z in enumerate(flat):
            k = int(np.argmin(np.abs(pv - z)))
            base[n] = fk[k]
            p = pv[k]
            d = z - p
            for f0, f1, sa, _ in split_segment(p, z, k, -1, pv):
                t, w = _rule(float(exps[k]) if sa else 0.0, 0.0)
                a = p + f0 * d
                half = 0.5 * (f1 - f0) * d
                nodes_l.append(a + half * (1.0 + t))
                w_l.append(half * w)
                owner.append(n)
        if not nodes_l:
            return base.reshape(s.shape)
        nodes = np.array(nodes_l)
        vals = np.sum(np.array(w_l) * np.exp(self._logfactors(nodes, pv) @ exps), axis=1)
        acc = np.zeros(flat.size, complex)
        np.add.at(acc, np.array(owner), vals)
        return (base + self.A * acc).reshape(s.shape)

    def integrate(self, s0, s1) -> np.ndarray:
        """A * integral of g along straight segments s0 -> s1 clear of prevertices."""
        s0 = np.atleast_1d(np.asarray(s0, complex))
        s1 = np.atleast_1d(np.asarray(s1, complex))
        pv = self.prevertices
        exps = self.exponents
        t, w = _rule(0.0, 0.0)
        out = np.empty(s0.size, complex)
        for n, (p, q) in enumerate(zip(s0, s1)):
            d = q - p
            tot = 0j
            for f0, f1, _, _ in split_segment(p, q, -1, -1, pv):
                half = 0.5 * (f1 - f0) * d
                nodes = p + f0 * d + half * (1.0 + t)
                tot += half * np.sum(w * np.exp(self._logfactors(nodes, pv) @ exps))
            out[n] = tot
        return self.A * out

    def derivative(self, s) -> np.ndarray:
        return self.A * self.g(s)


def _column(m: StripMap, nodes: np.ndarray, pv: np.ndarray, k: int) -> np.ndarray:
    nl = m.lower.size
    if k < nl:
        return _logsinh((nodes - pv[k]) / 2.0, 1.0)
    return 0.5j * np.pi + _logsinh((nodes - pv[k]) / 2.0, -1.0)
