"""Conormal defining system, the explicit quadric disc family and stationarity checks.

For a point ``(z, w)`` of the submanifold and a covector ``(z~, w~)`` the
multiplier ``c`` is obtained from the ``w``-block: ``dr_w(f)^T c = conj(zeta) w~``.
The ``2n + 2d`` real rows are then

    r_j(z, w)                                (d rows)
    2 Re X_k,  -2 Im X_k                     (2n rows)
    -Im c_j                                  (d rows)

with ``X = z~ - zeta * sum_j c_j dr_j/dz``. On the quadric these are exactly
``rho_j``, ``X + conj(X)``, ``i (X - conj(X))`` and ``i (conj(zeta) w~ - zeta conj(w~))``.
"""
from dataclasses import dataclass, field

import numpy as np

from .discs import (DEFAULT_GRID, AnalyticDisc, ConstrainedLift, LiftedDisc, grid,
                    negative_mode_defect)
from .geometry import DefiningFunction, is_invertible_combination

ELIMINATION_COND_MAX = 1e12
NONVANISHING_TOL = 1e-8


class ConormalError(ValueError):
    pass


def lift_to_G_columns(n, d):
    """Index array ``cols`` with ``G_lift = G[..., cols]``.

    Lift variables are ordered (z, w, z~, w~); boundary matrices use (w, z, z~, w~).
    """
    return np.concatenate([np.arange(d, d + n), np.arange(d), np.arange(n + d, 2 * n + 2 * d)])


def G_to_lift_columns(n, d):
    return np.argsort(lift_to_G_columns(n, d))


class ConormalSystem:
    """Pointwise conormal rows and their linearization for a defining function."""

    def __init__(self, def_fn):
        self.def_fn = def_fn

    @property
    def n(self):
        return self.def_fn.n

    @property
    def d(self):
        return self.def_fn.d

    @property
    def size(self):
        return 2 * self.n + 2 * self.d

    def pointwise(self, z, w, zt, wt, zeta, linearize=False):
        """Rows at P points; with ``linearize`` also the conjugate-derivative matrix.

        All inputs are arrays with leading dimension P. Returns a dict with
        ``rows`` (P, N) real, ``c`` (P, d) complex multiplier, ``dr`` and, when
        requested, ``G`` (P, N, N) with columns in (z, w, z~, w~) order.
        """
        n, d = self.n, self.d
        zeta = np.asarray(zeta, dtype=complex).reshape(-1)
        der = self.def_fn.derivatives(z, w, order=2 if linearize else 1)
        dr = der["dr"]
        Z = dr[:, :, :n]
        MwT = np.transpose(dr[:, :, n:], (0, 2, 1))
        sv = np.linalg.svd(MwT, compute_uv=False)
        if np.any(sv[:, -1] * ELIMINATION_COND_MAX <= sv[:, 0]):
            raise ConormalError("conormal elimination degenerate")
        T = np.linalg.inv(MwT)
        c = np.einsum("pjl,pl->pj", T, zeta.conj()[:, None] * wt)
        X = zt - zeta[:, None] * np.einsum("pj,pjk->pk", c, Z)
        rows = np.concatenate([der["r"], 2.0 * X.real, -2.0 * X.imag, -c.imag], axis=1)
        out = {"rows": rows, "c": c, "X": X, "dr": dr}
        if not linearize:
            return out

        P, N = rows.shape[0], self.size
        hh, hb = der["hh"], der["hb"]
        nq = n + d
        dc_dq = -np.einsum("pml,pjal,pj->pma", T, hh[:, :, :, n:], c)
        dc_dqb = -np.einsum("pml,pjal,pj->pma", T, hb[:, :, :, n:], c)
        dc_dwt = zeta.conj()[:, None, None] * T
        Jc = np.zeros((P, d, N), dtype=complex)
        Jbc = np.zeros((P, d, N), dtype=complex)
        Jc[:, :, :nq] = dc_dq
        Jbc[:, :, :nq] = dc_dqb
        Jc[:, :, nq + n:] = dc_dwt

        zcol = -zeta[:, None, None]
        JX = np.zeros((P, n, N), dtype=complex)
        JbX = np.zeros((P, n, N), dtype=complex)
        JX[:, :, :nq] = zcol * (np.einsum("pja,pjk->pka", dc_dq, Z)
                                + np.einsum("pj,pjak->pka", c, hh[:, :, :, :n]))
        JbX[:, :, :nq] = zcol * (np.einsum("pja,pjk->pka", dc_dqb, Z)
                                 + np.einsum("pj,pjak->pka", c, hb[:, :, :, :n]))
        JX[:, :, nq:nq + n] = np.eye(n)
        JX[:, :, nq + n:] = zcol * np.einsum("pjm,pjk->pkm", dc_dwt, Z)

        G = np.zeros((P, N, N), dtype=complex)
        G[:, :d, :nq] = dr.conj()
        G[:, d:d + n] = JbX + JX.conj()
        G[:, d + n:d + 2 * n] = 1j * (JbX - JX.conj())
        G[:, d + 2 * n:] = 0.5j * (Jbc - Jc.conj())
        out["G"] = G
        return out

    def on_samples(self, samples, zeta, linearize=False):
        """Pointwise evaluation on lift samples of shape (N, P) ordered (h, g, h~, g~)."""
        n, d = self.n, self.d
        s = np.asarray(samples).T
        return self.pointwise(s[:, :n], s[:, n:n + d], s[:, n + d:2 * n + d],
                              s[:, 2 * n + d:], zeta, linearize)


def _as_lift(lift):
    return lift.realize() if isinstance(lift, ConstrainedLift) else lift


def eval_conormal(system, lift, M=None):
    """Real residual array of shape (2n+2d, M) on the boundary grid."""
    if isinstance(system, DefiningFunction):
        system = ConormalSystem(system)
    lift = _as_lift(lift)
    if (lift.n, lift.d) != (system.n, system.d):
        raise ValueError("lift dimensions do not match the defining function")
    M = M or lift.M
    return system.on_samples(lift.samples(M), grid(M))["rows"].T


def zero_section_hit(lift, tol=NONVANISHING_TOL, M=None):
    """Whether the cotangent part (h~, g~) vanishes somewhere on the boundary grid."""
    lift = _as_lift(lift)
    s = lift.samples(M)
    cot = s[lift.n + lift.d:]
    return bool(np.min(np.linalg.norm(cot, axis=0)) <= tol)


def _combination(pencil, c):
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.size != pencil.d:
        raise ValueError("c must have d entries")
    if not is_invertible_combination(pencil, c):
        raise ValueError("sum c_j A_j is singular")
    return c, pencil.combination(c)


def build_quadric_lift(pencil, V, W, c, y=None, M=DEFAULT_GRID):
    """Stationary lift of the quadric with ``h = V + zeta W`` and constant multiplier ``c``."""
    V = np.asarray(V, dtype=complex).reshape(-1)
    W = np.asarray(W, dtype=complex).reshape(-1)
    if np.linalg.norm(W) == 0.0:
        raise ValueError("W must be nonzero (the disc must be non-constant)")
    c, A = _combination(pencil, c)
    y = np.zeros(pencil.d) if y is None else np.asarray(y, dtype=float).reshape(-1)
    As = pencil.stack()
    Vb, Wb = V.conj(), W.conj()
    g0 = (np.einsum("a,jab,b->j", Vb, As, V) + np.einsum("a,jab,b->j", Wb, As, W)
          + 1j * y)
    g1 = 2.0 * np.einsum("a,jab,b->j", Vb, As, W)
    h = AnalyticDisc.from_polys(V, W, M=M)
    g = AnalyticDisc.from_polys(g0, g1, M=M)
    ht = AnalyticDisc.from_polys(-A.T @ Wb, -A.T @ Vb, M=M)
    gt = AnalyticDisc.from_polys(np.zeros(pencil.d), 0.5 * c, M=M)
    return LiftedDisc(h, g, ht, gt)


def build_initial_lift(pencil, V, c, M=DEFAULT_GRID):
    """Constrained lift ``((1-z) V, 2 (1-z) V*A_j V, (1-z) A^T conj(V), (z/2) c)``."""
    V = np.asarray(V, dtype=complex).reshape(-1)
    if np.linalg.norm(V) == 0.0:
        raise ValueError("V must be nonzero (the disc must be non-constant)")
    c, A = _combination(pencil, c)
    gv = 2.0 * np.einsum("a,jab,b->j", V.conj(), pencil.stack(), V)
    return ConstrainedLift(
        AnalyticDisc.constant(V, M=M), AnalyticDisc.constant(gv, M=M),
        AnalyticDisc.constant(A.T @ V.conj(), M=M),
        AnalyticDisc.constant(np.zeros(pencil.d), M=M), c)


@dataclass
class StationarityReport:
    attachment_sup: float
    lift_defect: float
    conormal_mismatch: float
    realness_defect: float
    c_mode_excess: float
    c_of_zeta: np.ndarray = field(repr=False)
    min_c: float
    nonvanishing: bool

    def passes(self, tol):
        return (self.attachment_sup < tol and self.lift_defect < tol
                and self.conormal_mismatch < tol and self.realness_defect < tol
                and self.nonvanishing)

    def to_dict(self):
        return {"attachment_sup": self.attachment_sup, "lift_defect": self.lift_defect,
                "conormal_mismatch": self.conormal_mismatch,
                "realness_defect": self.realness_defect, "c_mode_excess": self.c_mode_excess,
                "min_c": self.min_c, "nonvanishing": self.nonvanishing}


def verify_stationary(def_fn, lift, tol=NONVANISHING_TOL, M=None):
    """Residual audit of a candidate stationary lift.

    ``lift`` may be a LiftedDisc, a ConstrainedLift or raw boundary samples of
    shape (2n+2d, M). The multiplier ``c(zeta)`` is recovered from the
    ``w~``-components; its real part is reported as ``c_of_zeta``.
    """
    n, d = def_fn.n, def_fn.d
    if isinstance(lift, (LiftedDisc, ConstrainedLift)):
        lift = _as_lift(lift)
        samples = lift.samples(M)
    else:
        samples = np.asarray(lift, dtype=complex)
    Mg = samples.shape[1]
    zeta = grid(Mg)
    out = ConormalSystem(def_fn).on_samples(samples, zeta)
    c = out["c"]
    c_real = c.real
    conormal = zeta[:, None] * np.einsum("pj,pja->pa", c_real, out["dr"])
    cot = samples[n + d:].T
    mismatch = float(np.max(np.abs(cot - conormal)))
    lift_defect = max(negative_mode_defect(samples), negative_mode_defect(conormal.T))
    modes = np.fft.fft(c_real.T, axis=1) / Mg
    excess = modes[:, 2:Mg - 1]
    min_c = float(np.min(np.linalg.norm(c_real, axis=1)))
    return StationarityReport(
        attachment_sup=float(np.max(np.abs(out["rows"][:, :d]))),
        lift_defect=lift_defect,
        conormal_mismatch=mismatch,
        realness_defect=float(np.max(np.abs(c.imag))),
        c_mode_excess=float(np.sqrt(np.sum(np.abs(excess) ** 2))),
        c_of_zeta=c_real.T.copy(),
        min_c=min_c,
        nonvanishing=min_c > tol,
    )


def quadric_rows_direct(pencil, samples, zeta):
    """Direct transcription of the quadric rows, independent of the elimination code.

    Used as a test oracle; ``samples`` is (2n+2d, M) ordered (h, g, h~, g~).
    """
    n, d = pencil.n, pencil.d
    z, w = samples[:n], samples[n:n + d]
    zt, wt = samples[n + d:2 * n + d], samples[2 * n + d:]
    A = pencil.stack()
    rho = w.real - np.einsum("am,jab,bm->jm", z.conj(), A, z).real
    X = zt + 2.0 * np.einsum("am,jm,jak->km", z.conj(), wt, A)
    last = 1j * (wt / zeta - zeta * wt.conj())
    return np.concatenate([rho, (X + X.conj()).real, (1j * (X - X.conj())).real, last.real])


__all__ = [
    "ConormalError", "ConormalSystem", "StationarityReport", "build_initial_lift",
    "build_quadric_lift", "eval_conormal", "lift_to_G_columns", "G_to_lift_columns",
    "quadric_rows_direct", "verify_stationary", "zero_section_hit",
]
