"""Gauss-Newton solver for constrained stationary lifts of perturbed quadrics.

Unknowns are the cofactors ``U`` of the realized lift
``f = (1 - zeta) U + (0, 0, 0, zeta c / 2)``. The residual stacks the conormal
rows at every grid point with the chart constraints
``<f - anchor, e_i> = s_i`` against a fixed basis ``e_i`` of the linearized
kernel at the quadric.
"""
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .conormal import ConormalError, ConormalSystem, build_initial_lift, verify_stationary
from .discs import DEFAULT_GRID, DEFAULT_NF, AnalyticDisc, ConstrainedLift, grid, holder_norm
from .rh_linear import (assemble_G, collocation_matrix, complexify,
                        explicit_kernel_basis, numeric_kernel, real_system, realify)

EPS_FRACTION = 0.1


@dataclass(frozen=True)
class SolverConfig:
    nf: int = DEFAULT_NF
    M: int = DEFAULT_GRID
    newton_tol: float = 1e-12
    max_iter: int = 50
    backtrack: float = 0.5
    max_halvings: int = 30
    continuation_steps: int = 8
    cond_max: float = 1e12

    def __post_init__(self):
        if self.M < 4 * self.nf:
            raise ValueError("grid size M must be at least 4 * nf")
        if self.newton_tol <= 0 or self.cond_max <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError("backtracking factor must lie in (0, 1)")
        if self.max_iter < 1 or self.continuation_steps < 1:
            raise ValueError("iteration counts must be positive")

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


class SolverError(RuntimeError):
    """Solver failure; carries the last residual and, in continuation, the failing scale."""

    def __init__(self, message, residual=None, t=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.t = t
        self.trace = trace or []


@dataclass
class SolveInfo:
    iterations: int
    residual: float
    constraint_residual: float
    trace: list = field(default_factory=list)

    def tail_slope(self, upper=1e-2, floor=1e-12):
        """Least-squares slope of ``log r_{k+1}`` against ``log r_k`` in the converging tail.

        Steps ending below ``floor`` sit at the roundoff level of the residual
        and carry no information about the convergence order.
        """
        r = [row[1] for row in self.trace]
        pairs = [(a, b) for a, b in zip(r[:-1], r[1:]) if a < upper and b > floor and a > 0]
        if not pairs:
            return None
        x = np.log([p[0] for p in pairs])
        y = np.log([p[1] for p in pairs])
        if len(pairs) == 1:
            # Slope through the pair and the unit point (r_k = 1 maps to C).
            return float(y[0] / x[0])
        return float(np.polyfit(x, y, 1)[0])


class ChartFrame:
    """Chart constraints ``<f - anchor, e_i> = s_i`` with a pairing-orthonormal basis.

    The pairing is the discrete L2 pairing of boundary values, which equals the
    real inner product of full coefficient arrays.
    """

    def __init__(self, anchor, basis_cofactors, nf, radius=None):
        self.anchor = anchor
        self.nf = nf
        N = anchor.n * 2 + anchor.d * 2
        cof = np.asarray(basis_cofactors, dtype=complex)
        full = np.stack([_times_one_minus_zeta(b) for b in cof])
        F = np.stack([realify(b) for b in full])
        L = np.linalg.cholesky(F @ F.T)
        Linv = np.linalg.inv(L)
        self.cofactors = np.einsum("ij,jak->iak", Linv, cof)
        full = np.stack([_times_one_minus_zeta(b) for b in self.cofactors])
        self.full_vectors = np.stack([realify(b) for b in full])
        self.cof_vectors = np.stack([realify(b) for b in self.cofactors])
        # Pairing of a full lift with the basis, written on realified cofactors.
        self.constraint_matrix = self.full_vectors @ _one_minus_zeta_real(N, nf)
        self.anchor_vec = realify(anchor.cofactors(nf))
        self.radius = radius
        self.dim = cof.shape[0]

    def coordinates(self, lift):
        x = realify(lift.cofactors(self.nf))
        return self.constraint_matrix @ (x - self.anchor_vec)

    def predictor(self, s):
        return self.anchor_vec + np.asarray(s, dtype=float) @ self.cof_vectors


def _times_one_minus_zeta(cof):
    out = np.zeros((cof.shape[0], cof.shape[1] + 1), dtype=complex)
    out[:, :-1] += cof
    out[:, 1:] -= cof
    return out


def _one_minus_zeta_real(N, nf):
    """Real matrix sending realified cofactors (degree nf) to realified ``(1 - zeta) u``."""
    K = nf + 1
    T = np.zeros((N, K + 1, 2, N, K, 2))
    for a in range(N):
        for k in range(K):
            for p in range(2):
                T[a, k, p, a, k, p] += 1.0
                T[a, k + 1, p, a, k, p] -= 1.0
    return T.reshape(N * (K + 1) * 2, N * K * 2)


def _lift_from_vec(x, n, d, nf, c, M):
    N = 2 * n + 2 * d
    return ConstrainedLift.from_cofactors(complexify(x, N), n, d, c, M)


def _residual(system, x, frame, s, n, d, c, cfg, zeta, linearize=False):
    lift = _lift_from_vec(x, n, d, cfg.nf, c, cfg.M)
    samples = lift.realize().samples(cfg.M)
    out = system.on_samples(samples, zeta, linearize=linearize)
    rows = out["rows"]
    cons = frame.constraint_matrix @ (x - frame.anchor_vec) - s
    F = np.concatenate([rows.reshape(-1), cons])
    return F, rows, cons, out.get("G")


def solve_constrained(def_fn, start, s=None, config=None, frame=None, return_info=False):
    """Constrained stationary lift with chart coordinates ``s``.

    ``frame`` fixes the anchor lift and kernel basis of the chart constraints;
    by default it is built from ``start`` and the numeric kernel of the quadric
    linearization there.
    """
    cfg = config or SolverConfig()
    n, d = def_fn.n, def_fn.d
    N = 2 * n + 2 * d
    if d > n:
        raise ValueError("the solver requires d <= n")
    if frame is None:
        frame = default_frame(def_fn, start, cfg)
    s = np.zeros(N) if s is None else np.asarray(s, dtype=float)
    if frame.radius is not None and np.linalg.norm(s) >= frame.radius:
        raise ValueError(f"|s| = {np.linalg.norm(s):.3g} is not below the chart radius {frame.radius:.3g}")
    c = start.c
    system = ConormalSystem(def_fn)
    zeta = grid(cfg.M)
    x = realify(start.cofactors(cfg.nf))
    trace = []
    try:
        F, rows, cons, G = _residual(system, x, frame, s, n, d, c, cfg, zeta, linearize=True)
    except ConormalError as exc:
        raise SolverError(str(exc), trace=trace) from exc
    trace.append((0, float(np.max(np.abs(rows))), 0.0))
    for it in range(cfg.max_iter + 1):
        res, cres = float(np.max(np.abs(rows))), float(np.max(np.abs(cons)))
        if res < cfg.newton_tol and cres < cfg.newton_tol:
            lift = _lift_from_vec(x, n, d, cfg.nf, c, cfg.M)
            info = SolveInfo(it, res, cres, trace)
            return (lift, info) if return_info else lift
        if it == cfg.max_iter:
            break
        Q = collocation_matrix(G, cfg.nf, True)
        J = np.concatenate([real_system(Q).reshape(cfg.M * N, -1), frame.constraint_matrix])
        Qr, R, piv = scipy.linalg.qr(J, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        if diag[-1] * cfg.cond_max <= diag[0]:
            raise SolverError("linearization singular", residual=res, trace=trace)
        step = np.empty_like(x)
        step[piv] = scipy.linalg.solve_triangular(R, -(Qr.T @ F))
        norm0 = np.linalg.norm(F)
        lam = 1.0
        for _ in range(cfg.max_halvings + 1):
            try:
                F_new, rows_new, cons_new, G_new = _residual(
                    system, x + lam * step, frame, s, n, d, c, cfg, zeta, linearize=True)
                if np.linalg.norm(F_new) < norm0:
                    break
            except ConormalError:
                pass
            lam *= cfg.backtrack
        else:
            raise SolverError("line search failed", residual=res, trace=trace)
        x = x + lam * step
        F, rows, cons, G = F_new, rows_new, cons_new, G_new
        trace.append((it + 1, float(np.max(np.abs(rows))), lam))
    raise SolverError(f"no convergence after {cfg.max_iter} iterations (residual {res:.3e})",
                      residual=res, trace=trace)


def default_frame(def_fn, start, cfg, radius=None):
    """Frame anchored at ``start`` with the numeric constrained kernel of the quadric."""
    quad = def_fn.with_scale(0.0)
    G = assemble_G(quad, start, M=cfg.M)
    kb = numeric_kernel(G, constrained=True, nf=cfg.nf)
    cof = np.stack([complexify(v, 2 * def_fn.n + 2 * def_fn.d) for v in kb.vectors])
    return ChartFrame(start, cof, cfg.nf, radius)


def continuation(def_fn, s=None, config=None, start=None, frame=None, return_info=False):
    """Solve at ``t_k = k t / steps`` for ``k = 1..steps``, warm-starting each step.

    ``def_fn.t`` is the target scale. Errors carry the failing ``t_k``.
    """
    cfg = config or SolverConfig()
    if start is None:
        raise ValueError("continuation needs a start lift")
    t_target = def_fn.t
    if t_target == 0.0:
        return solve_constrained(def_fn, start, s, cfg, frame, return_info)
    lift, infos = start, []
    for k in range(1, cfg.continuation_steps + 1):
        tk = t_target * k / cfg.continuation_steps
        try:
            lift, info = solve_constrained(def_fn.with_scale(tk), lift, s, cfg, frame, True)
        except SolverError as exc:
            exc.t = tk
            raise SolverError(f"continuation failed at t = {tk:.6g}: {exc}", exc.residual, tk,
                              exc.trace) from exc
        infos.append(info)
    if return_info:
        return lift, infos
    return lift


def lift_norm(lift, alpha=0.5):
    """Norm of a constrained lift: the ``C^{1, alpha}`` norm of its stacked cofactors."""
    return holder_norm(AnalyticDisc(lift.cofactors(), lift.M), 1, alpha)


class FamilyChart:
    """Local parameterization ``s -> stationary lift`` near the initial lift.

    ``mode='solver'`` solves the nonlinear problem; ``mode='tangent'`` returns the
    linear approximation ``base + sum s_i e_i`` (used where full solves are too
    costly and only first-order information is needed).
    """

    def __init__(self, def_fn, base, kernel_basis, radius, config, frame, mode="solver",
                 initial=None):
        if mode not in ("solver", "tangent"):
            raise ValueError("mode must be 'solver' or 'tangent'")
        self.def_fn = def_fn
        self.base = base
        self.kernel_basis = kernel_basis
        self.radius = radius
        self.config = config
        self.frame = frame
        self.mode = mode
        self.initial = initial

    @property
    def dim(self):
        return self.frame.dim

    def __call__(self, s, return_info=False):
        s = np.asarray(s, dtype=float)
        if np.linalg.norm(s) >= self.radius:
            raise ValueError(f"|s| = {np.linalg.norm(s):.3g} is not below the chart radius")
        n, d = self.def_fn.n, self.def_fn.d
        if self.mode == "tangent" or not s.any():
            if not s.any():
                lift = self.base
            else:
                x = realify(self.base.cofactors(self.config.nf)) + s @ self.frame.cof_vectors
                lift = _lift_from_vec(x, n, d, self.config.nf, self.base.c, self.config.M)
            info = SolveInfo(0, float("nan"), 0.0)
            return (lift, info) if return_info else lift
        x0 = realify(self.base.cofactors(self.config.nf)) + s @ self.frame.cof_vectors
        start = _lift_from_vec(x0, n, d, self.config.nf, self.base.c, self.config.M)
        return solve_constrained(self.def_fn, start, s, self.config, self.frame, return_info)


def family_chart(def_fn, pencil, V, c, eps=None, config=None, mode="solver"):
    """Chart of constrained stationary lifts around the initial lift ``(V, c)``.

    The constraints always use the quadric's explicit kernel basis at the
    initial lift; for ``t > 0`` the base is obtained by continuation at ``s = 0``.
    """
    cfg = config or SolverConfig()
    if def_fn.d > def_fn.n:
        raise ValueError("the solver requires d <= n")
    f0 = build_initial_lift(pencil, V, c, M=cfg.M)
    kb = explicit_kernel_basis(pencil, V, c, nf=cfg.nf, M=cfg.M)
    cof = np.stack([complexify(v, 2 * pencil.n + 2 * pencil.d) for v in kb.vectors])
    if eps is None:
        eps = EPS_FRACTION * lift_norm(f0)
    frame = ChartFrame(f0, cof, cfg.nf, eps)
    base = f0
    if def_fn.t != 0.0 and mode == "solver":
        base = continuation(def_fn, np.zeros(frame.dim), cfg, f0, frame)
    return FamilyChart(def_fn, base, kb, eps, cfg, frame, mode, initial=f0)


def audit(def_fn, lift, tol):
    """verify_stationary wrapper returning ``(passes, report)``."""
    rep = verify_stationary(def_fn, lift)
    return rep.passes(tol), rep


__all__ = [
    "ChartFrame", "FamilyChart", "SolveInfo", "SolverConfig", "SolverError", "audit",
    "continuation", "default_frame", "family_chart", "lift_norm", "solve_constrained",
]
