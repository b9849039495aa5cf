"""Linearized Riemann-Hilbert analysis of the conormal system.

The linearization at a lift is ``f -> 2 Re[conj(G) f]`` where ``G`` collects
the derivatives of the conormal rows with respect to the conjugated variables,
columns ordered (w, z, z~, w~). This module assembles ``G``, computes Maslov
and partial indices, and extracts kernels numerically and in closed form.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import subspace_angles

from .conormal import ConormalSystem, lift_to_G_columns
from .discs import DEFAULT_GRID, DEFAULT_NF, ConstrainedLift, LiftedDisc, grid
from .geometry import RANK_RTOL

MAX_WINDING_GRID = 2 ** 14
KERNEL_GAP = 1e3
KERNEL_SMALL = 1e-6
STRUCTURE_ATOL = 1e-12


class StructureError(ValueError):
    pass


class WindingError(RuntimeError):
    pass


class KernelError(RuntimeError):
    pass


def polyval_matrix(coeffs, zeta):
    """Evaluate ``sum_k coeffs[k] zeta**k`` at an array of points; shape (P, ...)."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    acc = np.zeros((zeta.size,) + coeffs[0].shape, dtype=complex)
    for C in coeffs[::-1]:
        acc = acc * zeta.reshape((-1,) + (1,) * C.ndim) + C
    return acc


@dataclass
class BoundaryMatrix:
    """A square matrix function on the unit circle, sampled on the uniform grid.

    ``func`` evaluates the matrix at arbitrary boundary points and is used to
    refine winding computations. ``poly`` holds the optional exact form as
    matrix coefficients of ``zeta**k``; ``blocks`` then lists the diagonal
    blocks as ``(kind, size)`` pairs, with kinds ``constant``, ``g2``, ``r`` and
    ``monomial`` (a scalar multiple of ``zeta**k`` times the identity).
    """

    samples: np.ndarray
    func: Optional[Callable] = None
    poly: Optional[list] = None
    blocks: Optional[tuple] = None
    n: Optional[int] = None
    d: Optional[int] = None
    min_abs_det: float = field(init=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        self.min_abs_det = float(np.min(np.abs(np.linalg.det(self.samples))))

    @classmethod
    def from_function(cls, func, M=DEFAULT_GRID, **kw):
        return cls(func(grid(M)), func=func, **kw)

    @classmethod
    def from_poly(cls, coeffs, M=DEFAULT_GRID, blocks=None, **kw):
        coeffs = [np.asarray(C, dtype=complex) for C in coeffs]
        return cls(polyval_matrix(coeffs, grid(M)),
                   func=lambda z: polyval_matrix(coeffs, z), poly=coeffs, blocks=blocks, **kw)

    @property
    def size(self):
        return self.samples.shape[1]

    @property
    def M(self):
        return self.samples.shape[0]

    @property
    def structured(self):
        return self.poly is not None and self.blocks is not None

    def __call__(self, zeta):
        if self.func is None:
            raise ValueError("boundary matrix has no evaluation function")
        return self.func(zeta)

    def resample(self, M):
        if self.func is None:
            raise ValueError("boundary matrix has no evaluation function")
        return BoundaryMatrix(self.func(grid(M)), self.func, self.poly, self.blocks, self.n, self.d)

    def structure_defect(self):
        """Max deviation between the exact form and the stored samples."""
        if self.poly is None:
            return None
        return float(np.max(np.abs(polyval_matrix(self.poly, grid(self.M)) - self.samples)))

    def lift_order(self):
        """Samples with columns reordered to the lift order (z, w, z~, w~)."""
        if self.n is None:
            raise ValueError("dimensions (n, d) unknown")
        return self.samples[:, :, lift_to_G_columns(self.n, self.d)]


def _lift_eval(lift, zeta):
    coeffs = lift.stack()
    acc = np.zeros((coeffs.shape[0], zeta.size), dtype=complex)
    for k in range(coeffs.shape[1] - 1, -1, -1):
        acc = acc * zeta + coeffs[:, k:k + 1]
    return acc


def quadric_G_poly(pencil, h_coeffs, c):
    """Exact coefficients ``[G0, G1]`` of ``G`` for a quadric lift with ``h = V + zeta W``.

    Valid when the multiplier is the constant ``c`` (so ``g~ = zeta c / 2``).
    """
    n, d = pencil.n, pencil.d
    N = 2 * n + 2 * d
    As = pencil.stack()
    A = pencil.combination(c)
    V, W = h_coeffs
    G0 = np.zeros((N, N), dtype=complex)
    G1 = np.zeros((N, N), dtype=complex)
    r1, r2, r3 = d, d + n, d + 2 * n
    G0[:d, :d] = 0.5 * np.eye(d)
    for h, Gk in ((V, G0), (W, G1)):
        Ah = np.einsum("jab,b->ja", As, h)
        Gk[:d, d:d + n] = -Ah
        Gk[r1:r2, r3:] = 2.0 * Ah.T
        Gk[r2:r3, r3:] = -2j * Ah.T
    G1[r1:r2, d:d + n] = A.T
    G0[r1:r2, d + n:d + 2 * n] = np.eye(n)
    G1[r2:r3, d:d + n] = 1j * A.T
    G0[r2:r3, d + n:d + 2 * n] = -1j * np.eye(n)
    G1[r3:, r3:] = -1j * np.eye(d)
    return [G0, G1]


def assemble_G(def_fn, base_lift, c=None, M=None):
    """Boundary matrix of the linearized conormal system at ``base_lift``.

    For a quadric and a lift with ``deg h <= 1`` and ``g~ = zeta c / 2`` the exact
    block form is attached as well.
    """
    if isinstance(base_lift, ConstrainedLift):
        if c is None:
            c = base_lift.c
        base_lift = base_lift.realize()
    M = M or base_lift.M
    n, d = def_fn.n, def_fn.d
    system = ConormalSystem(def_fn)
    inv_cols = np.argsort(lift_to_G_columns(n, d))

    def func(zeta):
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        G = system.on_samples(_lift_eval(base_lift, zeta), zeta, linearize=True)["G"]
        return G[:, :, inv_cols]

    Gm = BoundaryMatrix.from_function(func, M, n=n, d=d)
    if c is None:
        c = 2.0 * base_lift.gt.coeffs[:, 1].real if base_lift.gt.nf >= 1 else None
    if def_fn.is_quadric and c is not None:
        h = base_lift.h.coeffs
        gt_expected = np.zeros((d, max(2, base_lift.gt.nf + 1)), dtype=complex)
        gt_expected[:, 1] = 0.5 * np.asarray(c)
        gt = np.zeros_like(gt_expected)
        gt[:, :base_lift.gt.nf + 1] = base_lift.gt.coeffs
        if (base_lift.h.nf <= 1 or np.all(h[:, 2:] == 0)) and np.allclose(gt, gt_expected, atol=0, rtol=0):
            Hc = np.zeros((n, 2), dtype=complex)
            Hc[:, :min(2, h.shape[1])] = h[:, :2]
            Gm.poly = quadric_G_poly(def_fn.pencil, Hc.T, c)
            Gm.blocks = (("constant", d), ("g2", 2 * n), ("monomial", d))
    return Gm


def boundary_matrix_at_point(def_fn, c, zeta=1.0):
    """``G(zeta)`` at the point ``(0, sum c_j dr_j(0))`` of the conormal bundle."""
    n, d = def_fn.n, def_fn.d
    c = np.asarray(c, dtype=float)
    dr0 = def_fn.derivatives(np.zeros((1, n)), np.zeros((1, d)), order=1)["dr"][0]
    cov = np.asarray(zeta) * (c @ dr0)
    pt = np.concatenate([np.zeros(n + d), cov])[:, None]
    G = ConormalSystem(def_fn).on_samples(pt, np.array([zeta]), linearize=True)["G"][0]
    return G[:, np.argsort(lift_to_G_columns(n, d))]


def _winding(values):
    inc = np.angle(np.roll(values, -1) / values)
    return inc


def _winding_of(fn, G, max_grid):
    M = G.M
    vals = fn(G.samples)
    while True:
        inc = _winding(vals)
        if np.max(np.abs(inc)) < np.pi / 2:
            return int(round(np.sum(inc) / (2 * np.pi)))
        M *= 2
        if M > max_grid or G.func is None:
            raise WindingError("winding unresolved")
        vals = fn(G.func(grid(M)))


def _symbol_det(G):
    return np.linalg.det(-np.linalg.solve(G.conj(), G))


def maslov_index(G, max_grid=MAX_WINDING_GRID):
    """Winding number of ``det(-conj(G)^{-1} G)`` around the unit circle."""
    if G.min_abs_det == 0.0:
        raise WindingError("G is singular on the grid")
    return _winding_of(_symbol_det, G, max_grid)


def symbol_winding(S, max_grid=MAX_WINDING_GRID):
    """Winding number of ``det S`` for a matrix symbol given directly."""
    return _winding_of(np.linalg.det, S, max_grid)


@dataclass
class IndexData:
    partial_indices: Optional[list]
    maslov: int

    def __post_init__(self):
        if self.partial_indices is not None and sum(self.partial_indices) != self.maslov:
            raise ValueError("partial indices do not sum to the Maslov index")

    def to_dict(self):
        return {"partial_indices": self.partial_indices, "maslov": self.maslov}


@dataclass
class Birkhoff:
    """``S(zeta) = Bplus diag(zeta**indices) Bminus`` with constant ``Bplus``, ``Bminus``."""

    Bplus: np.ndarray
    indices: tuple
    Bminus: np.ndarray

    def middle(self, zeta):
        return np.diag([zeta ** k for k in self.indices])

    def product(self, zeta):
        return self.Bplus @ self.middle(zeta) @ self.Bminus


def _poly_of(block):
    if isinstance(block, BoundaryMatrix):
        if block.poly is None:
            raise StructureError("block has no exact polynomial form")
        return block.poly
    if isinstance(block, np.ndarray) and block.ndim == 2:
        return [block]
    return [np.asarray(C, dtype=complex) for C in block]


def _monomial_entries(poly, tol=STRUCTURE_ATOL):
    """For each entry, ``(coefficient, degree)`` if it is a single monomial, ``(0, None)`` if zero."""
    P = np.stack(poly)
    out = np.empty(P.shape[1:], dtype=object)
    for idx in np.ndindex(P.shape[1:]):
        nz = np.flatnonzero(np.abs(P[(slice(None),) + idx]) > tol)
        if nz.size == 0:
            out[idx] = (0.0, None)
        elif nz.size == 1:
            out[idx] = (P[(nz[0],) + idx], int(nz[0]))
        else:
            return None
    return out


def birkhoff_factor_2x2(block):
    """Explicit factorization of a 2x2 monomial symbol (diagonal or antidiagonal).

    ``block`` is a list of coefficient matrices of ``zeta**k`` (or a constant
    matrix, or a BoundaryMatrix with exact form).
    """
    poly = _poly_of(block)
    if poly[0].shape != (2, 2):
        raise StructureError("expected a 2x2 symbol")
    ent = _monomial_entries(poly)
    if ent is None:
        raise StructureError("symbol is not a monomial matrix; general factorization is not supported")
    (a, ka), (b, kb) = ent[0, 0], ent[0, 1]
    (c, kc), (dd, kd) = ent[1, 0], ent[1, 1]
    if ka is not None and kd is not None and kb is None and kc is None:
        return Birkhoff(np.diag([a, dd]).astype(complex), (ka, kd), np.eye(2, dtype=complex))
    if kb is not None and kc is not None and ka is None and kd is None:
        Bplus = np.array([[0, b], [c, 0]], dtype=complex)
        return Birkhoff(Bplus, (kc, kb), np.eye(2, dtype=complex))
    raise StructureError("symbol is neither diagonal nor antidiagonal with monomial entries")


R_BLOCK = [np.array([[0, 1], [0, -1j]]), np.array([[1, 0], [1j, 0]])]


def _symbol_poly_of_R():
    """Exact symbol ``-conj(R)^{-1} R`` of the R block on the circle, as a polynomial.

    With ``conj(zeta) = 1/zeta`` one finds ``-[[0, zeta], [zeta, 0]]``.
    """
    return [np.zeros((2, 2), dtype=complex), -np.array([[0, 1], [1, 0]], dtype=complex)]


def _check_R_symbol(samples_R, zeta):
    S = -np.linalg.solve(samples_R.conj(), samples_R)
    expected = polyval_matrix(_symbol_poly_of_R(), zeta)
    return float(np.max(np.abs(S - expected)))


def _block_indices(kind, poly, tol=1e-10):
    size = poly[0].shape[0]
    deg = [k for k, C in enumerate(poly) if np.max(np.abs(C)) > STRUCTURE_ATOL]
    if kind == "constant":
        if deg and max(deg) > 0:
            raise StructureError("constant block depends on zeta")
        if np.linalg.svd(poly[0], compute_uv=False)[-1] <= RANK_RTOL:
            raise StructureError("constant block is singular")
        return [0] * size
    if kind == "monomial":
        if len(deg) != 1:
            raise StructureError("monomial block has several degrees")
        k = deg[0]
        C = poly[k]
        a = C[0, 0]
        if abs(a) == 0 or np.max(np.abs(C - a * np.eye(size))) > tol * abs(a):
            raise StructureError("monomial block is not a multiple of the identity")
        return [2 * k] * size
    if kind == "r":
        padded = list(poly) + [np.zeros((2, 2))] * (2 - len(poly))
        if any(np.max(np.abs(p - q)) > tol for p, q in zip(padded, R_BLOCK)) or len(poly) > 2:
            raise StructureError("block is not of R type")
        zeta = grid(64)
        if _check_R_symbol(polyval_matrix(poly, zeta), zeta) > 1e-12:
            raise StructureError("R block symbol check failed")
        return list(birkhoff_factor_2x2(_symbol_poly_of_R()).indices)
    if kind == "g2":
        n = size // 2
        P0 = poly[0]
        P1 = poly[1] if len(poly) > 1 else np.zeros_like(P0)
        if len(poly) > 2 and any(np.max(np.abs(C)) > STRUCTURE_ATOL for C in poly[2:]):
            raise StructureError("G2 block has degree above one")
        At = P1[:n, :n]
        ok = (np.max(np.abs(P0[:n, :n])) < tol and np.max(np.abs(P0[n:, :n])) < tol
              and np.max(np.abs(P1[:, n:])) < tol
              and np.max(np.abs(P1[n:, :n] - 1j * At)) < tol
              and np.max(np.abs(P0[:n, n:] - np.eye(n))) < tol
              and np.max(np.abs(P0[n:, n:] + 1j * np.eye(n))) < tol)
        if not ok:
            raise StructureError("block is not of the form [[zeta A^T, I], [i zeta A^T, -i I]]")
        if np.linalg.svd(At, compute_uv=False)[-1] <= RANK_RTOL * max(1.0, np.abs(At).max()):
            raise StructureError("A is singular")
        # Right-multiply by diag(A^{-T}, I), then interleave rows and columns so that
        # the matrix becomes block diagonal with n copies of R.
        right = np.eye(2 * n, dtype=complex)
        right[:n, :n] = np.linalg.inv(At)
        perm = np.ravel(np.column_stack([np.arange(n), n + np.arange(n)]))
        indices = []
        reduced = [(C @ right)[np.ix_(perm, perm)] for C in (P0, P1)]
        for k in range(n):
            sl = slice(2 * k, 2 * k + 2)
            off = [np.delete(C[sl], [2 * k, 2 * k + 1], axis=1) for C in reduced]
            if any(o.size and np.max(np.abs(o)) > tol for o in off):
                raise StructureError("reduced G2 block is not block diagonal")
            indices += _block_indices("r", [C[sl, sl] for C in reduced], tol)
        return indices
    raise StructureError(f"unknown block kind {kind!r}")


def partial_indices_structured(G):
    """Partial indices of ``-conj(G)^{-1} G`` from the exact block structure.

    Upper block triangularity lets each diagonal block be treated alone:
    constant blocks give zeros, the ``g2`` block reduces to copies of ``R``
    whose symbol factors with indices (1, 1), and a block ``a zeta^k I`` gives
    ``2k``.
    """
    if not isinstance(G, BoundaryMatrix) or not G.structured:
        raise StructureError("G carries no block structure; use maslov_index instead")
    sizes = [s for _, s in G.blocks]
    edges = np.concatenate([[0], np.cumsum(sizes)])
    if edges[-1] != G.size:
        raise StructureError("block sizes do not add up to the matrix size")
    indices = []
    for b, (kind, _) in enumerate(G.blocks):
        lo, hi = edges[b], edges[b + 1]
        for C in G.poly:
            if np.max(np.abs(C[hi:, lo:hi]), initial=0.0) > STRUCTURE_ATOL:
                raise StructureError("G is not upper block triangular")
        indices += _block_indices(kind, [C[lo:hi, lo:hi] for C in G.poly])
    return IndexData(indices, int(sum(indices)))


class LinearOperator:
    """``f -> 2 Re[conj(G) f]`` sampled on the grid of ``G``.

    LiftedDisc inputs are reordered to the column order of ``G``; AnalyticDisc
    inputs are taken to be in that order already.
    """

    def __init__(self, G):
        self.G = G

    def __call__(self, f):
        if isinstance(f, ConstrainedLift):
            f = f.realize()
        if isinstance(f, LiftedDisc):
            Gs = self.G.samples[:, :, lift_to_G_columns(f.n, f.d)]
        else:
            Gs = self.G.samples
        s = f.samples(self.G.M)
        return 2.0 * np.einsum("mrc,cm->rm", Gs.conj(), s).real


def linear_operator(G):
    return LinearOperator(G)


@dataclass
class KernelBasis:
    """Real basis of a kernel of the linearized operator.

    ``vectors`` holds the realified coefficient vectors (one per row): the
    cofactor of ``(1 - zeta)`` in constrained mode, the disc itself otherwise.
    Components are in lift order (h, g, h~, g~) with (Re, Im) interleaved per
    coefficient.
    """

    basis: list
    dim: int
    vectors: np.ndarray = field(repr=False)
    constrained: bool = True
    singular_values: Optional[np.ndarray] = field(default=None, repr=False)
    gap_ratio: Optional[float] = None

    def gram(self):
        return self.vectors @ self.vectors.T


def realify(coeffs):
    """Complex (N, K) coefficients to the interleaved real vector of length 2 N K."""
    coeffs = np.asarray(coeffs, dtype=complex)
    return np.stack([coeffs.real, coeffs.imag], axis=-1).reshape(-1)


def complexify(vec, N):
    v = np.asarray(vec, dtype=float).reshape(N, -1, 2)
    return v[..., 0] + 1j * v[..., 1]


def _wrap(coeffs, n, d, M, constrained):
    if constrained:
        cof = ConstrainedLift.from_cofactors(coeffs, n, d, np.zeros(d), M)
        h, g, ht, gt = (p.full() for p in cof.parts())
        return LiftedDisc(h, g, ht, gt)
    return LiftedDisc.from_stack(coeffs, n, d, M)


def collocation_matrix(G_lift, nf, constrained):
    """Complex array ``Q[m, r, a, k] = conj(G[m, r, a]) phi_k(zeta_m)``.

    ``phi_k = zeta**k`` or ``(1 - zeta) zeta**k`` in constrained mode.
    """
    M = G_lift.shape[0]
    zeta = grid(M)
    phi = zeta[:, None] ** np.arange(nf + 1)[None, :]
    if constrained:
        phi = (1.0 - zeta)[:, None] * phi
    return np.einsum("mra,mk->mrak", G_lift.conj(), phi)


def real_system(Q):
    """Real matrix of ``2 Re[Q u]`` in interleaved (Re, Im) unknowns; shape (M, N, 2 N K)."""
    M, N = Q.shape[:2]
    out = np.empty(Q.shape + (2,))
    out[..., 0] = 2.0 * Q.real
    out[..., 1] = -2.0 * Q.imag
    return out.reshape(M, N, -1)


def compress_modes(S, rel_tol=1e-14):
    """Exact orthogonal compression of a sampled real system along the grid axis.

    ``S`` is (M, ...) real. A real FFT along the first axis with weights that
    make it an isometry is applied and modes carrying negligible energy are
    dropped. Returns a 2D matrix with the same Gram matrix as ``S`` up to
    ``rel_tol``.
    """
    M = S.shape[0]
    flat = S.reshape(M, -1)
    F = np.fft.rfft(flat, axis=0) / np.sqrt(M)
    w = np.full(F.shape[0], np.sqrt(2.0))
    w[0] = 1.0
    if M % 2 == 0:
        w[-1] = 1.0
    F = F * w[:, None]
    energy = np.sum(np.abs(F) ** 2, axis=1)
    keep = energy > rel_tol ** 2 * energy.max()
    F = F[keep]
    mat = np.concatenate([F.real, F.imag], axis=0).reshape(-1, S.shape[-1])
    return mat[np.any(mat != 0.0, axis=1)]


def _null_space_with_gap(mat, small=KERNEL_SMALL, gap=KERNEL_GAP):
    _, sv, Vt = np.linalg.svd(mat, full_matrices=True)
    ncols = mat.shape[1]
    full = np.zeros(ncols)
    full[:sv.size] = sv
    smax = full[0]
    # Roundoff-level and structurally zero values are indistinguishable.
    full = np.maximum(full, smax * np.finfo(float).eps * max(mat.shape))
    tail = np.flatnonzero(full[1:] <= small * smax) + 1
    if tail.size == 0:
        return Vt[:0], full, np.inf
    ratios = full[tail - 1] / np.maximum(full[tail], 1e-300)
    best = int(np.argmax(ratios))
    ratio = float(ratios[best])
    if ratio < gap:
        raise KernelError(f"kernel dimension ambiguous (best gap ratio {ratio:.3g})")
    rank = int(tail[best])
    return Vt[rank:], full, ratio


def numeric_kernel(G, constrained=True, nf=DEFAULT_NF):
    """Kernel of the linearized operator on discs of degree ``<= nf``.

    In constrained mode the unknowns are cofactors ``u`` of ``(1 - zeta) u``.
    """
    n, d = G.n, G.d
    N = G.size
    if G.M < 2 * (nf + 3):
        raise ValueError("grid too coarse for the requested truncation")
    Q = collocation_matrix(G.lift_order(), nf, constrained)
    mat = compress_modes(real_system(Q))
    null, sv, ratio = _null_space_with_gap(mat)
    basis = [_wrap(complexify(v, N), n, d, G.M, constrained) for v in null]
    return KernelBasis(basis, len(basis), null, constrained, sv, ratio)


def _kernel_cofactors(pencil, V, c, params):
    """Cofactor coefficients (N, 2) of the kernel element with the given parameters.

    ``params`` = (Re a_j, Im a_j for j <= d; y_k, y~_k for k <= n).
    """
    d = pencil.d
    p = np.asarray(params, dtype=float)
    a = p[0:2 * d:2] + 1j * p[1:2 * d:2]
    y, yt = p[2 * d::2], p[2 * d + 1::2]
    As = pencil.stack()
    A = pencil.combination(c)
    D = np.stack([Aj @ V for Aj in As], axis=1)
    Xh = 2.0 * D @ a.real + 0.5 * (yt + 1j * y)
    Yh = -2.0 * D @ a.conj()
    X = np.linalg.solve(A, Xh)
    Y = np.linalg.solve(A, Yh)
    VA = np.einsum("a,jab->jb", V.conj(), As)
    g0 = 4.0 * (VA @ X).real - 2.0 * VA @ Y
    g1 = 2.0 * VA @ Y
    ht0 = -2.0 * D.conj() @ a.real + 0.5 * (yt - 1j * y)
    ht1 = 2.0 * D.conj() @ a.conj()
    gt0, gt1 = a, -a.conj()
    col0 = np.concatenate([X, g0, ht0, gt0])
    col1 = np.concatenate([Y, g1, ht1, gt1])
    return np.stack([col0, col1], axis=1)


def explicit_kernel_basis(pencil, V, c, nf=DEFAULT_NF, M=DEFAULT_GRID):
    """Closed-form basis of the constrained kernel at the initial lift.

    Parameters run over (Re a_j, Im a_j)_{j<=d} and (y_k, y~_k)_{k<=n}; each
    element is ``(1 - zeta)(h, g, h~, g~)`` with ``g~_j = a_j - conj(a_j) zeta``
    and ``h, g, h~`` of degree one in ``zeta``.
    """
    V = np.asarray(V, dtype=complex)
    n, d = pencil.n, pencil.d
    N = 2 * n + 2 * d
    vecs, basis = [], []
    for i in range(N):
        e = np.zeros(N)
        e[i] = 1.0
        cof = np.zeros((N, nf + 1), dtype=complex)
        cof[:, :2] = _kernel_cofactors(pencil, V, c, e)
        vecs.append(realify(cof))
        basis.append(_wrap(cof, n, d, M, True))
    return KernelBasis(basis, N, np.array(vecs), True)


def principal_angles(basis_a, basis_b):
    """Principal angles (radians) between the spans of two kernel bases."""
    a = np.asarray(basis_a.vectors if isinstance(basis_a, KernelBasis) else basis_a)
    b = np.asarray(basis_b.vectors if isinstance(basis_b, KernelBasis) else basis_b)
    L = max(a.shape[1], b.shape[1])
    a = np.pad(a, ((0, 0), (0, L - a.shape[1])))
    b = np.pad(b, ((0, 0), (0, L - b.shape[1])))
    return subspace_angles(a.T, b.T)


@dataclass
class GramReport:
    D1: np.ndarray
    D2: np.ndarray
    gram: np.ndarray
    positive_definite: bool
    min_eig: float


def gram_D(pencil, V, tol=1e-10):
    """``D2 = [A_1 V | ... | A_d V]``, ``D1 = D2^H`` and ``gram = D1 D2``."""
    V = np.asarray(V, dtype=complex)
    D2 = pencil.columns(V)
    D1 = D2.conj().T
    gram = D1 @ D2
    eig = np.linalg.eigvalsh(gram)
    scale = max(1.0, float(eig[-1]))
    return GramReport(D1, D2, gram, bool(eig[0] > tol * scale), float(eig[0]))


def gram_DA(pencil, V, c, tol=1e-10):
    """``D2^H A^{-1} D2`` with ``A = sum c_j A_j``; its invertibility decides injectivity
    of the center map at the initial lift. Returns ``(matrix, invertible)``."""
    V = np.asarray(V, dtype=complex)
    D2 = pencil.columns(V)
    K = D2.conj().T @ np.linalg.solve(pencil.combination(c), D2)
    sv = np.linalg.svd(K, compute_uv=False)
    scale = max(1.0, float(sv[0]))
    return K, bool(sv[-1] > tol * scale)


__all__ = [
    "BoundaryMatrix", "Birkhoff", "IndexData", "KernelBasis", "KernelError", "LinearOperator",
    "StructureError", "WindingError", "assemble_G", "birkhoff_factor_2x2",
    "boundary_matrix_at_point", "explicit_kernel_basis", "gram_D", "gram_DA",
    "linear_operator", "maslov_index", "numeric_kernel", "partial_indices_structured",
    "principal_angles", "quadric_G_poly", "symbol_winding", "R_BLOCK",
]
