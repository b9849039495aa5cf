"""Generic real submanifolds in normalized coordinates and their non-degeneracy.

A submanifold of codimension ``d`` in C^{n+d} is given near the origin by

    r_j(z, w) = Re w_j - conj(z)^T A_j z + t * p_j(Re z, Im z, Im w),

where the ``A_j`` are Hermitian ``n x n`` matrices and each ``p_j`` is a real
polynomial whose terms have weighted degree at least 3 (``z`` has weight 1,
``Im w`` has weight 2).
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels

RANK_RTOL = 1e-8
DEFAULT_TRIALS = 64
DEFAULT_SEED = 0
MAX_WEIGHTED_DEGREE = 6


def _numeric_rank(mat, rtol=RANK_RTOL):
    sv = np.linalg.svd(np.atleast_2d(mat), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


@dataclass(frozen=True)
class HermitianPencil:
    """The ``d`` Hermitian matrices ``A_1, ..., A_d`` of the quadric model."""

    A: tuple

    def __init__(self, A, atol=1e-12):
        mats = tuple(np.array(a, dtype=complex) for a in A)
        if len(mats) == 0:
            raise ValueError("pencil needs at least one matrix")
        n = mats[0].shape[0]
        for a in mats:
            if a.shape != (n, n):
                raise ValueError("pencil matrices must all be n x n")
            scale = max(1.0, np.abs(a).max())
            if np.abs(a - a.conj().T).max() > atol * scale:
                raise ValueError("pencil matrices must be Hermitian")
            a.setflags(write=False)
        object.__setattr__(self, "A", mats)

    @property
    def n(self):
        return self.A[0].shape[0]

    @property
    def d(self):
        return len(self.A)

    def stack(self):
        """Array of shape (d, n, n)."""
        return np.stack(self.A)

    def combination(self, c):
        """The real combination ``sum_j c_j A_j``."""
        c = np.asarray(c, dtype=float)
        return np.tensordot(c, self.stack(), axes=1)

    def columns(self, V):
        """The ``n x d`` matrix ``[A_1 V | ... | A_d V]``."""
        V = np.asarray(V, dtype=complex)
        return np.stack([a @ V for a in self.A], axis=1)

    def __eq__(self, other):
        return (isinstance(other, HermitianPencil) and self.d == other.d
                and self.n == other.n
                and all(np.array_equal(a, b) for a, b in zip(self.A, other.A)))

    def __hash__(self):
        return hash(tuple(a.tobytes() for a in self.A))


@dataclass(frozen=True)
class MonomialTerm:
    """``coefficient * prod Re(z)^re_z * Im(z)^im_z * Im(w)^im_w``."""

    component: int
    coefficient: float
    re_z: tuple
    im_z: tuple
    im_w: tuple

    @property
    def weighted_degree(self):
        return sum(self.re_z) + sum(self.im_z) + 2 * sum(self.im_w)

    @property
    def ordinary_degree(self):
        return sum(self.re_z) + sum(self.im_z) + sum(self.im_w)

    def exponents(self):
        return np.array(self.re_z + self.im_z + self.im_w, dtype=np.int64)


class PerturbationPolynomial:
    """Real polynomial remainder ``p = (p_1, ..., p_d)`` of weighted order >= 3."""

    def __init__(self, n, d, terms=(), max_degree=MAX_WEIGHTED_DEGREE):
        self.n = int(n)
        self.d = int(d)
        self.max_degree = int(max_degree)
        checked = []
        for term in terms:
            if not 0 <= term.component < self.d:
                raise ValueError(f"term component {term.component} out of range")
            if (len(term.re_z), len(term.im_z), len(term.im_w)) != (self.n, self.n, self.d):
                raise ValueError("exponent vector lengths must be (n, n, d)")
            if min(term.re_z + term.im_z + term.im_w, default=0) < 0:
                raise ValueError("exponents must be nonnegative")
            deg = term.weighted_degree
            if deg < 3:
                raise ValueError(f"term has weighted degree {deg} < 3")
            if deg > self.max_degree:
                raise ValueError(f"term has weighted degree {deg} above {self.max_degree}")
            checked.append(term)
        self.terms = tuple(checked)

    @classmethod
    def zero(cls, n, d):
        return cls(n, d, ())

    @classmethod
    def single(cls, n, d, component, coefficient, re_z=None, im_z=None, im_w=None,
               max_degree=MAX_WEIGHTED_DEGREE):
        term = MonomialTerm(component, float(coefficient),
                            tuple(re_z or (0,) * n), tuple(im_z or (0,) * n),
                            tuple(im_w or (0,) * d))
        return cls(n, d, (term,), max_degree)

    def __len__(self):
        return len(self.terms)

    def scaled_terms(self, factor_of_term):
        """New polynomial with each coefficient multiplied by ``factor_of_term(term)``."""
        terms = [MonomialTerm(t.component, t.coefficient * factor_of_term(t),
                              t.re_z, t.im_z, t.im_w) for t in self.terms]
        return PerturbationPolynomial(self.n, self.d, terms, self.max_degree)

    def _arrays(self):
        if not self.terms:
            V = 2 * self.n + self.d
            return (np.zeros((0, V), dtype=np.int64), np.zeros(0), np.zeros(0, dtype=np.int64))
        exps = np.stack([t.exponents() for t in self.terms])
        coefs = np.array([t.coefficient for t in self.terms])
        comps = np.array([t.component for t in self.terms], dtype=np.int64)
        return exps, coefs, comps

    def real_derivatives(self, x, y, v, order=2):
        """Value, real gradient and real Hessian in the variables (Re z, Im z, Im w).

        Inputs have shapes (P, n), (P, n), (P, d). Returns arrays of shape
        (P, d), (P, d, V), (P, d, V, V) with ``V = 2n + d``.
        """
        pts = np.concatenate([x, y, v], axis=1)
        exps, coefs, comps = self._arrays()
        val, grad, hess = kernels.poly_derivs(pts, exps, coefs, comps, self.d, order)
        val = np.moveaxis(val, 0, 1)
        grad = None if grad is None else np.moveaxis(grad, 0, 1)
        hess = None if hess is None else np.moveaxis(hess, 0, 1)
        return val, grad, hess


def _wirtinger_operator(n, d):
    """Rows map a real gradient in (x, y, v) to holomorphic derivatives in (z, w)."""
    P = np.zeros((n + d, 2 * n + d), dtype=complex)
    for k in range(n):
        P[k, k] = 0.5
        P[k, n + k] = -0.5j
    for l in range(d):
        P[n + l, 2 * n + l] = -0.5j
    return P


@dataclass(frozen=True)
class DefiningFunction:
    """``r = rho + t * p`` with ``rho_j = Re w_j - conj(z)^T A_j z``."""

    pencil: HermitianPencil
    perturbation: PerturbationPolynomial = None
    t: float = 0.0

    def __post_init__(self):
        if self.perturbation is None:
            object.__setattr__(self, "perturbation",
                               PerturbationPolynomial.zero(self.pencil.n, self.pencil.d))
        if (self.perturbation.n, self.perturbation.d) != (self.pencil.n, self.pencil.d):
            raise ValueError("perturbation dimensions do not match the pencil")
        if self.t < 0:
            raise ValueError("scale t must be nonnegative")

    @property
    def n(self):
        return self.pencil.n

    @property
    def d(self):
        return self.pencil.d

    @property
    def is_quadric(self):
        return self.t == 0.0 or len(self.perturbation) == 0

    def with_scale(self, t):
        return DefiningFunction(self.pencil, self.perturbation, float(t))

    def derivatives(self, z, w, order=2):
        """Values and complex derivatives at P points.

        ``z`` is (P, n) and ``w`` is (P, d). Variables are ordered (z, w).
        Returns a dict with

        - ``r``: (P, d) real values;
        - ``dr``: (P, d, n+d), ``dr[p, j, a] = d r_j / d q_a``;
        - ``hh``: (P, d, n+d, n+d), ``d^2 r_j / d q_a d q_b``;
        - ``hb``: (P, d, n+d, n+d), ``d^2 r_j / d conj(q_a) d q_b``.
        """
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        w = np.atleast_2d(np.asarray(w, dtype=complex))
        n, d = self.n, self.d
        P = z.shape[0]
        A = self.pencil.stack()
        Az = np.einsum("jab,pb->pja", A, z)
        r = w.real - np.einsum("pa,pja->pj", z.conj(), Az).real
        dr = np.zeros((P, d, n + d), dtype=complex)
        dr[:, :, :n] = -np.einsum("pa,jab->pjb", z.conj(), A)
        dr[:, :, n:] = 0.5 * np.eye(d)
        out = {"r": r, "dr": dr}
        if order >= 2:
            hh = np.zeros((P, d, n + d, n + d), dtype=complex)
            hb = np.zeros((P, d, n + d, n + d), dtype=complex)
            hb[:, :, :n, :n] = -A
            out["hh"] = hh
            out["hb"] = hb
        if self.t != 0.0 and len(self.perturbation):
            val, grad, hess = self.perturbation.real_derivatives(
                z.real, z.imag, w.imag, order=order)
            Pw = _wirtinger_operator(n, d)
            out["r"] = r + self.t * val
            out["dr"] = dr + self.t * np.einsum("av,pjv->pja", Pw, grad)
            if order >= 2:
                out["hh"] = out["hh"] + self.t * np.einsum("av,pjvu,bu->pjab", Pw, hess, Pw)
                out["hb"] = out["hb"] + self.t * np.einsum("av,pjvu,bu->pjab", Pw.conj(), hess, Pw)
        return out


@dataclass
class NonDegeneracyReport:
    condA: bool
    rank: int
    condB: bool
    kernel_dim: int
    condF: bool
    witness_V: Optional[np.ndarray]
    condT: bool
    witness_c: Optional[np.ndarray]
    condT_exact: Optional[bool] = None
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    probabilistic_negative: bool = field(init=False)

    def __post_init__(self):
        self.probabilistic_negative = (not self.condF) or (not self.condT)

    @property
    def beloshapka(self):
        return self.condA and self.condB

    @property
    def fully(self):
        return self.condF and self.condT

    def to_dict(self):
        def cplx(v):
            return None if v is None else [[float(x.real), float(x.imag)] for x in np.asarray(v)]
        return {
            "condA": {"holds": self.condA, "rank": self.rank},
            "condB": {"holds": self.condB, "kernel_dim": self.kernel_dim},
            "condF": {"holds": self.condF, "witness_V": cplx(self.witness_V)},
            "condT": {"holds": self.condT,
                      "witness_c": None if self.witness_c is None
                      else [float(x) for x in self.witness_c],
                      "exact": self.condT_exact},
            "beloshapka": self.beloshapka,
            "fully": self.fully,
            "probabilistic_negative": self.probabilistic_negative,
            "trials": self.trials,
            "seed": self.seed,
        }


def check_linear_independence(pencil):
    """Whether the flattened matrices have rank ``d``; returns ``(holds, rank)``."""
    flat = pencil.stack().reshape(pencil.d, -1)
    rank = _numeric_rank(flat)
    return rank == pencil.d, rank


def common_kernel_dimension(pencil):
    """Nullity of the stacked ``(d n) x n`` matrix, i.e. ``dim of the intersection of Ker A_j``."""
    stacked = pencil.stack().reshape(pencil.d * pencil.n, pencil.n)
    return pencil.n - _numeric_rank(stacked)


def find_full_witness(pencil, trials=DEFAULT_TRIALS, seed=DEFAULT_SEED):
    """First random ``V`` making ``[A_1 V | ... | A_d V]`` of rank ``d``, or ``None``.

    The returned vector is normalized to unit length.
    """
    if pencil.d > pencil.n:
        return None
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        V = rng.standard_normal(pencil.n) + 1j * rng.standard_normal(pencil.n)
        V /= np.linalg.norm(V)
        if _numeric_rank(pencil.columns(V)) == pencil.d:
            return V
    return None


def _pencil_scale(pencil):
    return max(np.linalg.norm(a, 2) for a in pencil.A)


def is_invertible_combination(pencil, c, rtol=RANK_RTOL):
    """Whether ``sum c_j A_j`` is numerically invertible relative to the pencil scale."""
    scale = _pencil_scale(pencil) * max(np.linalg.norm(c), 1e-300)
    if scale == 0.0:
        return False
    sv = np.linalg.svd(pencil.combination(c), compute_uv=False)
    return bool(sv[-1] > rtol * scale)


def find_invertible_combination(pencil, trials=DEFAULT_TRIALS, seed=DEFAULT_SEED):
    """Unit real ``c`` maximizing ``|det(sum c_j A_j)|`` over the trials, or ``None``.

    Coordinate vectors are tried before the random draws.
    """
    rng = np.random.default_rng(seed)
    d = pencil.d
    candidates = [np.eye(d)[j] for j in range(d)]
    for _ in range(trials):
        c = rng.standard_normal(d)
        candidates.append(c / np.linalg.norm(c))
    best, best_det = None, 0.0
    for c in candidates:
        if not is_invertible_combination(pencil, c):
            continue
        det = abs(np.linalg.det(pencil.combination(c)))
        if det > best_det:
            best, best_det = c, det
    return best


def tumanov_exact(pencil, atol=1e-12):
    """Exact decision of condition (t) for ``n <= 2``; ``None`` when ``n > 2``.

    ``det(sum c_j A_j)`` is a real form in ``c`` of degree ``n``; (t) holds iff
    the form is not identically zero.
    """
    A = pencil.stack()
    scale = max(1.0, np.abs(A).max())
    if pencil.n == 1:
        return bool(np.abs(A[:, 0, 0].real).max() > atol * scale)
    if pencil.n == 2:
        a, b, dd = A[:, 0, 0].real, A[:, 0, 1], A[:, 1, 1].real
        Q = 0.5 * (np.outer(a, dd) + np.outer(dd, a)) - np.outer(b, b.conj()).real
        return bool(np.abs(Q).max() > atol * scale ** 2)
    return None


def check_totally_real_conormal(pencil, c):
    """Whether ``G(1)`` at the point ``(0, sum c_j dr_j(0))`` is invertible."""
    from .rh_linear import boundary_matrix_at_point

    c = np.asarray(c, dtype=float)
    G = boundary_matrix_at_point(DefiningFunction(pencil), c)
    sv = np.linalg.svd(G, compute_uv=False)
    return bool(sv[-1] > RANK_RTOL * max(sv[0], 1.0))


def eval_r(def_fn, z, w):
    """Values ``r(z, w)`` in R^d at a single point."""
    return def_fn.derivatives(np.atleast_2d(z), np.atleast_2d(w), order=1)["r"][0]


def eval_grad_r(def_fn, z, w):
    """``d x (n+d)`` matrix of holomorphic derivatives ``d r_j`` in the order (z, w)."""
    return def_fn.derivatives(np.atleast_2d(z), np.atleast_2d(w), order=1)["dr"][0]


def nondegeneracy_report(pencil, trials=DEFAULT_TRIALS, seed=DEFAULT_SEED):
    condA, rank = check_linear_independence(pencil)
    kdim = common_kernel_dimension(pencil)
    V = find_full_witness(pencil, trials, seed)
    c = find_invertible_combination(pencil, trials, seed)
    return NonDegeneracyReport(
        condA=condA, rank=rank, condB=kdim == 0, kernel_dim=kdim,
        condF=V is not None, witness_V=V, condT=c is not None, witness_c=c,
        condT_exact=tumanov_exact(pencil), trials=trials, seed=seed)
