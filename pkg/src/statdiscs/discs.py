"""Vector-valued analytic discs as truncated power series on the closed unit disc.

Boundary values live on the uniform grid ``zeta_m = exp(2 pi i m / M)``.
Coefficients and samples are related by an FFT, so sampling is exact for
polynomials of degree below ``M``.
"""
import numpy as np

from . import kernels

DEFAULT_NF = 64
DEFAULT_GRID = 256
DEFAULT_ALPHA = 0.5


def grid(M):
    """The ``M`` roots of unity used as boundary nodes."""
    return np.exp(2j * np.pi * np.arange(M) / M)


def coeffs_to_samples(coeffs, M):
    coeffs = np.atleast_2d(coeffs)
    K = coeffs.shape[-1]
    if K > M:
        raise ValueError(f"{K} coefficients do not fit on a grid of {M} points")
    padded = np.zeros(coeffs.shape[:-1] + (M,), dtype=complex)
    padded[..., :K] = coeffs
    return np.fft.ifft(padded, axis=-1) * M


def samples_to_coeffs(samples, nf=None):
    samples = np.atleast_2d(samples)
    M = samples.shape[-1]
    coeffs = np.fft.fft(samples, axis=-1) / M
    if nf is not None:
        coeffs = coeffs[..., : nf + 1]
    return coeffs


def negative_mode_defect(samples):
    """l2 mass of the Fourier modes with negative index in boundary samples.

    Accepts a single sample vector of length M or an (m, M) array; the mass is
    pooled over components. The Nyquist mode of an even grid is ambiguous and
    is not counted.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=complex))
    M = samples.shape[-1]
    modes = np.fft.fft(samples, axis=-1) / M
    neg = modes[..., M // 2 + 1:]
    return float(np.sqrt(np.sum(np.abs(neg) ** 2)))


def _pad(coeffs, K):
    out = np.zeros(coeffs.shape[:-1] + (K,), dtype=complex)
    out[..., : coeffs.shape[-1]] = coeffs
    return out


class AnalyticDisc:
    """``m`` power series truncated at degree ``nf`` with an ``M``-point boundary grid."""

    def __init__(self, coeffs, M=DEFAULT_GRID):
        c = np.array(coeffs, dtype=complex)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2:
            raise ValueError("coefficients must be an (m, nf+1) array")
        self.coeffs = c
        self.M = int(M)
        self.coeffs.setflags(write=False)

    @classmethod
    def constant(cls, value, nf=0, M=DEFAULT_GRID):
        value = np.atleast_1d(np.asarray(value, dtype=complex))
        c = np.zeros((value.size, nf + 1), dtype=complex)
        c[:, 0] = value
        return cls(c, M)

    @classmethod
    def from_polys(cls, *polys, M=DEFAULT_GRID):
        """From vector coefficients ``polys[k]`` of ``zeta**k``."""
        return cls(np.stack([np.atleast_1d(np.asarray(p, dtype=complex)) for p in polys], axis=1), M)

    @classmethod
    def zeros(cls, m, nf=0, M=DEFAULT_GRID):
        return cls(np.zeros((m, nf + 1), dtype=complex), M)

    @classmethod
    def from_samples(cls, samples, nf, M=None):
        samples = np.atleast_2d(samples)
        return cls(samples_to_coeffs(samples, nf), M or samples.shape[-1])

    @property
    def m(self):
        return self.coeffs.shape[0]

    @property
    def nf(self):
        return self.coeffs.shape[1] - 1

    def samples(self, M=None):
        """Boundary values, shape (m, M)."""
        return coeffs_to_samples(self.coeffs, M or self.M)

    def __call__(self, zeta):
        return self.eval(zeta)

    def eval(self, zeta):
        """Horner evaluation at a point of the closed unit disc."""
        zeta = complex(zeta)
        if abs(zeta) > 1.0 + 1e-12:
            raise ValueError(f"|zeta| = {abs(zeta)} lies outside the closed unit disc")
        acc = np.zeros(self.m, dtype=complex)
        for k in range(self.nf, -1, -1):
            acc = acc * zeta + self.coeffs[:, k]
        return acc

    def derivative(self):
        if self.nf == 0:
            return AnalyticDisc(np.zeros((self.m, 1)), self.M)
        k = np.arange(1, self.nf + 1)
        return AnalyticDisc(self.coeffs[:, 1:] * k, self.M)

    def theta_derivative_samples(self, M=None):
        """Samples of ``d/dtheta f(e^{i theta}) = i zeta f'(zeta)``."""
        k = np.arange(self.nf + 1)
        return coeffs_to_samples(1j * k * self.coeffs, M or self.M)

    def truncate(self, nf):
        return AnalyticDisc(_pad(self.coeffs, nf + 1)[:, : nf + 1], self.M)

    def times_one_minus_zeta(self):
        """Exact coefficient product ``(1 - zeta) f``; degree grows by one."""
        c = _pad(self.coeffs, self.nf + 2)
        out = c.copy()
        out[:, 1:] -= c[:, :-1]
        return AnalyticDisc(out, self.M)

    def times_zeta(self):
        c = np.zeros((self.m, self.nf + 2), dtype=complex)
        c[:, 1:] = self.coeffs
        return AnalyticDisc(c, self.M)

    def __add__(self, other):
        K = max(self.nf, other.nf) + 1
        return AnalyticDisc(_pad(self.coeffs, K) + _pad(other.coeffs, K), self.M)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        return AnalyticDisc(complex(scalar) * self.coeffs, self.M)

    def __neg__(self):
        return (-1.0) * self

    def allclose(self, other, atol=1e-12):
        K = max(self.nf, other.nf) + 1
        return self.m == other.m and np.allclose(
            _pad(self.coeffs, K), _pad(other.coeffs, K), rtol=0.0, atol=atol)

    def to_json(self):
        return {"M": self.M,
                "coeffs": [[[float(x.real), float(x.imag)] for x in row] for row in self.coeffs]}

    @classmethod
    def from_json(cls, data):
        c = np.array(data["coeffs"], dtype=float)
        return cls(c[..., 0] + 1j * c[..., 1], data["M"])

    def __repr__(self):
        return f"AnalyticDisc(m={self.m}, nf={self.nf}, M={self.M})"


def holder_norm(disc, k=1, alpha=DEFAULT_ALPHA):
    """Discrete ``C^{k, alpha}`` norm of the boundary values.

    Derivatives are taken along the circle (with respect to ``theta``) and the
    Holder quotient runs over pairs of grid points. Vectors are measured with
    the Euclidean modulus.
    """
    if k not in (0, 1):
        raise ValueError("only k = 0 and k = 1 are supported")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    samples = disc.samples()
    total = float(np.max(np.linalg.norm(samples, axis=0)))
    top = samples
    if k == 1:
        top = disc.theta_derivative_samples()
        total += float(np.max(np.linalg.norm(top, axis=0)))
    return total + kernels.holder_quotient(top, alpha)


class FactoredDisc:
    """The disc ``(1 - zeta) u`` kept in factored form."""

    def __init__(self, u):
        if not isinstance(u, AnalyticDisc):
            u = AnalyticDisc(u)
        self.u = u

    @property
    def m(self):
        return self.u.m

    def full(self):
        return self.u.times_one_minus_zeta()

    def eval(self, zeta):
        return (1.0 - complex(zeta)) * self.u.eval(zeta)

    def __repr__(self):
        return f"FactoredDisc({self.u!r})"


def factored_norm(fd, alpha=DEFAULT_ALPHA):
    """Norm of ``(1 - zeta) u``, defined as the ``C^{1, alpha}`` norm of ``u``."""
    return holder_norm(fd.u, 1, alpha)


class LiftedDisc:
    """A disc ``(h, g)`` in C^{n+d} with its cotangent part ``(h~, g~)``."""

    def __init__(self, h, g, ht, gt):
        if h.m != ht.m or g.m != gt.m:
            raise ValueError("lift components have mismatched dimensions")
        self.h, self.g, self.ht, self.gt = h, g, ht, gt

    @property
    def n(self):
        return self.h.m

    @property
    def d(self):
        return self.g.m

    @property
    def M(self):
        return self.h.M

    @property
    def nf(self):
        return max(p.nf for p in self.parts())

    def parts(self):
        return (self.h, self.g, self.ht, self.gt)

    def stack(self, nf=None):
        """Coefficients of (h, g, h~, g~) stacked into a (2n+2d, K) array."""
        K = (nf if nf is not None else self.nf) + 1
        return np.concatenate([_pad(p.coeffs, K)[:, :K] for p in self.parts()], axis=0)

    @classmethod
    def from_stack(cls, coeffs, n, d, M=DEFAULT_GRID):
        cuts = np.cumsum([n, d, n])
        h, g, ht, gt = np.split(np.asarray(coeffs), cuts, axis=0)
        return cls(AnalyticDisc(h, M), AnalyticDisc(g, M), AnalyticDisc(ht, M), AnalyticDisc(gt, M))

    def samples(self, M=None):
        """Boundary values (2n+2d, M) in the order (h, g, h~, g~)."""
        return coeffs_to_samples(self.stack(), M or self.M)

    def eval(self, zeta):
        return np.concatenate([p.eval(zeta) for p in self.parts()])

    def derivative(self):
        return LiftedDisc(*(p.derivative() for p in self.parts()))

    def __add__(self, other):
        return LiftedDisc(*(a + b for a, b in zip(self.parts(), other.parts())))

    def __sub__(self, other):
        return LiftedDisc(*(a - b for a, b in zip(self.parts(), other.parts())))

    def __rmul__(self, scalar):
        return LiftedDisc(*(scalar * p for p in self.parts()))

    def allclose(self, other, atol=1e-12):
        return all(a.allclose(b, atol) for a, b in zip(self.parts(), other.parts()))

    def to_json(self):
        return {name: p.to_json() for name, p in zip(("h", "g", "ht", "gt"), self.parts())}

    @classmethod
    def from_json(cls, data):
        return cls(*(AnalyticDisc.from_json(data[k]) for k in ("h", "g", "ht", "gt")))

    def __repr__(self):
        return f"LiftedDisc(n={self.n}, d={self.d}, nf={self.nf})"


def coefficient_distance(a, b):
    """Euclidean distance between the stacked coefficient arrays of two lifts."""
    K = max(a.nf, b.nf)
    return float(np.linalg.norm(a.stack(K) - b.stack(K)))


class ConstrainedLift:
    """Lift ``((1-z) h', (1-z) g', (1-z) h~', (1-z) g~' + (z/2) c)``.

    The cofactors are stored as factored discs; the shift ``c`` is real.
    """

    def __init__(self, h, g, ht, gt, c):
        parts = [p if isinstance(p, FactoredDisc) else FactoredDisc(p) for p in (h, g, ht, gt)]
        self.h, self.g, self.ht, self.gt = parts
        self.c = np.array(c, dtype=float).reshape(-1)
        if self.c.size != self.g.m:
            raise ValueError("shift c must have d entries")
        self.c.setflags(write=False)

    @property
    def n(self):
        return self.h.m

    @property
    def d(self):
        return self.g.m

    @property
    def M(self):
        return self.h.u.M

    def parts(self):
        return (self.h, self.g, self.ht, self.gt)

    def cofactors(self, nf=None):
        """Stacked cofactor coefficients, shape (2n+2d, nf+1)."""
        K = (nf if nf is not None else max(p.u.nf for p in self.parts())) + 1
        return np.concatenate([_pad(p.u.coeffs, K)[:, :K] for p in self.parts()], axis=0)

    @classmethod
    def from_cofactors(cls, U, n, d, c, M=DEFAULT_GRID):
        cuts = np.cumsum([n, d, n])
        blocks = np.split(np.asarray(U), cuts, axis=0)
        return cls(*(AnalyticDisc(b, M) for b in blocks), c=c)

    def shift_disc(self):
        """The disc ``(zeta / 2) c`` as a d-component series."""
        return AnalyticDisc.from_polys(np.zeros(self.d), 0.5 * self.c, M=self.M)

    def realize(self):
        h, g, ht, gt = (p.full() for p in self.parts())
        return LiftedDisc(h, g, ht, gt + self.shift_disc())

    def eval(self, zeta):
        return self.realize().eval(zeta)

    def to_json(self):
        return {"c": [float(x) for x in self.c],
                "cofactors": {name: p.u.to_json()
                              for name, p in zip(("h", "g", "ht", "gt"), self.parts())}}

    @classmethod
    def from_json(cls, data):
        cof = data["cofactors"]
        return cls(*(AnalyticDisc.from_json(cof[k]) for k in ("h", "g", "ht", "gt")), c=data["c"])

    def __repr__(self):
        return f"ConstrainedLift(n={self.n}, d={self.d}, c={self.c.tolist()})"


def jet1_at_one(lift):
    """``(f(1), f'(1))`` of a lift, components ordered (h, g, h~, g~)."""
    if isinstance(lift, ConstrainedLift):
        lift = lift.realize()
    value = lift.eval(1.0)
    deriv = lift.derivative().eval(1.0)
    return np.concatenate([value, deriv])
