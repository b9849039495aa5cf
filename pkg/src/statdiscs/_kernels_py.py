"""Reference numpy implementations of the pointwise kernels.

These are the fallback when the compiled ``_ext`` module is unavailable and
the oracle the compiled versions are tested against.
"""
import numpy as np


def _power_table(points, max_exp):
    # pw[p, v, k] = points[p, v] ** k
    P, V = points.shape
    pw = np.ones((P, V, max_exp + 1))
    for k in range(1, max_exp + 1):
        pw[:, :, k] = pw[:, :, k - 1] * points
    return pw


def poly_derivs(points, exps, coefs, comps, ncomp, order=2):
    """Evaluate a sum of real monomials, grouped by component.

    ``points`` is (P, V); ``exps`` is (T, V); term ``t`` contributes
    ``coefs[t] * prod(x ** exps[t])`` to component ``comps[t]``.
    Returns ``(val, grad, hess)`` with shapes (C, P), (C, P, V), (C, P, V, V);
    derivative arrays are ``None`` above the requested ``order``.
    """
    points = np.asarray(points, dtype=float)
    exps = np.asarray(exps, dtype=np.int64)
    coefs = np.asarray(coefs, dtype=float)
    comps = np.asarray(comps, dtype=np.int64)
    P, V = points.shape
    val = np.zeros((ncomp, P))
    grad = np.zeros((ncomp, P, V)) if order >= 1 else None
    hess = np.zeros((ncomp, P, V, V)) if order >= 2 else None
    if len(coefs) == 0:
        return val, grad, hess

    pw = _power_table(points, int(exps.max()))
    vidx = np.arange(V)
    # factors[t, p, v] = x_v ** e_tv
    factors = pw[:, vidx[None, :], exps].transpose(1, 0, 2)
    mono = np.prod(factors, axis=2)
    np.add.at(val, comps, coefs[:, None] * mono)
    if order < 1:
        return val, grad, hess

    # Derivatives rebuild the product with one or two factors replaced, which
    # avoids dividing by coordinates that may be zero.
    dfac = np.where(exps[:, None, :] > 0,
                    exps[:, None, :] * pw[:, vidx[None, :], np.maximum(exps - 1, 0)].transpose(1, 0, 2),
                    0.0)
    for a in range(V):
        f = factors.copy()
        f[:, :, a] = dfac[:, :, a]
        np.add.at(grad[:, :, a], comps, coefs[:, None] * np.prod(f, axis=2))
    if order < 2:
        return val, grad, hess

    ddfac = np.where(exps[:, None, :] > 1,
                     (exps * (exps - 1))[:, None, :]
                     * pw[:, vidx[None, :], np.maximum(exps - 2, 0)].transpose(1, 0, 2),
                     0.0)
    for a in range(V):
        for b in range(a, V):
            f = factors.copy()
            if a == b:
                f[:, :, a] = ddfac[:, :, a]
            else:
                f[:, :, a] = dfac[:, :, a]
                f[:, :, b] = dfac[:, :, b]
            term = np.zeros((ncomp, P))
            np.add.at(term, comps, coefs[:, None] * np.prod(f, axis=2))
            hess[:, :, a, b] = term
            hess[:, :, b, a] = term
    return val, grad, hess


def holder_quotient(samples, alpha):
    """Max over grid pairs of ``|f(z_i) - f(z_j)| / |z_i - z_j| ** alpha``.

    ``samples`` is (m, M) on the uniform grid of M roots of unity; the
    distance of a pair depends only on its index lag.
    """
    samples = np.asarray(samples, dtype=complex)
    M = samples.shape[1]
    best = 0.0
    for lag in range(1, M // 2 + 1):
        diff = samples - np.roll(samples, -lag, axis=1)
        num = np.sqrt(np.max(np.sum(np.abs(diff) ** 2, axis=0)))
        dist = 2.0 * abs(np.sin(np.pi * lag / M))
        best = max(best, num / dist ** alpha)
    return float(best)
