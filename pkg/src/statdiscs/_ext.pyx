# Compiled twins of the loops in _kernels_py; same signatures and results.
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, sin, pow, M_PI

cnp.import_array()


def poly_derivs(points, exps, coefs, comps, Py_ssize_t ncomp, int order=2):
    cdef double[:, ::1] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef long long[:, ::1] e = np.ascontiguousarray(exps, dtype=np.int64)
    cdef double[::1] cf = np.ascontiguousarray(coefs, dtype=np.float64)
    cdef long long[::1] cp = np.ascontiguousarray(comps, dtype=np.int64)
    cdef Py_ssize_t P = x.shape[0], V = x.shape[1], T = cf.shape[0]
    val_arr = np.zeros((ncomp, P))
    grad_arr = np.zeros((ncomp, P, V)) if order >= 1 else None
    hess_arr = np.zeros((ncomp, P, V, V)) if order >= 2 else None
    cdef double[:, ::1] val = val_arr
    cdef double[:, :, ::1] grad
    cdef double[:, :, :, ::1] hess
    if order >= 1:
        grad = grad_arr
    if order >= 2:
        hess = hess_arr
    cdef double[::1] f = np.empty(V)
    cdef double[::1] df = np.empty(V)
    cdef double[::1] ddf = np.empty(V)
    cdef Py_ssize_t p, t, a, b, v
    cdef long long k, ea
    cdef double prod, c, xv
    for t in range(T):
        c = cf[t]
        k = cp[t]
        for p in range(P):
            for v in range(V):
                xv = x[p, v]
                ea = e[t, v]
                f[v] = pow(xv, <double>ea) if ea > 0 else 1.0
                df[v] = ea * pow(xv, <double>(ea - 1)) if ea > 0 else 0.0
                ddf[v] = ea * (ea - 1) * pow(xv, <double>(ea - 2)) if ea > 1 else 0.0
            prod = c
            for v in range(V):
                prod *= f[v]
            val[k, p] += prod
            if order < 1:
                continue
            for a in range(V):
                if df[a] == 0.0:
                    continue
                prod = c * df[a]
                for v in range(V):
                    if v != a:
                        prod *= f[v]
                grad[k, p, a] += prod
            if order < 2:
                continue
            for a in range(V):
                if df[a] == 0.0:
                    continue
                for b in range(a, V):
                    if a == b:
                        prod = c * ddf[a]
                    else:
                        if df[b] == 0.0:
                            continue
                        prod = c * df[a] * df[b]
                    if prod == 0.0:
                        continue
                    for v in range(V):
                        if v != a and v != b:
                            prod *= f[v]
                    hess[k, p, a, b] += prod
                    if a != b:
                        hess[k, p, b, a] += prod
    return val_arr, grad_arr, hess_arr


def holder_quotient(samples, double alpha):
    cdef double complex[:, ::1] s = np.ascontiguousarray(samples, dtype=np.complex128)
    cdef Py_ssize_t m = s.shape[0], M = s.shape[1]
    cdef Py_ssize_t i, j, lag, c
    cdef double best = 0.0, num, dist, q, dr, di
    cdef double complex z
    for lag in range(1, M // 2 + 1):
        dist = pow(2.0 * abs(sin(M_PI * lag / M)), alpha)
        for i in range(M):
            j = (i + lag) % M
            num = 0.0
            for c in range(m):
                z = s[c, i] - s[c, j]
                dr = z.real
                di = z.imag
                num += dr * dr + di * di
            q = sqrt(num) / dist
            if q > best:
                best = q
    return best
