# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the grid and orbit kernels (see _pykernels for reference)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


cdef inline double _bump(double t) noexcept nogil:
    if fabs(t) > 1.0:
        return 0.0
    return (1.0 - t * t) * (1.0 - t * t)


cdef inline double _bump_prime(double t) noexcept nogil:
    if fabs(t) > 1.0:
        return 0.0
    return -4.0 * t * (1.0 - t * t)


cdef inline void _rate_partials(double mu, double nu, double nubar, double eta,
                                double x, double y, double* n, double* n_x,
                                double* n_y) noexcept nogil:
    cdef double tx = x / eta, ty = y / eta
    cdef double bx = _bump(tx), by = _bump(ty)
    cdef double gap = nubar - nu
    n[0] = (nu + gap * bx * by) * x
    n_x[0] = nu + gap * by * (bx + tx * _bump_prime(tx))
    n_y[0] = gap * tx * bx * _bump_prime(ty)


cdef inline double _apoly(double x, double y) noexcept nogil:
    return (1 - x * x) * (1 - y * y) * ((1 - 5 * x * x) * (1 - y * y) - 4 * x * y * (1 - x * x))


def a_poly_grid(Py_ssize_t n, double tol=1e-12):
    cdef cnp.ndarray[double, ndim=1] g = np.linspace(-1.0, 1.0, n)
    cdef double best = -1e300, v
    cdef Py_ssize_t i, j, bi = 0, bj = 0, count = 0
    with nogil:
        for i in range(n):
            for j in range(n):
                v = _apoly(g[i], g[j])
                if v > best:
                    best = v
                    bi = i
                    bj = j
        for i in range(n):
            for j in range(n):
                if _apoly(g[i], g[j]) >= best - tol:
                    count += 1
    return best, bi, bj, count


def da_contact_grid(double mu, double nu, double nubar, double eta, Py_ssize_t n):
    cdef cnp.ndarray[double, ndim=1] g = np.linspace(-1.0, 1.0, n)
    cdef double nn, n_x, n_y, plus, minus
    cdef double lo = 1e300, hi = -1e300
    cdef Py_ssize_t i, j, li = 0, lj = 0, hi_i = 0, hi_j = 0
    with nogil:
        for i in range(n):
            for j in range(n):
                _rate_partials(mu, nu, nubar, eta, g[i], g[j], &nn, &n_x, &n_y)
                plus = mu - n_x - n_y
                minus = n_x - mu - n_y
                if plus < lo:
                    lo = plus
                    li = i
                    lj = j
                if minus > hi:
                    hi = minus
                    hi_i = i
                    hi_j = j
    return lo, (li, lj), hi, (hi_i, hi_j)


def da_sync_birkhoff(double mu, double nu, double nubar, double eta, starts, double dt,
                     sample_steps):
    cdef cnp.ndarray[double, ndim=2] st = np.ascontiguousarray(starts, dtype=np.float64)
    cdef cnp.ndarray[long long, ndim=1] samples = np.ascontiguousarray(sample_steps,
                                                                       dtype=np.int64)
    cdef Py_ssize_t N = st.shape[0], K = samples.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((N, K))
    cdef double x, y, I, comp, inc, nxt, inv_mu = 1.0 / mu
    cdef double n1, nx1, ny1, n2, nx2, ny2, n3, nx3, ny3, n4, nx4, ny4
    cdef double y1, y2, y3, y4
    cdef long long step, total
    cdef Py_ssize_t o, k
    if K == 0:
        return out
    total = samples[K - 1]
    with nogil:
        for o in range(N):
            x = st[o, 0]
            y = st[o, 1]
            I = 0.0
            comp = 0.0
            k = 0
            for step in range(1, total + 1):
                _rate_partials(mu, nu, nubar, eta, x, y, &n1, &nx1, &ny1)
                y1 = y
                _rate_partials(mu, nu, nubar, eta, x + 0.5 * dt * n1 * inv_mu,
                               y + 0.5 * dt * y1, &n2, &nx2, &ny2)
                y2 = y + 0.5 * dt * y1
                _rate_partials(mu, nu, nubar, eta, x + 0.5 * dt * n2 * inv_mu,
                               y + 0.5 * dt * y2, &n3, &nx3, &ny3)
                y3 = y + 0.5 * dt * y2
                _rate_partials(mu, nu, nubar, eta, x + dt * n3 * inv_mu,
                               y + dt * y3, &n4, &nx4, &ny4)
                y4 = y + dt * y3
                x = x + dt / 6.0 * (n1 + 2 * n2 + 2 * n3 + n4) * inv_mu
                y = y + dt / 6.0 * (y1 + 2 * y2 + 2 * y3 + y4)
                inc = dt / 6.0 * (nx1 + 2 * nx2 + 2 * nx3 + nx4) * inv_mu - comp
                nxt = I + inc
                comp = (nxt - I) - inc
                I = nxt
                while k < K and samples[k] == step:
                    out[o, k] = I / (step * dt)
                    k += 1
    return out
