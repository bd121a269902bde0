"""Numpy implementations of the grid and orbit kernels.

These define the reference behaviour; the compiled module must agree with them.
"""
import numpy as np


def _bump(t):
    return np.where(np.abs(t) <= 1.0, (1.0 - t * t) ** 2, 0.0)


def _bump_prime(t):
    return np.where(np.abs(t) <= 1.0, -4.0 * t * (1.0 - t * t), 0.0)


def _rate_partials(mu, nu, nubar, eta, x, y):
    tx, ty = x / eta, y / eta
    bx, by = _bump(tx), _bump(ty)
    gap = nubar - nu
    n = (nu + gap * bx * by) * x
    n_x = nu + gap * by * (bx + tx * _bump_prime(tx))
    n_y = gap * tx * bx * _bump_prime(ty)
    return n, n_x, n_y


def a_poly_grid(n, tol=1e-12):
    """Max of the A polynomial on an n x n grid of [-1, 1]^2.

    Returns ``(max, i, j, count)`` where ``count`` is the number of grid points
    within ``tol`` of the max.  Rows are evaluated one at a time to keep memory flat.
    """
    g = np.linspace(-1.0, 1.0, n)
    best, bi, bj = -np.inf, 0, 0
    vals = np.empty((n, n))
    for i in range(n):
        x = g[i]
        y = g
        row = (1 - x * x) * (1 - y * y) * ((1 - 5 * x * x) * (1 - y * y) - 4 * x * y * (1 - x * x))
        vals[i] = row
        j = int(np.argmax(row))
        if row[j] > best:
            best, bi, bj = float(row[j]), i, j
    count = int(np.count_nonzero(vals >= best - tol))
    return best, bi, bj, count


def da_contact_grid(mu, nu, nubar, eta, n):
    """Min of the plus contact density and max of the minus one on the chart grid.

    Returns ``(min_plus, (i, j), max_minus, (i, j))``.
    """
    g = np.linspace(-1.0, 1.0, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    _, n_x, n_y = _rate_partials(mu, nu, nubar, eta, X, Y)
    plus = mu - n_x - n_y
    minus = n_x - mu - n_y
    imin = np.unravel_index(int(np.argmin(plus)), plus.shape)
    imax = np.unravel_index(int(np.argmax(minus)), minus.shape)
    return (float(plus[imin]), (int(imin[0]), int(imin[1])),
            float(minus[imax]), (int(imax[0]), int(imax[1])))


def da_sync_birkhoff(mu, nu, nubar, eta, starts, dt, sample_steps):
    """Running means of ``r_s / r_u`` along the synchronized DA flow.

    ``starts`` is ``(N, 3)``; ``sample_steps`` increasing step counts.  Returns an
    ``(N, K)`` array with the time average at each sampled step count.  The
    integral is accumulated with compensated summation.
    """
    starts = np.asarray(starts, dtype=float)
    sample_steps = np.asarray(sample_steps, dtype=np.int64)
    x = starts[:, 0].copy()
    y = starts[:, 1].copy()
    integral = np.zeros(len(x))
    comp = np.zeros(len(x))
    out = np.empty((len(x), len(sample_steps)))
    inv_mu = 1.0 / mu

    def rhs(x, y):
        n, n_x, _ = _rate_partials(mu, nu, nubar, eta, x, y)
        return n * inv_mu, y, n_x * inv_mu

    k = 0
    total = int(sample_steps[-1]) if len(sample_steps) else 0
    for step in range(1, total + 1):
        a1, b1, c1 = rhs(x, y)
        a2, b2, c2 = rhs(x + 0.5 * dt * a1, y + 0.5 * dt * b1)
        a3, b3, c3 = rhs(x + 0.5 * dt * a2, y + 0.5 * dt * b2)
        a4, b4, c4 = rhs(x + dt * a3, y + dt * b3)
        x = x + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        y = y + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
        inc = dt / 6.0 * (c1 + 2 * c2 + 2 * c3 + c4) - comp
        new = integral + inc
        comp = (new - integral) - inc
        integral = new
        while k < len(sample_steps) and sample_steps[k] == step:
            out[:, k] = integral / (step * dt)
            k += 1
    return out
