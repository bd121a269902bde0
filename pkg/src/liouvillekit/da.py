"""Bi-contact DA deformation in the local chart around a periodic orbit.

Chart coordinates are ``(x, y, theta)`` with ``theta`` periodic.  The deformed
field is ``nu_hat(x, y) x d/dx + mu y d/dy + d/dtheta`` where ``nu_hat`` bends the
stable rate ``nu`` to ``nubar`` inside the square of half-width ``eta``.

Forms are handled through explicit coefficient arrays and their analytic partial
derivatives; no numeric differentiation is involved.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


class DAParamError(ValueError):
    pass


@dataclass(frozen=True)
class DAParams:
    nu: float = -1.0
    mu: float = 1.0
    nubar: float = 0.5
    eta: float = 0.5
    T: float = 1.0

    def validate(self) -> "DAParams":
        vals = asdict(self)
        if not all(math.isfinite(v) for v in vals.values()):
            raise DAParamError(f"non-finite DA parameter in {vals}")
        if not self.mu > 0 > self.nu:
            raise DAParamError(f"need mu > 0 > nu, got mu={self.mu}, nu={self.nu}")
        if not self.nubar < self.mu:
            raise DAParamError(f"need nubar < mu, got nubar={self.nubar}, mu={self.mu}")
        if not 0 < self.eta < 1:
            raise DAParamError(f"need 0 < eta < 1, got eta={self.eta}")
        if not self.T > 0:
            raise DAParamError(f"need a positive period, got T={self.T}")
        return self


def bump(t):
    """``(1 - t^2)^2`` on [-1, 1], zero outside."""
    t = np.asarray(t, dtype=float)
    return np.where(np.abs(t) <= 1.0, (1.0 - t * t) ** 2, 0.0)


def bump_prime(t):
    t = np.asarray(t, dtype=float)
    return np.where(np.abs(t) <= 1.0, -4.0 * t * (1.0 - t * t), 0.0)


def nu_hat(p: DAParams, x, y):
    return p.nu + (p.nubar - p.nu) * bump(x / p.eta) * bump(y / p.eta)


def x_rate_partials(p: DAParams, x, y):
    """``n = nu_hat * x`` together with ``dn/dx`` and ``dn/dy``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    tx, ty = x / p.eta, y / p.eta
    bx, by = bump(tx), bump(ty)
    gap = p.nubar - p.nu
    n = (p.nu + gap * bx * by) * x
    n_x = p.nu + gap * by * (bx + tx * bump_prime(tx))
    n_y = gap * tx * bx * bump_prime(ty)
    return n, n_x, n_y


def da_vector_field(p: DAParams, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    n, _, _ = x_rate_partials(p, pts[..., 0], pts[..., 1])
    return np.stack([n, p.mu * pts[..., 1], np.ones_like(n)], axis=-1)


def da_rates(p: DAParams, points):
    """``(r_u, r_s, coupling)`` for the coframe ``(dy - mu y dtheta, dx - n dtheta)``."""
    pts = np.asarray(points, dtype=float)
    _, n_x, n_y = x_rate_partials(p, pts[..., 0], pts[..., 1])
    return np.full(np.shape(n_x), float(p.mu)), n_x, n_y


def a_polynomial(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (1 - x * x) * (1 - y * y) * ((1 - 5 * x * x) * (1 - y * y) - 4 * x * y * (1 - x * x))


# explicit 1-forms ------------------------------------------------------------

def pair_coefficients(p: DAParams, sign: int, x, y):
    """Coefficients ``(c_x, c_y, c_theta)`` of the deformed contact form and the
    Jacobian ``J[k][j] = d c_j / d coord_k`` over ``(x, y, theta)``.

    ``sign=+1`` gives ``dy - dx + (n - mu y) dtheta``, ``sign=-1`` gives
    ``dy + dx - (n + mu y) dtheta``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, n_x, n_y = x_rate_partials(p, x, y)
    one = np.ones_like(n)
    zero = np.zeros_like(n)
    coeffs = (-sign * one, one, sign * n - p.mu * y)
    jac = ((zero, zero, sign * n_x),
           (zero, zero, sign * n_y - p.mu * one),
           (zero, zero, zero))
    return coeffs, jac


def contact_volume(coeffs, jac):
    """Coefficient of ``a ^ da`` against ``dx ^ dy ^ dtheta``."""
    a = coeffs

    def w(i, j):
        return jac[i][j] - jac[j][i]

    return a[0] * w(1, 2) - a[1] * w(0, 2) + a[2] * w(0, 1)


def deformed_contact_density(p: DAParams, sign: int, points):
    pts = np.asarray(points, dtype=float)
    coeffs, jac = pair_coefficients(p, sign, pts[..., 0], pts[..., 1])
    return contact_volume(coeffs, jac)


def interpolated_coefficients(p: DAParams, s, x, y, reversed_pair: bool = False):
    """Coefficients over ``(s, x, y, theta)`` of ``(1-s) a_- + (1+s) a_+``.

    With ``reversed_pair`` the plus form enters with a minus sign.  Returns the
    four coefficients and the 4x4 Jacobian ``J[k][j] = d c_j / d coord_k``.
    """
    s = np.asarray(s, dtype=float)
    (mx, my, mt), mjac = pair_coefficients(p, -1, x, y)
    (px, py, pt), pjac = pair_coefficients(p, 1, x, y)
    sgn = -1.0 if reversed_pair else 1.0
    lm, lp = 1.0 - s, sgn * (1.0 + s)
    dlm, dlp = -1.0, sgn
    zero = np.zeros(np.broadcast_shapes(np.shape(s), np.shape(mx)))
    coeffs = (zero, lm * mx + lp * px, lm * my + lp * py, lm * mt + lp * pt)
    d_s = (zero, dlm * mx + dlp * px + zero, dlm * my + dlp * py + zero,
           dlm * mt + dlp * pt + zero)
    jac = [d_s]
    for k in range(3):
        jac.append((zero,) + tuple(lm * mjac[k][j] + lp * pjac[k][j] + zero for j in range(3)))
    return coeffs, jac


def half_square_volume(jac):
    """Coefficient of ``(1/2) da ^ da`` against ``ds ^ dx ^ dy ^ dtheta``."""

    def w(i, j):
        return jac[i][j] - jac[j][i]

    return w(0, 1) * w(2, 3) - w(0, 2) * w(1, 3) + w(0, 3) * w(1, 2)


def liouville_volume(p: DAParams, s, points, reversed_pair: bool = False):
    pts = np.asarray(points, dtype=float)
    _, jac = interpolated_coefficients(p, s, pts[..., 0], pts[..., 1], reversed_pair)
    return half_square_volume(jac)


def chart_grid(n: int):
    g = np.linspace(-1.0, 1.0, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    return X, Y


def da_liouville_at_skeleton(p: DAParams, grid_n: int) -> float:
    """Minimum over the chart grid of the Liouville 4-form coefficient at s = 0."""
    X, Y = chart_grid(grid_n)
    pts = np.stack([X, Y, np.zeros_like(X)], axis=-1)
    return float(np.min(liouville_volume(p, 0.0, pts)))


def reversed_density_min(p: DAParams, grid_n: int, s: float = 0.0):
    """Minimum and argmin of the reversed-pair Liouville coefficient on the grid."""
    X, Y = chart_grid(grid_n)
    pts = np.stack([X, Y, np.zeros_like(X)], axis=-1)
    vals = liouville_volume(p, s, pts, reversed_pair=True)
    i = np.unravel_index(np.argmin(vals), vals.shape)
    return float(vals[i]), (float(X[i]), float(Y[i]), 0.0)


# cone field -----------------------------------------------------------------

def cone_contraction_factor(p: DAParams, T_total: float, cone_slope: float,
                            grid_n: int = 21, dt: float = 1e-3) -> float:
    """Worst slope contraction of the y-cone ``|v_x| <= c |v_y|`` over a chart grid.

    The tangent cocycle is upper triangular in (x, y), so slopes transform as
    ``w -> (m11 w + m12) / m22`` and the cone image has half-width
    ``(|m11| c + |m12|) / m22``.
    """
    if not (math.isfinite(cone_slope) and cone_slope > 0):
        raise DAParamError(f"cone slope must be finite and positive, got {cone_slope}")
    periods = T_total / p.T
    if T_total <= 0 or abs(periods - round(periods)) > 1e-9:
        raise DAParamError(f"T_total={T_total} is not a positive multiple of T={p.T}")
    X, Y = chart_grid(grid_n)
    state = np.stack([X.ravel(), Y.ravel(), np.ones(X.size), np.zeros(X.size)])
    mu = p.mu

    def rhs(z):
        x, y, m11, m12 = z
        n, n_x, n_y = x_rate_partials(p, x, y)
        # m22 = exp(mu t) analytically; m12 is carried relative to it
        return np.stack([n, mu * y, n_x * m11, (n_x - mu) * m12 + n_y])

    steps = max(1, int(math.ceil(T_total / dt)))
    h = T_total / steps
    for _ in range(steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    m11 = state[2] * math.exp(-mu * T_total)
    m12_rel = state[3]
    factor = (np.abs(m11) * cone_slope + np.abs(m12_rel)) / cone_slope
    return float(np.max(factor))


def cone_domination_check(p: DAParams, T_total: float, cone_slope: float,
                          grid_n: int = 21) -> bool:
    return cone_contraction_factor(p, T_total, cone_slope, grid_n) < 1.0


# report ---------------------------------------------------------------------

@dataclass
class DAReport:
    """Grid summary after the deformation.

    ``min_contact_minus`` is the minus density value nearest to zero (its grid
    maximum); the pair is bi-contact when it is negative and ``min_contact_plus``
    is positive.
    """

    min_contact_plus: float
    min_contact_minus: float
    liouville_at_zero: float
    grid: int
    argmin: tuple
    argmax_minus: tuple
    reversed_min: float
    reversed_argmin: tuple

    @property
    def bicontact(self) -> bool:
        return self.min_contact_plus > 0 and self.min_contact_minus < 0

    def to_dict(self) -> dict:
        return asdict(self)


def da_report(p: DAParams, grid_n: int) -> DAReport:
    from . import kernels

    p.validate()
    mn, imin, mx, imax = kernels.da_contact_grid(p.mu, p.nu, p.nubar, p.eta, grid_n)
    g = np.linspace(-1.0, 1.0, grid_n)
    rev, rev_at = reversed_density_min(p, grid_n)
    return DAReport(
        min_contact_plus=mn,
        min_contact_minus=mx,
        liouville_at_zero=da_liouville_at_skeleton(p, grid_n),
        grid=grid_n,
        argmin=(float(g[imin[0]]), float(g[imin[1]]), 0.0),
        argmax_minus=(float(g[imax[0]]), float(g[imax[1]]), 0.0),
        reversed_min=rev,
        reversed_argmin=rev_at,
    )
