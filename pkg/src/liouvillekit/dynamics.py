"""Liouville vector field ``Y = f X + g d/ds`` and its dynamics.

The field is obtained two ways: the generic solve of
``f L_X alpha + g L_s alpha = alpha`` in the coframe, and closed forms where the
system provides them.  ``liouville_field`` prefers the closed form; the tests
compare both.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lis import format_point, alpha_coeffs, lie_derivatives, LIS, LISError

DEGENERACY = 1e-14
SKELETON_TOL = 1e-12
SKELETON_MAX_ITER = 200
FD_STEP = 1e-5


class DegenerateError(LISError):
    pass


class NotLiouvilleError(LISError):
    pass


class SkeletonError(LISError):
    pass


class ConvergenceError(LISError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass
class LiouvilleField:
    f: object
    g: object
    g_over_f: object
    d_s_g_over_f: object
    provenance: str
    d_s_f: object = None
    d_s_g: object = None


def _locate(mask, s, x):
    mask = np.asarray(mask)
    shape = mask.shape
    idx = np.unravel_index(int(np.argmax(mask)), shape) if mask.ndim else ()
    s_b = np.broadcast_to(np.asarray(s, dtype=float), shape)
    x_b = np.broadcast_to(np.asarray(x, dtype=float), shape + (3,))
    return format_point(s_b[idx], x_b[idx])


def solve_generic(sys, s, x) -> LiouvilleField:
    """Cramer solve of the 2x2 system, with s-derivatives of f, g and g/f."""
    alpha, lx, ls = lie_derivatives(sys, s, x)
    E, F = alpha.E, alpha.F
    A, C = lx.E, lx.F
    B, D = ls.E, ls.F
    J = A.value * D.value - B.value * C.value
    absJ = np.abs(J)
    if np.any(absJ < DEGENERACY):
        raise DegenerateError(f"|J| < {DEGENERACY} at {_locate(absJ < DEGENERACY, s, x)}")
    if np.any(J > 0):
        raise NotLiouvilleError(f"J > 0 (density < 0) at {_locate(J > 0, s, x)}")
    num_f = D.value * E.value - B.value * F.value
    num_g = A.value * F.value - C.value * E.value
    f = num_f / J
    g = num_g / J
    J_s = A.d_s * D.value + A.value * D.d_s - B.d_s * C.value - B.value * C.d_s
    nf_s = D.d_s * E.value + D.value * E.d_s - B.d_s * F.value - B.value * F.d_s
    ng_s = A.d_s * F.value + A.value * F.d_s - C.d_s * E.value - C.value * E.d_s
    f_s = (nf_s * J - num_f * J_s) / J**2
    g_s = (ng_s * J - num_g * J_s) / J**2
    gf = num_g / num_f
    gf_s = (ng_s * num_f - num_g * nf_s) / num_f**2
    return LiouvilleField(f, g, gf, gf_s, "linear_solve", f_s, g_s)


def liouville_field(sys, s, x, provenance: str = "auto") -> LiouvilleField:
    """``provenance`` is ``auto``, ``closed_form`` or ``linear_solve``."""
    if provenance not in ("auto", "closed_form", "linear_solve"):
        raise ValueError(f"unknown provenance {provenance!r}")
    if provenance != "linear_solve":
        cf = sys.closed_form(s, x)
        if cf is not None:
            bad = ~(np.asarray(cf.f) > 0)
            if np.any(bad):
                raise NotLiouvilleError(f"f <= 0 at {_locate(bad, s, x)}")
            return LiouvilleField(cf.f, cf.g, cf.g_over_f, cf.d_s_g_over_f, "closed_form")
        if provenance == "closed_form":
            raise LISError("no closed form is available for this system")
    return solve_generic(sys, s, x)


# skeleton -----------------------------------------------------------------------

def _F_value(sys, s, x):
    return np.asarray(alpha_coeffs(sys, s, x, check=False).F.value, dtype=float)


def skeleton_solve(sys, x, tol: float = SKELETON_TOL, max_iter: int = SKELETON_MAX_ITER):
    """Root in s of the alpha_s coefficient, for one point or a batch ``(..., 3)``.

    The bracket grows geometrically from ``[-1/2, 1/2]`` and is clipped to the
    window; F is decreasing in s, so the root is unique.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    a, b = sys.window
    lo = np.full(shape, max(a, -0.5))
    hi = np.full(shape, min(b, 0.5))
    half = 0.5
    while True:
        need_lo = _F_value(sys, lo, x) <= 0
        need_hi = _F_value(sys, hi, x) >= 0
        if not (np.any(need_lo) or np.any(need_hi)):
            break
        if np.any(need_lo & (lo <= a)) or np.any(need_hi & (hi >= b)):
            bad = (need_lo & (lo <= a)) | (need_hi & (hi >= b))
            raise SkeletonError(f"bracket reached the window {sys.window} at "
                                f"{_locate(bad, 0.0, x)}")
        half *= 2.0
        lo = np.where(need_lo, max(a, -half), lo)
        hi = np.where(need_hi, min(b, half), hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        pos = _F_value(sys, mid, x) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= tol):
            break
    root = 0.5 * (lo + hi)
    return float(root) if root.ndim == 0 else root


def skeleton_residual(sys, s_star, x):
    return np.abs(_F_value(sys, s_star, x))


def _exp_decomposed(sys) -> bool:
    return (isinstance(sys, LIS) and sys.closed_form_kind == "exponential")


def normal_expansion(sys, x, s_star=None):
    """``d_s(g/f)`` on the skeleton above ``x``.

    Exponential-gauge systems use the skeleton formula in terms of ``h`` only;
    other systems evaluate their closed form (or the generic solve) at the root.
    """
    x = np.asarray(x, dtype=float)
    if _exp_decomposed(sys):
        h_u, h_s = sys.h_jets(x)
        r_u, r_s, _ = sys.model.expansion_rates(x)
        delta = r_u - r_s
        tot = h_u.value + h_s.value
        dlog = h_u.d_X / h_u.value - h_s.d_X / h_s.value
        return h_s.value * delta / tot + h_u.value * (delta + dlog) / tot
    s_star = skeleton_solve(sys, x) if s_star is None else s_star
    return liouville_field(sys, s_star, x).d_s_g_over_f


def normal_expansion_fd(sys, x, s_star=None, h: float = FD_STEP):
    """Central difference of the generic g/f across the skeleton."""
    x = np.asarray(x, dtype=float)
    s_star = skeleton_solve(sys, x) if s_star is None else s_star
    up = solve_generic(sys, s_star + h, x).g_over_f
    dn = solve_generic(sys, s_star - h, x).g_over_f
    return (up - dn) / (2 * h)


def sync_check(sys, x, s_star=None):
    """``(f on the skeleton, 1 / r_tilde_u)``; equal when the skeleton flow is synchronised.

    ``f`` comes from the generic solve.  ``r_tilde_u`` is the expansion rate of the
    restriction ``alpha|_skeleton = E alpha_u``: the exponential gauge uses its
    explicit expression in ``h``, other systems differentiate ``E`` along the graph.
    """
    x = np.asarray(x, dtype=float)
    s_star = skeleton_solve(sys, x) if s_star is None else s_star
    f = solve_generic(sys, s_star, x).f
    r_u, _, _ = sys.model.expansion_rates(x)
    if _exp_decomposed(sys):
        h_u, h_s = sys.h_jets(x)
        ratio = h_u / h_s
        r_tilde = r_u + ((ratio + 1.0) * h_s.sqrt()).log().d_X
    else:
        alpha = alpha_coeffs(sys, s_star, x)
        E, F = alpha.E, alpha.F
        graph_slope = -F.d_X / F.d_s
        r_tilde = r_u + (E.d_X + E.d_s * graph_slope) / E.value
    return f, 1.0 / r_tilde


def normal_hyperbolicity(sys, x, s_star=None):
    """``(tangential bound, normal rate)`` at the skeleton above ``x``.

    The normal rate is ``f d_s(g/f)``; the tangential bound is
    ``max(1, 1 + r_s f)``.
    """
    x = np.asarray(x, dtype=float)
    s_star = skeleton_solve(sys, x) if s_star is None else s_star
    Y = liouville_field(sys, s_star, x)
    _, r_s, _ = sys.model.expansion_rates(x)
    return np.maximum(1.0, 1.0 + r_s * Y.f), Y.f * Y.d_s_g_over_f


@dataclass
class SkeletonGraph:
    points: np.ndarray
    s: np.ndarray
    residual: np.ndarray
    normal_expansion: np.ndarray

    def rows(self):
        """Rows ``(q1, q2, theta, s, residual, normal_expansion)`` sorted by coordinates."""
        table = np.column_stack([self.points, self.s, self.residual, self.normal_expansion])
        order = np.lexsort(table[:, 2::-1].T)
        return table[order]


def skeleton_graph(sys, points, tol: float = SKELETON_TOL) -> SkeletonGraph:
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(points) == 0:
        empty = np.zeros(0)
        return SkeletonGraph(points, empty, empty, empty)
    s = np.asarray(skeleton_solve(sys, points, tol)).reshape(-1)
    return SkeletonGraph(points, s, skeleton_residual(sys, s, points),
                         np.asarray(normal_expansion(sys, points, s)).reshape(-1))


# integration ------------------------------------------------------------------

@dataclass
class Trajectory:
    t: np.ndarray
    s: np.ndarray
    points: np.ndarray
    exited: np.ndarray
    exit_time: np.ndarray

    @property
    def truncated(self) -> bool:
        return bool(np.any(self.exited))


def _Y_rhs(sys, s, p):
    Y = liouville_field(sys, s, p)
    vel = sys.model.velocity(p)
    return np.asarray(Y.g, dtype=float), np.asarray(Y.f, dtype=float)[..., None] * vel


def integrate_Y(sys, start_s, start_x, T: float, dt: float = 1e-2,
                record: bool = True) -> Trajectory:
    """Fixed-step RK4 for ``Y`` from a batch of starts; negative ``T`` runs backward.

    A trajectory that leaves the window is frozen at its last inside state and
    flagged in ``exited``.
    """
    if not 0 < abs(dt) <= 1e-2:
        raise ValueError(f"|dt| must be in (0, 1e-2], got {dt}")
    start_x = np.asarray(start_x, dtype=float)
    s = np.array(np.broadcast_to(np.asarray(start_s, dtype=float), start_x.shape[:-1]))
    p = np.array(start_x)
    steps = int(round(abs(T) / abs(dt)))
    h = math.copysign(abs(dt), T) if T != 0 else 0.0
    a, b = sys.window
    exited = np.zeros(s.shape, dtype=bool)
    exit_time = np.full(s.shape, np.nan)
    ts, ss, ps = [0.0], [s.copy()], [p.copy()]
    for k in range(steps):
        live = ~exited
        if not np.any(live):
            break
        sl, pl = s[live], p[live]
        k1s, k1p = _Y_rhs(sys, sl, pl)
        k2s, k2p = _Y_rhs(sys, sl + 0.5 * h * k1s, pl + 0.5 * h * k1p)
        k3s, k3p = _Y_rhs(sys, sl + 0.5 * h * k2s, pl + 0.5 * h * k2p)
        k4s, k4p = _Y_rhs(sys, sl + h * k3s, pl + h * k3p)
        new_s = sl + h / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s)
        new_p = sys.model.wrap(pl + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p))
        out = (new_s <= a) | (new_s >= b)
        idx = np.flatnonzero(live)
        exited[idx[out]] = True
        exit_time[idx[out]] = (k + 1) * h
        keep = idx[~out]
        s[keep] = new_s[~out]
        p[keep] = new_p[~out]
        if record:
            ts.append((k + 1) * h)
            ss.append(s.copy())
            ps.append(p.copy())
    if not record:
        ts, ss, ps = [steps * h], [s], [p]
    return Trajectory(np.array(ts), np.array(ss), np.array(ps), exited, exit_time)


# strong normal bundle ---------------------------------------------------------------

@dataclass
class NormalBundleSample:
    direction: np.ndarray
    residual: float
    iterations: int


def _cocycle_matrix(sys, s, p, h=FD_STEP):
    """``[[X.f, d_s f], [X.g, d_s g]]``; flow derivatives by central differences."""
    Y = solve_generic(sys, s, p)
    fwd = solve_generic(sys, s, sys.model.flow_step(p, h))
    bwd = solve_generic(sys, s, sys.model.flow_step(p, -h))
    Xf = (fwd.f - bwd.f) / (2 * h)
    Xg = (fwd.g - bwd.g) / (2 * h)
    return np.array([[Xf, Y.d_s_f], [Xg, Y.d_s_g]], dtype=float), Y


def _backward_segment(sys, s, p, T, dt):
    """Flow ``T`` units backward along Y, carrying the inverse tangent cocycle."""
    steps = max(1, int(round(T / dt)))
    h = -T / steps
    Phi = np.eye(2)

    def rhs(state):
        s_, p_, Phi_ = state
        M, Y = _cocycle_matrix(sys, s_, p_)
        vel = sys.model.velocity(p_)
        return float(Y.g), float(Y.f) * vel, M @ Phi_

    for _ in range(steps):
        k1 = rhs((s, p, Phi))
        k2 = rhs((s + 0.5 * h * k1[0], p + 0.5 * h * k1[1], Phi + 0.5 * h * k1[2]))
        k3 = rhs((s + 0.5 * h * k2[0], p + 0.5 * h * k2[1], Phi + 0.5 * h * k2[2]))
        k4 = rhs((s + h * k3[0], p + h * k3[1], Phi + h * k3[2]))
        s = s + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p = p + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        Phi = Phi + h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return s, sys.model.wrap(p), Phi


def strong_normal_direction(sys, x, T_step: float = 1.0, iters: int = 200,
                            tol: float = 1e-8, dt: float = 0.02,
                            stop_at: float = 1e-14) -> NormalBundleSample:
    """Repelling invariant line inside ``<X, d/ds>`` at the skeleton above ``x``.

    Walk backward along the skeleton orbit in steps of ``T_step``, accumulating the
    forward cocycle from each backward point to ``x``; the image of ``d/ds`` under
    that product converges to the strong normal direction.  Coordinates are
    ``(X, d/ds)`` and the sign is fixed so that the ``d/ds`` part is nonnegative.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    x = np.asarray(x, dtype=float)
    s = skeleton_solve(sys, x)
    p = x.copy()
    P = np.eye(2)
    e_s = np.array([0.0, 1.0])
    prev = e_s
    residual = math.inf
    k = 0
    for k in range(1, iters + 1):
        s, p, Phi = _backward_segment(sys, s, p, T_step, dt)
        P = P @ np.linalg.inv(Phi)
        P /= np.linalg.norm(P)
        v = P @ e_s
        v /= np.linalg.norm(v)
        if v[1] < 0 or (v[1] == 0 and v[0] < 0):
            v = -v
        residual = abs(prev[0] * v[1] - prev[1] * v[0])
        prev = v
        if residual <= stop_at:
            break
    if residual > tol:
        raise ConvergenceError(f"power iteration residual {residual:.3g} after {k} steps",
                               residual)
    return NormalBundleSample(prev, float(residual), k)
