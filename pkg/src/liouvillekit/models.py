"""Model 3-flows: frame data, expansion rates and flow maps.

Points are arrays whose last axis holds ``(q1, q2, theta)``.  Every evaluator
broadcasts over leading axes.

The coframe convention: ``alpha_u`` annihilates the weak stable plane and
``L_X alpha_u = r_u alpha_u``; ``alpha_s`` satisfies
``L_X alpha_s = r_s alpha_s + coupling * alpha_u``.  The coupling vanishes for the
global models and is only nonzero inside the deformed DA chart.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .da import DAParams, da_rates, da_vector_field

GOLDEN_EIGENVALUE = (3.0 + math.sqrt(5.0)) / 2.0
RK4_MAX_STEP = 1e-2


def rk4_step(fn, y, dt):
    k1 = fn(y)
    k2 = fn(y + 0.5 * dt * k1)
    k3 = fn(y + 0.5 * dt * k2)
    k4 = fn(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass(frozen=True)
class FlowModel:
    """Flow with constant expansion rates and ``X = d/dtheta``.

    Subclasses override the evaluators for non-constant models.
    """

    name: str
    r_u: float
    r_s: float
    coord_names: tuple = ("q1", "q2", "theta")
    theta_period: float = 1.0
    sample_box: tuple = ((-0.5, 0.5), (-0.5, 0.5))
    anosov: bool = True
    marked_orbits: tuple = field(default=())

    point_dim = 3
    has_coupling = False

    def velocity(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        v = np.zeros_like(points)
        v[..., 2] = 1.0
        return v

    def expansion_rates(self, points):
        """``(r_u, r_s, coupling)`` broadcast to the leading shape of ``points``."""
        shape = np.shape(points)[:-1]
        return (np.full(shape, self.r_u), np.full(shape, self.r_s), np.zeros(shape))

    def wrap(self, points) -> np.ndarray:
        return np.array(points, dtype=float)

    def flow_step(self, points, dt) -> np.ndarray:
        p = np.array(points, dtype=float)
        p[..., 2] += dt
        return self.wrap(p)

    def scalar_jet(self, fld, s, points):
        return fld.jet(self, s, points)

    def sample_points(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Uniform points; a larger ``n`` with the same seed extends the smaller draw."""
        (a1, b1), (a2, b2) = self.sample_box
        lo = np.array([a1, a2, 0.0])
        hi = np.array([b1, b2, self.theta_period])
        return lo + (hi - lo) * rng.random((n, 3))

    def base_grid(self, n: int) -> np.ndarray:
        """``n x n`` grid over (q1, theta) with q2 = 0, rows sorted by coordinates."""
        (a1, b1), _ = self.sample_box
        q1 = np.linspace(a1, b1, n)
        th = np.arange(n) * (self.theta_period / n)
        Q, T = np.meshgrid(q1, th, indexing="ij")
        return np.column_stack([Q.ravel(), np.zeros(Q.size), T.ravel()])

    def theta_curve(self, n: int, q1: float = 0.0, q2: float = 0.0) -> np.ndarray:
        th = np.arange(n) * (self.theta_period / n)
        return np.column_stack([np.full(n, q1), np.full(n, q2), th])


@dataclass(frozen=True)
class CatSuspension(FlowModel):
    """Suspension of the cat map in eigencoordinates (u, v, theta).

    Only the roof direction is reduced: ``(u, v, 1) ~ (lam u, v / lam, 0)``.
    The torus lattice in (u, v) is left unreduced since nothing in the toolkit
    depends on it.
    """

    eigenvalue: float = GOLDEN_EIGENVALUE

    def wrap(self, points) -> np.ndarray:
        p = np.array(points, dtype=float)
        k = np.floor(p[..., 2])
        p[..., 0] *= self.eigenvalue ** k
        p[..., 1] *= self.eigenvalue ** (-k)
        p[..., 2] -= k
        return p


def cat_suspension() -> CatSuspension:
    r = math.log(GOLDEN_EIGENVALUE)
    return CatSuspension(name="cat", r_u=r, r_s=-r, coord_names=("u", "v", "theta"))


def geodesic_frame_local() -> FlowModel:
    return FlowModel(name="geodesic-local", r_u=1.0, r_s=-1.0)


def constant_rate_model(r_u: float, r_s: float, name: str = "constant") -> FlowModel:
    if not (r_u > 0 and r_u > r_s):
        raise ValueError(f"rates ({r_u}, {r_s}) are not partially hyperbolic")
    return FlowModel(name=name, r_u=r_u, r_s=r_s, anosov=r_s < 0)


@dataclass(frozen=True)
class DAChart(FlowModel):
    """Local chart around a periodic orbit after the DA deformation.

    ``alpha_u = dy - mu y dtheta`` and ``alpha_s = dx - nu_hat x dtheta``; the first
    is exactly invariant, the second picks up the coupling ``d(nu_hat x)/dy``.
    """

    params: DAParams = field(default_factory=DAParams)
    has_coupling = True

    def velocity(self, points) -> np.ndarray:
        return da_vector_field(self.params, points)

    def expansion_rates(self, points):
        return da_rates(self.params, points)

    def wrap(self, points) -> np.ndarray:
        p = np.array(points, dtype=float)
        p[..., 2] = np.mod(p[..., 2], self.theta_period)
        return p

    def flow_step(self, points, dt) -> np.ndarray:
        p = np.array(points, dtype=float)
        n = max(1, int(math.ceil(abs(dt) / RK4_MAX_STEP)))
        h = dt / n
        for _ in range(n):
            p = rk4_step(self.velocity, p, h)
        return self.wrap(p)


def da_chart(params: DAParams | None = None) -> DAChart:
    p = params or DAParams()
    p.validate()
    return DAChart(name="da-chart", r_u=p.mu, r_s=p.nubar, theta_period=p.T,
                   coord_names=("x", "y", "theta"), sample_box=((-1.0, 1.0), (-1.0, 1.0)),
                   anosov=p.nubar < 0, marked_orbits=((0.0, 0.0, 0.0),), params=p)


MODEL_NAMES = ("cat", "geodesic-local", "da-chart")


def model_by_name(name: str, **params) -> FlowModel:
    if name == "cat":
        return cat_suspension()
    if name == "geodesic-local":
        return geodesic_frame_local()
    if name == "da-chart":
        return da_chart(DAParams(**params) if params else None)
    raise ValueError(f"unknown model {name!r}; known: {', '.join(MODEL_NAMES)}")
