"""Bunching constants, skeleton persistence and Hölder diagnostics."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import fields as flds
from . import kernels
from .dynamics import SkeletonGraph, skeleton_solve
from .lis import LIS, BiContactCoeffs, LISError, Sampling, format_point, liouville_density
from .models import DAChart


class PersistenceError(LISError):
    pass


@dataclass
class BunchingReport:
    B_s: float
    per_point: np.ndarray
    T_max: float
    n_samples: int
    seed: int
    sample_times: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"B_s": self.B_s, "per_point_min": float(np.min(self.per_point)),
                "per_point_max": float(np.max(self.per_point)), "T_max": self.T_max,
                "n_samples": self.n_samples, "seed": self.seed,
                "sample_times": list(self.sample_times)}


def dyadic_times(T_max: float) -> list:
    if T_max < 1:
        raise ValueError(f"T_max must be at least 1, got {T_max}")
    times, t = [], 1.0
    while t <= T_max * (1 + 1e-12):
        times.append(t)
        t *= 2.0
    return times


def _sync_averages_generic(model, starts, dt, sample_steps):
    """Running means of r_s/r_u along ``X / r_u`` with compensated summation."""
    p = np.array(starts, dtype=float)
    total = np.zeros(len(p))
    comp = np.zeros(len(p))
    out = np.empty((len(p), len(sample_steps)))

    def rhs(q):
        r_u, r_s, _ = model.expansion_rates(q)
        return model.velocity(q) / r_u[..., None], r_s / r_u

    k = 0
    for step in range(1, int(sample_steps[-1]) + 1):
        v1, c1 = rhs(p)
        v2, c2 = rhs(p + 0.5 * dt * v1)
        v3, c3 = rhs(p + 0.5 * dt * v2)
        v4, c4 = rhs(p + dt * v3)
        p = p + dt / 6.0 * (v1 + 2 * v2 + 2 * v3 + v4)
        inc = dt / 6.0 * (c1 + 2 * c2 + 2 * c3 + c4) - comp
        new = total + inc
        comp = (new - total) - inc
        total = new
        while k < len(sample_steps) and sample_steps[k] == step:
            out[:, k] = total / (step * dt)
            k += 1
    return out


def bunching_estimate(model, T_max: float = 64.0, n_orbits: int = 64, seed: int = 0,
                      dt: float = 1e-2, threads: int = 1) -> BunchingReport:
    """Infimum over sampled orbits of ``1 - sup_t (1/t) int_0^t r_s/r_u``.

    Orbits start at ``n_orbits`` seeded uniform points plus the model's marked
    periodic orbits.  Time runs along the synchronised flow ``X / r_u`` and the sup
    is taken over dyadic times up to ``T_max``.  Orbits are independent, so
    ``threads > 1`` splits them into chunks without changing the result.
    """
    times = dyadic_times(T_max)
    rng = np.random.default_rng(seed)
    starts = model.sample_points(rng, n_orbits)
    if model.marked_orbits:
        starts = np.concatenate([np.asarray(model.marked_orbits, dtype=float), starts])
    steps = np.array([int(round(t / dt)) for t in times], dtype=np.int64)
    if isinstance(model, DAChart):
        p = model.params

        def run(chunk):
            return kernels.da_sync_birkhoff(p.mu, p.nu, p.nubar, p.eta, chunk, dt, steps)
    else:
        def run(chunk):
            return _sync_averages_generic(model, chunk, dt, steps)

    chunks = np.array_split(starts, max(1, min(int(threads), len(starts))))
    if len(chunks) == 1:
        avgs = run(starts)
    else:
        with ThreadPoolExecutor(len(chunks)) as pool:
            avgs = np.concatenate(list(pool.map(run, chunks)))
    per_point = 1.0 - np.max(avgs, axis=1)
    return BunchingReport(float(np.min(per_point)), per_point, float(T_max), len(starts),
                          seed, times)


@dataclass
class PersistenceReport:
    eps: float
    c0_distance: float
    ratio: float

    def to_dict(self) -> dict:
        return {"eps": self.eps, "c0_distance": self.c0_distance, "ratio": self.ratio}


def perturbed_system(sys: LIS, perturbation, eps: float) -> LIS:
    """Same system with ``h_s`` replaced by ``h_s * exp(eps * perturbation)``."""
    if not isinstance(sys, LIS) or sys.bicontact.gauge not in ("symmetric",
                                                               "exponential_decomposed"):
        raise PersistenceError("persistence needs a base system in the exponential gauge")
    pert = flds.field_from_spec(perturbation)
    b = sys.bicontact
    h_s = b.h_s * (pert * float(eps)).exp()
    return LIS(sys.model, BiContactCoeffs("exponential_decomposed", b.h_u, h_s), sys.profile,
               sys.window)


def skeleton_persistence(sys: LIS, perturbation, eps_list: Sequence[float],
                         grid_n: int = 32,
                         sampling: Optional[Sampling] = None) -> list:
    """Sup-distance between perturbed and original skeletons on the base grid."""
    sampling = sampling or Sampling(16, 16, 200)
    pts = sys.model.base_grid(grid_n)
    base = np.asarray(skeleton_solve(sys, pts))
    S, P = sampling.points(sys.model, sys.window)
    reports = []
    for eps in eps_list:
        eps = float(eps)
        new = perturbed_system(sys, perturbation, eps)
        dens = liouville_density(new, S, P)
        if not np.all(dens > 0):
            i = int(np.argmin(dens))
            raise PersistenceError(f"eps={eps:g}: Liouville density {dens[i]:.6g} at "
                                   f"{format_point(S[i], P[i])}")
        dist = float(np.max(np.abs(np.asarray(skeleton_solve(new, pts)) - base)))
        reports.append(PersistenceReport(eps, dist, dist / eps if eps else 0.0))
    return reports


@dataclass
class HolderEstimate:
    exponent: float
    degenerate: bool
    lags: list
    oscillations: list


def holder_exponent(skeleton, scales: Optional[Sequence[int]] = None,
                    min_lag: int = 10) -> HolderEstimate:
    """Slope of log sup|L(x + d) - L(x)| against log d along a closed curve.

    ``skeleton`` is a :class:`SkeletonGraph` sampled uniformly along a closed curve,
    or the raw array of samples.  ``scales`` are integer lags in grid steps
    (default: powers of two from ``min_lag`` up to 1/64 of the curve, beyond which
    the sup saturates and biases the slope down); lags below ``min_lag`` steps are
    dropped.  The result is clipped to (0, 1].
    """
    vals = np.asarray(skeleton.s if isinstance(skeleton, SkeletonGraph) else skeleton,
                      dtype=float)
    n = len(vals)
    if scales is None:
        lag = 1 << max(0, math.ceil(math.log2(min_lag)))
        scales = []
        while lag <= n // 64:
            scales.append(lag)
            lag *= 2
    lags = sorted({int(s) for s in scales if min_lag <= int(s) < n})
    if len(lags) < 3:
        raise ValueError(f"need at least 3 usable scales, got {lags}")
    osc = [float(np.max(np.abs(np.roll(vals, -k) - vals))) for k in lags]
    floor = 1e-13 * (1.0 + float(np.max(np.abs(vals))))
    if max(osc) <= floor:
        return HolderEstimate(1.0, True, lags, osc)
    x = np.log(np.array(lags, dtype=float) / n)
    y = np.log(np.maximum(osc, floor))
    slope = float(np.polyfit(x, y, 1)[0])
    return HolderEstimate(min(1.0, max(slope, 1e-12)), False, lags, osc)
