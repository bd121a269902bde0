"""Liouville interpolation systems over R_s x M.

A system is ``alpha = lam_plus * alpha_plus + lam_minus * alpha_minus`` where
``alpha_plus`` (positive contact) and ``alpha_minus`` (negative contact) are
written in the coframe ``(alpha_u, alpha_s)`` and the profile ``lam_pm`` is
positive with ``log(lam_plus / lam_minus)`` increasing in ``s``.

Besides the base construction, the three elementary maps (change of basis,
horizontal reparametrisation, conformal scaling) are provided as wrapper
systems.  Each wrapper also transports the closed-form Liouville field of its
parent so that the generic 2x2 solve always has an independent counterpart.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fields as flds
from .fields import Field
from .forms import AnnihilatorForm, Jet2, contact_coefficient, lie_s, lie_X, wedge

GAUGES = ("symmetric", "exponential_decomposed", "fibration")
PROFILE_KINDS = ("linear", "exponential", "general")
DEFAULT_WINDOWS = {"linear": (-1.0, 1.0), "exponential": (-5.0, 5.0), "general": (-3.0, 3.0)}
POSITIVITY_FLOOR = 1e-9


class LISError(ValueError):
    """Invalid interpolation system or failed precondition."""


class ProfileError(LISError):
    pass


class ContactError(LISError):
    pass


class AdmissibilityError(LISError):
    pass


def _x_str(x) -> str:
    x = np.asarray(x, dtype=float).ravel()
    return f"x=({', '.join(f'{v:.6g}' for v in x)})"


def format_point(s, x) -> str:
    return f"s={float(s):.6g}, {_x_str(x)}"


def _first_bad(mask, s, points):
    """Locate the first True entry of ``mask`` and describe it."""
    mask = np.asarray(mask)
    idx = np.unravel_index(int(np.argmax(mask)), mask.shape) if mask.ndim else ()
    s_b = np.broadcast_to(np.asarray(s, dtype=float), mask.shape)
    pts = np.broadcast_to(np.asarray(points, dtype=float), mask.shape + (3,))
    return format_point(s_b[idx], pts[idx])


@dataclass(frozen=True)
class Sampling:
    """Sample design for validation sweeps: an ``n_s x n_base x n_base`` grid
    over window x base grid plus ``n_random`` uniform points."""

    n_s: int = 64
    n_base: int = 64
    n_random: int = 1000
    seed: int = 0

    def points(self, model, window):
        a, b = window
        s_grid = a + (np.arange(self.n_s) + 0.5) * (b - a) / self.n_s
        base = model.base_grid(self.n_base)
        S = np.repeat(s_grid, len(base))
        P = np.tile(base, (self.n_s, 1))
        rng = np.random.default_rng(self.seed)
        rs = a + (b - a) * rng.random(self.n_random)
        rp = model.sample_points(rng, self.n_random)
        return np.concatenate([S, rs]), np.concatenate([P, rp])


# building blocks ---------------------------------------------------------------

@dataclass(frozen=True)
class BiContactCoeffs:
    """The contact pair in the coframe.

    ``symmetric``: ``alpha_pm = alpha_u -+ alpha_s``.
    ``exponential_decomposed``: ``alpha_plus = alpha_u - alpha_s`` and
    ``alpha_minus = h_u alpha_u + h_s alpha_s``.
    ``fibration``: ``alpha_plus = h_plus alpha_u - alpha_s`` and
    ``alpha_minus = (2 - h_plus) alpha_u + alpha_s``.
    """

    gauge: str = "symmetric"
    h_u: Field = field(default_factory=lambda: flds.const(1.0))
    h_s: Field = field(default_factory=lambda: flds.const(1.0))
    h_plus: Field = field(default_factory=lambda: flds.const(1.0))

    def __post_init__(self):
        if self.gauge not in GAUGES:
            raise LISError(f"unknown gauge {self.gauge!r}; known: {GAUGES}")
        for name in ("h_u", "h_s", "h_plus"):
            if getattr(self, name).depends_on_s:
                raise LISError(f"{name} must be a field on M (no s dependence)")

    def pair_fields(self):
        one = flds.const(1.0)
        if self.gauge == "symmetric":
            return one, -one, one, one
        if self.gauge == "exponential_decomposed":
            return one, -one, self.h_u, self.h_s
        return self.h_plus, -one, 2 - self.h_plus, one


@dataclass(frozen=True)
class Profile:
    kind: str
    lam_minus: Field
    lam_plus: Field
    sigma: Optional[Field] = None
    w: Optional[Field] = None

    @classmethod
    def linear(cls) -> "Profile":
        s = flds.fibre()
        return cls("linear", 1 - s, 1 + s)

    @classmethod
    def exponential(cls) -> "Profile":
        s = flds.fibre()
        return cls("exponential", (-s).exp(), s.exp())

    @classmethod
    def general(cls, sigma: Field, w: Field) -> "Profile":
        """``lam_pm = exp(w +- sigma)``; ``sigma`` must increase in s."""
        return cls("general", (w - sigma).exp(), (w + sigma).exp(), sigma, w)


# systems ---------------------------------------------------------------------------

class InterpolationSystem:
    """Common interface; concrete classes provide the jets and optional closed forms."""

    def pair_jets(self, points):
        """Jets of ``(p_u, p_s, m_u, m_s)`` with ``alpha_plus = p_u alpha_u + p_s alpha_s``."""
        raise NotImplementedError

    def profile_jets(self, s, points):
        """Jets of ``(lam_minus, lam_plus)``."""
        raise NotImplementedError

    def closed_form(self, s, points):
        """Closed-form ``(f, g, g/f, d_s(g/f))`` or None when no formula applies."""
        return None

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class LIS(InterpolationSystem):
    model: object
    bicontact: BiContactCoeffs
    profile: Profile
    window: tuple = (-5.0, 5.0)

    def __post_init__(self):
        a, b = self.window
        if not a < b:
            raise LISError(f"empty window {self.window}")

    def pair_jets(self, points):
        return tuple(f.jet(self.model, 0.0, points) for f in self.bicontact.pair_fields())

    def profile_jets(self, s, points):
        return (self.profile.lam_minus.jet(self.model, s, points),
                self.profile.lam_plus.jet(self.model, s, points))

    @property
    def closed_form_kind(self) -> Optional[str]:
        gauge, kind = self.bicontact.gauge, self.profile.kind
        if kind == "linear" and gauge == "symmetric":
            return "linear_symmetric"
        if gauge == "fibration" or self.model.has_coupling:
            return None
        return "exponential" if kind == "exponential" else ("reduced" if kind == "general" else None)

    def h_jets(self, points):
        if self.bicontact.gauge == "symmetric":
            one = flds.const(1.0)
            return one.jet(self.model, 0.0, points), one.jet(self.model, 0.0, points)
        return (self.bicontact.h_u.jet(self.model, 0.0, points),
                self.bicontact.h_s.jet(self.model, 0.0, points))

    def closed_form(self, s, points):
        kind = self.closed_form_kind
        if kind is None:
            return None
        r_u, r_s, q = self.model.expansion_rates(points)
        if kind == "linear_symmetric":
            return linear_symmetric_field(s, r_u, r_s, q)
        h_u, h_s = self.h_jets(points)
        if kind == "exponential":
            return exponential_gauge_field(s, h_u, h_s, r_u, r_s)
        sig = self.profile.sigma.jet(self.model, s, points)
        w = self.profile.w.jet(self.model, s, points)
        return reduced_field(sig, w, h_u, h_s, r_u, r_s)

    def describe(self) -> dict:
        b = self.bicontact
        return {"model": self.model.name, "gauge": b.gauge, "h_u": str(b.h_u.expr),
                "h_s": str(b.h_s.expr), "h_plus": str(b.h_plus.expr),
                "profile": self.profile.kind, "window": list(self.window)}


def make_system(model, gauge="symmetric", profile="exponential", h_u=None, h_s=None,
                h_plus=None, window=None, sigma=None, w=None) -> LIS:
    """Convenience constructor taking field specs or Field objects."""
    fs = flds.field_from_spec
    bic = BiContactCoeffs(gauge,
                          fs(1.0 if h_u is None else h_u),
                          fs(1.0 if h_s is None else h_s),
                          fs(1.0 if h_plus is None else h_plus))
    if isinstance(profile, Profile):
        prof = profile
    elif profile == "linear":
        prof = Profile.linear()
    elif profile == "exponential":
        prof = Profile.exponential()
    elif profile == "general":
        prof = Profile.general(fs("s" if sigma is None else sigma), fs(0.0 if w is None else w))
    else:
        raise LISError(f"unknown profile kind {profile!r}; known: {PROFILE_KINDS}")
    return LIS(model, bic, prof, tuple(window) if window else DEFAULT_WINDOWS[prof.kind])


# closed forms ------------------------------------------------------------------

@dataclass
class FieldValues:
    """Plain values of ``(f, g, g/f, d_s(g/f))`` at a batch of points."""

    f: object
    g: object
    g_over_f: object
    d_s_g_over_f: object


def exponential_gauge_field(s, h_u: Jet2, h_s: Jet2, r_u, r_s) -> FieldValues:
    """Liouville field for ``alpha = e^s (alpha_u - alpha_s) + e^-s (h_u alpha_u + h_s alpha_s)``.

    Expanded closed forms in ``t = e^{2s}``; no linear solve involved.
    """
    t = np.exp(2.0 * np.asarray(s, dtype=float))
    delta = r_u - r_s
    hu, hs, Xhu, Xhs = h_u.value, h_s.value, h_u.d_X, h_s.d_X
    tot, Xtot = hu + hs, Xhu + Xhs
    J = -delta * t - (Xtot + tot * (r_u + r_s)) - (hu * hs * delta + hs * Xhu - hu * Xhs) / t
    f = -2.0 * tot / J
    gf = 0.5 * ((t + hu) * (1 - hs / t) * delta / tot + (1 - hs / t) * Xtot / tot + Xhs / t)
    dgf = (t + hs * hu / t) * delta / tot + hs * Xtot / (t * tot) - Xhs / t
    return FieldValues(f, f * gf, gf, dgf)


def linear_symmetric_field(s, r_u, r_s, coupling=0.0) -> FieldValues:
    """Field of ``2 alpha_u - 2 s alpha_s``: ``f = 1/(r_u - s q)`` and ``g = s (1 - r_s f)``."""
    s = np.asarray(s, dtype=float)
    f = 1.0 / (r_u - s * coupling)
    g = s * (1.0 - r_s * f)
    gf = s * (r_u - s * coupling - r_s)
    dgf = r_u - r_s - 2.0 * s * coupling
    return FieldValues(f, g, gf, dgf + 0.0 * s)


def reduced_field(sig: Jet2, w: Jet2, h_u: Jet2, h_s: Jet2, r_u, r_s) -> FieldValues:
    """Field for ``lam_pm = exp(w +- sigma)`` from the exponential one.

    The profile is the pullback of the exponential profile by ``s -> sigma`` followed by
    the conformal factor ``e^w``.
    """
    base = exponential_gauge_field(sig.value, h_u, h_s, r_u, r_s)
    R, dR = base.g_over_f, base.d_s_g_over_f
    a = base.f
    b = (base.g - base.f * sig.d_X) / sig.d_s
    scale = 1.0 + a * w.d_X + b * w.d_s
    gf = (R - sig.d_X) / sig.d_s
    dgf = (dR * sig.d_s**2 - sig.d_sX * sig.d_s - (R - sig.d_X) * sig.d_ss) / sig.d_s**2
    return FieldValues(a / scale, b / scale, gf, dgf)


# core evaluations --------------------------------------------------------------

def alpha_coeffs(sys: InterpolationSystem, s, x, check: bool = True) -> AnnihilatorForm:
    p_u, p_s, m_u, m_s = sys.pair_jets(x)
    lm, lp = sys.profile_jets(s, x)
    if check:
        bad = (np.asarray(lm.value) <= 0) | (np.asarray(lp.value) <= 0)
        if np.any(bad):
            raise ProfileError(f"nonpositive profile at {_first_bad(bad, s, x)}")
    return AnnihilatorForm(lp * p_u + lm * m_u, lp * p_s + lm * m_s)


def lie_derivatives(sys, s, x, check: bool = True):
    alpha = alpha_coeffs(sys, s, x, check)
    r_u, r_s, q = sys.model.expansion_rates(x)
    return alpha, lie_X(alpha, r_u, r_s, q), lie_s(alpha)


def liouville_density(sys, s, x):
    _, lx, ls = lie_derivatives(sys, s, x)
    return wedge(lx, ls).coeff


def _pair_contact(sys, x):
    p_u, p_s, m_u, m_s = sys.pair_jets(x)
    r_u, r_s, q = sys.model.expansion_rates(x)
    plus = contact_coefficient(AnnihilatorForm(p_u, p_s), r_u, r_s, q)
    minus = contact_coefficient(AnnihilatorForm(m_u, m_s), r_u, r_s, q)
    return plus, minus, (p_u.value, p_s.value, m_u.value, m_s.value)


def contact_densities(sys, x):
    """Normalised contact densities; both are positive for a bi-contact pair.

    ``c_plus = r_u - r_s + X.log(p_u / |p_s|)`` (plus a coupling term) and likewise
    for the minus form with the sign flipped so that negativity maps to ``c_minus > 0``.
    """
    plus, minus, (pu, ps, mu, ms) = _pair_contact(sys, x)
    return plus / (-pu * ps), -minus / (mu * ms)


def reversed_density(sys, s, x):
    """Liouville density of ``lam_minus alpha_minus - lam_plus alpha_plus``."""
    p_u, p_s, m_u, m_s = sys.pair_jets(x)
    lm, lp = sys.profile_jets(s, x)
    alpha = AnnihilatorForm(m_u * lm - p_u * lp, m_s * lm - p_s * lp)
    r_u, r_s, q = sys.model.expansion_rates(x)
    return wedge(lie_X(alpha, r_u, r_s, q), lie_s(alpha)).coeff


def boundary_contact(sys, x):
    """Contact coefficient of the restriction of alpha to the two window ends."""
    out = []
    r_u, r_s, q = sys.model.expansion_rates(x)
    for s in sys.window:
        alpha = alpha_coeffs(sys, s, x, check=False)
        out.append(contact_coefficient(alpha, r_u, r_s, q))
    return tuple(out)


def profile_slope(sys, s, x):
    """``d/ds log(lam_plus / lam_minus)``."""
    lm, lp = sys.profile_jets(s, x)
    return lp.d_s / lp.value - lm.d_s / lm.value


def fibration_min_check(sys, x, s_range=(-5.0, 5.0), n: int = 10_000):
    """Closed-form and grid minimum over s of the Liouville density at one point.

    Requires the fibration gauge with the exponential profile.
    """
    if not (isinstance(sys, LIS) and sys.bicontact.gauge == "fibration"
            and sys.profile.kind == "exponential"):
        raise LISError("fibration_min_check needs the fibration gauge and exponential profile")
    x = np.asarray(x, dtype=float)
    r_u, r_s, _ = sys.model.expansion_rates(x)
    r_u, r_s = float(r_u), float(r_s)
    delta = r_u - r_s
    hp = sys.bicontact.h_plus.jet(sys.model, 0.0, x)
    B = float(hp.d_X + hp.value * delta)
    if not 0 < B < 2 * delta:
        raise ContactError(f"B={B:.6g} outside (0, {2 * delta:.6g}) at {format_point(0.0, x)}")
    closed = 2.0 * np.sqrt((2 * delta - B) * B) + 2.0 * (r_s + r_u)
    s = np.linspace(s_range[0], s_range[1], n)
    dens = liouville_density(sys, s, np.broadcast_to(x, (n, 3)))
    return float(closed), float(np.min(dens))


# elementary maps ----------------------------------------------------------------

@dataclass(frozen=True)
class BasisChanged(InterpolationSystem):
    parent: InterpolationSystem
    z_minus: Field
    z_plus: Field

    @property
    def model(self):
        return self.parent.model

    @property
    def window(self):
        return self.parent.window

    def pair_jets(self, points):
        p_u, p_s, m_u, m_s = self.parent.pair_jets(points)
        ep = self.z_plus.exp().jet(self.model, 0.0, points)
        em = self.z_minus.exp().jet(self.model, 0.0, points)
        return p_u * ep, p_s * ep, m_u * em, m_s * em

    def profile_jets(self, s, points):
        lm, lp = self.parent.profile_jets(s, points)
        return (lm * (-self.z_minus).exp().jet(self.model, s, points),
                lp * (-self.z_plus).exp().jet(self.model, s, points))

    def closed_form(self, s, points):
        return self.parent.closed_form(s, points)

    def describe(self):
        return {"change_of_basis": {"z_minus": str(self.z_minus.expr),
                                    "z_plus": str(self.z_plus.expr)},
                "parent": self.parent.describe()}


def change_of_basis(sys, z_minus, z_plus) -> BasisChanged:
    z_minus, z_plus = flds.field_from_spec(z_minus), flds.field_from_spec(z_plus)
    for name, z in (("z_minus", z_minus), ("z_plus", z_plus)):
        if z.depends_on_s:
            raise LISError(f"{name} must be a field on M")
    return BasisChanged(sys, z_minus, z_plus)


def _monotone_inverse(fn, target, lo, hi, tol=1e-14, max_iter=200):
    """Solve ``fn(t) = target`` for increasing ``fn`` by vectorised bisection."""
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    width = 1.0
    while np.any(fn(lo) > target):
        lo = np.where(fn(lo) > target, lo - width, lo)
        width *= 2
        if width > 1e6:
            raise LISError("cannot bracket the inverse of the horizontal map")
    width = 1.0
    while np.any(fn(hi) < target):
        hi = np.where(fn(hi) < target, hi + width, hi)
        width *= 2
        if width > 1e6:
            raise LISError("cannot bracket the inverse of the horizontal map")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        up = fn(mid) > target
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
        if np.all(hi - lo <= tol * (1 + np.abs(mid))):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class HorizontallyMapped(InterpolationSystem):
    parent: InterpolationSystem
    psi: Field
    window: tuple = (-1.0, 1.0)

    @property
    def model(self):
        return self.parent.model

    def pair_jets(self, points):
        return self.parent.pair_jets(points)

    def preimage(self, s, points):
        """``t`` with ``psi(t, x) = s`` and the jet of ``t`` as a function of ``(s, x)``."""
        s = np.asarray(s, dtype=float)
        points = np.asarray(points, dtype=float)
        shape = np.broadcast_shapes(s.shape, points.shape[:-1])
        pts = np.broadcast_to(points, shape + (3,))
        a, b = self.parent.window

        def fn(t):
            return self.psi.value(self.model, t, pts)

        t = _monotone_inverse(fn, np.broadcast_to(s, shape), a, b)
        ps = self.psi.jet(self.model, t, pts)
        t_s = 1.0 / ps.d_s
        t_X = -ps.d_X * t_s
        t_ss = -ps.d_ss * t_s**3
        t_sX = -(ps.d_ss * t_X + ps.d_sX) * t_s**2
        return t, Jet2(t, t_X, t_s, t_sX, t_ss), ps

    def profile_jets(self, s, points):
        t, tj, _ = self.preimage(s, points)
        pts = np.broadcast_to(np.asarray(points, dtype=float), np.shape(t) + (3,))
        return tuple(_compose_fibre(lam, tj) for lam in self.parent.profile_jets(t, pts))

    def closed_form(self, s, points):
        t, _, ps = self.preimage(s, points)
        pts = np.broadcast_to(np.asarray(points, dtype=float), np.shape(t) + (3,))
        base = self.parent.closed_form(t, pts)
        if base is None:
            return None
        G, dG = base.g_over_f, base.d_s_g_over_f
        gf = ps.d_X + G * ps.d_s
        dgf = dG + (ps.d_sX + G * ps.d_ss) / ps.d_s
        return FieldValues(base.f, base.f * gf, gf, dgf)

    def describe(self):
        return {"horizontal_map": {"psi": str(self.psi.expr)}, "parent": self.parent.describe()}


def _compose_fibre(lam: Jet2, t: Jet2) -> Jet2:
    """Jet of ``lam(t(s, x), x)`` from the jet of ``lam`` at ``t`` and the jet of ``t``."""
    return Jet2(
        lam.value,
        lam.d_s * t.d_X + lam.d_X,
        lam.d_s * t.d_s,
        (lam.d_ss * t.d_X + lam.d_sX) * t.d_s + lam.d_s * t.d_sX,
        lam.d_ss * t.d_s**2 + lam.d_s * t.d_ss,
    )


def horizontal_map(sys, psi, sampling: Optional[Sampling] = None) -> HorizontallyMapped:
    """Reparametrise the fibre by ``s' = psi(s, x)``; requires ``d_s psi > 0``."""
    psi = flds.field_from_spec(psi)
    sampling = sampling or Sampling(16, 16, 200)
    S, P = sampling.points(sys.model, sys.window)
    jet = psi.jet(sys.model, S, P)
    bad = np.asarray(jet.d_s) <= 0
    if np.any(bad):
        raise LISError(f"psi is not increasing in s at {_first_bad(bad, S, P)}")
    a, b = sys.window
    base = np.concatenate([sys.model.base_grid(16), P])
    lo = float(np.max(psi.value(sys.model, a, base)))
    hi = float(np.min(psi.value(sys.model, b, base)))
    if not lo < hi:
        raise LISError("horizontal map leaves an empty common window")
    return HorizontallyMapped(sys, psi, (lo, hi))


@dataclass(frozen=True)
class Scaled(InterpolationSystem):
    parent: InterpolationSystem
    fscale: Field

    @property
    def model(self):
        return self.parent.model

    @property
    def window(self):
        return self.parent.window

    def pair_jets(self, points):
        return self.parent.pair_jets(points)

    def profile_jets(self, s, points):
        e = self.fscale.exp().jet(self.model, s, points)
        lm, lp = self.parent.profile_jets(s, points)
        return lm * e, lp * e

    def closed_form(self, s, points):
        base = self.parent.closed_form(s, points)
        if base is None:
            return None
        fj = self.fscale.jet(self.model, s, points)
        scale = 1.0 + base.f * fj.d_X + base.g * fj.d_s
        return FieldValues(base.f / scale, base.g / scale, base.g_over_f, base.d_s_g_over_f)

    def describe(self):
        return {"scaling": {"f": str(self.fscale.expr)}, "parent": self.parent.describe()}


def scaling_map(sys, fscale, sampling: Optional[Sampling] = None) -> Scaled:
    """Multiply alpha by ``exp(fscale)``; requires ``Y.fscale > -1`` on the window samples."""
    from .dynamics import liouville_field

    fscale = flds.field_from_spec(fscale)
    sampling = sampling or Sampling()
    S, P = sampling.points(sys.model, sys.window)
    Y = liouville_field(sys, S, P, provenance="linear_solve")
    fj = fscale.jet(sys.model, S, P)
    rate = Y.f * fj.d_X + Y.g * fj.d_s
    bad = rate <= -1.0
    if np.any(bad):
        i = int(np.argmax(bad))
        raise AdmissibilityError(
            f"Y.f = {rate[i]:.6g} <= -1 at {format_point(S[i], P[i])}")
    return Scaled(sys, fscale)


# validation -------------------------------------------------------------------------

@dataclass
class ValidationReport:
    min_density: float
    argmin: tuple
    contact_densities: tuple
    min_profile_slope: float
    min_h: float
    boundary: tuple
    n_points: int
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"min_density": self.min_density, "argmin": list(self.argmin),
                "contact_densities": list(self.contact_densities),
                "min_profile_slope": self.min_profile_slope, "min_h": self.min_h,
                "boundary_contact": list(self.boundary), "n_points": self.n_points,
                "failures": list(self.failures), "ok": self.ok}


def validate(sys, sampling: Optional[Sampling] = None) -> ValidationReport:
    """Sweep the sample design and check every system invariant."""
    sampling = sampling or Sampling()
    S, P = sampling.points(sys.model, sys.window)
    failures = []

    lm, lp = sys.profile_jets(S, P)
    lam_all = np.minimum(lm.value, lp.value)
    lam_min = float(np.min(lam_all))
    if lam_min <= 0:
        j = int(np.argmin(lam_all))
        failures.append(f"profile not positive: min {lam_min:.6g} at {format_point(S[j], P[j])}")

    p_u, p_s, m_u, m_s = sys.pair_jets(P)
    h_vals = np.minimum.reduce(np.broadcast_arrays(
        *[np.asarray(v.value) for v in (p_u, m_u, m_s)], -np.asarray(p_s.value)))
    min_h = float(np.min(h_vals))
    if min_h < POSITIVITY_FLOOR:
        j = int(np.argmin(h_vals))
        failures.append(f"pair coefficient below {POSITIVITY_FLOOR}: {min_h:.6g} "
                        f"at {_x_str(P[j])}")

    slope = profile_slope(sys, S, P)
    min_slope = float(np.min(slope))
    if not min_slope > 0:
        j = int(np.argmin(np.broadcast_to(slope, S.shape)))
        failures.append(f"profile ratio not increasing: min slope {min_slope:.6g} "
                        f"at {format_point(S[j], P[j])}")

    c_plus, c_minus = contact_densities(sys, P)
    cp, cm = float(np.min(c_plus)), float(np.min(c_minus))
    for name, vals, low in (("c_plus", c_plus, cp), ("c_minus", c_minus, cm)):
        if not low > 0:
            j = int(np.argmin(vals))
            failures.append(f"contact condition fails: min {name} {low:.6g} "
                            f"at {_x_str(P[j])}")

    dens = liouville_density(sys, S, P) if lam_min > 0 else np.full(S.shape, np.nan)
    i = int(np.nanargmin(dens)) if np.any(np.isfinite(dens)) else 0
    md = float(dens[i])
    if not md > 0:
        failures.append(f"Liouville density {md:.6g} at {format_point(S[i], P[i])}")

    lo_c, hi_c = boundary_contact(sys, P)
    blo, bhi = float(np.max(lo_c)), float(np.min(hi_c))
    if not blo < 0:
        j = int(np.argmax(lo_c))
        failures.append(f"lower window end not negative contact: {blo:.6g} "
                        f"at {format_point(sys.window[0], P[j])}")
    if not bhi > 0:
        j = int(np.argmin(hi_c))
        failures.append(f"upper window end not positive contact: {bhi:.6g} "
                        f"at {format_point(sys.window[1], P[j])}")

    return ValidationReport(md, (float(S[i]),) + tuple(float(v) for v in P[i]), (cp, cm),
                            min_slope, min_h, (blo, bhi), int(S.size), failures)
