"""Reduced exterior calculus for 1-forms that annihilate the plane <X, d/ds>.

Such a form is ``E * alpha_u + F * alpha_s`` where ``(alpha_u, alpha_s)`` is the
coframe dual to the stable/unstable directions.  The coefficients are carried as
second order jets so that Lie derivatives along ``X`` and ``d/ds`` reduce to
slot bookkeeping.

All arithmetic broadcasts over numpy arrays, so a single :class:`Jet2` can hold a
whole grid of sample points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

Number = Union[float, np.ndarray]

_SLOTS = ("value", "d_X", "d_s", "d_sX", "d_ss")


@dataclass(frozen=True)
class Jet2:
    """Value of a scalar on R x M together with the derivatives the toolkit needs.

    ``d_X`` is the derivative along the flow, ``d_s`` along the fibre,
    ``d_sX`` is ``d_s`` of ``d_X`` and ``d_ss`` the second fibre derivative.
    Slots that cannot be produced from the available data are NaN.
    """

    value: Number
    d_X: Number = 0.0
    d_s: Number = 0.0
    d_sX: Number = 0.0
    d_ss: Number = 0.0

    @classmethod
    def const(cls, c: Number) -> "Jet2":
        return cls(c, 0.0, 0.0, 0.0, 0.0)

    @classmethod
    def fibre(cls, s: Number) -> "Jet2":
        """The coordinate function ``s`` itself."""
        return cls(s, 0.0, 1.0, 0.0, 0.0)

    def slots(self) -> tuple:
        return tuple(getattr(self, k) for k in _SLOTS)

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(v))) for v in self.slots())

    def map_slots(self, fn: Callable[[Number], Number]) -> "Jet2":
        return Jet2(*(fn(v) for v in self.slots()))

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = as_jet(other)
        return Jet2(*(a + b for a, b in zip(self.slots(), o.slots())))

    __radd__ = __add__

    def __neg__(self):
        return self.map_slots(lambda v: -v)

    def __sub__(self, other):
        return self + (-as_jet(other))

    def __rsub__(self, other):
        return as_jet(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            return self.map_slots(lambda v: v * other)
        a, b = self, other
        return Jet2(
            a.value * b.value,
            a.d_X * b.value + a.value * b.d_X,
            a.d_s * b.value + a.value * b.d_s,
            a.d_sX * b.value + a.d_s * b.d_X + a.d_X * b.d_s + a.value * b.d_sX,
            a.d_ss * b.value + 2.0 * a.d_s * b.d_s + a.value * b.d_ss,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet2):
            return self.map_slots(lambda v: v / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return as_jet(other) * self.reciprocal()

    def compose(self, g0: Number, g1: Number, g2: Number) -> "Jet2":
        """Chain rule for ``g(self)`` given ``g``, ``g'`` and ``g''`` at the value."""
        return Jet2(
            g0,
            g1 * self.d_X,
            g1 * self.d_s,
            g2 * self.d_s * self.d_X + g1 * self.d_sX,
            g2 * self.d_s * self.d_s + g1 * self.d_ss,
        )

    def reciprocal(self) -> "Jet2":
        v = self.value
        return self.compose(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def exp(self) -> "Jet2":
        e = np.exp(self.value)
        return self.compose(e, e, e)

    def log(self) -> "Jet2":
        v = self.value
        return self.compose(np.log(v), 1.0 / v, -1.0 / v**2)

    def sqrt(self) -> "Jet2":
        r = np.sqrt(self.value)
        return self.compose(r, 0.5 / r, -0.25 / (r * self.value))


def as_jet(x) -> Jet2:
    return x if isinstance(x, Jet2) else Jet2.const(x)


@dataclass(frozen=True)
class AnnihilatorForm:
    """``E * alpha_u + F * alpha_s``; vanishes on X and d/ds by construction."""

    E: Jet2
    F: Jet2

    def __add__(self, other: "AnnihilatorForm") -> "AnnihilatorForm":
        return AnnihilatorForm(self.E + other.E, self.F + other.F)

    def scale(self, c) -> "AnnihilatorForm":
        return AnnihilatorForm(self.E * c, self.F * c)

    def values(self) -> tuple:
        return self.E.value, self.F.value


@dataclass(frozen=True)
class Area2:
    """Multiple of the oriented area element ``alpha_s ^ alpha_u``."""

    coeff: Number


_NAN = float("nan")


def lie_X(form: AnnihilatorForm, r_u: Number, r_s: Number,
          coupling: Number = 0.0) -> AnnihilatorForm:
    """Lie derivative along the flow.

    Uses ``L_X alpha_u = r_u alpha_u`` and
    ``L_X alpha_s = r_s alpha_s + coupling * alpha_u``.  The coupling term is zero
    when ``alpha_s`` annihilates an invariant plane; it is needed for charts where
    only one of the two coframe forms is invariant.  Only the value and ``d_s``
    slots of the result are available; the rest would need ``X.X`` data and are NaN.
    """
    E, F = form.E, form.F
    new_E = Jet2(E.d_X + r_u * E.value + coupling * F.value, _NAN,
                 E.d_sX + r_u * E.d_s + coupling * F.d_s, _NAN, _NAN)
    new_F = Jet2(F.d_X + r_s * F.value, _NAN, F.d_sX + r_s * F.d_s, _NAN, _NAN)
    return AnnihilatorForm(new_E, new_F)


def lie_s(form: AnnihilatorForm) -> AnnihilatorForm:
    """Lie derivative along the fibre: differentiate both coefficients in s."""

    def ds(j: Jet2) -> Jet2:
        return Jet2(j.d_s, j.d_sX, j.d_ss, _NAN, _NAN)

    return AnnihilatorForm(ds(form.E), ds(form.F))


def wedge(a: AnnihilatorForm, b: AnnihilatorForm) -> Area2:
    return Area2(a.F.value * b.E.value - a.E.value * b.F.value)


def contact_coefficient(form: AnnihilatorForm, r_u: Number, r_s: Number,
                        coupling: Number = 0.0) -> Number:
    """Coefficient of ``alpha ^ d alpha`` against the volume form, for a form on M.

    Only the value and ``d_X`` slots of ``form`` are used.
    """
    E, F = form.E, form.F
    return (E.value * (F.d_X + r_s * F.value)
            - F.value * (E.d_X + r_u * E.value + coupling * F.value))
