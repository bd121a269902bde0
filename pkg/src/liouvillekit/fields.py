"""Scalar fields on R x M with analytic jets.

A field is a sympy expression in ``s``, the base coordinates ``q1, q2`` and the
roof coordinate ``theta`` (plus the symbol ``period`` for the roof length).  It is
compiled once per roof length into numpy callables for the value, the gradient and
the s-derivatives; the flow derivative is the gradient paired with the model's
velocity, so every model gets exact ``d_X`` without special cases.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy as sp

from .forms import Jet2

S, Q1, Q2, THETA, PERIOD = sp.symbols("s q1 q2 theta period", real=True)
BASE = (Q1, Q2, THETA)
ARGS = (S, Q1, Q2, THETA)

_ALIASES = {"u": Q1, "v": Q2, "x": Q1, "y": Q2, "s": S, "theta": THETA, "q1": Q1,
            "q2": Q2, "period": PERIOD, "pi": sp.pi, "e": sp.E}

FD_STEP = 1e-6
FD_STEP_SECOND = 1e-4


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class Field:
    """A named scalar field given by a sympy expression."""

    expr: sp.Expr
    label: str = ""

    # algebra -------------------------------------------------------------
    def _wrap(self, other):
        return other.expr if isinstance(other, Field) else sp.sympify(other)

    def __add__(self, other):
        return Field(self.expr + self._wrap(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.expr - self._wrap(other))

    def __rsub__(self, other):
        return Field(self._wrap(other) - self.expr)

    def __mul__(self, other):
        return Field(self.expr * self._wrap(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.expr / self._wrap(other))

    def __neg__(self):
        return Field(-self.expr)

    def exp(self) -> "Field":
        return Field(sp.exp(self.expr))

    def log(self) -> "Field":
        return Field(sp.log(self.expr))

    def subs_s(self, new_s) -> "Field":
        return Field(self.expr.subs(S, self._wrap(new_s)))

    @property
    def depends_on_s(self) -> bool:
        return S in self.expr.free_symbols

    @property
    def is_constant(self) -> bool:
        return not (self.expr.free_symbols - {PERIOD})

    # evaluation ----------------------------------------------------------
    def jet(self, model, s, points) -> Jet2:
        points = np.asarray(points, dtype=float)
        fns = _compile(self.expr, float(model.theta_period))
        s = np.asarray(s, dtype=float)
        shape = np.broadcast_shapes(s.shape, points.shape[:-1])
        q = [points[..., i] for i in range(3)]
        vel = model.velocity(points)

        def ev(fn):
            return np.broadcast_to(np.asarray(fn(s, *q), dtype=float), shape)

        value = ev(fns[0])
        d_X = sum(vel[..., i] * ev(fns[1][i]) for i in range(3))
        d_s = ev(fns[2])
        d_sX = sum(vel[..., i] * ev(fns[3][i]) for i in range(3))
        d_ss = ev(fns[4])
        return Jet2(*(_squeeze(v) for v in (value, d_X, d_s, d_sX, d_ss)))

    def value(self, model, s, points):
        return self.jet(model, s, points).value

    def to_spec(self) -> dict:
        return {"type": "expr", "params": {"expr": str(self.expr)}}


def _squeeze(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else np.array(v)


@lru_cache(maxsize=512)
def _compile(expr: sp.Expr, period: float):
    e = expr.subs(PERIOD, period)
    grad = [sp.diff(e, c) for c in BASE]
    e_s = sp.diff(e, S)
    grad_s = [sp.diff(e_s, c) for c in BASE]
    e_ss = sp.diff(e_s, S)

    def lam(x):
        return sp.lambdify(ARGS, x, modules="numpy")

    return (lam(e), tuple(lam(g) for g in grad), lam(e_s), tuple(lam(g) for g in grad_s),
            lam(e_ss))


class CallableField:
    """Field given by a plain callable ``fn(s, points)``; jets by central differences.

    First derivatives use step 1e-6 and second derivatives step 1e-4, so slots
    are accurate to roughly 1e-8 and 1e-7 respectively.
    """

    def __init__(self, fn: Callable, label: str = "callable"):
        self.fn = fn
        self.label = label

    @property
    def depends_on_s(self) -> bool:
        return True

    def jet(self, model, s, points) -> Jet2:
        points = np.asarray(points, dtype=float)
        s = np.asarray(s, dtype=float)
        h, k = FD_STEP, FD_STEP_SECOND
        fn = self.fn

        def along_X(ss, step):
            fwd = model.flow_step(points, step)
            bwd = model.flow_step(points, -step)
            return (fn(ss, fwd) - fn(ss, bwd)) / (2 * step)

        value = fn(s, points)
        d_s = (fn(s + h, points) - fn(s - h, points)) / (2 * h)
        d_ss = (fn(s + k, points) - 2 * value + fn(s - k, points)) / k**2
        d_X = along_X(s, h)
        d_sX = (along_X(s + k, k) - along_X(s - k, k)) / (2 * k)
        return Jet2(*(_squeeze(v) for v in (value, d_X, d_s, d_sX, d_ss)))


# library ---------------------------------------------------------------------

def const(c: float) -> Field:
    return Field(sp.Float(c) if not float(c).is_integer() else sp.Integer(int(c)), f"const({c})")


def cos_theta(c0: float = 1.0, a: float = 0.5, k: int = 1) -> Field:
    """``c0 + a cos(2 pi k theta / period)``."""
    return Field(sp.nsimplify(c0) + sp.nsimplify(a) * sp.cos(2 * sp.pi * k * THETA / PERIOD),
                 f"cos_theta({c0},{a},{k})")


def sin_theta(c0: float = 0.0, a: float = 1.0, k: int = 1) -> Field:
    return Field(sp.nsimplify(c0) + sp.nsimplify(a) * sp.sin(2 * sp.pi * k * THETA / PERIOD),
                 f"sin_theta({c0},{a},{k})")


def fibre() -> Field:
    return Field(S, "s")


def parse_expr(text: str) -> Field:
    try:
        expr = sp.sympify(text, locals=dict(_ALIASES))
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise FieldError(f"cannot parse field expression {text!r}: {exc}") from exc
    unknown = expr.free_symbols - set(ARGS) - {PERIOD}
    if unknown:
        raise FieldError(f"unknown symbols {sorted(map(str, unknown))} in {text!r}")
    return Field(expr, text)


_LIBRARY = {
    "const": lambda p: const(p.get("c", p.get("value", 1.0))),
    "cos_theta": lambda p: cos_theta(p.get("c0", 1.0), p.get("a", 0.5), p.get("k", 1)),
    "sin_theta": lambda p: sin_theta(p.get("c0", 0.0), p.get("a", 1.0), p.get("k", 1)),
    "expr": lambda p: parse_expr(p["expr"]),
}


def scalar_field_library() -> frozenset:
    return frozenset(_LIBRARY)


def field_from_spec(spec) -> Field:
    """Build a field from ``{"type": ..., "params": {...}}``, a number or an expression string."""
    if isinstance(spec, Field):
        return spec
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return const(float(spec))
    if isinstance(spec, str):
        return parse_expr(spec)
    if not isinstance(spec, dict) or "type" not in spec:
        raise FieldError(f"malformed field spec: {json.dumps(spec, default=str)}")
    kind = spec["type"]
    if kind not in _LIBRARY:
        raise FieldError(f"unknown field type {kind!r}; known: {sorted(_LIBRARY)}")
    try:
        return _LIBRARY[kind](dict(spec.get("params", {})))
    except KeyError as exc:
        raise FieldError(f"field spec {kind!r} is missing parameter {exc}") from exc
