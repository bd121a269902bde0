"""JSON descriptors and the bundled example systems."""
from __future__ import annotations

import json
from pathlib import Path

from . import fields as flds
from .da import DAParams
from .lis import LIS, LISError, make_system
from .models import MODEL_NAMES, model_by_name


class DescriptorError(ValueError):
    pass


def model_from_spec(spec):
    if isinstance(spec, str):
        name, params = spec, {}
    elif isinstance(spec, dict) and "name" in spec:
        name, params = spec["name"], dict(spec.get("params", {}))
    else:
        raise DescriptorError(f"malformed model spec {spec!r}")
    if name not in MODEL_NAMES:
        raise DescriptorError(f"unknown model {name!r}; known: {', '.join(MODEL_NAMES)}")
    try:
        return model_by_name(name, **params)
    except TypeError as exc:
        raise DescriptorError(f"bad parameters for model {name!r}: {exc}") from exc


def system_from_descriptor(desc: dict, window=None) -> LIS:
    """Build a system from ``{model, gauge, h_u, h_s, profile: {kind, params}, window}``."""
    if not isinstance(desc, dict):
        raise DescriptorError("descriptor must be a JSON object")
    missing = [k for k in ("model", "profile") if k not in desc]
    if missing:
        raise DescriptorError(f"descriptor is missing {missing}")
    profile = desc["profile"]
    if isinstance(profile, str):
        profile = {"kind": profile}
    if not isinstance(profile, dict) or "kind" not in profile:
        raise DescriptorError("profile must be an object with a 'kind'")
    params = profile.get("params", {}) or {}
    win = window if window is not None else desc.get("window")
    if win is not None and (len(win) != 2 or not float(win[0]) < float(win[1])):
        raise DescriptorError(f"window must be [a, b] with a < b, got {win}")
    try:
        return make_system(
            model_from_spec(desc["model"]),
            gauge=desc.get("gauge", "symmetric"),
            profile=profile["kind"],
            h_u=desc.get("h_u"),
            h_s=desc.get("h_s"),
            h_plus=desc.get("h_plus"),
            window=tuple(map(float, win)) if win is not None else None,
            sigma=params.get("sigma"),
            w=params.get("w"),
        )
    except (flds.FieldError, LISError, KeyError) as exc:
        raise DescriptorError(str(exc)) from exc


def load_descriptor(path, window=None) -> LIS:
    try:
        desc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise DescriptorError(f"{path}: {exc.strerror}") from exc
    return system_from_descriptor(desc, window)


COS_HALF = {"type": "cos_theta", "params": {"c0": 1.0, "a": 0.5}}
COS_QUARTER = {"type": "cos_theta", "params": {"c0": 1.0, "a": 0.25}}

BUNDLED = {
    "exp-symmetric-cat": {"model": "cat", "gauge": "symmetric",
                          "profile": {"kind": "exponential"}, "window": [-5, 5]},
    # amplitude 0.5 breaks negative contactness of alpha_minus on part of the circle;
    # the window keeps only the range where the Liouville condition still holds
    "exp-cos-cat": {"model": "cat", "gauge": "exponential_decomposed", "h_u": 1.0,
                    "h_s": COS_HALF, "profile": {"kind": "exponential"}, "window": [-0.4, 5]},
    "exp-cos-quarter-cat": {"model": "cat", "gauge": "exponential_decomposed", "h_u": 1.0,
                            "h_s": COS_QUARTER, "profile": {"kind": "exponential"},
                            "window": [-5, 5]},
    "linear-symmetric-cat": {"model": "cat", "gauge": "symmetric",
                             "profile": {"kind": "linear"}, "window": [-1, 1]},
    "general-cat": {
        "model": "cat", "gauge": "exponential_decomposed", "h_u": 1.0, "h_s": COS_QUARTER,
        "profile": {"kind": "general", "params": {
            "sigma": {"type": "expr", "params": {"expr": "s + sin(s)/5"}},
            "w": {"type": "expr", "params": {"expr": "sin(2*pi*theta)*tanh(s)/10"}}}},
        "window": [-3, 3]},
    "exp-symmetric-geodesic": {"model": "geodesic-local", "gauge": "symmetric",
                               "profile": {"kind": "exponential"}, "window": [-5, 5]},
    "fibration-cat": {"model": "cat", "gauge": "fibration",
                      "h_plus": {"type": "cos_theta", "params": {"c0": 1.0, "a": 0.2}},
                      "profile": {"kind": "exponential"}, "window": [-5, 5]},
    "exp-symmetric-da": {"model": {"name": "da-chart", "params": {}}, "gauge": "symmetric",
                         "profile": {"kind": "exponential"}, "window": [-5, 5]},
}

# bundled systems whose pair is known not to be bi-contact everywhere
CONTACT_DEFECTS = ("exp-cos-cat",)

DUAL_PROVENANCE = ("exp-symmetric-cat", "exp-cos-cat", "linear-symmetric-cat", "general-cat",
                   "exp-symmetric-geodesic")


def bundled_system(name: str, **da_params) -> LIS:
    if name not in BUNDLED:
        raise DescriptorError(f"unknown bundled system {name!r}; known: {sorted(BUNDLED)}")
    desc = json.loads(json.dumps(BUNDLED[name]))
    if da_params and isinstance(desc["model"], dict):
        DAParams(**da_params).validate()
        desc["model"]["params"] = da_params
    return system_from_descriptor(desc)


def bundled_model_name(name: str) -> str:
    model = BUNDLED[name]["model"]
    return model if isinstance(model, str) else model["name"]


def bundled_systems() -> dict:
    return {name: bundled_system(name) for name in BUNDLED}
