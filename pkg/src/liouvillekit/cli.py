"""Command-line front end: ``liouvillekit <command> ...``.

Every command prints a JSON report on stdout.  Exit codes: 0 when all checks
pass, 1 when a check fails, 2 for malformed input or violated preconditions,
3 when an output path cannot be written.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import dynamics as dyn
from . import fields as flds
from . import kernels, regularity
from .da import DAParamError, DAParams, da_liouville_at_skeleton, da_report
from .lis import LISError, Sampling, liouville_density, validate
from .models import MODEL_NAMES, model_by_name
from .systems import (BUNDLED, CONTACT_DEFECTS, DUAL_PROVENANCE, DescriptorError,
                      bundled_model_name, bundled_system, load_descriptor)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
COMMANDS = ("verify", "skeleton", "flow", "da-check", "bunching", "persist", "suite")
THREADS_ENV = "LIOUVILLEKIT_THREADS"
DEFAULT_GRID = {"verify": 16, "skeleton": 32, "flow": 8, "da-check": 201, "bunching": 8,
                "persist": 32, "suite": 16}
MIN_GRID = 8
CSV_DIGITS = 15


class UsageError(Exception):
    """Bad input or violated precondition (exit 2)."""


class OutputError(Exception):
    """Output path cannot be written (exit 3)."""


@dataclass
class RunConfig:
    command: str
    descriptor: Optional[str] = None
    model: Optional[str] = None
    grid: Optional[int] = None
    tol: float = 1e-10
    seed: int = 0
    window: Optional[tuple] = None
    out: Optional[str] = None
    report: Optional[str] = None
    threads: int = 1
    options: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.grid is None:
            self.grid = DEFAULT_GRID[self.command]
        if self.grid < MIN_GRID:
            raise UsageError(f"--grid must be at least {MIN_GRID}, got {self.grid}")
        for name, value in [("tol", self.tol)] + [
                (k, v) for k, v in self.options.items() if k.endswith("tol")]:
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise UsageError(f"--{name} must be a positive number, got {value}")
        if self.threads < 1:
            raise UsageError(f"thread count must be at least 1, got {self.threads}")
        return self

    def identity(self) -> dict:
        """Fields that determine the numeric payload (output paths and threads excluded)."""
        ident = {"command": self.command, "descriptor": self.descriptor, "model": self.model,
                 "grid": self.grid, "tol": self.tol, "seed": self.seed,
                 "window": list(self.window) if self.window else None,
                 "options": self.options}
        if self.descriptor:
            try:
                ident["descriptor_sha256"] = hashlib.sha256(
                    Path(self.descriptor).read_bytes()).hexdigest()
            except OSError:
                pass
        return ident

    def config_hash(self) -> str:
        blob = json.dumps(_plain(self.identity()), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _plain(obj):
    """JSON-safe copy: numpy scalars and arrays unwrapped, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def check(name: str, ok, **info) -> dict:
    return {"name": name, "ok": bool(ok), **info}


def _rel_err(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def _where(points, i, s=None) -> dict:
    where = {"point": [float(v) for v in np.asarray(points)[i]]}
    if s is not None:
        where["s"] = float(np.asarray(s).reshape(-1)[i])
    return where


# csv -------------------------------------------------------------------------

def _fmt(v) -> str:
    v = float(v) + 0.0
    return f"{v:.{CSV_DIGITS}g}"


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def export_csv(path, header, rows) -> None:
    """Header plus one row per entry; empty input gives a header-only file."""
    _write_text(path, format_csv(header, rows))


def _check_writable(path) -> None:
    if path is None:
        return
    p = Path(path)
    if p.is_dir():
        raise OutputError(f"{path}: is a directory")
    parent = p.parent if str(p.parent) else Path(".")
    if not parent.is_dir():
        raise OutputError(f"{path}: directory {parent} does not exist")
    if not os.access(parent, os.W_OK) or (p.exists() and not os.access(p, os.W_OK)):
        raise OutputError(f"{path}: permission denied")


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OutputError(f"{path}: {exc.strerror or exc}") from exc


# commands --------------------------------------------------------------------

def _system(cfg: RunConfig):
    if not cfg.descriptor:
        raise UsageError(f"{cfg.command} needs a descriptor path")
    return load_descriptor(cfg.descriptor, cfg.window)


def cmd_verify(cfg: RunConfig):
    system = _system(cfg)
    rep = validate(system, Sampling(cfg.grid, cfg.grid, cfg.options.get("n_random", 1000),
                                    cfg.seed))
    payload = rep.to_dict()
    payload["window"] = list(system.window)
    checks = [check("invariants", rep.ok, failures=rep.failures)]
    return checks, payload, None


def _skeleton_table(system, grid_n):
    pts = system.model.base_grid(grid_n)
    graph = dyn.skeleton_graph(system, pts)
    return graph, graph.rows()


def cmd_skeleton(cfg: RunConfig):
    system = _system(cfg)
    header = list(system.model.coord_names) + ["s_star", "residual", "normal_expansion"]
    try:
        graph, rows = _skeleton_table(system, cfg.grid)
    except LISError as exc:
        return [check("skeleton", False, error=str(exc))], {}, (header, [])
    i_res = int(np.argmax(graph.residual))
    i_ne = int(np.argmin(graph.normal_expansion))
    checks = [
        check("residual", graph.residual[i_res] <= cfg.tol, max=graph.residual[i_res],
              **_where(graph.points, i_res, graph.s)),
        check("normal_expansion_positive", graph.normal_expansion[i_ne] > 0,
              min=graph.normal_expansion[i_ne], **_where(graph.points, i_ne, graph.s)),
    ]
    payload = {"n_points": len(rows), "s_min": float(np.min(graph.s)),
               "s_max": float(np.max(graph.s)), "residual_max": graph.residual[i_res],
               "normal_expansion_min": graph.normal_expansion[i_ne]}
    return checks, payload, (header, rows)


def _parse_floats(text: str, what: str, count: Optional[int] = None) -> list:
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise UsageError(f"{what}: expected {count} numbers, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{what}: non-finite value in {text!r}")
    return vals


def cmd_flow(cfg: RunConfig):
    system = _system(cfg)
    starts = cfg.options.get("start") or []
    if not starts:
        raise UsageError("flow needs at least one --start s,q1,q2,theta")
    vals = np.array([_parse_floats(s, "--start", 4) for s in starts])
    a, b = system.window
    if np.any((vals[:, 0] <= a) | (vals[:, 0] >= b)):
        raise UsageError(f"start s outside the window {system.window}")
    dt = cfg.options.get("dt", 1e-2)
    if not 0 < abs(dt) <= 1e-2:
        raise UsageError(f"|dt| must be in (0, 0.01], got {dt}")
    T = cfg.options.get("T", 1.0)
    try:
        traj = dyn.integrate_Y(system, vals[:, 0], vals[:, 1:], T, dt)
    except LISError as exc:
        return [check("integration", False, error=str(exc))], {}, None
    header = ["orbit", "t", "s"] + list(system.model.coord_names)
    rows = [[k, t, s[k], *p[k]] for k in range(len(vals))
            for t, s, p in zip(traj.t, traj.s, traj.points)]
    exited = np.flatnonzero(traj.exited)
    checks = [check("inside_window", len(exited) == 0,
                    exited=[{"orbit": int(k), "time": float(traj.exit_time[k])}
                            for k in exited])]
    payload = {"n_orbits": len(vals), "steps": len(traj.t) - 1, "T": T, "dt": dt,
               "final_s": traj.s[-1], "final_points": traj.points[-1]}
    return checks, payload, (header, rows)


def _da_params(opts: dict) -> DAParams:
    keys = ("mu", "nu", "nubar", "eta", "T")
    return DAParams(**{k: opts[k] for k in keys if opts.get(k) is not None}).validate()


def cmd_da_check(cfg: RunConfig):
    p = _da_params(cfg.options)
    rep = da_report(p, cfg.grid)
    payload = rep.to_dict()
    payload["params"] = asdict(p)
    payload["expected_min_plus"] = p.mu - p.nubar
    payload["non_anosov_certificate"] = bool(p.nubar > 0 and rep.reversed_min <= 0)
    checks = [
        check("bicontact", rep.bicontact, min_plus=rep.min_contact_plus,
              at=rep.argmin, max_minus=rep.min_contact_minus, at_minus=rep.argmax_minus),
        check("liouville_at_skeleton", abs(rep.liouville_at_zero - 4 * p.mu)
              <= cfg.tol * 4 * p.mu, value=rep.liouville_at_zero, expected=4 * p.mu),
    ]
    return checks, payload, None


def cmd_bunching(cfg: RunConfig):
    name = cfg.model
    if name not in MODEL_NAMES:
        raise UsageError(f"unknown model {name!r}; known: {', '.join(MODEL_NAMES)}")
    if name == "da-chart":
        model = model_by_name(name, **asdict(_da_params(cfg.options)))
    else:
        model = model_by_name(name)
    opts = cfg.options
    rep = regularity.bunching_estimate(model, opts.get("tmax", 64.0), opts.get("orbits", 64),
                                       cfg.seed, opts.get("dt", 1e-2), cfg.threads)
    payload = rep.to_dict()
    payload["model"] = name
    return [check("bunching_positive", rep.B_s > 0, B_s=rep.B_s)], payload, None


def _perturbation(text: str):
    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--perturb: invalid JSON ({exc})") from exc
    return text


def cmd_persist(cfg: RunConfig):
    system = _system(cfg)
    eps_list = _parse_floats(cfg.options.get("eps_list", "1e-2,1e-3,1e-4"), "--eps-list")
    if not eps_list or not all(e > 0 for e in eps_list):
        raise UsageError("--eps-list needs positive values")
    pert = _perturbation(cfg.options.get("perturb", "cos(2*pi*theta)"))
    try:
        reports = regularity.skeleton_persistence(system, pert, eps_list, cfg.grid)
    except regularity.PersistenceError as exc:
        return [check("perturbed_liouville", False, error=str(exc))], {}, None
    payload = {"perturbation": pert, "sweep": [r.to_dict() for r in reports]}
    checks = [check("finite", all(math.isfinite(r.ratio) for r in reports))]
    expect = cfg.options.get("expect_ratio")
    if expect is not None:
        rtol = cfg.options.get("rtol", 1e-2)
        worst = max(reports, key=lambda r: abs(r.ratio - expect))
        checks.append(check("linear_response", abs(worst.ratio - expect) <= rtol * abs(expect),
                            expected=expect, eps=worst.eps, ratio=worst.ratio))
    return checks, payload, None


# suite -----------------------------------------------------------------------

def _suite_system_checks(name: str, cfg: RunConfig) -> list:
    system = bundled_system(name)
    model = system.model
    rng = np.random.default_rng(cfg.seed)
    a, b = system.window
    s = a + (b - a) * rng.random(1000)
    x = model.sample_points(rng, 1000)
    grid = model.base_grid(cfg.grid)
    out = []

    if name in DUAL_PROVENANCE or system.closed_form_kind is not None:
        cf = dyn.liouville_field(system, s, x, provenance="closed_form")
        ls = dyn.liouville_field(system, s, x, provenance="linear_solve")
        err = max(_rel_err(getattr(cf, k), getattr(ls, k))
                  for k in ("f", "g", "g_over_f", "d_s_g_over_f"))
        out.append(check("dual_provenance", err <= 1e-9, max_rel=err))

    if system.closed_form_kind == "linear_symmetric":
        dens = liouville_density(system, s, x)
        expected = 4 * model.r_u
        out.append(check("linear_density", _rel_err(dens, expected) <= 1e-9,
                         max_rel=_rel_err(dens, expected), expected=expected))

    s_star = np.asarray(dyn.skeleton_solve(system, grid))
    res = dyn.skeleton_residual(system, s_star, grid)
    out.append(check("skeleton_residual", np.max(res) <= cfg.tol, max=np.max(res)))

    f, inv_rate = dyn.sync_check(system, grid, s_star)
    out.append(check("synchronisation", _rel_err(f, inv_rate) <= 1e-9,
                     max_rel=_rel_err(f, inv_rate)))

    ne = np.asarray(dyn.normal_expansion(system, grid, s_star))
    fd = np.asarray(dyn.normal_expansion_fd(system, grid, s_star))
    out.append(check("normal_expansion_fd", _rel_err(fd, ne) <= 1e-6, max_rel=_rel_err(fd, ne)))
    if not model.has_coupling and name.startswith("exp-symmetric"):
        delta = model.r_u - model.r_s
        out.append(check("normal_expansion_constant", _rel_err(ne, delta) <= 1e-12,
                         max_rel=_rel_err(ne, delta), expected=delta))

    rep = validate(system, Sampling(8, 8, 200, cfg.seed))
    i = int(np.argmin(ne))
    if name in CONTACT_DEFECTS:
        # the pair is known to fail bi-contactness; the check is that this is detected
        out.append(check("contact_defect_detected", not rep.ok, failures=rep.failures,
                         normal_expansion_min=ne[i], **_where(grid, i, s_star)))
    else:
        out.append(check("invariants", rep.ok, failures=rep.failures))
        out.append(check("normal_expansion_positive", ne[i] > 0, min=ne[i],
                         **_where(grid, i, s_star)))
    return [dict(c, system=name) for c in out]


def _suite_model_checks(model_name: str, cfg: RunConfig) -> list:
    out = []
    if model_name == "cat":
        rep = regularity.bunching_estimate(model_by_name("cat"), 16.0, 16, cfg.seed,
                                           threads=cfg.threads)
        out.append(check("bunching_cat", abs(rep.B_s - 2.0) <= 1e-12, B_s=rep.B_s))
    if model_name == "da-chart":
        mx, i, j, count = kernels.a_poly_grid(2001, 1e-12)
        out.append(check("a_polynomial_max", abs(mx - 1) <= 1e-12 and count == 1
                         and (i, j) == (1000, 1000), max=mx, count=count))
        for frac in (0.25, 0.5, 0.75):
            p = DAParams(nubar=frac).validate()
            rep = da_report(p, 201)
            expected = (p.mu - p.nu) + (p.nu - p.nubar)
            out.append(check(f"da_min_plus_{frac}", rep.bicontact and
                             abs(rep.min_contact_plus - expected) <= 1e-9,
                             value=rep.min_contact_plus, expected=expected))
            out.append(check(f"da_reversed_{frac}", rep.reversed_min <= 0,
                             value=rep.reversed_min))
        p = DAParams().validate()
        lv = da_liouville_at_skeleton(p, 21)
        out.append(check("da_liouville_4mu", abs(lv - 4 * p.mu) <= 1e-10, value=lv))
        brep = regularity.bunching_estimate(model_by_name("da-chart"), 16.0, 16, cfg.seed,
                                            threads=cfg.threads)
        out.append(check("bunching_da", brep.B_s <= 0.5 + 1e-9, B_s=brep.B_s))
    return [dict(c, model=model_name) for c in out]


def cmd_suite(cfg: RunConfig):
    wanted = cfg.model or "all"
    if wanted != "all" and wanted not in MODEL_NAMES:
        raise UsageError(f"unknown model {wanted!r}; known: all, {', '.join(MODEL_NAMES)}")
    models = MODEL_NAMES if wanted == "all" else (wanted,)
    checks = []
    for name in BUNDLED:
        if bundled_model_name(name) in models:
            checks.extend(_suite_system_checks(name, cfg))
    for m in models:
        checks.extend(_suite_model_checks(m, cfg))
    payload = {"models": list(models), "n_checks": len(checks),
               "n_failed": sum(not c["ok"] for c in checks)}
    return checks, payload, None


HANDLERS = {"verify": cmd_verify, "skeleton": cmd_skeleton, "flow": cmd_flow,
            "da-check": cmd_da_check, "bunching": cmd_bunching, "persist": cmd_persist,
            "suite": cmd_suite}


def run(cfg: RunConfig):
    """Execute ``cfg``; returns ``(exit code, report dict, csv table or None)``."""
    cfg.validate()
    _check_writable(cfg.out)
    _check_writable(cfg.report)
    start = time.perf_counter()
    checks, payload, table = HANDLERS[cfg.command](cfg)
    ok = all(c["ok"] for c in checks)
    report = {
        "command": cfg.command,
        "config": cfg.identity(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "backend": kernels.BACKEND,
        "ok": ok,
        "checks": checks,
        "payload": payload,
        "wall_time": time.perf_counter() - start,
    }
    return (EXIT_OK if ok else EXIT_CHECK), _plain(report), table


# argument parsing ---------------------------------------------------------------

def _window(text: str):
    vals = _parse_floats(text, "--window", 2)
    if not vals[0] < vals[1]:
        raise argparse.ArgumentTypeError(f"need a < b, got {text}")
    return tuple(vals)


def _window_arg(text: str):
    try:
        return _window(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--grid", type=int, help="grid size per axis (at least 8)")
    common.add_argument("--tol", type=float, default=1e-10, help="check tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (CSV for skeleton/flow, JSON otherwise)")
    common.add_argument("--report", help="also write the JSON report here")
    common.add_argument("--window", type=_window_arg,
                        help="override the s-window, e.g. --window=-2,2")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default from ${THREADS_ENV} or 1)")

    parser = _Parser(prog="liouvillekit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", parents=[common], help="validate a system descriptor")
    p.add_argument("descriptor")
    p.add_argument("--n-random", type=int, default=1000)

    p = sub.add_parser("skeleton", parents=[common], help="skeleton graph on the base grid")
    p.add_argument("descriptor")

    p = sub.add_parser("flow", parents=[common], help="integrate the Liouville field")
    p.add_argument("descriptor")
    p.add_argument("--start", action="append", help="s,q1,q2,theta (repeatable)")
    p.add_argument("--T", type=float, default=1.0, help="duration; negative runs backward")
    p.add_argument("--dt", type=float, default=1e-2)

    p = sub.add_parser("da-check", parents=[common], help="DA deformation report")
    p.add_argument("--mu", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--nubar", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--period", dest="T", type=float)

    p = sub.add_parser("bunching", parents=[common], help="bunching constant estimate")
    p.add_argument("model")
    p.add_argument("--tmax", type=float, default=64.0)
    p.add_argument("--orbits", type=int, default=64)
    p.add_argument("--dt", type=float, default=1e-2)
    for k in ("mu", "nu", "nubar", "eta"):
        p.add_argument(f"--{k}", type=float)
    p.add_argument("--period", dest="T", type=float)

    p = sub.add_parser("persist", parents=[common], help="skeleton response to perturbing h_s")
    p.add_argument("descriptor")
    p.add_argument("--perturb", default="cos(2*pi*theta)",
                   help="field expression or JSON field spec")
    p.add_argument("--eps-list", default="1e-2,1e-3,1e-4")
    p.add_argument("--expect-ratio", type=float)
    p.add_argument("--rtol", type=float, default=1e-2)

    p = sub.add_parser("suite", parents=[common], help="run the bundled identity checks")
    p.add_argument("--model", default="all")
    return parser


COMMON_KEYS = {"command", "descriptor", "model", "grid", "tol", "seed", "out", "report",
               "window", "threads"}


_NEGATIVE_LIST = re.compile(r"^-\.?\d")


def _join_negative_values(argv: list) -> list:
    """``--window -2,2`` becomes ``--window=-2,2``; argparse would read -2,2 as a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NEGATIVE_LIST.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def config_from_args(argv) -> RunConfig:
    argv = list(argv)
    if argv[:2] == ["lis", "verify"]:
        argv = argv[1:]
    argv = _join_negative_values(argv)
    ns = vars(build_parser().parse_args(argv))
    opts = {k: v for k, v in ns.items() if k not in COMMON_KEYS and v is not None}
    if ns["command"] == "bunching":
        if not opts["tmax"] >= 1:
            raise UsageError("--tmax must be at least 1")
        if opts["orbits"] < 1:
            raise UsageError("--orbits must be at least 1")
    return RunConfig(command=ns["command"], descriptor=ns.get("descriptor"),
                     model=ns.get("model"), grid=ns["grid"], tol=ns["tol"], seed=ns["seed"],
                     window=ns["window"], out=ns["out"], report=ns["report"],
                     threads=ns["threads"] or _default_threads(), options=opts)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
        code, report, table = run(cfg)
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
        if table is not None and cfg.out:
            export_csv(cfg.out, *table)
        elif cfg.out:
            _write_text(cfg.out, text)
        if cfg.report:
            _write_text(cfg.report, text)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DescriptorError, DAParamError, flds.FieldError, LISError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(text)
    for c in report["checks"]:
        if not c["ok"]:
            print(f"FAILED {c['name']}: {json.dumps({k: v for k, v in c.items() if k != 'ok'})}",
                  file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
