"""
Configuration dialect, schema and model-hypothesis checks.

The dialect is INI-style ``key = value`` with ``[section]`` headers; a key
is addressed by its dotted path ``section.key``.  Initial data are numpy
expressions in the cell coordinates ``x`` (and ``y``) with ``Lx``/``Ly``
the box lengths, e.g. ``1 + 0.5*cos(pi*x/Lx)``.
"""

from __future__ import annotations

import ast
import configparser
import hashlib
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

import numpy as np

from .grid import Grid
from .physics import LAWS, DiffusivitySpec, Sensitivities
from .solver import SolverConfig, State


class ConfigError(ValueError):
    """Configuration problem carrying one of the error codes below."""

    def __init__(self, code: str, message: str, line: Optional[int] = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{code}: {message}{where}")
        self.code = code
        self.line = line


E_SYNTAX = "E_SYNTAX"
E_UNKNOWN_KEY = "E_UNKNOWN_KEY"
E_HYPOTHESIS = "E_HYPOTHESIS"
E_VALUE = "E_VALUE"


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple:
    return tuple(float(p) for p in text.replace(",", " ").split())


def _ints(text: str) -> tuple:
    return tuple(int(p) for p in text.replace(",", " ").split())


_EXPR_FUNCS = {
    "cos": np.cos, "sin": np.sin, "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs,
    "tanh": np.tanh, "cosh": np.cosh, "log": np.log, "where": np.where,
    "maximum": np.maximum, "minimum": np.minimum, "heaviside": np.heaviside,
}
_EXPR_NAMES = set(_EXPR_FUNCS) | {"x", "y", "Lx", "Ly", "pi", "e"}


def _expr(text: str) -> str:
    text = text.strip()
    tree = ast.parse(text, mode="eval")
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and node.id not in _EXPR_NAMES:
            raise ValueError(f"unknown name {node.id!r} in expression")
        if isinstance(node, (ast.Attribute, ast.Lambda, ast.Subscript)):
            raise ValueError("attributes, subscripts and lambdas are not allowed")
    return text


def _law(text: str) -> str:
    t = text.strip()
    if t not in LAWS:
        raise ValueError(f"expected one of {LAWS}")
    return t


def _str(text: str) -> str:
    return text.strip()


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: str
    doc: str = ""


SCHEMA: dict[str, Key] = {
    "grid.dim": Key(int, "1", "space dimension (1 or 2)"),
    "grid.cells": Key(_ints, "128", "cells per axis; one value is reused for every axis"),
    "grid.length": Key(_floats, "16.0", "box length per axis"),
    "model.chi": Key(float, "1.0", "chemotactic sensitivity"),
    "model.xi": Key(float, "1.0", "haptotactic sensitivity"),
    "model.mu": Key(float, "0.5", "logistic rate"),
    "model.lambda0": Key(float, "1.0", "maximal-regularity constant (not computable; user input)"),
    "diffusivity.law": Key(_law, "power", "power | power_regularized"),
    "diffusivity.m": Key(float, "2.0", "diffusion exponent"),
    "diffusivity.c_d": Key(float, "1.0", "diffusion prefactor"),
    "diffusivity.epsilon": Key(float, "0.0", "regularization added by power_regularized"),
    "initial.u0": Key(_expr, "1 + 0.5*cos(pi*x/Lx)", "cell density"),
    "initial.v0": Key(_expr, "0", "signal concentration"),
    "initial.w0": Key(_expr, "1", "tissue density"),
    "solver.t_end": Key(float, "10.0"),
    "solver.cfl_safety": Key(float, "0.4"),
    "solver.dt_max": Key(float, "0.01"),
    "solver.dt_min": Key(float, "1e-10"),
    "solver.output_every": Key(float, "1.0"),
    "solver.blowup_u_max": Key(float, "1000000.0"),
    "solver.freeze_v": Key(_bool, "false", "hold v fixed (exact-w checks)"),
    "diagnostics.k_exponents": Key(_floats, "2, 4, 8"),
    "diagnostics.beta": Key(_floats, "1, 2"),
    "run.id": Key(_str, "run"),
    "run.seed": Key(int, "0"),
    "run.deterministic": Key(_bool, "false"),
    "run.snapshots": Key(_bool, "true"),
    "run.plots": Key(_bool, "false"),
    "sweep.parallel": Key(int, "0", "worker processes; 0 means one per core"),
    "sweep.t_end": Key(float, "0", "per-run horizon; 0 keeps solver.t_end"),
    "sweep.envelope": Key(float, "10.0", "bounded iff sup |u|_inf <= envelope * max(1, |u0|_inf)"),
}
SWEEP_AXIS_PREFIX = "sweep.axis."

DEFAULTS = {k: spec.parse(spec.default) for k, spec in SCHEMA.items()}


def _coerce(key: str, raw: str, line: Optional[int] = None):
    if key.startswith(SWEEP_AXIS_PREFIX):
        target = key[len(SWEEP_AXIS_PREFIX):]
        if target not in SCHEMA or target.startswith("sweep."):
            raise ConfigError(E_UNKNOWN_KEY, f"sweep axis targets unknown key {target!r}", line)
        parts = [p for p in raw.split(",") if p.strip()]
        if not parts:
            raise ConfigError(E_SYNTAX, f"sweep axis {target!r} has no values", line)
        try:
            return tuple(SCHEMA[target].parse(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(E_SYNTAX, f"bad value for {key}: {exc}", line) from None
    if key not in SCHEMA:
        raise ConfigError(E_UNKNOWN_KEY, f"unknown key {key!r}", line)
    try:
        return SCHEMA[key].parse(raw)
    except (ValueError, SyntaxError) as exc:
        raise ConfigError(E_SYNTAX, f"bad value for {key}: {exc}", line) from None


def _key_lines(text: str) -> dict:
    """Map dotted keys to their 1-based line number for error reporting."""
    lines, section = {}, None
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
        elif "=" in s and section and not s.startswith(("#", ";")):
            lines[f"{section}.{s.split('=', 1)[0].strip().lower()}"] = i
    return lines


def parse_config(text: str, overrides: Iterable[str] = (), check: bool = True) -> dict:
    """Parse and validate configuration text; returns the resolved key -> value map.

    ``overrides`` are ``key=value`` strings applied after the file.  With
    ``check`` the model hypotheses are verified (E_HYPOTHESIS on failure).
    """
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                   inline_comment_prefixes=("#",), strict=True)
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(E_SYNTAX, "key outside of a [section]", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(E_SYNTAX, f"duplicate section {exc.section!r}", exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(E_SYNTAX, f"duplicate key {exc.section}.{exc.option}", exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError(E_SYNTAX, "malformed line", line) from None

    lines = _key_lines(text)
    resolved = dict(DEFAULTS)
    for section in cp.sections():
        for opt, raw in cp.items(section):
            key = f"{section}.{opt}"
            resolved[key] = _coerce(key, raw, lines.get(key))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(E_SYNTAX, f"override {item!r} is not key=value")
        key, raw = (p.strip() for p in item.split("=", 1))
        resolved[key] = _coerce(key, raw)
    validate(resolved, check_hypotheses=check)
    return resolved


def load_config(path, overrides: Iterable[str] = (), check: bool = True) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides, check)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def serialize_config(resolved: dict) -> str:
    """Canonical text form: sections and keys sorted, every default materialized."""
    sections: dict[str, list] = {}
    for key in sorted(resolved):
        section, name = key.split(".", 1)
        sections.setdefault(section, []).append((name, resolved[key]))
    out = []
    for section in sorted(sections):
        out.append(f"[{section}]")
        out.extend(f"{name} = {_fmt(val)}" for name, val in sections[section])
        out.append("")
    return "\n".join(out)


def config_hash(resolved: dict) -> str:
    return hashlib.sha256(serialize_config(resolved).encode("utf-8")).hexdigest()


def sweep_axes(resolved: dict) -> list:
    return [(k[len(SWEEP_AXIS_PREFIX):], v) for k, v in sorted(resolved.items())
            if k.startswith(SWEEP_AXIS_PREFIX)]


def make_grid(resolved: dict) -> Grid:
    dim = resolved["grid.dim"]
    cells = resolved["grid.cells"]
    lengths = resolved["grid.length"]
    if len(cells) == 1:
        cells = cells * dim
    if len(lengths) == 1:
        lengths = lengths * dim
    return Grid(cells, lengths)


def eval_expression(expr: str, grid: Grid, coords: Optional[tuple] = None) -> np.ndarray:
    if coords is None:
        coords = grid.centers()
    ns = dict(_EXPR_FUNCS, pi=math.pi, e=math.e, Lx=grid.lengths[0],
              Ly=grid.lengths[1] if grid.dim > 1 else grid.lengths[0], x=coords[0],
              y=coords[1] if grid.dim > 1 else np.zeros_like(coords[0]))
    value = eval(compile(expr, "<initial data>", "eval"), {"__builtins__": {}}, ns)  # noqa: S307
    return np.broadcast_to(np.asarray(value, dtype=float), coords[0].shape).copy()


def _normal_derivative_defect(expr: str, grid: Grid) -> float:
    """Largest one-sided normal derivative of the expression on the box walls."""
    worst = 0.0
    for axis in range(grid.dim):
        L = grid.lengths[axis]
        delta = 1e-6 * L
        for wall, inward in ((0.0, delta), (L, L - delta)):
            coords = [grid.axis_centers(a) for a in range(grid.dim)]
            at = list(coords)
            at[axis] = np.array([wall])
            near = list(coords)
            near[axis] = np.array([inward])
            f_at = eval_expression(expr, grid, tuple(np.meshgrid(*at, indexing="ij")))
            f_near = eval_expression(expr, grid, tuple(np.meshgrid(*near, indexing="ij")))
            worst = max(worst, float(np.max(np.abs(f_near - f_at))) / delta)
    return worst


def validate(resolved: dict, check_hypotheses: bool = True) -> None:
    r = resolved
    if r["grid.dim"] not in (1, 2):
        raise ConfigError(E_VALUE, "grid.dim must be 1 or 2")
    for key in ("grid.cells", "grid.length"):
        if len(r[key]) not in (1, r["grid.dim"]):
            raise ConfigError(E_VALUE, f"{key} needs 1 or grid.dim values")
    try:
        grid = make_grid(r)
        SolverConfig(t_end=r["solver.t_end"], cfl_safety=r["solver.cfl_safety"],
                     dt_max=r["solver.dt_max"], dt_min=r["solver.dt_min"],
                     output_every=r["solver.output_every"], blowup_u_max=r["solver.blowup_u_max"])
    except ValueError as exc:
        raise ConfigError(E_VALUE, str(exc)) from None
    if r["model.lambda0"] <= 0:
        raise ConfigError(E_VALUE, "model.lambda0 must be positive")
    if r["model.mu"] < 0:
        raise ConfigError(E_VALUE, "model.mu must be nonnegative")
    if r["diffusivity.c_d"] <= 0 or r["diffusivity.epsilon"] < 0:
        raise ConfigError(E_VALUE, "need c_d > 0 and epsilon >= 0")
    if any(k < 1 for k in r["diagnostics.k_exponents"]) or any(b < 1 for b in r["diagnostics.beta"]):
        raise ConfigError(E_VALUE, "diagnostic exponents must be >= 1")
    for key in ("model.chi", "model.xi", "model.mu", "diffusivity.m"):
        if not math.isfinite(r[key]):
            raise ConfigError(E_VALUE, f"{key} must be finite")

    if r["diffusivity.m"] <= 0:
        # m = 0 is never admissible; the threshold is 0 only when mu_star is infinite
        raise ConfigError(E_HYPOTHESIS, "diffusion exponent must satisfy m > 0")
    if not check_hypotheses:
        return
    if r["model.chi"] <= 0:
        raise ConfigError(E_HYPOTHESIS, "chemotactic sensitivity must satisfy chi > 0")
    if r["model.xi"] <= 0:
        raise ConfigError(E_HYPOTHESIS, "haptotactic sensitivity must satisfy xi > 0")

    fields = {}
    for name in ("u0", "v0", "w0"):
        try:
            fields[name] = eval_expression(r[f"initial.{name}"], grid)
        except Exception as exc:  # expression errors surface as config errors
            raise ConfigError(E_VALUE, f"initial.{name} failed to evaluate: {exc}") from None
        if not np.all(np.isfinite(fields[name])):
            raise ConfigError(E_HYPOTHESIS, f"initial.{name} is not finite on the grid")
    if np.any(fields["u0"] < 0):
        raise ConfigError(E_HYPOTHESIS, "initial density violates u0 >= 0 in Omega")
    if not np.any(fields["u0"] > 0):
        raise ConfigError(E_HYPOTHESIS, "initial density violates u0 not identically 0")
    if np.any(fields["v0"] < 0):
        raise ConfigError(E_HYPOTHESIS, "initial signal violates v0 >= 0 in Omega")
    if np.any(fields["w0"] <= 0):
        raise ConfigError(E_HYPOTHESIS, "initial tissue violates w0 > 0 in closure(Omega)")
    scale = 1.0 + float(np.max(np.abs(fields["w0"])))
    if _normal_derivative_defect(r["initial.w0"], grid) > 1e-3 * scale:
        raise ConfigError(E_HYPOTHESIS, "initial tissue violates dw0/dnu = 0 on the boundary")


@dataclass
class Problem:
    """Everything needed for one run, built from a resolved configuration."""

    grid: Grid
    spec: DiffusivitySpec
    sens: Sensitivities
    solver: SolverConfig
    initial: State
    lambda0: float
    k_exponents: tuple
    betas: tuple
    resolved: dict


def build_problem(resolved: dict) -> Problem:
    r = resolved
    grid = make_grid(r)
    spec = DiffusivitySpec(r["diffusivity.law"], r["diffusivity.m"], r["diffusivity.c_d"],
                           r["diffusivity.epsilon"])
    sens = Sensitivities(r["model.chi"], r["model.xi"], r["model.mu"])
    solver = SolverConfig(t_end=r["solver.t_end"], cfl_safety=r["solver.cfl_safety"],
                          dt_max=r["solver.dt_max"], dt_min=r["solver.dt_min"],
                          output_every=r["solver.output_every"],
                          blowup_u_max=r["solver.blowup_u_max"],
                          freeze_v=r["solver.freeze_v"])
    initial = State.initial(eval_expression(r["initial.u0"], grid),
                            eval_expression(r["initial.v0"], grid),
                            eval_expression(r["initial.w0"], grid))
    return Problem(grid, spec, sens, solver, initial, r["model.lambda0"],
                   tuple(r["diagnostics.k_exponents"]), tuple(r["diagnostics.beta"]), dict(r))
