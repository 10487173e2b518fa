"""Problem configuration: one TOML document describes one boundary problem
plus the task parameters for each CLI command."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .matrixfss import SingularOrder
from .potential import Potential
from .spectral import BoundaryProblem, SolverOptions


@dataclass
class ProblemConfig:
    problem: BoundaryProblem
    tasks: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def _complex_pairs(field_name, data, m):
    arr = np.asarray(data, dtype=float)
    if arr.shape != (m * m, 2):
        raise ConfigError(field_name,
                          f"expected {m * m} row-major [re, im] pairs, "
                          f"got shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(m, m)


def _matrix_of_pairs(field_name, data, m):
    arr = np.asarray(data, dtype=float)
    if arr.shape != (m, m, 2):
        raise ConfigError(field_name,
                          f"expected an {m} x {m} array of [re, im] pairs, "
                          f"got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _parse_potential(tbl, m):
    kind = tbl.get("kind", "zero")
    if kind == "zero":
        return Potential.zero(m)
    if kind == "polynomial":
        if "coeffs" not in tbl:
            raise ConfigError("potential.coeffs", "missing for polynomial kind")
        coeffs = [_matrix_of_pairs(f"potential.coeffs[{p}]", c, m)
                  for p, c in enumerate(tbl["coeffs"])]
        return Potential.polynomial(coeffs)
    if kind == "nodes":
        if "x" not in tbl or "values" not in tbl:
            raise ConfigError("potential.x/values", "missing for nodes kind")
        x = np.asarray(tbl["x"], dtype=float)
        vals = np.stack([_matrix_of_pairs(f"potential.values[{i}]", v, m)
                         for i, v in enumerate(tbl["values"])])
        return Potential.from_nodes(x, vals)
    raise ConfigError("potential.kind", f"unknown kind {kind!r}")


def _parse_solver(tbl, tol_scale=1.0):
    base = SolverOptions()
    kw = {}
    for key in ("n_graded", "n_uniform_min", "contour_k0", "contour_kmax",
                "newton_maxit"):
        if key in tbl:
            v = int(tbl[key])
            if v <= 0:
                raise ConfigError(f"solver.{key}", "must be positive")
            kw[key] = v
    for key in ("quad_tol", "picard_tol", "newton_tol", "safety_floor",
                "contour_tol", "delta_frac", "delta_cap"):
        if key in tbl:
            v = float(tbl[key])
            if v <= 0:
                raise ConfigError(f"solver.{key}", "must be positive")
            kw[key] = v
    opts = SolverOptions(**{**base.__dict__, **kw})
    if tol_scale != 1.0:
        opts = opts.scaled(tol_scale)
    return opts


def load_config(path, tol_scale=1.0) -> ProblemConfig:
    """Parse and validate a problem configuration file."""
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("<document>", f"TOML parse failure: {exc}") from exc

    if "order" not in raw or "nu" not in raw["order"]:
        raise ConfigError("order.nu", "missing")
    nu = list(raw["order"]["nu"])
    if any(not isinstance(v, (int, float)) or v <= 0 for v in nu):
        raise ConfigError("order.nu", "entries must be positive reals")
    if any(nu[i] < nu[i + 1] - 1e-15 for i in range(len(nu) - 1)):
        raise ConfigError("order.nu", "entries must be nonincreasing")
    try:
        order = SingularOrder.from_nu(nu)
    except Exception as exc:
        raise ConfigError("order.nu", str(exc)) from exc
    m = order.m

    btbl = raw.get("boundary", {})
    if "T" not in btbl:
        raise ConfigError("boundary.T", "missing")
    T = float(btbl["T"])
    if T <= 0:
        raise ConfigError("boundary.T", "must be positive")
    h = _complex_pairs("boundary.h", btbl.get("h", [[0.0, 0.0]] * (m * m)), m)
    H = _complex_pairs("boundary.H", btbl.get("H", [[0.0, 0.0]] * (m * m)), m)

    Q = _parse_potential(raw.get("potential", {}), m)
    opts = _parse_solver(raw.get("solver", {}), tol_scale)
    try:
        problem = BoundaryProblem(order=order, Q=Q, h=h, H=H, T=T, opts=opts)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError("<problem>", str(exc)) from exc
    return ProblemConfig(problem=problem, tasks=dict(raw.get("tasks", {})),
                         raw=raw)


def task_lambdas(tasks, name, default=((4.0, 1.0),)):
    """Complex lambda list from a task table's [[re, im], ...] entry."""
    spec = tasks.get(name, {}).get("lambdas")
    if spec is None:
        spec = default
    out = []
    for i, pair in enumerate(spec):
        if len(pair) != 2:
            raise ConfigError(f"tasks.{name}.lambdas[{i}]",
                              "each entry must be [re, im]")
        out.append(complex(float(pair[0]), float(pair[1])))
    return out
