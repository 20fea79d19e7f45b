"""Built-in problem instances and JSON problem-file ingestion.

Two catalog entries: the double integrator benchmark and a seventh-order
machine tool manipulator model whose stiffness (entries up to ~1e5) exercises
the substepped propagation.  Arbitrary LTI problems come in through a strict
JSON schema.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dynamics import LtiSystem
from .errors import ProblemValidationError

__all__ = [
    "DOUBLE_INTEGRATOR",
    "MANIPULATOR",
    "catalog_names",
    "default_grid_size",
    "build",
    "load_problem",
    "save_problem",
]

DOUBLE_INTEGRATOR = "double-integrator"
MANIPULATOR = "machine-tool-manipulator"

# Recommended grid resolutions; the manipulator needs the finer grid and the
# automatic substepping on top of it.
_DEFAULT_GRID = {DOUBLE_INTEGRATOR: 1000, MANIPULATOR: 2000}

_OVERRIDE_FIELDS = ("r", "lower", "upper", "x0", "xf", "t_final")

_SCHEMA_FIELDS = ("name", "n", "A", "b", "r", "lower", "upper", "x0", "xf", "t_final")


def catalog_names() -> list[str]:
    return [DOUBLE_INTEGRATOR, MANIPULATOR]


def default_grid_size(name: str) -> int:
    _require_known(name)
    return _DEFAULT_GRID[name]


def _require_known(name: str) -> None:
    if name not in _DEFAULT_GRID:
        raise ProblemValidationError(
            f"unknown problem {name!r}; available: {', '.join(catalog_names())}"
        )


def _double_integrator_defaults() -> dict:
    return {
        "A": [[0.0, 1.0], [0.0, 0.0]],
        "b": [0.0, 1.0],
        "r": 1.0 / 3.0,
        "lower": -2.5,
        "upper": 2.5,
        "x0": [0.0, 1.0],
        "xf": [0.0, 0.0],
        "t_final": 1.0,
    }


def _manipulator_defaults() -> dict:
    return {
        "A": [
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            [-4.441e7 / 450, 0.0, 0.0, -8500 / 450, 0.0, 0.0, -1 / 450],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1 / 750],
            [0.0, 0.0, -8.2e6 / 40, 0.0, 0.0, -1800 / 40, 0.25 / 40],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1 / 0.0025],
        ],
        "b": [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1 / 0.0025],
        "r": 1 / 0.55 - 1.0,
        "lower": -2000.0,
        "upper": 2000.0,
        "x0": [0.0] * 7,
        "xf": [0.0, 2.7e-3, 0.0, 0.0, 0.1, 0.0, 0.0],
        # The source model is also quoted with t_final = 0.0522; that variant
        # is reachable through the override.
        "t_final": 0.522,
    }


def build(name: str, **overrides) -> LtiSystem:
    """Catalog instance with optional overrides on r, bounds, endpoints, t_final."""
    _require_known(name)
    fields = _double_integrator_defaults() if name == DOUBLE_INTEGRATOR else _manipulator_defaults()
    for key, value in overrides.items():
        if key not in _OVERRIDE_FIELDS:
            raise ProblemValidationError(
                f"unknown override {key!r}; allowed: {', '.join(_OVERRIDE_FIELDS)}"
            )
        fields[key] = value
    try:
        return LtiSystem(**fields)
    except ValueError as exc:
        raise ProblemValidationError(str(exc)) from exc


def load_problem(path) -> LtiSystem:
    """Read and validate a problem file.

    The file is a UTF-8 JSON object with exactly the fields name, n, A, b, r,
    lower, upper, x0, xf, t_final; unknown fields are rejected and every
    dimension is checked against n.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemValidationError(f"cannot read problem file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemValidationError(
            f"parse error in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise ProblemValidationError(f"{path}: top-level value must be an object")

    unknown = sorted(set(data) - set(_SCHEMA_FIELDS))
    if unknown:
        raise ProblemValidationError(f"{path}: unknown fields {', '.join(unknown)}")
    missing = [f for f in _SCHEMA_FIELDS if f not in data]
    if missing:
        raise ProblemValidationError(f"{path}: missing fields {', '.join(missing)}")

    n = data["n"]
    if not isinstance(n, int) or n < 1:
        raise ProblemValidationError(f"{path}: field n must be a positive integer")
    A = np.asarray(data["A"], dtype=float)
    if A.shape != (n, n):
        raise ProblemValidationError(f"{path}: field A must be {n}x{n}, got {A.shape}")
    for fname, length_field in (("b", "b"), ("x0", "x0"), ("xf", "xf")):
        arr = np.asarray(data[fname], dtype=float)
        if arr.shape != (n,):
            raise ProblemValidationError(
                f"{path}: field {fname} must have length {n}, got {arr.shape}"
            )
    try:
        return LtiSystem(
            A=A,
            b=data["b"],
            r=float(data["r"]),
            lower=float(data["lower"]),
            upper=float(data["upper"]),
            x0=data["x0"],
            xf=data["xf"],
            t_final=float(data["t_final"]),
        )
    except (TypeError, ValueError) as exc:
        raise ProblemValidationError(f"{path}: {exc}") from exc


def save_problem(sys: LtiSystem, path, name: str = "custom") -> None:
    """Write a problem file that load_problem reads back field-for-field."""
    payload = {
        "name": name,
        "n": sys.n,
        "A": [[float(v) for v in row] for row in sys.A],
        "b": [float(v) for v in sys.b],
        "r": float(sys.r),
        "lower": float(sys.lower),
        "upper": float(sys.upper),
        "x0": [float(v) for v in sys.x0],
        "xf": [float(v) for v in sys.xf],
        "t_final": float(sys.t_final),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
