"""Experiment configuration: JSON schema validation and typed access."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .errors import ConfigError, IskfError
from .filters import IskfParams
from .io import read_json
from .model import OutlierSpec, build_model, cstr_model, vehicle_model
from .tune import TuneGrid, log_grid

__all__ = ["SCHEMA", "FilterSpec", "ExperimentConfig", "load_config", "parse_config", "BUILTIN_MODELS"]

BUILTIN_MODELS = {"vehicle": vehicle_model, "cstr": cstr_model}

_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}, "minItems": 1}
_threshold = {"oneOf": [{"type": "number", "exclusiveMinimum": 0}, {"const": "inf"}]}
_values = {
    "oneOf": [
        {"type": "array", "items": _threshold, "minItems": 1},
        {
            "type": "object",
            "properties": {
                "min": {"type": "number", "exclusiveMinimum": 0},
                "max": {"type": "number", "exclusiveMinimum": 0},
                "num": {"type": "integer", "minimum": 1},
            },
            "required": ["min", "max", "num"],
            "additionalProperties": False,
        },
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["model"],
    "properties": {
        "model": {
            "oneOf": [
                {"enum": sorted(BUILTIN_MODELS)},
                {
                    "type": "object",
                    "properties": {"A": _matrix, "C": _matrix, "F": _matrix, "G": _matrix},
                    "required": ["A", "C", "F", "G"],
                    "additionalProperties": False,
                },
            ]
        },
        "model_params": {
            "type": "object",
            "properties": {"h": {"type": "number"}, "gamma": {"type": "number"}},
            "additionalProperties": False,
        },
        "outliers": {
            "type": "object",
            "properties": {
                "p_process": {"type": "number", "minimum": 0, "maximum": 1},
                "scale_process": {"type": "number", "minimum": 1},
                "p_meas": {"type": "number", "minimum": 0, "maximum": 1},
                "scale_meas": {"type": "number", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "T": {"type": "integer", "minimum": 1},
        "T_tune": {"type": "integer", "minimum": 1},
        "seeds": {
            "type": "object",
            "properties": {"tune": {"type": "integer"}, "test": {"type": "integer"}},
            "additionalProperties": False,
        },
        "x0": {"type": "array", "items": {"type": "number"}},
        "truth_noise": {
            "type": "object",
            "properties": {"F": _matrix, "G": _matrix},
            "additionalProperties": False,
        },
        "trajectory_file": {"type": "string"},
        "tune_trajectory_file": {"type": "string"},
        "filters": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["type"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
                    "type": {"enum": ["kf", "iskf", "huber"]},
                    "steady": {"type": "boolean"},
                    "k_tilde": {"type": "integer", "minimum": 1},
                    "lambda_x": _threshold,
                    "lambda_y": _threshold,
                    "eta": {"type": "number", "exclusiveMinimum": 0},
                    "tune": {"type": "boolean"},
                    "tune_eta": {"type": "boolean"},
                },
            },
        },
        "grid": {
            "type": "object",
            "properties": {"lambda_x": _values, "lambda_y": _values, "eta": _values},
            "additionalProperties": False,
        },
        "scoring": {"enum": ["meas", "state"]},
        "sweep": {
            "type": "object",
            "properties": {
                "k_tilde": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                "scoring": {"enum": ["meas", "state"]},
            },
            "required": ["k_tilde"],
            "additionalProperties": False,
        },
        "outlier_free_eval": {"type": "boolean"},
        "huber_tol": {"type": "number", "exclusiveMinimum": 0},
        "huber_tune_tol": {"type": "number", "exclusiveMinimum": 0},
    },
}

_DEFAULT_ETA_GRID = {"min": 0.1, "max": 100.0, "num": 20}
_DEFAULT_LAMBDA_GRID = {"min": 0.1, "max": 10.0, "num": 20}


@dataclass(frozen=True)
class FilterSpec:
    name: str
    type: str
    steady: bool = True
    k_tilde: int = 1
    lambda_x: float = float("inf")
    lambda_y: float = float("inf")
    eta: float = 1.0
    tune: bool = False
    tune_eta: bool = False

    def params(self, lambda_x=None, lambda_y=None, eta=None):
        return IskfParams(
            self.lambda_x if lambda_x is None else lambda_x,
            self.lambda_y if lambda_y is None else lambda_y,
            self.k_tilde,
            self.eta if eta is None else eta,
            # the step-size search covers eta >= 2; a fixed eta must be a descent step
            allow_large_step=self.tune_eta,
        )


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    raw: dict
    model: object
    outliers: OutlierSpec
    T: int
    T_tune: int
    seed_tune: int
    seed_test: int
    filters: tuple
    lambda_x_values: tuple
    lambda_y_values: tuple
    eta_values: tuple
    scoring: str = "meas"
    x0: Optional[np.ndarray] = None
    truth_F: Optional[np.ndarray] = None
    truth_G: Optional[np.ndarray] = None
    trajectory_file: Optional[str] = None
    tune_trajectory_file: Optional[str] = None
    sweep_k: tuple = ()
    sweep_scoring: str = "state"
    outlier_free_eval: bool = False
    huber_tol: float = 1e-10
    huber_tune_tol: float = 1e-8
    base_dir: Path = field(default_factory=Path.cwd)

    def grid(self, k_tilde, tune_eta=False):
        eta = self.eta_values if tune_eta else (1.0,)
        return TuneGrid(self.lambda_x_values, self.lambda_y_values, eta, k_tilde)


def _values_of(spec):
    if isinstance(spec, dict):
        return tuple(log_grid(spec["min"], spec["max"], spec["num"]))
    return tuple(float(v) for v in spec)


def _path_of(error):
    return ".".join(str(p) for p in error.absolute_path)


def parse_config(raw, base_dir=None):
    """Validate a config dict against :data:`SCHEMA` and build the typed config.

    Raises:
        ConfigError: with the dotted path of the offending field.
    """
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ConfigError(e.message, _path_of(e))

    try:
        src = raw["model"]
        if isinstance(src, str):
            model, spec = BUILTIN_MODELS[src](**raw.get("model_params", {}))
        else:
            if "model_params" in raw:
                raise ConfigError("only builtin models take parameters", "model_params")
            model = build_model(src["A"], src["C"], src["F"], src["G"])
            spec = OutlierSpec()
        if "outliers" in raw:
            spec = OutlierSpec(**{**spec.to_dict(), **raw["outliers"]})
    except ConfigError:
        raise
    except IskfError as exc:
        raise ConfigError(str(exc), "model") from exc

    filters = []
    names = set()
    for i, f in enumerate(raw.get("filters", [{"type": "kf"}])):
        k = f.get("k_tilde", 1)
        name = f.get("name") or (f["type"] if f["type"] != "iskf" else f"iskf_k{k}")
        if name in names:
            raise ConfigError(f"duplicate filter name {name!r}", f"filters.{i}.name")
        names.add(name)
        if f["type"] == "huber" and f.get("steady") is False:
            raise ConfigError("the Huberized filter is steady-state only", f"filters.{i}.steady")
        if f.get("tune_eta") and not f.get("tune"):
            raise ConfigError("tune_eta requires tune", f"filters.{i}.tune_eta")
        try:
            fs = FilterSpec(
                name=name,
                type=f["type"],
                steady=f.get("steady", True),
                k_tilde=k,
                lambda_x=f.get("lambda_x", "inf"),
                lambda_y=f.get("lambda_y", "inf"),
                eta=f.get("eta", 1.0),
                tune=f.get("tune", False),
                tune_eta=f.get("tune_eta", False),
            )
            fs.params()
        except IskfError as exc:
            raise ConfigError(str(exc), f"filters.{i}") from exc
        filters.append(fs)

    grid = raw.get("grid", {})
    n, p = model.n, model.p

    def matrix(key, sub, shape0, square=False):
        if sub not in raw.get(key, {}):
            return None
        M = np.array(raw[key][sub], dtype=float, ndmin=2)
        if M.shape[0] != shape0 or (square and M.shape[1] != shape0):
            raise ConfigError(f"wrong shape {M.shape}", f"{key}.{sub}")
        return M

    x0 = None
    if "x0" in raw:
        x0 = np.array(raw["x0"], dtype=float)
        if x0.shape != (n,):
            raise ConfigError(f"expected {n} entries", "x0")

    sweep = raw.get("sweep", {})
    seeds = raw.get("seeds", {})
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    return ExperimentConfig(
        raw=raw,
        model=model,
        outliers=spec,
        T=raw.get("T", 1000),
        T_tune=raw.get("T_tune", raw.get("T", 1000)),
        seed_tune=seeds.get("tune", 0),
        seed_test=seeds.get("test", 42),
        filters=tuple(filters),
        lambda_x_values=_values_of(grid.get("lambda_x", _DEFAULT_LAMBDA_GRID)),
        lambda_y_values=_values_of(grid.get("lambda_y", _DEFAULT_LAMBDA_GRID)),
        eta_values=_values_of(grid.get("eta", _DEFAULT_ETA_GRID)),
        scoring=raw.get("scoring", "meas"),
        x0=x0,
        truth_F=matrix("truth_noise", "F", n),
        truth_G=matrix("truth_noise", "G", p, square=True),
        trajectory_file=raw.get("trajectory_file"),
        tune_trajectory_file=raw.get("tune_trajectory_file"),
        sweep_k=tuple(sweep.get("k_tilde", ())),
        sweep_scoring=sweep.get("scoring", "state"),
        outlier_free_eval=raw.get("outlier_free_eval", False),
        huber_tol=raw.get("huber_tol", 1e-10),
        huber_tune_tol=raw.get("huber_tune_tol", 1e-8),
        base_dir=base,
    )


def load_config(path):
    """Load a config file, or the ``config`` section of a run manifest."""
    path = Path(path)
    try:
        raw = read_json(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if isinstance(raw, dict) and "manifest_version" in raw:
        raw = raw.get("config", {})
    return parse_config(raw, base_dir=path.parent)
