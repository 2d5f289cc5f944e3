"""Run configuration: JSON schema, parsing, and construction of pipeline objects."""

import copy
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .fieldpath import PrecessingFieldParams, TimeGrid, piecewise_linear_path, precessing_path
from .hamiltonian import MatrixTermsBuilder, SpinModelParams, matrix_family, spin_family
from .observables import PAULI_OBSERVABLES, ObservableOp
from .phases import GaugeFunction

log = logging.getLogger(__name__)

RENORMALIZE_LIMIT = 1e-6

DEFAULT_TOLERANCES = {
    "gauge": 1e-10,
    "norm": 1e-12,
    "phase": 1e-6,
}


class ConfigError(ValueError):
    pass


_number = {"type": "number"}
_complex = {
    "oneOf": [
        _number,
        {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
    ]
}
_matrix = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _complex}}
_vector = {"type": "array", "items": _number, "minItems": 1}

SCHEMA = {
    "type": "object",
    "required": ["model", "path", "grid"],
    "additionalProperties": False,
    "properties": {
        "model": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["model"],
                    "additionalProperties": False,
                    "properties": {"model": {"const": "spin_half"}, "mu": {"type": "number", "not": {"const": 0}}},
                },
                {
                    "type": "object",
                    "required": ["model", "terms"],
                    "additionalProperties": False,
                    "properties": {
                        "model": {"const": "matrix"},
                        "terms": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "required": ["component", "matrix"],
                                "additionalProperties": False,
                                "properties": {
                                    "component": {"type": "integer", "minimum": 0},
                                    "matrix": _matrix,
                                },
                            },
                        },
                        "offset": _matrix,
                    },
                },
            ]
        },
        "path": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["type", "B", "theta", "omega"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "precessing"},
                        "B": {"type": "number", "exclusiveMinimum": 0},
                        "theta": {"type": "number", "minimum": 0, "maximum": math.pi},
                        "omega": {"type": "number", "minimum": 0},
                    },
                },
                {
                    "type": "object",
                    "required": ["type", "knots"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "piecewise"},
                        "knots": {
                            "type": "array",
                            "minItems": 2,
                            "items": {"type": "array", "minItems": 2,
                                      "prefixItems": [_number, _vector], "items": False},
                        },
                    },
                },
            ]
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "T": {"type": "number", "exclusiveMinimum": 0},
                "periods": {"type": "number", "exclusiveMinimum": 0},
                "N": {"type": "integer", "minimum": 2},
                "dt": {"type": "number", "exclusiveMinimum": 0},
            },
            "allOf": [
                {"oneOf": [{"required": ["T"]}, {"required": ["periods"]}]},
                {"oneOf": [{"required": ["N"]}, {"required": ["dt"]}]},
            ],
        },
        "initial_state": {
            "oneOf": [
                {"type": "object", "required": ["level"], "additionalProperties": False,
                 "properties": {"level": {"type": "integer", "minimum": 1}}},
                {"type": "object", "required": ["amplitudes"], "additionalProperties": False,
                 "properties": {"amplitudes": {"type": "array", "minItems": 1, "items": _complex}}},
                {"type": "object", "required": ["coefficients"], "additionalProperties": False,
                 "properties": {"coefficients": {"type": "array", "minItems": 1, "items": _complex}}},
            ]
        },
        "gauge": {
            "oneOf": [
                {"type": "object", "required": ["type", "values"], "additionalProperties": False,
                 "properties": {"type": {"const": "constant"}, "values": _vector}},
                {"type": "object", "required": ["type", "rates"], "additionalProperties": False,
                 "properties": {"type": {"const": "linear"}, "rates": _vector, "offsets": _vector}},
                {"type": "object", "required": ["type", "amplitudes", "frequencies"], "additionalProperties": False,
                 "properties": {"type": {"const": "sinusoidal"}, "amplitudes": _vector,
                                "frequencies": _vector, "phases": _vector}},
                {"type": "object", "required": ["type"], "additionalProperties": False,
                 "properties": {"type": {"const": "random"}, "modes": {"type": "integer", "minimum": 1},
                                "amplitude": {"type": "number", "minimum": 0}}},
            ]
        },
        "observables": {
            "type": "array",
            "items": {
                "oneOf": [
                    {"enum": sorted(PAULI_OBSERVABLES)},
                    {"type": "object", "required": ["name", "matrix"], "additionalProperties": False,
                     "properties": {"name": {"type": "string", "minLength": 1}, "matrix": _matrix}},
                ]
            },
        },
        "sweep": {
            "type": "object",
            "required": ["parameter", "values"],
            "additionalProperties": False,
            "properties": {
                "parameter": {"enum": ["omega", "theta", "B", "mu", "N", "T", "periods", "dt"]},
                "values": {"type": "array", "minItems": 1, "items": _number},
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "random_gauges": {"type": "integer", "minimum": 1},
                "samples": {"type": "integer", "minimum": 1},
                "modes": {"type": "integer", "minimum": 1},
            },
        },
        "output": {"type": "object", "additionalProperties": False, "properties": {"dir": {"type": "string"}}},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number", "exclusiveMinimum": 0} for k in DEFAULT_TOLERANCES},
        },
        "seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
    },
}


def _complex_value(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def _complex_matrix(rows) -> np.ndarray:
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths.pop() != len(rows):
        raise ConfigError("matrices must be square")
    return np.array([[_complex_value(x) for x in row] for row in rows], dtype=complex)


def validate(raw: dict) -> dict:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    return raw


def load(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return validate(raw)


def with_parameter(raw: dict, name: str, value) -> dict:
    """Copy of ``raw`` with one sweep parameter replaced."""
    out = copy.deepcopy(raw)
    if name in ("omega", "theta", "B"):
        if out["path"]["type"] != "precessing":
            raise ConfigError(f"sweep parameter {name!r} needs a precessing path")
        out["path"][name] = value
    elif name == "mu":
        if out["model"]["model"] != "spin_half":
            raise ConfigError("sweep parameter 'mu' needs the spin_half model")
        out["model"]["mu"] = value
    elif name in ("N", "dt"):
        out["grid"].pop("N", None)
        out["grid"].pop("dt", None)
        out["grid"][name] = int(value) if name == "N" else value
    else:
        out["grid"].pop("T", None)
        out["grid"].pop("periods", None)
        out["grid"][name] = value
    out.pop("sweep", None)
    return validate(out)


@dataclass
class Run:
    """Pipeline objects built from one validated config."""

    raw: dict
    family: object
    grid: TimeGrid
    psi0: Optional[np.ndarray]
    coefficients: Optional[np.ndarray]
    observables: list
    precessing: Optional[PrecessingFieldParams]
    mu: Optional[float]
    tolerances: dict

    @property
    def dimension(self) -> int:
        return self.family.dimension


def _grid(raw, precessing):
    g = raw["grid"]
    if "periods" in g:
        if precessing is None or precessing.omega == 0:
            raise ConfigError("grid.periods needs a precessing path with omega > 0")
        duration = 2 * math.pi * g["periods"] / precessing.omega
    else:
        duration = float(g["T"])
    steps = g["N"] if "N" in g else max(2, int(math.ceil(duration / g["dt"])))
    return TimeGrid(duration, int(steps))


def _normalized(vec, what):
    vec = np.asarray(vec, dtype=complex)
    norm = float(np.sqrt(np.sum(np.abs(vec) ** 2)))
    if abs(norm - 1.0) > RENORMALIZE_LIMIT:
        raise ConfigError(f"{what} has norm {norm:.9g}; must be 1 within {RENORMALIZE_LIMIT:g}")
    if norm != 1.0:
        log.warning("%s renormalised (norm was %.17g)", what, norm)
    return vec / norm


def build(raw: dict) -> Run:
    try:
        return _build(raw)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _build(raw: dict) -> Run:
    path_cfg = raw["path"]
    precessing = None
    if path_cfg["type"] == "precessing":
        precessing = PrecessingFieldParams(path_cfg["B"], path_cfg["theta"], path_cfg["omega"])
    grid = _grid(raw, precessing)
    if precessing is not None:
        path = precessing_path(precessing, grid.duration)
    else:
        path = piecewise_linear_path(path_cfg["knots"])
        if grid.duration > path.duration * (1 + 1e-12):
            raise ConfigError(f"grid T={grid.duration} runs past the last knot at t={path.duration}")

    model = raw["model"]
    mu = None
    if model["model"] == "spin_half":
        mu = float(model.get("mu", 1.0))
        family = spin_family(SpinModelParams(mu), path)
    else:
        terms = [(t["component"], _complex_matrix(t["matrix"])) for t in model["terms"]]
        offset = _complex_matrix(model["offset"]) if "offset" in model else None
        family = matrix_family(MatrixTermsBuilder(terms, offset), path)
    d = family.dimension

    init = raw.get("initial_state", {"level": 1})
    psi0 = coefficients = None
    if "level" in init:
        if init["level"] > d:
            raise ConfigError(f"initial level {init['level']} exceeds dimension {d}")
        coefficients = np.zeros(d, dtype=complex)
        coefficients[init["level"] - 1] = 1.0
    elif "amplitudes" in init:
        if len(init["amplitudes"]) != d:
            raise ConfigError(f"expected {d} amplitudes, got {len(init['amplitudes'])}")
        psi0 = _normalized([_complex_value(x) for x in init["amplitudes"]], "initial amplitudes")
    else:
        if len(init["coefficients"]) != d:
            raise ConfigError(f"expected {d} coefficients, got {len(init['coefficients'])}")
        coefficients = _normalized([_complex_value(x) for x in init["coefficients"]], "initial coefficients")

    default_obs = sorted(PAULI_OBSERVABLES) if d == 2 else []
    observables = []
    for item in raw.get("observables", default_obs):
        if isinstance(item, str):
            if d != 2:
                raise ConfigError(f"observable {item!r} is 2x2 but the model has dimension {d}")
            observables.append(PAULI_OBSERVABLES[item])
        else:
            m = _complex_matrix(item["matrix"])
            if m.shape != (d, d):
                raise ConfigError(f"observable {item['name']!r} has shape {m.shape}, expected {(d, d)}")
            observables.append(ObservableOp(item["name"], m))

    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(raw.get("tolerances", {}))
    return Run(raw, family, grid, psi0, coefficients, observables, precessing, mu, tolerances)


def _per_level(values, d, name):
    if len(values) != d:
        raise ConfigError(f"gauge {name} needs {d} entries, got {len(values)}")
    return values


def gauge_from_config(spec: dict, grid: TimeGrid, d: int, rng) -> GaugeFunction:
    kind = spec["type"]
    t = grid.times
    if kind == "constant":
        vals = np.asarray(_per_level(spec["values"], d, "values"), dtype=float)
        return GaugeFunction(grid, np.broadcast_to(vals, (len(t), d)).copy())
    if kind == "linear":
        rates = np.asarray(_per_level(spec["rates"], d, "rates"), dtype=float)
        offsets = np.asarray(_per_level(spec.get("offsets", [0.0] * d), d, "offsets"), dtype=float)
        return GaugeFunction(grid, offsets + np.outer(t, rates))
    if kind == "sinusoidal":
        amp = np.asarray(_per_level(spec["amplitudes"], d, "amplitudes"), dtype=float)
        freq = np.asarray(_per_level(spec["frequencies"], d, "frequencies"), dtype=float)
        phase = np.asarray(_per_level(spec.get("phases", [0.0] * d), d, "phases"), dtype=float)
        return GaugeFunction(grid, amp * np.sin(np.outer(t, freq) + phase))
    return GaugeFunction.random_fourier(grid, d, rng, modes=spec.get("modes", 3),
                                        amplitude=spec.get("amplitude", math.pi))

