"""Parameters, states and right-hand sides of the SEIAQR models.

Three autonomous systems share one set of rate constants:

* the long-term model with births ``lambda`` and deaths ``d`` and standard
  incidence ``beta * S / N * (a E + I + b A)``;
* the limiting system, identical except that the incidence denominator is
  frozen at ``S0 = lambda / d``;
* the short-term model, the ``lambda = d = 0`` restriction (closed population).

All quantities are in persons and days.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import InvalidParameters, ZeroPopulation

COMPARTMENTS = ("S", "E", "I", "A", "Q", "R")
PARAM_NAMES = ("lambda", "d", "beta", "a", "b", "c", "p", "q1", "q2", "r1", "r2", "r3")


class ModelKind(str, enum.Enum):
    LONG = "long"
    LIMITING = "limiting"
    SHORT = "short"


@dataclass(frozen=True)
class ModelParams:
    """Rate constants of the long-term model.

    ``lam`` is the birth inflow (persons/day); it is spelled ``lambda`` in
    JSON and in :meth:`as_dict`. The short-term model is selected with
    ``lam = d = 0``.
    """

    lam: float
    d: float
    beta: float
    a: float
    b: float
    c: float
    p: float
    q1: float
    q2: float
    r1: float
    r2: float
    r3: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise InvalidParameters(f"{_json_name(f.name)} must be a finite number, got {v!r}")
            if v < 0:
                raise InvalidParameters(f"{_json_name(f.name)} must be nonnegative, got {v}")
            object.__setattr__(self, f.name, float(v))
        if self.beta <= 0 or self.c <= 0:
            raise InvalidParameters("beta and c must be strictly positive")
        if self.p > 1:
            raise InvalidParameters(f"p must lie in [0, 1], got {self.p}")
        short = self.lam == 0 and self.d == 0
        long_ = self.lam > 0 and self.d > 0
        if not (short or long_):
            raise InvalidParameters(
                "lambda and d must both be positive (long-term) or both zero (short-term)"
            )
        if self.B1 <= 0 or self.B2 <= 0:
            raise InvalidParameters("q1+r1+d and q2+r2+d must be positive")

    @property
    def mode(self) -> str:
        return "short" if self.lam == 0 else "long"

    @property
    def is_short(self) -> bool:
        return self.lam == 0

    @property
    def B1(self) -> float:
        return self.q1 + self.r1 + self.d

    @property
    def B2(self) -> float:
        return self.q2 + self.r2 + self.d

    @property
    def S0(self) -> float:
        """Disease-free population ``lambda / d`` (long-term mode only)."""
        if self.is_short:
            raise InvalidParameters("S0 = lambda/d is undefined for the short-term model")
        return self.lam / self.d

    def as_dict(self) -> dict:
        out = {_json_name(f.name): getattr(self, f.name) for f in fields(self)}
        out["mode"] = self.mode
        return out

    def with_values(self, **changes) -> "ModelParams":
        """Copy with some fields replaced; accepts ``lambda`` for ``lam``."""
        if "lambda" in changes:
            changes["lam"] = changes.pop("lambda")
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            raise InvalidParameters(f"unknown parameter(s): {sorted(unknown)}")
        return replace(self, **changes)

    @classmethod
    def from_mapping(cls, data: Mapping) -> "ModelParams":
        unknown = set(data) - set(PARAM_NAMES) - {"mode"}
        if unknown:
            raise InvalidParameters(f"unknown parameter field(s): {sorted(unknown)}")
        mode = data.get("mode")
        if mode is not None and mode not in ("long", "short"):
            raise InvalidParameters(f'mode must be "long" or "short", got {mode!r}')
        values = dict(data)
        values.pop("mode", None)
        if mode == "short":
            values.setdefault("lambda", 0.0)
            values.setdefault("d", 0.0)
        missing = set(PARAM_NAMES) - set(values)
        if missing:
            raise InvalidParameters(f"missing parameter field(s): {sorted(missing)}")
        params = cls(lam=values.pop("lambda"), **values)
        if mode is not None and params.mode != mode:
            raise InvalidParameters(
                f'mode "{mode}" conflicts with lambda={params.lam}, d={params.d}'
            )
        return params


def _json_name(name: str) -> str:
    return "lambda" if name == "lam" else name


class State(NamedTuple):
    S: float
    E: float
    I: float
    A: float
    Q: float
    R: float

    @property
    def N(self) -> float:
        return total_population(self)

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in zip(COMPARTMENTS, self)}

    @classmethod
    def from_mapping(cls, data: Mapping) -> "State":
        unknown = set(data) - set(COMPARTMENTS)
        missing = set(COMPARTMENTS) - set(data)
        if unknown or missing:
            raise InvalidParameters(
                f"state needs exactly the fields {list(COMPARTMENTS)}"
                f" (unknown: {sorted(unknown)}, missing: {sorted(missing)})"
            )
        values = [float(data[k]) for k in COMPARTMENTS]
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise InvalidParameters("state components must be finite and nonnegative")
        return cls(*values)


def total_population(x: Iterable[float]) -> float:
    return float(sum(x))


def _derivative(pr: ModelParams, x, denom: float) -> np.ndarray:
    S, E, I, A, Q, R = x
    force = pr.beta * S / denom * (pr.a * E + I + pr.b * A)
    cE = pr.c * E
    d = pr.d
    return np.array([
        pr.lam - force - d * S,
        force - cE - d * E,
        pr.p * cE - pr.B1 * I,
        (1.0 - pr.p) * cE - pr.B2 * A,
        pr.q1 * I + pr.q2 * A - (pr.r3 + d) * Q,
        pr.r1 * I + pr.r2 * A + pr.r3 * Q - d * R,
    ])


def rhs_long(params: ModelParams, x) -> np.ndarray:
    n = total_population(x)
    if n <= 0:
        raise ZeroPopulation("total population is zero")
    return _derivative(params, x, n)


def rhs_limiting(params: ModelParams, x) -> np.ndarray:
    """Long-term right-hand side with the incidence divided by ``S0``."""
    return _derivative(params, x, params.S0)


def rhs_short(params: ModelParams, x) -> np.ndarray:
    if not params.is_short:
        raise InvalidParameters("short-term model requires lambda = d = 0")
    n = total_population(x)
    if n <= 0:
        raise ZeroPopulation("total population is zero")
    return _derivative(params, x, n)


def rhs(kind: ModelKind, params: ModelParams, x) -> np.ndarray:
    kind = ModelKind(kind)
    if kind is ModelKind.LONG:
        if params.is_short:
            raise InvalidParameters("long-term model requires lambda > 0 and d > 0")
        return rhs_long(params, x)
    if kind is ModelKind.LIMITING:
        return rhs_limiting(params, x)
    return rhs_short(params, x)


def default_kind(params: ModelParams) -> ModelKind:
    return ModelKind.SHORT if params.is_short else ModelKind.LONG


def load_params(path) -> ModelParams:
    """Read parameters from a JSON file (see :meth:`ModelParams.from_mapping`)."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InvalidParameters("parameter file must hold a JSON object")
    return ModelParams.from_mapping(data)


def load_state(path) -> State:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InvalidParameters("state file must hold a JSON object")
    return State.from_mapping(data)


FIXTURES = Path(__file__).parent / "fixtures"


def fixture_params(name: str) -> ModelParams:
    """Bundled parameter sets: ``"india"`` (long-term) and ``"nanjing"`` (short-term)."""
    return load_params(FIXTURES / f"{name}.json")


def fixture_state(name: str) -> State:
    return load_state(FIXTURES / f"{name}_initial.json")
