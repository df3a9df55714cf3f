"""Case-count ingestion and least-squares calibration.

The loss is the sum of squared differences between simulated and observed
daily counts. Free quantities are searched with Nelder-Mead in log space
(linear space when a lower bound is not positive); the box is enforced with a
quadratic exterior penalty while the model itself only ever sees clipped,
feasible values.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import (
    ConsistencyError,
    GapError,
    InvalidParameters,
    ModelError,
    ParseError,
    UnknownParameter,
)
from .integrator import IntegrationOptions, ObsModel, default_obs_model, integrate, observed_series
from .model import COMPARTMENTS, PARAM_NAMES, ModelKind, ModelParams, State

PENALTY_WEIGHT = 1e6


@dataclass(frozen=True)
class ObservedSeries:
    dates: tuple
    daily_new: np.ndarray
    cumulative: np.ndarray | None = None

    def __len__(self):
        return len(self.dates)


def load_series(path) -> ObservedSeries:
    """Read ``date,daily_new[,cumulative]`` rows with contiguous ISO dates."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if header not in (["date", "daily_new"], ["date", "daily_new", "cumulative"]):
            raise ParseError(f"{path}: header must be date,daily_new[,cumulative], got {header}")
        has_cum = len(header) == 3
        dates, daily, cum = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                day = dt.date.fromisoformat(row[0].strip())
                new = float(row[1])
                total = float(row[2]) if has_cum else None
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            if not math.isfinite(new) or new < 0:
                raise ParseError(f"{path}:{lineno}: daily_new must be a nonnegative number")
            if dates and day != dates[-1] + dt.timedelta(days=1):
                expected = dates[-1] + dt.timedelta(days=1)
                raise GapError(f"{path}:{lineno}: expected {expected.isoformat()}, found {day.isoformat()}")
            dates.append(day)
            daily.append(new)
            cum.append(total)
    if not dates:
        raise ParseError(f"{path}: no data rows")
    cumulative = None
    if has_cum:
        cumulative = np.array(cum, dtype=float)
        steps = np.diff(cumulative)
        bad = np.flatnonzero(np.abs(steps - np.array(daily[1:])) > 1e-9 * np.maximum(1.0, np.abs(steps)))
        if bad.size:
            k = int(bad[0]) + 1
            raise ConsistencyError(
                f"{path}: cumulative changes by {steps[k - 1]:g} on {dates[k].isoformat()}"
                f" but daily_new is {daily[k]:g}"
            )
    return ObservedSeries(tuple(dates), np.array(daily, dtype=float), cumulative)


def _bounds(pair, name):
    try:
        lo, hi = (float(v) for v in pair)
    except (TypeError, ValueError):
        raise InvalidParameters(f"bounds for {name} must be a [lower, upper] pair") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise InvalidParameters(f"bounds for {name} must be finite with lower < upper")
    if lo < 0:
        raise InvalidParameters(f"bounds for {name} must be nonnegative")
    if name == "p" and hi > 1:
        raise InvalidParameters("bounds for p must lie within [0, 1]")
    return lo, hi


@dataclass(frozen=True)
class FitConfig:
    free: dict
    fixed: dict
    initial: dict
    free_initial: dict = field(default_factory=dict)
    start: dict = field(default_factory=dict)
    obs_model: ObsModel | None = None
    max_evals: int = 2000
    restarts: int = 2
    seed: int = 0
    jitter: float = 0.1
    loss: str = "daily"
    step: float = 0.1

    def __post_init__(self):
        free = {k: _bounds(v, k) for k, v in self.free.items()}
        free_init = {k: _bounds(v, k) for k, v in self.free_initial.items()}
        object.__setattr__(self, "free", free)
        object.__setattr__(self, "free_initial", free_init)
        fixed = dict(self.fixed)
        for name in set(free) | set(fixed):
            if name not in PARAM_NAMES:
                raise UnknownParameter(f"unknown parameter {name!r}")
        both = set(free) & set(fixed)
        if both:
            raise InvalidParameters(f"parameters both free and fixed: {sorted(both)}")
        missing = set(PARAM_NAMES) - set(free) - set(fixed)
        if missing:
            raise InvalidParameters(f"parameters neither free nor fixed: {sorted(missing)}")
        for name in set(free_init) | set(self.initial):
            if name not in COMPARTMENTS:
                raise UnknownParameter(f"unknown compartment {name!r}")
        both = set(free_init) & set(self.initial)
        missing = set(COMPARTMENTS) - set(free_init) - set(self.initial)
        if both or missing:
            raise InvalidParameters("every compartment must be exactly one of initial / free_initial")
        for name, value in self.start.items():
            lo, hi = {**free, **free_init}.get(name, (None, None))
            if lo is None:
                raise InvalidParameters(f"start value given for non-free quantity {name!r}")
            if not lo <= value <= hi:
                raise InvalidParameters(f"start value for {name} lies outside its bounds")
        if self.obs_model is not None:
            object.__setattr__(self, "obs_model", ObsModel(self.obs_model))
        if self.loss not in ("daily", "cumulative"):
            raise InvalidParameters('loss must be "daily" or "cumulative"')
        if self.max_evals < 1 or self.restarts < 0 or self.step <= 0:
            raise InvalidParameters("max_evals >= 1, restarts >= 0 and step > 0 are required")

    @property
    def is_short(self) -> bool:
        lam = self.fixed.get("lambda")
        return lam == 0 and "lambda" not in self.free

    @property
    def kind(self) -> ModelKind:
        return ModelKind.SHORT if self.is_short else ModelKind.LONG

    @property
    def names(self) -> list:
        return list(self.free) + list(self.free_initial)

    @property
    def bounds(self) -> list:
        return list(self.free.values()) + list(self.free_initial.values())

    def build(self, values) -> tuple:
        """Model parameters and initial state for a vector of free values."""
        n = len(self.free)
        pvals = {**self.fixed, **dict(zip(self.free, values[:n]))}
        xvals = {**self.initial, **dict(zip(self.free_initial, values[n:]))}
        return ModelParams.from_mapping(pvals), State.from_mapping(xvals)

    @classmethod
    def from_mapping(cls, data: dict) -> "FitConfig":
        allowed = {"free", "fixed", "initial", "free_initial", "start", "obs_model",
                   "max_evals", "restarts", "seed", "jitter", "loss", "step", "mode"}
        unknown = set(data) - allowed
        if unknown:
            raise InvalidParameters(f"unknown fit-config field(s): {sorted(unknown)}")
        data = dict(data)
        fixed = dict(data.get("fixed", {}))
        if data.pop("mode", None) == "short":
            fixed.setdefault("lambda", 0.0)
            fixed.setdefault("d", 0.0)
        data["fixed"] = fixed
        data.setdefault("free", {})
        data.setdefault("initial", {})
        return cls(**data)

    @classmethod
    def load(cls, path) -> "FitConfig":
        with open(path) as fh:
            return cls.from_mapping(json.load(fh))


def simulate_series(params: ModelParams, x0, n_days: int, kind, obs_model=None, step: float = 0.1) -> np.ndarray:
    opts = IntegrationOptions(t_end=float(n_days), step=step, output_stride=step)
    traj = integrate(kind, params, x0, opts)
    return observed_series(traj, obs_model)


def residual_loss(params: ModelParams, x0, obs: ObservedSeries, cfg: FitConfig) -> float:
    """Sum of squared daily residuals; integration failures give ``inf``."""
    obs_model = cfg.obs_model or default_obs_model(cfg.kind)
    try:
        sim = simulate_series(params, x0, len(obs), cfg.kind, obs_model, cfg.step)
    except (ModelError, FloatingPointError, OverflowError, ZeroDivisionError):
        return math.inf
    if cfg.loss == "cumulative":
        target = obs.cumulative if obs.cumulative is not None else np.cumsum(obs.daily_new)
        sim = np.cumsum(sim) + (target[0] - obs.daily_new[0])
    else:
        target = obs.daily_new
    value = float(np.sum((sim - target) ** 2))
    return value if math.isfinite(value) else math.inf


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    x0: State
    loss: float
    evaluations: int
    converged: bool
    runs: tuple = ()

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "initial": self.x0.as_dict(),
            "loss": self.loss,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "status": "ok" if self.converged else "BudgetExhausted",
            "restarts": [dict(r) for r in self.runs],
        }


class _Transform:
    def __init__(self, bounds):
        self.log = np.array([lo > 0 for lo, _ in bounds])
        lo = np.array([b[0] for b in bounds], dtype=float)
        hi = np.array([b[1] for b in bounds], dtype=float)
        self.lo = np.where(self.log, np.log(np.where(self.log, lo, 1.0)), lo)
        self.hi = np.where(self.log, np.log(np.where(self.log, hi, 1.0)), hi)

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(self.log, np.log(np.where(self.log, x, 1.0)), x)

    def inverse(self, u):
        return np.where(self.log, np.exp(u), u)


def fit(cfg: FitConfig, obs: ObservedSeries) -> FitResult:
    """Nelder-Mead least squares with ``cfg.restarts`` jittered restarts.

    Deterministic for a fixed ``cfg.seed``. When the best run used its whole
    evaluation budget the result is returned with ``converged=False``.
    """
    names, bounds = cfg.names, cfg.bounds
    if len(obs) < len(names):
        raise InvalidParameters(f"{len(obs)} observations cannot pin {len(names)} free quantities")
    if not names:
        params, x0 = cfg.build([])
        loss = residual_loss(params, x0, obs, cfg)
        return FitResult(params, x0, loss, 1, True, ({"start_loss": loss, "loss": loss, "evaluations": 1},))

    tr = _Transform(bounds)
    counter = [0]

    def objective(u):
        counter[0] += 1
        clipped = np.clip(u, tr.lo, tr.hi)
        penalty = PENALTY_WEIGHT * float(np.sum((u - clipped) ** 2))
        params, x0 = cfg.build(tr.inverse(clipped))
        return residual_loss(params, x0, obs, cfg) + penalty

    if cfg.start:
        start = np.array([cfg.start.get(n, math.nan) for n in names])
    else:
        start = np.full(len(names), math.nan)
    mid = 0.5 * (tr.lo + tr.hi)
    u_start = np.where(np.isnan(start), mid, tr.forward(np.nan_to_num(start, nan=1.0)))

    rng = np.random.default_rng(cfg.seed)
    starts = [u_start]
    for _ in range(cfg.restarts):
        jittered = u_start + rng.normal(0.0, cfg.jitter, len(names)) * (tr.hi - tr.lo)
        starts.append(np.clip(jittered, tr.lo, tr.hi))

    runs, best = [], None
    for u0 in starts:
        before = counter[0]
        start_loss = objective(u0)
        res = minimize(
            objective,
            u0,
            method="Nelder-Mead",
            options={"maxfev": cfg.max_evals, "xatol": 1e-10, "fatol": 1e-14, "adaptive": len(names) > 2},
        )
        u_best = np.clip(res.x, tr.lo, tr.hi)
        params, x0 = cfg.build(tr.inverse(u_best))
        loss = residual_loss(params, x0, obs, cfg)
        run = {
            "start": dict(zip(names, map(float, tr.inverse(u0)))),
            "start_loss": start_loss,
            "loss": loss,
            "evaluations": counter[0] - before,
            "converged": bool(res.success),
        }
        runs.append(run)
        if best is None or loss < best[0]:
            best = (loss, params, x0, bool(res.success))

    loss, params, x0, converged = best
    return FitResult(params, x0, loss, counter[0], converged, tuple(runs))
