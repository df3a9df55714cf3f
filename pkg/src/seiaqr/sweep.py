"""Grid evaluation of derived quantities over one or two swept inputs."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import InvalidParameters, UnknownParameter
from .final_size import solve_final_size
from .integrator import IntegrationOptions, integrate, peak
from .model import COMPARTMENTS, PARAM_NAMES, ModelKind, ModelParams, State, default_kind
from .reproduction import rc

QUANTITIES = ("rc", "peak_day", "peak_value", "final_size", "cum_sym", "cum_asym")
DYNAMIC = ("peak_day", "peak_value", "cum_sym", "cum_asym")


@dataclass(frozen=True)
class SweepSpec:
    name: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.name not in PARAM_NAMES + COMPARTMENTS + ("1-p",):
            raise UnknownParameter(f"cannot sweep unknown quantity {self.name!r}")
        if self.steps < 1:
            raise InvalidParameters("a sweep needs at least one grid point")

    @classmethod
    def parse(cls, text: str) -> "SweepSpec":
        """``name:lo:hi:steps``; ``steps`` counts grid points."""
        parts = text.split(":")
        if len(parts) != 4:
            raise InvalidParameters(f"sweep spec must be name:lo:hi:steps, got {text!r}")
        try:
            return cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))
        except ValueError:
            raise InvalidParameters(f"sweep spec must be name:lo:hi:steps, got {text!r}") from None

    def grid(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        # rounding keeps 0.217 + k * 0.001 printable as written
        return np.round(np.linspace(self.lo, self.hi, self.steps), 12)


@dataclass(frozen=True)
class SweepTask:
    params: ModelParams
    x0: State | None
    quantity: str
    kind: ModelKind
    compartment: str = "A"
    t_end: float = 600.0
    step: float = 0.05


def apply(params: ModelParams, x0, assignment: dict):
    pvals, xvals = {}, {}
    for name, value in assignment.items():
        if name == "1-p":
            pvals["p"] = 1.0 - value
        elif name in PARAM_NAMES:
            pvals[name] = value
        else:
            xvals[name] = value
    params = params.with_values(**pvals) if pvals else params
    if xvals:
        if x0 is None:
            raise InvalidParameters("sweeping an initial condition needs an initial state")
        x0 = x0._replace(**xvals)
    return params, x0


def evaluate(task: SweepTask, assignment: dict) -> float:
    params, x0 = apply(task.params, task.x0, assignment)
    q = task.quantity
    if q == "rc":
        return rc(params, task.kind)
    if x0 is None:
        raise InvalidParameters(f"quantity {q!r} needs an initial state")
    if q == "final_size":
        return solve_final_size(params, x0).fraction
    opts = IntegrationOptions(t_end=task.t_end, step=task.step, output_stride=task.step)
    traj = integrate(task.kind, params, x0, opts)
    if q == "peak_day":
        return float(peak(traj, task.compartment).day)
    if q == "peak_value":
        return peak(traj, task.compartment).value
    if q == "cum_sym":
        return float(traj.cum_symptomatic[-1])
    return float(traj.cum_asymptomatic[-1])


def _evaluate_packed(args):
    return evaluate(*args)


def run_sweep(params: ModelParams, specs, quantity: str, x0=None, kind=None,
              compartment: str = "A", t_end: float = 600.0, step: float = 0.05,
              workers: int | None = None) -> list:
    """Rows ``(v1[, v2], value)`` in grid order.

    Integration-backed quantities fan out over a process pool; ``map`` keeps
    the output order independent of completion order.
    """
    if quantity not in QUANTITIES:
        raise InvalidParameters(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")
    if not 1 <= len(specs) <= 2:
        raise InvalidParameters("sweep takes one or two parameters")
    if quantity == "final_size" and not params.is_short:
        raise InvalidParameters("final_size is defined for the short-term model only")
    kind = default_kind(params) if kind is None else ModelKind(kind)
    task = SweepTask(params, None if x0 is None else State(*x0), quantity, kind, compartment, t_end, step)
    names = [s.name for s in specs]
    points = list(product(*(s.grid() for s in specs)))
    jobs = [(task, dict(zip(names, map(float, pt)))) for pt in points]
    if workers is None:
        workers = min(os.cpu_count() or 1, len(jobs)) if quantity in DYNAMIC else 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_evaluate_packed, jobs))
    else:
        values = [evaluate(*job) for job in jobs]
    return [tuple(map(float, pt)) + (v,) for pt, v in zip(points, values)]
