"""Time stepping, peak detection and observation series for the three models."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InvalidParameters, NegativeStateBlowup, StepSizeUnderflow, ZeroPopulation
from .model import COMPARTMENTS, ModelKind, ModelParams, State, total_population

EPS_CLAMP = 1e-9
CSV_HEADER = ("t",) + COMPARTMENTS + ("cum_sym", "cum_asym")


class Method(str, enum.Enum):
    RK4 = "rk4"
    ADAPTIVE = "adaptive"


class ObsModel(str, enum.Enum):
    ALL_INCIDENCE = "all_incidence"
    SYMPTOMATIC_INCIDENCE = "symptomatic_incidence"
    DETECTIONS = "detections"


@dataclass(frozen=True)
class IntegrationOptions:
    t_end: float
    method: Method = Method.RK4
    step: float = 0.05
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    output_stride: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        for name in ("t_end", "step", "rel_tol", "abs_tol", "output_stride"):
            if not getattr(self, name) > 0:
                raise InvalidParameters(f"{name} must be positive")


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution. ``states`` has one row per time and columns S..R."""

    kind: ModelKind
    params: ModelParams
    times: np.ndarray
    states: np.ndarray
    cum_symptomatic: np.ndarray
    cum_asymptomatic: np.ndarray

    def __len__(self):
        return len(self.times)

    def compartment(self, name: str) -> np.ndarray:
        return self.states[:, COMPARTMENTS.index(name)]

    @property
    def final(self) -> State:
        return State(*map(float, self.states[-1]))

    def population(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def rows(self):
        for t, x, cs, ca in zip(self.times, self.states, self.cum_symptomatic, self.cum_asymptomatic):
            yield (t, *x, cs, ca)

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows():
            writer.writerow([f"{v:.10g}" for v in row])


class Peak(NamedTuple):
    time: float
    value: float

    @property
    def day(self) -> int:
        return math.floor(self.time)


def _augmented(kind: ModelKind, pr: ModelParams):
    """Right-hand side on (S, E, I, A, Q, R, cum_sym, cum_asym) as plain floats."""
    lam, d, beta, a, b, c, p = pr.lam, pr.d, pr.beta, pr.a, pr.b, pr.c, pr.p
    q1, q2, r1, r2, r3 = pr.q1, pr.q2, pr.r1, pr.r2, pr.r3
    B1, B2 = pr.B1, pr.B2
    fixed_denom = pr.S0 if kind is ModelKind.LIMITING else None

    def f(y):
        S, E, I, A, Q, R = y[0], y[1], y[2], y[3], y[4], y[5]
        n = fixed_denom if fixed_denom is not None else S + E + I + A + Q + R
        if n <= 0:
            raise ZeroPopulation("total population is zero")
        force = beta * S / n * (a * E + I + b * A)
        cE = c * E
        sym = p * cE
        return (
            lam - force - d * S,
            force - cE - d * E,
            sym - B1 * I,
            cE - sym - B2 * A,
            q1 * I + q2 * A - (r3 + d) * Q,
            r1 * I + r2 * A + r3 * Q - d * R,
            sym,
            cE - sym,
        )

    return f


def _check_kind(kind: ModelKind, params: ModelParams) -> None:
    if kind is ModelKind.SHORT and not params.is_short:
        raise InvalidParameters("short-term model requires lambda = d = 0")
    if kind is not ModelKind.SHORT and params.is_short:
        raise InvalidParameters(f"{kind.value} model requires lambda > 0 and d > 0")


def _clamp(y: list, t: float) -> list:
    for i in range(6):
        v = y[i]
        if v < 0.0:
            if v < -EPS_CLAMP:
                raise NegativeStateBlowup(f"{COMPARTMENTS[i]} = {v:.3g} at t = {t:.6g}")
            y[i] = 0.0
    return y


def _grid_ratio(big: float, small: float, what: str) -> int:
    k = round(big / small)
    if k < 1 or abs(k * small - big) > 1e-9 * max(big, 1.0):
        raise InvalidParameters(f"{what} must be an integer multiple of the step")
    return k


def _rk4(f, y0, h, n_steps, stride):
    n_out = n_steps // stride + 1
    out = np.empty((n_out, 8))
    y = list(y0)
    out[0] = y
    h2, h6 = 0.5 * h, h / 6.0
    j = 1
    for step in range(1, n_steps + 1):
        k1 = f(y)
        k2 = f([yi + h2 * ki for yi, ki in zip(y, k1)])
        k3 = f([yi + h2 * ki for yi, ki in zip(y, k2)])
        k4 = f([yi + h * ki for yi, ki in zip(y, k3)])
        y = [yi + h6 * (a + 2.0 * b + 2.0 * c + d) for yi, a, b, c, d in zip(y, k1, k2, k3, k4)]
        _clamp(y, step * h)
        if step % stride == 0:
            out[j] = y
            j += 1
    return out


def _adaptive(f, y0, opts, times):
    sol = solve_ivp(
        lambda t, y: f(y),
        (0.0, opts.t_end),
        list(y0),
        method="DOP853",
        t_eval=times,
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
    )
    if sol.status != 0:
        raise StepSizeUnderflow(sol.message)
    out = sol.y.T.copy()
    for row, t in zip(out, times):
        _clamp(row, t)
    return out


def integrate(kind, params: ModelParams, x0, opts: IntegrationOptions) -> Trajectory:
    """Solve the selected model from ``x0`` over ``[0, opts.t_end]``.

    Components that dip into ``[-EPS_CLAMP, 0)`` are reset to zero; anything
    more negative raises :class:`NegativeStateBlowup`.
    """
    kind = ModelKind(kind)
    _check_kind(kind, params)
    x0 = [float(v) for v in x0]
    if len(x0) != 6 or min(x0) < 0:
        raise InvalidParameters("initial state must have six nonnegative components")
    if kind is not ModelKind.LIMITING and total_population(x0) <= 0:
        raise ZeroPopulation("total population is zero")
    f = _augmented(kind, params)
    y0 = x0 + [0.0, 0.0]
    if opts.method is Method.RK4:
        n_steps = _grid_ratio(opts.t_end, opts.step, "t_end")
        stride = _grid_ratio(opts.output_stride, opts.step, "output_stride")
        if n_steps % stride:
            raise InvalidParameters("t_end must be a multiple of output_stride")
        out = _rk4(f, y0, opts.step, n_steps, stride)
        times = np.arange(out.shape[0]) * (stride * opts.step)
    else:
        n_out = _grid_ratio(opts.t_end, opts.output_stride, "t_end")
        times = np.linspace(0.0, opts.t_end, n_out + 1)
        out = _adaptive(f, y0, opts, times)
    return Trajectory(kind, params, times, out[:, :6], out[:, 6], out[:, 7])


def peak(traj: Trajectory, compartment: str) -> Peak:
    """Earliest sample at which ``compartment`` attains its maximum."""
    if compartment not in ("E", "I", "A", "Q"):
        raise InvalidParameters(f"peak compartment must be one of E, I, A, Q, got {compartment!r}")
    series = traj.compartment(compartment)
    k = int(np.argmax(series))
    return Peak(float(traj.times[k]), float(series[k]))


def steady_state_distance(traj: Trajectory, target) -> float:
    """Worst sup-norm gap to ``target`` over the last 10% of samples, scaled by
    ``max(1, |target|_inf)``."""
    target = np.asarray(target, dtype=float)
    n = len(traj.times)
    tail = traj.states[n - max(1, math.ceil(0.1 * n)):]
    return float(np.max(np.abs(tail - target)) / max(1.0, float(np.max(np.abs(target)))))


def _flux(traj: Trajectory, obs_model: ObsModel) -> np.ndarray:
    pr = traj.params
    if obs_model is ObsModel.ALL_INCIDENCE:
        return pr.c * traj.compartment("E")
    if obs_model is ObsModel.SYMPTOMATIC_INCIDENCE:
        return pr.p * pr.c * traj.compartment("E")
    return pr.q1 * traj.compartment("I") + pr.q2 * traj.compartment("A")


def default_obs_model(kind) -> ObsModel:
    if ModelKind(kind) is ModelKind.SHORT:
        return ObsModel.ALL_INCIDENCE
    return ObsModel.SYMPTOMATIC_INCIDENCE


def observed_series(traj: Trajectory, obs_model=None) -> np.ndarray:
    """Daily counts: the integral of the chosen flow over each ``[k, k+1)``."""
    obs_model = default_obs_model(traj.kind) if obs_model is None else ObsModel(obs_model)
    stride = float(traj.times[1] - traj.times[0]) if len(traj.times) > 1 else 1.0
    per_day = _grid_ratio(1.0, stride, "one day")
    flux = _flux(traj, obs_model)
    n_days = (len(flux) - 1) // per_day
    blocks = flux[: n_days * per_day + 1]
    inner = blocks[:-1].reshape(n_days, per_day)
    right = blocks[per_day::per_day]
    # trapezoid: full weight on interior points, half on the two ends of each day
    return stride * (inner.sum(axis=1) - 0.5 * inner[:, 0] + 0.5 * right)
