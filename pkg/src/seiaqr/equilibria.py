"""Equilibria, persistence bounds, linear stability and Lyapunov functions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidTheta, NoEndemicEquilibrium, NotAnEquilibrium
from .model import ModelKind, ModelParams, State, rhs, total_population
from .reproduction import rc_long, rc_short

TOL_EIG = 1e-7
ENDEMIC_MARGIN = 1e-12


class Stability(str, enum.Enum):
    STABLE = "LocallyAsymptoticallyStable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"


@dataclass(frozen=True)
class EquilibriumReport:
    point: State
    eigenvalues: tuple
    classification: Stability
    max_real_part: float

    def as_dict(self) -> dict:
        return {
            "point": self.point.as_dict(),
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "classification": self.classification.value,
            "max_real_part": self.max_real_part,
        }


@dataclass(frozen=True)
class PersistenceBounds:
    """Lower bounds on liminf S(t) when limsup E(t) <= theta E*.

    ``s_bar_rate`` and ``s_breve_rate`` are the same bounds written in terms of
    the rate constants rather than R_c; they must agree with the reduced forms.
    """

    theta: float
    s_bar: float
    s_breve: float
    s_star: float
    s_bar_rate: float
    s_breve_rate: float


def disease_free_long(params: ModelParams) -> State:
    return State(params.S0, 0.0, 0.0, 0.0, 0.0, 0.0)


def disease_free_short(n_total: float, s_tilde: float | None = None) -> State:
    """Member ``(s_tilde, 0, 0, 0, 0, n_total - s_tilde)`` of the disease-free family."""
    if s_tilde is None:
        s_tilde = n_total
    return State(s_tilde, 0.0, 0.0, 0.0, 0.0, n_total - s_tilde)


def endemic_long(params: ModelParams) -> State:
    """Closed-form positive equilibrium V* of the long-term model."""
    r = rc_long(params)
    if r <= 1.0 + ENDEMIC_MARGIN:
        raise NoEndemicEquilibrium(f"R_c = {r:.6g} <= 1: no endemic equilibrium")
    c, d, p = params.c, params.d, params.p
    E = params.lam * (r - 1.0) / ((c + d) * r)
    I = p * c * E / params.B1
    A = (1.0 - p) * c * E / params.B2
    Q = (params.q1 * I + params.q2 * A) / (params.r3 + d)
    R = (params.r1 * I + params.r2 * A + params.r3 * Q) / d
    return State(params.S0 / r, E, I, A, Q, R)


def persistence_bounds(params: ModelParams, theta: float) -> PersistenceBounds:
    if not 0.0 < theta < 1.0:
        raise InvalidTheta(f"theta must lie in (0, 1), got {theta}")
    star = endemic_long(params)
    r = rc_long(params)
    S0 = params.S0
    s_bar = S0 / (theta * (r - 1.0) + 1.0)
    s_breve = S0 / (1.0 + theta * (r - 1.0) / (r - theta * (r - 1.0)))
    force = params.beta * (params.a * star.E + star.I + params.b * star.A) / S0
    s_bar_rate = params.lam / (theta * force + params.d)
    s_breve_rate = (params.lam - theta * (params.c + params.d) * star.E) / params.d
    return PersistenceBounds(theta, s_bar, s_breve, star.S, s_bar_rate, s_breve_rate)


def _population_scale(params: ModelParams, x) -> float:
    return total_population(x) if params.is_short else params.S0


def jacobian(params: ModelParams, kind, x) -> np.ndarray:
    """Central-difference Jacobian of the selected right-hand side at ``x``."""
    kind = ModelKind(kind)
    x = np.asarray(x, dtype=float)
    floor = 1e-9 * _population_scale(params, x)
    J = np.empty((6, 6))
    for j in range(6):
        h = max(1e-6 * abs(x[j]), floor)
        up, dn = x.copy(), x.copy()
        up[j] += h
        dn[j] -= h
        J[:, j] = (rhs(kind, params, up) - rhs(kind, params, dn)) / (2.0 * h)
    return J


def classify_stability(params: ModelParams, kind, x, tol_eig: float = TOL_EIG) -> EquilibriumReport:
    kind = ModelKind(kind)
    x = State(*map(float, x))
    residual = float(np.max(np.abs(rhs(kind, params, x))))
    if residual > 1e-6 * max(params.lam, 1.0):
        raise NotAnEquilibrium(f"|rhs| = {residual:.3g} persons/day at {tuple(x)}")
    eig = np.linalg.eigvals(jacobian(params, kind, x))
    eig = tuple(sorted((complex(z) for z in eig), key=lambda z: (z.real, z.imag)))
    top = max(z.real for z in eig)
    if top < -tol_eig:
        label = Stability.STABLE
    elif top > tol_eig:
        label = Stability.UNSTABLE
    else:
        label = Stability.MARGINAL
    return EquilibriumReport(x, eig, label, top)


def short_char_coeffs(params: ModelParams, s_tilde=None, n_total=None) -> tuple:
    """Coefficients ``(a1, a2, a3)`` of the cubic factor of the characteristic
    polynomial at a short-term disease-free equilibrium."""
    r = rc_short(params, s_tilde, n_total)
    ratio = 1.0 if n_total is None else (n_total if s_tilde is None else s_tilde) / n_total
    c, beta, p, b = params.c, params.beta, params.p, params.b
    h1 = params.q1 + params.r1
    h2 = params.q2 + params.r2
    sym = ratio * p * c * beta
    asym = ratio * b * c * beta * (1.0 - p)
    a1 = c * (1.0 - r) + h1 + h2 + sym / h1 + asym / h2
    a2 = (h1 + h2) * c * (1.0 - r) + h2 * sym / h1 + h1 * asym / h2 + h1 * h2
    a3 = h1 * h2 * c * (1.0 - r)
    return a1, a2, a3


def g(x: float) -> float:
    """``x - 1 - ln x`` without cancellation near ``x = 1``."""
    if x <= 0:
        raise DomainError(f"g(x) needs x > 0, got {x}")
    if x < 0.5:
        return x - 1.0 - math.log(x)
    u = x - 1.0
    if abs(u) < 1e-3:
        return u * u * (0.5 - u * (1 / 3 - u * (0.25 - u * (0.2 - u / 6))))
    return u - math.log1p(u)


def lyapunov_v0(params: ModelParams, x) -> float:
    """Lyapunov function centred on the disease-free equilibrium (persons)."""
    S, E, I, A = x[0], x[1], x[2], x[3]
    if S <= 0:
        raise DomainError("lyapunov_v0 needs S > 0")
    S0 = params.S0
    return S0 * g(S / S0) + E + params.beta / params.B1 * I + params.beta * params.b / params.B2 * A


def lyapunov_vstar(params: ModelParams, x) -> float:
    """Lyapunov function centred on the endemic equilibrium V* (persons)."""
    star = endemic_long(params)
    S, E, I, A = (float(v) for v in x[:4])
    if min(S, E, I, A) <= 0:
        raise DomainError("lyapunov_vstar needs S, E, I, A > 0")
    S0, beta, c, p = params.S0, params.beta, params.c, params.p
    value = star.S * g(S / star.S) + star.E * g(E / star.E)
    if star.I > 0:
        value += star.S * beta * star.I / (S0 * p * c * star.E) * star.I * g(I / star.I)
    if star.A > 0:
        value += star.S * beta * params.b * star.A / (S0 * (1 - p) * c * star.E) * star.A * g(A / star.A)
    return value
