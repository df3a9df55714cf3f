"""Final size of the short-term (closed population) model."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidFraction, InvalidParameters, NoConvergence
from .model import ModelParams, State, total_population
from .reproduction import rc_short

MAX_ITER = 10_000
# switch from the fixed-point map to bisection once it has clearly stalled
FIXED_POINT_BUDGET = 500


@dataclass(frozen=True)
class FinalSizeResult:
    z: float
    s_infinity: float
    fraction: float
    iterations: int
    residual: float
    n_total: float
    total_ever_infected: float

    def as_dict(self) -> dict:
        return {
            "Z": self.z,
            "S_inf": self.s_infinity,
            "F": self.fraction,
            "total_ever_infected": self.total_ever_infected,
            "iterations": self.iterations,
            "residual": self.residual,
        }


def _exponent_parts(params: ModelParams, x0, s_tilde):
    if not params.is_short:
        raise InvalidParameters("final size is defined for the short-term model only")
    n = total_population(x0)
    if s_tilde is None:
        s_tilde = n
    if not 0 < s_tilde <= n:
        raise InvalidFraction(f"s_tilde must lie in (0, N={n}], got {s_tilde}")
    r = rc_short(params, s_tilde, n)
    _, E0, I0, A0 = x0[0], x0[1], x0[2], x0[3]
    seed = params.beta * I0 / (n * (params.q1 + params.r1))
    seed += params.beta * params.b * A0 / (n * (params.q2 + params.r2))
    return n, s_tilde, r, E0, seed


def final_size_residual(params: ModelParams, x0, s_tilde, z: float) -> float:
    """``z - S(0) (1 - exp(-[(z + E0)/s_tilde R_c + seed terms]))`` in persons."""
    n, s_tilde, r, E0, seed = _exponent_parts(params, x0, s_tilde)
    return z + x0[0] * math.expm1(-((z + E0) / s_tilde * r + seed))


def solve_final_size(params: ModelParams, x0, s_tilde: float | None = None,
                     damping: float = 1.0) -> FinalSizeResult:
    """Largest root ``Z = S(0) - S(inf)`` of the final-size relation.

    Iterates ``z <- S0 (1 - exp(-...))`` downward from ``z = S(0)``; the map is
    increasing and bounded by ``S(0)`` so the iterates decrease monotonically.
    If that stalls, the remaining bracket is bisected. A few Newton steps
    then remove the error left by the contraction-rate-dependent stop rule.
    """
    x0 = State(*map(float, x0))
    n, s_tilde, r, E0, seed = _exponent_parts(params, x0, s_tilde)
    S0 = x0.S
    tol = 1e-9 * max(1.0, S0)

    k = r / s_tilde

    def T(z):
        return -S0 * math.expm1(-((z + E0) * k + seed))

    if E0 == 0 and seed == 0 and S0 * k <= 1:
        # seedless and T'(0) <= 1: the concave map has no root above zero
        return _result(x0, n, 0.0, 0, 0.0)

    z = S0
    it = 0
    converged = False
    while it < min(FIXED_POINT_BUDGET, MAX_ITER):
        it += 1
        nxt = z + damping * (T(z) - z)
        if nxt > z + tol:
            raise NoConvergence(f"fixed-point iterates increased at iteration {it}", (nxt, z))
        if abs(nxt - z) < tol:
            z = nxt
            converged = True
            break
        z = nxt

    if not converged:
        hi = z  # residual(hi) >= 0: hi lies above the largest root
        lo = 0.0
        if T(lo) - lo <= 0:
            # seedless outbreak: z = 0 is a root too; step down towards it to bracket the larger one
            lo = hi
            while lo > tol and T(lo) - lo <= 0:
                lo *= 0.5
                it += 1
        while hi - lo >= tol:
            if it >= MAX_ITER:
                raise NoConvergence("final-size solver exhausted its iteration budget", (lo, hi))
            it += 1
            mid = 0.5 * (lo + hi)
            if T(mid) - mid > 0:
                lo = mid
            else:
                hi = mid
        z = 0.5 * (lo + hi)

    # |dz| < tol understates the error when T'(z) is close to 1; Newton on the
    # convex residual z - T(z) approaches the root from above and settles it
    for _ in range(50):
        slope = 1.0 - (S0 - T(z)) * k
        if slope <= 0:
            break
        dz = (z - T(z)) / slope
        z -= dz
        it += 1
        if abs(dz) < 1e-15 * max(1.0, z):
            break

    z = min(max(z, 0.0), S0)
    return _result(x0, n, z, it, z - T(z))


def _result(x0: State, n: float, z: float, iterations: int, residual: float) -> FinalSizeResult:
    seeded = x0.E + x0.I + x0.A + x0.Q
    return FinalSizeResult(
        z=z,
        s_infinity=x0.S - z,
        fraction=z / n,
        iterations=iterations,
        residual=residual,
        n_total=n,
        total_ever_infected=z + seeded,
    )
