"""Control reproduction numbers, their gradients and sensitivity indices."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DegenerateRc, InvalidFraction, InvalidParameters
from .model import ModelKind, ModelParams

SENSITIVITY_PARAMS = ("a", "beta", "b", "q1", "q2", "r1", "r2")
ANALYTIC_PARTIALS = ("b", "1-p", "q1", "q2")
FD_PARTIALS = ("a", "beta", "r1", "r2")


@dataclass(frozen=True)
class SensitivityReport:
    """Normalized sensitivity indices, ordered by decreasing magnitude."""

    indices: dict = field(default_factory=dict)
    rc: float = 0.0

    def __getitem__(self, name):
        return self.indices[name]

    def ranking(self) -> list:
        return list(self.indices)


def _rc_terms(v: dict, ratio: float) -> float:
    # v holds raw values so that finite differences may step outside validation
    c, d, beta = v["c"], v["d"], v["beta"]
    B1 = v["q1"] + v["r1"] + d
    B2 = v["q2"] + v["r2"] + d
    return ratio * (
        v["a"] * beta / (c + d)
        + v["p"] * c * beta / ((c + d) * B1)
        + v["b"] * c * beta * (1.0 - v["p"]) / ((c + d) * B2)
    )


def _raw(params: ModelParams) -> dict:
    out = params.as_dict()
    out.pop("mode")
    return out


def _ratio(params: ModelParams, kind: ModelKind, s_tilde, n_total) -> float:
    if ModelKind(kind) is not ModelKind.SHORT:
        if params.is_short:
            raise InvalidParameters("long-term reproduction number needs lambda, d > 0")
        return 1.0
    if not params.is_short:
        raise InvalidParameters("short-term reproduction number needs lambda = d = 0")
    if n_total is None and s_tilde is None:
        return 1.0
    if n_total is None or n_total <= 0:
        raise InvalidFraction("n_total must be given and positive")
    if s_tilde is None:
        s_tilde = n_total
    if s_tilde < 0 or s_tilde > n_total:
        raise InvalidFraction(f"s_tilde={s_tilde} must lie in [0, n_total={n_total}]")
    return s_tilde / n_total


def rc_long(params: ModelParams) -> float:
    """``a beta/(c+d) + p c beta/((c+d) B1) + b c beta (1-p)/((c+d) B2)``."""
    return _rc_terms(_raw(params), _ratio(params, ModelKind.LONG, None, None))


def rc_short(params: ModelParams, s_tilde: float | None = None, n_total: float | None = None) -> float:
    """Short-term reproduction number at the disease-free state with ``S = s_tilde``.

    Omitting both population arguments means ``s_tilde = n_total``.
    """
    return _rc_terms(_raw(params), _ratio(params, ModelKind.SHORT, s_tilde, n_total))


def rc(params: ModelParams, kind: ModelKind | str | None = None, s_tilde=None, n_total=None) -> float:
    if kind is None:
        kind = ModelKind.SHORT if params.is_short else ModelKind.LONG
    if ModelKind(kind) is ModelKind.SHORT:
        return rc_short(params, s_tilde, n_total)
    return rc_long(params)


def fd_step(value: float) -> float:
    return max(1e-6 * abs(value), 1e-9)


def rc_partial_fd(params: ModelParams, kind, name: str, s_tilde=None, n_total=None) -> float:
    """Central finite-difference partial of R_c in ``name``.

    ``name`` may be any rate constant or ``"1-p"``.
    """
    ratio = _ratio(params, ModelKind(kind), s_tilde, n_total)
    v = _raw(params)
    if name == "1-p":
        h = fd_step(1.0 - v["p"])
        up, dn = dict(v, p=v["p"] - h), dict(v, p=v["p"] + h)
    else:
        if name not in v:
            raise InvalidParameters(f"unknown parameter {name!r}")
        h = fd_step(v[name])
        up, dn = dict(v, **{name: v[name] + h}), dict(v, **{name: v[name] - h})
    return (_rc_terms(up, ratio) - _rc_terms(dn, ratio)) / (2.0 * h)


def rc_gradient(params: ModelParams, kind=None, s_tilde=None, n_total=None) -> dict:
    """Partials of R_c.

    ``b``, ``1-p``, ``q1`` and ``q2`` use closed forms; ``a``, ``beta``,
    ``r1`` and ``r2`` use central differences. ``p`` is ``-(1-p)``.
    """
    if kind is None:
        kind = ModelKind.SHORT if params.is_short else ModelKind.LONG
    kind = ModelKind(kind)
    ratio = _ratio(params, kind, s_tilde, n_total)
    c, d, beta, p, b = params.c, params.d, params.beta, params.p, params.b
    B1, B2 = params.B1, params.B2
    k = ratio * c * beta / (c + d)
    grad = {
        "b": k * (1.0 - p) / B2,
        "1-p": k * (b / B2 - 1.0 / B1),
        "q1": -k * p / B1**2,
        "q2": -k * b * (1.0 - p) / B2**2,
    }
    for name in FD_PARTIALS:
        grad[name] = rc_partial_fd(params, kind, name, s_tilde, n_total)
    grad["p"] = -grad["1-p"]
    return grad


def sensitivity_indices(params: ModelParams, kind=None, s_tilde=None, n_total=None) -> SensitivityReport:
    """Elasticities ``dR_c/dk * k / R_c`` for the seven controllable rates."""
    value = rc(params, kind, s_tilde, n_total)
    if value == 0:
        raise DegenerateRc("R_c = 0; sensitivity indices are undefined")
    a, b, c, p = params.a, params.b, params.c, params.p
    B1, B2 = params.B1, params.B2
    denom = a * B1 * B2 + p * c * B2 + b * c * (1.0 - p) * B1
    sym = p * c * B2 / (B1 * denom)
    asym = b * c * (1.0 - p) * B1 / (B2 * denom)
    xi = {
        "beta": 1.0,
        "a": a * B1 * B2 / denom,
        "b": b * c * (1.0 - p) * B1 / denom,
        "q1": -params.q1 * sym,
        "q2": -params.q2 * asym,
        "r1": -params.r1 * sym,
        "r2": -params.r2 * asym,
    }
    ordered = dict(sorted(xi.items(), key=lambda kv: -abs(kv[1])))
    return SensitivityReport(indices=ordered, rc=value)


def critical_b(params: ModelParams, kind=None) -> float:
    """Asymptomatic infectivity at which dR_c/d(1-p) changes sign: ``B2 / B1``."""
    return params.B2 / params.B1
