"""Long-term and short-term SEIAQR epidemic models with quarantine and
asymptomatic infection."""

from .equilibria import (
    EquilibriumReport,
    PersistenceBounds,
    Stability,
    classify_stability,
    disease_free_long,
    disease_free_short,
    endemic_long,
    jacobian,
    lyapunov_v0,
    lyapunov_vstar,
    persistence_bounds,
    short_char_coeffs,
)
from .final_size import FinalSizeResult, final_size_residual, solve_final_size
from .integrator import (
    IntegrationOptions,
    Method,
    ObsModel,
    Trajectory,
    integrate,
    observed_series,
    peak,
    steady_state_distance,
)
from .model import (
    ModelKind,
    ModelParams,
    State,
    fixture_params,
    fixture_state,
    load_params,
    load_state,
    rhs_limiting,
    rhs_long,
    rhs_short,
    total_population,
)
from .reproduction import critical_b, rc, rc_gradient, rc_long, rc_short, sensitivity_indices

__version__ = "0.1.0"
