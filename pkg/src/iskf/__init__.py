"""Iteratively saturated Kalman filtering.

Outlier-robust state estimation for linear time-invariant systems: the
standard and steady-state Kalman filters, their iteratively saturated
variants, a converged Huber-regression reference, a simulator with
outlier-corrupted noise, and grid-search tuning.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .model import OutlierSpec, SystemModel, build_model, cstr_model, validate_model, vehicle_model  # noqa: E402
from .satfun import INF, Whitener, phi, phi_grad, saturate  # noqa: E402
from .riccati import (  # noqa: E402
    GainSet,
    covariance_predict,
    dare_residual,
    gain_and_update,
    scaling_matrix,
    solve_steady,
)
from .filters import (  # noqa: E402
    FilterState,
    IskfParams,
    huberized_solve,
    initial_state,
    iskf_iterates,
    iskf_step,
    kf_step,
    masked_update,
    objective,
    objective_grad,
    run_huberized,
    run_iskf,
    run_kf,
    run_ss_iskf,
    run_ss_kf,
    ss_iskf_step,
    ss_kf_step,
)
from .sim import Trajectory, simulate  # noqa: E402
from .tune import TuneGrid, TuneResult, default_grid, grid_search, log_grid, pred_meas_rmse, state_rmse  # noqa: E402
from .batch import HuberizedRunner, SteadyIskfRunner  # noqa: E402
