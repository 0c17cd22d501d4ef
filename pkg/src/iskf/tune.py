"""RMSE metrics and grid-search selection of the ISKF parameters."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InvalidParameter
from .filters import IskfParams

__all__ = [
    "TuneGrid",
    "TuneResult",
    "state_rmse",
    "pred_meas_rmse",
    "grid_search",
    "default_grid",
    "log_grid",
]


def log_grid(lo, hi, num=20):
    return np.logspace(math.log10(lo), math.log10(hi), num)


def state_rmse(truth, estimates):
    """``sqrt(mean_t |x[t] - x_hat[t]|^2)`` over aligned sequences."""
    truth = np.asarray(truth, dtype=float)
    estimates = np.asarray(estimates, dtype=float)
    if truth.shape != estimates.shape:
        raise DimensionMismatch(f"shapes differ: {truth.shape} vs {estimates.shape}")
    if truth.shape[0] == 0:
        raise EmptyInput("no samples")
    err = (truth - estimates).reshape(truth.shape[0], -1)
    return float(np.sqrt(np.mean(np.sum(err * err, axis=1))))


def pred_meas_rmse(model, posterior_estimates, measurements):
    """RMSE of the one-step measurement predictions ``y[t] - C A x_hat[t-1]``.

    ``posterior_estimates[i]`` must be the estimate available *before*
    ``measurements[i]`` arrives.
    """
    est = np.asarray(posterior_estimates, dtype=float)
    ys = np.asarray(measurements, dtype=float)
    if est.shape[0] != ys.shape[0]:
        raise DimensionMismatch(f"{est.shape[0]} estimates for {ys.shape[0]} measurements")
    if ys.shape[0] == 0:
        raise EmptyInput("no measurements")
    res = ys - est @ (model.C @ model.A).T
    return float(np.sqrt(np.mean(np.sum(res * res, axis=1))))


def _batch_scores(estimates, ys, model, truth, scoring):
    # estimates: (T + 1, B, n)
    if scoring == "meas":
        res = ys[:, None, :] - estimates[:-1] @ (model.C @ model.A).T
    else:
        res = truth[1:, None, :] - estimates[1:]
    with np.errstate(over="ignore", invalid="ignore"):
        return np.sqrt(np.mean(np.sum(res * res, axis=2), axis=0))


@dataclass(frozen=True)
class TuneGrid:
    """Candidate values; cells are visited with lambda_x outermost, eta innermost."""

    lambda_x_values: tuple
    lambda_y_values: tuple
    eta_values: tuple = (1.0,)
    k_tilde: int = 2

    def __post_init__(self):
        for name in ("lambda_x_values", "lambda_y_values", "eta_values"):
            vals = tuple(float(v) for v in np.atleast_1d(getattr(self, name)))
            if not vals:
                raise EmptyInput(f"{name} is empty")
            if not all(v > 0 for v in vals):
                raise InvalidParameter(f"{name} must be positive")
            object.__setattr__(self, name, vals)
        if int(self.k_tilde) < 1:
            raise InvalidParameter("k_tilde must be >= 1")

    def cells(self):
        """Arrays ``(lambda_x, lambda_y, eta)`` of all cells in iteration order."""
        lx, ly, eta = np.meshgrid(self.lambda_x_values, self.lambda_y_values, self.eta_values, indexing="ij")
        return lx.ravel(), ly.ravel(), eta.ravel()

    def __len__(self):
        return len(self.lambda_x_values) * len(self.lambda_y_values) * len(self.eta_values)


def default_grid(k_tilde=2, tune_eta=False):
    """20 log-spaced thresholds on [0.1, 10]; optionally 20 step sizes on [0.1, 100]."""
    lam = tuple(log_grid(0.1, 10.0))
    eta = tuple(log_grid(0.1, 100.0)) if tune_eta else (1.0,)
    return TuneGrid(lam, lam, eta, k_tilde)


@dataclass(frozen=True, eq=False)
class TuneResult:
    best_params: IskfParams
    best_score: float
    best_index: int
    lambda_x: np.ndarray = field(repr=False)
    lambda_y: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)
    scores: np.ndarray = field(repr=False)
    scoring: str = "meas"

    @property
    def table(self):
        """List of ``(IskfParams, score)`` pairs; failed cells score inf."""
        k = self.best_params.k_tilde
        return [
            (IskfParams(lx, ly, k, e, allow_large_step=True), float(s))
            for lx, ly, e, s in zip(self.lambda_x, self.lambda_y, self.eta, self.scores)
        ]


def grid_search(filter_runner, grid, tuning_traj, model, scoring="meas", chunk_size=512):
    """Pick the grid cell minimizing the prediction (or state) RMSE.

    ``filter_runner(measurements, lambda_x, lambda_y, eta)`` runs one filter
    per cell of the given 1-d parameter arrays and returns
    ``(estimates, ok)`` with estimates of shape ``(T + 1, B, n)``.  Cells
    where ``ok`` is False or the score is not finite get score ``inf``.

    With ``scoring="meas"`` only the measurements are used.  ``"state"``
    scores against the true states, as in an oracle sweep.
    """
    if scoring not in ("meas", "state"):
        raise InvalidParameter(f"scoring must be 'meas' or 'state', got {scoring!r}")
    lx, ly, eta = grid.cells()
    if lx.size == 0:
        raise EmptyInput("empty grid")
    ys = np.asarray(tuning_traj.measurements, dtype=float)
    truth = np.asarray(tuning_traj.states, dtype=float) if scoring == "state" else None
    scores = np.full(lx.size, np.inf)
    for lo in range(0, lx.size, chunk_size):
        sl = slice(lo, lo + chunk_size)
        est, ok = filter_runner(ys, lx[sl], ly[sl], eta[sl])
        s = _batch_scores(est, ys, model, truth, scoring)
        scores[sl] = np.where(ok & np.isfinite(s), s, np.inf)
    best = int(np.argmin(scores))  # first index among ties
    k = getattr(filter_runner, "k_tilde", grid.k_tilde)
    params = IskfParams(lx[best], ly[best], k, eta[best], allow_large_step=True)
    return TuneResult(params, float(scores[best]), best, lx, ly, eta, scores, scoring)
