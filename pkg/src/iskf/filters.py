"""Kalman and iteratively saturated Kalman filters.

Four per-step estimators are provided: the time-varying KF and ISKF, which
carry a posterior covariance in :class:`FilterState`, and their steady-state
counterparts, which only carry the mean and use a precomputed
:class:`~iskf.riccati.GainSet`.

The ISKF update runs ``k_tilde`` iterations of::

    x[k] = x[k-1] + eta * K sigma(y - C x[k-1]) + eta * (I - K C) rho(x[0] - x[k-1])

starting from the prediction ``x[0] = A x_prev``.  ``sigma`` saturates the
innovation in the ``V`` metric at ``lambda_y`` and ``rho`` saturates the
correction in the prior-covariance metric at ``lambda_x``.  Each iteration
is a scaled gradient step on the convex objective computed by
:func:`objective`.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, NoConvergence
from .riccati import covariance_predict, gain_and_update, gains_from_prior
from .satfun import INF, check_threshold, phi, phi_grad, saturate

__all__ = [
    "IskfParams",
    "FilterState",
    "initial_state",
    "kf_step",
    "iskf_step",
    "ss_kf_step",
    "ss_iskf_step",
    "iskf_iterates",
    "objective",
    "objective_grad",
    "huberized_solve",
    "masked_update",
    "run_kf",
    "run_iskf",
    "run_ss_kf",
    "run_ss_iskf",
    "run_huberized",
]


def _parse_threshold(v):
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf", "infinity"):
            return INF
        raise InvalidParameter(f"unrecognised threshold {v!r}")
    return check_threshold(v)


@dataclass(frozen=True)
class IskfParams:
    """Thresholds, iteration count and step size of the ISKF.

    Thresholds accept ``math.inf`` or the string ``"inf"``.  The step size
    must lie in (0, 2), where every iteration is a descent step; set
    ``allow_large_step`` to admit larger values, as used by the step-size
    grid search.
    """

    lambda_x: float = INF
    lambda_y: float = INF
    k_tilde: int = 1
    eta: float = 1.0
    allow_large_step: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "lambda_x", _parse_threshold(self.lambda_x))
        object.__setattr__(self, "lambda_y", _parse_threshold(self.lambda_y))
        if int(self.k_tilde) != self.k_tilde or self.k_tilde < 1:
            raise InvalidParameter(f"k_tilde must be a positive integer, got {self.k_tilde}")
        object.__setattr__(self, "k_tilde", int(self.k_tilde))
        eta = float(self.eta)
        upper = INF if self.allow_large_step else 2.0
        if not (0.0 < eta < upper):
            raise InvalidParameter(f"eta must lie in (0, {upper}), got {eta}")
        object.__setattr__(self, "eta", eta)

    def to_dict(self):
        def enc(v):
            return "inf" if v == INF else v

        return {
            "lambda_x": enc(self.lambda_x),
            "lambda_y": enc(self.lambda_y),
            "k_tilde": self.k_tilde,
            "eta": self.eta,
        }


@dataclass(frozen=True, eq=False)
class FilterState:
    """Posterior mean (and, for time-varying filters, covariance) at time ``t``."""

    x_hat: np.ndarray
    P_post: Optional[np.ndarray] = None
    t: int = 0


def initial_state(gains, x0=None):
    """Start at ``x0`` (default zero) with the steady-state posterior covariance."""
    n = gains.model.n
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    return FilterState(x, np.array(gains.P), 0)


def _check_y(y, p):
    y = np.asarray(y, dtype=float)
    if y.shape != (p,):
        raise DimensionMismatch(f"measurement must have shape ({p},), got {y.shape}")
    return y


def _iterate(x_pred, y, gains, params, callback=None, C=None):
    C = gains.model.C if C is None else C
    K, IKC = gains.K, gains.IKC
    vw, sw = gains.v_whitener, gains.sigma_whitener
    lx, ly, eta = params.lambda_x, params.lambda_y, params.eta
    x = x_pred
    for _ in range(params.k_tilde):
        s = saturate(y - C @ x, vw, ly)
        r = saturate(x_pred - x, sw, lx)
        x = x + eta * (K @ s + IKC @ r)
        if callback is not None:
            callback(x)
    return x


def iskf_iterates(x_pred, y, gains, params):
    """All iterates ``x[0], ..., x[k_tilde]`` of one steady-state update."""
    out = [np.array(x_pred, dtype=float)]
    _iterate(out[0], _check_y(y, gains.model.p), gains, params, out.append)
    return np.array(out)


def kf_step(state, y, model):
    """One predict/update cycle of the standard time-varying Kalman filter."""
    y = _check_y(y, model.p)
    Sigma = covariance_predict(state.P_post, model)
    K, P = gain_and_update(Sigma, model)
    x_pred = model.A @ state.x_hat
    x = x_pred + K @ (y - model.C @ x_pred)
    return FilterState(x, P, state.t + 1)


def iskf_step(state, y, model, params):
    """One step of the time-varying ISKF.

    The covariance recursion is the standard one and does not depend on ``y``.

    Raises:
        SingularPriorCovariance: the prior covariance cannot be whitened.
    """
    y = _check_y(y, model.p)
    gains = gains_from_prior(covariance_predict(state.P_post, model), model)
    x_pred = model.A @ state.x_hat
    x = _iterate(x_pred, y, gains, params)
    return FilterState(x, gains.P, state.t + 1)


def ss_kf_step(x_hat, y, gains, model=None):
    """Steady-state KF: ``A x + K (y - C A x)``."""
    model = gains.model if model is None else model
    y = _check_y(y, model.p)
    x_pred = model.A @ x_hat
    return x_pred + gains.K @ (y - model.C @ x_pred)


def ss_iskf_step(x_hat, y, gains, params):
    """Steady-state ISKF; matrix-vector products and cached triangular solves only."""
    model = gains.model
    y = _check_y(y, model.p)
    return _iterate(model.A @ x_hat, y, gains, params)


def _thresholds(params):
    return params.lambda_x, params.lambda_y


def objective(x, x_pred, y, gains, params):
    """Robust MAP objective of one update.

    ``phi(Sigma^-1/2 (x - x_pred); lambda_x) + phi(V^-1/2 (y - C x); lambda_y)``
    """
    lx, ly = _thresholds(params)
    C = gains.model.C
    a = gains.sigma_whitener.apply(np.asarray(x, dtype=float) - x_pred)
    b = gains.v_whitener.apply(np.asarray(y, dtype=float) - C @ x)
    return phi(a, lx) + phi(b, ly)


def objective_grad(x, x_pred, y, gains, params):
    """Gradient of :func:`objective` with respect to ``x``."""
    lx, ly = _thresholds(params)
    C = gains.model.C
    sw, vw = gains.sigma_whitener, gains.v_whitener
    a = sw.apply(np.asarray(x, dtype=float) - x_pred)
    b = vw.apply(np.asarray(y, dtype=float) - C @ x)
    return sw.apply_transpose(phi_grad(a, lx)) - C.T @ vw.apply_transpose(phi_grad(b, ly))


def huberized_solve(x_pred, y, gains, params, tol=1e-12, max_iter=100_000):
    """Minimize :func:`objective` by unit scaled-gradient steps from ``x_pred``.

    Each step is ``K sigma(y - C x) + (I - K C) rho(x_pred - x)``, the negated
    scaled gradient; iteration stops once its norm is below
    ``tol * (1 + |x|)``.  ``params.k_tilde`` and ``params.eta`` are ignored.

    Raises:
        NoConvergence: the tolerance was not met within ``max_iter`` steps.
    """
    if not tol > 0:
        raise InvalidParameter(f"tol must be positive, got {tol}")
    model = gains.model
    y = _check_y(y, model.p)
    x_pred = np.asarray(x_pred, dtype=float)
    C, K, IKC = model.C, gains.K, gains.IKC
    vw, sw = gains.v_whitener, gains.sigma_whitener
    lx, ly = _thresholds(params)
    x = x_pred
    for _ in range(max_iter):
        step = K @ saturate(y - C @ x, vw, ly) + IKC @ saturate(x_pred - x, sw, lx)
        x = x + step
        if np.linalg.norm(step) <= tol * (1.0 + np.linalg.norm(x)):
            return x
    raise NoConvergence(f"scaled gradient did not reach tol={tol} in {max_iter} steps")


def masked_update(state, y_obs, mask, model, params):
    """Time-varying ISKF step using only the measured entries of ``y``.

    ``y_obs`` is either the full length-``p`` vector (unmeasured entries are
    ignored) or just the measured entries in order.  With nothing measured the
    update is skipped and the prediction is returned.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (model.p,):
        raise DimensionMismatch(f"mask must have shape ({model.p},), got {mask.shape}")
    y_obs = np.asarray(y_obs, dtype=float)
    q = int(mask.sum())
    if y_obs.shape == (model.p,):
        y_red = y_obs[mask]
    elif y_obs.shape == (q,):
        y_red = y_obs
    else:
        raise DimensionMismatch(f"measurement shape {y_obs.shape} fits neither p={model.p} nor {q}")
    if q == model.p:
        return iskf_step(state, y_red, model, params)
    Sigma = covariance_predict(state.P_post, model)
    x_pred = model.A @ state.x_hat
    if q == 0:
        return FilterState(x_pred, Sigma, state.t + 1)
    C = model.C[mask]
    V = model.V[np.ix_(mask, mask)]
    gains = gains_from_prior(Sigma, model, C=C, V=V)
    x = _iterate(x_pred, y_red, gains, params, C=C)
    return FilterState(x, gains.P, state.t + 1)


# Trajectory drivers.  Each returns an array of shape (T + 1, n) whose row 0
# is the initial estimate and row t the posterior estimate after y[t - 1].


def _start(n, x0):
    return np.zeros(n) if x0 is None else np.array(x0, dtype=float)


def run_kf(measurements, model, P0, x0=None):
    state = FilterState(_start(model.n, x0), np.array(P0, dtype=float), 0)
    out = [state.x_hat]
    for y in measurements:
        state = kf_step(state, y, model)
        out.append(state.x_hat)
    return np.array(out)


def run_iskf(measurements, model, params, P0, x0=None):
    state = FilterState(_start(model.n, x0), np.array(P0, dtype=float), 0)
    out = [state.x_hat]
    for y in measurements:
        state = iskf_step(state, y, model, params)
        out.append(state.x_hat)
    return np.array(out)


def run_ss_kf(measurements, gains, x0=None):
    x = _start(gains.model.n, x0)
    out = [x]
    for y in measurements:
        x = ss_kf_step(x, y, gains)
        out.append(x)
    return np.array(out)


def run_ss_iskf(measurements, gains, params, x0=None):
    x = _start(gains.model.n, x0)
    out = [x]
    for y in measurements:
        x = ss_iskf_step(x, y, gains, params)
        out.append(x)
    return np.array(out)


def run_huberized(measurements, gains, params, x0=None, tol=1e-10, max_iter=100_000):
    """Steady-state filter whose update is the exact minimizer of the objective."""
    A = gains.model.A
    x = _start(gains.model.n, x0)
    out = [x]
    for y in measurements:
        x = huberized_solve(A @ x, y, gains, params, tol=tol, max_iter=max_iter)
        out.append(x)
    return np.array(out)
