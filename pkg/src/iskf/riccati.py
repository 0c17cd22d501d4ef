"""Covariance recursion, steady-state gains and the scaled-gradient metric."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import (
    DimensionMismatch,
    InvalidParameter,
    NoConvergence,
    SingularInnovationCovariance,
    SingularPriorCovariance,
    SingularScalingMatrix,
)
from .satfun import Whitener

__all__ = [
    "GainSet",
    "ScalingMatrix",
    "covariance_predict",
    "gain_and_update",
    "gains_from_prior",
    "solve_steady",
    "scaling_matrix",
    "dare_residual",
    "posterior_residual",
]


def _sym(M):
    return 0.5 * (M + M.T)


def covariance_predict(P_post, model):
    """Prior covariance ``A P A' + W``."""
    P_post = np.asarray(P_post, dtype=float)
    if P_post.shape != (model.n, model.n):
        raise DimensionMismatch(f"covariance must be {model.n}x{model.n}, got {P_post.shape}")
    A = model.A
    return _sym(A @ P_post @ A.T + model.W)


def gain_and_update(P_prior, model, C=None, V=None):
    """Kalman gain and posterior covariance for a given prior covariance.

    ``C`` and ``V`` default to the model's; passing reduced versions handles
    partially observed measurements.

    Returns:
        (K, P_post) with ``K = P C' (C P C' + V)^-1`` and ``P_post = (I - K C) P``.
    """
    P_prior = np.asarray(P_prior, dtype=float)
    n = model.n
    if P_prior.shape != (n, n):
        raise DimensionMismatch(f"covariance must be {n}x{n}, got {P_prior.shape}")
    C = model.C if C is None else C
    V = model.V if V is None else V
    CP = C @ P_prior
    S = _sym(CP @ C.T + V)
    try:
        factor = la.cho_factor(S, lower=True, check_finite=True)
    except (la.LinAlgError, ValueError) as exc:
        raise SingularInnovationCovariance("C P C' + V is not positive definite") from exc
    # P symmetric, so P C' S^-1 = (S^-1 C P)'
    K = la.cho_solve(factor, CP).T
    P_post = _sym(P_prior - K @ CP)
    return K, P_post


@dataclass(frozen=True, eq=False)
class GainSet:
    """Everything the update step needs for a fixed prior covariance.

    For the steady-state filter these come from :func:`solve_steady`; the
    time-varying filter builds one per step with :func:`gains_from_prior`.
    """

    model: object
    P: np.ndarray
    Sigma: np.ndarray
    K: np.ndarray
    sigma_whitener: Whitener
    v_whitener: Whitener
    IKC: np.ndarray

    def to_dict(self):
        return {
            "P": self.P.tolist(),
            "Sigma": self.Sigma.tolist(),
            "K": self.K.tolist(),
            "Sigma_factor": self.sigma_whitener.L.tolist(),
            "V_factor": self.v_whitener.L.tolist(),
        }


def gains_from_prior(Sigma, model, C=None, V=None, v_whitener=None):
    """Build a :class:`GainSet` around the prior covariance ``Sigma``.

    Raises:
        SingularPriorCovariance: ``Sigma`` is not positive definite.
    """
    K, P = gain_and_update(Sigma, model, C=C, V=V)
    try:
        sw = Whitener(Sigma)
    except la.LinAlgError as exc:
        raise SingularPriorCovariance("prior covariance is not positive definite") from exc
    C = model.C if C is None else C
    if v_whitener is None:
        v_whitener = model.v_whitener if V is None else Whitener(V)
    IKC = np.eye(model.n) - K @ C
    return GainSet(model, P, Sigma, K, sw, v_whitener, IKC)


def solve_steady(model, tol=1e-12, max_iter=10**6):
    """Steady-state covariances and gain by fixed-point Riccati iteration.

    Starts from ``P = W`` and alternates predict/update until successive
    posterior covariances differ by at most ``tol * max(1, |P|_F)``.

    Raises:
        NoConvergence: ``max_iter`` cycles without meeting ``tol``; usually a
            sign the model is not detectable or not stabilizable.
        SingularPriorCovariance: the converged prior covariance is singular.
    """
    if not tol > 0:
        raise InvalidParameter(f"tol must be positive, got {tol}")
    P = np.array(model.W)
    for _ in range(max_iter):
        _, P_next = gain_and_update(covariance_predict(P, model), model)
        if not np.all(np.isfinite(P_next)):
            break
        step = np.linalg.norm(P_next - P)
        size = np.linalg.norm(P_next)
        if not (np.isfinite(step) and np.isfinite(size)):
            break
        P = P_next
        if step <= tol * max(1.0, size):
            return gains_from_prior(covariance_predict(P, model), model)
    raise NoConvergence(f"Riccati iteration did not converge in {max_iter} steps")


def dare_residual(gains, model):
    """Relative residual of the prior-form algebraic Riccati equation at ``Sigma``.

    ``X = A X A' + W - A X C' (C X C' + V)^-1 C X A'`` is the fixed point of
    the prior covariance recursion.
    """
    A, C, X = model.A, model.C, gains.Sigma
    S = C @ X @ C.T + model.V
    AXC = A @ X @ C.T
    rhs = A @ X @ A.T + model.W - AXC @ np.linalg.solve(S, AXC.T)
    return np.linalg.norm(X - rhs) / max(1.0, np.linalg.norm(X))


def posterior_residual(gains, model):
    """Relative change of ``P`` after one more predict/update cycle."""
    _, P_next = gain_and_update(covariance_predict(gains.P, model), model)
    return np.linalg.norm(P_next - gains.P) / max(1.0, np.linalg.norm(gains.P))


class ScalingMatrix:
    """Cholesky-factored ``M = Sigma^-1 + C' V^-1 C``.

    ``M`` is the Hessian of the quadratic (untruncated) estimation objective,
    and the metric in which the saturated update is a unit gradient step.
    """

    def __init__(self, gains, model):
        C = model.C
        try:
            sig = la.cho_factor(gains.Sigma, lower=True)
            Sigma_inv = la.cho_solve(sig, np.eye(model.n))
        except la.LinAlgError as exc:
            raise SingularScalingMatrix("prior covariance is singular") from exc
        VinvC = la.cho_solve((model.v_whitener.L, True), C)
        self.M = _sym(Sigma_inv + C.T @ VinvC)
        self._VinvC = VinvC
        try:
            self._factor = la.cho_factor(self.M, lower=True)
        except la.LinAlgError as exc:
            raise SingularScalingMatrix("scaling matrix is not positive definite") from exc

    def solve(self, b):
        return la.cho_solve(self._factor, b)

    def gain(self):
        """``M^-1 C' V^-1``, equal to the Kalman gain by the Woodbury identity."""
        return self.solve(self._VinvC.T)

    def inv_sqrt(self):
        """Lower-triangular ``L`` with ``L L' = M^-1``."""
        M_inv = _sym(self.solve(np.eye(self.M.shape[0])))
        return la.cholesky(M_inv, lower=True)


def scaling_matrix(gains, model):
    return ScalingMatrix(gains, model)
