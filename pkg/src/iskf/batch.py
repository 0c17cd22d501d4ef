"""Steady-state filters run for many parameter settings at once.

Every function here advances ``B`` independent filters over the same
measurement sequence, one per entry of the threshold/step-size arrays, and
returns estimates of shape ``(T + 1, B, n)`` with row 0 the initial
estimate.  Each filter's arithmetic does not depend on the others, so
splitting a batch gives the same per-filter results (up to BLAS rounding).
"""

import numpy as np

from .errors import DimensionMismatch

__all__ = ["run_ss_iskf_batch", "run_huberized_batch", "SteadyIskfRunner", "HuberizedRunner"]


def _clamp(Z, Linv_T, lam):
    """Rows of ``Z`` scaled so that ``|L^-1 z| <= lam`` row by row.

    ``lam / max(r, lam)`` is exactly 1 inside the ball; ``lam`` must be finite
    (see :func:`_finite`).
    """
    U = Z @ Linv_T
    r = np.sqrt(np.einsum("ij,ij->i", U, U))
    return Z * (lam / np.maximum(r, lam))[:, None]


def _finite(lam):
    # an infinite threshold behaves identically to the largest float
    return np.minimum(lam, np.finfo(float).max)


def _inv_factor_T(whitener):
    return np.ascontiguousarray(whitener.apply(np.eye(whitener.dim)).T)


def _broadcast(lambda_x, lambda_y, eta):
    lx, ly, eta = np.broadcast_arrays(
        np.asarray(lambda_x, dtype=float), np.asarray(lambda_y, dtype=float), np.asarray(eta, dtype=float)
    )
    if lx.ndim != 1:
        raise DimensionMismatch("parameter arrays must be 1-d")
    return lx, ly, eta


def _x0_block(n, B, x0):
    x = np.zeros((B, n))
    if x0 is not None:
        x[:] = np.asarray(x0, dtype=float)
    return x


def run_ss_iskf_batch(measurements, gains, lambda_x, lambda_y, eta, k_tilde, x0=None):
    """Steady-state ISKF for each ``(lambda_x[b], lambda_y[b], eta[b])``."""
    model = gains.model
    ys = np.asarray(measurements, dtype=float)
    lx, ly, eta = _broadcast(lambda_x, lambda_y, eta)
    B = lx.size
    A_T, C_T = model.A.T, model.C.T
    K_T, IKC_T = gains.K.T, gains.IKC.T
    Lv, Ls = _inv_factor_T(gains.v_whitener), _inv_factor_T(gains.sigma_whitener)
    lx, ly = _finite(lx), _finite(ly)
    eta_col = eta[:, None]
    x = _x0_block(model.n, B, x0)
    out = np.empty((ys.shape[0] + 1, B, model.n))
    out[0] = x
    # large step sizes can diverge; those cells are scored as failures
    with np.errstate(over="ignore", invalid="ignore"):
        for t, y in enumerate(ys):
            x_pred = x @ A_T
            x = x_pred
            for _ in range(k_tilde):
                s = _clamp(y - x @ C_T, Lv, ly)
                r = _clamp(x_pred - x, Ls, lx)
                x = x + eta_col * (s @ K_T + r @ IKC_T)
            out[t + 1] = x
    return out


def run_huberized_batch(measurements, gains, lambda_x, lambda_y, x0=None, tol=1e-10, max_iter=100_000):
    """Converged scaled-gradient solution of every update, for each threshold pair.

    Cells that stop meeting the tolerance are frozen individually.  Returns
    ``(estimates, converged)`` where ``converged[b]`` is False if cell ``b``
    hit ``max_iter`` at some step; its later estimates are still reported.
    """
    model = gains.model
    ys = np.asarray(measurements, dtype=float)
    lx, ly, _ = _broadcast(lambda_x, lambda_y, 1.0)
    B = lx.size
    A_T, C_T = model.A.T, model.C.T
    K_T, IKC_T = gains.K.T, gains.IKC.T
    Lv, Ls = _inv_factor_T(gains.v_whitener), _inv_factor_T(gains.sigma_whitener)
    lx, ly = _finite(lx), _finite(ly)
    x = _x0_block(model.n, B, x0)
    converged = np.ones(B, dtype=bool)
    out = np.empty((ys.shape[0] + 1, B, model.n))
    out[0] = x
    for t, y in enumerate(ys):
        x_pred = x @ A_T
        x = x_pred.copy()
        idx = np.arange(B)
        xa, xpa, lxa, lya = x_pred, x_pred, lx, ly
        for _ in range(max_iter):
            step = _clamp(y - xa @ C_T, Lv, lya) @ K_T + _clamp(xpa - xa, Ls, lxa) @ IKC_T
            xa = xa + step
            done = np.einsum("ij,ij->i", step, step) <= (tol * (1.0 + np.sqrt(np.einsum("ij,ij->i", xa, xa)))) ** 2
            if done.any():
                x[idx[done]] = xa[done]
                keep = ~done
                idx, xa, xpa, lxa, lya = idx[keep], xa[keep], xpa[keep], lxa[keep], lya[keep]
                if idx.size == 0:
                    break
        else:
            x[idx] = xa
            converged[idx] = False
        out[t + 1] = x
    return out, converged


class SteadyIskfRunner:
    """Grid-search runner for the steady-state ISKF at a fixed iteration count."""

    def __init__(self, gains, k_tilde, x0=None):
        self.gains = gains
        self.k_tilde = int(k_tilde)
        self.x0 = x0
        self.label = f"iskf_k{self.k_tilde}"

    def __call__(self, measurements, lambda_x, lambda_y, eta):
        est = run_ss_iskf_batch(measurements, self.gains, lambda_x, lambda_y, eta, self.k_tilde, self.x0)
        ok = np.all(np.isfinite(est), axis=(0, 2))
        return est, ok


class HuberizedRunner:
    """Grid-search runner for the converged (Huberized KF) update; ignores ``eta``."""

    k_tilde = 1
    label = "huber"

    def __init__(self, gains, tol=1e-8, max_iter=20_000, x0=None):
        self.gains = gains
        self.tol = tol
        self.max_iter = max_iter
        self.x0 = x0

    def __call__(self, measurements, lambda_x, lambda_y, eta):
        est, conv = run_huberized_batch(
            measurements, self.gains, lambda_x, lambda_y, self.x0, self.tol, self.max_iter
        )
        return est, conv & np.all(np.isfinite(est), axis=(0, 2))
