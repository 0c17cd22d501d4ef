"""Shared random-instance generators for the test suite."""

import numpy as np

from iskf.model import build_model, validate_model

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def random_system(rng, n=None, p=None, radius=None):
    """Random detectable, stabilizable system with PD noise covariances."""
    while True:
        nn = n or int(rng.integers(1, 7))
        pp = p or int(rng.integers(1, min(nn, 3) + 1))
        A = rng.standard_normal((nn, nn))
        rho = max(abs(np.linalg.eigvals(A)))
        A *= (radius or rng.uniform(0.5, 1.1)) / rho
        C = rng.standard_normal((pp, nn))
        F = rng.standard_normal((nn, nn)) * 0.5 + np.eye(nn)
        G = rng.standard_normal((pp, pp)) * 0.3 + np.eye(pp)
        m = build_model(A, C, F, G)
        d = validate_model(m, warn=False)
        if d.detectable and d.stabilizable:
            return m


def filter_instance(rng, model, gains, lo=0.1, hi=10.0):
    """One update as a running filter meets it, with thresholds log-uniform on [lo, hi].

    The previous estimate is off by a draw from the posterior covariance; the
    process and measurement noise follow a 10% outlier mixture with variance
    scaled by 10 and 100 respectively.
    """
    x_true = rng.standard_normal(model.n)
    x_prev = x_true + np.linalg.cholesky(gains.P) @ rng.standard_normal(model.n)
    w = model.F @ rng.standard_normal(model.m) * (np.sqrt(10.0) if rng.random() < 0.1 else 1.0)
    x = model.A @ x_true + w
    y = model.C @ x + model.G @ rng.standard_normal(model.p) * (10.0 if rng.random() < 0.1 else 1.0)
    lam = np.exp(rng.uniform(np.log(lo), np.log(hi), 2))
    return x_prev, y, float(lam[0]), float(lam[1])
