"""Simulation of trajectories with outlier-corrupted Gaussian noise.

Random numbers come from a single ``numpy.random.Generator`` (PCG64) seeded
with ``seed``.  For every step ``t = 0, ..., T - 1`` the stream is consumed in
a fixed order:

1. one uniform on [0, 1) choosing the process-noise branch,
2. ``m`` standard normals for the process noise,
3. one uniform choosing the measurement-noise branch,
4. ``p`` standard normals for the measurement noise.

A step is an outlier when its uniform is below the outlier probability, in
which case the Gaussian draw is multiplied by ``sqrt(scale)``.  Because the
same number of variates is drawn regardless of branch, forcing the scales to
one (:meth:`OutlierSpec.without_outliers`) yields the same trajectory with
the outliers removed.  Extending ``T`` happens to preserve the prefix with
this scheme, but callers should not rely on it.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidParameter

__all__ = ["Trajectory", "simulate"]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """True states ``x[0..T]``, measurements ``y[1..T]`` and outlier flags.

    ``measurements[t - 1]`` is ``y[t] = C x[t] + v``, and
    ``process_outlier_flags[t]`` marks the noise that produced ``x[t + 1]``.
    """

    states: np.ndarray
    measurements: np.ndarray
    process_outlier_flags: np.ndarray
    meas_outlier_flags: np.ndarray
    seed: int

    def __post_init__(self):
        T = self.measurements.shape[0]
        if self.states.shape[0] != T + 1:
            raise DimensionMismatch(f"{self.states.shape[0]} states for {T} measurements")
        if self.process_outlier_flags.shape != (T,) or self.meas_outlier_flags.shape != (T,):
            raise DimensionMismatch("flag sequences must have one entry per measurement")

    @property
    def T(self):
        return self.measurements.shape[0]


def simulate(model, spec, T, seed, x0=None, F=None, G=None):
    """Simulate ``T`` steps of the model from ``x0`` (default zero).

    ``F`` and ``G`` override the model's noise-shaping matrices for the
    simulation only, which allows e.g. noise-free rollouts of a model whose
    filter needs a nonsingular ``G``.
    """
    if int(T) != T or T < 1:
        raise InvalidParameter(f"T must be a positive integer, got {T}")
    T = int(T)
    A, C = model.A, model.C
    F = model.F if F is None else np.array(F, dtype=float, ndmin=2)
    G = model.G if G is None else np.array(G, dtype=float, ndmin=2)
    n, p = model.n, model.p
    if F.shape[0] != n or G.shape != (p, p):
        raise DimensionMismatch(f"noise matrices {F.shape}, {G.shape} do not fit n={n}, p={p}")
    m = F.shape[1]
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (n,):
        raise DimensionMismatch(f"x0 must have shape ({n},)")

    rng = np.random.default_rng(seed)
    sw, sv = math.sqrt(spec.scale_process), math.sqrt(spec.scale_meas)
    states = np.empty((T + 1, n))
    ys = np.empty((T, p))
    fw = np.zeros(T, dtype=bool)
    fv = np.zeros(T, dtype=bool)
    states[0] = x
    for t in range(T):
        fw[t] = rng.random() < spec.p_process
        g = rng.standard_normal(m)
        fv[t] = rng.random() < spec.p_meas
        h = rng.standard_normal(p)
        w = F @ (sw * g if fw[t] else g)
        v = G @ (sv * h if fv[t] else h)
        x = A @ x + w
        states[t + 1] = x
        ys[t] = C @ x + v
    return Trajectory(states, ys, fw, fv, int(seed))
