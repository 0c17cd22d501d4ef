"""Linear time-invariant system models and the two benchmark systems.

The system is::

    x[t+1] = A x[t] + w[t],   w[t] = F (w~[t] + s[t])
    y[t]   = C x[t] + v[t],   v[t] = G (v~[t] + o[t])

with ``w~``, ``v~`` standard normal and ``s``, ``o`` sparse outlier terms, so
that without outliers ``W = F F'`` and ``V = G G'``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import DimensionMismatch, InvalidParameter, SingularMeasurementNoise
from .satfun import Whitener

__all__ = [
    "SystemModel",
    "OutlierSpec",
    "ModelDiagnostics",
    "build_model",
    "vehicle_model",
    "cstr_model",
    "validate_model",
]


def _as_matrix(name, M):
    M = np.array(M, dtype=float, ndmin=2)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-d, got {M.ndim}-d")
    if not np.all(np.isfinite(M)):
        raise InvalidParameter(f"{name} has non-finite entries")
    M.setflags(write=False)
    return M


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Validated ``(A, C, F, G)`` with cached ``W = F F'``, ``V = G G'``.

    Use :func:`build_model` rather than the constructor directly; it performs
    the validation.  Arrays are read-only.
    """

    A: np.ndarray
    C: np.ndarray
    F: np.ndarray
    G: np.ndarray
    W: np.ndarray = field(init=False, repr=False)
    V: np.ndarray = field(init=False, repr=False)
    v_whitener: Whitener = field(init=False, repr=False)

    def __post_init__(self):
        n, p, m = self.n, self.p, self.m
        if self.A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {self.A.shape}")
        if self.C.shape[1] != n:
            raise DimensionMismatch(f"C must be p x {n}, got {self.C.shape}")
        if self.F.shape[0] != n:
            raise DimensionMismatch(f"F must be {n} x m, got {self.F.shape}")
        if self.G.shape != (p, p):
            raise DimensionMismatch(f"G must be {p} x {p}, got {self.G.shape}")
        W = self.F @ self.F.T
        V = self.G @ self.G.T
        W = 0.5 * (W + W.T)
        V = 0.5 * (V + V.T)
        try:
            vw = Whitener(V)
        except la.LinAlgError as exc:
            raise SingularMeasurementNoise("V = G G' is not positive definite") from exc
        W.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "v_whitener", vw)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.C.shape[0]

    @property
    def m(self):
        return self.F.shape[1]

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in ("A", "C", "F", "G")}

    @classmethod
    def from_dict(cls, d):
        return build_model(d["A"], d["C"], d["F"], d["G"])


@dataclass(frozen=True)
class OutlierSpec:
    """Two-branch Gaussian mixture for each noise channel.

    With probability ``p_process`` the process noise covariance is multiplied
    by ``scale_process`` (likewise for the measurement channel).
    """

    p_process: float = 0.0
    scale_process: float = 1.0
    p_meas: float = 0.0
    scale_meas: float = 1.0

    def __post_init__(self):
        for name in ("p_process", "p_meas"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParameter(f"{name} must lie in [0, 1], got {v}")
        for name in ("scale_process", "scale_meas"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 1.0):
                raise InvalidParameter(f"{name} must be >= 1, got {v}")

    def without_outliers(self):
        """Same probabilities with unit scales: the outlier branches become inliers."""
        return OutlierSpec(self.p_process, 1.0, self.p_meas, 1.0)

    def to_dict(self):
        return {
            "p_process": self.p_process,
            "scale_process": self.scale_process,
            "p_meas": self.p_meas,
            "scale_meas": self.scale_meas,
        }


def build_model(A, C, F, G):
    """Validate the four system matrices and return a :class:`SystemModel`.

    Raises:
        DimensionMismatch: shapes are inconsistent or ``G`` is not square.
        SingularMeasurementNoise: ``G G'`` is not positive definite.
    """
    return SystemModel(_as_matrix("A", A), _as_matrix("C", C), _as_matrix("F", F), _as_matrix("G", G))


def vehicle_model(h=0.05, gamma=0.05):
    """Unit-mass vehicle in the plane with linear drag.

    State is (position x, position y, velocity x, velocity y); the two position
    coordinates are measured.  The random force has covariance ``10 I`` and
    ``100 I`` on outlier steps; measurement noise ``5 I`` and ``500 I``.
    """
    if not h > 0:
        raise InvalidParameter(f"time step must be positive, got {h}")
    if not 0 <= gamma * h < 1:
        raise InvalidParameter(f"need 0 <= gamma*h < 1, got {gamma * h}")
    a = (1 - gamma * h / 2) * h
    d = 1 - gamma * h
    A = [[1, 0, a, 0], [0, 1, 0, a], [0, 0, d, 0], [0, 0, 0, d]]
    B = np.array([[h * h / 2, 0], [0, h * h / 2], [h, 0], [0, h]])
    C = [[1, 0, 0, 0], [0, 1, 0, 0]]
    model = build_model(A, C, math.sqrt(10) * B, math.sqrt(5) * np.eye(2))
    return model, OutlierSpec(0.1, 10.0, 0.1, 100.0)


def cstr_model(h=0.05):
    """Cascade of three linearized stirred-tank reactors (6 states, 3 outputs).

    Each reactor has state (concentration offset, temperature offset) and only
    the temperature is measured.  Reactor ``i`` drives reactor ``i + 1``.
    """
    if not h > 0:
        raise InvalidParameter(f"time step must be positive, got {h}")
    h2 = h * h
    At = np.array([
        [1 - 5 * h + 4.33 * h2, -0.34 * h + 0.38 * h2],
        [47.68 * h - 52.81 * h2, 1 + 2.79 * h - 4.29 * h2],
    ])
    Bt = np.array([
        [h - 2.5 * h2, -0.05 * h2],
        [23.84 * h2, 0.3 * h + 0.42 * h2],
    ])
    Ct = np.array([[0.0, 1.0]])
    Z = np.zeros((2, 2))
    A = np.block([[At, Z, Z], [Bt, At, Z], [Z, Bt, At]])
    C = la.block_diag(Ct, Ct, Ct)
    F = la.block_diag(Bt, Bt, Bt) / math.sqrt(10)
    model = build_model(A, C, F, np.eye(3))
    return model, OutlierSpec(0.1, 100.0, 0.1, 100.0)


@dataclass(frozen=True)
class ModelDiagnostics:
    detectable: bool
    stabilizable: bool
    marginal_eigenvalues: tuple
    messages: tuple


def _pbh_full_rank(M):
    s = la.svdvals(M)
    if s.size == 0 or s[0] == 0.0:
        return False
    return int(np.sum(s > 1e-9 * s[0])) == min(M.shape)


def validate_model(model, warn=True):
    """PBH rank tests for detectability of (A, C) and stabilizability of (A, W^1/2).

    Only eigenvalues with modulus >= 1 are tested.  Failures are reported in
    the returned diagnostics (and as warnings when ``warn`` is set); nothing
    is raised.
    """
    A, n = model.A, model.n
    eigs = la.eigvals(A)
    bad = [lam for lam in eigs if abs(lam) >= 1 - 1e-12]
    detectable = stabilizable = True
    messages = []
    eye = np.eye(n)
    for lam in bad:
        shifted = A - lam * eye
        if not _pbh_full_rank(np.vstack([shifted, model.C])):
            detectable = False
            messages.append(f"mode {lam:.6g} is unstable and unobservable")
        # F spans the same column space as any square root of W
        if not _pbh_full_rank(np.hstack([shifted, model.F])):
            stabilizable = False
            messages.append(f"mode {lam:.6g} is unstable and not excited by the process noise")
    if warn:
        for msg in messages:
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return ModelDiagnostics(detectable, stabilizable, tuple(complex(v) for v in bad), tuple(messages))
