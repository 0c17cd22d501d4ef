"""Circular Huber function, its gradient, and whitened saturation.

The circular Huber function with threshold ``lam`` is quadratic inside the
Euclidean ball of radius ``lam`` and grows linearly outside it::

    phi(a; lam) = 0.5 * |a|^2             if |a| <= lam
                = lam * (|a| - lam / 2)   otherwise

Its gradient is ``a`` inside the ball and ``lam * a / |a|`` outside, i.e. a
radial clamp to norm ``lam``.  A threshold of ``math.inf`` is a valid value
everywhere in this module and turns every saturation into the identity.
"""

import math

import numpy as np
import scipy.linalg as la
from scipy.linalg.blas import dtrsv

from .errors import DimensionMismatch, InvalidParameter

__all__ = ["INF", "Whitener", "check_threshold", "phi", "phi_grad", "saturate"]

INF = math.inf

# eigenvalues below this fraction of the largest are clamped in the PSD path
_EIG_CLAMP = 1e-14


def check_threshold(lam):
    """Return ``lam`` as a float, raising InvalidParameter unless it is > 0 or +inf."""
    lam = float(lam)
    if not lam > 0.0:
        raise InvalidParameter(f"threshold must be positive or inf, got {lam}")
    return lam


class Whitener:
    """Square-root factor ``L`` of a symmetric matrix ``S`` with ``L @ L.T == S``.

    ``apply(z)`` returns ``u`` solving ``L u = z``, so that ``|u|^2 = z' S^-1 z``
    whichever square root is used.  A PD matrix gets a lower Cholesky factor.
    With ``allow_psd=True`` a matrix that fails Cholesky falls back to a
    symmetric eigendecomposition with tiny eigenvalues clamped.
    """

    def __init__(self, S, allow_psd=False):
        S = np.asarray(S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise DimensionMismatch(f"whitener needs a square matrix, got shape {S.shape}")
        self.dim = S.shape[0]
        S = 0.5 * (S + S.T)
        try:
            self.L = np.ascontiguousarray(la.cholesky(S, lower=True))
            self.triangular = True
            self._basis = None
            self._inv_sqrt_eig = None
        except la.LinAlgError:
            if not allow_psd:
                raise
            lam, U = la.eigh(S)
            top = max(lam.max(), 0.0)
            if top == 0.0:
                raise la.LinAlgError("cannot whiten the zero matrix")
            lam = np.maximum(lam, _EIG_CLAMP * top)
            root = np.sqrt(lam)
            self.L = U * root
            self.triangular = False
            self._basis = U
            self._inv_sqrt_eig = 1.0 / root
        # Fortran-ordered copy for the level-2 BLAS fast path
        self._L_f = np.asfortranarray(self.L)

    @property
    def matrix(self):
        return self.L @ self.L.T

    def apply(self, z):
        """Solve ``L u = z``; ``z`` is a vector or a ``(dim, k)`` block of columns."""
        z = np.asarray(z, dtype=float)
        if z.shape[0] != self.dim:
            raise DimensionMismatch(f"expected leading dimension {self.dim}, got {z.shape}")
        if not self.triangular:
            return self._inv_sqrt_eig.reshape((-1,) + (1,) * (z.ndim - 1)) * (self._basis.T @ z)
        if z.ndim == 1:
            return dtrsv(self._L_f, z, lower=1)
        return la.solve_triangular(self.L, z, lower=True, check_finite=False)

    def apply_transpose(self, g):
        """Solve ``L' u = g``."""
        g = np.asarray(g, dtype=float)
        if not self.triangular:
            return self._basis @ (self._inv_sqrt_eig.reshape((-1,) + (1,) * (g.ndim - 1)) * g)
        if g.ndim == 1:
            return dtrsv(self._L_f, g, lower=1, trans=1)
        return la.solve_triangular(self.L, g, lower=True, trans="T", check_finite=False)

    def unapply(self, u):
        """Inverse of :meth:`apply`: returns ``L @ u``."""
        return self.L @ u

    def whitened_norm(self, z):
        u = self.apply(z)
        return np.linalg.norm(u, axis=0)


def phi(a, lam):
    """Circular Huber function of the vector ``a`` with threshold ``lam``."""
    lam = check_threshold(lam)
    r = float(np.linalg.norm(a))
    if r <= lam:
        return 0.5 * r * r
    return lam * (r - 0.5 * lam)


def phi_grad(a, lam):
    """Gradient of :func:`phi`: ``a`` clamped radially to norm ``lam``."""
    lam = check_threshold(lam)
    a = np.asarray(a, dtype=float)
    if lam == INF:
        return a
    r = float(np.linalg.norm(a))
    if r <= lam:
        return a
    return (lam / r) * a


def saturate(z, w, lam):
    """Scale ``z`` toward zero so that its whitened norm is at most ``lam``.

    Equals ``min(1, lam / |L^-1 z|) * z`` where ``L`` is the factor held by
    ``w``.  The division only happens when the threshold is exceeded.
    """
    lam = check_threshold(lam)
    z = np.asarray(z, dtype=float)
    if z.shape[0] != w.dim:
        raise DimensionMismatch(f"vector of length {z.shape[0]} vs whitener of dim {w.dim}")
    if lam == INF:
        return z
    r = float(np.linalg.norm(w.apply(z)))
    if r <= lam:
        return z
    return (lam / r) * z
