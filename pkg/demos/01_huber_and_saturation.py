"""
The circular Huber function and the saturation it induces
=========================================================

Quadratic near the origin, linear far away.  Its gradient is the vector
itself, clamped to a ball; after whitening by a covariance this clamp is what
the robust filter applies to innovations.
"""

import numpy as np

from iskf import Whitener, phi, phi_grad, saturate

# phi along a ray: the two branches meet at |a| = lam
lam = 2.0
for r in [0.5, 1.0, 2.0, 4.0, 8.0]:
    a = np.array([r, 0.0])
    print(f"|a| = {r:4.1f}   phi = {phi(a, lam):6.3f}   0.5|a|^2 = {0.5 * r * r:6.3f}")

# the gradient never exceeds lam in norm
print(phi_grad(np.array([3.0, 4.0]), lam))  # [1.2 1.6]

# saturation measures length in the metric of a covariance S
S = np.array([[4.0, 1.0], [1.0, 1.0]])
w = Whitener(S)
z = np.array([6.0, 1.0])
print("whitened norm:", w.whitened_norm(z))
print("saturated:   ", saturate(z, w, 1.0), "-> whitened norm", w.whitened_norm(saturate(z, w, 1.0)))

# an infinite threshold switches robustness off
print(saturate(z, w, np.inf))
