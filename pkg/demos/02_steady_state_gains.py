"""
Steady-state covariances and gain
=================================

For a time-invariant system the covariance recursion converges, and the
filter can run on fixed matrices.  The gain also equals M^-1 C' V^-1 with
M = Sigma^-1 + C' V^-1 C, the metric of the scaled-gradient view.
"""

import numpy as np
import scipy.linalg as la

from iskf import cstr_model, dare_residual, scaling_matrix, solve_steady, validate_model, vehicle_model

for name, factory in [("vehicle", vehicle_model), ("cstr", cstr_model)]:
    model, _ = factory()
    diag = validate_model(model)
    gains = solve_steady(model)
    ref = la.solve_discrete_are(model.A.T, model.C.T, model.W, model.V)
    K_m = scaling_matrix(gains, model).gain()
    print(f"{name}: n={model.n} p={model.p} detectable={diag.detectable}")
    print("  DARE residual       ", dare_residual(gains, model))
    print("  |Sigma - scipy|     ", np.abs(gains.Sigma - ref).max())
    print("  |K - M^-1 C'V^-1|   ", np.abs(gains.K - K_m).max())

np.set_printoptions(precision=4, suppress=True)
model, _ = vehicle_model()
print(solve_steady(model).K)
