"""
How many iterations?
====================

Each ISKF iteration is a scaled-gradient step on the robust objective, so
more iterations approach its minimizer.  Inside the quadratic region one step
is exact; with a clamped measurement the error shrinks by a factor K*C per
step, slow when measurements are precise.
"""

import numpy as np

from iskf import IskfParams, build_model, huberized_solve, iskf_iterates, objective, solve_steady, vehicle_model

model, _ = vehicle_model()
gains = solve_steady(model)
x_pred = np.zeros(4)
y = np.array([25.0, -8.0])  # a large innovation
params = IskfParams(0.3, 1.0, 30)
xs = iskf_iterates(x_pred, y, gains, params)
x_star = huberized_solve(x_pred, y, gains, params)
for k in [0, 1, 2, 3, 5, 10, 30]:
    print(f"k={k:2d}  f={objective(xs[k], x_pred, y, gains, params):9.4f}  |x - x*|={np.linalg.norm(xs[k] - x_star):.2e}")

# scalar case: A = 0, Sigma = 1, V = 0.01 so K = 1/1.01
g = solve_steady(build_model([[0.0]], [[1.0]], [[1.0]], [[0.1]]))
xs = iskf_iterates(np.zeros(1), [100.0], g, IskfParams(np.inf, 1.0, 400))[:, 0]
err = np.abs(xs - huberized_solve(np.zeros(1), [100.0], g, IskfParams(np.inf, 1.0), tol=1e-14))
print("K =", g.K[0, 0], " error after 1, 100, 200, 400 steps:", err[[1, 100, 200, 400]])
