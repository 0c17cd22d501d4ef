"""
Choosing thresholds by grid search
==================================

Thresholds are picked on a separate tuning trajectory by the RMSE of the
one-step measurement predictions, which needs no ground truth.  All cells run
in one vectorized pass.
"""

import numpy as np

from iskf import SteadyIskfRunner, default_grid, grid_search, run_ss_iskf, run_ss_kf, simulate, solve_steady
from iskf import state_rmse, vehicle_model

model, spec = vehicle_model()
gains = solve_steady(model)
tune = simulate(model, spec, 1000, seed=0)
test = simulate(model, spec, 1000, seed=42)

res = grid_search(SteadyIskfRunner(gains, k_tilde=2), default_grid(k_tilde=2), tune, model)
print("best:", res.best_params, "score %.4f" % res.best_score)

# the neighbourhood of the optimum in the score table (rows lambda_x, columns lambda_y)
scores = res.scores.reshape(20, 20)
i, j = divmod(res.best_index, 20)
print("lambda_y:", np.round(res.lambda_y[:20][max(j - 2, 0):j + 3], 3))
print(np.round(scores[i:i + 3, max(j - 2, 0):j + 3], 3))

kf = state_rmse(test.states[1:], run_ss_kf(test.measurements, gains)[1:])
iskf = state_rmse(test.states[1:], run_ss_iskf(test.measurements, gains, res.best_params)[1:])
print(f"test rmse  KF {kf:.3f}  ISKF {iskf:.3f}  ({100 * (1 - iskf / kf):.0f}% better)")
