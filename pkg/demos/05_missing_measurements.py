"""
Missing measurements
====================

When a sensor drops out, the update uses only the rows of C and V that were
measured.  With nothing measured the update is skipped.
"""

import numpy as np

from iskf import IskfParams, cstr_model, initial_state, masked_update, simulate, solve_steady, state_rmse

model, spec = cstr_model()
gains = solve_steady(model)
traj = simulate(model, spec, 500, seed=3)
params = IskfParams(0.5, 1.0, 2)

rng = np.random.default_rng(0)
masks = rng.random((traj.T, model.p)) > 0.3  # each sensor reports 70% of the time
print("fraction measured:", masks.mean().round(3), " steps with nothing:", (~masks.any(axis=1)).sum())

state = initial_state(gains)
est = [state.x_hat]
for y, mask in zip(traj.measurements, masks):
    state = masked_update(state, y, mask, model, params)
    est.append(state.x_hat)
est = np.array(est)

full = initial_state(gains)
est_full = [full.x_hat]
for y in traj.measurements:
    full = masked_update(full, y, np.ones(model.p, bool), model, params)
    est_full.append(full.x_hat)

print("rmse with dropouts %.3f   all sensors %.3f" % (
    state_rmse(traj.states[1:], est[1:]), state_rmse(traj.states[1:], np.array(est_full)[1:])))
print("final posterior variance trace:", np.trace(state.P_post).round(4))
