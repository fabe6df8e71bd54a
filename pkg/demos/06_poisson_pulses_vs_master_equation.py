#!/usr/bin/env python3
# Unraveling check: projections applied at Poisson-random times average
# to the dephasing master equation.  20000 trajectories against RK4,
# residuals in units of the ensemble standard error, and the sampled
# waiting times against the exponential law 2 gamma exp(-2 gamma tau).

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from zeno_lab import (
    ModelParams,
    QubitState,
    bloch_series,
    integrate_master_equation,
    poisson_event_intervals,
    simulate_poisson_ensemble,
)

MODEL = ModelParams(omega_r=1.0, gamma=0.6)  # underdamped: the ringing must match too
T_FINAL = 12.0
DT = 0.01
N_TRAJ = 20000
OUT = "06_poisson_pulses_vs_master_equation.png"

ens = simulate_poisson_ensemble(MODEL, T_FINAL, DT, n_traj=N_TRAJ, master_seed=3)
times, rhos = integrate_master_equation(MODEL, QubitState.excited(), T_FINAL, DT)
z_exact = bloch_series(rhos)[1:, 2]  # drop t = 0, ensemble records start after one step

fig, axes = plt.subplots(1, 3, figsize=(13.5, 4.0))

axes[0].plot(times[1:], z_exact, color="black", lw=1.0, label="RK4")
axes[0].fill_between(ens.times, ens.z - 3 * ens.z_err, ens.z + 3 * ens.z_err,
                     color="tab:orange", alpha=0.6, label="MC $\\pm 3\\sigma$")
axes[0].set(title=f"$\\gamma = {MODEL.gamma}$, M = {N_TRAJ}", xlabel="t", ylabel="$\\bar z$")
axes[0].legend(fontsize=8)

# pull is only meaningful where the error is statistical; in the first
# few steps no trajectory has branched yet, stderr is ~0 and the O(dt)
# splitting bias dominates
mask = ens.z_err > 1e-4
pull = (ens.z[mask] - z_exact[mask]) / ens.z_err[mask]
axes[1].plot(ens.times[mask], pull, lw=0.6, color="tab:blue")
axes[1].axhline(0, color="grey", lw=0.6)
for s in (-2, 2):
    axes[1].axhline(s, color="grey", lw=0.6, ls=":")
axes[1].set(title="residual / stderr (stderr $> 10^{-4}$)", xlabel="t", ylim=(-4, 4))

intervals = poisson_event_intervals(MODEL, 200.0, DT, n_traj=200, master_seed=3)
tau = np.linspace(0, 4.0, 200)
axes[2].hist(intervals, bins=60, range=(0, 4), density=True, color="0.8",
             label=f"{intervals.size} intervals")
axes[2].plot(tau, 2 * MODEL.gamma * np.exp(-2 * MODEL.gamma * tau), color="tab:red",
             lw=1.2, label="$2\\gamma e^{-2\\gamma\\tau}$")
axes[2].set(title="waiting times between projections", xlabel="$\\tau$")
axes[2].legend(fontsize=8)

fig.tight_layout()
fig.savefig(OUT, dpi=150)
print(f"wrote {OUT}")
print(f"sup |MC - RK4| = {np.max(np.abs(ens.z - z_exact)):.2e}")
print(f"max |pull|     = {np.max(np.abs(pull)):.2f} sigma over {mask.sum()} samples")
print(f"mean interval  = {intervals.mean():.4f}  (law: {1 / (2 * MODEL.gamma):.4f})")
