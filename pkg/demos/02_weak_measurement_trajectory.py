#!/usr/bin/env python3
# Continuous weak monitoring of a driven qubit: the raw readout is
# buried in Gaussian noise (sigma = 1/sqrt(4 gamma dt) per sample), an
# exponential moving average pulls the qubit signal back out, and the
# conditioned state follows the record through noisy Rabi cycles.

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from zeno_lab import ContinuousConfig, ModelParams, exponential_filter, simulate_continuous_trajectory

GAMMA = 0.25
T_FINAL = 30.0
TAU = 1.5
OUT = "02_weak_measurement_trajectory.png"

fig, axes = plt.subplots(3, 1, figsize=(9, 7), sharex=True)

for seed, color in ((11, "tab:blue"), (12, "tab:orange")):
    cfg = ContinuousConfig(ModelParams(omega_r=1.0, gamma=GAMMA), t_final=T_FINAL,
                           rng_seed=seed, filter_tau=TAU)
    rec = simulate_continuous_trajectory(cfg)
    axes[0].plot(rec.times, rec.bloch[:, 2], lw=0.9, color=color, label=f"seed {seed}")

cfg = ContinuousConfig(ModelParams(omega_r=1.0, gamma=GAMMA), t_final=T_FINAL,
                       rng_seed=11, filter_tau=TAU)
rec = simulate_continuous_trajectory(cfg)
filtered = exponential_filter(rec.readouts, cfg.dt_step, TAU)
sigma = 1.0 / np.sqrt(4.0 * GAMMA * cfg.dt_step)

axes[1].plot(rec.times, rec.readouts, ".", ms=1, color="0.6",
             label=f"raw record ($\\sigma \\approx {sigma:.1f}$)")
axes[1].set_ylim(-4 * sigma, 4 * sigma)
axes[1].legend(loc="upper right", fontsize=8)

axes[2].plot(rec.times, rec.bloch[:, 2], lw=0.9, color="tab:blue", label="conditioned z")
axes[2].plot(rec.times, filtered, lw=1.1, color="tab:red",
             label=f"filtered record, $\\tau = {TAU}$")
axes[2].set_ylim(-1.6, 1.6)
axes[2].legend(loc="upper right", fontsize=8)

axes[0].set_ylabel("z")
axes[0].legend(loc="upper right", fontsize=8)
axes[0].set_title(f"weak monitoring at $\\gamma = {GAMMA}$, $\\Omega_R = 1$")
axes[1].set_ylabel("readout")
axes[2].set_ylabel("z, filtered r")
axes[2].set_xlabel("t")

fig.tight_layout()
fig.savefig(OUT, dpi=150)
print(f"wrote {OUT}")
print(f"steps = {cfg.n_steps}, dt = {cfg.dt_step:.4f}, per-sample sigma = {sigma:.2f}")
