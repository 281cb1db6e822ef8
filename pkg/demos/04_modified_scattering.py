# %% [markdown]
# # Log-phase corrections and the long-time profile
#
# The profile f~(t,k) of a small NLS solution does not settle: its phase
# drifts like log t. Removing the drift with the correction
# W = f~ exp(i (1/2) int |f~|^2 ds/(1+s)) gives a profile that converges.
# A short run is enough to see both effects.

# %%
import numpy as np

from nlsv import asymptotics as asy
from nlsv import distorted, dynamics, jost, potential

spec = potential.gaussian_barrier(x_min=-512.0, x_max=512.0, n_x=4096)
x = spec.grid.x
basis = distorted.basis_for(spec, jost.staggered_k_grid(0.02, 300))
u0 = dynamics.gaussian_data(x, epsilon0=0.3, sigma=3.0)
snaps = (0.0,) + tuple(np.round(40 * 2.0 ** (-np.arange(24)[::-1] / 4), 6))
cfg = dynamics.RunConfig(dt=0.01, t_max=40.0, epsilon0=0.3, snapshot_times=snaps,
                         reach_bandwidth=5.0, enforce_reach=False)
traj = dynamics.evolve(u0, cfg, x, potential.sample_potential(spec))
hist = asy.extract_profiles(traj, basis)
mp = asy.correct_plus(hist)

# %% [markdown]
# Phase drift of f~ against W at the peak of |f~|.

# %%
j = int(np.argmax(np.abs(hist.f_tilde[0])))
df, dw = asy.phase_drift(hist, mp, j, 5.0, 40.0)
print(f"k = {hist.k_grid[j]:.3f}: phase change of f~ {df:.2e} rad, of W {dw:.2e} rad")

# %% [markdown]
# Dyadic Cauchy differences of W inside the resolved band.

# %%
band = asy.resolved_k(512.0, 40.0)
for t in (5.0, 10.0, 20.0):
    print(f"|W(2t) - W(t)| at t={t:4.0f}: {mp.cauchy_difference(t, band):.2e}")

# %% [markdown]
# In physical space u(t,x) approaches the self-similar profile
# e^{-ix^2/4t} / sqrt(-2it) f~(t, -x/2t).

# %%
for t in (10.0, 20.0, 40.0):
    sel = np.abs(x) <= 2 * t * 2.5
    pred = asy.physical_asymptotics(hist.f_tilde[hist.index(t)], hist.k_grid, t, x[sel])
    err = np.max(np.abs(traj.at(t).u[sel] - pred))
    print(f"t={t:4.0f}: sqrt(t) * sup |u - u_asym| = {np.sqrt(t) * err:.2e}")

# %% [markdown]
# For negative times the correction is a 2x2 matrix exponential mixing k and
# -k through the scattering matrix. It is unitary, so |W| = |Z| exactly.

# %%
neg = asy.extract_profiles(dynamics.mirrored(traj), basis)
mm = asy.correct_minus(neg, basis.scattering)
print("max | |W| - |Z| | for t < 0:",
      np.max(np.abs(np.linalg.norm(mm.W, axis=-1) - np.linalg.norm(neg.Z, axis=-1))))
