# %% [markdown]
# # Transmission and reflection off a barrier
#
# A repulsive potential V splits an incoming plane wave into a transmitted
# part T and reflected parts R+ (from the right) and R- (from the left).
# Everything here comes from the Jost solutions, computed by a Volterra sweep.

# %%
import numpy as np

from nlsv import jost, oracles, potential, scattering

spec = potential.gaussian_barrier(amplitude=2.0, width=1.0)
print(potential.hypothesis_report(spec).to_dict())

# %% [markdown]
# Energy conservation gives |T|^2 + |R|^2 = 1 at every k. Low energies are
# almost entirely reflected and high energies pass through.

# %%
k = np.array([0.01, 0.1, 0.5, 1.0, 2.0, 4.0])
sd = scattering.scattering_data(spec, k)
for kk, t, r, d in zip(k, sd.T, sd.R_plus, sd.unitarity_defect):
    print(f"k={kk:5.2f}  |T|^2={abs(t)**2:.6f}  |R+|^2={abs(r)**2:.6f}  defect={d:.1e}")

# %% [markdown]
# Near k = 0 a generic potential has T(k) ~ c k and R(k) -> -1.

# %%
g = scattering.genericity_report(spec)
print(f"T(k_min)={abs(g.T_at_kmin):.2e}  R+(k_min)+1={abs(g.R_plus_at_kmin + 1):.2e}  "
      f"generic={g.is_generic}")

# %% [markdown]
# For a square barrier the coefficients are elementary, which makes a
# direct accuracy check possible.

# %%
sq = potential.PotentialSpec("square_barrier", {"amplitude": 1.0, "half_width": 1.0}, 7.0,
                             potential.Grid(-4.0, 4.0, 801))
ks = np.linspace(0.2, 5, 25)
num = scattering.scattering_data(sq, ks)
T_ex, R_ex, _ = oracles.square_barrier_TR(1.0, 1.0, ks)
print("square barrier max |T - T_exact| =", np.max(np.abs(num.T - T_ex)))
print("square barrier max |R - R_exact| =", np.max(np.abs(num.R_minus - R_ex)))

# %% [markdown]
# The Jost functions themselves: m+(x,k) -> 1 as x -> +inf.

# %%
jf = jost.solve_m(spec, jost.staggered_k_grid(0.5, 4))
i = np.searchsorted(jf.x_grid, [-6.0, 0.0, 6.0])
print("m+(x, k) at x = -6, 0, 6 for k =", jf.k_grid[4])
print(jf.evaluate("+", x_idx=i)[4])
