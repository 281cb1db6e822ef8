# %% [markdown]
# # The distorted Fourier transform
#
# The generalized eigenfunctions psi(x,k) of -d^2/dx^2 + V replace plane waves.
# The transform is an isometry on L^2 and diagonalizes the operator.

# %%
import numpy as np

from nlsv import distorted, jost, potential

spec = potential.gaussian_barrier(x_min=-64.0, x_max=64.0, n_x=1025)
basis = distorted.basis_for(spec, jost.staggered_k_grid(0.02, 400))
print(f"{basis.n_k} k values, {basis.n_x} x points")

# %% [markdown]
# Parseval and inversion for a packet that overlaps the barrier.

# %%
x = basis.x
f = np.exp(-(x - 2.0) ** 2 / 8 + 0.7j * x)
ft = basis.forward(f)
print("||f~|| / ||f|| =", basis.l2_k(ft) / basis.l2_x(f))
print("round trip relative error =", basis.l2_x(basis.inverse(ft) - f) / basis.l2_x(f))

# %% [markdown]
# Diagonalization: the transform of (-f'' + V f) equals k^2 times the
# transform of f. The residual shrinks at fourth order with the grid.

# %%
g = x * np.exp(-x**2 / 4)
print("diagonalization residual:",
      distorted.diagonalization_residual(g, basis, potential.sample_potential(spec)))

# %% [markdown]
# Linear evolution is a phase in k, and the profile f~ = e^{-itk^2} u~ is
# constant for the linear flow.

# %%
ut = distorted.linear_propagate(ft, 10.0)
back = distorted.profile(ut, 10.0)
print("profile recovered:", np.allclose(back.values, ft.values))
