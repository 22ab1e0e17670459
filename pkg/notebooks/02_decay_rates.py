# %% [markdown]
# # Decay and growth rates of the solution
#
# Norms are computed on the Fourier side by radial quadrature and fitted to
# ``C t**alpha (ln t)**beta`` with ``beta`` in {0, 1/2}.  The full solution
# follows the second rate family; after removing the first profile the
# residual follows the first family.

# %%
import numpy as np

from blackstock_lab.experiments import generic_data, theorem21_data
from blackstock_lab.params import default_params
from blackstock_lab.quadrature import norm_table
from blackstock_lab.rates import dn_reference, fit_rate

p = default_params()
t_grid = np.geomspace(1e2, 1e6, 13)
dims = (1, 2, 3, 4, 5)

# %% [markdown]
# ## Full solution, data with nonzero mean of the third datum

# %%
tables = [norm_table(p, theorem21_data(), t, dims) for t in t_grid]
for n in dims:
    fit = fit_rate([(t, tab[(0, n)].norm) for t, tab in zip(t_grid, tables)], dn_reference(2, n))
    print(f"n={n} alpha={fit.alpha:+.3f} beta={fit.beta} ref={fit.reference} {fit.verdict}")

# %% [markdown]
# ## Residuals after one and two profiles
#
# The second residual divided by the first-family rate must shrink by at
# least half over the last decade.

# %%
tables = [norm_table(p, generic_data(), t, dims, levels=(1, 2)) for t in t_grid]
for n in dims:
    ref = dn_reference(1, n)
    fit = fit_rate([(t, tab[(1, n)].norm) for t, tab in zip(t_grid, tables)], ref)
    ratio = [tab[(2, n)].norm / (t ** ref[0] * np.log(t) ** ref[1]) for t, tab in zip(t_grid, tables)]
    print(f"n={n} first alpha={fit.alpha:+.3f} beta={fit.beta} {fit.verdict}; "
          f"second/rate {ratio[-5]:.2e} -> {ratio[-1]:.2e}")
