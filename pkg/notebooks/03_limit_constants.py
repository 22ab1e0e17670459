# %% [markdown]
# # Lower-bound constants
#
# The squared norm of the second profile splits into a moment part and
# three scalar parts.  Scaled by ``t**(n/2-1)`` the scalar parts tend to a
# quadratic form in the two combined constants.  The perfect-square
# version of that form follows only if ``Gamma(n/2)`` is replaced by
# ``(n/2) Gamma(n/2-1)``; this script shows which one the quadrature
# approaches.

# %%
import math

import numpy as np

from blackstock_lab.experiments import degenerate_data, generic_data
from blackstock_lab.params import default_params
from blackstock_lab.profiles import MomentSet
from blackstock_lab.quadrature import (
    a2_limit_constant,
    a2_limit_constant_square,
    gamma_limit_integral,
    norm_table,
    psi2_lower_decomposition,
)

p = default_params()

# %% [markdown]
# ## Gamma limits of the oscillatory radial integrals

# %%
for n in (3, 4, 5):
    for off in (-3, -1, 1):
        v, lim, err = gamma_limit_integral(n, p.delta, 1e6, off)
        print(f"n={n} offset={off:+d} value={v:.8f} limit={lim:.8f} rel_err={err:.1e}")

# %% [markdown]
# ## Scaled scalar part against both constants

# %%
m = MomentSet(0.0, 0.0, 0.0, (), 1.0, 0.3)
for n in (3, 4, 5):
    for t in (1e2, 1e3, 1e4, 1e5):
        scaled = sum(psi2_lower_decomposition(p, n, t, m)[1:]) * t ** (n / 2 - 1)
        print(f"n={n} t={t:.0e} scaled={scaled:.6f} exact={a2_limit_constant(p, n, m):.6f} "
              f"square={a2_limit_constant_square(p, n, m):.6f}")

# %% [markdown]
# ## Consequence for the degenerate data
#
# The exact form is positive definite for ``n >= 3``, so data that zero the
# square still leave a ``t**(-1/4)`` residual in three dimensions.

# %%
data = degenerate_data(p, generic_data())
mom = MomentSet.from_data(p, data)
for t in np.geomspace(1e4, 1e7, 4):
    got = norm_table(p, data, t, [3], levels=(1,))[(1, 3)].norm
    pred = math.sqrt((2 * math.pi) ** -3 * a2_limit_constant(p, 3, mom) * t**-0.5)
    print(f"t={t:.0e} residual={got:.6e} exact-constant prediction={pred:.6e}")
