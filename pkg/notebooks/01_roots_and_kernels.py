# %% [markdown]
# # Characteristic roots and kernels
#
# The Fourier-side equation at radial frequency ``r`` is a third-order ODE
# whose characteristic cubic has one heat-like real root and a damped wave
# pair for small ``r``.  This script compares the exact roots with their
# small-frequency expansion and checks the kernels against the RK4 reference.

# %%
import numpy as np

from blackstock_lab.modal import DataHat, kernels, ode_oracle, pointwise_bound_margin
from blackstock_lab.params import becker_preset, default_params
from blackstock_lab.spectrum import asymptotic_roots, exact_roots, expansion_order

p = default_params()
print(f"kappa={p.kappa:.4g} delta={p.delta:.6g} delta_hat={p.delta_hat:.6g} h0={p.h0_coeff:.6g}")

# %% [markdown]
# ## Roots against the expansion
#
# The real root and the real part of the pair depend on ``r**2`` only, so
# their truncation error after the ``r**4`` terms is ``O(r**6)``; the
# imaginary part is odd in ``r`` and keeps an ``O(r**5)`` remainder.

# %%
for r in (0.1, 0.05, 0.025):
    ex, asy = exact_roots(p, r), asymptotic_roots(p, r)
    print(f"r={r:<6} lambda1 err={abs(ex.lambda1 - asy.lambda1):.3e} "
          f"re err={abs(ex.lambda_re - asy.lambda_re):.3e} im err={abs(ex.lambda_im - asy.lambda_im):.3e}")

eo = expansion_order(p, 0.1 * 2.0 ** -np.arange(8))
print("measured slopes:", round(eo.s1, 3), round(eo.s23_re, 3), round(eo.s23_im, 3))

# %% [markdown]
# Under the monatomic-gas preset the cubic factors and the heat root is
# exactly ``-kappa r**2``.

# %%
b = becker_preset(0.03)
print("Becker exact flags:", expansion_order(b, 0.1 * 2.0 ** -np.arange(8)).exact)

# %% [markdown]
# ## Kernels against time stepping

# %%
data = DataHat(1.0, 1.0, 1.0)
for r, t in ((0.05, 100.0), (1.0, 20.0), (5.0, 10.0)):
    k = kernels(p, r, t)
    modal = k.k0 + k.k1 + k.k2
    ref = ode_oracle(p, r, t, data, dt=min(1e-4, 0.01 / r))
    print(f"r={r:<5} t={t:<6} modal={modal.real:+.12e} oracle={ref.real:+.12e}")

# %% [markdown]
# ## Pointwise envelopes
#
# The ratios of ``|K_j|`` to the diffusion-wave envelopes with
# ``c = kappa/2`` stay bounded over the small-frequency zone.

# %%
m = pointwise_bound_margin(p, np.geomspace(0.01, 0.1, 10)[:, None], np.geomspace(1, 1e4, 25)[None, :])
print("max margins:", [float(np.round(x.max(), 4)) for x in m])
