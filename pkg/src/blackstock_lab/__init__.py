"""Fourier-side solver and decay-rate laboratory for a third-order dissipative wave model.

Modules
-------
params       physical constants and derived combinations
spectrum     roots of the characteristic cubic
modal        kernel functions, modal solution and an RK4 reference
profiles     asymptotic profile symbols and residual estimates
data         Gaussian-moment Cauchy data
quadrature   radial Plancherel norms and closed-form limits
rates        power/log rate fitting
experiments  scenario runners behind the ``blackstock-lab`` command
"""

from .params import PhysicalParams, becker_preset, default_params
from .spectrum import RootTriple, exact_roots
from .modal import DataHat, kernels, solve_modal
from .data import CauchyData, DatumSpec
from .quadrature import NormTask, evaluate_norm, multiplier_norm
from .rates import RateFit, fit_rate, vanishing_ratio_check

__all__ = [
    "PhysicalParams", "becker_preset", "default_params",
    "RootTriple", "exact_roots",
    "DataHat", "kernels", "solve_modal",
    "CauchyData", "DatumSpec",
    "NormTask", "evaluate_norm", "multiplier_norm",
    "RateFit", "fit_rate", "vanishing_ratio_check",
]

__version__ = "0.1.0"
