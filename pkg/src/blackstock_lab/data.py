"""Gaussian-family initial data specified through their Fourier transforms.

A datum is ``f_hat(xi) = (P - i (M . xi)) exp(-sigma |xi|**2)`` with the
convention ``f_hat(xi) = int exp(-i x.xi) f(x) dx``.  Then ``f_hat(0) = P``
is the mean and ``i grad f_hat(0) = M`` the first moment, both exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np


class DataError(ValueError):
    """Invalid datum specification."""


@dataclass(frozen=True)
class DatumSpec:
    """One Gaussian-family datum.

    Parameters
    ----------
    p : float
        Mean ``P``.
    m : tuple of float
        First moment ``M``.  Shorter than the ambient dimension means the
        remaining components are zero.
    sigma : float
        Gaussian width in frequency, ``> 0``.
    """

    p: float = 0.0
    m: tuple = ()
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "m", tuple(float(v) for v in np.atleast_1d(self.m)) if np.size(self.m) else ())
        object.__setattr__(self, "sigma", float(self.sigma))
        if not self.sigma > 0:
            raise DataError(f"sigma must be positive, got {self.sigma!r}")
        if not all(np.isfinite([self.p, *self.m])):
            raise DataError("moments must be finite")

    @property
    def m_norm_sq(self) -> float:
        return float(sum(v * v for v in self.m))

    def m_padded(self, n: int) -> np.ndarray:
        """First moment as a length-``n`` vector."""
        if len(self.m) > n:
            if any(self.m[n:]):
                raise DataError(f"moment {self.m} does not fit in dimension {n}")
            return np.array(self.m[:n])
        return np.array(self.m + (0.0,) * (n - len(self.m)))

    def is_zero(self) -> bool:
        return self.p == 0.0 and self.m_norm_sq == 0.0


ZERO = DatumSpec()


@dataclass(frozen=True)
class CauchyData:
    """The three initial data ``(psi0, psi1, psi2)``."""

    psi0: DatumSpec = field(default_factory=DatumSpec)
    psi1: DatumSpec = field(default_factory=DatumSpec)
    psi2: DatumSpec = field(default_factory=DatumSpec)

    def __iter__(self):
        return iter((self.psi0, self.psi1, self.psi2))

    def is_zero(self) -> bool:
        return all(d.is_zero() for d in self)


def hat_value(spec: DatumSpec, xi) -> complex:
    """Transform of the datum at frequency vector ``xi``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    m = spec.m_padded(xi.size) if spec.m else np.zeros(xi.size)
    r2 = float(xi @ xi)
    return complex(spec.p, -float(m @ xi)) * np.exp(-spec.sigma * r2)


def moments(spec: DatumSpec) -> tuple[float, tuple]:
    """Return the stored ``(P, M)``; exact by construction."""
    return spec.p, spec.m


def weighted_moment_bound(spec: DatumSpec, xi_grid) -> float:
    """Maximum of ``|f_hat(xi) - P| / |xi|`` over a grid of frequencies.

    ``xi_grid`` has shape ``(k, n)``, or ``(k,)`` for one dimension.
    """
    xi_grid = np.asarray(xi_grid, dtype=float)
    if xi_grid.ndim == 1:
        xi_grid = xi_grid[:, None]
    r = np.sqrt(np.sum(xi_grid**2, axis=1))
    if np.any(r == 0):
        raise DataError("weighted moment bound needs nonzero frequencies")
    m = spec.m_padded(xi_grid.shape[1]) if spec.m else np.zeros(xi_grid.shape[1])
    r2 = r * r
    e = np.exp(-spec.sigma * r2)
    # f_hat - P = P expm1(-sigma r^2) - i (M.xi) e
    re = spec.p * np.expm1(-spec.sigma * r2)
    im = -(xi_grid @ m) * e
    return float(np.max(np.hypot(re, im) / r))


def radial_channels(spec: DatumSpec, r):
    """Radial split of the datum on the sphere ``|xi| = r``.

    Returns ``(s, w)`` with ``f_hat = s - i r (M.omega) w`` so that ``s`` is
    the scalar part and ``w`` the coefficient of the moment channel.
    """
    e = np.exp(-spec.sigma * np.asarray(r, dtype=float) ** 2)
    return spec.p * e, e


def datum_from_mapping(section: Mapping[str, object]) -> DatumSpec:
    """Build a datum from a ``p``/``m``/``sigma`` config section.

    ``m`` is a comma or whitespace separated list.
    """
    try:
        p = float(section.get("p", 0.0))
        raw = str(section.get("m", "")).replace(",", " ").split()
        m = tuple(float(v) for v in raw)
        sigma = float(section.get("sigma", 1.0))
    except ValueError as exc:
        raise DataError(f"bad datum entry: {exc}") from None
    return DatumSpec(p, m, sigma)
