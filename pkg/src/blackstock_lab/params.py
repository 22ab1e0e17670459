"""Physical constants of the rescaled linear Blackstock model.

Only the four primitive inputs (nu, prandtl, b, gamma) are ever set; every
other coefficient is derived from them so a parameter set cannot be
internally inconsistent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, fields
from typing import Mapping

#: kappa/delta above this triggers a soft warning (the model assumes kappa << delta).
SMALL_KAPPA_RATIO = 0.2

#: relative tolerance used to decide that kappa == b*nu (Becker's case).
BECKER_RTOL = 1e-12

GAMMA_MAX = 5.0 / 3.0


class ParameterError(ValueError):
    """Raised for inadmissible physical inputs."""


class SmallKappaWarning(UserWarning):
    """kappa is not small compared to delta."""


@dataclass(frozen=True)
class PhysicalParams:
    """Immutable parameter set with all derived coefficients.

    Attributes
    ----------
    nu, prandtl, b, gamma : float
        Primitive inputs: kinematic viscosity, Prandtl number, viscosity
        number and ratio of specific heats.
    kappa : float
        Thermal diffusivity ``nu / prandtl``.
    delta : float
        Diffusivity of sound ``b*nu + (gamma - 1)*kappa``.
    gamma_tilde : float
        ``gamma*b*nu*kappa``.
    delta_hat : float
        ``-kappa**2 * (delta - gamma*b*nu)``; the r**4 coefficient of the
        heat-like root.
    delta_tilde : float
        ``(delta**2 + 20*kappa*delta - 8*kappa**2 - 12*gamma_tilde) / 4``.
    h0_coeff : float
        ``(4*delta_hat - kappa*delta**2) / (8*kappa)``; the r**3 correction
        of the wave frequency.
    becker : bool
        True when ``delta - gamma*b*nu`` vanishes (monatomic gas).
    kappa_warning : bool
        True when ``kappa/delta`` exceeds :data:`SMALL_KAPPA_RATIO`.
    """

    nu: float
    prandtl: float
    b: float
    gamma: float
    kappa: float
    delta: float
    gamma_tilde: float
    delta_hat: float
    delta_tilde: float
    h0_coeff: float
    becker: bool
    kappa_warning: bool

    @property
    def primitive(self) -> dict[str, float]:
        return {"nu": self.nu, "prandtl": self.prandtl, "b": self.b, "gamma": self.gamma}

    def to_config(self) -> dict[str, str]:
        """Key-value section; derived fields are included for reading only."""
        out = {k: repr(float(v)) for k, v in self.primitive.items()}
        for name in ("kappa", "delta", "gamma_tilde", "delta_hat", "delta_tilde", "h0_coeff"):
            out[name] = repr(float(getattr(self, name)))
        out["becker"] = str(self.becker).lower()
        return out


DERIVED_FIELDS = tuple(
    f.name for f in fields(PhysicalParams) if f.name not in ("nu", "prandtl", "b", "gamma")
)


def derive_constants(nu: float, prandtl: float, b: float, gamma: float) -> PhysicalParams:
    """Build a :class:`PhysicalParams` from the primitive inputs.

    Raises
    ------
    ParameterError
        If any input is non-positive or ``gamma`` lies outside ``(1, 5/3]``.
    """
    nu, prandtl, b, gamma = float(nu), float(prandtl), float(b), float(gamma)
    for name, value in (("nu", nu), ("prandtl", prandtl), ("b", b)):
        if not value > 0.0:
            raise ParameterError(f"{name} must be positive, got {value!r}")
    if not (1.0 < gamma <= GAMMA_MAX):
        raise ParameterError(f"gamma must lie in (1, 5/3], got {gamma!r}")

    kappa = nu / prandtl
    bnu = b * nu
    delta = bnu + (gamma - 1.0) * kappa
    gamma_tilde = gamma * bnu * kappa
    becker = abs(kappa - bnu) <= BECKER_RTOL * bnu
    # delta - gamma*b*nu == (gamma - 1)*(kappa - b*nu); the factored form has
    # no cancellation.
    delta_hat = 0.0 if becker else -kappa**2 * (gamma - 1.0) * (kappa - bnu)
    delta_tilde = 0.25 * (delta**2 + 20.0 * kappa * delta - 8.0 * kappa**2 - 12.0 * gamma_tilde)
    h0_coeff = (4.0 * delta_hat - kappa * delta**2) / (8.0 * kappa)

    if not (0.0 < kappa < delta):
        raise ParameterError(f"need 0 < kappa < delta, got kappa={kappa!r}, delta={delta!r}")
    kappa_warning = kappa / delta > SMALL_KAPPA_RATIO
    if kappa_warning:
        warnings.warn(
            f"kappa/delta = {kappa / delta:.3g} exceeds {SMALL_KAPPA_RATIO}; "
            "asymptotic regimes may need larger times",
            SmallKappaWarning,
            stacklevel=2,
        )
    return PhysicalParams(
        nu=nu,
        prandtl=prandtl,
        b=b,
        gamma=gamma,
        kappa=kappa,
        delta=delta,
        gamma_tilde=gamma_tilde,
        delta_hat=delta_hat,
        delta_tilde=delta_tilde,
        h0_coeff=h0_coeff,
        becker=becker,
        kappa_warning=kappa_warning,
    )


def becker_preset(nu: float) -> PhysicalParams:
    """Monatomic perfect gas: ``Pr = 3/4``, ``b = 4/3``, ``gamma = 5/3``."""
    if not float(nu) > 0.0:
        raise ParameterError(f"nu must be positive, got {nu!r}")
    with warnings.catch_warnings():
        # kappa/delta = 3/5 here by construction
        warnings.simplefilter("ignore", SmallKappaWarning)
        return derive_constants(nu, 0.75, 4.0 / 3.0, GAMMA_MAX)


def default_params() -> PhysicalParams:
    """Repository default set (nu=0.1, Pr=10, b=4/3, gamma=1.4)."""
    return derive_constants(0.1, 10.0, 4.0 / 3.0, 1.4)


def params_from_mapping(section: Mapping[str, object]) -> PhysicalParams:
    """Read the ``nu, prandtl, b, gamma`` keys of a config section.

    Derived keys, if present, are checked against the recomputed values and
    otherwise ignored.
    """
    try:
        primitive = {k: float(section[k]) for k in ("nu", "prandtl", "b", "gamma")}
    except KeyError as exc:
        raise ParameterError(f"missing parameter key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"bad parameter value: {exc}") from None
    params = derive_constants(**primitive)
    for name in ("kappa", "delta", "gamma_tilde", "delta_hat", "delta_tilde", "h0_coeff"):
        if name in section:
            given = float(section[name])
            actual = getattr(params, name)
            if abs(given - actual) > 1e-12 * max(abs(actual), 1e-300):
                raise ParameterError(
                    f"derived field {name} is read-only: got {given!r}, recomputed {actual!r}"
                )
    return params
