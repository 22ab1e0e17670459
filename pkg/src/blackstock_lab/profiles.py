"""Large-time profile symbols and the residual checks behind them.

Symbols (all radial, ``r = |xi|``)::

    G0 = (exp(-kappa r^2 t) - cos(r t) exp(-delta/2 r^2 t)) / r^2
    G1 = sin(r t) / r * exp(-delta/2 r^2 t)
    H0 = h0 * r t sin(r t) * exp(-delta/2 r^2 t)

``G0`` and ``G1`` are evaluated in forms that stay exact as ``r -> 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CauchyData, hat_value
from .modal import sinc
from .params import PhysicalParams
from .spectrum import DEGENERATE, RootTriple, exact_roots


@dataclass(frozen=True)
class MomentSet:
    """Moments of the data and the two combined constants.

    ``p_combined = p1 + (2 kappa - delta)/2 * p2`` and
    ``p2_coeff = h0_coeff * p2``.
    """

    p0: float
    p1: float
    p2: float
    m2: tuple
    p_combined: float
    p2_coeff: float

    @classmethod
    def build(cls, params: PhysicalParams, p0=0.0, p1=0.0, p2=0.0, m2=()):
        p1, p2 = float(p1), float(p2)
        return cls(
            p0=float(p0),
            p1=p1,
            p2=p2,
            m2=tuple(float(v) for v in m2),
            p_combined=p1 + 0.5 * (2.0 * params.kappa - params.delta) * p2,
            p2_coeff=params.h0_coeff * p2,
        )

    @classmethod
    def from_data(cls, params: PhysicalParams, data: CauchyData):
        return cls.build(params, data.psi0.p, data.psi1.p, data.psi2.p, data.psi2.m)

    @property
    def m2_norm_sq(self) -> float:
        return float(sum(v * v for v in self.m2))


def g0_hat(params: PhysicalParams, r, t):
    """Diffusion-wave symbol ``G0``; ``t**2/2 + (delta/2 - kappa) t`` at ``r = 0``."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    r2 = r * r
    half = 0.5 * params.delta
    gap = half - params.kappa
    x = gap * r2 * t
    damp = np.exp(-half * r2 * t)
    safe_x = np.where(x > 0, x, 1.0)
    ratio = np.where(x > 0, np.expm1(np.minimum(x, 1.0)) / np.minimum(safe_x, 1.0), 1.0)
    heat_small = damp * gap * t * ratio
    safe_r2 = np.where(r2 > 0, r2, 1.0)
    heat_big = (np.exp(-params.kappa * r2 * t) - damp) / safe_r2
    heat = np.where(x > 1.0, heat_big, heat_small)
    wave = damp * 0.5 * t * t * sinc(0.5 * r * t) ** 2
    out = heat + wave
    return float(out) if out.ndim == 0 else out


def g1_hat(params: PhysicalParams, r, t):
    """``t sinc(r t) exp(-delta/2 r^2 t)``; equals ``t`` at ``r = 0``."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    out = t * sinc(r * t) * np.exp(-0.5 * params.delta * r * r * t)
    return float(out) if out.ndim == 0 else out


def h0_hat(params: PhysicalParams, r, t):
    """``h0_coeff * r t sin(r t) exp(-delta/2 r^2 t)``."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    out = params.h0_coeff * r * t * np.sin(r * t) * np.exp(-0.5 * params.delta * r * r * t)
    return float(out) if out.ndim == 0 else out


def _pair_parts(roots: RootTriple, t: float):
    if roots.regime != "complex-pair":
        raise ValueError(f"auxiliary functions need the complex-pair regime, got {roots.regime}")
    lam1 = roots.lambda1
    lr, b = roots.lambda_re, roots.lambda_im
    a = lr - lam1
    p0 = a * a + b * b  # minus the denominator 2 lr lam1 - b^2 - lr^2 - lam1^2
    return lam1, lr, b, a, p0


def j0_hat(params: PhysicalParams, roots: RootTriple, t: float, psi2_hat: complex) -> complex:
    """``(exp(lambda1 t) - cos(lambda_im t) exp(lambda_re t)) / P0 * psi2_hat``."""
    lam1, lr, b, a, p0 = _pair_parts(roots, t)
    d = a * t
    if abs(d) <= 1.0:
        ediff = np.exp(lam1 * t) * np.expm1(d)
    else:
        ediff = np.exp(lr * t) - np.exp(lam1 * t)
    num = 2.0 * np.exp(lam1 * t) * np.sin(0.5 * b * t) ** 2 - np.cos(b * t) * ediff
    return complex(num / p0 * psi2_hat)


def j1_hat(params: PhysicalParams, roots: RootTriple, t: float,
           psi1_hat: complex, psi2_hat: complex) -> complex:
    """``exp(lambda_re t) sin(lambda_im t)/lambda_im * (lambda_im^2 psi1 + (lambda_re - lambda1) psi2) / P0``."""
    lam1, lr, b, a, p0 = _pair_parts(roots, t)
    f1 = np.exp(lr * t) * t * sinc(b * t)
    return complex(f1 * (b * b * psi1_hat + a * psi2_hat) / p0)


def psi1_hat(params: PhysicalParams, r, t, moments: MomentSet):
    """First-order profile symbol ``G0 * P_psi2``."""
    return g0_hat(params, r, t) * moments.p2


def psi2_hat_parts(params: PhysicalParams, r, t, moments: MomentSet):
    """Split of the second-order profile symbol.

    Returns ``(scalar_part, vector_coeff)`` with
    ``scalar_part = (p_combined + p2_coeff t r^2) G1`` and
    ``vector_coeff = G0``.  With the transform convention
    ``f_hat = int exp(-i x.xi) f`` the full symbol is
    ``scalar_part - i (xi . M) vector_coeff``; only squares enter norms, so
    the split is sign-agnostic.
    """
    r = np.asarray(r, dtype=float)
    scalar = (moments.p_combined + moments.p2_coeff * t * r * r) * g1_hat(params, r, t)
    return scalar, g0_hat(params, r, t)


@dataclass(frozen=True)
class ResidualReport:
    """Maximal normalized residual ratios over a grid (``c = kappa/2``).

    ``est01_raw`` is the first ratio without its ``t**0.5`` allowance.
    """

    est01: float
    est01_raw: float
    est02: float
    est03: float
    rows: tuple = ()


def residual_rows(params: PhysicalParams, r_grid, t_grid, data: CauchyData):
    """Per-point residual ratios at ``xi = r e1``.

    Rows are ``(r, t, g0, g1, h0, j0_err, est01, est01_raw, est02, est03)``
    where ``j0_err = |J0 - G0 psi2_hat|``.
    """
    rows = []
    c = 0.5 * params.kappa
    for r in np.atleast_1d(np.asarray(r_grid, dtype=float)):
        roots = exact_roots(params, float(r))
        if roots.regime == DEGENERATE:
            raise ValueError(f"degenerate roots at r={r!r}")
        xi = np.array([r])
        d1 = hat_value(data.psi1, xi)
        d2 = hat_value(data.psi2, xi)
        comb = d1 + 0.5 * (2.0 * params.kappa - params.delta) * d2
        for t in np.atleast_1d(np.asarray(t_grid, dtype=float)):
            g0 = g0_hat(params, r, t)
            g1 = g1_hat(params, r, t)
            h0 = h0_hat(params, r, t)
            env = np.exp(-c * r * r * t)
            j0 = j0_hat(params, roots, t, d2)
            j1 = j1_hat(params, roots, t, d1, d2)
            e01 = abs(j0 - g0 * d2)
            e02 = abs(j0 - g0 * d2 - h0 * d2)
            e03 = abs(j1 - g1 * comb)
            n2 = abs(d2)
            n12 = abs(d1) + abs(d2)
            est01_raw = e01 / (env * n2) if n2 > 0 else 0.0
            rows.append((
                float(r), float(t), float(g0), float(g1), float(h0), float(e01),
                est01_raw / np.sqrt(t), est01_raw,
                e02 / (env * n2) if n2 > 0 else 0.0,
                e03 / (env * n12) if n12 > 0 else 0.0,
            ))
    return rows


def residual_order_check(params: PhysicalParams, r_grid, t_grid, data: CauchyData) -> ResidualReport:
    """Maximal residual ratios of the auxiliary-function estimates."""
    rows = residual_rows(params, r_grid, t_grid, data)
    cols = np.array([row[6:] for row in rows]) if rows else np.zeros((1, 4))
    return ResidualReport(
        est01=float(cols[:, 0].max()),
        est01_raw=float(cols[:, 1].max()),
        est02=float(cols[:, 2].max()),
        est03=float(cols[:, 3].max()),
        rows=tuple(rows),
    )
