"""Exact per-frequency solution and a time-stepping oracle.

For a radial frequency ``r`` the transform of the solution is

    psi_hat(t) = K0(t) psi0_hat + K1(t) psi1_hat + K2(t) psi2_hat

where ``K2`` is the divided difference of ``exp(lambda t)`` at the three
characteristic roots, ``K1 = K2' + c2 K2`` and ``K0 = K2'' + c2 K2' + c1 K2``.
All three are evaluated in real, cancellation-free forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .params import PhysicalParams
from .spectrum import DegenerateSpectrumError, char_poly_coeffs, root_arrays

MAX_STEPS = 10**9
_SERIES_TERMS = 26


class StepBudgetError(RuntimeError):
    """The oracle would need more than ``MAX_STEPS`` steps."""


@dataclass(frozen=True)
class DataHat:
    """Data transforms at one frequency."""

    psi0_hat: complex = 0.0
    psi1_hat: complex = 0.0
    psi2_hat: complex = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.psi0_hat, self.psi1_hat, self.psi2_hat], dtype=complex)


class KernelTriple(NamedTuple):
    k0: complex
    k1: complex
    k2: complex


def sinc(x):
    """Unnormalized ``sin(x)/x`` with value 1 at 0.

    Divides directly instead of going through ``np.sinc(x/pi)``, whose
    round trip through pi costs relative accuracy near zeros of ``sin``.
    """
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0.0, 1.0, x)
    return np.where(x == 0.0, 1.0, np.sin(x) / safe)


def _exp_diff(x, y, t):
    """``exp(x t) - exp(y t)`` without cancellation when ``x ~ y``."""
    d = (x - y) * t
    near = np.abs(d) <= 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.exp(x * t) - np.exp(y * t)
        close = np.exp(y * t) * np.expm1(d)
    return np.where(near, close, direct)


def _g(x, y, t):
    """Divided difference ``(exp(x t) - exp(y t)) / (x - y)``, real x, y."""
    hi = np.maximum(x, y)
    d = np.abs(x - y) * t
    safe = np.where(d > 0, d, 1.0)
    ratio = np.where(d > 0, -np.expm1(-safe) / safe, 1.0)
    return np.exp(hi * t) * t * ratio


def _k2_series(base, s, p, t):
    """``exp(base t) * sum_m h_m t**(m+2)/(m+2)!`` with ``h_m = s h_{m-1} - p h_{m-2}``."""
    h_prev = np.zeros_like(s)
    h = np.ones_like(s)
    coef = t * t / 2.0
    total = coef * h
    for m in range(1, _SERIES_TERMS):
        h, h_prev = s * h - p * h_prev, h
        coef = coef * t / (m + 2)
        total = total + coef * h
    return np.exp(base * t) * total


def kernel_arrays(params: PhysicalParams, r, t, roots=None):
    """Vectorized kernels ``(K0, K1, K2)`` as real arrays.

    ``r`` (positive) and ``t`` (non-negative) broadcast against each other.
    Degenerate frequencies are evaluated by continuity (a coalesced pair
    is handled by the ``lambda_im -> 0`` limit of the pair formulas).
    """
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    rb, tb = np.broadcast_arrays(r, t)
    shape = rb.shape
    rb, tb = rb.ravel(), tb.ravel()
    if roots is None:
        ur, inv = np.unique(rb, return_inverse=True)
        ra = root_arrays(params, ur)
        l1, l2, l3, regime = ra.lambda1[inv], ra.lambda2[inv], ra.lambda3[inv], ra.regime[inv]
    else:
        # roots are given per element of r
        l1, l2, l3, regime = (np.broadcast_to(np.asarray(x).reshape(r.shape), shape).ravel()
                              for x in (roots.lambda1, roots.lambda2, roots.lambda3, roots.regime))

    k0 = np.empty(rb.shape)
    k1 = np.empty(rb.shape)
    k2 = np.empty(rb.shape)

    three = regime == 1
    pair = ~three
    if np.any(pair):
        tt = tb[pair]
        lam1 = l1[pair]
        lr = l2[pair].real
        b = np.abs(l2[pair].imag)
        a = lr - lam1
        p0 = a * a + b * b
        spread = np.sqrt(p0) * tt
        e_r = np.exp(lr * tt)
        f1 = e_r * tt * sinc(b * tt)
        cosb = np.cos(b * tt)
        with np.errstate(divide="ignore", invalid="ignore"):
            big = (2.0 * np.exp(lam1 * tt) * np.sin(0.5 * b * tt) ** 2
                   - cosb * _exp_diff(lr, lam1, tt) + a * f1) / p0
        small = _k2_series(lam1, 2.0 * a, p0, tt)
        kk2 = np.where(spread <= 1.0, small, big)
        k2[pair] = kk2
        k1[pair] = -2.0 * lr * kk2 + f1
        k0[pair] = (lr * lr + b * b) * kk2 - lr * f1 + e_r * cosb

    if np.any(three):
        tt = tb[three]
        x1 = l1[three]
        x2 = l2[three].real
        x3 = l3[three].real
        xs = np.sort(np.stack([x1, x2, x3]), axis=0)
        f1 = _g(x2, x3, tt)
        spread = (xs[2] - xs[0]) * tt
        with np.errstate(divide="ignore", invalid="ignore"):
            big = (_g(xs[1], xs[2], tt) - _g(xs[0], xs[1], tt)) / (xs[2] - xs[0])
        u, v = x2 - x1, x3 - x1
        small = _k2_series(x1, u + v, u * v, tt)
        kk2 = np.where(spread <= 1.0, small, big)
        k2[three] = kk2
        k1[three] = -(x2 + x3) * kk2 + f1
        k0[three] = x2 * x3 * kk2 - x3 * f1 + np.exp(x3 * tt)

    return k0.reshape(shape), k1.reshape(shape), k2.reshape(shape)


def kernels(params: PhysicalParams, r: float, t: float) -> KernelTriple:
    """Kernel values at one ``(r, t)``.

    ``r = 0`` gives the kernels of ``psi''' = 0``: ``(1, t, t**2/2)``.

    Raises
    ------
    DegenerateSpectrumError
        At a repeated characteristic root.
    """
    r, t = float(r), float(t)
    if r < 0 or t < 0:
        raise ValueError("need r >= 0 and t >= 0")
    if r == 0.0:
        return KernelTriple(1.0 + 0j, complex(t), complex(0.5 * t * t))
    ra = root_arrays(params, r)
    if ra.regime[0] == 2:
        raise DegenerateSpectrumError(f"repeated characteristic root at r={r!r}")
    k0, k1, k2 = kernel_arrays(params, np.array([r]), t)
    return KernelTriple(complex(k0[0]), complex(k1[0]), complex(k2[0]))


def solve_modal(params: PhysicalParams, r_or_xi, t: float, data: DataHat) -> complex:
    """``K0 psi0_hat + K1 psi1_hat + K2 psi2_hat`` at one frequency."""
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(r_or_xi, dtype=float))))
    if t == 0:
        return complex(data.psi0_hat)
    k = kernels(params, r, t)
    return k.k0 * data.psi0_hat + k.k1 * data.psi1_hat + k.k2 * data.psi2_hat


def _system_matrices(params, r):
    c2, c1, c0 = (np.atleast_1d(c) for c in char_poly_coeffs(params, r))
    a = np.zeros((c2.size, 3, 3))
    a[:, 0, 1] = 1.0
    a[:, 1, 2] = 1.0
    a[:, 2, 0] = -c0
    a[:, 2, 1] = -c1
    a[:, 2, 2] = -c2
    return a


def _rk4_step_matrix(a, h):
    ha = h * a
    eye = np.broadcast_to(np.eye(3), a.shape)
    ha2 = ha @ ha
    ha3 = ha2 @ ha
    return eye + ha + ha2 / 2.0 + ha3 / 6.0 + (ha3 @ ha) / 24.0


def ode_oracle_sweep(params: PhysicalParams, r, t_grid, data: DataHat, dt: float) -> np.ndarray:
    """Classical RK4 solution on every ``(r, t)`` of two grids.

    For a linear constant-coefficient system one RK4 step is multiplication
    by the fourth-degree Taylor polynomial of ``exp(h A)``; repeated steps
    are applied as a matrix power.  Each segment between consecutive times
    uses ``ceil(gap/dt)`` equal steps.

    Returns
    -------
    ndarray of complex, shape ``(len(r), len(t_grid))``.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t_grid < 0):
        raise ValueError("t must be non-negative")
    limit = 0.01 * np.minimum(1.0, 1.0 / np.maximum(r, 1e-300))
    if np.any(dt > limit * (1 + 1e-12)):
        raise ValueError(f"dt={dt!r} too coarse; need dt <= 0.01*min(1, 1/r)")
    order = np.argsort(t_grid, kind="stable")
    total = int(math.ceil(t_grid.max() / dt)) if t_grid.size else 0
    if total > MAX_STEPS:
        raise StepBudgetError(f"{total} steps exceed the guard of {MAX_STEPS}")
    a = _system_matrices(params, r)
    state = np.broadcast_to(data.as_array(), (r.size, 3)).copy()
    out = np.empty((r.size, t_grid.size), dtype=complex)
    now = 0.0
    for j in order:
        gap = t_grid[j] - now
        if gap > 0:
            steps = int(math.ceil(gap / dt))
            m = _rk4_step_matrix(a, gap / steps)
            state = np.einsum("kij,kj->ki", np.linalg.matrix_power(m, steps), state)
            now = t_grid[j]
        out[:, j] = state[:, 0]
    return out


def ode_oracle(params: PhysicalParams, r: float, t: float, data: DataHat, dt: float = 1e-4) -> complex:
    """RK4 reference value of ``psi_hat(t, r)``."""
    if t == 0:
        return complex(data.psi0_hat)
    return complex(ode_oracle_sweep(params, [r], [t], data, dt)[0, 0])


def pointwise_bound_margin(params: PhysicalParams, r, t):
    """Ratios of ``|K_j|`` to the diffusion-wave envelopes with ``c = kappa/2``.

    Returns ``(m0, m1, m2)`` broadcast over ``r`` and ``t``.
    """
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 1):
        raise ValueError("pointwise margins need t >= 1")
    k0, k1, k2 = kernel_arrays(params, r, t)
    env = np.exp(-0.5 * params.kappa * r * r * t)
    srt = np.abs(np.sin(r * t))
    b0 = env
    b1 = (1.0 + srt / r) * env
    b2 = (np.abs(np.cos(r * t)) * t + srt / r + np.sin(0.5 * r * t) ** 2 / (r * r)) * env
    return np.abs(k0) / b0, np.abs(k1) / b1, np.abs(k2) / b2


def oracle_sweep(params: PhysicalParams, r_grid, t_grid, data: DataHat, dt: float = 1e-4):
    """Compare :func:`kernel_arrays` against the RK4 oracle on a grid.

    Returns a list of ``(r, t, modal, oracle, scaled_err)`` rows where
    ``scaled_err = |modal - oracle| / (1 + |oracle|)``.
    """
    r_grid = np.atleast_1d(np.asarray(r_grid, dtype=float))
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    ref = ode_oracle_sweep(params, r_grid, t_grid, data, dt)
    k0, k1, k2 = kernel_arrays(params, r_grid[:, None], t_grid[None, :])
    d = data.as_array()
    modal = k0 * d[0] + k1 * d[1] + k2 * d[2]
    rows = []
    for i, r in enumerate(r_grid):
        for j, t in enumerate(t_grid):
            err = abs(modal[i, j] - ref[i, j]) / (1.0 + abs(ref[i, j]))
            rows.append((float(r), float(t), complex(modal[i, j]), complex(ref[i, j]), float(err)))
    return rows
