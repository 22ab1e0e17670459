"""Characteristic roots of the per-frequency cubic.

The cubic is

    lambda**3 + (delta+kappa) r**2 lambda**2 + (1 + gamma_tilde r**2) r**2 lambda
        + kappa r**4 = 0.

Two independent exact paths are provided: a Cardano solver (hyperbolic form
when there is a single real root, trigonometric form for three real roots)
followed by one Newton step, and an eigenvalue oracle on a scaled companion
matrix.  :func:`asymptotic_roots` gives the small-frequency expansion through
r**4.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import mpmath
import numpy as np

from .params import PhysicalParams

COMPLEX_PAIR = "complex-pair"
THREE_REAL = "three-real"
DEGENERATE = "degenerate"

_REGIME_NAMES = {0: COMPLEX_PAIR, 1: THREE_REAL, 2: DEGENERATE}

#: |disc| below this times scale**6 is treated as a repeated root.
DEGENERATE_RTOL = 1e-14


class DegenerateSpectrumError(ArithmeticError):
    """The cubic has (numerically) repeated roots at this frequency."""


class ZoneError(ValueError):
    """Frequency outside the small-frequency zone."""


@dataclass(frozen=True)
class RootTriple:
    """Roots of the cubic at one radial frequency.

    In the complex-pair regime ``lambda2 = lambda_re + 1j*lambda_im`` and
    ``lambda3`` is its conjugate.  In the three-real regime the pair slots
    hold the two remaining real roots and ``lambda_im`` is 0.
    """

    r: float
    lambda1: float
    lambda2: complex
    lambda3: complex
    discriminant: float
    regime: str

    @property
    def lambda_re(self) -> float:
        return float(self.lambda2.real)

    @property
    def lambda_im(self) -> float:
        if self.regime == THREE_REAL:
            return 0.0
        return abs(float(self.lambda2.imag))

    @property
    def roots(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2, self.lambda3], dtype=complex)


class RootArrays(NamedTuple):
    """Vectorized roots; ``lambda2``/``lambda3`` are real in the three-real regime."""

    lambda1: np.ndarray
    lambda2: np.ndarray
    lambda3: np.ndarray
    discriminant: np.ndarray
    regime: np.ndarray  # 0 complex pair, 1 three real, 2 degenerate


def small_zone_radius(params: PhysicalParams) -> float:
    """Default small-frequency radius ``0.2 * min(1, 1/delta)``."""
    return 0.2 * min(1.0, 1.0 / params.delta)


def char_poly_coeffs(params: PhysicalParams, r):
    """Return ``(c2, c1, c0)`` of the monic cubic at radial frequency ``r``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radial frequency must be non-negative")
    r2 = r * r
    c2 = (params.delta + params.kappa) * r2
    c1 = (1.0 + params.gamma_tilde * r2) * r2
    c0 = params.kappa * r2 * r2
    if c2.ndim == 0:
        return float(c2), float(c1), float(c0)
    return c2, c1, c0


def _depressed(c2, c1, c0):
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2**3 / 27.0 - c2 * c1 / 3.0 + c0
    return p, q


def discriminant(params: PhysicalParams, r):
    """Discriminant ``-4 P**3 - 27 Q**2`` of the cubic."""
    c2, c1, c0 = char_poly_coeffs(params, r)
    p, q = _depressed(np.asarray(c2), np.asarray(c1), np.asarray(c0))
    out = -4.0 * p**3 - 27.0 * q * q
    return float(out) if np.ndim(out) == 0 else out


def discriminant_excess(params: PhysicalParams, r):
    """``disc + 4 r**6`` evaluated without the leading-order cancellation."""
    r = np.asarray(r, dtype=float)
    r2 = r * r
    k, d, gt = params.kappa, params.delta, params.gamma_tilde
    p4 = gt - (d + k) ** 2 / 3.0
    p = r2 + p4 * r2 * r2
    q = (2.0 * k - d) / 3.0 * r2 * r2 + (2.0 * (d + k) ** 3 / 27.0 - (d + k) * gt / 3.0) * r2**3
    # P**3 - r**6 = (P - r**2) (P**2 + P r**2 + r**4)
    out = -4.0 * p4 * r2 * r2 * (p * p + p * r2 + r2 * r2) - 27.0 * q * q
    return float(out) if out.ndim == 0 else out


def _root_scale(c2, c1, c0):
    return np.maximum(np.abs(c2), np.maximum(np.sqrt(np.abs(c1)), np.cbrt(np.abs(c0))))


def _horner(lam, c2, c1, c0):
    return ((lam + c2) * lam + c1) * lam + c0


def _newton(lam, c2, c1, c0):
    dp = (3.0 * lam + 2.0 * c2) * lam + c1
    p = _horner(lam, c2, c1, c0)
    safe = dp != 0
    step = np.where(safe, p / np.where(safe, dp, 1.0), 0.0)
    return lam - step


def root_arrays(params: PhysicalParams, r) -> RootArrays:
    """Cardano roots on an array of radial frequencies (r > 0)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise ValueError("exact roots need r > 0")
    c2, c1, c0 = char_poly_coeffs(params, r)
    c2, c1, c0 = np.atleast_1d(c2), np.atleast_1d(c1), np.atleast_1d(c0)
    p, q = _depressed(c2, c1, c0)
    disc = -4.0 * p**3 - 27.0 * q * q
    scale = _root_scale(c2, c1, c0)
    shift = c2 / 3.0

    regime = np.where(disc > 0, 1, 0)
    regime = np.where(np.abs(disc) <= DEGENERATE_RTOL * scale**6, 2, regime)

    lam1 = np.empty_like(r)
    lam2 = np.empty(r.shape, dtype=complex)
    lam3 = np.empty(r.shape, dtype=complex)

    one = regime != 1
    if np.any(one):
        pp, qq = p[one], q[one]
        mu = np.empty_like(pp)
        pos = pp > 0
        if np.any(pos):
            sp = np.sqrt(pp[pos] / 3.0)
            arg = 1.5 * qq[pos] / pp[pos] / sp
            mu[pos] = -2.0 * sp * np.sinh(np.arcsinh(arg) / 3.0)
        neg = pp < 0
        if np.any(neg):
            sp = np.sqrt(-pp[neg] / 3.0)
            arg = np.maximum(1.5 * np.abs(qq[neg]) / (-pp[neg]) / sp, 1.0)
            mu[neg] = -2.0 * np.sign(qq[neg]) * sp * np.cosh(np.arccosh(arg) / 3.0)
        zero = pp == 0
        if np.any(zero):
            mu[zero] = -np.cbrt(qq[zero])
        l1 = _newton(mu - shift[one], c2[one], c1[one], c0[one])
        s = -(c2[one] + l1)
        prod = -c0[one] / l1
        lr = 0.5 * s
        li = np.sqrt(np.maximum(prod - lr * lr, 0.0))
        z = _newton(lr + 1j * li, c2[one], c1[one], c0[one])
        lr, li = z.real, np.abs(z.imag)
        lam1[one] = l1
        lam2[one] = lr + 1j * li
        lam3[one] = lr - 1j * li

    three = regime == 1
    if np.any(three):
        pp, qq = p[three], q[three]
        sp = np.sqrt(-pp / 3.0)
        arg = np.clip(1.5 * qq / pp / sp, -1.0, 1.0)
        theta = np.arccos(arg) / 3.0
        ks = np.arange(3)[:, None]
        mus = 2.0 * sp * np.cos(theta - 2.0 * np.pi * ks / 3.0)
        lams = _newton(mus - shift[three], c2[three], c1[three], c0[three])
        target = -params.kappa * r[three] ** 2
        idx = np.argmin(np.abs(lams - target), axis=0)
        cols = np.arange(lams.shape[1])
        lam1[three] = lams[idx, cols]
        rest = np.sort(np.delete(lams.T, idx + 3 * cols, axis=None).reshape(-1, 2), axis=1)
        lam2[three] = rest[:, 1]
        lam3[three] = rest[:, 0]

    return RootArrays(lam1, lam2, lam3, disc, regime)


def exact_roots(params: PhysicalParams, r: float, allow_degenerate: bool = False) -> RootTriple:
    """Exact roots at one radial frequency via Cardano plus one Newton step.

    Raises
    ------
    DegenerateSpectrumError
        Near a repeated root, unless ``allow_degenerate`` is set.
    """
    r = float(r)
    if not r > 0:
        raise ValueError("exact roots need r > 0")
    ra = root_arrays(params, r)
    code = int(ra.regime[0])
    if code == 2 and not allow_degenerate:
        raise DegenerateSpectrumError(f"repeated characteristic root at r={r!r}")
    return RootTriple(
        r=r,
        lambda1=float(ra.lambda1[0]),
        lambda2=complex(ra.lambda2[0]),
        lambda3=complex(ra.lambda3[0]),
        discriminant=float(ra.discriminant[0]),
        regime=_REGIME_NAMES[code],
    )


def companion_roots(params: PhysicalParams, r) -> np.ndarray:
    """Oracle roots from eigenvalues of the scaled companion matrix.

    Returns an array of shape ``(len(r), 3)``; column 0 is the real root
    closest to ``-kappa r**2``, columns 1 and 2 the remaining pair with
    non-negative imaginary part first (or larger real root first).
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    c2, c1, c0 = char_poly_coeffs(params, r)
    c2, c1, c0 = np.atleast_1d(c2), np.atleast_1d(c1), np.atleast_1d(c0)
    s = _root_scale(c2, c1, c0)
    s = np.where(s > 0, s, 1.0)
    mats = np.zeros((r.size, 3, 3))
    mats[:, 0, 1] = 1.0
    mats[:, 1, 2] = 1.0
    mats[:, 2, 0] = -c0 / s**3
    mats[:, 2, 1] = -c1 / s**2
    mats[:, 2, 2] = -c2 / s
    ev = np.linalg.eigvals(mats) * s[:, None]
    out = np.empty((r.size, 3), dtype=complex)
    target = -params.kappa * r**2
    for i in range(r.size):
        e = ev[i]
        # the real root: smallest |imag| among candidates, closest to target
        key = np.abs(e.imag) * 1e3 + np.abs(e - target[i])
        j = int(np.argmin(key))
        rest = np.delete(e, j)
        if np.any(np.abs(rest.imag) > 0):
            rest = sorted(rest, key=lambda z: -z.imag)
        else:
            rest = sorted(rest, key=lambda z: -z.real)
        out[i] = [e[j].real + 0j, rest[0], rest[1]]
    return out


def vieta_residuals(params: PhysicalParams, r: float, roots) -> tuple[float, float, float]:
    """Relative residuals of the three Vieta identities.

    Each residual is ``|lhs - rhs|`` divided by the sum of magnitudes of
    the terms involved.
    """
    c2, c1, c0 = char_poly_coeffs(params, r)
    l1, l2, l3 = (complex(z) for z in roots)
    s = l1 + l2 + l3
    e2 = l1 * l2 + l1 * l3 + l2 * l3
    e3 = l1 * l2 * l3
    res_sum = abs(s + c2) / (abs(l1) + abs(l2) + abs(l3) + abs(c2))
    res_mid = abs(e2 - c1) / (abs(l1 * l2) + abs(l1 * l3) + abs(l2 * l3) + abs(c1))
    res_prod = abs(e3 + c0) / (abs(e3) + abs(c0))
    return float(res_sum), float(res_mid), float(res_prod)


def asymptotic_roots(params: PhysicalParams, r: float, eps0: float | None = None) -> RootTriple:
    """Small-frequency expansion of the roots, truncated after r**4.

    lambda1 = -kappa r**2 + delta_hat r**4
    lambda2 = i r - delta/2 r**2 + i h0 r**3 - delta_hat/2 r**4
    """
    eps0 = small_zone_radius(params) if eps0 is None else eps0
    r = float(r)
    if not (0.0 < r <= eps0):
        raise ZoneError(f"r={r!r} outside the small-frequency zone (0, {eps0!r}]")
    l1, lr, li = _asymptotic_parts(params, r)
    return RootTriple(
        r=r,
        lambda1=l1,
        lambda2=complex(lr, li),
        lambda3=complex(lr, -li),
        discriminant=discriminant(params, r),
        regime=COMPLEX_PAIR,
    )


def _asymptotic_parts(params, r):
    r2 = r * r
    l1 = -params.kappa * r2 + params.delta_hat * r2 * r2
    lr = -0.5 * params.delta * r2 - 0.5 * params.delta_hat * r2 * r2
    li = r + params.h0_coeff * r2 * r
    return l1, lr, li


@dataclass(frozen=True)
class ExpansionOrder:
    """Fitted log-log slopes of |exact - asymptotic| against r.

    A slope is ``nan`` when the corresponding difference vanishes on the
    whole grid (flagged in ``exact``).
    """

    s1: float
    s23_re: float
    s23_im: float
    max_err: tuple[float, float, float]
    exact: tuple[bool, bool, bool]
    errors: tuple = ()


def _mp_roots(coeffs, r, dps):
    reals = []
    roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=2 * dps)
    for z in roots:
        if abs(mpmath.im(z)) <= mpmath.mpf(10) ** (-dps // 2) * abs(z):
            reals.append(z)
    if len(reals) != 1:
        raise DegenerateSpectrumError(f"expected one real root at r={r!r}")
    pair = [z for z in roots if z is not reals[0]]
    z2 = pair[0] if mpmath.im(pair[0]) > 0 else pair[1]
    return mpmath.re(reals[0]), mpmath.re(z2), mpmath.im(z2)


def expansion_order(params: PhysicalParams, r_grid, eps0: float | None = None,
                    dps: int = 50, exact_tol: float = 1e-13) -> ExpansionOrder:
    """Measure the remainder order of :func:`asymptotic_roots`.

    The cubic, its roots and the expansion constants are all formed in
    ``dps``-digit arithmetic from the stored ``kappa``, ``delta`` and
    ``gamma_tilde``, so remainders far below double resolution are measured
    without coefficient rounding.  A component whose error stays below
    ``exact_tol`` times the size of the root is flagged exact.
    """
    eps0 = small_zone_radius(params) if eps0 is None else eps0
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.size < 8:
        raise ValueError("need at least 8 grid points")
    if np.any(r_grid <= 0) or np.any(r_grid > eps0):
        raise ZoneError("grid leaves the small-frequency zone")
    if discriminant(params, float(r_grid.max())) >= 0:
        raise DegenerateSpectrumError("grid reaches a non-negative discriminant")
    errs = np.empty((r_grid.size, 3))
    rel = np.empty((r_grid.size, 3))
    with mpmath.workdps(dps):
        kappa = mpmath.mpf(params.kappa)
        delta = mpmath.mpf(params.delta)
        gt = mpmath.mpf(params.gamma_tilde)
        # delta_hat = -kappa^2 (delta - gamma b nu) with gamma b nu = gamma_tilde/kappa
        dhat = kappa * gt - kappa**2 * delta
        h0 = (4 * dhat - kappa * delta**2) / (8 * kappa)
        for i, r in enumerate(r_grid):
            rm = mpmath.mpf(float(r))
            r2 = rm * rm
            coeffs = [1, (delta + kappa) * r2, (1 + gt * r2) * r2, kappa * r2 * r2]
            l1, lr, li = _mp_roots(coeffs, float(r), dps)
            a1 = -kappa * r2 + dhat * r2**2
            ar = -delta / 2 * r2 - dhat / 2 * r2**2
            ai = rm + h0 * rm**3
            diffs = (abs(l1 - a1), abs(lr - ar), abs(li - ai))
            errs[i] = [float(x) for x in diffs]
            rel[i] = [float(x / abs(y)) for x, y in zip(diffs, (l1, lr, li))]
    logr = np.log(r_grid)
    slopes = []
    exact = []
    for j in range(3):
        e = errs[:, j]
        if np.all(rel[:, j] <= exact_tol):
            slopes.append(float("nan"))
            exact.append(True)
        else:
            slopes.append(float(np.polyfit(logr, np.log(np.maximum(e, 1e-300)), 1)[0]))
            exact.append(False)
    return ExpansionOrder(
        s1=slopes[0], s23_re=slopes[1], s23_im=slopes[2],
        max_err=tuple(float(x) for x in errs.max(axis=0)), exact=tuple(exact),
        errors=tuple(tuple(float(x) for x in row) for row in errs),
    )
