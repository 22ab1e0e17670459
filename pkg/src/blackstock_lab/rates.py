"""Rate fitting ``N(t) ~ C t^alpha (ln t)^beta`` with ``beta`` in {0, 1/2}."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MATCHES = "matches"
TOO_FAST = "too-fast"
TOO_SLOW = "too-slow"
INCONCLUSIVE = "inconclusive"
VANISHES = "vanishes"
PERSISTS = "does-not-vanish"

DEFAULT_TOL = 0.05
#: The log model must beat the power model by this rms (in ln N) to be chosen,
#: so a constant, which both models fit exactly, stays a power law.
LOG_MODEL_MARGIN = 1e-12


class RateFitError(ValueError):
    """Samples unsuitable for a rate fit."""


def dn_reference(which: int, n: int) -> tuple[float, float]:
    """Exponents ``(alpha, beta)`` of the reference rates ``D_n^(1)`` and ``D_n^(2)``."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if which == 1:
        if n == 1:
            return 0.5, 0.0
        if n == 2:
            return 0.0, 0.5
        return 0.5 - n / 4, 0.0
    if which == 2:
        if n <= 3:
            return 2.0 - n / 2, 0.0
        if n == 4:
            return 0.0, 0.5
        return 1.0 - n / 4, 0.0
    raise ValueError(f"which must be 1 or 2, got {which!r}")


def heat_reference(n: int) -> tuple[float, float]:
    """Exponents of ``t^(-n/4)``."""
    return -n / 4, 0.0


@dataclass(frozen=True)
class RateFit:
    alpha: float
    beta: float
    log_c: float
    rms_residual: float
    verdict: str
    reference: tuple = (float("nan"), float("nan"))


def _check_samples(t, values):
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.size < 6:
        raise RateFitError("need at least 6 samples")
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise RateFitError("norms must be positive and finite")
    if np.any(t <= 1):
        raise RateFitError("times must exceed 1")
    if np.log10(t.max() / t.min()) < 2 - 1e-9:
        raise RateFitError("time grid must span at least two decades")
    if np.unique(t).size != t.size:
        raise RateFitError("repeated times")
    return t, values


def _lstsq(x, y):
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return coef, float(np.sqrt(np.mean(resid * resid)))


def classify(alpha: float, beta: float, reference, tol: float = DEFAULT_TOL) -> str:
    ref_a, ref_b = reference
    if alpha < ref_a - tol:
        return TOO_FAST
    if alpha > ref_a + tol:
        return TOO_SLOW
    return MATCHES if beta == ref_b else INCONCLUSIVE


def fit_rate(samples, reference=(float("nan"), float("nan")), tol: float = DEFAULT_TOL) -> RateFit:
    """Fit ``N ~ C t^alpha (ln t)^beta`` with ``beta`` selected from {0, 1/2}.

    Two-parameter models are compared by their rms residual in ``ln N``:

    * ``beta = 0``: ordinary least squares of ``ln N`` on ``(1, ln t)``;
    * ``beta = 1/2``: ``N^2 = a + b ln t`` (so ``alpha = 0``), solved by
      least squares weighted with ``N^-2``.  The intercept ``a`` absorbs
      the constant that squared norms carry at the critical dimensions.

    Parameters
    ----------
    samples : sequence of (t, N)
    reference : (alpha, beta)
        Expected exponents used for the verdict.
    tol : float
        Allowed ``|alpha - alpha_ref|``.
    """
    samples = list(samples)
    t, values = _check_samples([s[0] for s in samples], [s[1] for s in samples])
    lt = np.log(t)
    ly = np.log(values)
    coef, rms_pow = _lstsq(lt, ly)
    best = (float(coef[1]), 0.0, float(coef[0]), rms_pow)

    design = np.column_stack([np.ones_like(lt), lt])
    w = 1.0 / (values * values)
    ab, *_ = np.linalg.lstsq(design * w[:, None], values * values * w, rcond=None)
    model = design @ ab
    if ab[1] > 0 and np.all(model > 0):
        resid = ly - 0.5 * np.log(model)
        rms_log = float(np.sqrt(np.mean(resid * resid)))
        if rms_log < rms_pow - LOG_MODEL_MARGIN:
            best = (0.0, 0.5, 0.5 * float(np.log(ab[1])), rms_log)

    alpha, beta, log_c, rms = best
    verdict = classify(alpha, beta, reference, tol) if np.isfinite(reference[0]) else INCONCLUSIVE
    return RateFit(alpha, beta, log_c, rms, verdict, tuple(reference))


def vanishing_ratio_check(samples) -> str:
    """Halving test for ``N_num / N_den -> 0``.

    The ratio must be strictly decreasing over the last decade of ``t`` and
    end at no more than half its value one decade earlier.
    """
    samples = sorted(samples, key=lambda s: s[0])
    t, num = _check_samples([s[0] for s in samples], [s[1] for s in samples])
    den = np.asarray([s[2] for s in samples], dtype=float)
    if np.any(den <= 0):
        raise RateFitError("reference norms must be positive")
    ratio = num / den
    start = t[-1] / 10.0
    window = t >= start * (1 - 1e-12)
    if window.sum() < 2:
        raise RateFitError("need at least two samples in the last decade")
    tail = ratio[window]
    decreasing = bool(np.all(np.diff(tail) < 0))
    earlier = float(np.interp(np.log(start), np.log(t), ratio))
    return VANISHES if decreasing and ratio[-1] <= 0.5 * earlier else PERSISTS
