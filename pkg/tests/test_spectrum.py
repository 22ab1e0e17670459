import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blackstock_lab.params import SmallKappaWarning, becker_preset, default_params, derive_constants
from blackstock_lab.spectrum import (
    COMPLEX_PAIR,
    THREE_REAL,
    DegenerateSpectrumError,
    ZoneError,
    asymptotic_roots,
    char_poly_coeffs,
    companion_roots,
    discriminant,
    discriminant_excess,
    exact_roots,
    expansion_order,
    root_arrays,
    small_zone_radius,
    vieta_residuals,
)

P = default_params()
B = becker_preset(0.03)


def _poly(params, r, lam):
    c2, c1, c0 = char_poly_coeffs(params, r)
    return ((lam + c2) * lam + c1) * lam + c0


def test_coefficients_at_zero():
    assert char_poly_coeffs(P, 0.0) == (0.0, 0.0, 0.0)


def test_coefficients_default():
    c2, c1, c0 = char_poly_coeffs(P, 0.1)
    assert c2 == pytest.approx(1.4733333333e-3, rel=1e-10)
    assert c1 == pytest.approx(0.01 * (1 + P.gamma_tilde * 0.01), rel=1e-15)
    assert c1 == pytest.approx(1.0000186667e-2, rel=1e-10)
    assert c0 == pytest.approx(1e-6, rel=1e-14)


def test_coefficients_becker():
    c2, c1, c0 = char_poly_coeffs(B, 1.0)
    assert B.gamma_tilde == pytest.approx(B.kappa * B.delta, rel=1e-14)
    assert c2 == pytest.approx(0.1066666667, rel=1e-9)
    assert c1 == pytest.approx(1.0026666667, rel=1e-9)
    assert c0 == pytest.approx(0.04, rel=1e-14)


def test_becker_closed_form_roots():
    rt = exact_roots(B, 0.5)
    assert rt.lambda1 == pytest.approx(-0.01, rel=1e-12)
    assert rt.lambda_re == pytest.approx(-8.33334e-3, rel=1e-5)
    assert rt.lambda_re == pytest.approx(-B.delta * 0.25 / 2, rel=1e-10)
    assert rt.lambda_im == pytest.approx(0.4999305, rel=1e-6)
    assert rt.lambda_im == pytest.approx(math.sqrt(0.25 - (B.delta * 0.25 / 2) ** 2), rel=1e-10)
    assert rt.regime == COMPLEX_PAIR


def test_default_small_r_root():
    rt = exact_roots(P, 0.1)
    assert rt.lambda1 == pytest.approx(-9.99995e-5, rel=1e-6)
    assert max(vieta_residuals(P, 0.1, rt.roots)) <= 1e-10
    assert rt.lambda1 + 2 * rt.lambda_re == pytest.approx(-(P.delta + P.kappa) * 0.01, rel=1e-12)


def test_pair_is_conjugate():
    rt = exact_roots(P, 0.37)
    assert rt.lambda2.real == rt.lambda3.real
    assert rt.lambda2.imag == -rt.lambda3.imag
    assert rt.discriminant < 0 and rt.lambda_im > 0


def test_root_residual_after_polish():
    for r in np.geomspace(1e-4, 10, 60):
        rt = exact_roots(P, r)
        for lam in rt.roots:
            assert abs(_poly(P, r, lam)) <= 1e-12 * max(1.0, abs(lam) ** 3)


def test_agrees_with_companion_oracle():
    r = np.geomspace(1e-4, 10, 200)
    oracle = companion_roots(P, r)
    ra = root_arrays(P, r)
    mine = np.column_stack([ra.lambda1, ra.lambda2, ra.lambda3])
    assert np.all(np.abs(mine - oracle) <= 1e-9 * np.abs(oracle))


def test_three_real_regime_exists():
    rt = exact_roots(P, 30.0)
    assert rt.regime == THREE_REAL
    assert rt.lambda_im == 0.0
    assert max(vieta_residuals(P, 30.0, rt.roots)) <= 1e-10


def test_degenerate_signal():
    # bisect the sign change of the discriminant between 15 and 20
    lo, hi = 15.0, 20.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if discriminant(P, mid) < 0:
            lo = mid
        else:
            hi = mid
    with pytest.raises(DegenerateSpectrumError):
        exact_roots(P, lo)
    rt = exact_roots(P, lo, allow_degenerate=True)
    assert rt.regime == "degenerate"


def test_exact_roots_need_positive_r():
    with pytest.raises(ValueError):
        exact_roots(P, 0.0)


def test_asymptotic_examples():
    a = asymptotic_roots(P, 0.1)
    assert a.lambda1 == pytest.approx(-1e-4 + 4.93333333e-6 * 1e-4, rel=1e-9)
    assert a.lambda1 == pytest.approx(-9.99995e-5, rel=1e-6)
    assert a.lambda_im == pytest.approx(0.1 + P.h0_coeff * 1e-3, rel=1e-15)
    assert a.lambda_im == pytest.approx(0.1 - 2.1109e-6, rel=1e-8)


def test_asymptotic_becker_lambda1():
    for r in (0.01, 0.05, 0.1):
        a = asymptotic_roots(B, r)
        assert a.lambda1 == pytest.approx(-B.kappa * r * r, rel=1e-15)


def test_asymptotic_zone():
    with pytest.raises(ZoneError):
        asymptotic_roots(P, 0.5)
    with pytest.raises(ZoneError):
        asymptotic_roots(P, 0.0)
    assert small_zone_radius(P) == pytest.approx(0.2)


def test_expansion_order_measured_slopes():
    # lambda1 and Re(lambda2) are even in r, so their remainders are O(r^6)
    grid = 0.1 * 2.0 ** -np.arange(8)
    eo = expansion_order(P, grid)
    assert eo.s1 == pytest.approx(6.0, abs=0.05)
    assert eo.s23_re == pytest.approx(6.0, abs=0.05)
    assert eo.s23_im == pytest.approx(5.0, abs=0.05)
    assert eo.exact == (False, False, False)


def test_expansion_order_becker_exact():
    grid = 0.1 * 2.0 ** -np.arange(8)
    eo = expansion_order(B, grid)
    assert eo.exact[0]
    assert math.isnan(eo.s1)
    assert max(row[0] for row in eo.errors) <= 1e-13 * B.kappa * 1e-2


def test_expansion_order_rejects_out_of_zone():
    with pytest.raises(ZoneError):
        expansion_order(P, np.geomspace(0.1, 1.0, 8))
    with pytest.raises(ValueError):
        expansion_order(P, np.geomspace(0.01, 0.1, 5))


def test_discriminant_excess_order():
    r = np.geomspace(1e-3, 0.05, 12)
    ex = np.abs(discriminant_excess(P, r))
    slope = np.polyfit(np.log(r), np.log(ex), 1)[0]
    assert slope >= 7.7
    # leading coefficient is 4*delta_tilde
    assert ex[0] / r[0] ** 8 == pytest.approx(abs(4 * P.delta_tilde), rel=1e-3)
    assert discriminant(P, 0.05) + 4 * 0.05**6 == pytest.approx(discriminant_excess(P, 0.05), rel=1e-6)


def test_small_zone_stability():
    r = np.geomspace(1e-4, small_zone_radius(P), 40)
    ra = root_arrays(P, r)
    assert np.all(ra.lambda1 < 0)
    assert np.all(ra.lambda2.real < 0)
    assert np.all(ra.discriminant < 0)


params_st = st.tuples(
    st.floats(1e-3, 1.0), st.floats(1.0, 50.0), st.floats(0.5, 3.0), st.floats(1.05, 5 / 3),
)


@settings(max_examples=300, deadline=None)
@given(params_st, st.floats(-4.0, 1.0))
def test_vieta_property(args, log_r):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallKappaWarning)
        try:
            p = derive_constants(*args)
        except ValueError:
            return
    r = 10.0**log_r
    try:
        rt = exact_roots(p, r)
    except DegenerateSpectrumError:
        return
    assert max(vieta_residuals(p, r, rt.roots)) <= 1e-10
    oracle = companion_roots(p, r)[0]
    assert np.all(np.abs(rt.roots - oracle) <= 1e-9 * np.abs(oracle))
