import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from blackstock_lab.data import CauchyData, DatumSpec
from blackstock_lab.params import default_params
from blackstock_lab.profiles import MomentSet, g0_hat, g1_hat
from blackstock_lab.quadrature import (
    NormTask,
    QuadratureError,
    a2_limit_constant,
    a2_limit_constant_square,
    evaluate_norm,
    gamma_fn,
    gamma_limit_integral,
    make_panel_plan,
    multiplier_norm,
    norm_table,
    psi2_fourier_norm_sq,
    psi2_lower_decomposition,
    rho_integral,
    solution_error_norm,
    sphere_surface,
    truncation_radius,
)

P = default_params()


@pytest.mark.parametrize("n, value", [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi), (4, 2 * math.pi**2)])
def test_sphere_surface(n, value):
    assert sphere_surface(n) == pytest.approx(value, rel=1e-14)


def test_gamma_values():
    assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-15)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_fn(2.5) == pytest.approx(1.5 * gamma_fn(1.5), rel=1e-13)
    for z in np.linspace(0.05, 30, 50):
        assert gamma_fn(z) == pytest.approx(special.gamma(z), rel=1e-12)
    with pytest.raises(ValueError):
        gamma_fn(0.0)


def test_task_validation():
    data = CauchyData(psi2=DatumSpec(1.0))
    with pytest.raises(ValueError):
        NormTask(P, data, 10.0, 3, ("profile2",))
    with pytest.raises(ValueError):
        NormTask(P, data, 10.0, 9)
    with pytest.raises(ValueError):
        NormTask(P, data, 0.0, 3)
    with pytest.raises(ValueError):
        NormTask(P, data, 10.0, 3, ("profile3",))
    assert NormTask(P, data, 10.0, 3, ["profile2", "profile1"]).subtract == ("profile1", "profile2")


def test_zero_data_norm():
    assert solution_error_norm(NormTask(P, CauchyData(), 100.0, 3)) == 0.0


def test_panel_budget():
    with pytest.raises(QuadratureError):
        make_panel_plan(1.0, 1e-7)


def test_panel_width_resolves_oscillation():
    t = 1e4
    plan = make_panel_plan(truncation_radius(P, t), 0.5 * math.pi / t)
    assert np.max(np.diff(plan.edges)) <= 0.5 * math.pi / t * (1 + 1e-12)


def test_norm_matches_scipy_radial_integral():
    # psi2 = (1, 0, 1), n = 3, no subtraction: |psi_hat| = |K2| exp(-r^2)
    from blackstock_lab.modal import kernel_arrays

    t = 30.0
    f = lambda r: (kernel_arrays(P, r, t)[2] * math.exp(-r * r)) ** 2 * r * r  # noqa: E731
    val, _ = integrate.quad(f, 0, truncation_radius(P, t), limit=2000)
    expected = math.sqrt((2 * math.pi) ** -3 * 4 * math.pi * val)
    got = evaluate_norm(NormTask(P, CauchyData(psi2=DatumSpec(1.0, (), 1.0)), t, 3))
    assert got.norm == pytest.approx(expected, rel=1e-8)
    assert got.quad_err_est <= 1e-8


@pytest.mark.parametrize("t", [1e2, 1e4])
def test_refinement_stability(t):
    data = CauchyData(psi1=DatumSpec(1.0, (), 0.1), psi2=DatumSpec(1.0, (1.0,), 0.1))
    a = norm_table(P, data, t, (1, 3, 5), levels=(0, 1, 2))
    b = norm_table(P, data, t, (1, 3, 5), levels=(0, 1, 2), refine=2)
    for key in a:
        assert b[key].norm == pytest.approx(a[key].norm, rel=1e-8)


def test_table_agrees_with_single_tasks():
    data = CauchyData(psi2=DatumSpec(1.0, (0.5, -0.2), 0.3))
    table = norm_table(P, data, 200.0, (2, 4), levels=(0, 1, 2))
    for (lev, n), res in table.items():
        task = NormTask(P, data, 200.0, n, ("profile1", "profile2")[:lev])
        assert evaluate_norm(task).norm == res.norm


def test_moment_too_long_for_dimension():
    data = CauchyData(psi2=DatumSpec(0.0, (1.0, 1.0), 1.0))
    with pytest.raises(ValueError):
        evaluate_norm(NormTask(P, data, 10.0, 1))


def test_zone_policy_difference_decays_faster_than_powers():
    # sharp cutoff at eps0 = 0.2 leaves a heat tail exp(-2 kappa eps0^2 t): the
    # gap is far above exp(-t/4) but its log-log slope keeps steepening
    data = CauchyData(psi2=DatumSpec(1.0, (), 1.0))
    t = np.array([100.0, 200.0, 400.0, 800.0, 1600.0])
    gap = []
    for tt in t:
        full = evaluate_norm(NormTask(P, data, tt, 3)).norm
        small = evaluate_norm(NormTask(P, data, tt, 3, zone="small")).norm
        gap.append((full - small) / full)
    slopes = np.diff(np.log(gap)) / np.diff(np.log(t))
    assert np.all(np.diff(slopes) < 0)
    assert slopes[-1] < -2


@pytest.mark.parametrize("n", [1, 2, 3, 5])
@pytest.mark.parametrize("eps0", [0.05, 0.2, 1.0])
def test_heat_multiplier_closed_form(n, eps0):
    c, t = 0.5, 100.0
    a = 2 * c * t
    exact = sphere_surface(n) * 0.5 * a ** (-n / 2) * special.gamma(n / 2) * special.gammainc(n / 2, a * eps0**2)
    assert multiplier_norm("heat", n, c, t, eps0=eps0) == pytest.approx(math.sqrt(exact), rel=1e-10)


def test_heat_multiplier_example_value():
    v = multiplier_norm("heat", 3, 0.5, 100.0, eps0=1.0)
    assert v == pytest.approx((math.pi / 100.0) ** 0.75, rel=1e-10)
    assert v == pytest.approx(0.0746, abs=5e-5)


def test_singular_multipliers_against_scipy():
    c, t, n, eps0 = 0.3, 20.0, 2, 0.5
    g1 = lambda r: (math.sin(r * t) / r) ** 2 * math.exp(-2 * c * r * r * t) * r  # noqa: E731
    g0 = lambda r: (math.sin(r * t) / r) ** 4 * math.exp(-2 * c * r * r * t) * r  # noqa: E731
    for kind, f in (("g1-type", g1), ("g0-type", g0)):
        val, _ = integrate.quad(f, 1e-12, eps0, limit=500)
        assert multiplier_norm(kind, n, c, t, eps0=eps0) == pytest.approx(math.sqrt(2 * math.pi * val), rel=1e-8)


def test_multiplier_rejects():
    with pytest.raises(ValueError):
        multiplier_norm("wave", 1, 0.5, 10.0)
    with pytest.raises(ValueError):
        multiplier_norm("heat", 1, 0.5, 0.5)


def test_gamma_limit_closed_form_n3():
    d = P.delta
    for t in (1.0, 10.0, 1e3, 1e6):
        value, limit, _ = gamma_limit_integral(3, d, t, -3)
        assert value == pytest.approx(0.25 * math.sqrt(math.pi / d) * (1 - math.exp(-t / d)), rel=1e-8)
        assert limit == pytest.approx(0.25 * math.sqrt(math.pi / d), rel=1e-14)
    assert gamma_limit_integral(3, 0.1373333, 10.0, -3)[0] == pytest.approx(1.19574, abs=5e-5)


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("offset", [-3, -1, 1])
def test_gamma_limits_at_large_t(n, offset):
    _, _, rel = gamma_limit_integral(n, P.delta, 1e6, offset)
    assert rel <= 0.01


def test_gamma_limit_rejects():
    with pytest.raises(ValueError):
        gamma_limit_integral(2, P.delta, 10.0, -3)
    with pytest.raises(ValueError):
        gamma_limit_integral(3, P.delta, 10.0, 0)
    with pytest.raises(ValueError):
        rho_integral(-3, P.delta, 10.0)


def test_angular_reduction_n1_two_sided():
    t = 50.0
    m = MomentSet.build(P, p1=0.7, p2=-0.4, m2=(1.3,))

    def sq(x):
        r = abs(x)
        s = (m.p_combined + m.p2_coeff * t * r * r) * g1_hat(P, r, t)
        v = x * m.m2[0] * g0_hat(P, r, t)
        return s * s + v * v

    edge = math.sqrt(math.log(1e16) / (0.5 * P.delta * t))
    val, _ = integrate.quad(sq, -edge, edge, limit=4000, points=[0.0], epsabs=0, epsrel=1e-12)
    assert psi2_fourier_norm_sq(P, 1, t, m) == pytest.approx(val, rel=1e-10)


def test_decomposition_trivial_cases():
    a = psi2_lower_decomposition(P, 3, 100.0, MomentSet.build(P, p1=1.0, p2=1.0))
    assert a[0] == 0.0
    zero_scalar = MomentSet(0.0, 0.0, 0.0, (1.0,), 0.0, 0.0)
    assert psi2_lower_decomposition(P, 3, 100.0, zero_scalar)[1:] == (0.0, 0.0, 0.0)


@settings(max_examples=25, deadline=None)
@given(
    st.integers(1, 5),
    st.floats(1.0, 5.0),
    st.floats(-2.0, 2.0),
    st.floats(-2.0, 2.0),
    st.floats(-2.0, 2.0),
)
def test_decomposition_consistency(n, log_t, p1, p2, mval):
    t = 10.0**log_t
    m = MomentSet.build(P, p1=p1, p2=p2, m2=(mval,))
    total = psi2_fourier_norm_sq(P, n, t, m)
    parts = psi2_lower_decomposition(P, n, t, m)
    assert math.fsum(parts) == pytest.approx(total, rel=1e-8, abs=1e-300)


def _scaled_a2(n, t, m):
    return math.fsum(psi2_lower_decomposition(P, n, t, m)[1:]) * t ** (n / 2 - 1)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_a2_exact_limit(n):
    m = MomentSet(0.0, 0.0, 0.0, (), 1.0, 0.3)
    assert _scaled_a2(n, 1e4, m) == pytest.approx(a2_limit_constant(P, n, m), rel=0.02)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_a2_square_form_is_not_the_limit(n):
    m = MomentSet(0.0, 0.0, 0.0, (), 1.0, 0.3)
    got = _scaled_a2(n, 1e4, m)
    assert abs(a2_limit_constant_square(P, n, m) / got - 1) > 0.3


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 8), st.floats(0.0, 2 * math.pi))
def test_a2_limit_positive_definite(n, theta):
    # the exact form only vanishes with both constants, so the degenerate
    # square-form combination still leaves a t^(1/2-n/4) contribution
    m = MomentSet(0.0, 0.0, 0.0, (), math.cos(theta), math.sin(theta))
    assert a2_limit_constant(P, n, m) > 0
    assert a2_limit_constant(P, n, MomentSet(0.0, 0.0, 0.0, (), 0.0, 0.0)) == 0


def test_a2_limit_needs_dimension_three():
    with pytest.raises(ValueError):
        a2_limit_constant(P, 2, MomentSet.build(P, p1=1.0))


def test_degenerate_data_keeps_quarter_decay():
    # data with 2 delta P + 3 P2 = 0 and M = 0: the first-order residual
    # follows the exact constant, so it still decays like t^(-1/4)
    from blackstock_lab.experiments import degenerate_data, generic_data

    data = degenerate_data(P, generic_data())
    m = MomentSet.from_data(P, data)
    assert a2_limit_constant_square(P, 3, m) == pytest.approx(0.0, abs=1e-20)
    t = 1e6
    got = norm_table(P, data, t, [3], levels=(1,))[(1, 3)].norm
    predicted = math.sqrt((2 * math.pi) ** -3 * a2_limit_constant(P, 3, m) * t**-0.5)
    assert got == pytest.approx(predicted, rel=5e-3)
