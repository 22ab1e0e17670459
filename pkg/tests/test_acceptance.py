"""Numbered acceptance criteria at their stated tolerances and time budgets."""

import csv
import functools
import os
import time
import warnings

import numpy as np
import pytest

from blackstock_lab import cli
from blackstock_lab.experiments import SCENARIOS, ScenarioConfig, load_config, run_scenario
from blackstock_lab.params import SmallKappaWarning, becker_preset, default_params, derive_constants
from blackstock_lab.rates import MATCHES, VANISHES
from blackstock_lab.spectrum import expansion_order, root_arrays, vieta_residuals

JOBS = max(2, min(8, os.cpu_count() or 1))


@functools.lru_cache(maxsize=None)
def scenario(name):
    cfg = load_config(None, name, jobs=JOBS)
    start = time.perf_counter()
    rep = run_scenario(cfg)
    return rep, time.perf_counter() - start


def verdicts(name, check, n=None):
    rep, _ = scenario(name)
    rows = [v for v in rep.verdicts if v["check"] == check and (n is None or v["n"] == n)]
    assert rows, f"no {check} verdicts in {name}"
    return rows


def elapsed(name):
    return scenario(name)[1]


# 1 ------------------------------------------------------------------------

@pytest.mark.criterion(1)
@pytest.mark.parametrize("component", ["s1", "s23_re", "s23_im"])
def test_c01_expansion_slopes(component):
    start = time.perf_counter()
    eo = expansion_order(default_params(), 0.1 * 2.0 ** -np.arange(8))
    assert time.perf_counter() - start < 1.0
    slope = getattr(eo, component)
    assert 4.7 <= slope <= 5.3, f"{component} slope {slope:.4f}"


# 2 ------------------------------------------------------------------------

@pytest.mark.criterion(2)
def test_c02_vieta_random_draws():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    draws = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallKappaWarning)
        while draws < 1000:
            try:
                p = derive_constants(10 ** rng.uniform(-3, 0), 10 ** rng.uniform(-0.3, 2),
                                     rng.uniform(0.5, 3.0), rng.uniform(1.01, 5 / 3))
            except ValueError:
                continue
            r = 10 ** rng.uniform(-4, 1)
            ra = root_arrays(p, r)
            roots = (ra.lambda1[0], ra.lambda2[0], ra.lambda3[0])
            worst = max(worst, *vieta_residuals(p, r, roots))
            draws += 1
    assert time.perf_counter() - start < 1.0
    assert worst <= 1e-10


# 3 ------------------------------------------------------------------------

@pytest.mark.criterion(3)
@pytest.mark.parametrize("check", ["lambda1-exact", "pair-closed-form"])
def test_c03_becker(check):
    row, = verdicts("becker", check)
    assert elapsed("becker") < 1.0
    assert row["verdict"] == "pass", row


# 4 ------------------------------------------------------------------------

@pytest.mark.criterion(4)
def test_c04_oracle_sweep():
    rep, _ = scenario("oracle-sweep")
    assert len(rep.rows) == 200
    assert elapsed("oracle-sweep") < 120.0
    row, = verdicts("oracle-sweep", "modal-vs-oracle")
    assert row["verdict"] == "pass", row


# 5 ------------------------------------------------------------------------

@pytest.mark.criterion(5)
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_c05_theorem21_rates(n):
    row, = verdicts("theorem21", "rate", n)
    assert elapsed("theorem21") < 300.0
    assert row["verdict"] == MATCHES, row


# 6 ------------------------------------------------------------------------

@pytest.mark.criterion(6)
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_c06_theorem22_first_order(n):
    row, = verdicts("theorem22", "first-order-rate", n)
    assert elapsed("theorem22") < 300.0
    assert row["verdict"] == MATCHES, row


@pytest.mark.criterion(6)
def test_c06_degenerate_control():
    row, = verdicts("theorem22", "degenerate-faster", 3)
    assert row["alpha_fit"] <= -0.45, row


# 7 ------------------------------------------------------------------------

@pytest.mark.criterion(7)
@pytest.mark.parametrize("n", [1, 3, 5])
def test_c07_second_order_vanishing(n):
    row, = verdicts("theorem22", "second-order-vanishing", n)
    assert elapsed("theorem22") < 300.0
    assert row["verdict"] == VANISHES, row


# 8 ------------------------------------------------------------------------

@pytest.mark.criterion(8)
@pytest.mark.parametrize("kind", ["heat", "g1-type", "g0-type"])
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_c08_multiplier_rates(kind, n):
    row, = verdicts("lemma41", kind, n)
    assert elapsed("lemma41") < 120.0
    assert row["verdict"] == MATCHES, row


# 9 ------------------------------------------------------------------------

@pytest.mark.criterion(9)
@pytest.mark.parametrize("check", ["gamma-limit", "closed-form-n3"])
def test_c09_gamma_limits(check):
    rows = verdicts("gamma-limits", check)
    assert elapsed("gamma-limits") < 30.0
    assert all(r["verdict"] == "pass" for r in rows), rows


# 10 -----------------------------------------------------------------------

@pytest.mark.criterion(10)
def test_c10_decomposition_consistency():
    row, = verdicts("gamma-limits", "decomposition-consistency")
    assert elapsed("gamma-limits") < 60.0
    assert row["verdict"] == "pass", row


@pytest.mark.criterion(10)
@pytest.mark.parametrize("n", [3, 4, 5])
def test_c10_a2_limit_constant(n):
    # the stated constant |S| Gamma(n/2-1) (delta P + n/2 P2)^2 / (4 delta^(n/2+1))
    row, = verdicts("gamma-limits", "a2-limit-square-form", n)
    assert row["value"] <= 0.02, row


# 11 -----------------------------------------------------------------------

@pytest.mark.criterion(11)
@pytest.mark.parametrize("case", ["main", "becker"])
def test_c11_residual_order_stability(case):
    rep, _ = scenario("prop34")
    assert elapsed("prop34") < 60.0
    rows = [v for v in rep.verdicts if v["check"].startswith(f"{case}-") and v["check"].endswith("-stable")]
    assert len(rows) == 6
    assert all(r["verdict"] == "pass" for r in rows), rows


# 12 -----------------------------------------------------------------------

def _data_bytes(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return fh.read()


@pytest.mark.criterion(12)
@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_c12_determinism(name, tmp_path):
    outs = []
    for jobs in (1, 8):
        out = tmp_path / f"jobs{jobs}"
        cli.main([name, "--jobs", str(jobs), "--out-dir", str(out)])
        outs.append(out)
    for suffix in (".csv", ".verdicts.csv"):
        a = _data_bytes(outs[0] / f"{name}{suffix}")
        b = _data_bytes(outs[1] / f"{name}{suffix}")
        assert a == b
    with open(outs[0] / f"{name}.csv", newline="", encoding="utf-8") as fh:
        assert len(list(csv.reader(fh))) > 1
