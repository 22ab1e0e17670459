"""Command line entry point ``blackstock-lab``.

Scenarios write ``<name>.csv``, ``<name>.verdicts.csv`` and a gnuplot
script ``<name>.gp`` into ``--out-dir``.  Exit codes: 0 all checks pass,
1 a check failed, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .data import DataError
from .experiments import ConfigError, Report, load_config, run_scenario
from .modal import StepBudgetError, pointwise_bound_margin, kernel_arrays
from .params import ParameterError
from .profiles import residual_rows
from .quadrature import NormTask, QuadratureError, evaluate_norm, normalize_subtract
from .rates import RateFitError, dn_reference, fit_rate, vanishing_ratio_check
from .spectrum import DegenerateSpectrumError, root_arrays, vieta_residuals

log = logging.getLogger("blackstock_lab")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

MODULE_COMMANDS = ("roots", "kernels", "profiles", "norms", "rates")


def fmt(value) -> str:
    """Stable text form for CSV cells."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, complex):
        return format(value.real, ".17g")
    return str(value)


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_gnuplot(path: Path, name: str, columns) -> None:
    cols = list(columns)
    x = cols.index("t") + 1 if "t" in cols else (cols.index("r") + 1 if "r" in cols else 1)
    numeric = [c for c in cols if c in ("norm", "value", "max_ratio", "rel_err", "err_lambda1",
                                         "k2", "g0", "lambda1", "alpha_fit")]
    y = cols.index(numeric[0]) + 1 if numeric else min(2, len(cols))
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set logscale xy",
        f"set output '{name}.png'",
        "set terminal pngcairo",
        f"plot '{name}.csv' using {x}:(abs(${y})) with linespoints",
        "",
    ]
    path.write_text("\n".join(lines), encoding="utf-8")


def write_report(report: Report, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / f"{report.scenario}.csv", report.columns, report.rows)
    write_csv(out_dir / f"{report.scenario}.verdicts.csv", experiments.VERDICT_COLUMNS,
              [[v[c] for c in experiments.VERDICT_COLUMNS] for v in report.verdicts])
    write_gnuplot(out_dir / f"{report.scenario}.gp", report.scenario, report.columns)


def _grid(cfg, prefix, lo, hi, points):
    a = cfg.get(f"{prefix}_min", lo)
    b = cfg.get(f"{prefix}_max", hi)
    k = int(cfg.get(f"{prefix}_points", points))
    return np.geomspace(a, b, k)


def cmd_roots(cfg) -> Report:
    p = cfg.params
    r = _grid(cfg, "r", 1e-4, 10.0, 41)
    ra = root_arrays(p, r)
    names = {0: "complex-pair", 1: "three-real", 2: "degenerate"}
    rep = Report("roots", ("r", "lambda1", "lambda_re", "lambda_im", "disc", "regime", "vieta_res_max"))
    worst = 0.0
    for i, rr in enumerate(r):
        res = max(vieta_residuals(p, rr, (ra.lambda1[i], ra.lambda2[i], ra.lambda3[i])))
        worst = max(worst, res)
        im = 0.0 if ra.regime[i] == 1 else abs(ra.lambda2[i].imag)
        rep.rows.append((rr, ra.lambda1[i], ra.lambda2[i].real, im, ra.discriminant[i],
                         names[int(ra.regime[i])], res))
    rep.add_verdict("vieta", "pass" if worst <= 1e-10 else "fail", value=worst, threshold=1e-10)
    return rep


def cmd_kernels(cfg) -> Report:
    p = cfg.params
    r = _grid(cfg, "r", 0.01, 0.1, 10)
    t = _grid(cfg, "t", 1.0, 1e4, 9)
    k0, k1, k2 = kernel_arrays(p, r[:, None], t[None, :])
    m = pointwise_bound_margin(p, r[:, None], t[None, :])
    rep = Report("kernels", ("r", "t", "k0", "k1", "k2", "bound_margin0", "bound_margin1", "bound_margin2"))
    for i in range(r.size):
        for j in range(t.size):
            rep.rows.append((r[i], t[j], k0[i, j], k1[i, j], k2[i, j], m[0][i, j], m[1][i, j], m[2][i, j]))
    finite = all(np.all(np.isfinite(x)) for x in m)
    rep.add_verdict("margins-finite", "pass" if finite else "fail")
    return rep


def cmd_profiles(cfg) -> Report:
    p = cfg.params
    data = cfg.data or experiments.generic_data()
    r = _grid(cfg, "r", 0.005, 0.1, 10)
    t = _grid(cfg, "t", 10.0, 1e4, 10)
    rows = residual_rows(p, r, t, data)
    rep = Report("profiles", ("r", "t", "g0", "g1", "h0", "j0_err", "est01_ratio", "est02_ratio"))
    rep.rows = [row[:7] + (row[8],) for row in rows]
    finite = all(np.isfinite(v) for row in rows for v in row)
    rep.add_verdict("ratios-finite", "pass" if finite else "fail")
    return rep


def cmd_norms(cfg) -> Report:
    data = cfg.data or experiments.theorem21_data()
    subtract = normalize_subtract(
        s for s in str(cfg.extra.get("subtract", "")).replace(",", " ").split() if s
    )
    label = "+".join(subtract)
    rep = Report("norms", ("n", "t", "norm", "subtracted", "quad_err_est", "panels_used"))

    def one(t):
        return [evaluate_norm(NormTask(cfg.params, data, t, n, subtract)) for n in cfg.dims]

    for t, results in zip(cfg.t_grid, cfg.pmap(one, cfg.t_grid)):
        for n, res in zip(cfg.dims, results):
            rep.rows.append((n, t, res.norm, label, res.quad_err_est, res.panels_used))
    return rep


def cmd_rates(cfg, input_path) -> Report:
    if input_path is None:
        raise ConfigError("rates needs --input pointing at a norms CSV")
    try:
        with open(input_path, newline="", encoding="utf-8") as fh:
            table = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {input_path}: {exc}") from None
    groups = {}
    for row in table:
        try:
            key = (int(row["n"]), row.get("subtracted", ""))
            groups.setdefault(key, []).append((float(row["t"]), float(row["norm"])))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad norms CSV row {row}: {exc}") from None
    rep = Report("rates", ("n", "scenario", "alpha_fit", "beta_fit", "alpha_ref", "beta_ref", "verdict"))
    for (n, sub), samples in sorted(groups.items()):
        samples.sort()
        if sub == "profile1+profile2":
            ref = dn_reference(1, n)
            verdict = vanishing_ratio_check(
                [(t, v, t ** ref[0] * math.log(t) ** ref[1]) for t, v in samples])
            fit = fit_rate(samples, ref, cfg.tol_alpha)
            rep.rows.append((n, sub or "solution", fit.alpha, fit.beta, ref[0], ref[1], verdict))
            rep.add_verdict("vanishing", verdict, n=n)
            continue
        ref = dn_reference(2 if not sub else 1, n)
        fit = fit_rate(samples, ref, cfg.tol_alpha)
        rep.rows.append((n, sub or "solution", fit.alpha, fit.beta, ref[0], ref[1], fit.verdict))
        rep.add_fit("rate", n, fit)
    return rep


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="blackstock-lab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(experiments.SCENARIOS) + list(MODULE_COMMANDS))
    ap.add_argument("--config", type=Path, help="INI file with [params], [psi0..2], [scenario]")
    ap.add_argument("--out-dir", type=Path, default=Path("."))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--tol-alpha", type=float, default=None)
    ap.add_argument("--input", type=Path, help="norms CSV for the rates command")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    scenario = args.command if args.command in experiments.SCENARIOS else "theorem21"
    try:
        cfg = load_config(args.config, scenario, jobs=args.jobs, tol_alpha=args.tol_alpha)
        if args.command in experiments.SCENARIOS:
            report = run_scenario(cfg)
        elif args.command == "rates":
            report = cmd_rates(cfg, args.input)
        else:
            report = globals()[f"cmd_{args.command}"](cfg)
    except (ConfigError, ParameterError, DataError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (QuadratureError, DegenerateSpectrumError, StepBudgetError, RateFitError,
            FloatingPointError, ArithmeticError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    write_report(report, args.out_dir)
    for v in report.verdicts:
        log.info("%s n=%s %s", v["check"], v["n"], v["verdict"])
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
