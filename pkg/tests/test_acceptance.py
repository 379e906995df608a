"""Acceptance criteria 1-10, one test each.

Every test prints a single ``criterion k PASS|FAIL ...`` line; the lines are
also collected and repeated in the terminal summary.
"""

import json
import math
import subprocess
import sys

import numpy as np

from permcorr import (
    DistinctSumPattern,
    FamilySpec,
    enumerate_exact,
    exact_mean,
    exact_second_moment,
    exact_variance,
    ks_normal,
    new_coefficient_matrix,
    normalizer,
    restricted_sum,
    sample_null,
    scenario_bounded_entries,
)
from permcorr.engine import standardized_values
from permcorr.moments import moment_scaling_report, variance_threshold

from conftest import (
    ACCEPTANCE_LINES,
    centered_symmetric_hollow,
    complete_graph,
    naive_distinct_sum,
    random_antisymmetric,
    random_general,
    random_symmetric_hollow,
)


def report(k, ok, detail):
    line = f"criterion {k} {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def rel(x, ref):
    return abs(x - ref) / abs(ref) if ref != 0 else abs(x)


def test_criterion_1_moment_oracle():
    rng = np.random.default_rng(101)
    worst = 0.0
    for n in (4, 5, 6, 7):
        for _ in range(20):
            a, b = random_symmetric_hollow(n, rng), random_symmetric_hollow(n, rng)
            v = enumerate_exact(a, b).values
            worst = max(worst,
                        rel(exact_mean(a, b), float(np.mean(v))),
                        rel(exact_second_moment(a, b), float(np.mean(v ** 2))))
    report(1, worst <= 1e-9, f"max_rel_error={worst:.3e} (tol 1e-9, 80 pairs)")


def test_criterion_2_antisymmetric_mean():
    rng = np.random.default_rng(102)
    worst, exact_zero = 0.0, True
    for n in (4, 5, 6, 7):
        for _ in range(5):
            a, b = random_antisymmetric(n, rng), random_antisymmetric(n, rng)
            m = exact_mean(a, b)
            exact_zero &= m == 0.0
            scale = n * n * a.max_abs * b.max_abs
            worst = max(worst, abs(float(np.mean(enumerate_exact(a, b).values)) - m) / scale)
    report(2, exact_zero and worst <= 1e-10,
           f"closed_form_zero={exact_zero} max_scaled_abs_error={worst:.3e} (tol 1e-10, 20 pairs)")


def test_criterion_3_restricted_sums():
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(50):
        a = random_general(6, rng)
        for pattern in DistinctSumPattern:
            ref = naive_distinct_sum(a.entries, pattern.labels)
            worst = max(worst, rel(restricted_sum(a, pattern), ref))
    report(3, worst <= 1e-10, f"max_rel_error={worst:.3e} (tol 1e-10, 50 matrices x 7 patterns)")


def test_criterion_4_degenerate_family():
    rng = np.random.default_rng(104)
    ok, worst = True, 0.0
    for n in (4, 5, 6, 7):
        a = complete_graph(n)
        bs = [random_symmetric_hollow(n, rng), random_antisymmetric(n, rng)]
        g = rng.uniform(-1, 1, (n, n))
        np.fill_diagonal(g, 0.0)
        bs.append(new_coefficient_matrix(g, "general", hollow=True))
        for b in bs:
            var = exact_variance(a, b)
            support = np.unique(enumerate_exact(a, b).values)
            # rounding can split one support value over neighbouring floats
            single = np.ptp(support) <= 1e-12 * n * n * b.max_abs
            ok &= var <= variance_threshold(a, b) and single
            worst = max(worst, var)
    report(4, ok, f"max_variance={worst:.3e} single_support={ok} (12 pairs)")


def test_criterion_5_scenario():
    r = scenario_bounded_entries(10)
    got = (r["pham2"].ratio_diagnostics["a_sq_over_N2_max_sq"],
           r["pham3"].ratio_diagnostics["a_max_row_abs_over_max"],
           r["main"].ratio_diagnostics["h_a"])
    report(5, got == (0.9, 9.0, 0.81), f"pham2={got[0]} pham3={got[1]} h_a={got[2]}")


def test_criterion_6_wilcoxon_normality():
    a, b = FamilySpec("wilcoxon", 0).build(200)
    dist = sample_null(a, b, 20000, 100)
    ks = ks_normal(dist, a, b, "exact_sd")
    skew = dist.skewness
    report(6, ks <= 0.025 and abs(skew) <= 0.1,
           f"ks={ks:.4f} (<=0.025) skewness={skew:.4f} (|.|<=0.1)")


def test_criterion_7_mantel_normality():
    a, b = FamilySpec("mantel_centered", 0).build(200)
    dist = sample_null(a, b, 20000, 100)
    ks = ks_normal(dist, a, b, "exact_sd")
    ratio = normalizer(a, b, "daniels") / math.sqrt(exact_variance(a, b))
    report(7, ks <= 0.03 and 0.85 <= ratio <= 1.15,
           f"ks={ks:.4f} (<=0.03) main_normalizer/exact_sd={ratio:.4f} (in [0.85, 1.15])")


def test_criterion_8_mmd():
    a, b = FamilySpec("mmd", 0).build(100)
    z = standardized_values(sample_null(a, b, 20000, 100), a, b, "exact_sd")
    m, v = float(z.mean()), float(z.var())
    report(8, 0.9 <= v <= 1.1 and -0.05 <= m <= 0.05,
           f"mean={m:.4f} (in [-0.05, 0.05]) variance={v:.4f} (in [0.9, 1.1])")


def test_criterion_9_third_moment_trend():
    wins = 0
    for trial in range(20):
        rng = np.random.default_rng(trial)
        scaled = {}
        for n in (5, 8):
            a, b = centered_symmetric_hollow(n, rng), centered_symmetric_hollow(n, rng)
            scaled[n] = abs(moment_scaling_report(a, b, max_order=3)[2][2])
        wins += scaled[8] < scaled[5]
    report(9, wins >= 18, f"decreasing in {wins}/20 trials (need >= 18)")


def test_criterion_10_cli_determinism(tmp_path):
    rng = np.random.default_rng(110)
    pts = tmp_path / "x.csv"
    lab = tmp_path / "y.csv"
    pts.write_text("\n".join(repr(float(v)) for v in rng.standard_normal(60)) + "\n")
    lab.write_text("\n".join(str(v) for v in [0] * 30 + [1] * 30) + "\n")
    base = [sys.executable, "-m", "permcorr", "test", "--statistic", "wilcoxon",
            "--points", str(pts), "--labels", str(lab), "--draws", "5000", "--seed", "42"]
    outs = []
    for workers in ("1", "1", "4"):
        proc = subprocess.run(base + ["--workers", workers], capture_output=True, text=True,
                              check=True)
        d = json.loads(proc.stdout)
        d.pop("wall_clock_seconds")
        outs.append(json.dumps(d))
    ok = outs[0] == outs[1] == outs[2]
    report(10, ok, f"identical_across_runs={outs[0] == outs[1]} "
                   f"identical_across_workers={outs[0] == outs[2]}")
