"""Command-line front end: ``permcorr {test,diagnose,sweep,oracle-check}``.

Exit codes: 0 success, 1 usage/configuration/builder error, 2 I/O or CSV
format error, 3 degenerate variance (only with ``--strict``), 4 oracle-check
mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from . import __version__, builders, conditions, engine, moments
from .errors import DegenerateError, EnumerationCapError, InputFormatError, PermCorrError
from .matrix_core import CoefficientMatrix, Permutation, gamma, new_coefficient_matrix, read_matrix_csv

SCHEMA_VERSION = 1

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DEGENERATE, EXIT_ORACLE = 0, 1, 2, 3, 4

STATISTICS = (
    "wilcoxon", "edge_count", "mmd", "weighted_edge_count",
    "pearson", "spearman", "mantel_centered", "raw_matrices",
)

# statistic -> (needs points, needs labels, needs matrices)
_REQUIRES = {
    "wilcoxon": (True, True, False),
    "edge_count": (True, True, False),
    "mmd": (True, True, False),
    "weighted_edge_count": (True, True, False),
    "pearson": (True, True, False),
    "spearman": (True, True, False),
    "mantel_centered": (True, True, False),
    "raw_matrices": (False, False, True),
}

# fields that do not influence any reported number
_NOT_ECHOED = {"out", "format", "workers", "config", "func"}


class UsageError(PermCorrError):
    pass


@dataclass
class RunConfig:
    command: str
    statistic: str | None = None
    points: str | None = None
    labels: str | None = None
    matrix_a: str | None = None
    matrix_b: str | None = None
    normalizer: str = "exact_sd"
    draws: int = 9999
    seed: int = 0
    exact_cap: int = engine.DEFAULT_CAP
    exact: bool = False
    p_rule: str = "m_over_N"
    bandwidth: str = "median"
    out: str | None = None
    format: str = "json"
    workers: int = 1
    strict: bool = False
    family: str = "wilcoxon"
    n_values: str = "20,50,100"
    data_seed: int = 0
    n: int = 5
    repeats: int = 20

    def validate(self):
        if self.command in ("test", "diagnose") or (
            self.command == "oracle-check" and self.statistic
        ):
            if self.statistic not in STATISTICS:
                raise UsageError(f"--statistic must be one of {', '.join(STATISTICS)}")
            pts, lab, mats = _REQUIRES[self.statistic]
            missing = [flag for flag, need, val in (
                ("--points", pts, self.points),
                ("--labels", lab, self.labels),
                ("--matrix-a", mats, self.matrix_a),
                ("--matrix-b", mats, self.matrix_b),
            ) if need and not val]
            if missing:
                raise UsageError(f"statistic {self.statistic} requires {' and '.join(missing)}")
        if self.draws < 1:
            raise UsageError("--draws must be at least 1")
        if self.exact_cap > engine.MAX_CAP:
            raise UsageError(f"--exact-cap may not exceed {engine.MAX_CAP}")
        moments.NormalizerKind(self.normalizer)

    def echo(self) -> dict:
        return {k: v for k, v in vars(self).items() if k not in _NOT_ECHOED}


def _p_rule(value: str):
    if value in ("m_over_N", "m1_over_N2"):
        return value
    try:
        return float(value)
    except ValueError:
        raise UsageError(f"--p-rule must be m_over_N, m1_over_N2 or a number, got {value!r}")


def _bandwidth(value: str):
    if value == "median":
        return value
    try:
        return float(value)
    except ValueError:
        raise UsageError(f"--bandwidth must be 'median' or a number, got {value!r}")


def _one_column(sample: builders.Sample, what: str) -> np.ndarray:
    if sample.points.shape[1] != 1:
        raise UsageError(f"{what} must have a single column")
    return sample.points[:, 0]


def build_matrices(cfg: RunConfig) -> tuple[CoefficientMatrix, CoefficientMatrix]:
    """Resolve the configured statistic and inputs into (a, b)."""
    stat = cfg.statistic
    if stat == "raw_matrices":
        a, b = read_matrix_csv(cfg.matrix_a), read_matrix_csv(cfg.matrix_b)
    else:
        sample = builders.read_sample_csv(cfg.points)
        if stat in ("pearson", "spearman"):
            x = _one_column(sample, "--points")
            y = builders.read_values_csv(cfg.labels)
            make = builders.diff_matrix if stat == "pearson" else builders.rank_diff_matrix
            a, b = make(x), make(y)
        elif stat == "mantel_centered":
            a = builders.centered_distance_matrix(sample)
            b = builders.centered_distance_matrix(builders.read_sample_csv(cfg.labels))
        else:
            labels = builders.read_labels_csv(cfg.labels)
            if stat == "wilcoxon":
                a = builders.sign_diff_matrix(_one_column(sample, "--points"))
                b = builders.sign_diff_matrix(labels.labels)
            elif stat == "edge_count":
                a, b = builders.mst_adjacency(sample), builders.abs_label_diff(labels)
            elif stat == "mmd":
                a = builders.kernel_matrix(sample, _bandwidth(cfg.bandwidth))
                b = builders.mmd_label_matrix(labels)
            else:
                a = builders.mst_adjacency(sample)
                b = builders.weighted_label_matrix(labels, _p_rule(cfg.p_rule))
    if a.n != b.n:
        raise UsageError(f"inputs have different sizes: {a.n} and {b.n}")
    return a, b


def _two_sided_normal(z: float) -> float:
    return float(2.0 * ndtr(-abs(z)))


def _null_distribution(cfg: RunConfig, a, b) -> engine.NullDistribution:
    if cfg.exact and a.n <= cfg.exact_cap:
        return engine.enumerate_exact(a, b, cfg.exact_cap)
    return engine.sample_null(a, b, cfg.draws, cfg.seed, cfg.workers)


def run_test(cfg: RunConfig) -> dict:
    a, b = build_matrices(cfg)
    g_obs = gamma(a, b, Permutation.identity(a.n))
    mrep = moments.moment_report(a, b)
    standardized = {}
    for kind in moments.NormalizerKind:
        try:
            standardized[kind.value] = moments.standardize(g_obs, a, b, kind)
        except DegenerateError:
            standardized[kind.value] = None
    dist = _null_distribution(cfg, a, b)
    z_cfg = standardized[cfg.normalizer]
    z_exact = standardized["exact_sd"]
    if mrep.degenerate:
        perm_p = {"greater": None, "less": None, "two_sided": None}
    else:
        perm_p = {s: engine.p_value(dist, g_obs, s) for s in ("greater", "less", "two_sided")}
    theorem = conditions.primary_theorem(a, b)
    return {
        "N": a.n,
        "gamma_observed": g_obs,
        "moments": mrep.to_dict(),
        "standardized": standardized,
        "p_values": {
            "normal_approx": None if z_cfg is None else _two_sided_normal(z_cfg),
            "normal_approx_exact_sd": None if z_exact is None else _two_sided_normal(z_exact),
            "permutation": perm_p,
        },
        "null_distribution": dist.summary(),
        "conditions": None if theorem is None else conditions.diagnose(a, b, theorem).to_dict(),
    }


def _is_complete_graph(a: CoefficientMatrix) -> bool:
    return bool(np.array_equal(a.entries, 1.0 - np.eye(a.n)))


def run_diagnose(cfg: RunConfig) -> dict:
    a, b = build_matrices(cfg)
    out = {
        "N": a.n,
        "symmetry": {"a": a.symmetry.value, "b": b.symmetry.value},
        "reports": [conditions.diagnose(a, b, t).to_dict()
                    for t in conditions.applicable_theorems(a, b)],
        "normalizers": {k.value: moments.normalizer(a, b, k) for k in moments.NormalizerKind},
    }
    if _is_complete_graph(a) and a.n >= 3:
        out["scenario_bounded_entries"] = {
            k: v.to_dict() for k, v in conditions.scenario_bounded_entries(a.n).items()
        }
    return out


def _parse_n_values(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--n-values must be comma-separated integers, got {text!r}")
    if not values or min(values) < 3:
        raise UsageError("--n-values needs integers >= 3")
    return values


def run_sweep(cfg: RunConfig) -> dict:
    spec = engine.FamilySpec(cfg.family, cfg.data_seed)
    if cfg.family not in engine.FAMILIES:
        raise UsageError(f"--family must be one of {', '.join(sorted(engine.FAMILIES))}")
    rows = engine.convergence_sweep(spec, _parse_n_values(cfg.n_values), cfg.draws,
                                    cfg.seed, cfg.workers)
    return {"family": cfg.family, "rows": rows}


def _random_symmetric_hollow(n: int, rng: np.random.Generator) -> CoefficientMatrix:
    u = np.triu(rng.uniform(-1.0, 1.0, (n, n)), 1)
    return new_coefficient_matrix(u + u.T, "symmetric", hollow=True)


def _relative_error(x: float, ref: float, floor: float) -> float:
    return abs(x - ref) / max(abs(ref), floor)


def oracle_compare(a: CoefficientMatrix, b: CoefficientMatrix, cap: int) -> dict:
    """Closed-form E(Γ), E(Γ²) against full enumeration for one pair."""
    dist = engine.enumerate_exact(a, b, cap)
    scale = a.n ** 2 * a.max_abs * b.max_abs
    floor = 1e-6 * scale
    m1 = moments.exact_mean(a, b)
    m2 = moments.second_moment(a, b)
    e1 = float(np.mean(dist.values))
    e2 = float(np.mean(dist.values ** 2))
    return {
        "mean_rel_error": _relative_error(m1, e1, floor),
        "second_moment_rel_error": _relative_error(m2, e2, floor * scale),
    }


ORACLE_TOLERANCE = 1e-9


def run_oracle_check(cfg: RunConfig) -> dict:
    if cfg.n > cfg.exact_cap:
        raise EnumerationCapError(
            f"N = {cfg.n} exceeds the enumeration cap {cfg.exact_cap} "
            f"({math.factorial(cfg.n)} permutations); raise --exact-cap"
        )
    results = []
    if cfg.statistic:
        a, b = build_matrices(cfg)
        results.append({"source": "inputs", **oracle_compare(a, b, cfg.exact_cap)})
    rng = np.random.default_rng(cfg.seed)
    for r in range(cfg.repeats):
        a = _random_symmetric_hollow(cfg.n, rng)
        b = _random_symmetric_hollow(cfg.n, rng)
        results.append({"source": f"random_{r + 1}", **oracle_compare(a, b, cfg.exact_cap)})
    worst = max(
        (max(r["mean_rel_error"], r["second_moment_rel_error"]) for r in results),
        default=0.0,
    )
    return {
        "N": cfg.n,
        "tolerance": ORACLE_TOLERANCE,
        "max_relative_error": worst,
        "passed": worst <= ORACLE_TOLERANCE,
        "comparisons": results,
    }


# ---------------------------------------------------------------------------
# Serialization


def _clean(obj):
    """Round floats to 12 significant digits; non-finite or missing -> "undefined"."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "undefined"
        return float(f"{x:.12g}")
    if obj is None:
        return "undefined"
    return obj


def render_json(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=False) + "\n"


def render_text(report: dict) -> str:
    lines = []

    def walk(obj, indent):
        pad = "  " * indent
        if isinstance(obj, dict):
            for k, v in obj.items():
                if isinstance(v, (dict, list)):
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}{k}: {v}")
        else:
            for i, v in enumerate(obj):
                if isinstance(v, (dict, list)):
                    lines.append(f"{pad}- [{i}]")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}- {v}")

    walk(_clean(report), 0)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_shared(p: argparse.ArgumentParser):
    p.add_argument("--statistic", choices=STATISTICS)
    p.add_argument("--points", help="CSV of points, one per row")
    p.add_argument("--labels", help="CSV with one 0/1 label (or value) per row")
    p.add_argument("--matrix-a", dest="matrix_a", help="CSV N×N matrix a")
    p.add_argument("--matrix-b", dest="matrix_b", help="CSV N×N matrix b")
    p.add_argument("--normalizer", choices=[k.value for k in moments.NormalizerKind])
    p.add_argument("--draws", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--exact-cap", dest="exact_cap", type=int)
    p.add_argument("--exact", action="store_true", default=None,
                   help="enumerate all N! permutations when N <= --exact-cap")
    p.add_argument("--p-rule", dest="p_rule")
    p.add_argument("--bandwidth")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "text"))
    p.add_argument("--workers", type=int)
    p.add_argument("--strict", action="store_true", default=None)
    p.add_argument("--config", help="key = value file; command-line flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="permcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"permcorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, helptext in (
        ("test", "permutation test of one statistic"),
        ("diagnose", "condition diagnostics for every applicable theorem"),
        ("sweep", "normality trend over increasing N for a data family"),
        ("oracle-check", "closed-form moments vs full enumeration"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_shared(p)
        if name == "sweep":
            p.add_argument("--family", choices=sorted(engine.FAMILIES))
            p.add_argument("--n-values", dest="n_values")
            p.add_argument("--data-seed", dest="data_seed", type=int)
        if name == "oracle-check":
            p.add_argument("--n", type=int)
            p.add_argument("--repeats", type=int)
    return parser


_FIELD_TYPES = {
    "draws": int, "seed": int, "exact_cap": int, "workers": int, "data_seed": int,
    "n": int, "repeats": int,
    "exact": lambda s: s.strip().lower() in ("1", "true", "yes"),
    "strict": lambda s: s.strip().lower() in ("1", "true", "yes"),
}


def read_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputFormatError("expected 'key = value'", path, lineno)
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in RunConfig.__dataclass_fields__ or key in ("command", "config"):
                raise InputFormatError(f"unknown key {key!r}", path, lineno)
            try:
                values[key] = _FIELD_TYPES.get(key, str)(val)
            except ValueError:
                raise InputFormatError(f"bad value for {key}: {val!r}", path, lineno) from None
    return values


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values = read_config_file(ns.config) if ns.config else {}
    for key, val in vars(ns).items():
        if val is not None and key != "config":
            values[key] = val
    cfg = RunConfig(**{k: v for k, v in values.items() if k in RunConfig.__dataclass_fields__})
    cfg.validate()
    return cfg


_COMMANDS = {
    "test": run_test,
    "diagnose": run_diagnose,
    "sweep": run_sweep,
    "oracle-check": run_oracle_check,
}


def execute(cfg: RunConfig) -> tuple[dict, int]:
    """Run a command and wrap its payload in the versioned report envelope."""
    start = time.perf_counter()
    payload = _COMMANDS[cfg.command](cfg)
    code = EXIT_OK
    if cfg.command == "test" and payload["moments"]["degenerate"] and cfg.strict:
        code = EXIT_DEGENERATE
    if cfg.command == "oracle-check" and not payload["passed"]:
        code = EXIT_ORACLE
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": cfg.command,
        "config": cfg.echo(),
        **payload,
        "wall_clock_seconds": time.perf_counter() - start,
    }
    return report, code


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        report, code = execute(cfg)
    except (InputFormatError, OSError) as exc:
        print(f"permcorr: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DegenerateError as exc:
        print(f"permcorr: error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except PermCorrError as exc:
        print(f"permcorr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render_json(report) if cfg.format == "json" else render_text(report)
    if cfg.out:
        try:
            Path(cfg.out).write_text(text)
        except OSError as exc:
            print(f"permcorr: error: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
