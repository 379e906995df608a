"""Centering transforms and finite-N condition diagnostics.

Every limit condition (≍, o(1), O(·), liminf/limsup) is reported as the
finite-N ratio it constrains. Whether the ratio stays bounded or vanishes can
only be judged from a sequence of N, for instance with the ``sweep`` command.
Structural conditions (symmetry, hollow diagonal, zero sums) are plain
booleans. A ratio whose denominator is zero is ``None`` and serializes as
``"undefined"``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PermCorrError
from .matrix_core import (
    CoefficientMatrix,
    Symmetry,
    _check_sizes,
    elementary_sums,
)

ADVISORY = (
    "Ratios are finite-N values of asymptotic conditions; a single N cannot "
    "establish a limit. Compare them across increasing N."
)

MOMENT_ORDERS = (3, 4, 5, 6)


class TheoremId(str, enum.Enum):
    DANIELS = "daniels"
    PHAM1 = "pham1"
    PHAM2 = "pham2"
    PHAM3 = "pham3"
    MAIN = "main"


@dataclass(frozen=True)
class ConditionReport:
    theorem: TheoremId
    structural_checks: dict[str, bool]
    ratio_diagnostics: dict[str, float | None]
    advisory: str = field(default=ADVISORY)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem.value,
            "structural_checks": dict(self.structural_checks),
            "ratio_diagnostics": {
                k: ("undefined" if v is None else v)
                for k, v in self.ratio_diagnostics.items()
            },
            "advisory": self.advisory,
        }


def _ratio(num: float, den: float) -> float | None:
    if den == 0 or not math.isfinite(den) or not math.isfinite(num):
        return None
    r = num / den
    return r if math.isfinite(r) else None


def prime_transform(a: CoefficientMatrix) -> CoefficientMatrix:
    """a′_ij = (a_ij − Σ_{k≠l} a_kl / (N(N−1))) for i ≠ j, zero diagonal."""
    n = a.n
    e = a.entries
    if a.symmetry is Symmetry.ANTISYMMETRIC:
        off = 0.0
    else:
        off = float(e.sum() - np.trace(e))
    out = e - off / (n * (n - 1))
    np.fill_diagonal(out, 0.0)
    return CoefficientMatrix(out, a.symmetry, True)


def _setting(setting) -> Symmetry:
    s = Symmetry(setting)
    if s is Symmetry.GENERAL:
        raise PermCorrError("setting must be 'symmetric' or 'antisymmetric'")
    return s


def star_transform(a: CoefficientMatrix, setting="symmetric") -> CoefficientMatrix:
    """Row/column-sum corrected coefficients a*.

    Symmetric setting: a*_ij = a′_ij − (a′_{i+} + a′_{+j}) / (N − 2).
    Antisymmetric setting: a*_ij = a_ij − (a′_{i+} + a′_{+j}) / N, with the raw
    a_ij in the leading term. Both zero the diagonal.
    """
    setting = _setting(setting)
    n = a.n
    prime = prime_transform(a).entries
    rows, cols = prime.sum(axis=1), prime.sum(axis=0)
    if setting is Symmetry.SYMMETRIC:
        if n < 3:
            raise PermCorrError("symmetric star transform needs N >= 3")
        out = prime - (rows[:, None] + cols[None, :]) / (n - 2)
    else:
        out = a.entries - (rows[:, None] + cols[None, :]) / n
    np.fill_diagonal(out, 0.0)
    sym = a.symmetry if a.symmetry is setting else Symmetry.GENERAL
    if sym is not Symmetry.GENERAL:
        # row and column corrections are mirror images only up to rounding
        out = (out + out.T) / 2 if sym is Symmetry.SYMMETRIC else (out - out.T) / 2
    return CoefficientMatrix(out, sym, True)


def _zero(x: float, scale: float) -> bool:
    return abs(x) <= 1e-12 * max(scale, 1e-300)


def _structural(a: CoefficientMatrix, b: CoefficientMatrix) -> dict[str, bool]:
    def flags(m, name):
        s = elementary_sums(m)
        scale = m.n * m.n * m.max_abs
        return {
            f"{name}_symmetric": m.symmetry is Symmetry.SYMMETRIC,
            f"{name}_antisymmetric": m.symmetry is Symmetry.ANTISYMMETRIC,
            f"{name}_hollow": bool(np.all(np.diagonal(m.entries) == 0)),
            f"{name}_zero_total": _zero(s.total, scale),
            f"{name}_zero_row_sums": bool(np.all(np.abs(s.row_sums) <= 1e-12 * max(scale, 1e-300))),
            f"{name}_zero_col_sums": bool(np.all(np.abs(s.col_sums) <= 1e-12 * max(scale, 1e-300))),
        }

    checks = flags(a, "a") | flags(b, "b")
    checks["both_symmetric"] = checks["a_symmetric"] and checks["b_symmetric"]
    checks["both_antisymmetric"] = checks["a_antisymmetric"] and checks["b_antisymmetric"]
    return checks


def _h(m: CoefficientMatrix) -> float | None:
    return _ratio(elementary_sums(m).triple_sum, m.n ** 3 * m.max_abs ** 2)


def _daniels_main(a, b, theorem):
    checks = _structural(a, b)
    if theorem is TheoremId.DANIELS:
        keep = ("both_antisymmetric", "a_hollow", "b_hollow")
    else:
        keep = ("both_symmetric", "a_zero_total", "b_zero_total")
    return ConditionReport(
        theorem,
        {k: checks[k] for k in keep},
        {"h_a": _h(a), "h_b": _h(b)},
    )


def _pham1(a, b):
    checks = _structural(a, b)
    if checks["both_symmetric"]:
        setting = Symmetry.SYMMETRIC
    elif checks["both_antisymmetric"]:
        setting = Symmetry.ANTISYMMETRIC
    else:
        setting = None
    n = a.n
    ratios: dict[str, float | None] = {}
    ap = prime_transform(a).entries.sum(axis=1)
    bp = prime_transform(b).entries.sum(axis=1)
    sa2, sb2 = float(ap @ ap), float(bp @ bp)
    if setting is not None and (setting is Symmetry.ANTISYMMETRIC or n >= 3):
        astar = star_transform(a, setting).entries
        bstar = star_transform(b, setting).entries
        ratios["star_ratio"] = _ratio(
            n * float(np.sum(astar ** 2)) * float(np.sum(bstar ** 2)), sa2 * sb2
        )
    else:
        ratios["star_ratio"] = None
    for r in MOMENT_ORDERS:
        ra = _ratio(float(np.sum(ap ** r)), sa2 ** (r / 2))
        ratios[f"a_rowsum_moment_r{r}"] = ra
        ratios[f"a_rowsum_moment_r{r}_over_rate"] = (
            None if ra is None else ra / n ** (1 - r / 2)
        )
        ratios[f"b_rowsum_abs_moment_r{r}"] = _ratio(
            float(np.sum(np.abs(bp) ** r)), sb2 ** (r / 2)
        )
    ratios["b_rowsum_max_share"] = _ratio(float(np.max(bp ** 2)), sb2)
    return ConditionReport(
        TheoremId.PHAM1,
        {
            "paired_symmetry": setting is not None,
            "a_hollow": checks["a_hollow"],
            "b_hollow": checks["b_hollow"],
        },
        ratios,
    )


def _pham2(a, b):
    checks = _structural(a, b)
    n = a.n
    ea, eb = a.entries, b.entries
    amax = a.max_abs
    sa2, sb2 = float(np.sum(ea ** 2)), float(np.sum(eb ** 2))
    max_row_abs = float(np.max(np.abs(ea).sum(axis=1)))
    ratios = {
        "a_max_row_abs_scaled": _ratio(max_row_abs * n * amax, sa2),
        "a_sq_over_N2_max_sq": _ratio(sa2, n ** 2 * amax ** 2),
    }
    base = sb2 / n ** 2
    for r in MOMENT_ORDERS:
        ratios[f"b_abs_moment_r{r}"] = _ratio(
            float(np.sum(np.abs(eb) ** r)) / n ** 2, base ** (r / 2)
        )
    return ConditionReport(
        TheoremId.PHAM2,
        {
            "paired_symmetry": checks["both_symmetric"] or checks["both_antisymmetric"],
            "b_zero_row_sums": checks["b_zero_row_sums"],
            "b_zero_col_sums": checks["b_zero_col_sums"],
        },
        ratios,
    )


def _pham3(a, b):
    checks = _structural(a, b)
    n = a.n
    ea, eb = a.entries, b.entries
    amax = a.max_abs
    rows_b = eb.sum(axis=1)
    return ConditionReport(
        TheoremId.PHAM3,
        {
            "paired_symmetry": checks["both_symmetric"] or checks["both_antisymmetric"],
            "a_zero_total": checks["a_zero_total"],
            "b_zero_total": checks["b_zero_total"],
        },
        {
            "a_max_row_abs_over_max": _ratio(float(np.max(np.abs(ea).sum(axis=1))), amax),
            "a_sq_over_N_max_sq": _ratio(float(np.sum(ea ** 2)), n * amax ** 2),
            "b_rowsum_share": _ratio(float(rows_b @ rows_b) / n, float(np.sum(eb ** 2))),
        },
    )


def diagnose(a: CoefficientMatrix, b: CoefficientMatrix,
             theorem: TheoremId | str) -> ConditionReport:
    """Structural checks and condition ratios for one theorem."""
    _check_sizes(a, b)
    theorem = TheoremId(theorem)
    if theorem in (TheoremId.DANIELS, TheoremId.MAIN):
        return _daniels_main(a, b, theorem)
    if theorem is TheoremId.PHAM1:
        return _pham1(a, b)
    if theorem is TheoremId.PHAM2:
        return _pham2(a, b)
    return _pham3(a, b)


def applicable_theorems(a: CoefficientMatrix, b: CoefficientMatrix) -> list[TheoremId]:
    """Theorems whose symmetry prerequisite matches the pair (a, b)."""
    if a.symmetry is Symmetry.SYMMETRIC and b.symmetry is Symmetry.SYMMETRIC:
        return [TheoremId.MAIN, TheoremId.PHAM1, TheoremId.PHAM2, TheoremId.PHAM3]
    if a.symmetry is Symmetry.ANTISYMMETRIC and b.symmetry is Symmetry.ANTISYMMETRIC:
        return [TheoremId.DANIELS, TheoremId.PHAM1, TheoremId.PHAM2, TheoremId.PHAM3]
    return []


def primary_theorem(a: CoefficientMatrix, b: CoefficientMatrix) -> TheoremId | None:
    found = applicable_theorems(a, b)
    return found[0] if found else None


def scenario_bounded_entries(n: int) -> dict[str, ConditionReport]:
    """pham2, pham3 and main reports for a_ij = 1 − δ_ij paired with itself."""
    if n < 3:
        raise PermCorrError("scenario needs n >= 3")
    k = CoefficientMatrix(1.0 - np.eye(n), Symmetry.SYMMETRIC, True)
    return {t.value: diagnose(k, k, t) for t in (TheoremId.PHAM2, TheoremId.PHAM3, TheoremId.MAIN)}
