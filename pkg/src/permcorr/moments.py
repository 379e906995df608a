"""Exact permutation moments of Γ and the closed-form normalizers."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateError, SymmetryError
from .matrix_core import (
    CoefficientMatrix,
    DistinctSumPattern,
    Symmetry,
    _check_sizes,
    all_index_patterns,
    distinct_sum,
    elementary_sums,
    falling_factorial,
    restricted_sum,
)

VARIANCE_RTOL = 1e-12


class NormalizerKind(str, enum.Enum):
    EXACT_SD = "exact_sd"
    DANIELS = "daniels"
    PHAM2 = "pham2"
    PHAM3 = "pham3"


def exact_mean(a: CoefficientMatrix, b: CoefficientMatrix) -> float:
    """E(Γ) from the off-diagonal and diagonal totals.

    Uses the two-term form ``(Σ_{j≠k} a_jk)(Σ_{i≠l} b_il) / (N(N-1))
    + (Σ a_jj)(Σ b_ii) / N``, valid for any matrices.
    """
    _check_sizes(a, b)
    n = a.n
    sa, sb = elementary_sums(a), elementary_sums(b)
    return (sa.sum_offdiag * sb.sum_offdiag / (n * (n - 1))
            + sa.sum_diag * sb.sum_diag / n)


# coefficient multiplier (number of index arrangements) for each pattern in
# the symmetric expansion; the divisor is always (N)_f with f distinct indices
_SYMMETRIC_TERMS = (
    (DistinctSumPattern.P4, 1),
    (DistinctSumPattern.P3_SHARED, 4),
    (DistinctSumPattern.P3_DIAG, 2),
    (DistinctSumPattern.P2_SQ, 2),
    (DistinctSumPattern.P2_DIAG2, 1),
    (DistinctSumPattern.P2_MIXED, 4),
    (DistinctSumPattern.P1, 1),
)


def exact_second_moment(a: CoefficientMatrix, b: CoefficientMatrix) -> float:
    """E(Γ²) for symmetric a and b from the seven distinct-index sums.

    Each term is ``A · (N-f)!/N! · Σ′(a-pattern) · Σ′(b-pattern)`` where f is
    the number of distinct subscripts and A counts the index arrangements that
    collapse onto the same pattern when a_ij = a_ji. The single-index term
    carries (N-1)!/N! = 1/N.

    Raises
    ------
    SymmetryError
        If either matrix is not declared symmetric. The arrangement counts are
        only valid under symmetry; use :func:`general_second_moment` instead.
    """
    _check_sizes(a, b)
    for name, m in (("a", a), ("b", b)):
        if m.symmetry is not Symmetry.SYMMETRIC:
            raise SymmetryError(
                f"exact_second_moment needs symmetric inputs; {name} is {m.symmetry.value}"
            )
    n = a.n
    total = 0.0
    for pattern, count in _SYMMETRIC_TERMS:
        ff = falling_factorial(n, pattern.distinct)
        if ff == 0:
            continue
        total += count * restricted_sum(a, pattern) * restricted_sum(b, pattern) / ff
    return total


def general_second_moment(a: CoefficientMatrix, b: CoefficientMatrix) -> float:
    """E(Γ²) for arbitrary matrices.

    Sums over all 15 tie patterns of the four index slots of a_jk a_su; a tuple
    with f distinct values is sent by a uniform permutation to each distinct
    f-tuple with probability 1/(N)_f.
    """
    _check_sizes(a, b)
    n = a.n
    ea, eb = a.entries, b.entries
    total = 0.0
    for labels in all_index_patterns(2):
        ff = falling_factorial(n, max(labels) + 1)
        if ff == 0:
            continue
        sa = distinct_sum((ea, ea), labels)
        if sa == 0.0:
            continue
        total += sa * distinct_sum((eb, eb), labels) / ff
    return total


def second_moment(a: CoefficientMatrix, b: CoefficientMatrix) -> float:
    """E(Γ²): the seven-term form when both inputs are symmetric, else the general form."""
    if a.symmetry is Symmetry.SYMMETRIC and b.symmetry is Symmetry.SYMMETRIC:
        return exact_second_moment(a, b)
    return general_second_moment(a, b)


def variance_threshold(a: CoefficientMatrix, b: CoefficientMatrix) -> float:
    return VARIANCE_RTOL * (a.n ** 2 * a.max_abs * b.max_abs) ** 2


def _variance(a, b):
    mean = exact_mean(a, b)
    raw = second_moment(a, b) - mean * mean
    degenerate = raw <= variance_threshold(a, b)
    return mean, raw, max(raw, 0.0), degenerate


def exact_variance(a: CoefficientMatrix, b: CoefficientMatrix) -> float:
    """Var(Γ) = E(Γ²) − E(Γ)², clamped at zero.

    Values at or below ``1e-12 · (N² a_max b_max)²`` are treated as
    degenerate; :func:`moment_report` exposes the flag.
    """
    _, _, var, degenerate = _variance(a, b)
    return 0.0 if degenerate else var


def normalizer(a: CoefficientMatrix, b: CoefficientMatrix,
               kind: NormalizerKind | str) -> float:
    """Closed-form scale for Γ under the chosen normalization.

    ``daniels`` is 2√(T_a T_b / N³) with T = Σ_{i,j,k} a_ij a_ik over all
    triples (this is also the normalizer of the symmetric main theorem);
    ``pham2`` is √(2 Σa² Σb² / N²); ``pham3`` adds 4 Σ′a_ij a_ik Σ′b_ij b_ik / N³
    under the root, with Σ′ over distinct i, j, k.
    """
    _check_sizes(a, b)
    kind = NormalizerKind(kind)
    n = a.n
    if kind is NormalizerKind.EXACT_SD:
        return math.sqrt(exact_variance(a, b))
    if kind is NormalizerKind.DANIELS:
        return 2.0 * math.sqrt(
            elementary_sums(a).triple_sum * elementary_sums(b).triple_sum / n ** 3
        )
    sq = float(np.sum(a.entries ** 2)) * float(np.sum(b.entries ** 2))
    if kind is NormalizerKind.PHAM2:
        return math.sqrt(2.0 * sq / n ** 2)
    shared = (restricted_sum(a, DistinctSumPattern.P3_SHARED)
              * restricted_sum(b, DistinctSumPattern.P3_SHARED))
    return math.sqrt(max(4.0 * shared / n ** 3 + 2.0 * sq / n ** 2, 0.0))


def standardize(gamma_obs: float, a: CoefficientMatrix, b: CoefficientMatrix,
                kind: NormalizerKind | str) -> float:
    """Standardize an observed Γ.

    ``exact_sd`` centers by the exact mean and divides by the exact standard
    deviation. The theorem normalizers divide the raw, uncentered Γ.
    """
    kind = NormalizerKind(kind)
    if kind is NormalizerKind.EXACT_SD:
        mean, _, var, degenerate = _variance(a, b)
        if degenerate:
            raise DegenerateError("permutation variance of Γ is zero")
        return (gamma_obs - mean) / math.sqrt(var)
    scale = normalizer(a, b, kind)
    if scale <= 0.0:
        raise DegenerateError(f"{kind.value} normalizer is zero")
    return gamma_obs / scale


@dataclass(frozen=True)
class MomentReport:
    mean: float
    second_moment: float
    variance: float
    normalizer_daniels: float
    normalizer_pham2: float
    normalizer_pham3: float
    degenerate: bool

    def to_dict(self) -> dict:
        return asdict(self)


def moment_report(a: CoefficientMatrix, b: CoefficientMatrix) -> MomentReport:
    mean, _, var, degenerate = _variance(a, b)
    return MomentReport(
        mean=mean,
        second_moment=second_moment(a, b),
        variance=0.0 if degenerate else var,
        normalizer_daniels=normalizer(a, b, NormalizerKind.DANIELS),
        normalizer_pham2=normalizer(a, b, NormalizerKind.PHAM2),
        normalizer_pham3=normalizer(a, b, NormalizerKind.PHAM3),
        degenerate=degenerate,
    )


def moment_scaling_report(a: CoefficientMatrix, b: CoefficientMatrix,
                          max_order: int = 4, cap: int = 8):
    """Exact p-th moments by enumeration, with the N^{3p/2} a_max^p b_max^p scaling.

    Returns a list of ``(p, E Γ^p, E Γ^p / (N^{1.5 p} a_max^p b_max^p))``
    for p = 1..max_order.
    """
    from .engine import enumerate_exact

    if not 1 <= max_order <= 6:
        raise ValueError("max_order must be between 1 and 6")
    dist = enumerate_exact(a, b, cap=cap)
    scale = a.n ** 1.5 * a.max_abs * b.max_abs
    rows = []
    for p in range(1, max_order + 1):
        m = float(np.mean(dist.values ** p))
        rows.append((p, m, m / scale ** p if scale > 0 else float("nan")))
    return rows
