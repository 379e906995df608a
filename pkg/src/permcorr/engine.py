"""Permutation null distribution of Γ: full enumeration and Monte Carlo.

Monte Carlo permutations come from a counter-based generator, so draw ``t``
depends only on ``(seed, t)``. With all arithmetic modulo 2**64::

    GOLDEN = 0x9E3779B97F4A7C15
    mix64(z):
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        return z ^ (z >> 31)

    key = mix64(seed + GOLDEN * (t + 1))
    perm = [0, 1, ..., N-1]
    for s, i in enumerate(N-1, N-2, ..., 1):
        w = mix64(key + GOLDEN * (s + 1))
        j = ((w >> 32) * (i + 1)) >> 32          # uniform-ish in 0..i
        swap perm[i], perm[j]

The multiply-shift bound has bias below (i+1)/2**32, negligible at the sizes
used here. The order in which draws are computed, and the number of worker
threads, do not change any value.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.special import ndtr

from . import builders
from .errors import DegenerateError, EnumerationCapError, PermCorrError
from .matrix_core import CoefficientMatrix, _check_sizes, new_coefficient_matrix
from .moments import NormalizerKind, _variance, normalizer

DEFAULT_CAP = 8
MAX_CAP = 9

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def draw_permutations(n: int, seed: int, draws: np.ndarray) -> np.ndarray:
    """Permutations for the given draw indices, one row per draw."""
    draws = np.asarray(draws, dtype=np.uint64)
    with np.errstate(over="ignore"):
        keys = mix64(np.uint64(seed) + GOLDEN * (draws + np.uint64(1)))
        perms = np.tile(np.arange(n, dtype=np.int64), (draws.size, 1))
        rows = np.arange(draws.size)
        for s, i in enumerate(range(n - 1, 0, -1)):
            w = mix64(keys + GOLDEN * np.uint64(s + 1))
            j = (((w >> np.uint64(32)) * np.uint64(i + 1)) >> np.uint64(32)).astype(np.int64)
            tmp = perms[rows, j]
            perms[rows, j] = perms[:, i]
            perms[:, i] = tmp
    return perms


def gamma_batch(a: np.ndarray, b: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """Γ for each row of ``perms``."""
    pb = b[perms[:, :, None], perms[:, None, :]]
    return np.einsum("ij,mij->m", a, pb)


def _batch_size(n: int) -> int:
    return max(1, min(4096, 2_000_000 // (n * n)))


@dataclass(frozen=True, eq=False)
class NullDistribution:
    """Γ values under the permutation null, exact or sampled."""

    kind: Literal["exact", "empirical"]
    values: np.ndarray = field(repr=False)
    n: int
    seed: int | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.size == 0:
            raise PermCorrError("empty distribution")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def sample_count(self) -> int:
        return self.values.size

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def variance(self) -> float:
        return float(np.mean((self.values - self.mean) ** 2))

    def _std_moment(self, k):
        var = self.variance
        if var <= 0:
            return float("nan")
        return float(np.mean((self.values - self.mean) ** k) / var ** (k / 2))

    @property
    def skewness(self) -> float:
        return self._std_moment(3)

    @property
    def excess_kurtosis(self) -> float:
        return self._std_moment(4) - 3.0

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
        }


def enumerate_exact(a: CoefficientMatrix, b: CoefficientMatrix,
                    cap: int = DEFAULT_CAP) -> NullDistribution:
    """Γ for all N! permutations, in lexicographic permutation order."""
    _check_sizes(a, b)
    n = a.n
    if cap > MAX_CAP:
        raise EnumerationCapError(f"enumeration cap may not exceed {MAX_CAP}")
    if n > cap:
        raise EnumerationCapError(
            f"N = {n} exceeds the enumeration cap {cap} ({math.factorial(n)} permutations)"
        )
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    step = _batch_size(n)
    values = np.concatenate([
        gamma_batch(a.entries, b.entries, perms[s:s + step])
        for s in range(0, len(perms), step)
    ])
    return NullDistribution("exact", values, n)


def exact_moment(a: CoefficientMatrix, b: CoefficientMatrix, order: int,
                 cap: int = DEFAULT_CAP) -> float:
    if order < 1:
        raise ValueError("order must be at least 1")
    return float(np.mean(enumerate_exact(a, b, cap).values ** order))


def sample_null(a: CoefficientMatrix, b: CoefficientMatrix, draws: int, seed: int,
                workers: int = 1) -> NullDistribution:
    """Monte Carlo permutation null with ``draws`` counter-based permutations."""
    _check_sizes(a, b)
    if draws < 1:
        raise PermCorrError("draws must be at least 1")
    if not 0 <= seed < 2 ** 64:
        raise PermCorrError("seed must be a 64-bit unsigned integer")
    n = a.n
    step = _batch_size(n)
    chunks = [np.arange(s, min(s + step, draws)) for s in range(0, draws, step)]

    def run(idx):
        return gamma_batch(a.entries, b.entries, draw_permutations(n, seed, idx))

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    return NullDistribution("empirical", np.concatenate(parts), n, seed)


def standardized_values(dist: NullDistribution, a: CoefficientMatrix,
                        b: CoefficientMatrix, kind: NormalizerKind | str) -> np.ndarray:
    kind = NormalizerKind(kind)
    if kind is NormalizerKind.EXACT_SD:
        mean, _, var, degenerate = _variance(a, b)
        if degenerate:
            raise DegenerateError("permutation variance of Γ is zero")
        return (dist.values - mean) / math.sqrt(var)
    scale = normalizer(a, b, kind)
    if scale <= 0:
        raise DegenerateError(f"{kind.value} normalizer is zero")
    return dist.values / scale


def ks_statistic(z: np.ndarray) -> float:
    """Kolmogorov–Smirnov sup-distance between the sample ``z`` and N(0, 1)."""
    z = np.sort(np.asarray(z, dtype=float))
    m = z.size
    cdf = ndtr(z)
    upper = np.arange(1, m + 1) / m - cdf
    lower = cdf - np.arange(m) / m
    return float(max(upper.max(), lower.max()))


def ks_normal(dist: NullDistribution, a: CoefficientMatrix, b: CoefficientMatrix,
              kind: NormalizerKind | str = NormalizerKind.EXACT_SD) -> float:
    if np.ptp(dist.values) == 0:
        raise DegenerateError("all Γ values are identical")
    return ks_statistic(standardized_values(dist, a, b, kind))


def p_value(dist: NullDistribution, gamma_obs: float,
            sidedness: Literal["greater", "less", "two_sided"] = "two_sided") -> float:
    """Permutation p-value; ties count toward both tails.

    Empirical distributions use the (1 + count)/(M + 1) correction; exact
    ones use plain proportions. Values within 1e-10 relative of ``gamma_obs``
    are treated as ties to absorb summation-order rounding.
    """
    v = dist.values
    tol = 1e-10 * (np.max(np.abs(v)) + abs(gamma_obs))
    ge = int(np.count_nonzero(v >= gamma_obs - tol))
    le = int(np.count_nonzero(v <= gamma_obs + tol))
    if dist.kind == "exact":
        greater, less = ge / v.size, le / v.size
    else:
        greater, less = (1 + ge) / (v.size + 1), (1 + le) / (v.size + 1)
    if sidedness == "greater":
        return greater
    if sidedness == "less":
        return less
    if sidedness == "two_sided":
        return min(1.0, 2.0 * min(greater, less))
    raise ValueError(f"unknown sidedness {sidedness!r}")


# ---------------------------------------------------------------------------
# Data-generating families for convergence sweeps


def _balanced_labels(n):
    return builders.LabelVector((np.arange(n) >= n // 2).astype(int))


def _family_wilcoxon(n, rng):
    x = rng.standard_normal(n)
    return builders.sign_diff_matrix(x), builders.sign_diff_matrix(_balanced_labels(n).labels)


def _family_mantel_centered(n, rng):
    x, y = rng.standard_normal(n), rng.standard_normal(n)
    return (builders.centered_distance_matrix(builders.Sample(x)),
            builders.centered_distance_matrix(builders.Sample(y)))


def _family_mmd(n, rng):
    s = builders.Sample(rng.standard_normal((n, 2)))
    return builders.kernel_matrix(s, "median"), builders.mmd_label_matrix(_balanced_labels(n))


def _family_edge_count(n, rng):
    s = builders.Sample(rng.standard_normal((n, 2)))
    return builders.mst_adjacency(s), builders.abs_label_diff(_balanced_labels(n))


def _family_complete_graph(n, rng):
    k = new_coefficient_matrix(1.0 - np.eye(n), "symmetric", True)
    pair = np.zeros((n, n))
    pair[0, 1] = pair[1, 0] = 1.0
    return k, new_coefficient_matrix(pair, "symmetric", True)


FAMILIES: dict[str, Callable] = {
    "wilcoxon": _family_wilcoxon,
    "mantel_centered": _family_mantel_centered,
    "mmd": _family_mmd,
    "edge_count": _family_edge_count,
    "complete_graph": _family_complete_graph,
}


@dataclass(frozen=True)
class FamilySpec:
    """A named builder family plus the seed of its data-generating RNG."""

    family: str
    data_seed: int = 0

    def build(self, n: int):
        if self.family not in FAMILIES:
            raise PermCorrError(f"unknown family {self.family!r}; choose from {sorted(FAMILIES)}")
        rng = np.random.default_rng([self.data_seed, n])
        return FAMILIES[self.family](n, rng)


def convergence_sweep(spec: FamilySpec, n_values, draws: int, seed: int,
                      workers: int = 1) -> list[dict]:
    """One row per N: KS distance, skewness, excess kurtosis and the ratio of
    the daniels and pham3 normalizers to the exact standard deviation."""
    rows = []
    for n in n_values:
        a, b = spec.build(int(n))
        _, _, var, degenerate = _variance(a, b)
        row = {"N": int(n), "degenerate": bool(degenerate), "ks": None,
               "skewness": None, "excess_kurtosis": None,
               "ratio_daniels": None, "ratio_pham3": None}
        if not degenerate:
            dist = sample_null(a, b, draws, seed, workers)
            sd = math.sqrt(var)
            row.update(
                ks=ks_normal(dist, a, b),
                skewness=dist.skewness,
                excess_kurtosis=dist.excess_kurtosis,
                ratio_daniels=normalizer(a, b, "daniels") / sd,
                ratio_pham3=normalizer(a, b, "pham3") / sd,
            )
        rows.append(row)
    return rows
