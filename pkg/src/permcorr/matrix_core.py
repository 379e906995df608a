"""Coefficient matrices, permutations, the Γ statistic and distinct-index sums.

Indices are 0-based in every array held here. Anything printed or read from
disk uses 1-based indices; see :meth:`Permutation.one_based` and
:meth:`Permutation.from_one_based`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from ._csv import read_numeric_csv
from .errors import DimensionError, InputFormatError, SymmetryError


class Symmetry(str, enum.Enum):
    SYMMETRIC = "symmetric"
    ANTISYMMETRIC = "antisymmetric"
    GENERAL = "general"


def _frozen(x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=float, copy=True)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """An N×N real coefficient matrix with a declared symmetry class.

    Construction validates the declaration exactly (no tolerance): a
    symmetric matrix must satisfy ``a[i, j] == a[j, i]`` bitwise, an
    antisymmetric one ``a[i, j] == -a[j, i]`` with a zero diagonal, and a
    hollow one a zero diagonal. The entries array is stored read-only.
    """

    entries: np.ndarray
    symmetry: Symmetry = Symmetry.GENERAL
    hollow: bool = False

    def __post_init__(self):
        entries = _frozen(self.entries)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "symmetry", Symmetry(self.symmetry))
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionError(f"entries must be square, got shape {entries.shape}")
        if entries.shape[0] < 2:
            raise DimensionError("matrix order must be at least 2")
        if not np.all(np.isfinite(entries)):
            raise SymmetryError("entries must be finite")
        if self.symmetry is Symmetry.SYMMETRIC:
            _check_pairs(entries, entries.T, "symmetric", "a[j,i]")
        elif self.symmetry is Symmetry.ANTISYMMETRIC:
            _check_pairs(entries, -entries.T, "antisymmetric", "-a[j,i]")
        if self.hollow or self.symmetry is Symmetry.ANTISYMMETRIC:
            bad = np.flatnonzero(np.diagonal(entries) != 0)
            if bad.size:
                i = int(bad[0]) + 1
                kind = "hollow" if self.hollow else "antisymmetric"
                raise SymmetryError(
                    f"{kind} matrix has nonzero diagonal entry at ({i}, {i})"
                )

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def scaled(self, c: float) -> "CoefficientMatrix":
        return CoefficientMatrix(c * self.entries, self.symmetry, self.hollow)

    @classmethod
    def infer(cls, entries) -> "CoefficientMatrix":
        """Build a matrix whose symmetry class and hollow flag are read off the data."""
        e = np.asarray(entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DimensionError(f"entries must be square, got shape {e.shape}")
        hollow = bool(np.all(np.diagonal(e) == 0))
        if np.array_equal(e, e.T):
            sym = Symmetry.SYMMETRIC
        elif hollow and np.array_equal(e, -e.T):
            sym = Symmetry.ANTISYMMETRIC
        else:
            sym = Symmetry.GENERAL
        return cls(e, sym, hollow)


def _check_pairs(entries, mirrored, kind, rhs):
    bad = np.argwhere(entries != mirrored)
    if bad.size:
        i, j = (int(v) + 1 for v in bad[0])
        raise SymmetryError(f"matrix declared {kind} but a[{i},{j}] != {rhs} at ({i}, {j})")


def new_coefficient_matrix(entries, symmetry="general", hollow=False) -> CoefficientMatrix:
    return CoefficientMatrix(np.asarray(entries, dtype=float), Symmetry(symmetry), hollow)


def read_matrix_csv(path: str | Path, symmetry: str | None = None) -> CoefficientMatrix:
    """Load an N×N matrix from CSV; the symmetry class is inferred unless given."""
    data = read_numeric_csv(path)
    if data.shape[0] != data.shape[1]:
        raise InputFormatError(f"matrix must be square, got {data.shape[0]}x{data.shape[1]}", path)
    if symmetry is None:
        return CoefficientMatrix.infer(data)
    return new_coefficient_matrix(data, symmetry, bool(np.all(np.diagonal(data) == 0)))


@dataclass(frozen=True, eq=False)
class Permutation:
    """A bijection of ``{0, ..., N-1}``; ``mapping[i]`` is π(i)."""

    mapping: np.ndarray

    def __post_init__(self):
        m = np.array(self.mapping, dtype=np.int64, copy=True)
        if m.ndim != 1 or not np.array_equal(np.sort(m), np.arange(m.size)):
            raise DimensionError("mapping is not a permutation of 0..N-1")
        m.setflags(write=False)
        object.__setattr__(self, "mapping", m)

    @property
    def n(self) -> int:
        return self.mapping.size

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def from_one_based(cls, seq: Sequence[int]) -> "Permutation":
        return cls(np.asarray(seq, dtype=np.int64) - 1)

    def one_based(self) -> list[int]:
        return [int(v) + 1 for v in self.mapping]

    def inverse(self) -> "Permutation":
        return Permutation(np.argsort(self.mapping))


def _check_sizes(*objs):
    sizes = {o.n for o in objs}
    if len(sizes) != 1:
        raise DimensionError(f"size mismatch: {sorted(sizes)}")


def gamma(a: CoefficientMatrix, b: CoefficientMatrix, perm: Permutation) -> float:
    """Γ = Σ_i Σ_j a_ij b_{π(i)π(j)}, diagonal terms included."""
    _check_sizes(a, b, perm)
    p = perm.mapping
    return float(np.sum(a.entries * b.entries[np.ix_(p, p)]))


def apply_permutation(b: CoefficientMatrix, perm: Permutation) -> CoefficientMatrix:
    _check_sizes(b, perm)
    p = perm.mapping
    return CoefficientMatrix(b.entries[np.ix_(p, p)], b.symmetry, b.hollow)


@dataclass(frozen=True)
class ElementarySums:
    sum_offdiag: float
    sum_diag: float
    sum_sq_offdiag: float
    row_sums: np.ndarray = field(repr=False)
    col_sums: np.ndarray = field(repr=False)
    triple_sum: float
    max_abs: float

    @property
    def total(self) -> float:
        return self.sum_offdiag + self.sum_diag


def elementary_sums(a: CoefficientMatrix) -> ElementarySums:
    e = a.entries
    diag = np.diagonal(e)
    rows = e.sum(axis=1)
    sum_diag = float(diag.sum())
    if a.symmetry is Symmetry.ANTISYMMETRIC:
        # exact by definition; a floating-point sum would only approximate 0
        sum_offdiag, cols = 0.0, -rows
    else:
        sum_offdiag, cols = float(e.sum()) - sum_diag, e.sum(axis=0)
    return ElementarySums(
        sum_offdiag=sum_offdiag,
        sum_diag=sum_diag,
        sum_sq_offdiag=float(np.sum(e * e) - np.sum(diag * diag)),
        row_sums=_frozen(rows),
        col_sums=_frozen(cols),
        triple_sum=float(rows @ rows),
        max_abs=a.max_abs,
    )


# ---------------------------------------------------------------------------
# Distinct-index sums
#
# A product a_{x y} c_{z w} is described by a label tuple (lx, ly, lz, lw):
# equal labels mean tied indices, different labels mean the indices must be
# pairwise distinct. The distinct sum is obtained from the unrestricted
# ("tied at least as much") sums by Möbius inversion on the lattice of set
# partitions of the labels, so every term costs O(N²).


class DistinctSumPattern(str, enum.Enum):
    """The seven distinct-index products in the symmetric E(Γ²) expansion."""

    P4 = "P4"                # Σ′ a_jk a_su
    P3_SHARED = "P3_shared"  # Σ′ a_jk a_ju
    P3_DIAG = "P3_diag"      # Σ′ a_jj a_su
    P2_SQ = "P2_sq"          # Σ′ a_jk²
    P2_DIAG2 = "P2_diag2"    # Σ′ a_jj a_ss
    P2_MIXED = "P2_mixed"    # Σ′ a_jj a_ju
    P1 = "P1"                # Σ a_jj²

    @property
    def labels(self) -> tuple[int, int, int, int]:
        return _PATTERN_LABELS[self]

    @property
    def distinct(self) -> int:
        return len(set(self.labels))


_PATTERN_LABELS = {
    DistinctSumPattern.P4: (0, 1, 2, 3),
    DistinctSumPattern.P3_SHARED: (0, 1, 0, 2),
    DistinctSumPattern.P3_DIAG: (0, 0, 1, 2),
    DistinctSumPattern.P2_SQ: (0, 1, 0, 1),
    DistinctSumPattern.P2_DIAG2: (0, 0, 1, 1),
    DistinctSumPattern.P2_MIXED: (0, 0, 0, 1),
    DistinctSumPattern.P1: (0, 0, 0, 0),
}


def canonical_labels(labels: Sequence[int]) -> tuple[int, ...]:
    """Relabel so blocks are numbered 0, 1, ... in order of first appearance."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(l, len(seen)) for l in labels)


def set_partitions(k: int):
    """Yield every set partition of ``range(k)`` as a block-index tuple."""
    if k == 0:
        yield ()
        return
    for rest in set_partitions(k - 1):
        nblocks = max(rest, default=-1) + 1
        for b in range(nblocks + 1):
            yield rest + (b,)


@lru_cache(maxsize=None)
def _mobius_expansion(labels: tuple[int, ...]) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Coarsenings Q of the label partition with their Möbius weights μ(P, Q)."""
    nblocks = max(labels) + 1
    out = []
    for merge in set_partitions(nblocks):
        sizes = np.bincount(merge)
        mu = 1
        for s in sizes:
            mu *= (-1) ** (int(s) - 1) * math.factorial(int(s) - 1)
        out.append((tuple(merge[l] for l in labels), mu))
    return tuple(out)


_LETTERS = "abcdefgh"


def _reduce_factor(m: np.ndarray, p: int, q: int, keep: set[int]):
    if p == q:
        d = np.diagonal(m)
        return (d, (p,)) if p in keep else (d.sum(), ())
    if p in keep and q in keep:
        return m, (p, q)
    if p in keep:
        return m.sum(axis=1), (p,)
    if q in keep:
        return m.sum(axis=0), (q,)
    return m.sum(), ()


def tied_sum(factors: Sequence[np.ndarray], labels: Sequence[int]) -> float:
    """Unrestricted sum of ∏ factors[t][l_{2t}, l_{2t+1}] with tied labels.

    Labels shared between factors are summed jointly, labels private to one
    factor are summed out first, so the cost stays O(N²) per factor.
    """
    reduced = []
    for t, m in enumerate(factors):
        p, q = labels[2 * t], labels[2 * t + 1]
        others = set(labels[: 2 * t]) | set(labels[2 * t + 2:])
        reduced.append(_reduce_factor(m, p, q, others))
    subs = ",".join("".join(_LETTERS[l] for l in lab) for _, lab in reduced)
    return float(np.einsum(subs + "->", *[np.asarray(x) for x, _ in reduced]))


def distinct_sum(factors: Sequence[np.ndarray], labels: Sequence[int]) -> float:
    """Sum of ∏ factors[t][l_{2t}, l_{2t+1}] over pairwise-distinct label values."""
    labels = canonical_labels(labels)
    n = factors[0].shape[0]
    if max(labels) + 1 > n:
        return 0.0
    return float(
        sum(mu * tied_sum(factors, q) for q, mu in _mobius_expansion(labels))
    )


def restricted_sum(a: CoefficientMatrix, pattern: DistinctSumPattern | str,
                   other: CoefficientMatrix | None = None) -> float:
    """Distinct-subscript sum Σ′ for one of the seven E(Γ²) product patterns.

    The second factor is ``a`` itself unless ``other`` is given.

    Examples
    --------
    >>> k4 = new_coefficient_matrix(1 - np.eye(4), "symmetric", hollow=True)
    >>> restricted_sum(k4, "P3_shared")
    24.0
    """
    pattern = DistinctSumPattern(pattern)
    second = a if other is None else other
    if other is not None:
        _check_sizes(a, other)
    return distinct_sum((a.entries, second.entries), pattern.labels)


def all_index_patterns(order: int) -> list[tuple[int, ...]]:
    """All 2·order-slot label patterns, i.e. set partitions of the index slots."""
    return list(set_partitions(2 * order))


def falling_factorial(n: int, k: int) -> int:
    return math.perm(n, k) if 0 <= k <= n else 0


