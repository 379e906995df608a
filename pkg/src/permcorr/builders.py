"""Coefficient matrices for the common correlation and two-sample statistics.

Each builder returns a validated :class:`~permcorr.matrix_core.CoefficientMatrix`
whose symmetry class is declared by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.stats import rankdata

from ._csv import read_numeric_csv
from .errors import DimensionError, InputFormatError, PermCorrError
from .matrix_core import CoefficientMatrix, Symmetry


@dataclass(frozen=True, eq=False)
class Sample:
    """N points in d dimensions, stored as an (N, d) array."""

    points: np.ndarray

    def __post_init__(self):
        p = np.array(self.points, dtype=float, copy=True)
        if p.ndim == 1:
            p = p[:, None]
        if p.ndim != 2:
            raise DimensionError("points must be an (N, d) array")
        if p.shape[0] < 2 or p.shape[1] < 1:
            raise DimensionError(f"need N >= 2 points of dimension >= 1, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise PermCorrError("points must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @classmethod
    def from_rows(cls, rows) -> "Sample":
        """Build from a ragged-checked sequence of coordinate rows."""
        rows = [np.atleast_1d(np.asarray(r, dtype=float)) for r in rows]
        dims = {r.shape for r in rows}
        if len(dims) > 1:
            raise DimensionError(f"points have mixed dimensions: {sorted(dims)}")
        return cls(np.vstack(rows))


@dataclass(frozen=True, eq=False)
class LabelVector:
    """Group labels in {0, 1}; ``m`` zeros and ``n_count`` ones, both at least 1."""

    labels: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.labels, dtype=float).ravel()
        if not np.all((y == 0) | (y == 1)):
            raise PermCorrError("labels must be 0 or 1")
        y = y.astype(np.int64)
        if y.sum() == 0 or y.sum() == y.size:
            raise PermCorrError("both groups must be nonempty")
        y.setflags(write=False)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def m(self) -> int:
        return int(self.n - self.labels.sum())

    @property
    def n_count(self) -> int:
        return int(self.labels.sum())


def read_sample_csv(path: str | Path) -> Sample:
    return Sample(read_numeric_csv(path))


def read_values_csv(path: str | Path) -> np.ndarray:
    data = read_numeric_csv(path)
    if data.shape[1] != 1:
        raise InputFormatError(f"expected one column, found {data.shape[1]}", path)
    return data[:, 0]


def read_labels_csv(path: str | Path) -> LabelVector:
    return LabelVector(read_values_csv(path))


def _values(values) -> np.ndarray:
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 2:
        raise DimensionError("need at least 2 values")
    return x


def diff_matrix(values) -> CoefficientMatrix:
    """a_ij = x_i − x_j (Pearson, up to standardization)."""
    x = _values(values)
    return CoefficientMatrix(x[:, None] - x[None, :], Symmetry.ANTISYMMETRIC, True)


def rank_diff_matrix(values) -> CoefficientMatrix:
    """Differences of mid-ranks (Spearman, up to standardization)."""
    return diff_matrix(rankdata(_values(values), method="average"))


def sign_diff_matrix(values) -> CoefficientMatrix:
    """a_ij = sign(x_i − x_j); the Wilcoxon / Mann–Whitney coefficients."""
    x = _values(values)
    return CoefficientMatrix(np.sign(x[:, None] - x[None, :]), Symmetry.ANTISYMMETRIC, True)


def _distances(sample: Sample) -> np.ndarray:
    return squareform(pdist(sample.points))


def mst_edges(sample: Sample) -> list[tuple[int, int]]:
    """Euclidean minimum spanning tree edges (0-based, i < j) by Kruskal.

    Edges are ordered by (length, i, j), so equal lengths resolve to the
    lexicographically smallest index pair.
    """
    n = sample.n
    iu, ju = np.triu_indices(n, k=1)
    w = pdist(sample.points)
    order = np.lexsort((ju, iu, w))
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    edges = []
    for e in order:
        i, j = int(iu[e]), int(ju[e])
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
            if len(edges) == n - 1:
                break
    return edges


def mst_adjacency(sample: Sample) -> CoefficientMatrix:
    """0/1 adjacency of the Euclidean MST (Friedman–Rafsky edge-count graph)."""
    adj = np.zeros((sample.n, sample.n))
    for i, j in mst_edges(sample):
        adj[i, j] = adj[j, i] = 1.0
    return CoefficientMatrix(adj, Symmetry.SYMMETRIC, True)


def median_bandwidth(sample: Sample) -> float:
    return float(np.median(pdist(sample.points)))


def kernel_matrix(sample: Sample, bandwidth: float | Literal["median"] = "median",
                  keep_diagonal: bool = False) -> CoefficientMatrix:
    """Gaussian kernel exp(−‖x_i − x_j‖² / (2σ²)).

    ``bandwidth="median"`` sets σ to the median pairwise distance. The
    diagonal is zeroed unless ``keep_diagonal`` is set.
    """
    if isinstance(bandwidth, str):
        if bandwidth != "median":
            raise PermCorrError(f"unknown bandwidth rule {bandwidth!r}")
        sigma = median_bandwidth(sample)
        if sigma <= 0:
            raise PermCorrError("median bandwidth is zero (all points identical)")
    else:
        sigma = float(bandwidth)
        if not sigma > 0:
            raise PermCorrError("bandwidth must be positive")
    d2 = squareform(pdist(sample.points, "sqeuclidean"))
    k = np.exp(-d2 / (2.0 * sigma * sigma))
    if not keep_diagonal:
        np.fill_diagonal(k, 0.0)
    return CoefficientMatrix(k, Symmetry.SYMMETRIC, not keep_diagonal)


def mmd_label_matrix(labels: LabelVector) -> CoefficientMatrix:
    """Unbiased MMD contrast: 1/(m(m−1)) within group 0, 1/(n(n−1)) within
    group 1, −1/(mn) across; the diagonal is zero."""
    m, n = labels.m, labels.n_count
    if m < 2 or n < 2:
        raise PermCorrError(f"MMD needs at least 2 points per group, got m={m}, n={n}")
    y = labels.labels.astype(float)
    z = 1.0 - y
    b = (np.outer(z, z) / (m * (m - 1)) + np.outer(y, y) / (n * (n - 1))
         - (np.outer(z, y) + np.outer(y, z)) / (m * n))
    np.fill_diagonal(b, 0.0)
    return CoefficientMatrix(b, Symmetry.SYMMETRIC, True)


def weighted_label_matrix(labels: LabelVector,
                          p_rule: Literal["m_over_N", "m1_over_N2"] | float = "m_over_N"
                          ) -> CoefficientMatrix:
    """b_ij = (1−p)(1−y_i)(1−y_j) + p·y_i·y_j, diagonal included.

    ``p_rule`` is ``"m_over_N"`` (p = m/N), ``"m1_over_N2"`` (p = (m−1)/(N−2))
    or an explicit p in [0, 1].
    """
    N, m = labels.n, labels.m
    if p_rule == "m_over_N":
        p = m / N
    elif p_rule == "m1_over_N2":
        if N < 3:
            raise PermCorrError("p = (m-1)/(N-2) needs N >= 3")
        p = (m - 1) / (N - 2)
    elif isinstance(p_rule, str):
        raise PermCorrError(f"unknown p rule {p_rule!r}")
    else:
        p = float(p_rule)
        if not 0.0 <= p <= 1.0:
            raise PermCorrError(f"p must lie in [0, 1], got {p}")
    y = labels.labels.astype(float)
    z = 1.0 - y
    b = (1.0 - p) * np.outer(z, z) + p * np.outer(y, y)
    return CoefficientMatrix(b, Symmetry.SYMMETRIC, False)


def abs_label_diff(labels: LabelVector) -> CoefficientMatrix:
    y = labels.labels.astype(float)
    return CoefficientMatrix(np.abs(y[:, None] - y[None, :]), Symmetry.SYMMETRIC, True)


def centered_distance_matrix(sample: Sample) -> CoefficientMatrix:
    """Euclidean distances minus their off-diagonal mean, zero diagonal."""
    d = _distances(sample)
    n = sample.n
    d = d - d.sum() / (n * (n - 1))
    np.fill_diagonal(d, 0.0)
    # pdist/squareform output is exactly symmetric, so the shift keeps it so
    return CoefficientMatrix(d, Symmetry.SYMMETRIC, True)
