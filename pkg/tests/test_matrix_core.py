import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from permcorr import (
    DimensionError,
    DistinctSumPattern,
    Permutation,
    SymmetryError,
    apply_permutation,
    elementary_sums,
    gamma,
    new_coefficient_matrix,
    read_matrix_csv,
    restricted_sum,
)
from permcorr.builders import diff_matrix, sign_diff_matrix
from permcorr.matrix_core import CoefficientMatrix, Symmetry, distinct_sum, set_partitions

from conftest import (
    complete_graph,
    naive_distinct_sum,
    pair_matrix,
    random_general,
    random_symmetric,
    random_symmetric_hollow,
)


class TestConstruction:
    def test_k3_is_valid(self):
        k3 = complete_graph(3)
        assert k3.n == 3 and k3.hollow and k3.symmetry is Symmetry.SYMMETRIC

    def test_symmetry_violation_reports_pair(self):
        e = np.zeros((3, 3))
        e[0, 1] = 1.0
        with pytest.raises(SymmetryError, match=r"\(1, 2\)"):
            new_coefficient_matrix(e, "symmetric")

    def test_sign_difference_is_antisymmetric(self):
        e = np.sign(np.subtract.outer([1, 2, 3], [1, 2, 3]))
        m = new_coefficient_matrix(e, "antisymmetric", hollow=True)
        assert m.symmetry is Symmetry.ANTISYMMETRIC

    def test_hollow_violation(self):
        with pytest.raises(SymmetryError, match="hollow"):
            new_coefficient_matrix(np.eye(3), "symmetric", hollow=True)

    @pytest.mark.parametrize("shape", [(2, 3), (1, 1), (4,)])
    def test_dimension_errors(self, shape):
        with pytest.raises(DimensionError):
            new_coefficient_matrix(np.zeros(shape))

    def test_entries_are_read_only(self):
        m = complete_graph(3)
        with pytest.raises(ValueError):
            m.entries[0, 1] = 5.0

    def test_infer(self):
        assert CoefficientMatrix.infer(1 - np.eye(3)).symmetry is Symmetry.SYMMETRIC
        assert CoefficientMatrix.infer(diff_matrix([1, 2, 4]).entries).symmetry is Symmetry.ANTISYMMETRIC
        m = CoefficientMatrix.infer(np.arange(9.0).reshape(3, 3))
        assert m.symmetry is Symmetry.GENERAL and not m.hollow


class TestPermutation:
    def test_rejects_non_bijection(self):
        with pytest.raises(DimensionError):
            Permutation([0, 0, 1])

    def test_one_based_round_trip(self):
        p = Permutation.from_one_based([2, 3, 1])
        assert p.mapping.tolist() == [1, 2, 0]
        assert p.one_based() == [2, 3, 1]

    def test_inverse(self):
        p = Permutation([2, 0, 3, 1])
        assert p.mapping[p.inverse().mapping].tolist() == [0, 1, 2, 3]


class TestGamma:
    def test_k3_pair_identity(self):
        assert gamma(complete_graph(3), pair_matrix(), Permutation.identity(3)) == 2.0

    def test_k3_pair_cyclic(self):
        assert gamma(complete_graph(3), pair_matrix(), Permutation.from_one_based([2, 3, 1])) == 2.0

    def test_wilcoxon_identity(self):
        a = sign_diff_matrix([1, 2, 3])
        b = sign_diff_matrix([0, 0, 1])
        assert gamma(a, b, Permutation.identity(3)) == 4.0

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            gamma(complete_graph(3), complete_graph(4), Permutation.identity(3))

    def test_includes_diagonal(self):
        a = new_coefficient_matrix(np.eye(2))
        b = new_coefficient_matrix([[2.0, 0.0], [0.0, 5.0]])
        assert gamma(a, b, Permutation.identity(2)) == 7.0


class TestApplyPermutation:
    def test_identity_unchanged(self, rng):
        b = random_general(5, rng)
        out = apply_permutation(b, Permutation.identity(5))
        assert np.array_equal(out.entries, b.entries)

    def test_swap_keeps_pair(self):
        out = apply_permutation(pair_matrix(), Permutation.from_one_based([2, 1, 3]))
        assert np.array_equal(out.entries, pair_matrix().entries)

    def test_preserves_flags(self, rng):
        b = random_symmetric_hollow(4, rng)
        out = apply_permutation(b, Permutation([3, 1, 0, 2]))
        assert out.symmetry is Symmetry.SYMMETRIC and out.hollow

    def test_relabeling_identity_random(self, rng):
        for _ in range(10):
            a, b = random_general(5, rng), random_general(5, rng)
            p = Permutation(rng.permutation(5))
            lhs = gamma(a, b, p)
            rhs = gamma(a, apply_permutation(b, p), Permutation.identity(5))
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


# -- property tests ---------------------------------------------------------

square = st.integers(2, 6).flatmap(
    lambda n: st.tuples(
        arrays(np.float64, (n, n), elements=st.floats(-10, 10)),
        arrays(np.float64, (n, n), elements=st.floats(-10, 10)),
        st.permutations(list(range(n))),
    )
)


@settings(max_examples=60, deadline=None)
@given(square, st.floats(-5, 5))
def test_gamma_properties(data, c):
    ea, eb, p = data
    a, b = new_coefficient_matrix(ea), new_coefficient_matrix(eb)
    perm = Permutation(p)
    g = gamma(a, b, perm)
    scale = 1.0 + np.abs(ea).sum() * np.abs(eb).max()
    # role swap: Γ(a, b, π) = Γ(b, a, π⁻¹)
    assert gamma(b, a, perm.inverse()) == pytest.approx(g, abs=1e-9 * scale)
    # relabeling
    assert gamma(a, apply_permutation(b, perm), Permutation.identity(a.n)) == pytest.approx(
        g, abs=1e-9 * scale
    )
    # linearity in a
    assert gamma(a.scaled(c), b, perm) == pytest.approx(c * g, abs=1e-9 * scale * (1 + abs(c)))


class TestElementarySums:
    def test_k3(self):
        s = elementary_sums(complete_graph(3))
        assert (s.sum_offdiag, s.sum_diag, s.triple_sum, s.max_abs) == (6.0, 0.0, 12.0, 1.0)

    def test_difference_matrix(self):
        s = elementary_sums(diff_matrix([1, 2, 3]))
        assert s.sum_offdiag == 0.0
        assert s.row_sums.tolist() == [-3.0, 0.0, 3.0]
        assert s.triple_sum == 18.0

    def test_triple_sum_brute_force(self, rng):
        e = rng.uniform(-1, 1, (6, 6))
        ref = sum(e[i, j] * e[i, k] for i, j, k in itertools.product(range(6), repeat=3))
        assert elementary_sums(new_coefficient_matrix(e)).triple_sum == pytest.approx(ref, rel=1e-12)

    def test_antisymmetric_invariants(self, rng):
        u = np.triu(rng.uniform(-1, 1, (7, 7)), 1)
        s = elementary_sums(new_coefficient_matrix(u - u.T, "antisymmetric"))
        assert s.sum_offdiag == 0.0
        assert np.array_equal(s.row_sums, -s.col_sums)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 7).flatmap(
        lambda n: arrays(np.float64, (n, n), elements=st.floats(-1e3, 1e3))))
    def test_triple_sum_nonnegative(self, e):
        assert elementary_sums(new_coefficient_matrix(e)).triple_sum >= 0.0


class TestRestrictedSum:
    def test_empty_pattern(self):
        assert restricted_sum(complete_graph(3), "P4") == 0.0

    def test_k4_shared(self):
        assert restricted_sum(complete_graph(4), DistinctSumPattern.P3_SHARED) == 24.0

    @pytest.mark.parametrize("pattern", list(DistinctSumPattern))
    def test_against_naive_loops(self, pattern, rng):
        for make in (random_symmetric, random_general):
            a = make(6, rng)
            ref = naive_distinct_sum(a.entries, pattern.labels)
            assert restricted_sum(a, pattern) == pytest.approx(ref, rel=1e-10, abs=1e-12)

    def test_every_tie_pattern_two_factors(self, rng):
        e, c = rng.uniform(-1, 1, (5, 5)), rng.uniform(-1, 1, (5, 5))
        for labels in set_partitions(4):
            ref = 0.0
            for t in itertools.product(range(5), repeat=4):
                if all((t[p] == t[q]) == (labels[p] == labels[q])
                       for p in range(4) for q in range(4)):
                    ref += e[t[0], t[1]] * c[t[2], t[3]]
            assert distinct_sum((e, c), labels) == pytest.approx(ref, rel=1e-10, abs=1e-12)

    def test_set_partition_count(self):
        assert [len(list(set_partitions(k))) for k in range(6)] == [1, 1, 2, 5, 15, 52]


def test_read_matrix_csv(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("# a header\n0,1,2\n1,0,3\n2,3,0\n")
    m = read_matrix_csv(f)
    assert m.symmetry is Symmetry.SYMMETRIC and m.hollow
    assert m.entries[1, 2] == 3.0


def test_read_matrix_csv_bad_row(tmp_path):
    from permcorr import InputFormatError

    f = tmp_path / "m.csv"
    f.write_text("0,1\n1,x\n")
    with pytest.raises(InputFormatError, match=":2"):
        read_matrix_csv(f)
