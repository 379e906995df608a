"""Permutation inference for generalized correlation coefficients.

The statistic is Γ = Σ_i Σ_j a_ij b_{π(i)π(j)} with π uniform over all
permutations of the N indices.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateError,
    DimensionError,
    EnumerationCapError,
    InputFormatError,
    PermCorrError,
    SymmetryError,
)
from .matrix_core import (  # noqa: E402
    CoefficientMatrix,
    DistinctSumPattern,
    ElementarySums,
    Permutation,
    Symmetry,
    apply_permutation,
    elementary_sums,
    gamma,
    new_coefficient_matrix,
    read_matrix_csv,
    restricted_sum,
)
from .moments import (  # noqa: E402
    MomentReport,
    NormalizerKind,
    exact_mean,
    exact_second_moment,
    exact_variance,
    general_second_moment,
    moment_report,
    moment_scaling_report,
    normalizer,
    standardize,
)
from .conditions import (  # noqa: E402
    ConditionReport,
    TheoremId,
    diagnose,
    prime_transform,
    scenario_bounded_entries,
    star_transform,
)
from .engine import (  # noqa: E402
    FamilySpec,
    NullDistribution,
    convergence_sweep,
    enumerate_exact,
    exact_moment,
    ks_normal,
    p_value,
    sample_null,
)
