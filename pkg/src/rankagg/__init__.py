"""Rank aggregation with weighted Kendall and Cayley distances, Borda rules,
and gossip-based distributed Borda aggregation."""

from rankagg.aggregate import (
    Profile,
    PositionalScores,
    borda_aggregate,
    generalized_borda,
    kemeny_exact,
    local_search_aggregate,
)
from rankagg.distance import (
    AdjacentWeightFunction,
    GeneratorSet,
    Metric,
    Transformation,
    TranspositionWeightTable,
    cayley_distance,
    minimum_weight_transformation,
    weighted_cayley_distance,
    weighted_generator_distance,
    weighted_kendall_exact,
    weighted_kendall_monotone,
)
from rankagg.errors import (
    DegenerateGapError,
    OracleCapExceeded,
    RankAggError,
    UnreachableError,
    ValidationError,
)
from rankagg.perm import (
    AdjacentTransposition,
    DisagreementProfile,
    Permutation,
    compose,
    disagreement_profile,
    identity,
    inverse,
    is_between,
    kendall_tau,
    random_permutation,
)

__version__ = "0.1.0"
