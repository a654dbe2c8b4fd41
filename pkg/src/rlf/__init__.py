"""Random local functions: instance generators, distinguishers, and a
search-to-decision reduction, with Monte Carlo harnesses for verifying the
pieces at desk scale."""

__version__ = "0.1.0"

from .errors import InfeasibleParameterError, OracleExhaustedError
from .predicate import (
    MAX_ARITY,
    NoisyPredicate,
    Predicate,
    PredicateProfile,
    builtin,
    builtin_names,
)
from .hypergraph import (
    DeviationTrace,
    Hypergraph,
    SwapVector,
    deviation_step,
    inverse_transform_det,
    mixing_time,
    permute,
    sample_distinct,
    sample_uniform,
    transform,
    transform_det,
    transform_distinct,
)
from .localfn import (
    Instance,
    Secret,
    SecretOracle,
    evaluate,
    evaluate_noisy,
    fairly_balanced_weights,
    is_fairly_balanced,
    permuted_secret,
    sample_null,
    sample_planted,
    sample_secret_with_weight,
    verify,
)
from .distinguish import (
    AdvantageReport,
    Distinguisher,
    coin_distinguisher,
    constant_distinguisher,
    estimate_advantage,
    good_weight_scan,
    likelihood_ratio_distinguisher,
    negate,
    parity_collision_distinguisher,
    repeated_edge_distinguisher,
)
from .reduction import (
    EqTable,
    HybridParams,
    NoisySearchOutcome,
    ReductionConfig,
    SearchOutcome,
    check_large_sparsity,
    estimate_eq,
    estimate_equal_branch,
    hybrid_sample,
    predictor,
    predictor_gap_table,
    recover_relative_bits,
    resolve_params,
    search,
    search_noisy,
)
from .stats import (
    FiniteDistribution,
    hoeffding_repetitions,
    kl_bernoulli,
    pinsker_tv_bound,
    tv_empirical,
    tv_empirical_to_exact,
    tv_exact,
)
