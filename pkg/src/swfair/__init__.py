"""Fair source-coding rate allocation in the Slepian-Wolf region.

The rate region of a lossless multiterminal compression problem is the base
polyhedron of the joint-entropy function.  This package computes fair points
of that region and the machinery around them:

* :mod:`swfair.setfn` - ground sets, entropy oracles (bit-pool coverage
  models and explicit tables), reductions, greedy vertices, validity checks;
* :mod:`swfair.sfm` - submodular function minimization (exhaustive and
  Fujishige-Wolfe minimum-norm-point) with lattice-extreme minimizers;
* :mod:`swfair.split` - the recursive egalitarian splitter with trace
  recording, principal-chain decomposition, and fork-join parallel mode;
* :mod:`swfair.fairness` - Shapley values, region membership verification,
  an independent conditional-gradient oracle, and comparison reports;
* :mod:`swfair.experiment` - randomized sweeps of the split-size metrics;
* :mod:`swfair.cli` - the ``swfair`` command-line front end.
"""

from .setfn import (
    BRUTE_FORCE_LIMIT,
    BitPoolSource,
    GroundSet,
    GroundSetTooLargeError,
    IncompleteTableError,
    InvalidReductionError,
    InvalidSubsetError,
    ModelLoadError,
    SetFunction,
    TableSource,
    WeightVector,
    add_modular,
    check_monotone,
    check_submodular,
    conditional_entropy,
    entropy,
    greedy_vertex,
    load_source,
    reduce,
    restrict,
    source_from_dict,
    source_to_dict,
)
from .sfm import (
    ConvergenceError,
    SfmResult,
    SolverConfig,
    min_norm_point,
    solve_sfm,
)
from .split import (
    Decomposition,
    InternalConsistencyError,
    RateVector,
    SplitNode,
    SplitTree,
    adaptation_path,
    decompose,
    recursion_metrics,
    split,
)
from .fairness import (
    FairnessReport,
    MembershipReport,
    build_report,
    egalitarian_oracle_fw,
    exchange_capacity,
    minmax_check,
    shapley_exact,
    shapley_permutation_average,
    shapley_sampled,
    verify_membership,
)
from .experiment import (
    ExperimentConfig,
    ExperimentRow,
    generate_instance,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "BRUTE_FORCE_LIMIT",
    "BitPoolSource",
    "ConvergenceError",
    "Decomposition",
    "ExperimentConfig",
    "ExperimentRow",
    "FairnessReport",
    "GroundSet",
    "GroundSetTooLargeError",
    "IncompleteTableError",
    "InternalConsistencyError",
    "InvalidReductionError",
    "InvalidSubsetError",
    "MembershipReport",
    "ModelLoadError",
    "RateVector",
    "SetFunction",
    "SfmResult",
    "SolverConfig",
    "SplitNode",
    "SplitTree",
    "TableSource",
    "WeightVector",
    "adaptation_path",
    "add_modular",
    "build_report",
    "check_monotone",
    "check_submodular",
    "conditional_entropy",
    "decompose",
    "egalitarian_oracle_fw",
    "entropy",
    "exchange_capacity",
    "generate_instance",
    "greedy_vertex",
    "load_source",
    "min_norm_point",
    "minmax_check",
    "recursion_metrics",
    "reduce",
    "restrict",
    "run_experiment",
    "shapley_exact",
    "shapley_permutation_average",
    "shapley_sampled",
    "solve_sfm",
    "source_from_dict",
    "source_to_dict",
    "split",
    "verify_membership",
]
