"""Key-leakage-storage-cost bounds for hidden identifier sources.

Finite-alphabet evaluation of inner and outer bounds on the secret-key /
privacy-leakage / storage / action-cost trade-off for authentication
systems whose measurement channel is steered by a cost-constrained action
(PUFs, biometrics). Includes channel-ordering checks for the converse's
preconditions, a grid sweep reproducing the binary example's cost-vs-key
frontiers, and a Monte Carlo validator for the exact computations.
"""

__version__ = "0.1.0"

from .bounds import (LeakageTerms, RatePoint, cardinality_limits, cs_inner,
                     cs_outer, gs_inner, gs_outer, leakage_terms)
from .channels import (CondChannel, CostFunction, bsc, cascade,
                       default_action_costs, solve_star, star)
from .errors import (ConfigError, DomainError, KlscError, ModelError,
                     ValidationError)
from .montecarlo import SampleBatch, empirical_joint, plugin_cmi, sample_joint
from .ordering import (ClnWitness, DegradednessCertificate, check_degraded,
                       cln_falsify, witness_gap)
from .probability import (FiniteDist, JointTensor, VarGroup, conditional_mi,
                          entropy, marginalize)
from .sweep import (FrontierPoint, FrontierSummary, GainReport, GridAxis,
                    SweepGrid, compute_frontiers, evaluate_binary_point,
                    frontier, frontier_summary, gain_report, sweep,
                    upper_envelope)
from .system import (BinaryExampleConfig, SystemFactors, build_binary_example,
                     build_joint, expected_cost)

__all__ = [
    "__version__",
    "BinaryExampleConfig", "ClnWitness", "CondChannel", "ConfigError",
    "CostFunction", "DegradednessCertificate", "DomainError", "FiniteDist",
    "FrontierPoint", "FrontierSummary", "GainReport", "GridAxis",
    "JointTensor", "KlscError", "LeakageTerms", "ModelError", "RatePoint",
    "SampleBatch", "SweepGrid", "SystemFactors", "ValidationError",
    "VarGroup", "bsc", "build_binary_example", "build_joint",
    "cardinality_limits", "cascade", "check_degraded", "cln_falsify",
    "compute_frontiers", "conditional_mi", "cs_inner", "cs_outer",
    "default_action_costs", "empirical_joint", "entropy",
    "evaluate_binary_point", "expected_cost", "frontier", "frontier_summary",
    "gain_report", "gs_inner", "gs_outer", "leakage_terms", "marginalize",
    "plugin_cmi", "sample_joint", "solve_star", "star", "sweep",
    "upper_envelope", "witness_gap",
]
