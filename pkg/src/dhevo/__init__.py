"""dhevo: co-evolution of MILP diving heuristics and benchmark instances.

The toolkit bundles a small exact MILP stack (bounded-variable simplex,
branch and bound, brute-force oracle), deterministic instance generators,
a root-node diving engine with a sandboxed scoring-rule language, a
multi-agent candidate generator over pluggable text providers, the
co-evolution loop with its averaged-fitness ablation arm, and the
associated metrics and reporting.
"""

__version__ = "0.1.0"

from .bnb import brute_force_opt, integrality_gap, solve_bnb
from .diving import DiveResult, Scorer, builtin_scorer, dive, program_scorer, simple_round
from .evolution import (
    Archive, DataCodePair, EvolveConfig, evaluate_fitness, run_baseline_ec,
    run_dhevo, select_topk_pairs,
)
from .features import FeatureVector, PseudocostState, extract_features
from .generators import GenSpec, gen_cauctions, gen_facilities, gen_indset, gen_setcover
from .metrics import (
    BoundEvent, diversity_index, primal_dual_gap, primal_dual_integral,
    primal_gap, summarize,
)
from .model import (
    Instance, LockCounts, LpSolution, MipSolution, check_feasible,
    compute_locks, validate_instance,
)
from .simplex import solve_lp

__all__ = [
    "Archive", "BoundEvent", "DataCodePair", "DiveResult", "EvolveConfig",
    "FeatureVector", "GenSpec", "Instance", "LockCounts", "LpSolution",
    "MipSolution", "PseudocostState", "Scorer", "brute_force_opt",
    "builtin_scorer", "check_feasible", "compute_locks", "dive",
    "diversity_index", "evaluate_fitness", "extract_features",
    "gen_cauctions", "gen_facilities", "gen_indset", "gen_setcover",
    "integrality_gap", "primal_dual_gap", "primal_dual_integral",
    "primal_gap", "program_scorer", "run_baseline_ec", "run_dhevo",
    "select_topk_pairs", "simple_round", "solve_bnb", "solve_lp",
    "summarize", "validate_instance",
]
