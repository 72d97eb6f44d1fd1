"""Near-optimal energy system alternatives: generation, evaluation, ranking.

The package couples modelling-to-generate-alternatives on a multi-carrier
cost-minimisation LP with multi-attribute value theory: attribute-steered
MGA groups diversify the near-optimal space, every alternative is evaluated
on an attribute hierarchy, and elicited stakeholder preferences rank the
whole set. ``nearopt.pipeline`` ties the stages together; ``nearopt.cli``
and ``nearopt.api`` expose them as a command line and an HTTP service.
"""

from .attributes import (
    AttributeCatalog,
    AttributeProfile,
    AttributeRange,
    evaluate,
    impact_ranges,
    load_catalog,
    shannon_index,
)
from .esm import (
    CostBreakdown,
    SystemModel,
    Technology,
    TimeSlice,
    compile_model,
    decompose,
    load_system,
)
from .lp import Constraint, LinearProgram, LpSolution, Variable, add_constraint, solve
from .mavt import (
    Ranking,
    StakeholderPreferences,
    ValueFunction,
    aggregate,
    classify_technologies,
    cluster_stakeholders,
    fit_savf,
    occurrence_frequency,
    rank,
    sensitivity,
    swing_weights,
)
from .mga import (
    Alternative,
    MgaConfig,
    MgaGroup,
    WeightVector,
    benchmark_groups,
    build_weight_vectors,
    construct_groups,
    generate_all,
    mga_solve,
    prepare_base,
)
from .pipeline import RunInputs, RunManifest, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "AttributeCatalog",
    "AttributeProfile",
    "AttributeRange",
    "Alternative",
    "Constraint",
    "CostBreakdown",
    "LinearProgram",
    "LpSolution",
    "MgaConfig",
    "MgaGroup",
    "Ranking",
    "RunInputs",
    "RunManifest",
    "StakeholderPreferences",
    "SystemModel",
    "Technology",
    "TimeSlice",
    "ValueFunction",
    "Variable",
    "WeightVector",
    "add_constraint",
    "aggregate",
    "benchmark_groups",
    "build_weight_vectors",
    "classify_technologies",
    "cluster_stakeholders",
    "compile_model",
    "construct_groups",
    "decompose",
    "evaluate",
    "fit_savf",
    "generate_all",
    "impact_ranges",
    "load_catalog",
    "load_system",
    "mga_solve",
    "occurrence_frequency",
    "prepare_base",
    "rank",
    "run_pipeline",
    "sensitivity",
    "shannon_index",
    "solve",
    "swing_weights",
]
