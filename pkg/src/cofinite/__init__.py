"""Exact computations with cofinite graphs, their quotients and completions."""

from ._accel import backend
from .invsys import (
    CensusReport,
    ChainSystem,
    Completion,
    Thread,
    boundary_census,
    closed_entourage,
    complete,
    extend_map,
    limit_truncation,
    system_from_base,
    validate_system,
)
from .presented import WindowGraph, integer_line, phi1_system, phi2_system, quotient_maps_check
from .relations import (
    Carrier,
    ContractViolation,
    NotCommuting,
    Partition,
    Relation,
    SetMap,
    Verdict,
    commuting_product,
    compose,
    equivalence_closure,
    image,
    inverse,
    is_equivalence,
    kernel,
    meet,
    pullback,
    pushforward,
)
from .topograph import (
    CompatiblePartition,
    FinGraph,
    GraphMap,
    choose_orientation,
    compatible_refinement,
    graph_map_validate,
    is_compatible,
    quotient_graph,
    validate_graph,
)
from .uniformity import (
    CofinitePresentation,
    closure,
    hausdorff_quotient_check,
    initial_base,
    is_separating,
    normalize_base,
    quotient_topology_agreement,
    uniform_quotient,
    uniform_sum,
)

__version__ = "0.1.0"
