"""Nash-equilibrium verification for PageRank network-formation games."""

from .graph import (
    Graph,
    GraphError,
    check_swap_automorphism,
    components_after_removal,
    generate,
    k_parameter,
    parse_graph,
    read_graph,
    serialize_graph,
)
from .oracle import BudgetExceeded, EnumerationBudget, brute_force_best_response, brute_force_verify
from .pagerank import (
    GameConfig,
    NumericalError,
    pagerank_from_potentials,
    potentials_column,
    stationary_pagerank,
    strategy_view,
    subset_potentials,
    tree_potentials_column,
)
from .parametric import LinearFractionalProgram, fractional_max, layer_walk_max, subset_coefficients
from .verifiers import (
    BestResponseResult,
    NashReport,
    ScopeError,
    Strategy,
    alpha_insensitive_check,
    best_response_add_delete,
    best_response_deletion_general,
    best_response_deletion_tree,
    best_response_dynamics,
    best_response_request_delete_tree,
    local_pagerank_coefficients,
    symmetric_addition_gain,
    verify_nash,
)

__version__ = "0.1.0"
