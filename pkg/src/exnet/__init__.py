"""Fixed-price budget-constrained exchange networks on bipartite graphs."""

from .model import (
    Component,
    ExchangeGraph,
    GraphFormatError,
    Quantity,
    components,
    format_quantity,
    format_ratio,
    graph_from_dict,
    graph_to_dict,
    is_balanced,
    is_complete_bipartite,
    load_graph,
    make_graph,
    parse_quantity,
    save_graph,
)
from .session import (
    EnumerationLimitError,
    EnumerationSummary,
    SessionError,
    SessionOutcome,
    TradeState,
    brute_force_enumerate,
    enumerate_sessions,
    find_infeasible_witness,
    run_relaxed_session,
    run_session,
    sample_sessions,
    trade,
)
from .analysis import (
    Allocation,
    ModelViolationError,
    SuccessReport,
    allocation_is_stalled,
    allocation_satisfies,
    check_success,
    feasibility,
    feasibility_by_lp,
    max_unmet_demand,
    star_instance,
)
from .solver import FlowNetwork, LinearProgram, LPResult, max_flow, solve_lp
from .experiments import (
    BoxplotStats,
    ExperimentConfig,
    ExperimentRow,
    backbone_graph,
    boxplot_stats,
    emit_results,
    run_experiment,
)

__version__ = "0.1.0"
