"""Exact equilibrium solving for two-player complete-information game trees.

The library computes, for every subtree, the exact set of payoff vectors
attainable by some subgame perfect equilibrium (including stochastic
ones), selects the best equilibrium at the root under several optimality
criteria, and extracts a strategy achieving it. All arithmetic is exact.
"""

from .gametree import (
    EquilibriumCheck,
    GameTree,
    GtreeParseError,
    Internal,
    Leaf,
    MissingStrategyError,
    PayoffVector,
    Strategy,
    binarize,
    check_strategy,
    evaluate,
    is_equilibrium,
    parse_game_tree,
    parse_strategy,
    pure_strategy,
    serialize_game_tree,
    serialize_strategy,
    validate,
)
from .ups import (
    EmptySetError,
    GridMismatchError,
    PayoffGrid,
    Ups,
    build_grid,
    contains,
    empty_ups,
    equal_ups,
    is_empty,
    is_single_point,
    merge,
    merge_deterministic,
    merge_ldet,
    merge_random,
    min_point,
    min_value_for_player,
    saturate,
    serialize_ups,
    singleton_ups,
    transpose,
    union,
    ups_from_flags,
)
from .solver import (
    CRITERIA,
    AlgebraInconsistencyError,
    SetMap,
    SolveResult,
    SolveStats,
    TargetNotInUpsError,
    any_nash,
    best_deterministic_nash,
    best_nash,
    compute_det_ups_all,
    compute_ups_all,
    criterion_value,
    extract_strategy,
    select_optimal,
)
from .oracle import (
    OracleReport,
    brute_contains,
    brute_merge,
    cross_validate,
    enumerate_pure_spe,
    find_mixing_required_tree,
    random_tree,
    sample_ups_points,
)
from .ohoh import (
    Card,
    Deal,
    OhohConfig,
    build_tree,
    card_token,
    deal,
    legal_cards,
    parse_card,
    parse_deal,
    score,
    serialize_deal,
    trick_winner,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    HandRecord,
    report_to_json,
    run_experiment,
    solve_hand,
)

__version__ = "0.1.0"
