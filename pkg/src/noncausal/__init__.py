"""Exact tools for processes without a fixed causal order.

Classical process tables, causal games and their bounds, fixed-point
decompositions, quantum process operators, and cyclic circuit evaluation.
Everything classical runs on rationals; the quantum side is numpy with an
explicit tolerance.
"""
from .exact import (
    BIT_OPS,
    D_CONST0,
    D_CONST1,
    D_ID,
    D_NOT,
    DeterministicOp,
    EnumerationCapExceeded,
    Matrix,
    PromiseViolationError,
    Rational,
    StochasticMatrix,
    StochasticVector,
    enumerate_deterministic_ops,
    rat,
)
from .process import (
    Behavior,
    ClassicalProcess,
    Classification,
    FileFormatError,
    InconsistentProcessError,
    LocalStrategy,
    PartySpec,
    check_total_probability,
    classify,
    induced_behavior,
    induced_distribution,
    infer_relations,
    is_logically_consistent,
    operation_trace,
    parse_behavior,
    parse_process,
    preset_behavior,
    preset_process,
    two_party_causal_membership,
)
from .fixedpoint import (
    DeterministicDecomposition,
    ProcessFunction,
    as_function,
    average_fixed_points,
    compose_with_ops,
    fixed_points,
    function_process,
    greedy_decomposition,
    is_deterministic_extremal,
    parse_decomposition,
    preset_decomposition,
    verify_unit_fixed_point_average,
)
from .games import (
    CausalStrategy,
    GameParty,
    GameResult,
    GameSpec,
    builtin_game,
    causal_bound,
    chain_process,
    evaluate_causal_strategy,
    parse_game,
    play,
    preset_strategies,
)
from .quantum import (
    Instrument,
    ProcessMatrix,
    QuantumParty,
    ValidationReport,
    commute_test,
    ocb_game_value,
    ocb_instruments,
    preset_matrix,
    probability,
    random_instrument,
    validate,
    w_channel,
    w_ocb,
    w_state,
    w_superposed_channel,
    w_two_channels,
)
from .circuits import (
    Circuit,
    EvaluationResult,
    Gate,
    OracleBox,
    SearchResult,
    baseline_search,
    builtin_netlist,
    evaluate,
    fig8_circuit,
    fixed_point_search,
    is_consistent,
    parse_netlist,
)

__all__ = [n for n in dir() if not n.startswith("_")]
