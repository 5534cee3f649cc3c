"""Fully dynamic maximal independent set maintenance with work-unit metering."""

from .arb import ArbConfig, ArbMIS, arb_reconstruct, arb_update, compute_T, run_arb
from .core import (
    CounterMismatch,
    IndependenceViolation,
    InternalInvariantError,
    MaximalityViolation,
    MisState,
    Valid,
    WorkMeter,
    add_to_mis,
    cascade_add,
    greedy_mis,
    naive_update,
    recompute_state,
    remove_from_mis,
    verify_mis,
)
from .det import DetConfig, DetMIS, build_good_mis, det_update, epoch_len, high_threshold, run_det
from .engine import NaiveMIS, RunResult, replay, run_naive
from .graph import DynamicGraph, degeneracy_estimate, new_graph
from .rand import (
    RandConfig,
    RandMIS,
    build_random_mis,
    estimate_high_degree_mis_probability,
    rand_update,
    random_permutation,
    run_rand,
)
from .stream import (
    Delete,
    Insert,
    UpdateEvent,
    UpdateStream,
    gen_bipartite_adversary,
    gen_bounded_arboricity_stream,
    gen_random_stream,
    parse_stream,
    serialize_stream,
)

__version__ = "0.1.0"
