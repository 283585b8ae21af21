"""Simulator and verification suite for shared-whiteboard distributed
computing models (simasync, simsync, freeasync, freesync)."""

from .engine import (
    Boolean,
    BudgetConfig,
    BudgetError,
    Count,
    CountField,
    DeadlockError,
    Flag,
    FlagValue,
    IdField,
    InvalidLift,
    LocalView,
    Message,
    Model,
    MODEL_CHAIN,
    NotConnected,
    ParentMap,
    Protocol,
    RunResult,
    VertexSet,
    Whiteboard,
    encode_bits,
    lift,
    run,
)
from .graph import (
    GadgetSpec,
    LabeledGraph,
    Problem,
    ProblemInstance,
    bfs_layers,
    enumerate_graphs,
    generate,
    has_square,
    is_connected,
    is_two_cliques,
    mis_valid,
    read_graph,
    write_graph,
)
from .adversary import (
    Scheduler,
    SweepLimits,
    SweepReport,
    fixed_order,
    make_scheduler,
    max_id,
    min_id,
    seeded_random,
    sweep,
)
from .protocols import (
    REGISTRY,
    bfs_bipartite_freeasync,
    bfs_freesync,
    mis_simsync,
    num_edges_simasync,
    spanning_tree_freeasync,
    square_class_c_freeasync,
    two_cliques_simsync,
)
from .verify import AuditReport, Verdict, check_output, lemma1_audit

__all__ = [name for name in dir() if not name.startswith("_")]
