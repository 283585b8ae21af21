"""Oracle-backed output checking and the information-budget auditor.

check_output judges a protocol's output against the brute-force graph
oracles; the auditor compares the exact size of a graph family against the
total bit capacity of a finished whiteboard at a concrete n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .engine import (
    AdjacencyMatrix,
    Boolean,
    BudgetConfig,
    Count,
    DEFAULT_BUDGET,
    NotConnected,
    ParentMap,
    VertexSet,
)
from .graph import (
    CapExceeded,
    ENUMERATION_CAP,
    LabeledGraph,
    Problem,
    ProblemInstance,
    adjacency_matrix,
    all_pairs,
    bfs_layers,
    enumerate_graphs,
    has_square,
    is_connected,
    is_two_cliques,
    mis_valid,
)


class TagMismatch(Exception):
    """Output variant does not fit the problem."""


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


CORRECT = Verdict(True)


def incorrect(reason: str) -> Verdict:
    return Verdict(False, reason)


def _check_boolean(out, expected: bool) -> Verdict:
    if not isinstance(out, Boolean):
        raise TagMismatch(f"expected Boolean, got {type(out).__name__}")
    if out.value == expected:
        return CORRECT
    return incorrect(f"answered {out.value}, truth is {expected}")


def _check_spanning_tree(g: LabeledGraph, r: int, out) -> Verdict:
    if not isinstance(out, ParentMap):
        raise TagMismatch(f"expected ParentMap, got {type(out).__name__}")
    if not is_connected(g):
        return incorrect("graph is disconnected; no spanning tree exists")
    parents = out.parents_dict
    if set(parents) != set(g.vertices()) - {r}:
        return incorrect("parent entries do not cover exactly the non-root vertices")
    for child, parent in parents.items():
        if not g.has_edge(child, parent):
            return incorrect(f"tree edge {child}->{parent} is not a graph edge")
    verified: set[int] = {r}
    for v in g.vertices():
        path = []
        u = v
        while u not in verified:
            if u in path:
                return incorrect(f"cycle through {u}")
            path.append(u)
            u = parents[u]
        verified.update(path)
    return CORRECT


def _check_bfs(g: LabeledGraph, r: int, out) -> Verdict:
    if isinstance(out, NotConnected):
        if is_connected(g):
            return incorrect("answered not-connected on a connected graph")
        return CORRECT
    if not isinstance(out, ParentMap):
        raise TagMismatch(f"expected ParentMap or NotConnected, got {type(out).__name__}")
    if not is_connected(g):
        return incorrect("graph is disconnected; expected not-connected")
    layers = out.layers_dict
    if layers is None:
        return incorrect("missing layer map")
    truth = bfs_layers(g, r)
    if layers != truth:
        return incorrect(f"layer map {layers} differs from distances {truth}")
    parents = out.parents_dict
    if set(parents) != set(g.vertices()) - {r}:
        return incorrect("parent entries do not cover exactly the non-root vertices")
    for child, parent in parents.items():
        if not g.has_edge(child, parent):
            return incorrect(f"tree edge {child}->{parent} is not a graph edge")
        if truth[parent] != truth[child] - 1:
            return incorrect(f"parent {parent} of {child} is not one layer closer")
    return CORRECT


def check_output(instance: ProblemInstance, g: LabeledGraph, out) -> Verdict:
    """Judge an output value against the ground-truth oracles."""
    instance.validate(g.n)
    problem = instance.problem
    if problem is Problem.MIS:
        if not isinstance(out, VertexSet):
            raise TagMismatch(f"expected VertexSet, got {type(out).__name__}")
        if mis_valid(g, instance.x, out.ids):
            return CORRECT
        return incorrect(f"{sorted(out.ids)} is not a maximal independent set containing {instance.x}")
    if problem is Problem.TWO_CLIQUES:
        return _check_boolean(out, is_two_cliques(g))
    if problem is Problem.SQUARE:
        return _check_boolean(out, has_square(g))
    if problem is Problem.CONNECTIVITY:
        return _check_boolean(out, is_connected(g))
    if problem is Problem.SPANNING_TREE:
        return _check_spanning_tree(g, instance.r, out)
    if problem is Problem.BFS:
        return _check_bfs(g, instance.r, out)
    if problem is Problem.NUM_EDGES:
        if not isinstance(out, Count):
            raise TagMismatch(f"expected Count, got {type(out).__name__}")
        if out.value == g.num_edges():
            return CORRECT
        return incorrect(f"counted {out.value} edges, graph has {g.num_edges()}")
    if problem is Problem.BUILD:
        if not isinstance(out, AdjacencyMatrix):
            raise TagMismatch(f"expected AdjacencyMatrix, got {type(out).__name__}")
        if out.rows == adjacency_matrix(g):
            return CORRECT
        return incorrect("adjacency matrix differs from the graph")
    raise TagMismatch(f"unknown problem {problem!r}")


# ---------------------------------------------------------------------------
# Bit-budget audit


AUDIT_FAMILIES = ("all-graphs", "square-free", "class-c", "two-cliques-class")


@dataclass(frozen=True)
class AuditReport:
    """Exact family count vs. whiteboard capacity at one concrete n.

    family_size is always obtained by exhaustive enumeration, bits_needed is
    the exact ceil(log2(family_size)), and board_capacity charges every
    message its payload budget plus the author/creation-stamp header.
    """

    family: str
    n: int
    family_size: int
    bits_needed: int
    board_capacity: int
    feasible: bool

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "family_size": str(self.family_size),
            "bits_needed": self.bits_needed,
            "board_capacity": self.board_capacity,
            "feasible": self.feasible,
        }


def _bits_needed(count: int) -> int:
    if count < 1:
        raise ValueError("family is empty")
    return (count - 1).bit_length()


def lemma1_audit(
    family: str,
    n: int,
    budget: BudgetConfig = DEFAULT_BUDGET,
    cap: int = ENUMERATION_CAP,
) -> AuditReport:
    """Count a graph family exhaustively and compare against board capacity.

    For the pendant-extension family ("class-c") and the regular 2n-node
    family ("two-cliques-class") the parameter n is the core size; the
    report's n is the actual graph order 2n.
    """
    if family == "all-graphs":
        order = n
        count = sum(1 for _ in enumerate_graphs(n, cap=cap))
    elif family == "square-free":
        order = n
        count = sum(1 for _ in enumerate_graphs(n, lambda g: not has_square(g), cap=cap))
    elif family == "class-c":
        order = 2 * n
        square_free = sum(1 for _ in enumerate_graphs(n, lambda g: not has_square(g), cap=cap))
        placements = sum(1 for _ in all_pairs(n))
        count = square_free * placements
    elif family == "two-cliques-class":
        order = 2 * n
        if order > cap:
            raise CapExceeded(f"graph order {order} exceeds enumeration cap {cap}")
        degree = n - 1
        count = sum(
            1
            for _ in enumerate_graphs(
                order, lambda g: all(g.degree(v) == degree for v in g.vertices()), cap=cap
            )
        )
    else:
        raise ValueError(f"unknown family {family!r}; choose from {AUDIT_FAMILIES}")
    bits = _bits_needed(count)
    capacity = order * (budget.budget_bits(order) + budget.header_bits(order))
    return AuditReport(family, order, count, bits, capacity, bits <= capacity)


def audit_to_text(report: AuditReport) -> str:
    return json.dumps(report.to_json(), separators=(",", ":"))
