"""The protocol suite: one constructor per problem, each targeting the
weakest model in which it is correct under every adversary.

Protocols only ever see a LocalView and the whiteboard. Message payloads
stick to the id/count/flag field vocabulary so bit accounting stays honest.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import (
    Boolean,
    Count,
    CountField,
    Flag,
    FlagValue,
    IdField,
    LocalView,
    Message,
    Model,
    NotConnected,
    ParentMap,
    Payload,
    Protocol,
    VertexSet,
    Whiteboard,
    always_active,
)
from .graph import Problem


class ProtocolError(Exception):
    """A decide function met a board its protocol could not have produced."""


class OddDegreeSum(ProtocolError):
    """Degree sum of a simple graph must be even."""


class MalformedInstance(ProtocolError):
    """Board inconsistent with the protocol's declared input class."""


# ---------------------------------------------------------------------------
# num-edges: trivial exemplar, every node writes its degree


def num_edges_simasync() -> Protocol:
    """Each node writes its degree on the empty board; the edge count is
    half the degree sum."""

    def compose(view: LocalView, board: Whiteboard) -> Payload:
        return (CountField(view.degree),)

    def decide(board: Whiteboard, n: int):
        total = sum(m.payload[0].value for m in board)
        if total % 2 != 0:
            raise OddDegreeSum(f"degree sum {total} is odd")
        return Count(total // 2)

    return Protocol("num-edges", Model.SIMASYNC, always_active, compose, decide)


# ---------------------------------------------------------------------------
# mis: greedy maximal independent set anchored at x


def _is_membership(m: Message) -> bool:
    return len(m.payload) == 1 and isinstance(m.payload[0], IdField)


def mis_simsync(x: int) -> Protocol:
    """Greedy protocol: a node claims membership by writing its own id
    unless it neighbors x or a previously claimed node; otherwise it writes
    a refusal flag. The written ids form a maximal independent set
    containing x under every write order."""

    def compose(view: LocalView, board: Whiteboard) -> Payload:
        if view.self_id == x:
            return (IdField(view.self_id),)
        if x in view.neighbor_ids:
            return (Flag(FlagValue.NO),)
        claimed = {m.author for m in board if _is_membership(m)}
        if claimed & view.neighbor_ids:
            return (Flag(FlagValue.NO),)
        return (IdField(view.self_id),)

    def decide(board: Whiteboard, n: int):
        return VertexSet(frozenset(m.author for m in board if _is_membership(m)))

    return Protocol(f"mis(x={x})", Model.SIMSYNC, always_active, compose, decide)


# ---------------------------------------------------------------------------
# two-cliques: label propagation with a balanced-split decision


def two_cliques_simsync() -> Protocol:
    """Nodes label themselves zero or one by copying their already-written
    neighbors, the first writer taking zero and the first writer with no
    written neighbor taking one; conflicting neighbors force a refusal.

    Deciding "no refusal anywhere" alone is unsound: on a cycle scheduled in
    ring order every node happily copies zero. The decision therefore also
    requires an exact half/half label split, which only two disjoint cliques
    can produce.
    """

    def compose(view: LocalView, board: Whiteboard) -> Payload:
        if len(board) == 0:
            return (Flag(FlagValue.ZERO),)
        written_labels = {
            m.payload[0].value for m in board if m.author in view.neighbor_ids
        }
        if not written_labels:
            return (Flag(FlagValue.ONE),)
        if written_labels == {FlagValue.ZERO}:
            return (Flag(FlagValue.ZERO),)
        if written_labels == {FlagValue.ONE}:
            return (Flag(FlagValue.ONE),)
        return (Flag(FlagValue.NO),)

    def decide(board: Whiteboard, n: int):
        labels = [m.payload[0].value for m in board]
        if any(v is FlagValue.NO for v in labels):
            return Boolean(False)
        zeros = sum(1 for v in labels if v is FlagValue.ZERO)
        ones = sum(1 for v in labels if v is FlagValue.ONE)
        return Boolean(zeros == ones == n // 2)

    return Protocol("two-cliques", Model.SIMSYNC, always_active, compose, decide)


# ---------------------------------------------------------------------------
# square-c: square detection on pendant-extended graphs


def _high_neighbor_lists(board: Whiteboard, half: int) -> dict[int, frozenset[int]]:
    lists = {}
    for m in board:
        if m.author > half and len(m.payload) == 2 and isinstance(m.payload[0], IdField):
            lists[m.author] = frozenset(f.value for f in m.payload if f.value != 0)
    return lists


def _special_pair(lists: dict[int, frozenset[int]]) -> tuple[int, int]:
    """The unique mutually adjacent pair among the pendant-layer nodes."""
    mutual = [
        (a, b)
        for a in sorted(lists)
        for b in sorted(lists[a])
        if a < b and b in lists and a in lists[b]
    ]
    if len(mutual) != 1:
        raise MalformedInstance(f"expected exactly one pendant-layer edge, found {len(mutual)}")
    return mutual[0]


def square_class_c_freeasync() -> Protocol:
    """Square detection for 2n-node graphs built as: an n-node square-free
    core on ids 1..n, a pendant v_{n+k} on each core node, and exactly one
    extra edge inside the pendant layer.

    Pendant-layer nodes (id > n) write their full neighborhoods first; once
    all n are on the board, every core node can locate the two feet u, w of
    the pendant-layer edge, and u and w alone report whether they are
    adjacent. A square exists iff they are.
    """

    def activation(view: LocalView, board: Whiteboard) -> bool:
        half = view.n // 2
        if view.self_id > half:
            return len(board) == 0
        return len(board) == half

    def compose(view: LocalView, board: Whiteboard) -> Payload:
        half = view.n // 2
        if view.self_id > half:
            ids = sorted(view.neighbor_ids)
            ids += [0] * (2 - len(ids))
            return (IdField(ids[0]), IdField(ids[1]))
        lists = _high_neighbor_lists(board, half)
        hi_a, hi_b = _special_pair(lists)
        u = min(lists[hi_a] - {hi_b})
        w = min(lists[hi_b] - {hi_a})
        if view.self_id not in (u, w):
            return (Flag(FlagValue.EMPTY),)
        other = w if view.self_id == u else u
        verdict = FlagValue.YES if other in view.neighbor_ids else FlagValue.NO
        return (Flag(verdict),)

    def decide(board: Whiteboard, n: int):
        _special_pair(_high_neighbor_lists(board, n // 2))
        for m in board:
            if len(m.payload) == 1 and isinstance(m.payload[0], Flag):
                if m.payload[0].value is FlagValue.YES:
                    return Boolean(True)
        return Boolean(False)

    return Protocol("square-c", Model.FREEASYNC, activation, compose, decide)


# ---------------------------------------------------------------------------
# spanning-tree: greedy attachment in the free asynchronous model


def spanning_tree_freeasync(r: int) -> Protocol:
    """The root writes first; every other node activates as soon as some
    neighbor is on the board and adopts its minimum-id written neighbor as
    parent. Disconnected inputs deadlock once the root's component is
    exhausted."""

    def activation(view: LocalView, board: Whiteboard) -> bool:
        if view.self_id == r:
            return len(board) == 0
        return any(m.author in view.neighbor_ids for m in board)

    def compose(view: LocalView, board: Whiteboard) -> Payload:
        if view.self_id == r:
            return (Flag(FlagValue.ROOT),)
        parent = min(m.author for m in board if m.author in view.neighbor_ids)
        return (IdField(parent),)

    def decide(board: Whiteboard, n: int):
        parents = {
            m.author: m.payload[0].value for m in board if isinstance(m.payload[0], IdField)
        }
        return ParentMap.from_dicts(parents)

    return Protocol(f"spanning-tree(r={r})", Model.FREEASYNC, activation, compose, decide)


# ---------------------------------------------------------------------------
# bfs: layered construction driven by phase accounting


@dataclass(frozen=True)
class BfsFields:
    """Payload of one layered message: the writer's layer, its parent (0 for
    the root), its count a of neighbors one layer closer, b of all other
    neighbors, and c of same-layer neighbors already written."""

    layer: int
    parent: int
    a: int
    b: int
    c: int

    def to_payload(self) -> Payload:
        return (
            CountField(self.layer),
            IdField(self.parent),
            CountField(self.a),
            CountField(self.b),
            CountField(self.c),
        )


def parse_bfs_message(m: Message) -> BfsFields | None:
    """Layered fields of a message, or None for an unreachable flag."""
    if len(m.payload) == 1 and isinstance(m.payload[0], Flag):
        return None
    layer, parent, a, b, c = m.payload
    return BfsFields(layer.value, parent.value, a.value, b.value, c.value)


@dataclass(frozen=True)
class PhaseView:
    """What the board reveals about layer progress.

    e[i] is the number of edges between layers i and i+1, valid for every
    complete phase; a phase i+1 is complete once the layer-(i+1) messages'
    a-counts sum to e[i]. frontier_exhausted means the last complete phase
    has no forward edges while nodes remain unwritten.
    """

    authors_by_layer: dict[int, frozenset[int]]
    e: tuple[int, ...]
    complete_through: int  # highest complete phase, -1 before the root writes
    frontier_exhausted: bool

    def layer_authors(self, i: int) -> frozenset[int]:
        return self.authors_by_layer.get(i, frozenset())


def phase_view(board: Whiteboard, n: int) -> PhaseView:
    """Reconstruct phase progress from the written messages alone."""
    by_layer: dict[int, list[BfsFields]] = {}
    authors: dict[int, set[int]] = {}
    written = 0
    for m in board:
        fields = parse_bfs_message(m)
        written += 1
        if fields is None:
            continue
        by_layer.setdefault(fields.layer, []).append(fields)
        authors.setdefault(fields.layer, set()).add(m.author)
    if 0 not in by_layer:
        return PhaseView({}, (), -1, False)
    e = [by_layer[0][0].b]
    while e[-1] > 0:
        i = len(e)
        msgs = by_layer.get(i, [])
        if sum(f.a for f in msgs) != e[-1]:
            break
        e.append(sum(f.b - 2 * f.c for f in msgs))
    frontier_exhausted = e[-1] == 0 and written < n
    return PhaseView(
        {i: frozenset(s) for i, s in authors.items()},
        tuple(e),
        len(e) - 1,
        frontier_exhausted,
    )


def _bfs_protocol(r: int, model: Model, count_same_layer: bool, name: str) -> Protocol:
    def my_layer(view: LocalView, pv: PhaseView) -> int | None:
        """Least complete phase with a written neighbor, plus one."""
        for i in range(pv.complete_through + 1):
            if pv.layer_authors(i) & view.neighbor_ids:
                return i + 1
        return None

    def activation(view: LocalView, board: Whiteboard) -> bool:
        if view.self_id == r:
            return len(board) == 0
        pv = phase_view(board, view.n)
        if pv.complete_through < 0:
            return False
        if my_layer(view, pv) is not None:
            return True
        return pv.frontier_exhausted

    def compose(view: LocalView, board: Whiteboard) -> Payload:
        if view.self_id == r:
            return BfsFields(0, 0, 0, view.degree, 0).to_payload()
        pv = phase_view(board, view.n)
        layer = my_layer(view, pv)
        if layer is None:
            return (Flag(FlagValue.UNREACHABLE),)
        below = pv.layer_authors(layer - 1) & view.neighbor_ids
        a = len(below)
        b = view.degree - a
        c = len(pv.layer_authors(layer) & view.neighbor_ids) if count_same_layer else 0
        return BfsFields(layer, min(below), a, b, c).to_payload()

    def decide(board: Whiteboard, n: int):
        parents: dict[int, int] = {}
        layers: dict[int, int] = {}
        unreachable = False
        for m in board:
            fields = parse_bfs_message(m)
            if fields is None:
                unreachable = True
                continue
            layers[m.author] = fields.layer
            if fields.layer > 0:
                parents[m.author] = fields.parent
        if unreachable:
            return NotConnected()
        return ParentMap.from_dicts(parents, layers)

    return Protocol(name, model, activation, compose, decide)


def bfs_freesync(r: int) -> Protocol:
    """Layer-by-layer tree construction. The board alone reveals when a
    layer finishes (its a-counts exhaust the previous frontier), at which
    point the next layer activates; composing at choice time lets each node
    count the same-layer neighbors already written, which the accounting
    needs on non-bipartite graphs. When the frontier empties early the
    remaining nodes flag themselves unreachable, so disconnected inputs
    terminate with a not-connected verdict instead of deadlocking."""
    return _bfs_protocol(r, Model.FREESYNC, True, f"bfs(r={r})")


def bfs_bipartite_freeasync(r: int) -> Protocol:
    """Same construction with the same-layer count pinned to zero, which is
    exact on bipartite graphs; composing at activation then suffices."""
    return _bfs_protocol(r, Model.FREEASYNC, False, f"bfs-bipartite(r={r})")


# ---------------------------------------------------------------------------
# Registry for the CLI and the test harness


@dataclass(frozen=True)
class ProtocolSpec:
    name: str
    model: Model
    problem: Problem
    param: str | None  # "x" | "root" | None
    build: object

    def instantiate(self, x: int | None = None, root: int | None = None) -> Protocol:
        if self.param == "x":
            if x is None:
                raise ValueError(f"protocol {self.name} needs --x")
            return self.build(x)
        if self.param == "root":
            if root is None:
                raise ValueError(f"protocol {self.name} needs --root")
            return self.build(root)
        return self.build()


REGISTRY: dict[str, ProtocolSpec] = {
    spec.name: spec
    for spec in (
        ProtocolSpec("mis", Model.SIMSYNC, Problem.MIS, "x", mis_simsync),
        ProtocolSpec("two-cliques", Model.SIMSYNC, Problem.TWO_CLIQUES, None, two_cliques_simsync),
        ProtocolSpec("square-c", Model.FREEASYNC, Problem.SQUARE, None, square_class_c_freeasync),
        ProtocolSpec(
            "spanning-tree", Model.FREEASYNC, Problem.SPANNING_TREE, "root",
            spanning_tree_freeasync,
        ),
        ProtocolSpec("bfs", Model.FREESYNC, Problem.BFS, "root", bfs_freesync),
        ProtocolSpec("bfs-bipartite", Model.FREEASYNC, Problem.BFS, "root", bfs_bipartite_freeasync),
        ProtocolSpec("num-edges", Model.SIMASYNC, Problem.NUM_EDGES, None, num_edges_simasync),
    )
}
