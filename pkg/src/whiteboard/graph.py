"""Labeled graphs, exact problem oracles, and gadget-family generators.

Graphs are simple and undirected with vertex identifiers 1..n. The oracle
functions here are deliberately brute force: they are the ground truth that
protocol runs get judged against, so clarity beats speed.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass
from enum import Enum


class GraphError(Exception):
    """Malformed graph or invalid argument."""


class NotInInputClass(GraphError):
    """Input violates a problem's declared input class."""


class InvalidSpec(GraphError):
    """Gadget specification violates its constraints."""


class CapExceeded(GraphError):
    """Enumeration request beyond the configured size cap."""


class GraphFormatError(GraphError):
    """Unparseable graph file."""


GRAPH_FILE_HEADER = "# whiteboard-graph v1"

# 2^21 graphs at n=7 still enumerates in minutes; anything larger needs an
# explicit cap override.
ENUMERATION_CAP = 7


class LabeledGraph:
    """Simple undirected graph on identifiers 1..n.

    Immutable after construction; equality and hashing go by (n, edge set).
    """

    __slots__ = ("n", "_adj", "_edges")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 1:
            raise GraphError(f"node count must be positive, got {n}")
        adj: list[set[int]] = [set() for _ in range(n + 1)]
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphError(f"edge ({u}, {v}) out of range 1..{n}")
            if u == v:
                raise GraphError(f"self-loop at {u}")
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self._adj: tuple[frozenset[int], ...] = tuple(frozenset(s) for s in adj)
        self._edges: tuple[tuple[int, int], ...] = tuple(
            (u, v) for u in range(1, n + 1) for v in sorted(self._adj[u]) if u < v
        )

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as (u, v) pairs with u < v, ascending lexicographic."""
        return self._edges

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def neighbors(self, v: int) -> frozenset[int]:
        if not 1 <= v <= self.n:
            raise GraphError(f"vertex {v} out of range 1..{self.n}")
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbors(u)

    def num_edges(self) -> int:
        return len(self._edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return self.n == other.n and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self.n, self._edges))

    def __repr__(self) -> str:
        return f"LabeledGraph(n={self.n}, edges={list(self._edges)})"


def path_graph(n: int) -> LabeledGraph:
    return LabeledGraph(n, [(i, i + 1) for i in range(1, n)])


def cycle_graph(n: int) -> LabeledGraph:
    if n < 3:
        raise InvalidSpec(f"cycle needs at least 3 nodes, got {n}")
    return LabeledGraph(n, [(i, i + 1) for i in range(1, n)] + [(1, n)])


def complete_graph(n: int) -> LabeledGraph:
    return LabeledGraph(n, itertools.combinations(range(1, n + 1), 2))


def two_cliques_graph(half: int) -> LabeledGraph:
    """Disjoint union of two complete graphs on {1..half} and {half+1..2*half}."""
    if half < 1:
        raise InvalidSpec(f"clique size must be positive, got {half}")
    edges = list(itertools.combinations(range(1, half + 1), 2))
    edges += list(itertools.combinations(range(half + 1, 2 * half + 1), 2))
    return LabeledGraph(2 * half, edges)


def adjacency_matrix(g: LabeledGraph) -> tuple[tuple[int, ...], ...]:
    """0/1 matrix with rows/columns indexed by identifier - 1."""
    return tuple(
        tuple(1 if g.has_edge(u, v) else 0 for v in g.vertices()) for u in g.vertices()
    )


# ---------------------------------------------------------------------------
# Problem instances


class Problem(Enum):
    MIS = "mis"
    TWO_CLIQUES = "two-cliques"
    SQUARE = "square"
    SPANNING_TREE = "spanning-tree"
    BFS = "bfs"
    CONNECTIVITY = "connectivity"
    NUM_EDGES = "num-edges"
    BUILD = "build"


@dataclass(frozen=True)
class ProblemInstance:
    """A problem plus its distinguished identifiers (x for MIS, r for trees)."""

    problem: Problem
    x: int | None = None
    r: int | None = None

    def validate(self, n: int) -> None:
        if self.problem is Problem.MIS:
            if self.x is None or not 1 <= self.x <= n:
                raise GraphError(f"MIS needs x in 1..{n}, got {self.x}")
        if self.problem in (Problem.SPANNING_TREE, Problem.BFS):
            if self.r is None or not 1 <= self.r <= n:
                raise GraphError(f"{self.problem.value} needs root in 1..{n}, got {self.r}")


# ---------------------------------------------------------------------------
# Oracles


def has_square(g: LabeledGraph) -> bool:
    """True iff g contains a 4-cycle a-b-c-d-a (induced or not).

    Brute force over vertex 4-sets; each set admits three cyclic pairings.
    """
    for quad in itertools.combinations(g.vertices(), 4):
        a, b, c, d = quad
        for w, x, y, z in ((a, b, c, d), (a, b, d, c), (a, c, b, d)):
            if (
                g.has_edge(w, x)
                and g.has_edge(x, y)
                and g.has_edge(y, z)
                and g.has_edge(z, w)
            ):
                return True
    return False


def bfs_layers(g: LabeledGraph, r: int) -> dict[int, int | None]:
    """Graph distance from r for every vertex; None marks unreachable."""
    if not 1 <= r <= g.n:
        raise GraphError(f"root {r} out of range 1..{g.n}")
    layers: dict[int, int | None] = {v: None for v in g.vertices()}
    layers[r] = 0
    frontier = [r]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for u in frontier:
            for v in g.neighbors(u):
                if layers[v] is None:
                    layers[v] = depth
                    nxt.append(v)
        frontier = nxt
    return layers


def is_connected(g: LabeledGraph) -> bool:
    return all(layer is not None for layer in bfs_layers(g, 1).values())


def _components(g: LabeledGraph) -> list[frozenset[int]]:
    seen: set[int] = set()
    comps = []
    for v in g.vertices():
        if v in seen:
            continue
        comp = {u for u, layer in bfs_layers(g, v).items() if layer is not None}
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def is_two_cliques(g: LabeledGraph) -> bool:
    """True iff g is the disjoint union of two complete graphs on half the nodes.

    Requires the input class of the 2-cliques problem: 2m nodes, (m-1)-regular.
    Evaluated both directly and through the connectivity equivalence (for
    graphs in the class the two coincide); a disagreement would be a bug.
    """
    if g.n % 2 != 0:
        raise NotInInputClass(f"order {g.n} is odd; need 2m nodes")
    half = g.n // 2
    if any(g.degree(v) != half - 1 for v in g.vertices()):
        raise NotInInputClass(f"graph is not {half - 1}-regular")
    comps = _components(g)
    direct = len(comps) == 2 and all(
        len(c) == half and all(g.has_edge(u, v) for u, v in itertools.combinations(sorted(c), 2))
        for c in comps
    )
    via_connectivity = not is_connected(g)
    if direct != via_connectivity:
        raise AssertionError("two-cliques check and connectivity equivalence disagree")
    return direct


def mis_valid(g: LabeledGraph, x: int, s: Iterable[int]) -> bool:
    """True iff s is an inclusion-maximal independent set of g containing x."""
    if not 1 <= x <= g.n:
        raise GraphError(f"x {x} out of range 1..{g.n}")
    members = set(s)
    if not members <= set(g.vertices()):
        return False
    if x not in members:
        return False
    for u, v in itertools.combinations(sorted(members), 2):
        if g.has_edge(u, v):
            return False
    for v in g.vertices():
        if v not in members and not (g.neighbors(v) & members):
            return False
    return True


def greedy_mis(g: LabeledGraph, x: int) -> frozenset[int]:
    """Canonical maximal independent set containing x: x first, then ascending ids."""
    if not 1 <= x <= g.n:
        raise GraphError(f"x {x} out of range 1..{g.n}")
    members = {x}
    for v in g.vertices():
        if v not in members and not (g.neighbors(v) & members):
            members.add(v)
    return frozenset(members)


# ---------------------------------------------------------------------------
# Gadget generators


@dataclass(frozen=True)
class GadgetSpec:
    """Recipe for one of the generator families.

    kind is one of "mis-gadget", "class-c", "bfs-gadget", "two-cliques",
    "cycle", "path". The first three extend a base graph; the rest only take
    a size.
    """

    kind: str
    base: LabeledGraph | None = None
    i: int | None = None
    j: int | None = None
    n: int | None = None


def mis_gadget(h: LabeledGraph, i: int, j: int) -> LabeledGraph:
    """Add a vertex x = n+1 adjacent to every base vertex except v_i and v_j."""
    if not (1 <= i < j <= h.n):
        raise InvalidSpec(f"need 1 <= i < j <= {h.n}, got ({i}, {j})")
    n = h.n
    edges = list(h.edges)
    edges += [(k, n + 1) for k in range(1, n + 1) if k not in (i, j)]
    return LabeledGraph(n + 1, edges)


def class_c(h: LabeledGraph, i: int, j: int) -> LabeledGraph:
    """Pendant-extend a square-free base: v_k gets a pendant v_{n+k}, plus one
    extra edge {v_{n+i}, v_{n+j}}. The result contains a square iff v_i ~ v_j
    in the base."""
    if not (1 <= i < j <= h.n):
        raise InvalidSpec(f"need 1 <= i < j <= {h.n}, got ({i}, {j})")
    if has_square(h):
        raise InvalidSpec("base graph must be square-free")
    n = h.n
    edges = list(h.edges)
    edges += [(k, n + k) for k in range(1, n + 1)]
    edges.append((n + i, n + j))
    return LabeledGraph(2 * n, edges)


def bfs_gadget(h: LabeledGraph, i: int) -> LabeledGraph:
    """Attach a root/relay layer to the base: 4n-1 nodes total.

    Identifiers: v_1..v_n keep 1..n, r = n+1, a_k = n+1+k, then b_j and c_j
    for j != i in ascending j. Edges: base edges, r-a_k for all k, a_i-v_i,
    and b_j-v_j, c_j-a_j, c_j-b_j for all j != i.
    """
    if not 1 <= i <= h.n:
        raise InvalidSpec(f"need 1 <= i <= {h.n}, got {i}")
    n = h.n
    r = n + 1
    a = {k: n + 1 + k for k in range(1, n + 1)}
    others = [j for j in range(1, n + 1) if j != i]
    b = {j: 2 * n + 1 + rank for rank, j in enumerate(others, start=1)}
    c = {j: 3 * n + rank for rank, j in enumerate(others, start=1)}
    edges = list(h.edges)
    edges += [(r, a[k]) for k in range(1, n + 1)]
    edges.append((i, a[i]))
    for j in others:
        edges += [(j, b[j]), (a[j], c[j]), (b[j], c[j])]
    return LabeledGraph(4 * n - 1, edges)


def generate(spec: GadgetSpec) -> LabeledGraph:
    """Build the graph a GadgetSpec describes. Deterministic."""
    kind = spec.kind
    if kind in ("mis-gadget", "class-c", "bfs-gadget"):
        if spec.base is None:
            raise InvalidSpec(f"{kind} needs a base graph")
        if kind == "mis-gadget":
            if spec.i is None or spec.j is None:
                raise InvalidSpec("mis-gadget needs i and j")
            return mis_gadget(spec.base, spec.i, spec.j)
        if kind == "class-c":
            if spec.i is None or spec.j is None:
                raise InvalidSpec("class-c needs i and j")
            return class_c(spec.base, spec.i, spec.j)
        if spec.i is None:
            raise InvalidSpec("bfs-gadget needs i")
        return bfs_gadget(spec.base, spec.i)
    if spec.n is None:
        raise InvalidSpec(f"{kind} needs n")
    if kind == "two-cliques":
        return two_cliques_graph(spec.n)
    if kind == "cycle":
        return cycle_graph(spec.n)
    if kind == "path":
        return path_graph(spec.n)
    raise InvalidSpec(f"unknown gadget kind {kind!r}")


# ---------------------------------------------------------------------------
# Enumeration


def all_pairs(n: int) -> list[tuple[int, int]]:
    """Vertex pairs in the lexicographic order the enumeration bitmask uses."""
    return list(itertools.combinations(range(1, n + 1), 2))


def enumerate_graphs(
    n: int,
    filt: Callable[[LabeledGraph], bool] | None = None,
    cap: int = ENUMERATION_CAP,
) -> Iterator[LabeledGraph]:
    """Yield every labeled graph on 1..n, ascending by edge-set bitmask.

    Bit k of the mask switches the k-th pair of all_pairs(n). 2^(n(n-1)/2)
    graphs in total, so n is capped (default 7).
    """
    if n > cap:
        raise CapExceeded(f"n={n} exceeds enumeration cap {cap}")
    if n < 1:
        raise GraphError(f"node count must be positive, got {n}")
    pairs = all_pairs(n)
    for mask in range(1 << len(pairs)):
        edges = [pairs[k] for k in range(len(pairs)) if mask >> k & 1]
        g = LabeledGraph(n, edges)
        if filt is None or filt(g):
            yield g


# ---------------------------------------------------------------------------
# File format


def graph_to_text(g: LabeledGraph) -> str:
    lines = [GRAPH_FILE_HEADER, f"n={g.n}"]
    lines += [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> LabeledGraph:
    n: int | None = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("n="):
            if n is not None:
                raise GraphFormatError(f"line {lineno}: duplicate n= line")
            try:
                n = int(line[2:])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: bad node count {line!r}") from None
            continue
        if n is None:
            raise GraphFormatError(f"line {lineno}: edge before n= line")
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: non-integer edge {line!r}") from None
        edges.append((min(u, v), max(u, v)))
    if n is None:
        raise GraphFormatError("missing n= line")
    try:
        return LabeledGraph(n, edges)
    except GraphError as e:
        raise GraphFormatError(str(e)) from None


def write_graph(g: LabeledGraph, path: str) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(graph_to_text(g))


def read_graph(path: str) -> LabeledGraph:
    with open(path, "r", encoding="ascii") as fh:
        return graph_from_text(fh.read())
