"""Execution engine for the four shared-whiteboard models.

A protocol is three deterministic behaviors (activation, compose, decide)
declared for one of four models. The models differ on two axes:

* simultaneous vs free: every node is forced active at step 1, or nodes
  decide activation from the board;
* asynchronous vs synchronous: a node composes its message at the step it
  becomes active, or at the step the adversary picks it to write.

Each step runs: activation phase (every awake node evaluates activation
against the same start-of-step board snapshot), deadlock check, adversary
choice of one active node, write. Exactly one message lands per step, so a
completed run has exactly n steps.
"""

from __future__ import annotations

import json
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

from .graph import LabeledGraph


class EngineError(Exception):
    """Engine-level contract violation."""


class ModelMismatch(EngineError):
    """Protocol executed under a model it does not target."""


class InvalidLift(EngineError):
    """Lift target is not the next model up the chain."""


class InvalidPayload(EngineError):
    """Payload field out of range for the graph size."""


class TimingViolation(EngineError):
    """A composed message disagrees with its replay on the recorded snapshot."""


class BudgetError(EngineError):
    """Payload exceeded the per-message bit budget."""

    def __init__(self, node: int, bits: int, limit: int, step: int):
        super().__init__(f"node {node} composed {bits} bits > budget {limit} at step {step}")
        self.node = node
        self.bits = bits
        self.limit = limit
        self.step = step


class DeadlockError(EngineError):
    """No active node while some node is still unwritten.

    A first-class outcome: protocols run outside their input class are
    expected to end here, and the partial trace is kept for inspection.
    """

    def __init__(self, trace: tuple["StepRecord", ...], state: "ExecutionState"):
        super().__init__(f"deadlock at step {state.step} after {len(state.board)} writes")
        self.trace = trace
        self.state = state


class Model(Enum):
    SIMASYNC = "simasync"
    SIMSYNC = "simsync"
    FREEASYNC = "freeasync"
    FREESYNC = "freesync"

    @property
    def simultaneous(self) -> bool:
        return self in (Model.SIMASYNC, Model.SIMSYNC)

    @property
    def composes_at_activation(self) -> bool:
        return self in (Model.SIMASYNC, Model.FREEASYNC)

    @classmethod
    def parse(cls, name: str) -> "Model":
        try:
            return cls(name.lower())
        except ValueError:
            raise ModelMismatch(f"unknown model {name!r}") from None


# Computing power is non-decreasing along this chain; lifts move one step right.
MODEL_CHAIN = (Model.SIMASYNC, Model.SIMSYNC, Model.FREEASYNC, Model.FREESYNC)


# ---------------------------------------------------------------------------
# Payloads and messages


class FlagValue(Enum):
    NO = "no"
    ZERO = "zero"
    ONE = "one"
    YES = "yes"
    EMPTY = "empty"
    ROOT = "root"
    UNREACHABLE = "unreachable"


@dataclass(frozen=True, slots=True)
class IdField:
    """Identifier in 0..n; 0 encodes "none"."""

    value: int


@dataclass(frozen=True, slots=True)
class CountField:
    """Non-negative count bounded by n."""

    value: int


@dataclass(frozen=True, slots=True)
class Flag:
    value: FlagValue


PayloadField = "IdField | CountField | Flag"
Payload = tuple  # tuple of payload fields

FLAG_BITS = 3  # room for 8 flag variants


def id_bits(n: int) -> int:
    """ceil(log2(n+1)): bits for one identifier or count in 0..n."""
    return n.bit_length()


def encode_bits(payload: Payload, n: int) -> int:
    """Total payload cost in bits; id and count fields cost ceil(log2(n+1)),
    flags cost 3. The (author, created_at) header is exempt."""
    bits = 0
    for f in payload:
        if isinstance(f, (IdField, CountField)):
            if not 0 <= f.value <= n:
                raise InvalidPayload(f"field value {f.value} out of range 0..{n}")
            bits += id_bits(n)
        elif isinstance(f, Flag):
            bits += FLAG_BITS
        else:
            raise InvalidPayload(f"unknown payload field {f!r}")
    return bits


@dataclass(frozen=True)
class BudgetConfig:
    """Per-message payload budget B(n) = c_msg * ceil(log2(n+1)) bits."""

    c_msg: int = 8

    def budget_bits(self, n: int) -> int:
        return self.c_msg * id_bits(n)

    def header_bits(self, n: int) -> int:
        # author + created_at, one id-sized value each
        return 2 * id_bits(n)


DEFAULT_BUDGET = BudgetConfig()


@dataclass(frozen=True, slots=True)
class Message:
    """One whiteboard entry: author id, board length at composition time
    (the message's creation stamp), and the budgeted payload."""

    author: int
    created_at: int
    payload: Payload


@dataclass(frozen=True, slots=True)
class Whiteboard:
    """Append-only ordered list of messages. Values are immutable; append
    and prefix return fresh boards."""

    messages: tuple[Message, ...] = ()

    def __len__(self) -> int:
        return len(self.messages)

    def __iter__(self):
        return iter(self.messages)

    def __getitem__(self, idx: int) -> Message:
        return self.messages[idx]

    def append(self, m: Message) -> "Whiteboard":
        return Whiteboard(self.messages + (m,))

    def prefix(self, k: int) -> "Whiteboard":
        return Whiteboard(self.messages[:k])

    def authors(self) -> frozenset[int]:
        return frozenset(m.author for m in self.messages)

    def by_author(self, v: int) -> Message | None:
        for m in self.messages:
            if m.author == v:
                return m
        return None


EMPTY_BOARD = Whiteboard()


@dataclass(frozen=True, slots=True)
class LocalView:
    """Everything a node is allowed to know about the graph: its own id,
    its neighbors' ids, and the total node count."""

    self_id: int
    neighbor_ids: frozenset[int]
    n: int

    @property
    def degree(self) -> int:
        return len(self.neighbor_ids)


# ---------------------------------------------------------------------------
# Outputs


@dataclass(frozen=True)
class Boolean:
    value: bool


@dataclass(frozen=True)
class VertexSet:
    ids: frozenset[int]


@dataclass(frozen=True)
class Count:
    value: int


@dataclass(frozen=True)
class NotConnected:
    pass


@dataclass(frozen=True)
class ParentMap:
    """Tree edges as sorted (child, parent) pairs; layers optional."""

    parents: tuple[tuple[int, int], ...]
    layers: tuple[tuple[int, int], ...] | None = None

    @staticmethod
    def from_dicts(parents: dict[int, int], layers: dict[int, int] | None = None) -> "ParentMap":
        layer_items = tuple(sorted(layers.items())) if layers is not None else None
        return ParentMap(tuple(sorted(parents.items())), layer_items)

    @property
    def parents_dict(self) -> dict[int, int]:
        return dict(self.parents)

    @property
    def layers_dict(self) -> dict[int, int] | None:
        return dict(self.layers) if self.layers is not None else None


@dataclass(frozen=True)
class AdjacencyMatrix:
    rows: tuple[tuple[int, ...], ...]


Output = "Boolean | VertexSet | Count | NotConnected | ParentMap | AdjacencyMatrix"


def output_to_json(out) -> dict:
    """Stable JSON form of an output value."""
    if isinstance(out, Boolean):
        return {"type": "boolean", "value": out.value}
    if isinstance(out, VertexSet):
        return {"type": "vertex-set", "ids": sorted(out.ids)}
    if isinstance(out, Count):
        return {"type": "count", "value": out.value}
    if isinstance(out, NotConnected):
        return {"type": "not-connected"}
    if isinstance(out, ParentMap):
        doc = {"type": "parent-map", "parents": {str(c): p for c, p in out.parents}}
        if out.layers is not None:
            doc["layers"] = {str(v): layer for v, layer in out.layers}
        return doc
    if isinstance(out, AdjacencyMatrix):
        return {"type": "adjacency-matrix", "rows": [list(r) for r in out.rows]}
    raise TypeError(f"not an output value: {out!r}")


# ---------------------------------------------------------------------------
# Protocols


@dataclass(frozen=True)
class Protocol:
    """Deterministic triple of behaviors targeting one model.

    activation and compose see only a LocalView and the board; decide sees
    only the final board and n, so all nodes compute the same output by
    construction. compose_on_activation_board makes the engine hand compose
    the board snapshot recorded at activation instead of the current board
    (only meaningful in synchronous models; set by the freeasync->freesync
    lift).
    """

    name: str
    target_model: Model
    activation: Callable[[LocalView, Whiteboard], bool]
    compose: Callable[[LocalView, Whiteboard], Payload]
    decide: Callable[[Whiteboard, int], object]
    compose_on_activation_board: bool = False


def always_active(view: LocalView, board: Whiteboard) -> bool:
    return True


def lift(p: Protocol, target: Model) -> Protocol:
    """Adapt a protocol to the next model up the chain, same decide.

    simasync->simsync: compose ignores the board (replays on an empty one).
    simsync->freeasync: node i activates exactly when the board holds i-1
    messages, forcing the fixed write order 1..n.
    freeasync->freesync: compose is deferred to choice time but replayed on
    the activation-time snapshot, which the engine records.
    """
    try:
        src = MODEL_CHAIN.index(p.target_model)
        dst = MODEL_CHAIN.index(target)
    except ValueError:
        raise InvalidLift(f"unknown model {target!r}") from None
    if dst != src + 1:
        raise InvalidLift(f"cannot lift {p.target_model.value} to {target.value}")
    name = f"{p.name}^{target.value}"
    if p.target_model is Model.SIMASYNC:
        base_compose = p.compose

        def compose_blind(view: LocalView, board: Whiteboard) -> Payload:
            return base_compose(view, EMPTY_BOARD)

        return Protocol(name, target, always_active, compose_blind, p.decide)
    if p.target_model is Model.SIMSYNC:

        def activate_in_id_order(view: LocalView, board: Whiteboard) -> bool:
            return len(board) == view.self_id - 1

        return Protocol(name, target, activate_in_id_order, p.compose, p.decide)
    return Protocol(
        name, target, p.activation, p.compose, p.decide, compose_on_activation_board=True
    )


# ---------------------------------------------------------------------------
# Execution state and step semantics


class NodeStatus:
    AWAKE = 0
    ACTIVE = 1
    TERMINATED = 2


@dataclass(frozen=True, slots=True)
class ExecutionState:
    """Whole-system state between steps. A value: cloneable, hashable via
    memo_key, safe to share across sweep workers."""

    step: int
    status: tuple[int, ...]
    pending: tuple[Message | None, ...]
    activation_len: tuple[int, ...]  # board length when the node activated; -1 before
    board: Whiteboard

    def active_ids(self) -> tuple[int, ...]:
        return tuple(i + 1 for i, s in enumerate(self.status) if s == NodeStatus.ACTIVE)

    def awake_ids(self) -> tuple[int, ...]:
        return tuple(i + 1 for i, s in enumerate(self.status) if s == NodeStatus.AWAKE)

    def terminated_count(self) -> int:
        return sum(1 for s in self.status if s == NodeStatus.TERMINATED)

    def memo_key(self):
        pend = tuple(m.payload if m is not None else None for m in self.pending)
        return (self.status, pend, self.board.messages)


@dataclass(frozen=True)
class RunContext:
    """Immutable per-run bundle: views, protocol, model, budget."""

    views: tuple[LocalView, ...]
    protocol: Protocol
    model: Model
    budget: BudgetConfig
    n: int
    check_timing: bool = False

    def view(self, v: int) -> LocalView:
        return self.views[v - 1]


def make_context(
    g: LabeledGraph,
    p: Protocol,
    model: Model | None = None,
    budget: BudgetConfig = DEFAULT_BUDGET,
    check_timing: bool = False,
) -> RunContext:
    if model is None:
        model = p.target_model
    if model is not p.target_model:
        raise ModelMismatch(
            f"protocol {p.name} targets {p.target_model.value}, ran under {model.value}"
        )
    views = tuple(LocalView(v, g.neighbors(v), g.n) for v in g.vertices())
    return RunContext(views, p, model, budget, g.n, check_timing)


def initial_state(n: int) -> ExecutionState:
    return ExecutionState(
        step=1,
        status=(NodeStatus.AWAKE,) * n,
        pending=(None,) * n,
        activation_len=(-1,) * n,
        board=EMPTY_BOARD,
    )


def _composed(ctx: RunContext, v: int, board: Whiteboard, step: int) -> Message:
    payload = ctx.protocol.compose(ctx.view(v), board)
    bits = encode_bits(payload, ctx.n)
    limit = ctx.budget.budget_bits(ctx.n)
    if bits > limit:
        raise BudgetError(v, bits, limit, step)
    return Message(v, len(board), payload)


def apply_activation(state: ExecutionState, ctx: RunContext) -> tuple[ExecutionState, tuple[int, ...]]:
    """Run the activation phase of the current step.

    Every awake node evaluates activation against the same start-of-step
    board; in simultaneous models the phase is overridden at step 1 to
    activate everyone. In asynchronous models each newly active node also
    composes now, against that same snapshot.
    """
    board = state.board
    if ctx.model.simultaneous:
        newly = state.awake_ids() if state.step == 1 else ()
    else:
        newly = tuple(
            v for v in state.awake_ids() if ctx.protocol.activation(ctx.view(v), board)
        )
    if not newly:
        return state, ()
    status = list(state.status)
    act_len = list(state.activation_len)
    pending = list(state.pending)
    for v in newly:
        status[v - 1] = NodeStatus.ACTIVE
        act_len[v - 1] = len(board)
        if ctx.model.composes_at_activation:
            pending[v - 1] = _composed(ctx, v, board, state.step)
    return (
        ExecutionState(state.step, tuple(status), tuple(pending), tuple(act_len), board),
        newly,
    )


def apply_write(state: ExecutionState, ctx: RunContext, v: int) -> tuple[ExecutionState, Message]:
    """Terminate active node v: compose (synchronous models) or take its
    pending message (asynchronous models), append it, advance the step."""
    if state.status[v - 1] != NodeStatus.ACTIVE:
        raise EngineError(f"scheduler chose node {v} which is not active")
    board = state.board
    if ctx.model.composes_at_activation:
        msg = state.pending[v - 1]
        assert msg is not None
        if ctx.check_timing:
            replay = ctx.protocol.compose(ctx.view(v), board.prefix(msg.created_at))
            if replay != msg.payload:
                raise TimingViolation(
                    f"node {v}: pending payload differs from replay on its creation prefix"
                )
    else:
        compose_board = board
        if ctx.protocol.compose_on_activation_board:
            compose_board = board.prefix(state.activation_len[v - 1])
        msg = _composed(ctx, v, compose_board, state.step)
        # synchronous timing law: creation stamp equals write position
        msg = Message(v, len(board), msg.payload)
    status = list(state.status)
    pending = list(state.pending)
    status[v - 1] = NodeStatus.TERMINATED
    pending[v - 1] = None
    return (
        ExecutionState(
            state.step + 1,
            tuple(status),
            tuple(pending),
            state.activation_len,
            board.append(msg),
        ),
        msg,
    )


# ---------------------------------------------------------------------------
# Runs and traces


@dataclass(frozen=True)
class StepRecord:
    step: int
    newly_active: tuple[int, ...]
    chosen: int
    message: Message
    board_len: int

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "newly_active": sorted(self.newly_active),
            "chosen": self.chosen,
            "message": {
                "author": self.message.author,
                "created_at": self.message.created_at,
                "payload": payload_to_json(self.message.payload),
            },
            "board_len": self.board_len,
        }


def payload_to_json(payload: Payload) -> list:
    enc = []
    for f in payload:
        if isinstance(f, IdField):
            enc.append({"id": f.value})
        elif isinstance(f, CountField):
            enc.append({"count": f.value})
        elif isinstance(f, Flag):
            enc.append({"flag": f.value.value})
        else:
            raise InvalidPayload(f"unknown payload field {f!r}")
    return enc


@dataclass(frozen=True)
class RunStats:
    steps: int
    max_payload_bits: int


@dataclass(frozen=True)
class RunResult:
    trace: tuple[StepRecord, ...]
    board: Whiteboard
    output: object
    stats: RunStats

    def trace_lines(self) -> list[str]:
        """One JSON line per step plus a final output record; byte-stable."""
        lines = [json.dumps(r.to_json(), separators=(",", ":")) for r in self.trace]
        final = {
            "output": output_to_json(self.output),
            "stats": {"steps": self.stats.steps, "max_payload_bits": self.stats.max_payload_bits},
        }
        lines.append(json.dumps(final, separators=(",", ":")))
        return lines


def run(
    g: LabeledGraph,
    p: Protocol,
    model: Model | None = None,
    scheduler=None,
    budget: BudgetConfig = DEFAULT_BUDGET,
    check_timing: bool = False,
) -> RunResult:
    """Execute one complete run under a single adversary strategy.

    Raises DeadlockError if some step has no active node while nodes remain
    unwritten, and BudgetError if any composed payload exceeds the budget.
    """
    if scheduler is None:
        raise EngineError("run needs a scheduler")
    ctx = make_context(g, p, model, budget, check_timing)
    validate = getattr(scheduler, "validate_for", None)
    if validate is not None:
        validate(g.n)
    state = initial_state(g.n)
    records: list[StepRecord] = []
    while len(state.board) < ctx.n:
        state, newly = apply_activation(state, ctx)
        active = state.active_ids()
        if not active:
            raise DeadlockError(tuple(records), state)
        v = scheduler.choose(frozenset(active), state.board, state.step)
        step = state.step
        state, msg = apply_write(state, ctx, v)
        records.append(StepRecord(step, newly, v, msg, len(state.board)))
    output = p.decide(state.board, ctx.n)
    max_bits = max((encode_bits(m.payload, ctx.n) for m in state.board), default=0)
    return RunResult(tuple(records), state.board, output, RunStats(len(records), max_bits))
