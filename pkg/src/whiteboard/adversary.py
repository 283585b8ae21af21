"""Adversary strategies: single-run schedulers and the exhaustive sweep.

A scheduler resolves one run; the sweep universally quantifies over every
adaptive adversary by branching on each active node at every step, with
memoization of repeated states.
"""

from __future__ import annotations

import json
import random
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .engine import (
    BudgetConfig,
    BudgetError,
    DEFAULT_BUDGET,
    ExecutionState,
    Model,
    Protocol,
    RunContext,
    Whiteboard,
    apply_activation,
    apply_write,
    initial_state,
    make_context,
    output_to_json,
)
from .graph import LabeledGraph


class InvalidOrder(Exception):
    """Fixed-order schedule is not a valid permutation, or ran dry."""


@dataclass(frozen=True)
class Scheduler:
    """One adversary strategy: choose(active, board, step) -> node id.

    Choices must be pure functions of their arguments (plus the seed), so a
    run replays byte-identically.
    """

    name: str
    choose: Callable[[frozenset[int], Whiteboard, int], int]
    validate_for: Callable[[int], None] | None = None
    seed: int | None = None


def fixed_order(order: Sequence[int]) -> Scheduler:
    """Priority scheduler: the earliest listed id in the active set wins.

    With every node forced active at step 1 this reproduces the exact write
    order; in free models it serves as a priority list. The order must be a
    permutation of 1..n.
    """
    order = tuple(int(v) for v in order)
    if len(set(order)) != len(order) or any(v < 1 for v in order):
        raise InvalidOrder(f"order {order} has duplicates or non-positive ids")

    def choose(active: frozenset[int], board: Whiteboard, step: int) -> int:
        for v in order:
            if v in active:
                return v
        raise InvalidOrder(f"no active node appears in order {order}")

    def validate(n: int) -> None:
        if sorted(order) != list(range(1, n + 1)):
            raise InvalidOrder(f"order {order} is not a permutation of 1..{n}")

    return Scheduler(f"fixed:{','.join(map(str, order))}", choose, validate)


def min_id() -> Scheduler:
    return Scheduler("min-id", lambda active, board, step: min(active))


def max_id() -> Scheduler:
    return Scheduler("max-id", lambda active, board, step: max(active))


def seeded_random(seed: int) -> Scheduler:
    """Uniform choice via a Mersenne Twister reseeded per step, so the pick
    is a pure function of (seed, step, active set)."""

    def choose(active: frozenset[int], board: Whiteboard, step: int) -> int:
        rng = random.Random(seed * 1_000_003 + step)
        return rng.choice(sorted(active))

    return Scheduler(f"random:{seed}", choose, seed=seed)


def make_scheduler(spec: str) -> Scheduler:
    """Parse a scheduler spec: fixed:2,1,3 | min-id | max-id | random:SEED."""
    if spec == "min-id":
        return min_id()
    if spec == "max-id":
        return max_id()
    if spec.startswith("fixed:"):
        body = spec[len("fixed:"):]
        try:
            order = [int(tok) for tok in body.split(",") if tok]
        except ValueError:
            raise InvalidOrder(f"bad fixed order {body!r}") from None
        return fixed_order(order)
    if spec.startswith("random:"):
        try:
            seed = int(spec[len("random:"):])
        except ValueError:
            raise InvalidOrder(f"bad random seed in {spec!r}") from None
        return seeded_random(seed)
    raise InvalidOrder(f"unknown scheduler spec {spec!r}")


# ---------------------------------------------------------------------------
# Exhaustive sweep


@dataclass(frozen=True)
class SweepLimits:
    max_states: int = 10_000_000
    max_time: float = 60.0


DEFAULT_LIMITS = SweepLimits()


@dataclass(frozen=True)
class SweepFailure:
    schedule: tuple[int, ...]
    output: object
    reason: str


@dataclass(frozen=True)
class BudgetViolation:
    schedule: tuple[int, ...]
    node: int
    bits: int
    limit: int


@dataclass
class SweepReport:
    """Outcome of exploring the adversary's full decision tree.

    failures empty (with exhaustive True) certifies the protocol against
    every adversary on this instance. Witness schedules replay
    deterministically under a fixed-order scheduler.
    """

    schedules_explored: int = 0
    distinct_states: int = 0
    failures: list[SweepFailure] = field(default_factory=list)
    deadlocks: list[tuple[int, ...]] = field(default_factory=list)
    budget_violations: list[BudgetViolation] = field(default_factory=list)
    exhaustive: bool = True
    limit_reason: str | None = None

    def merge(self, other: "SweepReport") -> None:
        self.schedules_explored += other.schedules_explored
        self.distinct_states += other.distinct_states
        self.failures.extend(other.failures)
        self.deadlocks.extend(other.deadlocks)
        self.budget_violations.extend(other.budget_violations)
        self.exhaustive = self.exhaustive and other.exhaustive
        if self.limit_reason is None:
            self.limit_reason = other.limit_reason

    def to_json(self) -> dict:
        return {
            "schedules_explored": self.schedules_explored,
            "distinct_states": self.distinct_states,
            "exhaustive": self.exhaustive,
            "limit_reason": self.limit_reason,
            "failures": [
                {
                    "schedule": list(f.schedule),
                    "output": output_to_json(f.output),
                    "reason": f.reason,
                }
                for f in self.failures
            ],
            "deadlocks": [list(w) for w in self.deadlocks],
            "budget_violations": [
                {"schedule": list(b.schedule), "node": b.node, "bits": b.bits, "limit": b.limit}
                for b in self.budget_violations
            ],
        }


def _verdict_reason(verdict) -> str:
    reason = getattr(verdict, "reason", None)
    return reason if reason else "check failed"


class _Explorer:
    """Depth-first walk of one subtree, with its own memo table and report."""

    def __init__(self, ctx: RunContext, check, on_leaf, limits: SweepLimits, deadline: float,
                 memoize: bool):
        self.ctx = ctx
        self.check = check
        self.on_leaf = on_leaf
        self.limits = limits
        self.deadline = deadline
        self.memoize = memoize
        self.memo: set = set()
        self.expanded = 0
        self.report = SweepReport()
        self.stopped = False

    def _stop(self, reason: str) -> None:
        self.stopped = True
        self.report.exhaustive = False
        self.report.limit_reason = reason

    def explore(self, state: ExecutionState, schedule: tuple[int, ...]) -> None:
        if self.stopped:
            return
        ctx = self.ctx
        if len(state.board) == ctx.n:
            output = ctx.protocol.decide(state.board, ctx.n)
            self.report.schedules_explored += 1
            if self.on_leaf is not None:
                self.on_leaf(schedule, state, output)
            if self.check is not None:
                verdict = self.check(output)
                if not verdict:
                    self.report.failures.append(
                        SweepFailure(schedule, output, _verdict_reason(verdict))
                    )
            return
        try:
            state, _ = apply_activation(state, ctx)
        except BudgetError as e:
            self.report.schedules_explored += 1
            self.report.budget_violations.append(
                BudgetViolation(schedule, e.node, e.bits, e.limit)
            )
            return
        if self.memoize:
            key = state.memo_key()
            if key in self.memo:
                return
            self.memo.add(key)
        self.expanded += 1
        if self.expanded > self.limits.max_states:
            self._stop(f"max_states={self.limits.max_states} exceeded")
            return
        if time.monotonic() > self.deadline:
            self._stop(f"max_time={self.limits.max_time}s exceeded")
            return
        active = state.active_ids()
        if not active:
            self.report.schedules_explored += 1
            self.report.deadlocks.append(schedule)
            return
        for v in active:
            if self.stopped:
                return
            try:
                nxt, _ = apply_write(state, self.ctx, v)
            except BudgetError as e:
                self.report.schedules_explored += 1
                self.report.budget_violations.append(
                    BudgetViolation(schedule + (v,), e.node, e.bits, e.limit)
                )
                continue
            self.explore(nxt, schedule + (v,))

    def finish(self) -> SweepReport:
        self.report.distinct_states = len(self.memo) if self.memoize else self.expanded
        return self.report


def sweep(
    g: LabeledGraph,
    p: Protocol,
    model: Model | None = None,
    check: Callable[[object], object] | None = None,
    limits: SweepLimits = DEFAULT_LIMITS,
    budget: BudgetConfig = DEFAULT_BUDGET,
    memoize: bool = True,
    jobs: int = 1,
    check_timing: bool = False,
    on_leaf=None,
) -> SweepReport:
    """Explore every adversarial schedule for (g, p) and check each outcome.

    At each state the walk branches on every active node; states repeating
    the same (status, pending payloads, board) are explored once. check, if
    given, judges each completed output (falsy result or a verdict with a
    reason records a failure). Deadlocked and over-budget branches are
    recorded with their witness schedules. With jobs > 1 the top-level
    branches run on separate workers whose reports merge associatively
    (memo tables are per worker, so distinct_states becomes an upper bound).
    """
    ctx = make_context(g, p, model, budget, check_timing)
    deadline = time.monotonic() + limits.max_time
    root = initial_state(g.n)

    if jobs <= 1:
        worker = _Explorer(ctx, check, on_leaf, limits, deadline, memoize)
        worker.explore(root, ())
        return worker.finish()

    # Fan out over the first step's choices; each worker owns its subtree.
    try:
        first, _ = apply_activation(root, ctx)
    except BudgetError as e:
        report = SweepReport(schedules_explored=1)
        report.budget_violations.append(BudgetViolation((), e.node, e.bits, e.limit))
        return report
    active = first.active_ids()
    if not active:
        report = SweepReport(schedules_explored=1)
        report.deadlocks.append(())
        return report

    def explore_branch(v: int) -> SweepReport:
        worker = _Explorer(ctx, check, on_leaf, limits, deadline, memoize)
        try:
            nxt, _ = apply_write(first, ctx, v)
        except BudgetError as e:
            worker.report.schedules_explored += 1
            worker.report.budget_violations.append(BudgetViolation((v,), e.node, e.bits, e.limit))
            return worker.finish()
        worker.explore(nxt, (v,))
        return worker.finish()

    report = SweepReport()
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for branch_report in pool.map(explore_branch, active):
            report.merge(branch_report)
    # the shared root state counts once
    report.distinct_states += 1
    return report


def pad_order(witness: Sequence[int], n: int) -> list[int]:
    """Extend a witness prefix to a full permutation of 1..n for replay."""
    rest = [v for v in range(1, n + 1) if v not in set(witness)]
    return list(witness) + rest


def replay_schedule(
    g: LabeledGraph,
    p: Protocol,
    witness: Sequence[int],
    model: Model | None = None,
    budget: BudgetConfig = DEFAULT_BUDGET,
):
    """Re-run a witness schedule under fixed-order reconstruction.

    Returns ("ok", RunResult), ("deadlock", DeadlockError) or
    ("budget", BudgetError).
    """
    from .engine import DeadlockError, run

    sched = fixed_order(pad_order(witness, g.n))
    try:
        return "ok", run(g, p, model, sched, budget)
    except DeadlockError as e:
        return "deadlock", e
    except BudgetError as e:
        return "budget", e
