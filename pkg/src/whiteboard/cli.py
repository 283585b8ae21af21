"""Command-line front end.

Subcommands: gen (gadget graphs), run (one schedule), sweep (all schedules),
audit (bit budgets), oracle (ground truth). Exit codes: 0 success or
property holds, 1 property violated or not certified, 2 deadlock, 3 usage
or I/O error. Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import adversary, engine, graph, protocols, verify
from .engine import DeadlockError, EngineError, Model, MODEL_CHAIN, output_to_json
from .graph import GraphError, Problem, ProblemInstance

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_DEADLOCK = 2
EXIT_USAGE = 3


class CliError(Exception):
    """Maps to exit code 3."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; we reserve that for deadlock
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_graph(path: str) -> graph.LabeledGraph:
    try:
        return graph.read_graph(path)
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}") from None
    except GraphError as e:
        raise CliError(f"{path}: {e}") from None


def _build_protocol(args) -> tuple[engine.Protocol, ProblemInstance]:
    spec = protocols.REGISTRY.get(args.protocol)
    if spec is None:
        raise CliError(f"unknown protocol {args.protocol!r}; choose from "
                       f"{', '.join(sorted(protocols.REGISTRY))}")
    try:
        proto = spec.instantiate(x=getattr(args, "x", None), root=getattr(args, "root", None))
    except ValueError as e:
        raise CliError(str(e)) from None
    instance = ProblemInstance(spec.problem, x=getattr(args, "x", None),
                               r=getattr(args, "root", None))
    return proto, instance


def _lift_to(proto: engine.Protocol, model: Model) -> engine.Protocol:
    src = MODEL_CHAIN.index(proto.target_model)
    dst = MODEL_CHAIN.index(model)
    if dst < src:
        raise CliError(
            f"protocol {proto.name} targets {proto.target_model.value}; "
            f"cannot run under the weaker model {model.value}"
        )
    for step in range(src, dst):
        proto = engine.lift(proto, MODEL_CHAIN[step + 1])
    return proto


def _format_output(out) -> str:
    if isinstance(out, engine.Boolean):
        return "true" if out.value else "false"
    if isinstance(out, engine.Count):
        return str(out.value)
    if isinstance(out, engine.VertexSet):
        return "{" + ", ".join(str(v) for v in sorted(out.ids)) + "}"
    if isinstance(out, engine.NotConnected):
        return "not-connected"
    return json.dumps(output_to_json(out), separators=(",", ":"))


def _cmd_gen(args) -> int:
    base = _load_graph(args.base) if args.base else None
    spec = graph.GadgetSpec(kind=args.kind, base=base, i=args.i, j=args.j, n=args.n)
    g = graph.generate(spec)
    try:
        graph.write_graph(g, args.out)
    except OSError as e:
        raise CliError(f"cannot write {args.out}: {e}") from None
    print(f"wrote {args.out}: n={g.n}, {g.num_edges()} edges", file=sys.stderr)
    return EXIT_OK


def _cmd_run(args) -> int:
    g = _load_graph(args.graph)
    proto, instance = _build_protocol(args)
    model = Model.parse(args.model)
    proto = _lift_to(proto, model)
    sched = adversary.make_scheduler(args.scheduler)
    budget = engine.BudgetConfig(c_msg=args.budget)
    try:
        result = engine.run(g, proto, model, sched, budget)
    except DeadlockError as e:
        print(f"deadlock after {len(e.trace)} writes", file=sys.stderr)
        if args.trace:
            lines = [json.dumps(r.to_json(), separators=(",", ":")) for r in e.trace]
            lines.append(json.dumps({"deadlock": True, "writes": len(e.trace)},
                                    separators=(",", ":")))
            _write_lines(args.trace, lines)
        return EXIT_DEADLOCK
    if args.trace:
        _write_lines(args.trace, result.trace_lines())
    print(_format_output(result.output))
    try:
        instance.validate(g.n)
        verdict = verify.check_output(instance, g, result.output)
    except (GraphError, verify.TagMismatch) as e:
        print(f"cannot check output: {e}", file=sys.stderr)
        return EXIT_USAGE
    if not verdict:
        print(f"output incorrect: {verdict.reason}", file=sys.stderr)
        return EXIT_VIOLATED
    return EXIT_OK


def _write_lines(path: str, lines: list[str]) -> None:
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as e:
        raise CliError(f"cannot write {path}: {e}") from None


def _cmd_sweep(args) -> int:
    g = _load_graph(args.graph)
    proto, instance = _build_protocol(args)
    model = Model.parse(args.model)
    proto = _lift_to(proto, model)
    budget = engine.BudgetConfig(c_msg=args.budget)
    try:
        instance.validate(g.n)
    except GraphError as e:
        raise CliError(str(e)) from None

    def check(out):
        return verify.check_output(instance, g, out)

    limits = adversary.SweepLimits(max_states=args.max_states, max_time=args.max_time)
    report = adversary.sweep(
        g, proto, model, check, limits=limits, budget=budget,
        memoize=not args.no_memo, jobs=args.jobs,
    )
    if args.report:
        _write_lines(args.report, [json.dumps(report.to_json(), separators=(",", ":"))])
    print(
        f"schedules={report.schedules_explored} states={report.distinct_states} "
        f"failures={len(report.failures)} deadlocks={len(report.deadlocks)} "
        f"budget_violations={len(report.budget_violations)} "
        f"exhaustive={str(report.exhaustive).lower()}"
    )
    if report.failures or report.budget_violations:
        return EXIT_VIOLATED
    if report.deadlocks:
        return EXIT_DEADLOCK
    if not report.exhaustive:
        print(f"sweep not exhaustive: {report.limit_reason}", file=sys.stderr)
        return EXIT_VIOLATED
    return EXIT_OK


def _cmd_audit(args) -> int:
    budget = engine.BudgetConfig(c_msg=args.budget)
    try:
        report = verify.lemma1_audit(args.family, args.n, budget)
    except (GraphError, ValueError) as e:
        raise CliError(str(e)) from None
    print(verify.audit_to_text(report))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    g = _load_graph(args.graph)
    problem = Problem(args.problem)
    instance = ProblemInstance(problem, x=args.x, r=args.root)
    try:
        instance.validate(g.n)
    except GraphError as e:
        raise CliError(str(e)) from None
    if problem is Problem.SQUARE:
        print("true" if graph.has_square(g) else "false")
    elif problem is Problem.CONNECTIVITY:
        print("true" if graph.is_connected(g) else "false")
    elif problem is Problem.TWO_CLIQUES:
        try:
            print("true" if graph.is_two_cliques(g) else "false")
        except graph.NotInInputClass as e:
            raise CliError(str(e)) from None
    elif problem is Problem.NUM_EDGES:
        print(g.num_edges())
    elif problem is Problem.MIS:
        members = graph.greedy_mis(g, instance.x)
        print("{" + ", ".join(str(v) for v in sorted(members)) + "}")
    elif problem is Problem.BFS:
        layers = graph.bfs_layers(g, instance.r)
        print(json.dumps({str(v): layers[v] for v in sorted(layers)}, separators=(",", ":")))
    elif problem is Problem.SPANNING_TREE:
        if not graph.is_connected(g):
            print("not-connected")
        else:
            layers = graph.bfs_layers(g, instance.r)
            parents = {
                v: min(u for u in g.neighbors(v) if layers[u] == layers[v] - 1)
                for v in g.vertices()
                if v != instance.r
            }
            print(json.dumps({str(v): parents[v] for v in sorted(parents)},
                             separators=(",", ":")))
    elif problem is Problem.BUILD:
        print(json.dumps([list(row) for row in graph.adjacency_matrix(g)],
                         separators=(",", ":")))
    else:
        raise CliError(f"no oracle for problem {args.problem!r}")
    return EXIT_OK


def _add_protocol_flags(sub) -> None:
    sub.add_argument("--protocol", required=True, choices=sorted(protocols.REGISTRY))
    sub.add_argument("--x", type=int, default=None, help="anchor vertex for mis")
    sub.add_argument("--root", type=int, default=None, help="root for tree protocols")
    sub.add_argument("--model", required=True,
                     choices=[m.value for m in MODEL_CHAIN],
                     help="execution model; protocols lift upward automatically")
    sub.add_argument("--budget", type=int, default=engine.DEFAULT_BUDGET.c_msg,
                     help="payload budget multiplier c_msg (default 8)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="whiteboard",
                     description="simulate and verify shared-whiteboard protocols")
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a gadget graph file")
    gen.add_argument("--kind", required=True,
                     choices=["mis-gadget", "class-c", "bfs-gadget", "two-cliques", "cycle", "path"])
    gen.add_argument("--base", default=None, help="base graph file for gadget kinds")
    gen.add_argument("--i", type=int, default=None)
    gen.add_argument("--j", type=int, default=None)
    gen.add_argument("--n", type=int, default=None)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen)

    runp = subs.add_parser("run", help="execute one schedule and print the output")
    runp.add_argument("--graph", required=True)
    _add_protocol_flags(runp)
    runp.add_argument("--scheduler", required=True,
                      help="fixed:ORDER | min-id | max-id | random:SEED")
    runp.add_argument("--trace", default=None, help="write a JSON-lines trace here")
    runp.set_defaults(func=_cmd_run)

    sweepp = subs.add_parser("sweep", help="check the protocol against every schedule")
    sweepp.add_argument("--graph", required=True)
    _add_protocol_flags(sweepp)
    sweepp.add_argument("--max-states", type=int, default=adversary.DEFAULT_LIMITS.max_states)
    sweepp.add_argument("--max-time", type=float, default=adversary.DEFAULT_LIMITS.max_time)
    sweepp.add_argument("--jobs", type=int, default=1)
    sweepp.add_argument("--no-memo", action="store_true",
                        help="disable state memoization (full schedule tree)")
    sweepp.add_argument("--report", default=None, help="write the JSON report here")
    sweepp.set_defaults(func=_cmd_sweep)

    audit = subs.add_parser("audit", help="exact family count vs. whiteboard capacity")
    audit.add_argument("--family", required=True, choices=list(verify.AUDIT_FAMILIES))
    audit.add_argument("--n", type=int, required=True)
    audit.add_argument("--budget", type=int, default=engine.DEFAULT_BUDGET.c_msg)
    audit.set_defaults(func=_cmd_audit)

    oracle = subs.add_parser("oracle", help="print the ground truth for a problem")
    oracle.add_argument("--graph", required=True)
    oracle.add_argument("--problem", required=True, choices=[p.value for p in Problem])
    oracle.add_argument("--x", type=int, default=None)
    oracle.add_argument("--root", type=int, default=None)
    oracle.set_defaults(func=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except adversary.InvalidOrder as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except engine.BudgetError as e:
        print(f"budget violation: {e}", file=sys.stderr)
        return EXIT_VIOLATED
    except (GraphError, EngineError, protocols.ProtocolError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
