"""Command-line interface.

Exit codes: 0 answered (reachable / nonempty / found), 1 the boolean answer
is negative (empty, unreachable, nothing found), 2 usage or input error,
3 the model is outside the class the command needs.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from invpta import __version__
from invpta.decision import TooManyParameters, ef_emptiness, ef_synthesis, render
from invpta.dsl import ParseError, edge_ref, parse, parse_machine, serialize
from invpta.gadgets import FaithfulRunError, anchor_visits, encode, faithful_run
from invpta.generate import random_model
from invpta.model import Goal, ModelClassError, ModelError, validate_model
from invpta.results import ResultDocument, emit, model_hash, region_entries, run_steps
from invpta.semantics import random_explore, total_time, validate_run
from invpta.transform import guards_to_invariants
from invpta.zones import oracle_reachable

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_REJECTED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _goal(args) -> Goal:
    if args.label is not None:
        return Goal(label=args.label)
    return Goal(location=args.goal)


def _valuation(model, text: str):
    values = {}
    for item in filter(None, (s.strip() for s in (text or "").split(","))):
        name, _, val = item.partition("=")
        if not _:
            raise ValueError(f"malformed valuation item {item!r}; expected name=value")
        values[name.strip()] = Fraction(val.strip())
    return model.valuation(values)


def _write(out: bytes) -> None:
    sys.stdout.buffer.write(out)
    sys.stdout.flush()


def _format_state(model, state) -> str:
    clocks = ", ".join(f"{c}={Fraction(v)}" for c, v in zip(model.clocks, state.clocks))
    return f"{model.locations[state.location].name} ({clocks})"


def _format_run(model, run) -> str:
    lines = [f"  start {_format_state(model, run.initial)}"]
    for s in run.steps:
        lines.append(f"  delay {s.delay}, {edge_ref(model, s.edge)} -> {_format_state(model, s.state)}")
    return "\n".join(lines)


def cmd_classify(args) -> int:
    model = parse(_read(args.file))
    report = validate_model(model)
    yn = {True: "yes", False: "no"}
    lines = [
        f"PTA_I: {yn[report.is_pta_i]}",
        f"PTA_I^U: {yn[report.is_pta_iu]}",
        f"bounded: {yn[report.is_bounded]}",
        f"nonnegative constants: {yn[report.has_nonnegative_constants]}",
    ]
    lines += [f"violation: {v}" for v in report.violations]
    _write(("\n".join(lines) + "\n").encode())
    return EXIT_OK


def cmd_transform(args) -> int:
    model = parse(_read(args.file))
    tm = guards_to_invariants(model)
    _write(serialize(tm.result).encode())
    return EXIT_OK


def cmd_ef_empty(args) -> int:
    model = parse(_read(args.file))
    start = time.perf_counter()
    empty, witness = ef_emptiness(model, _goal(args))
    elapsed = time.perf_counter() - start
    answer = {"empty": empty, "witness": None if witness is None else run_steps(model, witness)}
    text = "empty" if empty else "nonempty\n" + _format_run(model, witness)
    doc = ResultDocument("ef-empty", model_hash(model), answer, text, elapsed)
    _write(emit(doc, args.format))
    return EXIT_NEGATIVE if empty else EXIT_OK


def cmd_ef_synth(args) -> int:
    model = parse(_read(args.file))
    start = time.perf_counter()
    result = ef_synthesis(model, _goal(args), max_params=args.max_params,
                          n_jobs=args.jobs if args.parallel else None)
    constraint = render(result)
    elapsed = time.perf_counter() - start
    answer = {
        "empty": result.empty,
        "constraint": str(constraint),
        "regions_enumerated": result.regions_enumerated,
        "regions_checked": result.regions_checked,
        "regions": [region_entries(model.params, r) for r in result.accepted],
        "witnesses": [
            {"region": region_entries(model.params, r), "run": run_steps(model, result.witnesses[r])}
            for r in result.accepted
        ],
        "skipped": list(result.skipped),
    }
    doc = ResultDocument("ef-synth", model_hash(model), answer, str(constraint), elapsed)
    _write(emit(doc, args.format))
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = parse(_read(args.file))
    v = _valuation(model, args.valuation)
    run = random_explore(model, v, _goal(args), budget=args.budget, seed=args.seed)
    if run is None:
        _write(b"no run found\n")
        return EXIT_NEGATIVE
    assert validate_run(model, v, run)
    _write((f"run of length {len(run)}, duration {total_time(run)}\n" + _format_run(model, run) + "\n").encode())
    return EXIT_OK


def cmd_oracle_reach(args) -> int:
    model = parse(_read(args.file))
    v = _valuation(model, args.valuation)
    reachable = oracle_reachable(model, v, _goal(args))
    _write(b"reachable\n" if reachable else b"unreachable\n")
    return EXIT_OK if reachable else EXIT_NEGATIVE


def cmd_encode(args) -> int:
    machine = parse_machine(_read(args.machine))
    _write(serialize(encode(machine).model).encode())
    return EXIT_OK


def cmd_faithful_run(args) -> int:
    machine = parse_machine(_read(args.machine))
    gadget = encode(machine)
    v_a = Fraction(args.a)
    try:
        run = faithful_run(gadget, v_a, args.steps)
    except FaithfulRunError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NEGATIVE
    report = validate_run(gadget.model, (v_a,), run)
    model = gadget.model
    lines = [f"a = {v_a}: run of length {len(run)}, duration {total_time(run)}, "
             f"{'valid' if report else 'INVALID: ' + report.reason}"]
    for s in anchor_visits(gadget, run):
        lines.append(_format_state(model, s))
    if args.full:
        lines.append(_format_run(model, run))
    _write(("\n".join(lines) + "\n").encode())
    return EXIT_OK if report else EXIT_NEGATIVE


def cmd_random_model(args) -> int:
    _write(serialize(random_model(args.profile, args.seed)).encode())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="invpta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def goal_args(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--goal", help="goal location name")
        g.add_argument("--label", help="goal atomic proposition")

    p = sub.add_parser("classify", help="report class membership")
    p.add_argument("file")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("transform", help="move guards into fresh locations' invariants")
    p.add_argument("file")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("ef-empty", help="decide reachability emptiness (exit 1 when empty)")
    p.add_argument("file")
    goal_args(p)
    p.add_argument("--format", choices=["text", "structured"], default="text")
    p.set_defaults(func=cmd_ef_empty)

    p = sub.add_parser("ef-synth", help="synthesize the valuations reaching the goal")
    p.add_argument("file")
    goal_args(p)
    p.add_argument("--format", choices=["text", "structured"], default="text")
    p.add_argument("--max-params", type=int, default=20)
    p.add_argument("--parallel", action="store_true", help="check sign regions on a thread pool")
    p.add_argument("--jobs", type=int, default=4, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_ef_synth)

    p = sub.add_parser("simulate", help="random search for a concrete run (exit 1 when none found)")
    p.add_argument("file")
    p.add_argument("--valuation", default="", help="e.g. p=1,q=1/2")
    goal_args(p)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle-reach", help="zone-graph reachability at one valuation (exit 1 when unreachable)")
    p.add_argument("file")
    p.add_argument("--valuation", default="")
    goal_args(p)
    p.set_defaults(func=cmd_oracle_reach)

    p = sub.add_parser("encode-2cm", help="encode a two-counter machine")
    p.add_argument("machine")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("faithful-run", help="last-moment run of the encoded machine")
    p.add_argument("machine")
    p.add_argument("--a", required=True, help="parameter value, e.g. 1/8")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--full", action="store_true", help="print every step")
    p.set_defaults(func=cmd_faithful_run)

    p = sub.add_parser("random-model", help="print a random model")
    p.add_argument("--profile", required=True, help="invariant-free-pta, pta-iu, closed-ta or chain(n)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_random_model)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModelClassError, TooManyParameters) as exc:
        sys.stderr.write(f"rejected: {exc}\n")
        return EXIT_REJECTED
    except (ParseError, ModelError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"error: {msg}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
