"""Command-line front end.

Exit codes: 0 realizable/holds/yes, 1 unrealizable/fails/no,
2 unknown-at-cap, 64 usage error, 65 input format error.  Output on
stdout is byte-deterministic for identical inputs and flags; timings
and diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import core, domain, dsumpath, games, prefix, synthesis
from .core import DSUM, FormatError, format_rational, parse_rational
from .games import EVE

EXIT_YES = 0
EXIT_NO = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_FORMAT = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rational(text):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise UsageError(str(exc))


def _read(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise UsageError("cannot read %s: %s" % (path, exc))


def _load_spec(path):
    return core.parse_wfa(_read(path))


def _load_mealy(path):
    return core.parse_mealy(_read(path))


def _load_arena(path):
    return games.parse_arena(_read(path))


def _write_out(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _emit(args, payload, human_lines):
    if args.json:
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        for line in human_lines:
            sys.stdout.write(line + "\n")


def _strategy_lines(arena, strategy):
    lines = []
    for v in arena.vertices:
        if v in strategy.choice:
            lines.append("strategy: %s %d" % (v, strategy.choice[v]))
    return lines


def _word_arg(text):
    return core.word(text)


def build_parser():
    parser = _Parser(prog="wsynth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("domain-safe", help="check/transform into a domain-safe spec")
    p.add_argument("spec")
    p.add_argument("-o", dest="out", default=None)
    p.add_argument("--dot", action="store_true", help="emit the two-run game as DOT")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("synth", help="synthesize a transducer")
    p.add_argument("objective", choices=["threshold", "best-value", "approx"])
    p.add_argument("spec")
    p.add_argument("--cmp", choices=["gt", "ge", "lt", "le"], default=None)
    p.add_argument("--nu", default=None)
    p.add_argument("--r", dest="slack", default=None)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("-o", dest="out", default=None)
    p.add_argument("--dot", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("verify", help="verify a transducer against a spec")
    p.add_argument("spec")
    p.add_argument("mealy")
    p.add_argument(
        "--objective",
        required=True,
        choices=["boolean", "threshold", "best-value", "approx"],
    )
    p.add_argument("--cmp", choices=["gt", "ge", "lt", "le"], default=None)
    p.add_argument("--nu", default=None)
    p.add_argument("--r", dest="slack", default=None)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("eval", help="value of an input/output pair")
    p.add_argument("spec")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("bestval", help="best achievable value for an input")
    p.add_argument("spec")
    p.add_argument("--input", required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("solve-prefix", help="solve a critical prefix threshold game")
    p.add_argument("arena")
    p.add_argument("--measure", required=True, choices=["sum", "avg", "dsum"])
    p.add_argument("--cmp", required=True, choices=["gt", "ge"])
    p.add_argument("--nu", required=True)
    p.add_argument("--lambda", dest="discount", default=None)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--dot", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("dsum-path", help="discounted-sum path threshold check")
    p.add_argument("arena")
    p.add_argument("--nu", required=True)
    p.add_argument("--lambda", dest="discount", required=True)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("gen", help="generate test specifications")
    p.add_argument("what", choices=["mp-to-spec"])
    p.add_argument("arena")
    p.add_argument("-o", dest="out", default=None)
    p.add_argument("--json", action="store_true")

    return parser


def _cmd_domain_safe(args):
    spec = _load_spec(args.spec)
    already = domain.is_domain_safe(spec)
    result = domain.make_domain_safe(spec)
    if result is domain.NO_BOOLEAN_REALIZER:
        _emit(
            args,
            {"command": "domain-safe", "answer": "no_boolean_realizer",
             "already_safe": already},
            ["no boolean realizer"],
        )
        return EXIT_NO
    if args.dot:
        game = domain.build_two_run_game(spec)
        _write_out(domain.two_run_game_to_dot(game), args.out)
    else:
        _write_out(core.emit_wfa(result), args.out)
    if args.json:
        payload = {
            "command": "domain-safe",
            "answer": "domain_safe",
            "already_safe": already,
            "states": len(result.states),
            "transitions": len(result.transitions),
        }
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    return EXIT_YES


def _require(condition, message):
    if not condition:
        raise UsageError(message)


def _cmd_synth(args):
    # flags are validated before any file is read
    if args.objective == "threshold":
        _require(args.cmp in ("gt", "ge"), "threshold needs --cmp gt|ge")
        _require(args.nu is not None, "threshold needs --nu")
        nu = _rational(args.nu)
    elif args.objective == "approx":
        _require(args.cmp in ("lt", "le"), "approx needs --cmp lt|le")
        _require(args.slack is not None, "approx needs --r")
        slack = _rational(args.slack)
    spec = _load_spec(args.spec)
    if args.objective == "threshold":
        cmp = ">" if args.cmp == "gt" else ">="
        result = synthesis.synth_threshold(spec, cmp, nu)
    elif args.objective == "best-value":
        result = synthesis.synth_best_value(spec)
    else:
        if spec.measure == DSUM:
            raise UsageError(
                "unsupported: approximate dsum synthesis requires external "
                "determinization of discounted-sum automata"
            )
        cmp = "<" if args.cmp == "lt" else "<="
        cap = args.cap if args.cap is not None else _default_cap(spec)
        result = synthesis.synth_approx(spec, spec.measure, cmp, slack, cap)

    payload = {"command": "synth", "objective": args.objective, "answer": result.status}
    lines = [result.status]
    code = EXIT_NO
    if result.status == synthesis.REALIZABLE:
        code = EXIT_YES
        text = core.emit_mealy(result.transducer)
        if args.dot:
            text = core.mealy_to_dot(result.transducer)
        _write_out(text, args.out)
        payload["transducer_states"] = len(result.transducer.states)
    elif result.status == synthesis.UNKNOWN_AT_CAP:
        code = EXIT_UNKNOWN
        payload["cap"] = result.cap
        lines = ["unknown at cap %d" % result.cap]
    if args.json:
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    elif result.status != synthesis.REALIZABLE or args.out:
        for line in lines:
            sys.stdout.write(line + "\n")
    return code


def _default_cap(spec):
    wmax = max((abs(w) for (_s, (_t, w)) in
                ((k, v) for k, v in spec.transitions.items())), default=1)
    return 4 * max(1, len(spec.states)) * max(1, wmax)


def _cmd_verify(args):
    if args.objective == "boolean":
        obj = synthesis.Objective(kind="boolean")
    elif args.objective == "threshold":
        _require(args.cmp in ("gt", "ge"), "threshold needs --cmp gt|ge")
        _require(args.nu is not None, "threshold needs --nu")
        obj = synthesis.Objective(
            kind="threshold",
            cmp=">" if args.cmp == "gt" else ">=",
            bound=_rational(args.nu),
        )
    elif args.objective == "best-value":
        obj = synthesis.Objective(kind="best_value")
    else:
        _require(args.cmp in ("lt", "le"), "approx needs --cmp lt|le")
        _require(args.slack is not None, "approx needs --r")
        obj = synthesis.Objective(
            kind="approx",
            cmp="<" if args.cmp == "lt" else "<=",
            bound=_rational(args.slack),
        )
    spec = _load_spec(args.spec)
    machine = _load_mealy(args.mealy)
    verdict, witness = synthesis.verify_realizer(spec, machine, obj)
    if verdict == synthesis.PASS:
        _emit(args, {"command": "verify", "answer": "pass"}, ["pass"])
        return EXIT_YES
    witness_text = " ".join(witness)
    lines = ["fail", "witness: %s" % witness_text]
    produced = core.run_transducer(machine, witness)
    if produced is not None and obj.kind != "boolean":
        got = core.evaluate(spec, witness, produced)
        top = core.best_value(spec, witness)
        lines.append("value: %s" % _value_text(got))
        lines.append("best: %s" % _value_text(top))
    _emit(
        args,
        {"command": "verify", "answer": "fail", "witness": list(witness)},
        lines,
    )
    return EXIT_NO


def _value_text(value):
    return "-inf" if value is core.NEG_INF else format_rational(value)


def _cmd_eval(args):
    spec = _load_spec(args.spec)
    u = _word_arg(args.input)
    v = _word_arg(args.output)
    try:
        value = core.evaluate(spec, u, v)
    except ValueError as exc:
        raise UsageError(str(exc))
    _emit(
        args,
        {"command": "eval", "answer": _value_text(value)},
        [_value_text(value)],
    )
    return EXIT_YES if value is not core.NEG_INF else EXIT_NO


def _cmd_bestval(args):
    spec = _load_spec(args.spec)
    try:
        value = core.best_value(spec, _word_arg(args.input))
    except ValueError as exc:
        raise UsageError(str(exc))
    _emit(
        args,
        {"command": "bestval", "answer": _value_text(value)},
        [_value_text(value)],
    )
    return EXIT_YES if value is not core.NEG_INF else EXIT_NO


def _cmd_solve_prefix(args):
    arena = _load_arena(args.arena)
    discount = _rational(args.discount) if args.discount else None
    try:
        obj = prefix.PrefixObjective(
            measure=args.measure,
            cmp=">" if args.cmp == "gt" else ">=",
            nu=_rational(args.nu),
            discount=discount,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    try:
        arena = arena.ensure_deadlock_free(complete=False)
    except ValueError as exc:
        raise FormatError(str(exc))
    if args.dot:
        sys.stdout.write(games.arena_to_dot(arena))
    if args.trace:
        sys.stderr.write("objective: %s %s %s\n" % (obj.measure, obj.cmp, obj.nu))
        _trace_reduction(arena, obj)
    winner, strategy = prefix.solve_prefix_threshold(arena, obj)
    lines = ["winner: %s" % winner]
    payload = {"command": "solve-prefix", "answer": winner}
    if winner == EVE and strategy is not None:
        strategy_lines = _strategy_lines(arena, strategy)
        lines.extend(strategy_lines)
        payload["strategy_size"] = len(strategy.choice)
    _emit(args, payload, lines)
    return EXIT_YES if winner == EVE else EXIT_NO


def _trace_reduction(arena, obj):
    """Dump the intermediate game of the applicable reduction to stderr."""
    work, nu = arena, obj.nu
    if obj.measure == "avg":
        work, nu = prefix.reduce_avg_to_sum(arena, obj.nu)
    if obj.measure in ("sum", "avg"):
        scaled, nu_int = prefix._scale_sum_objective(work, nu)
        reduction = prefix.reduce_sum_prefix_to_mp(scaled, obj.cmp, nu_int)
        if reduction is prefix.EVE_WINS_TRIVIALLY:
            sys.stderr.write("reduction: eve avoids every critical vertex\n")
        else:
            sys.stderr.write("reduction: mean-payoff game\n")
            sys.stderr.write(games.emit_arena(reduction.arena))
    elif obj.cmp == ">=":
        reduction = prefix.reduce_dsum_prefix_to_ds(arena, obj.nu, obj.discount)
        if reduction is prefix.EVE_WINS_TRIVIALLY:
            sys.stderr.write("reduction: eve avoids every critical vertex\n")
        elif reduction is prefix.ADAM_WINS_IMMEDIATELY:
            sys.stderr.write("reduction: initial check on the empty prefix fails\n")
        else:
            sys.stderr.write("reduction: discounted-sum game\n")
            sys.stderr.write(games.emit_arena(reduction.arena))
    else:
        sys.stderr.write("reduction: none (positional enumeration + path check)\n")


def _cmd_dsum_path(args):
    arena = _load_arena(args.arena)
    lam = _rational(args.discount)
    nu = _rational(args.nu)
    if not (0 < lam < 1):
        raise UsageError("discount must lie strictly between 0 and 1")
    targets = frozenset(arena.critical)
    graph = dsumpath.WeightedGraph(
        vertices=arena.vertices,
        edges=[(src, w, dst) for src, _a, w, dst in arena.edges],
        source=arena.initial,
        targets=targets,
        discount=lam,
    )
    checker = dsumpath.exists_path_lt if args.strict else dsumpath.exists_path_leq
    answer, witness = checker(graph, nu)
    if args.trace:
        table, _v, _e = dsumpath.compute_mrg(graph, nu)
        if table is None:
            sys.stderr.write("no vertex reaches a target\n")
        else:
            for i, row in enumerate(table.rows):
                cells = ", ".join(
                    "%s=%s" % (v, format_rational(row[v])) for v in sorted(row, key=repr)
                )
                sys.stderr.write("mrg[%d]: %s\n" % (i, cells))
    if answer == dsumpath.YES:
        lines = [
            "yes",
            "witness: %s" % " ".join(str(v) for v in witness.vertices),
            "value: %s" % format_rational(witness.value),
        ]
        payload = {
            "command": "dsum-path",
            "answer": "yes",
            "witness": [str(v) for v in witness.vertices],
            "value": format_rational(witness.value),
        }
        _emit(args, payload, lines)
        return EXIT_YES
    _emit(args, {"command": "dsum-path", "answer": "no"}, ["no"])
    return EXIT_NO


def _cmd_gen(args):
    arena = _load_arena(args.arena)
    try:
        spec, (measure, cmp, nu) = synthesis.gen_spec_from_mp_game(arena)
    except ValueError as exc:
        raise FormatError(str(exc))
    _write_out(core.emit_wfa(spec), args.out)
    if args.json:
        payload = {
            "command": "gen",
            "answer": "ok",
            "objective": {
                "measure": measure,
                "cmp": cmp,
                "nu": format_rational(nu),
            },
            "states": len(spec.states),
        }
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    return EXIT_YES


_COMMANDS = {
    "domain-safe": _cmd_domain_safe,
    "synth": _cmd_synth,
    "verify": _cmd_verify,
    "eval": _cmd_eval,
    "bestval": _cmd_bestval,
    "solve-prefix": _cmd_solve_prefix,
    "dsum-path": _cmd_dsum_path,
    "gen": _cmd_gen,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    started = time.monotonic()
    try:
        args = parser.parse_args(argv)
        code = _COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write("usage error: %s\n" % exc)
        return EXIT_USAGE
    except FormatError as exc:
        sys.stderr.write("format error: %s\n" % exc)
        return EXIT_FORMAT
    if getattr(args, "json", False):
        sys.stderr.write("elapsed_ms: %d\n" % int((time.monotonic() - started) * 1000))
    return code


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
