"""``rgw``: command-line front end.

Exit codes: 0 success / Verified / Ok, 1 Failed / Mismatch / not proven,
2 usage error, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import automata, octal, pda, synthesis, turing
from .automata import StateBudgetError, dump_moore, load_fixture, parse_moore, to_dot, verify_grundy_moore
from .core import GameSyntaxError, RewriteSystem, erasure_lengths, parse_game
from .grundy import (
    GrundyBudgetError,
    GrundyTable,
    NotTerminatingError,
    build_table_up_to,
    grundy,
    grundy_language_sample,
    max_grundy_by_length,
)
from .invariants import FamilyError, crosscheck

OK, FAILED, USAGE, BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _fixture_path(name: str, suffix: str = "") -> Path | None:
    base = resources.files("rewritegames").joinpath("fixtures")
    for candidate in (Path(name).name, Path(name).name + suffix):
        path = Path(str(base.joinpath(candidate)))
        if path.is_file():
            return path
    return None


def _read(path: str, suffix: str = "") -> str:
    p = Path(path)
    if not p.is_file():
        p = _fixture_path(path, suffix)
        if p is None:
            raise UsageError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def _game(args) -> RewriteSystem:
    return parse_game(_read(args.game, ".game"))


def _word(system: RewriteSystem, text: str):
    try:
        return system.word(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _natural(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _emit(args, data: dict, human: str):
    print(json.dumps(data) if args.json else human)


# -- subcommands ----------------------------------------------------------------------

def cmd_grundy(args):
    system = _game(args)
    w = _word(system, args.word)
    g = grundy(system, w, assume_terminating=args.assume_terminating, depth_budget=args.depth_budget)
    if args.command == "outcome":
        o = "P" if g == 0 else "N"
        _emit(args, {"word": system.format(w), "outcome": o}, o)
    else:
        _emit(args, {"word": system.format(w), "grundy": g}, str(g))
    return OK


def cmd_sequence(args):
    system = _game(args)
    seq = max_grundy_by_length(system, args.max_len, exact=args.exact, threads=args.threads,
                               memory_budget=args.memory_budget)
    _emit(args, {"max_len": args.max_len, "exact": args.exact, "values": seq}, ",".join(map(str, seq)))
    return OK


def cmd_classes(args):
    system = _game(args)
    words = grundy_language_sample(system, args.value, args.max_len, threads=args.threads,
                                   memory_budget=args.memory_budget)
    text = [system.format(w) for w in words]
    _emit(args, {"value": args.value, "max_len": args.max_len, "words": text}, "\n".join(text))
    return OK


def cmd_crosscheck(args):
    system = _game(args)
    try:
        res = crosscheck(system, args.formula, args.max_len)
    except KeyError as e:
        raise UsageError(str(e)) from None
    if res:
        _emit(args, {"result": "Ok", "checked": res.checked}, f"Ok ({res.checked} words)")
        return OK
    _emit(args, {"result": "Mismatch", "word": res.word, "expected": str(res.expected), "got": str(res.got)},
          f"Mismatch at {res.word}: engine {res.expected}, formula {res.got}")
    return FAILED


def _report_text(system, machine, report) -> str:
    lines = [report.verdict]
    for f in report.failures:
        where = f"class {f.i}" if f.j is None else f"classes {f.i} -> {f.j}"
        lines.append(f"  {f.kind} ({where}): witness {system.format(f.witness)}")
    return "\n".join(lines)


def cmd_verify(args):
    system = _game(args)
    machine = parse_moore(_read(args.dfa, ".moore"))
    report = verify_grundy_moore(system, machine, args.state_budget)
    _emit(args, report.to_dict(), _report_text(system, machine, report))
    return OK if report.verified else FAILED


def cmd_synth(args):
    system = _game(args)
    log = None if args.json else (lambda s: print(s, file=sys.stderr))
    res = synthesis.synthesize_and_verify(
        system, args.n_start, args.n_max, class_cap=args.class_cap, state_budget=args.state_budget, log=log
    )
    if isinstance(res, synthesis.Proven):
        if args.emit:
            Path(args.emit).write_text(dump_moore(res.machine), encoding="utf-8")
        if args.dot:
            Path(args.dot).write_text(to_dot(res.machine), encoding="utf-8")
        data = {"result": "Proven", "n": res.n, "states": res.machine.n_states,
                "machine": dump_moore(res.machine)}
        human = f"Proven at n={res.n}: {res.machine.n_states} states\n" + dump_moore(res.machine).rstrip()
        _emit(args, data, human)
        return OK
    failures = {str(n): r.to_dict() for n, r in res.failures.items()}
    if isinstance(res, synthesis.Refuted):
        _emit(args, {"result": "Refuted", "failures": failures},
              f"Refuted: every hypothesis up to n={args.n_max} failed certification")
    else:
        _emit(args, {"result": "Inconclusive", "reason": res.reason, "failures": failures},
              f"Inconclusive: {res.reason}")
    return FAILED


def cmd_pda(args):
    machine = pda.build_pda(args.k, args.l)
    w = "" if args.word in ("eps", "ε") else args.word
    try:
        run = pda.run_pda(machine, w)
    except ValueError as e:
        raise UsageError(str(e)) from None
    nf = run.normal_form() or "eps"
    _emit(args, {"word": args.word, "parity": run.parity, "reductions": run.reduction_count, "normal_form": nf},
          f"parity {run.parity}\nreductions {run.reduction_count}\nnormal form {nf}")
    return OK


def cmd_normal_form(args):
    system = _game(args)
    w = _word(system, args.word)
    nf, count = pda.normal_form(system, w)
    _emit(args, {"word": system.format(w), "normal_form": system.format(nf), "moves": count},
          f"{system.format(nf)} after {count} moves")
    return OK


def cmd_witness(args):
    system = _game(args)
    lengths = erasure_lengths(system)
    if lengths is None or set(lengths) != {0, 1} or system.alphabet.symbols != ("a", "b"):
        raise UsageError("witness needs a taking-and-merging game over ab erasing both letters")
    k1, l1 = min(lengths[0]), min(lengths[1])
    if k1 < 2 or l1 < 2:
        raise UsageError("witness family needs shortest a-block and b-block of length > 1")
    if args.i is not None and args.j is not None:
        pairs = [(args.i, args.j)]
    elif args.i is None and args.j is None:
        pairs = [(i, j) for i in range(args.max + 1) for j in range(args.max + 1)]
    else:
        raise UsageError("give both --i and --j, or neither")
    table = GrundyTable(system.alphabet)
    rows, good = [], True
    for i, j in pairs:
        text = pda.witness_word(k1, l1, i, j)
        o = "P" if grundy(system, system.word(text), table) == 0 else "N"
        ok = (o == "P") == (i >= j)
        good &= ok
        rows.append({"i": i, "j": j, "word": text or "eps", "outcome": o, "as_claimed": ok})
    human = "\n".join(f"u({r['i']},{r['j']}) = {r['word']}: {r['outcome']}" + ("" if r["as_claimed"] else "  <- not P iff i>=j")
                      for r in rows)
    _emit(args, {"k1": k1, "l1": l1, "rows": rows}, human)
    return OK if good else FAILED


def cmd_octal(args):
    try:
        code = octal.OctalCode.parse(args.code)
    except ValueError as e:
        raise UsageError(str(e)) from None
    seq = octal.octal_grundy_sequence(code, args.n, period=args.period)
    data = {"code": str(code), "values": list(seq.values)}
    lines = [str(seq)]
    status = OK
    if args.period:
        data.update(preperiod=seq.preperiod, period=seq.period)
        lines.append("no period found" if seq.period is None
                     else f"preperiod {seq.preperiod}, period {seq.period}")
    if args.crosscheck:
        res = octal.crosscheck_octal(code, args.n)
        if res:
            data["crosscheck"] = {"result": "Ok", "checked": res.checked}
            lines.append(f"crosscheck Ok ({res.checked} positions)")
        else:
            data["crosscheck"] = {"result": "Mismatch", "word": res.word, "expected": res.expected, "got": res.got}
            lines.append(f"crosscheck Mismatch at {res.word}: piles {res.expected}, rewrite {res.got}")
            status = FAILED
    _emit(args, data, "\n".join(lines))
    return status


def _tm_start(args, game):
    if args.canonical is not None:
        return turing.canonical_winning_start(game, args.canonical)
    pad = [int(x) for x in args.pad.split(",") if x.strip()] if args.pad else []
    return turing.start_word(game, pad)


def cmd_tm(args):
    machine = turing.parse_tm(_read(args.tm, ".tm"))
    game = turing.build_game(machine)
    if args.tm_command == "build":
        rules = [{"kind": k, "player": p, "lhs": game.format(r.lhs), "rhs": game.format(r.rhs)}
                 for r, k, p in zip(game.system.rules, game.kinds, game.players)]
        _emit(args, {"rules": rules}, game.describe())
        return OK
    w0 = _tm_start(args, game)
    if args.tm_command == "run":
        run = turing.forced_run(game, w0, args.budget)
        data = {"verdict": str(run.verdict), "moves": run.n_moves, "reductions": list(run.reductions)}
        lines = []
        if args.trace:
            data["trace"] = [game.format(w) for w in run.trace]
            lines += [f"{i:4} {game.format(w)}" for i, w in enumerate(run.trace)]
        lines.append(f"{run.verdict} after {run.n_moves} moves")
        _emit(args, data, "\n".join(lines))
        return BUDGET if run.verdict is turing.Verdict.BUDGET_EXCEEDED else OK
    res = turing.crosscheck_simulation(machine, w0, args.budget, game)
    if res:
        _emit(args, {"result": "Ok", "checked": res.checked}, f"Ok ({res.checked} A-turn positions)")
        return OK
    _emit(args, {"result": "Mismatch", "word": res.word, "expected": str(res.expected), "got": str(res.got)},
          f"Mismatch at {res.word}: expected {res.expected}, decoded {res.got}")
    return FAILED


def cmd_fixtures(args):
    rows, good = [], True
    for name in automata.FIXTURES:
        system, machine = load_fixture(name)
        report = verify_grundy_moore(system, machine, args.state_budget)
        table = build_table_up_to(system, args.max_len)
        disagree = next((w for w, g in table.items() if machine.label(w) != g), None)
        ok = report.verified and disagree is None
        good &= ok
        rows.append({"fixture": name, "verdict": report.verdict, "states": machine.n_states,
                     "agrees_to": args.max_len if disagree is None else None,
                     "disagreement": None if disagree is None else system.format(disagree)})
    human = "\n".join(
        f"{r['fixture']}: {r['verdict']}, {r['states']} states, "
        + (f"agrees with the engine to length {r['agrees_to']}" if r["agrees_to"] is not None
           else f"disagrees at {r['disagreement']}")
        for r in rows)
    _emit(args, {"fixtures": rows}, human)
    return OK if good else FAILED


# -- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="structured output")
    common.add_argument("--threads", type=_positive, default=1, help="worker threads for table builds")
    common.add_argument("--memory-budget", type=_positive, default=4 * 1024**3, help="max table entries")
    common.add_argument("--state-budget", type=_positive, default=automata.DEFAULT_STATE_BUDGET,
                        help="max automaton states explored per check")

    parser = argparse.ArgumentParser(prog="rgw", description="Rewrite games on words.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, game=True):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(func=func)
        if game:
            p.add_argument("--game", required=True, help="game file (falls back to packaged fixtures)")
        return p

    for name in ("grundy", "outcome"):
        p = add(name, cmd_grundy, f"{name} of one word")
        p.add_argument("--word", required=True, help="word, or eps")
        p.add_argument("--assume-terminating", action="store_true")
        p.add_argument("--depth-budget", type=_positive)

    p = add("sequence", cmd_sequence, "max Grundy value over words of length <= i")
    p.add_argument("--max-len", type=_natural, required=True)
    p.add_argument("--exact", action="store_true", help="max over length exactly i")

    p = add("classes", cmd_classes, "words of a given Grundy value")
    p.add_argument("--value", type=_natural, required=True)
    p.add_argument("--max-len", type=_natural, required=True)

    p = add("crosscheck", cmd_crosscheck, "closed-form formula against the exact engine")
    p.add_argument("--formula", required=True, help="s-a2b, g-a2b, g-aoddb, g-aa2b, g-a123b, p-a12b12, g-akb:<k>")
    p.add_argument("--max-len", type=_natural, default=12)

    p = add("verify", cmd_verify, "certify a Moore machine as the Grundy function")
    p.add_argument("--dfa", required=True, help="Moore machine file")

    p = add("synth", cmd_synth, "infer and certify a Moore machine")
    p.add_argument("--n-start", type=_natural, default=4)
    p.add_argument("--n-max", type=_natural, default=synthesis.DEFAULT_N_MAX)
    p.add_argument("--class-cap", type=_positive, default=synthesis.DEFAULT_CLASS_CAP)
    p.add_argument("--emit", help="write the proven machine here")
    p.add_argument("--dot", help="write Graphviz output here")

    p = add("pda", cmd_pda, "run the pushdown machine for {a^k, b^l}", game=False)
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--l", type=_positive, required=True)
    p.add_argument("--word", required=True)

    p = add("normal-form", cmd_normal_form, "unique final position of a confluent erasure game")
    p.add_argument("--word", required=True)

    p = add("witness", cmd_witness, "outcomes of the non-regularity witness family")
    p.add_argument("--i", type=_natural)
    p.add_argument("--j", type=_natural)
    p.add_argument("--max", type=_natural, default=4, help="table for all i, j <= max")

    p = add("octal", cmd_octal, "octal game Grundy sequence", game=False)
    p.add_argument("--code", required=True, help="e.g. 0.37")
    p.add_argument("--n", type=_natural, required=True)
    p.add_argument("--crosscheck", action="store_true")
    p.add_argument("--period", action="store_true")

    p = add("tm", cmd_tm, "game built from a Turing machine", game=False)
    tm_sub = p.add_subparsers(dest="tm_command", required=True)
    for name, help_text in (("build", "list the game rules"), ("run", "play the forced run"),
                            ("crosscheck", "compare decoded positions with direct simulation")):
        q = tm_sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        q.add_argument("--tm", required=True, help="machine file")
        if name != "build":
            start = q.add_mutually_exclusive_group()
            start.add_argument("--pad", help="comma list of #-run lengths, e.g. 8,8")
            start.add_argument("--canonical", type=_natural, metavar="M", help="canonical start for M transitions")
            q.add_argument("--budget", type=_positive, default=turing.DEFAULT_STEP_BUDGET)
        if name == "run":
            q.add_argument("--trace", action="store_true")

    p = add("fixtures", cmd_fixtures, "packaged certificates", game=False)
    f_sub = p.add_subparsers(dest="fixtures_command", required=True)
    q = f_sub.add_parser("verify-all", parents=[common], help="verify every packaged Moore certificate")
    q.add_argument("--max-len", type=_natural, default=12)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GameSyntaxError, automata.MooreSyntaxError, FamilyError, NotTerminatingError,
            turing.MalformedPosition, OSError, ValueError) as e:
        print(f"rgw {args.command}: error: {e}", file=sys.stderr)
        _subparser_usage(parser, args)
        return USAGE
    except turing.NonUniqueMove as e:
        print(f"rgw {args.command}: forced run broken: {e}", file=sys.stderr)
        return FAILED
    except (GrundyBudgetError, StateBudgetError) as e:
        print(f"rgw {args.command}: budget exceeded: {e}", file=sys.stderr)
        return BUDGET


def _subparser_usage(parser, args):
    for action in parser._subparsers._group_actions:
        sp = action.choices.get(args.command)
        if sp is not None:
            print(sp.format_usage().rstrip(), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
