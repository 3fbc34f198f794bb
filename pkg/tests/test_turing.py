import dataclasses
from importlib.resources import files

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rewritegames.core import GameSyntaxError, RewriteRule, is_strongly_terminating
from rewritegames.grundy import Outcome, outcome
from rewritegames.invariants import Mismatch, Ok
from rewritegames.turing import (
    BLANK,
    LA,
    LB,
    RA,
    RB,
    Configuration,
    MalformedPosition,
    NonUniqueMove,
    Verdict,
    build_game,
    canonical_winning_start,
    crosscheck_simulation,
    decode,
    forced_run,
    is_start,
    load_tm,
    parse_tm,
    simulate,
    start_word,
)

HEADER = "states: q0 q1 qacc qrej\ninitial: q0\naccept: qacc\nreject: qrej\ntape: $ _\n"


def fixture_tm(name):
    return load_tm(files("rewritegames") / "fixtures" / f"{name}.tm")


def tm(*deltas, header=HEADER):
    return parse_tm(header + "".join(f"delta {d}\n" for d in deltas))


def toks(game, w):
    return [game.alphabet.symbols[c] for c in w]


def lhs_rhs(game):
    return {(game.format(r.lhs), game.format(r.rhs)) for r in game.system.rules}


# three-transition acceptor that writes a 1 and walks back to $
WRITER = ("q0 $ -> q1 $ R", "q1 _ -> q2 1 L", "q2 $ -> qacc $ R")
WRITER_HEADER = "states: q0 q1 q2 qacc qrej\ninitial: q0\naccept: qacc\nreject: qrej\ntape: $ _ 1\n"


class TestParse:
    def test_fixtures_load(self):
        for name in ["halt1", "halt2", "halt3", "loop"]:
            m = fixture_tm(name)
            assert m.initial == "q0" and m.accept == "qacc"

    @pytest.mark.parametrize("bad", [
        "q0 $ -> q1 $ L",
        "q0 $ -> q1 _ R",
        "q0 _ -> q1 $ R",
        "q0 _ -> q9 _ R",
        "qacc _ -> q0 _ R",
        "q0 _ -> q1 _ X",
    ])
    def test_convention_and_symbols(self, bad):
        with pytest.raises(GameSyntaxError):
            tm(bad)

    def test_structure_errors(self):
        with pytest.raises(GameSyntaxError):
            tm("q0 $ -> q1 $ R", "q0 $ -> q0 $ R")
        with pytest.raises(GameSyntaxError):
            parse_tm("states: q0\naccept: q0\ntape: $ _\n")
        with pytest.raises(GameSyntaxError):
            tm(header="states: q0 # qacc\ninitial: q0\naccept: qacc\ntape: $ _\n")
        with pytest.raises(GameSyntaxError):
            tm(header="states: q0 qacc\ninitial: q0\naccept: qacc\ntape: 0 1\n")
        with pytest.raises(GameSyntaxError) as e:
            parse_tm(HEADER + "delta q0 $ q1 $ R\n")
        assert e.value.line == 6


class TestSimulate:
    def test_halt2(self):
        configs, halted = simulate(fixture_tm("halt2"), 10)
        assert halted and len(configs) == 3
        assert configs[0] == Configuration("q0", ("$",), 0)
        assert configs[-1] == Configuration("qacc", ("$",), 2)

    def test_loop(self):
        configs, halted = simulate(fixture_tm("loop"), 10)
        assert not halted and len(configs) == 11


class TestBuild:
    def test_rules(self):
        g = build_game(tm("q0 $ -> q1 $ R", "q1 _ -> qacc _ R"))
        rules = lhs_rhs(g)
        assert ("[$][<A][q0][#][#][#][#]", "[$][#][#][q1][>B][#]") in rules
        for q in ["q0", "q1", "qacc", "qrej"]:
            assert (f"[{q}][>B][#]", f"[{q}][>A]") in rules
            assert (f"[#][<B][{q}]", f"[<A][{q}]") in rules
            assert (f"[{q}][>A][#][#][#][#]", f"[#][#][{q}][>B][#]") in rules
            assert (f"[#][#][#][#][<A][{q}]", f"[#][<B][{q}][#][#]") in rules
        assert ("[q1][>A][_]", "[qacc]") in rules and ("[_][<A][q1]", "[qacc]") in rules

    def test_left_moving_transition(self):
        g = build_game(tm(*WRITER, header=WRITER_HEADER))
        rules = lhs_rhs(g)
        assert ("[#][#][#][#][_][<A][q1]", "[#][<B][q2][#][#][1]") in rules
        assert ("[#][#][#][#][q1][>A][_]", "[#][<B][q2][#][#][1]") in rules
        assert set(g.kinds) == {"left-shift", "right-shift", "left-transition", "right-transition", "halting"}

    @pytest.mark.parametrize("name", ["halt1", "halt2", "halt3", "loop"])
    def test_strongly_terminating(self, name):
        g = build_game(fixture_tm(name))
        assert is_strongly_terminating(g.system)
        assert all(len(r.lhs) > len(r.rhs) for r in g.system.rules)

    def test_describe(self):
        text = build_game(fixture_tm("halt2")).describe()
        assert "halting" in text and "right-shift" in text


class TestStartWords:
    def test_examples(self):
        g = build_game(fixture_tm("halt2"))
        assert g.format(start_word(g)) == "[$][<A][q0]"
        assert is_start(g, "[$][<A][q0][#][#][#][#][_]")
        assert not is_start(g, "[<A][q0]")
        assert not is_start(g, "[$][<A][q0][1]")
        assert not is_start(g, "[$][>A][q0]")
        assert canonical_winning_start(g, 0) == start_word(g)
        assert toks(g, canonical_winning_start(g, 1)) == ["$", LA, "q0"] + ["#"] * 4 + [BLANK]
        assert toks(g, canonical_winning_start(g, 2)) == ["$", LA, "q0"] + (["#"] * 8 + [BLANK]) * 2
        with pytest.raises(ValueError):
            start_word(g, [-1])

    @given(st.lists(st.integers(0, 6), max_size=5))
    def test_start_words_are_starts(self, pad):
        g = build_game(fixture_tm("halt1"))
        assert is_start(g, start_word(g, pad))


def head_invariants_hold(game, run):
    for t, w in enumerate(run.trace):
        s = toks(game, w)
        a_heads = s.count(RA) + s.count(LA)
        b_heads = s.count(RB) + s.count(LB)
        states = sum(1 for x in s if x in game.machine.states)
        if states != 1:
            return False
        final = t == len(run.trace) - 1 and run.verdict is Verdict.A_WINS
        if final:
            if a_heads or b_heads:
                return False
        elif t % 2 == 0 and (a_heads != 1 or b_heads):
            return False
        elif t % 2 == 1 and (a_heads or b_heads > 1):
            return False
    return True


class TestForcedRun:
    def test_two_step_acceptor(self):
        g = build_game(fixture_tm("halt2"))
        run = forced_run(g, canonical_winning_start(g, 2), 100)
        assert run.verdict is Verdict.A_WINS and run.n_moves == 5
        expected = [
            ["$", LA, "q0"] + ["#"] * 8 + [BLANK] + ["#"] * 8 + [BLANK],
            ["$", "#", "#", "q1", RB, "#"] + ["#"] * 4 + [BLANK] + ["#"] * 8 + [BLANK],
            ["$", "#", "#", "q1", RA] + ["#"] * 4 + [BLANK] + ["#"] * 8 + [BLANK],
            ["$"] + ["#"] * 4 + ["q1", RB, "#", BLANK] + ["#"] * 8 + [BLANK],
            ["$"] + ["#"] * 4 + ["q1", RA, BLANK] + ["#"] * 8 + [BLANK],
            ["$"] + ["#"] * 4 + ["qacc"] + ["#"] * 8 + [BLANK],
        ]
        assert [toks(g, w) for w in run.trace] == expected
        assert run.reductions[-1] == "halting" and run.reductions[0] == "right-transition"
        assert head_invariants_hold(g, run)

    def test_no_padding_loses_immediately(self):
        g = build_game(fixture_tm("halt2"))
        run = forced_run(g, start_word(g), 100)
        assert run.verdict is Verdict.A_LOSES and run.n_moves == 0

    def test_one_step_acceptor(self):
        g = build_game(fixture_tm("halt1"))
        run = forced_run(g, canonical_winning_start(g, 1))
        assert run.verdict is Verdict.A_WINS and run.n_moves == 1

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_loop_exhausts_padding(self, m):
        g = build_game(fixture_tm("loop"))
        run = forced_run(g, canonical_winning_start(g, m))
        assert run.verdict is Verdict.A_LOSES and run.n_moves % 2 == 0
        assert head_invariants_hold(g, run)

    def test_budget(self):
        g = build_game(fixture_tm("loop"))
        assert forced_run(g, canonical_winning_start(g, 3), 3).verdict is Verdict.BUDGET_EXCEEDED

    def test_rejects_non_start(self):
        g = build_game(fixture_tm("halt2"))
        with pytest.raises(ValueError):
            forced_run(g, "[$][#][<A][q0]")

    def test_non_unique_move_detected(self):
        g = build_game(fixture_tm("halt2"))
        extra = RewriteRule(g.word("[$][<A][q0]"), g.word("[$][q0]"))
        system = dataclasses.replace(g.system, rules=g.system.rules + (extra,))
        broken = dataclasses.replace(g, system=system, kinds=g.kinds + ("extra",), players=g.players + ("A",))
        with pytest.raises(NonUniqueMove):
            forced_run(broken, canonical_winning_start(g, 2))

    @pytest.mark.parametrize("name,steps", [("halt1", 1), ("halt2", 2), ("halt3", 3)])
    def test_canonical_start_wins(self, name, steps):
        machine = fixture_tm(name)
        configs, halted = simulate(machine, 100)
        assert halted and len(configs) - 1 == steps
        g = build_game(machine)
        run = forced_run(g, canonical_winning_start(g, steps))
        assert run.verdict is Verdict.A_WINS
        assert head_invariants_hold(g, run)

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(["halt1", "halt2", "halt3", "loop"]), st.lists(st.integers(0, 9), max_size=4))
    def test_zero_player_and_soundness(self, name, pad):
        machine = fixture_tm(name)
        g = build_game(machine)
        run = forced_run(g, start_word(g, pad))
        assert head_invariants_hold(g, run)
        if run.verdict is Verdict.A_WINS:
            assert simulate(machine, 1000)[1]
        assert crosscheck_simulation(machine, start_word(g, pad), 1000, g)

    @pytest.mark.parametrize("name,pad", [
        ("halt1", []), ("halt1", [4]), ("halt2", [4]), ("halt2", [8]), ("halt2", [4, 4]), ("loop", [4]), ("loop", [5, 3]),
    ])
    def test_engine_outcome_agrees(self, name, pad):
        g = build_game(fixture_tm(name))
        w0 = start_word(g, pad)
        wins = forced_run(g, w0).verdict is Verdict.A_WINS
        assert (outcome(g.system, w0) is Outcome.N) == wins


class TestDecode:
    def test_textbook_position(self):
        header = "states: p qacc\ninitial: p\naccept: qacc\ntape: $ _ x1 x2 x3\n"
        g = build_game(tm(header=header))
        u = "[$][x1][x3][x3][p][>A][x2][_][_]"
        assert decode(g, u) == Configuration("p", ("$", "x1", "x3", "x3", "x2"), 4)
        padded = "[$][#][x1][x3][#][#][x3][p][>A][#][x2][_][#][_]"
        assert decode(g, padded) == decode(g, u)

    def test_start(self):
        g = build_game(fixture_tm("halt2"))
        assert decode(g, canonical_winning_start(g, 2)) == Configuration("q0", ("$",), 0)

    def test_malformed(self):
        g = build_game(fixture_tm("halt2"))
        with pytest.raises(MalformedPosition):
            decode(g, "[$][#][#][#][#][qacc][#]")
        with pytest.raises(MalformedPosition):
            decode(g, "[$][#][#][q1][>B][#]")
        with pytest.raises(MalformedPosition):
            decode(g, "[$][<A][q0][q1]")


class TestCrosscheck:
    def test_examples(self):
        machine = fixture_tm("halt2")
        g = build_game(machine)
        assert isinstance(crosscheck_simulation(machine, canonical_winning_start(g, 2), 100), Ok)
        assert isinstance(crosscheck_simulation(machine, start_word(g, [4]), 100), Ok)
        writer = tm(*WRITER, header=WRITER_HEADER)
        gw = build_game(writer)
        assert isinstance(crosscheck_simulation(writer, canonical_winning_start(gw, 3), 100), Ok)

    def test_corrupted_game_is_caught(self):
        machine = fixture_tm("halt3")
        corrupt = dataclasses.replace(machine, delta={**machine.delta, ("q1", "_"): ("q2", "_", "L")})
        run = crosscheck_simulation(machine, canonical_winning_start(build_game(machine), 3), 100,
                                    game=build_game(corrupt))
        assert isinstance(run, Mismatch)
