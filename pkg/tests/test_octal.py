from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rewritegames.core import is_strongly_terminating
from rewritegames.grundy import GrundyTable
from rewritegames.invariants import Mismatch, Ok
from rewritegames.octal import (
    EXAMPLE_037_TRACE,
    GrundySequence,
    OctalCode,
    crosscheck_octal,
    encode_piles,
    example_037_system,
    find_period,
    is_legal_trace,
    octal_grundy_sequence,
    octal_to_rewrite,
    rewrite_grundy,
)


def pile_game_oracle(code: str):
    """Grundy value of a multiset of piles, by direct play on sorted tuples (no nim-sum)."""
    digits = [int(c) for c in code.split(".")[1]]

    @lru_cache(maxsize=None)
    def g(piles):
        opts = set()
        for i, m in enumerate(piles):
            rest = piles[:i] + piles[i + 1:]
            for k, d in enumerate(digits, 1):
                if d & 1 and m == k:
                    opts.add(g(rest))
                if d & 2 and m > k:
                    opts.add(g(tuple(sorted(rest + (m - k,)))))
                if d & 4 and m - k >= 2:
                    for p in range(1, m - k):
                        opts.add(g(tuple(sorted(rest + (p, m - k - p)))))
        v = 0
        while v in opts:
            v += 1
        return v

    return lambda *piles: g(tuple(sorted(p for p in piles if p)))


class TestCode:
    def test_parse(self):
        assert OctalCode.parse("0.37").digits == (3, 7)
        assert OctalCode.parse(".370").digits == (3, 7)
        assert str(OctalCode.parse("0.137")) == "0.137"
        assert OctalCode.parse("0.07").max_removal == 2

    @pytest.mark.parametrize("bad", ["0.0", "0.8", "0.", "x", "0.3a"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            OctalCode.parse(bad)


class TestSequence:
    def test_examples(self):
        s = octal_grundy_sequence("0.37", 2)
        assert s.values == (0, 1, 2) and str(s) == "0,1,2"
        assert octal_grundy_sequence("0.3", 30).values == tuple(m % 2 for m in range(31))
        for code in ["0.1", "0.37", "0.07", "0.4"]:
            assert octal_grundy_sequence(code, 0).values == (0,)

    @pytest.mark.parametrize("code", ["0.37", "0.07", "0.137", "0.4", "0.6", "0.77", "0.12"])
    def test_matches_pile_oracle(self, code):
        g = pile_game_oracle(code)
        assert octal_grundy_sequence(code, 24).values == tuple(g(m) for m in range(25))

    def test_period_flag(self):
        s = octal_grundy_sequence("0.3", 20, period=True)
        assert (s.preperiod, s.period) == (0, 2)
        assert octal_grundy_sequence("0.37", 20, period=True).period is None
        assert isinstance(s, GrundySequence)


class TestFindPeriod:
    def test_examples(self):
        assert find_period([0, 1] * 10, 1) == (0, 2)
        assert find_period(list(range(40)), 1) is None
        assert find_period(octal_grundy_sequence("0.3", 20).values, 1) == (0, 2)
        assert find_period([], 1) is None

    @pytest.mark.parametrize("code,expected", [("0.07", (53, 34)), ("0.137", (52, 34)), ("0.3", (0, 2))])
    def test_known_codes(self, code, expected):
        c = OctalCode.parse(code)
        seq = octal_grundy_sequence(c, 300).values
        assert find_period(seq, c.max_removal) == expected

    @pytest.mark.parametrize("code", ["0.07", "0.137", "0.3", "0.1", "0.77", "0.15", "0.12"])
    def test_revalidates_on_further_values(self, code):
        c = OctalCode.parse(code)
        head = octal_grundy_sequence(c, 250).values
        found = find_period(head, c.max_removal)
        assert found is not None
        n0, p = found
        seq = octal_grundy_sequence(c, 450).values
        assert all(seq[n + p] == seq[n] for n in range(n0, 450 - p + 1))

    @given(st.lists(st.integers(0, 3), min_size=1, max_size=40), st.integers(1, 3))
    def test_result_satisfies_condition(self, seq, t):
        found = find_period(seq, t)
        if found is not None:
            n0, p = found
            assert all(seq[n + p] == seq[n] for n in range(n0, 2 * n0 + p + t + 1))


class TestEncoding:
    def test_encode_piles(self):
        assert encode_piles(3, 2) == "baaabaab"
        assert encode_piles() == "b"
        assert encode_piles(1) == "bab"
        with pytest.raises(ValueError):
            encode_piles(-1)

    def test_rules(self):
        s = octal_to_rewrite("0.37")
        got = {(s.format(r.lhs), s.format(r.rhs) if r.rhs else "") for r in s.rules}
        assert got == {("bab", "b"), ("aa", "a"), ("baab", "b"), ("aaa", "a"), ("aaaa", "aba")}
        s = octal_to_rewrite("0.1")
        assert [(s.format(r.lhs), s.format(r.rhs)) for r in s.rules] == [("bab", "b")]
        assert not is_strongly_terminating(octal_to_rewrite("0.4"))

    def test_example_trace(self):
        ex = example_037_system()
        assert is_legal_trace(ex, EXAMPLE_037_TRACE)
        assert len(EXAMPLE_037_TRACE) - 1 == 4
        assert not is_legal_trace(ex, ("baaabaab", "bbb"))
        assert not rewrite_grundy(ex, EXAMPLE_037_TRACE[-1]) and not rewrite_grundy(ex, "bbb")

    @pytest.mark.parametrize("code,n", [("0.37", 12), ("0.3", 20), ("0.1", 6), ("0.07", 14), ("0.4", 12)])
    def test_crosscheck(self, code, n):
        res = crosscheck_octal(code, n)
        assert isinstance(res, Ok) and res.checked >= n + 1

    def test_crosscheck_detects_wrong_translation(self, monkeypatch):
        import rewritegames.octal as octal

        wrong = octal.octal_to_rewrite("0.3")
        monkeypatch.setattr(octal, "octal_to_rewrite", lambda code: wrong)
        assert isinstance(crosscheck_octal("0.37", 6), Mismatch)

    @pytest.mark.parametrize("system", [example_037_system(), octal_to_rewrite("0.37")], ids=["hand", "bits"])
    def test_sum_decomposition(self, system):
        seq = octal_grundy_sequence("0.37", 12).values
        oracle = pile_game_oracle("0.37")
        table = GrundyTable(system.alphabet)
        for n1 in range(13):
            for n2 in range(13 - n1):
                got = rewrite_grundy(system, encode_piles(n1, n2), table)
                assert got == seq[n1] ^ seq[n2] == oracle(n1, n2)
