"""Octal games as pile recursions and as rewrite games on {a, b}.

A position with piles n1..nr is the word ``b a^n1 b a^n2 b ... b a^nr b``.
Digit ``d_k`` of the code translates bit by bit into rules:

* bit 1 (remove k, emptying the pile): ``b a^k b -> b``
* bit 2 (remove k, one pile left):     ``a^(k+1) -> a``
* bit 4 (remove k, split in two):      ``a^(k+2) -> a b a``

Split positions are valued by the nim-sum of their parts, the usual
Sprague-Grundy rule for disjoint sums.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import RewriteRule, RewriteSystem, Word, successor_set
from .grundy import GrundyTable, grundy, mex
from .invariants import Mismatch, Ok

AB = "ab"

EXAMPLE_037_RULES = (("a", ""), ("aa", ""), ("aa", "b"))
EXAMPLE_037_TRACE = ("baaabaab", "baaabab", "babab", "bbab", "bbb")


@dataclass(frozen=True)
class OctalCode:
    digits: tuple[int, ...]

    def __post_init__(self):
        digits = tuple(int(d) for d in self.digits)
        object.__setattr__(self, "digits", digits)
        if not digits or not any(digits):
            raise ValueError("octal code needs a nonzero digit")
        if any(not 0 <= d < 8 for d in digits):
            raise ValueError("octal digits must lie in 0..7")

    @classmethod
    def parse(cls, text: str) -> "OctalCode":
        """``"0.37"`` or ``".37"``; trailing zero digits are dropped."""
        text = text.strip()
        if text.startswith("0."):
            text = text[2:]
        elif text.startswith("."):
            text = text[1:]
        if not text or not text.isdigit():
            raise ValueError(f"not an octal code: {text!r}")
        return cls(tuple(int(c) for c in text.rstrip("0") or "0"))

    def __str__(self):
        return "0." + "".join(map(str, self.digits))

    @property
    def max_removal(self) -> int:
        """Largest k with a nonzero digit (the ``t`` of the periodicity test)."""
        return max(k for k, d in enumerate(self.digits, 1) if d)


def _as_code(code) -> OctalCode:
    return code if isinstance(code, OctalCode) else OctalCode.parse(str(code))


@dataclass(frozen=True)
class GrundySequence:
    values: tuple[int, ...]
    preperiod: int | None = None
    period: int | None = None

    def __str__(self):
        return ",".join(map(str, self.values))


def pile_options(code: OctalCode, m: int, values) -> set[int]:
    """Grundy values of the options of a single pile of ``m`` tokens."""
    out = set()
    for k, d in enumerate(code.digits, 1):
        if k > m:
            break
        if d & 1 and m == k:
            out.add(0)
        if d & 2 and m > k:
            out.add(values[m - k])
        if d & 4 and m - k >= 2:
            rest = m - k
            for p in range(1, rest // 2 + 1):
                out.add(values[p] ^ values[rest - p])
    return out


def octal_grundy_sequence(code, n: int, *, period: bool = False) -> GrundySequence:
    """G(0..n) by the pile recursion; ``period=True`` also runs :func:`find_period`."""
    code = _as_code(code)
    values: list[int] = []
    for m in range(n + 1):
        values.append(mex(pile_options(code, m, values)))
    if period:
        found = find_period(values, code.max_removal)
        if found is not None:
            return GrundySequence(tuple(values), *found)
    return GrundySequence(tuple(values))


def find_period(seq, t: int) -> tuple[int, int] | None:
    """Least ``(n0, p)`` in lexicographic order passing the Guy-Smith test.

    ``G(n + p) == G(n)`` must hold for every ``n0 <= n <= 2*n0 + p + t``,
    all inside ``seq``.  For an octal game whose moves remove at most ``t``
    tokens this proves ``G`` periodic from ``n0`` on.
    """
    seq = list(seq)
    size = len(seq)
    for n0 in range(size):
        for p in range(1, size):
            last = 2 * n0 + p + t
            if last + p >= size:
                break
            if all(seq[n + p] == seq[n] for n in range(n0, last + 1)):
                return n0, p
    return None


def encode_piles(*piles: int) -> str:
    if any(p < 0 for p in piles):
        raise ValueError("pile sizes are naturals")
    return "b" + "".join("a" * p + "b" for p in piles)


def octal_to_rewrite(code) -> RewriteSystem:
    code = _as_code(code)
    rules = []
    for k, d in enumerate(code.digits, 1):
        if d & 1:
            rules.append(("b" + "a" * k + "b", "b"))
        if d & 2:
            rules.append(("a" * (k + 1), "a"))
        if d & 4:
            rules.append(("a" * (k + 2), "aba"))
    return RewriteSystem.from_strings(AB, rules)


def example_037_system() -> RewriteSystem:
    """Hand-made rewrite game for 0.37: a -> eps, aa -> eps, aa -> b."""
    return RewriteSystem.from_strings(AB, EXAMPLE_037_RULES)


def is_legal_trace(system: RewriteSystem, trace) -> bool:
    words = [system.word(w) for w in trace]
    return all(v in successor_set(system, u) for u, v in zip(words, words[1:]))


def rewrite_grundy(system: RewriteSystem, w: Word | str, table: GrundyTable | None = None) -> int:
    """Grundy value by memoized search over positions reachable from ``w``.

    Every rule here removes at least one ``a``, so the game terminates even
    when a rule (``aaa -> aba``) keeps the length.
    """
    if isinstance(w, str):
        w = system.word(w)
    return grundy(system, w, table, assume_terminating=True, depth_budget=len(w) + 2)


def crosscheck_octal(code, n: int) -> Ok | Mismatch:
    """Pile recursion against the rewrite encoding on single piles up to ``n``.

    For 0.37 the hand-made system of :func:`example_037_system` is checked too.
    ``expected`` in a mismatch is the pile recursion's value.
    """
    code = _as_code(code)
    seq = octal_grundy_sequence(code, n).values
    systems = [octal_to_rewrite(code)]
    if code.digits == (3, 7):
        systems.append(example_037_system())
    checked = 0
    for system in systems:
        table = GrundyTable(system.alphabet)
        for m in range(n + 1):
            w = encode_piles(m)
            got = rewrite_grundy(system, w, table)
            if got != seq[m]:
                return Mismatch(w, seq[m], got)
            checked += 1
    return Ok(checked)
