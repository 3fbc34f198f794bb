"""Pushdown machine computing Grundy values of the games {a^k, b^l}.

The rewrite system {a^k -> eps, b^l -> eps} is confluent, so every play from a
word has the same length.  The machine reads the word left to right, keeps
unreduced blocks on the stack and flips its state on every simulated
reduction; the final state is the Grundy value.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .core import RewriteSystem, Word, erasure_lengths, successor_set
from .invariants import FamilyError

BOTTOM = "⊥"


@dataclass(frozen=True)
class Pda:
    k: int
    l: int
    # (state, letter, popped) -> (pushed top-first, target state)
    transitions: dict
    stack_alphabet: tuple

    @property
    def initial_transition(self):
        return ("q0", None, None, (BOTTOM,), 0)

    def limit(self, letter: str) -> int:
        return self.k if letter == "a" else self.l


def build_pda(k: int, l: int) -> Pda:
    """Tabulated transitions for states 0 and 1.

    With ``k == 1`` there is no symbol ``(a, k-1)``: reading ``a`` flips the
    state and leaves the stack untouched (likewise for ``l == 1``).
    """
    if k < 1 or l < 1:
        raise ValueError("k and l must be positive")
    stack = [("a", i) for i in range(1, k)] + [("b", i) for i in range(1, l)] + [BOTTOM]
    t = {}
    for q in (0, 1):
        for x, other, lim in (("a", "b", k), ("b", "a", l)):
            if lim == 1:
                for y in stack:
                    t[(q, x, y)] = ((y,), 1 - q)
                continue
            t[(q, x, BOTTOM)] = (((x, 1), BOTTOM), q)
            for j in range(1, (l if x == "a" else k)):
                t[(q, x, (other, j))] = (((x, 1), (other, j)), q)
            for i in range(1, lim - 1):
                t[(q, x, (x, i))] = (((x, i + 1),), q)
            t[(q, x, (x, lim - 1))] = ((), 1 - q)
    return Pda(k, l, t, tuple(stack))


@dataclass(frozen=True)
class PdaRun:
    parity: int
    stack: tuple  # top first
    reduction_count: int

    def normal_form(self) -> str:
        out = []
        for sym in reversed(self.stack):
            if sym != BOTTOM:
                out.append(sym[0] * sym[1])
        return "".join(out)


def stack_well_formed(pda: Pda, stack: tuple) -> bool:
    """Bottom marker last, adjacent blocks alternate letters, counts below the limit."""
    if not stack or stack[-1] != BOTTOM or BOTTOM in stack[:-1]:
        return False
    blocks = stack[:-1]
    for sym in blocks:
        if not 1 <= sym[1] < pda.limit(sym[0]):
            return False
    return all(x[0] != y[0] for x, y in zip(blocks, blocks[1:]))


def run_pda(pda: Pda, w: str, *, check=False) -> PdaRun:
    if set(w) - {"a", "b"}:
        raise ValueError(f"word {w!r} is not over {{a,b}}")
    _, _, _, pushed, state = pda.initial_transition
    stack = list(pushed)  # top at the end
    count = 0
    for x in w:
        top = stack.pop()
        push, target = pda.transitions[(state, x, top)]
        stack.extend(reversed(push))
        if target != state:
            count += 1
        state = target
        if check and not stack_well_formed(pda, tuple(reversed(stack))):
            raise AssertionError(f"malformed stack after reading {x!r}: {stack}")
    return PdaRun(state, tuple(reversed(stack)), count)


def grundy_akbl(k: int, l: int, w: str) -> int:
    return run_pda(build_pda(k, l), w).parity


def normal_form(system: RewriteSystem, w: Word) -> tuple[Word, int]:
    """Unique irreducible word reachable from ``w`` and the number of moves to reach it.

    Valid for systems with at most one erasure rule ``x^k -> eps`` per letter.
    """
    lengths = erasure_lengths(system)
    if lengths is None or any(len(v) != 1 for v in lengths.values()):
        raise FamilyError("normal_form needs at most one block-erasure rule per letter")
    limit = {x: v[0] for x, v in lengths.items()}
    stack: list[list[int]] = []
    count = 0
    for c in w:
        if stack and stack[-1][0] == c:
            stack[-1][1] += 1
        else:
            stack.append([c, 1])
        if stack[-1][1] == limit.get(c, 0):
            stack.pop()
            count += 1
    return bytes(c for c, n in stack for _ in range(n)), count


def witness_word(k1: int, l1: int, i: int, j: int) -> str:
    """``b^(l1-1) (a b^(l1-1))^i (b a^(k1-1))^j``: a P-position iff ``i >= j``."""
    return "b" * (l1 - 1) + ("a" + "b" * (l1 - 1)) * i + ("b" + "a" * (k1 - 1)) * j


def all_play_endings(system: RewriteSystem, w: Word) -> frozenset:
    """Every (length, final word) over all maximal plays from ``w``, by brute force."""

    @lru_cache(maxsize=None)
    def go(u: Word) -> frozenset:
        succ = successor_set(system, u)
        if not succ:
            return frozenset({(0, u)})
        return frozenset((n + 1, f) for v in succ for n, f in go(v))

    return go(w)
