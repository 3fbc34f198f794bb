"""Exact Grundy values by memoized mex recursion.

Two engines share one :class:`GrundyTable`:

* :func:`build_table_up_to` fills dense per-length strata bottom-up.  A word of
  length ``L`` over a base-``B`` alphabet is addressed by its rank, the
  base-``B`` number whose most significant digit is the first letter, so rank
  order is lexicographic order.  Every (rule, offset) pair is applied to a
  whole stratum at once with integer arithmetic on ranks.
* :func:`grundy` answers single queries top-down with an explicit stack, which
  also works for systems whose right-hand sides are not shorter.
"""
from __future__ import annotations

import enum
import json
import struct
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable

import numpy as np

from .core import Alphabet, RewriteSystem, Word, canonical_key, is_strongly_terminating, successor_set

DEFAULT_MEMORY_BUDGET = 4 * 1024**3
CHUNK = 1 << 20


class GrundyBudgetError(RuntimeError):
    """A recursion, memory, or step budget was exhausted."""


class NotTerminatingError(ValueError):
    """The system is not known to terminate."""


class Outcome(str, enum.Enum):
    P = "P"
    N = "N"

    def __str__(self):
        return self.value


def mex(values: Iterable[int]) -> int:
    s = set(values)
    m = 0
    while m in s:
        m += 1
    return m


class GrundyTable:
    """Word -> Grundy value store.

    Dense strata (numpy ``uint8`` arrays indexed by rank) hold exhaustive
    results; a dict holds sparse top-down results.  ``completed_length`` is the
    largest ``n`` such that every word of length ``<= n`` is present, or None
    for sparse tables.
    """

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet
        self.base = len(alphabet)
        self.strata: list[np.ndarray] = []
        self.sparse: dict[Word, int] = {}

    @property
    def completed_length(self) -> int | None:
        return len(self.strata) - 1 if self.strata else None

    def rank(self, w: Word) -> int:
        r = 0
        for c in w:
            r = r * self.base + c
        return r

    def unrank(self, r: int, length: int) -> Word:
        out = bytearray(length)
        for i in range(length - 1, -1, -1):
            r, out[i] = divmod(r, self.base)
        return bytes(out)

    def __contains__(self, w: Word) -> bool:
        return len(w) < len(self.strata) or w in self.sparse

    def get(self, w: Word, default=None):
        if len(w) < len(self.strata):
            return int(self.strata[len(w)][self.rank(w)])
        return self.sparse.get(w, default)

    def __getitem__(self, w: Word) -> int:
        v = self.get(w)
        if v is None:
            raise KeyError(w)
        return v

    def __setitem__(self, w: Word, value: int):
        if len(w) < len(self.strata):
            self.strata[len(w)][self.rank(w)] = value
        else:
            self.sparse[w] = value

    def __len__(self):
        return sum(len(s) for s in self.strata) + len(self.sparse)

    def items(self):
        """(word, value) pairs in canonical order."""
        for length, stratum in enumerate(self.strata):
            for r, v in enumerate(stratum.tolist()):
                yield self.unrank(r, length), v
        for w in sorted(self.sparse, key=canonical_key):
            if len(w) >= len(self.strata):
                yield w, self.sparse[w]

    def stratum(self, length: int) -> np.ndarray:
        return self.strata[length]

    # -- export ------------------------------------------------------------

    def to_jsonl(self, fh):
        for w, g in self.items():
            fh.write(json.dumps({"word": self.alphabet.format(w), "g": g}) + "\n")

    @classmethod
    def from_jsonl(cls, alphabet: Alphabet, fh) -> "GrundyTable":
        table = cls(alphabet)
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                table.sparse[alphabet.word(rec["word"])] = int(rec["g"])
        return table

    def to_binary(self, fh):
        """Dense strata only: header (alphabet, max length), then one byte per word."""
        symbols = "\x00".join(self.alphabet.symbols).encode()
        fh.write(b"RGWT")
        fh.write(struct.pack("<II", len(symbols), len(self.strata) - 1))
        fh.write(symbols)
        for s in self.strata:
            fh.write(s.astype(np.uint8).tobytes())

    @classmethod
    def from_binary(cls, fh) -> "GrundyTable":
        if fh.read(4) != b"RGWT":
            raise ValueError("not a Grundy strata file")
        nsym, maxlen = struct.unpack("<II", fh.read(8))
        alphabet = Alphabet(tuple(fh.read(nsym).decode().split("\x00")))
        table = cls(alphabet)
        for length in range(maxlen + 1):
            size = table.base**length
            table.strata.append(np.frombuffer(fh.read(size), dtype=np.uint8).copy())
        return table


def _check_terminating(system: RewriteSystem, assume_terminating: bool):
    if not (assume_terminating or is_strongly_terminating(system)):
        raise NotTerminatingError(
            "system is not strongly terminating; pass assume_terminating=True "
            "if termination is known by other means"
        )


def grundy(
    system: RewriteSystem,
    w: Word,
    table: GrundyTable | None = None,
    *,
    assume_terminating: bool = False,
    depth_budget: int | None = None,
) -> int:
    """Grundy value of ``w``; every visited position is recorded in ``table``."""
    _check_terminating(system, assume_terminating)
    if table is None:
        table = GrundyTable(system.alphabet)
    if depth_budget is None:
        depth_budget = 10 * max(len(w), 1)
    known = table.get(w)
    if known is not None:
        return known

    # explicit DFS: frames of (word, successors, next index)
    stack = [(w, successor_set(system, w), 0)]
    on_path = {w}
    while stack:
        word, succ, i = stack[-1]
        while i < len(succ) and succ[i] in table:
            i += 1
        if i < len(succ):
            child = succ[i]
            stack[-1] = (word, succ, i + 1)
            if child in on_path:
                raise NotTerminatingError(f"cycle through {system.format(child)!r}")
            if len(stack) >= depth_budget:
                raise GrundyBudgetError(f"recursion depth budget {depth_budget} exceeded")
            on_path.add(child)
            stack.append((child, successor_set(system, child), 0))
            continue
        stack.pop()
        on_path.discard(word)
        table[word] = mex(table[s] for s in succ)
    return table[w]


def outcome(system: RewriteSystem, w: Word, table: GrundyTable | None = None, **kw) -> Outcome:
    return Outcome.P if grundy(system, w, table, **kw) == 0 else Outcome.N


def _rule_plans(system: RewriteSystem, base: int):
    plans = []
    for rule in system.rules:
        lhs_code = 0
        for c in rule.lhs:
            lhs_code = lhs_code * base + c
        rhs_code = 0
        for c in rule.rhs:
            rhs_code = rhs_code * base + c
        plans.append((len(rule.lhs), lhs_code, len(rule.rhs), rhs_code))
    return plans


def _stratum_chunk(strata, plans, base, length, start, stop, ncols):
    ranks = np.arange(start, stop, dtype=np.int64)
    seen = np.zeros((stop - start, ncols), dtype=bool)
    for k, lhs_code, r, rhs_code in plans:
        if k > length:
            continue
        target = strata[length - k + r]
        bk = base**k
        br = base**r
        for i in range(length - k + 1):
            low = base ** (length - i - k)
            hit = np.nonzero((ranks // low) % bk == lhs_code)[0]
            if hit.size == 0:
                continue
            src = ranks[hit]
            res = ((src // (low * bk)) * br + rhs_code) * low + src % low
            seen[hit, target[res]] = True
    return np.argmin(seen, axis=1).astype(np.uint8)


def build_table_up_to(
    system: RewriteSystem,
    n: int,
    table: GrundyTable | None = None,
    *,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    threads: int = 1,
) -> GrundyTable:
    """Exhaustive Grundy values of every word of length ``<= n``.

    Only strongly terminating systems are accepted: then each successor of a
    length-``L`` word lies in a strictly shorter, already completed stratum.
    An existing dense ``table`` is extended in place.
    """
    if not is_strongly_terminating(system):
        raise NotTerminatingError("build_table_up_to needs a strongly terminating system")
    if n < 0:
        raise ValueError("n must be non-negative")
    base = len(system.alphabet)
    if table is None:
        table = GrundyTable(system.alphabet)
    elif table.alphabet != system.alphabet:
        raise ValueError("table alphabet differs from system alphabet")
    total = sum(base**m for m in range(n + 1))
    if total > memory_budget or base**n >= 2**62:
        raise GrundyBudgetError(f"{total} entries exceed the memory budget")
    plans = _rule_plans(system, base)
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for length in range(len(table.strata), n + 1):
            size = base**length
            maxg = max((int(s.max()) for s in table.strata if s.size), default=0)
            ncols = maxg + 2
            if ncols > 255:
                raise GrundyBudgetError("Grundy values exceed the byte-wide stratum format")
            # bool matrix is chunk x ncols; keep it near CHUNK bytes
            step = max(1, CHUNK // ncols * 4)
            bounds = [(a, min(a + step, size)) for a in range(0, size, step)]
            args = [(table.strata, plans, base, length, a, b, ncols) for a, b in bounds]
            if pool is None:
                parts = [_stratum_chunk(*a) for a in args]
            else:
                parts = list(pool.map(lambda a: _stratum_chunk(*a), args))
            table.strata.append(np.concatenate(parts) if parts else np.zeros(0, np.uint8))
    finally:
        if pool is not None:
            pool.shutdown()
    return table


def max_grundy_by_length(
    system: RewriteSystem, n: int, table: GrundyTable | None = None, *, exact: bool = False, **kw
) -> list[int]:
    """Entry ``i`` is the largest Grundy value among words of length ``<= i``.

    With ``exact=True`` the maximum is taken over length exactly ``i``; that
    sequence is not monotone (e.g. 0,1,2,3,2,... for {a,aa,b,bb}).
    """
    if table is None or table.completed_length is None or table.completed_length < n:
        table = build_table_up_to(system, n, table, **kw)
    per_length = [int(table.strata[m].max()) for m in range(n + 1)]
    if exact:
        return per_length
    return np.maximum.accumulate(per_length).tolist()


def grundy_language_sample(
    system: RewriteSystem, value: int, n: int, table: GrundyTable | None = None, **kw
) -> list[Word]:
    """All words of length ``<= n`` with Grundy value ``value``, canonical order."""
    if table is None or table.completed_length is None or table.completed_length < n:
        table = build_table_up_to(system, n, table, **kw)
    out = []
    for m in range(n + 1):
        for r in np.nonzero(table.strata[m] == value)[0].tolist() if value < 256 else []:
            out.append(table.unrank(r, m))
    return out
