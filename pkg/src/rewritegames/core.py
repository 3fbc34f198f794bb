"""Alphabets, words, rewrite rules and move enumeration.

Words are stored as ``bytes`` whose items are symbol indices into an
:class:`Alphabet`.  Comparing two such byte strings by ``(len, bytes)`` is the
length-lexicographic order induced by the declared symbol order, which is the
canonical order used for every set-valued output in the package.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

EPS = "eps"

Word = bytes


class GameSyntaxError(ValueError):
    """Malformed game or machine description."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


_TOKEN = re.compile(r"\[([^\]]+)\]")


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not symbols:
            raise ValueError("alphabet must be non-empty")
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"duplicate symbols in alphabet {symbols!r}")
        if len(symbols) > 256:
            raise ValueError("at most 256 symbols are supported")
        for s in symbols:
            if not s or any(c in s for c in "[] \t\n"):
                raise ValueError(f"invalid symbol {s!r}")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def of(cls, symbols: str | Iterable[str]) -> "Alphabet":
        """``Alphabet.of("ab")`` or ``Alphabet.of(["q0", "#"])``."""
        if isinstance(symbols, str):
            symbols = tuple(symbols)
        return cls(tuple(symbols))

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, symbol):
        return symbol in self._index

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} not in alphabet {self.symbols!r}") from None

    def tokenize(self, text: str) -> list[str]:
        text = text.strip()
        if text in ("", EPS, "ε"):
            return []
        if "[" in text:
            tokens = _TOKEN.findall(text)
            if _TOKEN.sub("", text).strip():
                raise ValueError(f"stray characters outside [..] tokens in {text!r}")
            return tokens
        if " " in text or not self.single_char:
            return text.split()
        return list(text)

    def word(self, text: str | Word | Iterable[str]) -> Word:
        """Encode ``text`` (a string, or a sequence of symbols) as a word."""
        if isinstance(text, bytes):
            if any(c >= len(self.symbols) for c in text):
                raise ValueError("byte word contains an index outside the alphabet")
            return text
        tokens = self.tokenize(text) if isinstance(text, str) else list(text)
        return bytes(self.index(t) for t in tokens)

    def format(self, w: Word) -> str:
        if not w:
            return EPS
        if self.single_char:
            return "".join(self.symbols[c] for c in w)
        return "".join(f"[{self.symbols[c]}]" for c in w)

    def words_of_length(self, n: int) -> Iterable[Word]:
        """All words of length ``n`` in canonical order."""
        from itertools import product

        for t in product(range(len(self.symbols)), repeat=n):
            yield bytes(t)

    def words_up_to(self, n: int) -> Iterable[Word]:
        for m in range(n + 1):
            yield from self.words_of_length(m)


def canonical_key(w: Word):
    return (len(w), w)


def canonical(words: Iterable[Word]) -> list[Word]:
    return sorted(set(words), key=canonical_key)


@dataclass(frozen=True)
class RewriteRule:
    lhs: Word
    rhs: Word

    def __post_init__(self):
        if not self.lhs:
            raise ValueError("rule lhs must be non-empty")
        if self.lhs == self.rhs:
            raise ValueError("rule lhs and rhs must differ")


@dataclass(frozen=True)
class RewriteSystem:
    alphabet: Alphabet
    rules: tuple[RewriteRule, ...]

    def __post_init__(self):
        rules = tuple(self.rules)
        object.__setattr__(self, "rules", rules)
        if not rules:
            raise ValueError("a rewrite system needs at least one rule")
        k = len(self.alphabet)
        for r in rules:
            if any(c >= k for c in r.lhs + r.rhs):
                raise ValueError("rule uses a symbol outside the alphabet")

    @classmethod
    def from_strings(cls, alphabet: str | Alphabet, rules: Iterable[tuple[str, str]]):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet.of(alphabet)
        return cls(alphabet, tuple(RewriteRule(alphabet.word(l), alphabet.word(r)) for l, r in rules))

    def word(self, text) -> Word:
        return self.alphabet.word(text)

    def format(self, w: Word) -> str:
        return self.alphabet.format(w)

    def describe(self) -> str:
        lines = [f"alphabet: {''.join(self.alphabet.symbols) if self.alphabet.single_char else ' '.join(self.alphabet.symbols)}"]
        for r in self.rules:
            lines.append(f"{self.format(r.lhs)} -> {self.format(r.rhs)}")
        return "\n".join(lines) + "\n"


def erasure_game(spec: str, alphabet: str = "ab") -> RewriteSystem:
    """Taking-and-merging game from a comma list of erased blocks.

    >>> erasure_game("a,aa,b").rules[1].lhs
    b'\\x00\\x00'

    Tokens like ``a3`` are shorthand for ``aaa``.
    """
    rules = []
    for tok in spec.split(","):
        tok = tok.strip()
        m = re.fullmatch(r"(\w)(\d+)", tok)
        if m:
            tok = m.group(1) * int(m.group(2))
        rules.append((tok, ""))
    return RewriteSystem.from_strings(alphabet, rules)


def parse_game(text: str) -> RewriteSystem:
    alphabet = None
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if alphabet is None:
            m = re.fullmatch(r"alphabet\s*:\s*(.+)", line)
            if not m:
                raise GameSyntaxError("expected 'alphabet: <symbols>'", lineno)
            body = m.group(1).strip()
            try:
                alphabet = Alphabet.of(body.split() if " " in body else body)
            except ValueError as e:
                raise GameSyntaxError(str(e), lineno) from None
            continue
        if "->" not in line:
            raise GameSyntaxError(f"expected '<lhs> -> <rhs>', got {line!r}", lineno)
        lhs_text, rhs_text = (s.strip() for s in line.split("->", 1))
        try:
            lhs = alphabet.word(lhs_text)
            rhs = alphabet.word(rhs_text)
        except ValueError as e:
            raise GameSyntaxError(str(e), lineno) from None
        if not lhs:
            raise GameSyntaxError("empty lhs", lineno)
        if lhs == rhs:
            raise GameSyntaxError("lhs equals rhs", lineno)
        rules.append(RewriteRule(lhs, rhs))
    if alphabet is None:
        raise GameSyntaxError("missing alphabet line")
    if not rules:
        raise GameSyntaxError("no rules")
    return RewriteSystem(alphabet, tuple(rules))


def load_game(path) -> RewriteSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_game(fh.read())


class Move(NamedTuple):
    rule_index: int
    position: int
    result: Word


def moves(system: RewriteSystem, w: Word) -> list[Move]:
    out = []
    for idx, rule in enumerate(system.rules):
        lhs, rhs = rule.lhs, rule.rhs
        pos = w.find(lhs)
        while pos != -1:
            out.append(Move(idx, pos, w[:pos] + rhs + w[pos + len(lhs):]))
            pos = w.find(lhs, pos + 1)
    out.sort(key=lambda m: (m.position, m.rule_index))
    return out


def successor_set(system: RewriteSystem, w: Word) -> list[Word]:
    """Distinct results of all moves from ``w``, canonical order."""
    return canonical(m.result for m in moves(system, w))


def is_strongly_terminating(system: RewriteSystem) -> bool:
    return all(len(r.lhs) > len(r.rhs) for r in system.rules)


def is_taking_and_merging(system: RewriteSystem) -> bool:
    return all(not r.rhs and len(set(r.lhs)) == 1 for r in system.rules)


def erasure_lengths(system: RewriteSystem) -> dict[int, list[int]] | None:
    """Map symbol index -> sorted erased block lengths, or None if not taking-and-merging."""
    if not is_taking_and_merging(system):
        return None
    out: dict[int, list[int]] = {}
    for r in system.rules:
        out.setdefault(r.lhs[0], []).append(len(r.lhs))
    return {k: sorted(v) for k, v in out.items()}
