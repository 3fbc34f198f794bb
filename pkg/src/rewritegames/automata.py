"""Finite automata over rewrite-game alphabets.

The point of this module is :func:`verify_grundy_moore`: a Moore machine whose
labels are claimed Grundy values is a proof of those values once its label
classes are shown to be stable (no move stays inside a class) and absorbing
(every word of class ``i`` has a move into every class ``j < i``).  Both
conditions are decided exactly with one-step image/preimage automata, so the
check covers all words, not a sample.

States are integers ``0..n-1``; symbols are alphabet indices.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

from .core import Alphabet, RewriteRule, RewriteSystem, Word, parse_game

DEFAULT_STATE_BUDGET = 10**6


class StateBudgetError(RuntimeError):
    """Automaton construction exceeded its state budget."""


class MooreSyntaxError(ValueError):
    pass


# -- types ------------------------------------------------------------------


@dataclass(frozen=True)
class Dfa:
    """Complete DFA: ``delta[state][symbol]``."""

    alphabet: Alphabet
    delta: tuple[tuple[int, ...], ...]
    initial: int
    accepting: frozenset

    def __post_init__(self):
        n, k = len(self.delta), len(self.alphabet)
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        for row in self.delta:
            if len(row) != k or any(not 0 <= t < n for t in row):
                raise ValueError("transition table is not complete")

    @property
    def n_states(self) -> int:
        return len(self.delta)

    def step(self, state: int, w: Word) -> int:
        for c in w:
            state = self.delta[state][c]
        return state

    def run(self, w: Word) -> int:
        return self.step(self.initial, w)

    def accepts(self, w: Word) -> bool:
        return self.run(w) in self.accepting


@dataclass(frozen=True)
class MooreMachine:
    """Complete DFA whose states carry Grundy labels."""

    alphabet: Alphabet
    delta: tuple[tuple[int, ...], ...]
    initial: int
    labels: tuple[int, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        Dfa(self.alphabet, self.delta, self.initial, frozenset())
        if len(self.labels) != len(self.delta):
            raise ValueError("one label per state required")
        if any(g < 0 for g in self.labels):
            raise ValueError("labels must be naturals")

    @property
    def n_states(self) -> int:
        return len(self.delta)

    @property
    def max_label(self) -> int:
        return max(self.labels)

    def name(self, state: int) -> str:
        return self.names[state] if self.names else f"s{state}"

    def state_named(self, name: str) -> int:
        if self.names and name in self.names:
            return self.names.index(name)
        if name.startswith("s") and name[1:].isdigit():
            return int(name[1:])
        raise KeyError(name)

    def run(self, w: Word) -> tuple[int, int]:
        state = self.initial
        for c in w:
            state = self.delta[state][c]
        return state, self.labels[state]

    def label(self, w: Word) -> int:
        return self.run(w)[1]


class Nfa:
    """NFA with epsilon edges (symbol ``None``)."""

    def __init__(self, alphabet: Alphabet, n_states: int = 0, initial=(), accepting=()):
        self.alphabet = alphabet
        self.n_states = n_states
        self.initial = set(initial)
        self.accepting = set(accepting)
        self.edges: dict[tuple[int, int | None], set[int]] = {}

    def new_state(self) -> int:
        self.n_states += 1
        return self.n_states - 1

    def add_edge(self, src: int, symbol: int | None, dst: int):
        self.edges.setdefault((src, symbol), set()).add(dst)

    def closure(self, states: Iterable[int]) -> frozenset:
        seen = set(states)
        todo = list(seen)
        while todo:
            s = todo.pop()
            for t in self.edges.get((s, None), ()):
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return frozenset(seen)

    def step(self, states: frozenset, symbol: int) -> frozenset:
        out = set()
        for s in states:
            out |= self.edges.get((s, symbol), set())
        return self.closure(out)

    def accepts(self, w: Word) -> bool:
        cur = self.closure(self.initial)
        for c in w:
            cur = self.step(cur, c)
        return bool(cur & self.accepting)


# -- basic constructions ------------------------------------------------------


def run(machine: MooreMachine, w: Word) -> tuple[int, int]:
    return machine.run(w)


def class_dfa(machine: MooreMachine, i: int) -> Dfa:
    acc = frozenset(s for s, g in enumerate(machine.labels) if g == i)
    return Dfa(machine.alphabet, machine.delta, machine.initial, acc)


def universal_dfa(alphabet: Alphabet) -> Dfa:
    return Dfa(alphabet, (tuple(0 for _ in alphabet.symbols),), 0, frozenset({0}))


def empty_dfa(alphabet: Alphabet) -> Dfa:
    return Dfa(alphabet, (tuple(0 for _ in alphabet.symbols),), 0, frozenset())


def dfa_from_words(alphabet: Alphabet, words: Iterable[Word]) -> Dfa:
    """Trie automaton of a finite language, completed with a sink."""
    trie: list[dict[int, int]] = [{}]
    finals = set()
    for w in words:
        s = 0
        for c in w:
            if c not in trie[s]:
                trie.append({})
                trie[s][c] = len(trie) - 1
            s = trie[s][c]
        finals.add(s)
    sink = len(trie)
    k = len(alphabet)
    delta = [tuple(node.get(c, sink) for c in range(k)) for node in trie]
    delta.append(tuple(sink for _ in range(k)))
    return Dfa(alphabet, tuple(delta), 0, frozenset(finals))


def to_nfa(dfa: Dfa) -> Nfa:
    nfa = Nfa(dfa.alphabet, dfa.n_states, {dfa.initial}, dfa.accepting)
    for s, row in enumerate(dfa.delta):
        for c, t in enumerate(row):
            nfa.add_edge(s, c, t)
    return nfa


def _bridged(K: Dfa, read: Word, skip: Word) -> Nfa:
    """Words ``x read y`` such that ``x skip y`` is accepted by ``K``.

    States ``0..n-1`` are ``K`` before the bridge, ``n..2n-1`` after it.  A
    bridge leaves pre-state ``s``, reads ``read`` and lands on post-state
    ``delta*(s, skip)``; it is the only way from the first copy to the second,
    so every accepted word crosses exactly one bridge.
    """
    n = K.n_states
    nfa = Nfa(K.alphabet, 2 * n, {K.initial}, {f + n for f in K.accepting})
    for s, row in enumerate(K.delta):
        for c, t in enumerate(row):
            nfa.add_edge(s, c, t)
            nfa.add_edge(s + n, c, t + n)
    for s in range(n):
        target = K.step(s, skip) + n
        cur = s
        if not read:
            nfa.add_edge(cur, None, target)
            continue
        for c in read[:-1]:
            nxt = nfa.new_state()
            nfa.add_edge(cur, c, nxt)
            cur = nxt
        nfa.add_edge(cur, read[-1], target)
    return nfa


def one_step_image(K: Dfa, rule: RewriteRule) -> Nfa:
    """``{x rhs y : x lhs y in L(K)}``."""
    return _bridged(K, rule.rhs, rule.lhs)


def one_step_preimage(K: Dfa, rule: RewriteRule) -> Nfa:
    """``{x lhs y : x rhs y in L(K)}``."""
    return _bridged(K, rule.lhs, rule.rhs)


def nfa_union(nfas: list[Nfa]) -> Nfa:
    if not nfas:
        raise ValueError("empty union")
    out = Nfa(nfas[0].alphabet)
    for nfa in nfas:
        off = out.n_states
        out.n_states += nfa.n_states
        out.initial |= {s + off for s in nfa.initial}
        out.accepting |= {s + off for s in nfa.accepting}
        for (s, c), dsts in nfa.edges.items():
            for t in dsts:
                out.add_edge(s + off, c, t + off)
    return out


# -- regular operations -----------------------------------------------------------


def determinize(nfa: Nfa, state_budget: int = DEFAULT_STATE_BUDGET) -> Dfa:
    """Subset construction over reachable subsets only."""
    start = nfa.closure(nfa.initial)
    index = {start: 0}
    order = [start]
    delta = []
    k = len(nfa.alphabet)
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for c in range(k):
            nxt = nfa.step(cur, c)
            if nxt not in index:
                if len(order) >= state_budget:
                    raise StateBudgetError(f"determinization exceeded {state_budget} states")
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        delta.append(tuple(row))
        i += 1
    acc = frozenset(j for j, sub in enumerate(order) if sub & nfa.accepting)
    return Dfa(nfa.alphabet, tuple(delta), 0, acc)


def complement(dfa: Dfa) -> Dfa:
    return Dfa(dfa.alphabet, dfa.delta, dfa.initial, frozenset(range(dfa.n_states)) - dfa.accepting)


def _product(a: Dfa, b: Dfa, accept, state_budget: int) -> Dfa:
    if a.alphabet != b.alphabet:
        raise ValueError("alphabets differ")
    start = (a.initial, b.initial)
    index = {start: 0}
    order = [start]
    delta = []
    k = len(a.alphabet)
    i = 0
    while i < len(order):
        p, q = order[i]
        row = []
        for c in range(k):
            nxt = (a.delta[p][c], b.delta[q][c])
            if nxt not in index:
                if len(order) >= state_budget:
                    raise StateBudgetError(f"product exceeded {state_budget} states")
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        delta.append(tuple(row))
        i += 1
    acc = frozenset(j for j, (p, q) in enumerate(order) if accept(p in a.accepting, q in b.accepting))
    return Dfa(a.alphabet, tuple(delta), 0, acc)


def intersect(a: Dfa, b: Dfa, state_budget: int = DEFAULT_STATE_BUDGET) -> Dfa:
    return _product(a, b, lambda x, y: x and y, state_budget)


def difference(a: Dfa, b: Dfa, state_budget: int = DEFAULT_STATE_BUDGET) -> Dfa:
    return _product(a, b, lambda x, y: x and not y, state_budget)


def union(a: Dfa, b: Dfa, state_budget: int = DEFAULT_STATE_BUDGET) -> Dfa:
    return _product(a, b, lambda x, y: x or y, state_budget)


def shortest_member(dfa: Dfa) -> Word | None:
    """Length-lexicographically least accepted word, or None."""
    if dfa.initial in dfa.accepting:
        return b""
    parent: dict[int, tuple[int, int]] = {dfa.initial: (-1, -1)}
    queue = deque([dfa.initial])
    while queue:
        s = queue.popleft()
        for c, t in enumerate(dfa.delta[s]):
            if t in parent:
                continue
            parent[t] = (s, c)
            if t in dfa.accepting:
                out = []
                while t != dfa.initial:
                    t, c = parent[t]
                    out.append(c)
                return bytes(reversed(out))
            queue.append(t)
    return None


def is_empty(dfa: Dfa) -> bool:
    return shortest_member(dfa) is None


def _reachable(delta, initial) -> list[int]:
    seen = {initial}
    order = [initial]
    for s in order:
        for t in delta[s]:
            if t not in seen:
                seen.add(t)
                order.append(t)
    return order


def _refine(delta, states, initial_blocks):
    """Partition refinement; returns state -> block id."""
    block = dict(initial_blocks)
    while True:
        sigs = {s: (block[s],) + tuple(block[t] for t in delta[s]) for s in states}
        ids: dict = {}
        new = {s: ids.setdefault(sigs[s], len(ids)) for s in states}
        if len(ids) == len(set(block.values())):
            return new
        block = new


def _quotient(delta, initial, block):
    """Rebuild transitions on blocks, numbering blocks in BFS order from the initial one."""
    order = []
    number = {}
    rep = {}
    queue = deque([initial])
    number[block[initial]] = 0
    rep[0] = initial
    while queue:
        s = queue.popleft()
        for t in delta[s]:
            b = block[t]
            if b not in number:
                number[b] = len(number)
                rep[number[b]] = t
                queue.append(t)
    new_delta = []
    for i in range(len(number)):
        s = rep[i]
        new_delta.append(tuple(number[block[t]] for t in delta[s]))
        order.append(s)
    return tuple(new_delta), order


def minimize(dfa: Dfa) -> Dfa:
    states = _reachable(dfa.delta, dfa.initial)
    block = _refine(dfa.delta, states, {s: int(s in dfa.accepting) for s in states})
    delta, reps = _quotient(dfa.delta, dfa.initial, block)
    acc = frozenset(i for i, s in enumerate(reps) if s in dfa.accepting)
    return Dfa(dfa.alphabet, delta, 0, acc)


def minimize_moore(machine: MooreMachine) -> MooreMachine:
    states = _reachable(machine.delta, machine.initial)
    block = _refine(machine.delta, states, {s: machine.labels[s] for s in states})
    delta, reps = _quotient(machine.delta, machine.initial, block)
    names = tuple(machine.name(s) for s in reps) if machine.names else None
    return MooreMachine(machine.alphabet, delta, 0, tuple(machine.labels[s] for s in reps), names)


def moore_isomorphism(m1: MooreMachine, m2: MooreMachine) -> dict[int, int] | None:
    """State bijection preserving initial state, labels and transitions, or None."""
    if m1.alphabet != m2.alphabet or m1.n_states != m2.n_states:
        return None
    iso = {m1.initial: m2.initial}
    queue = deque([m1.initial])
    while queue:
        s = queue.popleft()
        t = iso[s]
        if m1.labels[s] != m2.labels[t]:
            return None
        for s2, t2 in zip(m1.delta[s], m2.delta[t]):
            if s2 in iso:
                if iso[s2] != t2:
                    return None
            else:
                iso[s2] = t2
                queue.append(s2)
    if len(set(iso.values())) != len(iso) or len(iso) != m1.n_states:
        return None
    return iso


# -- certificate verification ---------------------------------------------------------


@dataclass(frozen=True)
class Failure:
    kind: str  # "stability" or "absorption"
    i: int
    j: int | None
    witness: Word


@dataclass
class VerificationReport:
    verdict: str  # "Verified" or "Failed"
    failures: list[Failure] = field(default_factory=list)
    alphabet: Alphabet | None = None

    @property
    def verified(self) -> bool:
        return self.verdict == "Verified"

    def to_dict(self) -> dict:
        fmt = self.alphabet.format if self.alphabet else (lambda w: w.hex())
        return {
            "verdict": self.verdict,
            "failures": [
                {"kind": f.kind, "i": f.i, "j": f.j, "witness": fmt(f.witness)} for f in self.failures
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, alphabet: Alphabet) -> "VerificationReport":
        failures = [
            Failure(f["kind"], f["i"], f["j"], alphabet.word(f["witness"])) for f in data["failures"]
        ]
        return cls(data["verdict"], failures, alphabet)


class _SuccessorTracker:
    """Deterministic automaton reading ``w`` and tracking the machine's states on
    every one-step rewrite of ``w``.

    A state is ``(q, post, pending)``: ``q`` is the machine state on the prefix
    read so far, ``post`` the bitmask of machine states reached on prefixes in
    which one lhs occurrence was already replaced by its rhs, and ``pending``
    the partial lhs matches ``(rule, matched, state before the match)``.  At
    the end of ``w`` the labels of ``post`` are exactly the labels of the
    successors of ``w``.  This is the subset construction of the union of the
    one-step preimages of all classes, with the post-bridge copies shared
    between rules and classes, which keeps it at most ``n * 2**n`` subsets
    (times the pending matches).
    """

    def __init__(self, system: RewriteSystem, machine: MooreMachine):
        self.machine = machine
        self.k = len(machine.alphabet)
        self.rules = [(r.lhs, r.rhs) for r in system.rules]
        # landing[r][s]: machine state after reading rule r's rhs from s
        self.landing = []
        for lhs, rhs in self.rules:
            row = []
            for st in range(machine.n_states):
                for c in rhs:
                    st = machine.delta[st][c]
                row.append(st)
            self.landing.append(row)
        self.initial = (machine.initial, 0, ())

    def step(self, state, c: int):
        q, post, pending = state
        delta = self.machine.delta
        new_post = 0
        m = post
        while m:
            low = m & -m
            new_post |= 1 << delta[low.bit_length() - 1][c]
            m ^= low
        nxt = []
        for r, k, s in pending + tuple((r, 0, q) for r in range(len(self.rules))):
            lhs = self.rules[r][0]
            if lhs[k] != c:
                continue
            if k + 1 == len(lhs):
                new_post |= 1 << self.landing[r][s]
            else:
                nxt.append((r, k + 1, s))
        return delta[q][c], new_post, tuple(sorted(nxt))

    def labels(self, post: int) -> set:
        out = set()
        while post:
            low = post & -post
            out.add(self.machine.labels[low.bit_length() - 1])
            post ^= low
        return out


def verify_grundy_moore(
    system: RewriteSystem,
    machine: MooreMachine,
    state_budget: int = DEFAULT_STATE_BUDGET,
    *,
    stop_at_first: bool = False,
) -> VerificationReport:
    """Decide whether the machine's labels are the Grundy values of ``system``.

    Stability of class ``i`` fails iff some word of ``M_i`` has a move into
    ``M_i`` (the one-step image of ``M_i`` meets ``M_i``).  Absorption
    ``(i, j)`` fails iff some word of ``M_i`` has no move into ``M_j`` (``M_i``
    is not covered by the one-step preimage of ``M_j``).  All conditions are
    decided by one breadth-first search over the successor-tracking automaton;
    each witness is the length-lex least offending word.  ``stop_at_first``
    ends the search at the first failure.
    """
    if machine.alphabet != system.alphabet:
        raise ValueError("machine and system alphabets differ")
    tracker = _SuccessorTracker(system, machine)
    found: dict = {}

    def inspect(state, word_of):
        q, post, _ = state
        i = machine.labels[q]
        succ = tracker.labels(post)
        if i in succ and ("stability", i, None) not in found:
            found[("stability", i, None)] = word_of()
        for j in range(i):
            if j not in succ and ("absorption", i, j) not in found:
                found[("absorption", i, j)] = word_of()

    parent = {tracker.initial: None}

    def word_of(node):
        def build():
            out = []
            cur = node
            while parent[cur] is not None:
                cur, sym = parent[cur]
                out.append(sym)
            return bytes(reversed(out))
        return build

    queue = deque([tracker.initial])
    inspect(tracker.initial, word_of(tracker.initial))
    while queue and not (stop_at_first and found):
        cur = queue.popleft()
        for c in range(tracker.k):
            nxt = tracker.step(cur, c)
            if nxt in parent:
                continue
            if len(parent) >= state_budget:
                raise StateBudgetError(f"certificate search exceeded {state_budget} states")
            parent[nxt] = (cur, c)
            inspect(nxt, word_of(nxt))
            queue.append(nxt)
    order = {"stability": 0, "absorption": 1}
    failures = [Failure(kind, i, j, w) for (kind, i, j), w in
                sorted(found.items(), key=lambda kv: (order[kv[0][0]], kv[0][1], kv[0][2] or 0))]
    return VerificationReport("Failed" if failures else "Verified", failures, system.alphabet)


# -- file formats -------------------------------------------------------------------


def parse_moore(text: str) -> MooreMachine:
    """Parse the line-oriented Moore format.

    ``alphabet: ab``, ``states: n``, ``initial: s0``, ``s<i> label=<g>`` and
    ``s<i> --<symbol>--> s<j>``.  A trailing ``# name`` on a label line names
    the state.
    """
    import re

    alphabet = None
    n = None
    initial = None
    labels: dict[int, int] = {}
    names: dict[int, str] = {}
    edges: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line, _, comment = raw.partition("#")
        line = line.strip()
        if not line:
            continue
        try:
            if m := re.fullmatch(r"alphabet\s*:\s*(.+)", line):
                body = m.group(1).strip()
                alphabet = Alphabet.of(body.split() if " " in body else body)
            elif m := re.fullmatch(r"states\s*:\s*(\d+)", line):
                n = int(m.group(1))
            elif m := re.fullmatch(r"initial\s*:\s*s(\d+)", line):
                initial = int(m.group(1))
            elif m := re.fullmatch(r"s(\d+)\s+label\s*=\s*(\d+)", line):
                labels[int(m.group(1))] = int(m.group(2))
                if comment.strip():
                    names[int(m.group(1))] = comment.strip()
            elif m := re.fullmatch(r"s(\d+)\s*--(\S+?)-->\s*s(\d+)", line):
                if alphabet is None:
                    raise MooreSyntaxError("transition before alphabet")
                key = (int(m.group(1)), alphabet.index(m.group(2)))
                if key in edges:
                    raise MooreSyntaxError("duplicate transition")
                edges[key] = int(m.group(3))
            else:
                raise MooreSyntaxError(f"cannot parse {line!r}")
        except ValueError as e:
            raise MooreSyntaxError(f"line {lineno}: {e}") from None
    if alphabet is None or n is None or initial is None:
        raise MooreSyntaxError("alphabet, states and initial lines are required")
    if sorted(labels) != list(range(n)):
        raise MooreSyntaxError("every state needs exactly one label")
    delta = []
    for s in range(n):
        row = []
        for c in range(len(alphabet)):
            if (s, c) not in edges:
                raise MooreSyntaxError(f"missing transition s{s} --{alphabet.symbols[c]}-->")
            row.append(edges[(s, c)])
        delta.append(tuple(row))
    name_tuple = tuple(names.get(s, f"s{s}") for s in range(n)) if names else None
    try:
        return MooreMachine(alphabet, tuple(delta), initial, tuple(labels[s] for s in range(n)), name_tuple)
    except ValueError as e:
        raise MooreSyntaxError(str(e)) from None


def dump_moore(machine: MooreMachine) -> str:
    a = machine.alphabet
    lines = [
        f"alphabet: {''.join(a.symbols) if a.single_char else ' '.join(a.symbols)}",
        f"states: {machine.n_states}",
        f"initial: s{machine.initial}",
    ]
    for s, g in enumerate(machine.labels):
        suffix = f"  # {machine.names[s]}" if machine.names else ""
        lines.append(f"s{s} label={g}{suffix}")
    for s, row in enumerate(machine.delta):
        for c, t in enumerate(row):
            lines.append(f"s{s} --{a.symbols[c]}--> s{t}")
    return "\n".join(lines) + "\n"


def to_dot(machine: MooreMachine) -> str:
    lines = ["digraph moore {", "  rankdir=LR;", '  start [shape=point];']
    for s, g in enumerate(machine.labels):
        label = f"{machine.name(s)}\\ng={g}"
        lines.append(f'  s{s} [shape=circle, label="{label}"];')
    lines.append(f"  start -> s{machine.initial};")
    for s, row in enumerate(machine.delta):
        grouped: dict[int, list[str]] = {}
        for c, t in enumerate(row):
            grouped.setdefault(t, []).append(machine.alphabet.symbols[c])
        for t, syms in grouped.items():
            lines.append(f'  s{s} -> s{t} [label="{",".join(syms)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- fixtures --------------------------------------------------------------------

FIXTURES = {
    "fig1": ("a2b.game", "fig1.moore"),
    "fig2": ("a3b.game", "fig2.moore"),
    "fig3": ("a12b.game", "fig3.moore"),
    "fig4": ("a123b.game", "fig4.moore"),
}


def fixture_text(filename: str) -> str:
    return resources.files("rewritegames").joinpath("fixtures").joinpath(filename).read_text(encoding="utf-8")


def load_fixture(name: str) -> tuple[RewriteSystem, MooreMachine]:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
    game_file, moore_file = FIXTURES[name]
    return parse_game(fixture_text(game_file)), parse_moore(fixture_text(moore_file))

