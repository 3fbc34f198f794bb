"""Rewrite game simulating a deterministic Turing machine on the empty word.

Positions carry the tape, one state symbol, padding symbols ``#`` and one head
symbol among ``>A``, ``>B``, ``<A``, ``<B``.  The letter says whose turn it
is, the arrow which side of the state the scanned cell is on.  Every
reduction consumes padding, so the game is strongly terminating; from a
starting word every position has at most one move, and player A wins exactly
when the machine halts before the padding runs out.

Rule kinds are ``left-shift``, ``right-shift``, ``left-transition``,
``right-transition`` (named after the direction the machine head moves) and
``halting``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

from .core import Alphabet, GameSyntaxError, RewriteRule, RewriteSystem, Word, moves
from .invariants import Mismatch, Ok

LEFT_MARK = "$"
BLANK = "_"
PAD = "#"
RA, RB, LA, LB = ">A", ">B", "<A", "<B"
HEADS = (RA, RB, LA, LB)
RESERVED = (PAD,) + HEADS

DEFAULT_STEP_BUDGET = 10**5


class NonUniqueMove(RuntimeError):
    """Two different moves apply to a position of a forced run."""

    def __init__(self, position: str, options: list[str]):
        self.position = position
        self.options = options
        super().__init__(f"{len(options)} moves from {position}: {', '.join(options)}")


class MalformedPosition(ValueError):
    pass


@dataclass(frozen=True)
class TuringMachine:
    states: tuple[str, ...]
    initial: str
    accept: str
    reject: str | None
    tape: tuple[str, ...]
    # (state, read) -> (state, write, "L" | "R")
    delta: dict = field(hash=False)

    def __post_init__(self):
        states, tape = tuple(self.states), tuple(self.tape)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "tape", tape)
        if len(set(states)) != len(states) or len(set(tape)) != len(tape):
            raise GameSyntaxError("duplicate state or tape symbol")
        if LEFT_MARK not in tape or BLANK not in tape:
            raise GameSyntaxError(f"tape alphabet must contain {LEFT_MARK!r} and {BLANK!r}")
        clash = (set(states) & set(tape)) | ((set(states) | set(tape)) & set(RESERVED))
        if clash:
            raise GameSyntaxError(f"symbols used twice or reserved: {sorted(clash)}")
        for q in (self.initial, self.accept) + ((self.reject,) if self.reject else ()):
            if q not in states:
                raise GameSyntaxError(f"unknown state {q!r}")
        for (p, a), (q, b, d) in self.delta.items():
            if p not in states or q not in states or a not in tape or b not in tape:
                raise GameSyntaxError(f"transition {p} {a} -> {q} {b} {d} uses unknown symbols")
            if p in self.halting:
                raise GameSyntaxError(f"transition out of halting state {p!r}")
            if d not in ("L", "R"):
                raise GameSyntaxError(f"direction must be L or R, got {d!r}")
            if a == LEFT_MARK and (b != LEFT_MARK or d != "R"):
                raise GameSyntaxError(f"transition on {LEFT_MARK} from {p!r} must rewrite {LEFT_MARK} and move right")
            if a != LEFT_MARK and b == LEFT_MARK:
                raise GameSyntaxError(f"only {LEFT_MARK} may be rewritten to {LEFT_MARK}")

    @property
    def halting(self) -> frozenset:
        return frozenset(q for q in (self.accept, self.reject) if q)


def parse_tm(text: str) -> TuringMachine:
    """Read the line format ``states:``, ``initial:``, ``accept:``, ``reject:``,
    ``tape:`` and ``delta p a -> q b R|L``.  Lines starting with ``//`` are comments."""
    header: dict[str, list[str]] = {}
    delta = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        if line.startswith("delta"):
            parts = line.split()
            if len(parts) != 7 or parts[3] != "->":
                raise GameSyntaxError("expected 'delta p a -> q b R|L'", lineno)
            _, p, a, _, q, b, d = parts
            if (p, a) in delta:
                raise GameSyntaxError(f"second transition for ({p}, {a}): machine must be deterministic", lineno)
            delta[(p, a)] = (q, b, d.upper())
            continue
        key, sep, rest = line.partition(":")
        if not sep or key.strip() not in ("states", "initial", "accept", "reject", "tape"):
            raise GameSyntaxError(f"unrecognized line {line!r}", lineno)
        header[key.strip()] = rest.split()
    for key in ("states", "initial", "accept", "tape"):
        if key not in header:
            raise GameSyntaxError(f"missing '{key}:' line")
    single = {}
    for key in ("initial", "accept", "reject"):
        vals = header.get(key, [])
        if len(vals) > 1:
            raise GameSyntaxError(f"'{key}:' takes one state")
        single[key] = vals[0] if vals else None
    return TuringMachine(tuple(header["states"]), single["initial"], single["accept"], single["reject"],
                         tuple(header["tape"]), delta)


def load_tm(path) -> TuringMachine:
    return parse_tm(Path(path).read_text())


# -- direct simulation ---------------------------------------------------------

@dataclass(frozen=True)
class Configuration:
    state: str
    tape: tuple[str, ...]  # trailing blanks stripped
    head: int

    def __str__(self):
        cells = list(self.tape) + [BLANK] * max(0, self.head + 1 - len(self.tape))
        cells[self.head] = f"({cells[self.head]})"
        return f"{self.state}: {' '.join(cells)}"


def _strip(tape) -> tuple[str, ...]:
    tape = list(tape)
    while tape and tape[-1] == BLANK:
        tape.pop()
    return tuple(tape)


def simulate(machine: TuringMachine, max_steps: int) -> tuple[list[Configuration], bool]:
    """Configurations of the run on the empty word and whether it halted within ``max_steps``."""
    tape = [LEFT_MARK]
    state, head = machine.initial, 0
    out = [Configuration(state, _strip(tape), head)]
    for _ in range(max_steps):
        if state in machine.halting:
            return out, True
        key = (state, tape[head])
        if key not in machine.delta:
            return out, False
        state, tape[head], d = machine.delta[key]
        head += 1 if d == "R" else -1
        if head < 0:
            raise RuntimeError("head fell off the left end of the tape")
        if head == len(tape):
            tape.append(BLANK)
        out.append(Configuration(state, _strip(tape), head))
    return out, state in machine.halting


# -- the game ---------------------------------------------------------------------

@dataclass(frozen=True)
class TuringGame:
    machine: TuringMachine
    system: RewriteSystem
    kinds: tuple[str, ...]  # rule index -> kind
    players: tuple[str, ...]  # rule index -> "A" | "B"

    @property
    def alphabet(self) -> Alphabet:
        return self.system.alphabet

    def word(self, text) -> Word:
        return self.system.word(text)

    def format(self, w: Word) -> str:
        return self.system.format(w)

    def describe(self) -> str:
        lines = []
        for rule, kind, player in zip(self.system.rules, self.kinds, self.players):
            lines.append(f"{kind:16} {player}  {self.format(rule.lhs)} -> {self.format(rule.rhs)}")
        return "\n".join(lines)


def build_game(machine: TuringMachine) -> TuringGame:
    alphabet = Alphabet(machine.states + machine.tape + RESERVED)
    rules: list[tuple[list[str], list[str], str, str]] = []
    P4 = [PAD] * 4
    for q in machine.states:
        rules.append((P4 + [LA, q], [PAD, LB, q, PAD, PAD], "left-shift", "A"))
        rules.append(([PAD, LB, q], [LA, q], "left-shift", "B"))
        rules.append(([q, RA] + P4, [PAD, PAD, q, RB, PAD], "right-shift", "A"))
        rules.append(([q, RB, PAD], [q, RA], "right-shift", "B"))
    for (p, a), (q, c, d) in machine.delta.items():
        if q in machine.halting:
            rules.append(([a, LA, p], [q], "halting", "A"))
            rules.append(([p, RA, a], [q], "halting", "A"))
        elif d == "L":
            rules.append((P4 + [a, LA, p], [PAD, LB, q, PAD, PAD, c], "left-transition", "A"))
            rules.append((P4 + [p, RA, a], [PAD, LB, q, PAD, PAD, c], "left-transition", "A"))
        else:
            rules.append(([a, LA, p] + P4, [c, PAD, PAD, q, RB, PAD], "right-transition", "A"))
            rules.append(([p, RA, a] + P4, [c, PAD, PAD, q, RB, PAD], "right-transition", "A"))
    system = RewriteSystem(
        alphabet,
        tuple(RewriteRule(alphabet.word(lhs), alphabet.word(rhs)) for lhs, rhs, _, _ in rules),
    )
    return TuringGame(machine, system, tuple(r[2] for r in rules), tuple(r[3] for r in rules))


def _game(obj) -> TuringGame:
    return obj if isinstance(obj, TuringGame) else build_game(obj)


def start_word(game, pad=()) -> Word:
    """``$ <A q0`` followed by ``#^n _`` for each ``n`` in ``pad``."""
    game = _game(game)
    tokens = [LEFT_MARK, LA, game.machine.initial]
    for n in pad:
        if n < 0:
            raise ValueError("padding runs are naturals")
        tokens += [PAD] * n + [BLANK]
    return game.alphabet.word(tokens)


def is_start(game, w: Word | str) -> bool:
    """Membership in ``$ <A q0 (# + _)*``."""
    game = _game(game)
    a = game.alphabet
    if isinstance(w, str):
        try:
            w = a.word(w)
        except ValueError:
            return False
    head = a.word([LEFT_MARK, LA, game.machine.initial])
    filler = {a.index(PAD), a.index(BLANK)}
    return w[:3] == head and all(c in filler for c in w[3:])


def canonical_winning_start(game, m: int) -> Word:
    """``$ <A q0 (#^(2^(m+1)) _)^m`` for a machine halting after ``m`` transitions."""
    if m < 0:
        raise ValueError("m must be a natural")
    return start_word(game, [2 ** (m + 1)] * m)


class Verdict(str, enum.Enum):
    A_WINS = "AWins"
    A_LOSES = "ALoses"
    BUDGET_EXCEEDED = "BudgetExceeded"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ForcedRun:
    trace: tuple[Word, ...]
    verdict: Verdict
    reductions: tuple[str, ...]  # rule kinds, one per move
    rule_indices: tuple[int, ...]

    @property
    def n_moves(self) -> int:
        return len(self.trace) - 1


def forced_run(game, w0: Word | str, budget: int = DEFAULT_STEP_BUDGET) -> ForcedRun:
    """Play the unique move until none is left or ``budget`` moves were made."""
    game = _game(game)
    if isinstance(w0, str):
        w0 = game.word(w0)
    if not is_start(game, w0):
        raise ValueError(f"{game.format(w0)} is not a starting position")
    trace, kinds, used = [w0], [], []
    w = w0
    while True:
        options = moves(game.system, w)
        if not options:
            break
        if len({m.result for m in options}) > 1:
            raise NonUniqueMove(game.format(w), [game.format(m.result) for m in options])
        if len(trace) > budget:
            return ForcedRun(tuple(trace), Verdict.BUDGET_EXCEEDED, tuple(kinds), tuple(used))
        move = options[0]
        w = move.result
        trace.append(w)
        kinds.append(game.kinds[move.rule_index])
        used.append(move.rule_index)
    won = bool(kinds) and kinds[-1] == "halting"
    if not won and len(kinds) % 2:
        raise RuntimeError("player B is out of moves after a non-halting reduction")
    return ForcedRun(tuple(trace), Verdict.A_WINS if won else Verdict.A_LOSES, tuple(kinds), tuple(used))


def decode(game, w: Word | str) -> Configuration:
    """State, tape and head of an A-turn position (padding is ignored)."""
    game = _game(game)
    a = game.alphabet
    if isinstance(w, str):
        w = a.word(w)
    symbols = [a.symbols[c] for c in w if a.symbols[c] != PAD]
    states = [s for s in symbols if s in game.machine.states]
    heads = [s for s in symbols if s in HEADS]
    if len(states) != 1:
        raise MalformedPosition(f"expected one state symbol, found {len(states)}")
    if len(heads) != 1 or heads[0] not in (RA, LA):
        raise MalformedPosition("not an A-turn position: need exactly one of >A, <A and no B head")
    j = symbols.index(heads[0])
    tape = [s for s in symbols if s not in game.machine.states and s not in HEADS]
    return Configuration(states[0], _strip(tape), j - 1)


def crosscheck_simulation(machine: TuringMachine, w0: Word | str, budget: int = 100,
                          game: TuringGame | None = None) -> Ok | Mismatch:
    """Decoded A-turn positions must follow the direct simulation step by step.

    Consecutive A-turn positions decode to the same configuration (a shift)
    or to the next one (a transition).  ``game`` overrides ``build_game(machine)``.
    """
    game = game or build_game(machine)
    run = forced_run(game, w0, budget)
    configs, _ = simulate(machine, budget)
    last = len(run.trace) - 1
    if run.verdict is Verdict.A_WINS:
        last -= 1  # the final position has no head symbol
    i = 0
    checked = 0
    for t in range(0, last + 1, 2):
        got = decode(game, run.trace[t])
        if got != configs[i]:
            if i + 1 < len(configs) and got == configs[i + 1]:
                i += 1
            else:
                expected = configs[i + 1] if i + 1 < len(configs) else configs[i]
                return Mismatch(game.format(run.trace[t]), expected, got)
        checked += 1
    return Ok(checked)
