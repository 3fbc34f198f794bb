"""Infer Moore machines from exhaustive Grundy tables and certify them.

Inference merges prefixes that no sampled suffix tells apart (a finite-data
Myhill-Nerode congruence).  On finite data this over-merges sometimes; that is
harmless because every hypothesis is checked with
:func:`~rewritegames.automata.verify_grundy_moore` before it is reported as a
proof.

:class:`MooreMachineClassifier` wraps the same inference in the scikit-learn
estimator protocol (words in, Grundy labels out).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .automata import (
    DEFAULT_STATE_BUDGET,
    StateBudgetError,
    MooreMachine,
    VerificationReport,
    verify_grundy_moore,
)
from .core import Alphabet, RewriteSystem, Word
from .grundy import GrundyTable, build_table_up_to

DEFAULT_CLASS_CAP = 200
DEFAULT_N_MAX = 16


@dataclass(frozen=True)
class Hypothesis:
    machine: MooreMachine
    training_length: int
    merged_from: int


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    failures: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Proven:
    machine: MooreMachine
    n: int
    report: VerificationReport


@dataclass(frozen=True)
class Refuted:
    failures: dict  # n -> VerificationReport of the rejected hypothesis


class _Signatures:
    """Grundy values of ``p . s`` for all suffixes ``s`` up to a depth, read from strata."""

    def __init__(self, table: GrundyTable, n: int):
        self.table = table
        self.n = n
        self.base = table.base

    def values(self, prefix: Word, depth: int) -> np.ndarray:
        r = self.table.rank(prefix)
        parts = []
        for extra in range(depth + 1):
            width = self.base**extra
            parts.append(self.table.strata[len(prefix) + extra][r * width:(r + 1) * width])
        return np.concatenate(parts)

    def compatible(self, p: Word, q: Word) -> bool:
        depth = self.n - max(len(p), len(q))
        if depth < 0:
            return False
        return np.array_equal(self.values(p, depth), self.values(q, depth))


def infer_moore(
    system_or_alphabet,
    n: int,
    table: GrundyTable,
    *,
    class_cap: int = DEFAULT_CLASS_CAP,
) -> Hypothesis | Inconclusive:
    """Prefix classes under "same Grundy value after every suffix that fits in length n".

    Representatives are discovered breadth first, letters in alphabet order,
    and a new prefix joins the first (length-lex least) compatible
    representative.
    """
    alphabet = system_or_alphabet.alphabet if isinstance(system_or_alphabet, RewriteSystem) else system_or_alphabet
    if table.completed_length is None or table.completed_length < n:
        raise ValueError(f"table is not complete to length {n}")
    sig = _Signatures(table, n)
    reps: list[Word] = [b""]
    delta: list[list[int]] = []
    merged = 1
    i = 0
    while i < len(reps):
        q = reps[i]
        row = []
        for c in range(len(alphabet)):
            p = q + bytes([c])
            if len(p) > n:
                return Inconclusive(f"representative {alphabet.format(q)} has no sampled extension")
            merged += 1
            for j, r in enumerate(reps):
                if sig.compatible(p, r):
                    row.append(j)
                    break
            else:
                if len(reps) >= class_cap:
                    return Inconclusive(f"more than {class_cap} prefix classes")
                reps.append(p)
                row.append(len(reps) - 1)
        delta.append(row)
        i += 1
    labels = tuple(table[r] for r in reps)
    names = tuple(alphabet.format(r) for r in reps)
    machine = MooreMachine(alphabet, tuple(tuple(r) for r in delta), 0, labels, names)
    # consistency with the training data
    for length in range(n + 1):
        stratum = table.strata[length]
        for rank in range(len(stratum)):
            w = table.unrank(rank, length)
            if machine.label(w) != stratum[rank]:
                return Inconclusive(f"hypothesis disagrees with training data at {alphabet.format(w)}")
    return Hypothesis(machine, n, merged)


def synthesize_and_verify(
    system: RewriteSystem,
    n_start: int,
    n_max: int = DEFAULT_N_MAX,
    *,
    class_cap: int = DEFAULT_CLASS_CAP,
    state_budget: int = DEFAULT_STATE_BUDGET,
    table: GrundyTable | None = None,
    log=None,
) -> Proven | Refuted | Inconclusive:
    """Grow the training length until a hypothesis passes certification.

    Returns :class:`Refuted` when every hypothesis produced was rejected by
    certification and :class:`Inconclusive` when no hypothesis could be built
    at some length (or none at all).
    """
    table = build_table_up_to(system, n_max, table)
    failures: dict = {}
    reasons = []
    for n in range(n_start, n_max + 1):
        hyp = infer_moore(system, n, table, class_cap=class_cap)
        if isinstance(hyp, Inconclusive):
            reasons.append(f"n={n}: {hyp.reason}")
            if log:
                log(f"n={n}: inconclusive ({hyp.reason})")
            continue
        try:
            report = verify_grundy_moore(system, hyp.machine, state_budget, stop_at_first=True)
        except StateBudgetError as e:
            reasons.append(f"n={n}: certification aborted ({e})")
            if log:
                log(f"n={n}: {hyp.machine.n_states} states, certification over budget")
            continue
        if log:
            log(f"n={n}: {hyp.machine.n_states} states, {report.verdict}")
        if report.verified:
            return Proven(hyp.machine, n, report)
        failures[n] = report
    if failures and not reasons:
        return Refuted(failures)
    return Inconclusive("; ".join(reasons) or "no hypothesis", failures)


class MooreMachineClassifier(ClassifierMixin, BaseEstimator):
    """Predict Grundy values of words with an inferred Moore machine.

    ``fit(X, y)`` takes words (strings over ``alphabet``) and their Grundy
    values.  The sample must contain every word up to some length; the longest
    such length is the training length.  Pass ``system`` to certify the
    inferred machine; ``certified_`` then records the verdict.

    Parameters
    ----------
    alphabet : str, default="ab"
    system : RewriteSystem or None, default=None
    class_cap : int, default=200
    """

    def __init__(self, alphabet="ab", system=None, class_cap=DEFAULT_CLASS_CAP):
        self.alphabet = alphabet
        self.system = system
        self.class_cap = class_cap

    def _alphabet(self) -> Alphabet:
        return self.alphabet if isinstance(self.alphabet, Alphabet) else Alphabet.of(self.alphabet)

    def _encode(self, X) -> list[Word]:
        alphabet = self._alphabet()
        if isinstance(X, str):
            raise TypeError("X must be a sequence of words, not a single string")
        return [alphabet.word(x) for x in X]

    def fit(self, X, y):
        words = self._encode(X)
        y = np.asarray(y)
        if y.ndim != 1 or len(y) != len(words):
            raise ValueError("X and y must have the same length")
        if np.any(y < 0):
            raise ValueError("Grundy labels are naturals")
        alphabet = self._alphabet()
        data = dict(zip(words, y.tolist()))
        table = GrundyTable(alphabet)
        base = len(alphabet)
        length = 0
        while True:
            size = base**length
            stratum = np.zeros(size, dtype=np.uint8)
            for r in range(size):
                w = table.unrank(r, length)
                if w not in data:
                    break
                stratum[r] = data[w]
            else:
                table.strata.append(stratum)
                length += 1
                continue
            break
        if not table.strata:
            raise ValueError("training data must contain the empty word")
        self.training_length_ = len(table.strata) - 1
        hyp = infer_moore(alphabet, self.training_length_, table, class_cap=self.class_cap)
        if isinstance(hyp, Inconclusive):
            raise ValueError(f"no consistent machine: {hyp.reason}")
        self.machine_ = hyp.machine
        self.classes_ = np.unique(y)
        self.certified_ = None
        if self.system is not None:
            self.certified_ = verify_grundy_moore(self.system, self.machine_).verified
        return self

    def predict(self, X):
        check_is_fitted(self, "machine_")
        return np.array([self.machine_.label(w) for w in self._encode(X)])
