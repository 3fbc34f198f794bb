"""Rewrite games on words: Grundy values, automaton certificates, PDA and
octal encodings, and the Turing-machine reduction for strongly terminating
games."""

from .core import (
    Alphabet,
    Move,
    RewriteRule,
    RewriteSystem,
    erasure_game,
    is_strongly_terminating,
    is_taking_and_merging,
    load_game,
    moves,
    parse_game,
    successor_set,
)
from .grundy import GrundyTable, Outcome, build_table_up_to, grundy, max_grundy_by_length, mex, outcome

__version__ = "0.1.0"
