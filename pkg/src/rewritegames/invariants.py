"""Closed-form Grundy and outcome formulas for taking-and-merging games on {a, b}.

Every formula takes a plain string over ``"ab"``.  :data:`FORMULAS` is the
registry used by :func:`crosscheck` and the command line; each entry knows the
game family it is valid for.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

from .core import RewriteSystem, erasure_lengths
from .grundy import GrundyTable, Outcome, build_table_up_to


@dataclass(frozen=True)
class BlockProfile:
    k: int
    residues: tuple[int, ...]
    alpha: dict
    last_residue: int


@dataclass(frozen=True)
class Triplet:
    bits: tuple[int, int, int]

    def __str__(self):
        return "".join(map(str, self.bits))


def _check_ab(w: str):
    if set(w) - {"a", "b"}:
        raise ValueError(f"word {w!r} is not over {{a,b}}")


def block_profile(w: str, m: int) -> BlockProfile:
    """Split ``w = a^i0 b a^i1 ... b a^ik`` and reduce block lengths mod ``m``."""
    _check_ab(w)
    if m < 2:
        raise ValueError("modulus must be at least 2")
    blocks = [len(x) for x in w.split("b")]
    residues = tuple(i % m for i in blocks)
    alpha = {r: residues.count(r) for r in range(1, m)}
    return BlockProfile(len(blocks) - 1, residues, alpha, residues[-1])


def s_a2b(w: str) -> int:
    _check_ab(w)
    return (w.count("a") - 2 * w.count("b")) % 4


def grundy_a2b(w: str) -> int:
    """Game {a^2, b}."""
    return 0 if s_a2b(w) in (0, 1) else 1


def grundy_a_odd_b(w: str, system: RewriteSystem | None = None) -> int:
    """Games containing a and b erasures plus any odd-length single-letter erasures.

    Passing ``system`` checks that it belongs to this family.
    """
    if system is not None and not _family_odd(system):
        raise FamilyError("system is not {a, b} plus odd-length erasures")
    _check_ab(w)
    return len(w) % 2


_AA2B = {0: 0, 2: 1, 1: 2, 3: 3}


def s_aa2b(w: str) -> int:
    p = block_profile(w, 3)
    return (2 * p.k + 2 * p.alpha[1] + p.alpha[2]) % 4


def grundy_aa2b(w: str) -> int:
    """Game {a, a^2, b}."""
    return _AA2B[s_aa2b(w)]


_A123B = {
    (0, 0, 0): 0, (1, 1, 1): 0,
    (0, 1, 1): 1, (1, 0, 0): 1,
    (0, 1, 0): 2, (1, 0, 1): 2,
    (0, 0, 1): 3, (1, 1, 0): 3,
}


def triplet_a123b(w: str) -> Triplet:
    p = block_profile(w, 4)
    return Triplet(((p.k + p.alpha[1]) % 2, p.alpha[2] % 2, p.alpha[3] % 2))


def grundy_a123b(w: str) -> int:
    """Game {a, a^2, a^3, b}."""
    return _A123B[triplet_a123b(w).bits]


def p_test_a12b12(w: str) -> Outcome:
    """Game {a, a^2, b, b^2}: P-positions are |w|_a = |w|_b (mod 3)."""
    _check_ab(w)
    return Outcome.P if (w.count("a") - w.count("b")) % 3 == 0 else Outcome.N


def grundy_akb(k: int, w: str) -> int:
    """Game {a^k, b}: the number of moves is forced."""
    _check_ab(w)
    if k < 1:
        raise ValueError("k must be positive")
    return (w.count("b") + w.count("a") // k) % 2


# -- family predicates ------------------------------------------------------

def _ab_lengths(system: RewriteSystem):
    if system.alphabet.symbols != ("a", "b"):
        return None
    lengths = erasure_lengths(system)
    if lengths is None:
        return None
    return lengths.get(0, []), lengths.get(1, [])


def _family_exact(a, b):
    def check(system):
        got = _ab_lengths(system)
        return got is not None and got == (sorted(a), sorted(b))
    return check


def _family_odd(system):
    got = _ab_lengths(system)
    if got is None:
        return False
    a, b = got
    return 1 in a and 1 in b and all(k % 2 for k in a + b)


@dataclass(frozen=True)
class Formula:
    name: str
    func: Callable[[str], Union[int, Outcome]]
    family: Callable[[RewriteSystem], bool]
    family_doc: str
    kind: str  # "grundy", "outcome", or "invariant"


FORMULAS: dict[str, Formula] = {
    "s-a2b": Formula("s-a2b", s_a2b, _family_exact([2], [1]), "{a^2,b}", "invariant"),
    "g-a2b": Formula("g-a2b", grundy_a2b, _family_exact([2], [1]), "{a^2,b}", "grundy"),
    "g-aoddb": Formula("g-aoddb", grundy_a_odd_b, _family_odd, "{a,b} plus odd erasures", "grundy"),
    "g-aa2b": Formula("g-aa2b", grundy_aa2b, _family_exact([1, 2], [1]), "{a,a^2,b}", "grundy"),
    "g-a123b": Formula("g-a123b", grundy_a123b, _family_exact([1, 2, 3], [1]), "{a,a^2,a^3,b}", "grundy"),
    "p-a12b12": Formula("p-a12b12", p_test_a12b12, _family_exact([1, 2], [1, 2]), "{a,a^2,b,b^2}", "outcome"),
}


def get_formula(formula_id: str) -> Formula:
    """Look up a registry entry; ``g-akb:<k>`` is instantiated on demand."""
    if formula_id in FORMULAS:
        return FORMULAS[formula_id]
    if formula_id.startswith("g-akb:"):
        try:
            k = int(formula_id.split(":", 1)[1])
        except ValueError:
            raise KeyError(formula_id) from None
        if k < 2:
            raise KeyError(f"{formula_id}: k must be > 1")
        return Formula(formula_id, lambda w, k=k: grundy_akb(k, w), _family_exact([k], [1]), f"{{a^{k},b}}", "grundy")
    raise KeyError(f"unknown formula {formula_id!r}")


@dataclass(frozen=True)
class Ok:
    checked: int

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Mismatch:
    word: str
    expected: object
    got: object

    def __bool__(self):
        return False


class FamilyError(ValueError):
    """Formula applied to a game outside its family."""


def crosscheck(
    system: RewriteSystem,
    formula_id: str,
    n: int,
    table: GrundyTable | None = None,
    *,
    check_family: bool = True,
) -> Ok | Mismatch:
    """Compare a closed form with the exact engine on every word of length <= n.

    ``expected`` in a mismatch is the exact engine's answer, ``got`` the
    formula's.  ``check_family=False`` runs a formula on a foreign game, which
    is only meaningful as a negative control.
    """
    formula = get_formula(formula_id)
    if formula.kind == "invariant":
        raise FamilyError(f"{formula_id} is an invariant, not a Grundy or outcome formula")
    if system.alphabet.symbols != ("a", "b"):
        raise FamilyError("closed forms are stated over the alphabet ab")
    if check_family and not formula.family(system):
        raise FamilyError(f"{formula_id} applies to {formula.family_doc} only")
    table = build_table_up_to(system, n, table)
    checked = 0
    for w, g in table.items():
        if len(w) > n:
            break
        text = system.format(w) if w else ""
        value = formula.func(text)
        exact = g if formula.kind == "grundy" else (Outcome.P if g == 0 else Outcome.N)
        if value != exact:
            return Mismatch(text or "eps", exact, value)
        checked += 1
    return Ok(checked)
