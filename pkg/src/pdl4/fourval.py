"""Belnap's four-valued algebra: the two negations, the truth-order lattice
operations, implication, and the designated-value test.

All tables are generated from the order relation rather than written as
conditionals, so they can be audited directly against the bilattice:
along the truth order F is bottom, T is top, and B and N sit between,
incomparable with each other; along the knowledge order N is bottom and
B is top.  Everything here is a pure function over an enum and safe for
unrestricted concurrent use.
"""
from __future__ import annotations

import enum
from itertools import product


class FourValue(enum.Enum):
    T = "t"
    F = "f"
    B = "b"
    N = "n"

    def __repr__(self) -> str:
        return self.value

    def __str__(self) -> str:
        return self.value


_T, _F, _B, _N = FourValue.T, FourValue.F, FourValue.B, FourValue.N

VALUES: tuple[FourValue, ...] = (_T, _F, _B, _N)

# Reflexive order relations as pair sets.  Truth order: f < b,n < t.
# Knowledge order: n < t,f < b (carried for documentation and tests only).
LEQ_T: frozenset[tuple[FourValue, FourValue]] = frozenset(
    {(v, v) for v in VALUES}
    | {(_F, _B), (_F, _N), (_F, _T), (_B, _T), (_N, _T)}
)
LEQ_K: frozenset[tuple[FourValue, FourValue]] = frozenset(
    {(v, v) for v in VALUES}
    | {(_N, _T), (_N, _F), (_N, _B), (_T, _B), (_F, _B)}
)


def leq_t(x: FourValue, y: FourValue) -> bool:
    return (x, y) in LEQ_T


def leq_k(x: FourValue, y: FourValue) -> bool:
    return (x, y) in LEQ_K


def _bound(x: FourValue, y: FourValue, upper: bool) -> FourValue:
    if upper:
        candidates = [z for z in VALUES if leq_t(x, z) and leq_t(y, z)]
        least = [z for z in candidates if all(leq_t(z, c) for c in candidates)]
    else:
        candidates = [z for z in VALUES if leq_t(z, x) and leq_t(z, y)]
        least = [z for z in candidates if all(leq_t(c, z) for c in candidates)]
    assert len(least) == 1, "truth order must be a lattice"
    return least[0]


NEG4: dict[FourValue, FourValue] = {_T: _F, _F: _T, _B: _B, _N: _N}
CNEG4: dict[FourValue, FourValue] = {_T: _F, _F: _T, _B: _N, _N: _B}
MEET_T: dict[tuple[FourValue, FourValue], FourValue] = {
    (x, y): _bound(x, y, upper=False) for x, y in product(VALUES, VALUES)
}
JOIN_T: dict[tuple[FourValue, FourValue], FourValue] = {
    (x, y): _bound(x, y, upper=True) for x, y in product(VALUES, VALUES)
}
IMP4: dict[tuple[FourValue, FourValue], FourValue] = {
    (x, y): JOIN_T[(CNEG4[x], y)] for x, y in product(VALUES, VALUES)
}


def neg4(v: FourValue) -> FourValue:
    """Paraconsistent negation: swaps t and f, fixes b and n."""
    return NEG4[v]


def cneg4(v: FourValue) -> FourValue:
    """Classical negation: swaps t and f, and swaps b and n."""
    return CNEG4[v]


def meet_t(x: FourValue, y: FourValue) -> FourValue:
    """Infimum in the truth order (conjunction)."""
    return MEET_T[(x, y)]


def join_t(x: FourValue, y: FourValue) -> FourValue:
    """Supremum in the truth order (disjunction)."""
    return JOIN_T[(x, y)]


def imp4(x: FourValue, y: FourValue) -> FourValue:
    """Implication: the join of the classical negation of x with y."""
    return IMP4[(x, y)]


def designated(v: FourValue) -> bool:
    """Whether v counts as satisfied: t and b are designated."""
    return v is _T or v is _B
