"""Terminating tableau prover with countermodel extraction.

The prover decides global consequence: to check that a formula follows
from a set of assumptions it saturates a tableau rooted at the
assumptions plus the minus form of the goal.  Branches grow under three
restrictions: duplicate conclusions are dropped, destructive rules fire
at most once per formula per branch, and existential rules (the ones
that create fresh nominals) are blocked on a nominal that is included in
an earlier one.  The inclusion loop-check is what makes saturation
terminate in the presence of iteration programs.

Rule scheduling: non-branching non-destructive rules saturate first,
then destructive non-branching ones, then branching ones, with
existential rules last, each tier through a FIFO agenda.  This keeps
branch counts low and lets the loop-check see a nominal's full statement
set before deciding whether to expand it.

Branches are independent after a split and could be explored
concurrently; this implementation explores them depth first in a single
worker, which makes results (including the extracted countermodel)
deterministic.
"""
from __future__ import annotations

import re
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

from .semantics import Model, globally_satisfies
from .syntax import (
    And,
    At,
    Atomic,
    Bottom,
    Box,
    Choice,
    Diamond,
    Formula,
    Implies,
    Neg,
    Nominal,
    Or,
    Program,
    PropVar,
    Seq,
    SignedFormula,
    Signature,
    Star,
    Test,
    fischer_ladner_closure,
    iter_nominals,
)

ROOT_ORIGIN = "*"

_RESERVED = re.compile(r"^t(\d+)$")

# Agenda tiers, in saturation order.
_TIER_PAIR = 0        # non-branching non-destructive rules
_TIER_DESTRUCTIVE = 1
_TIER_BRANCHING = 2
_TIER_EXISTENTIAL = 3


class TableauError(RuntimeError):
    """Internal consistency failure; indicates a prover defect."""


class CountermodelError(TableauError):
    """An extracted countermodel failed verification by the checker."""


@dataclass
class TableauLimits:
    """Defensive bounds; saturation is expected to terminate well within
    them, so hitting a limit signals a defect or an extreme input."""

    max_steps: int = 100_000
    time_limit: Optional[float] = None


@dataclass
class ProofStats:
    steps: int = 0
    branches: int = 1
    closed_branches: int = 0
    ignorable_branches: int = 0
    blocked_existentials: int = 0
    fresh_nominals: int = 0
    elapsed: float = 0.0


@dataclass
class BranchFormula:
    statement: SignedFormula
    origin_index: int
    destructive_applied: bool = False


@dataclass(frozen=True)
class BranchStatus:
    kind: str  # closed | ignorable | open | unfinished
    ignorable_kind: Optional[str] = None
    ignorable_formula: Optional[Formula] = None
    witness: Optional[str] = None


@dataclass(frozen=True)
class _PairTask:
    rule: str
    premises: tuple[SignedFormula, ...]
    conclusions: tuple[SignedFormula, ...]


def _stmt(nominal: str, body: Formula, neg: bool = False, minus: bool = False) -> SignedFormula:
    return SignedFormula(At(nominal, Neg(body) if neg else body), minus)


def _flip_minus(sf: SignedFormula) -> SignedFormula:
    return SignedFormula(sf.formula, not sf.minus)


def _is_literal_body(f: Formula) -> bool:
    """Literals for equality propagation: p, !p, 'j, !'j, <a>'j, !['a']!'j."""
    if isinstance(f, (PropVar, Nominal)):
        return True
    if isinstance(f, Neg) and isinstance(f.body, (PropVar, Nominal)):
        return True
    if (
        isinstance(f, Diamond)
        and isinstance(f.program, Atomic)
        and isinstance(f.body, Nominal)
    ):
        return True
    if (
        isinstance(f, Neg)
        and isinstance(f.body, Box)
        and isinstance(f.body.program, Atomic)
        and isinstance(f.body.body, Neg)
        and isinstance(f.body.body.body, Nominal)
    ):
        return True
    return False


# ---------------------------------------------------------------------------
# Principal (destructive) rule dispatch

# A builder takes a fresh-nominal callback and returns
# (rule name, conclusion sets (one or two), fresh parents).
_Builder = Callable[[Callable[[], str]], tuple[str, list[list[SignedFormula]], dict[str, str]]]


def _simple(rule: str, conclusions: list[SignedFormula]):
    def build(_fresh):
        return rule, [conclusions], {}

    return build


def _split(rule: str, left: list[SignedFormula], right: list[SignedFormula]):
    def build(_fresh):
        return rule, [left, right], {}

    return build


def _composite_rule(
    nominal: str, box: bool, program: Program, body: Formula, neg: bool, minus: bool
) -> tuple[int, _Builder]:
    wrap = Box if box else Diamond
    name = ("neg-" if neg else "") + ("box" if box else "dia")
    suffix = "-minus" if minus else ""

    def dec(f: Formula, m: bool = minus) -> SignedFormula:
        return _stmt(nominal, f, neg, m)

    if isinstance(program, Seq):
        inner = wrap(program.first, wrap(program.second, body))
        return _TIER_DESTRUCTIVE, _simple(f"{name}-seq{suffix}", [dec(inner)])
    if isinstance(program, Choice):
        left = wrap(program.left, body)
        right = wrap(program.right, body)
        inner = And(left, right) if box else Or(left, right)
        return _TIER_DESTRUCTIVE, _simple(f"{name}-choice{suffix}", [dec(inner)])
    if isinstance(program, Test):
        inner = (
            Implies(program.condition, body) if box else And(program.condition, body)
        )
        return _TIER_DESTRUCTIVE, _simple(f"{name}-test{suffix}", [dec(inner)])
    if isinstance(program, Star):
        unfold = wrap(program.body, wrap(program, body))
        rule = f"{name}-star{suffix}"
        branching = (neg == minus) != box  # box splits on mixed marks, diamond on equal
        if branching:
            return _TIER_BRANCHING, _split(
                rule, [dec(body)], [_flip_minus(dec(body)), dec(unfold)]
            )
        return _TIER_DESTRUCTIVE, _simple(rule, [dec(body), dec(unfold)])
    raise TypeError(f"not a composite program: {program!r}")


def _principal(stmt: SignedFormula) -> Optional[tuple[int, _Builder]]:
    """The destructive rule a statement is premise of, if any, with its
    agenda tier.  Relational and propositional literals have none."""
    f = stmt.formula
    if not isinstance(f, At):
        if stmt.minus:
            body = f

            def build(fresh):
                t = fresh()
                return "at-intro-minus", [[SignedFormula(At(t, body), True)]], {t: ROOT_ORIGIN}

            return _TIER_DESTRUCTIVE, build
        return None  # plain raw roots are prefixed by the at-intro pair rule
    i, chi = f.nominal, f.body
    if not stmt.minus:
        if isinstance(chi, At):
            return _TIER_DESTRUCTIVE, _simple(
                "at-elim", [SignedFormula(At(chi.nominal, chi.body))]
            )
        if isinstance(chi, And):
            return _TIER_DESTRUCTIVE, _simple(
                "and", [_stmt(i, chi.left), _stmt(i, chi.right)]
            )
        if isinstance(chi, Or):
            return _TIER_BRANCHING, _split(
                "or", [_stmt(i, chi.left)], [_stmt(i, chi.right)]
            )
        if isinstance(chi, Implies):
            return _TIER_BRANCHING, _split(
                "imp", [_stmt(i, chi.left, minus=True)], [_stmt(i, chi.right)]
            )
        if isinstance(chi, Diamond):
            if isinstance(chi.program, Atomic):
                if isinstance(chi.body, Nominal):
                    return None  # relational literal
                program, body = chi.program, chi.body

                def build(fresh):
                    t = fresh()
                    conclusions = [
                        SignedFormula(At(i, Diamond(program, Nominal(t)))),
                        SignedFormula(At(t, body)),
                    ]
                    return "dia-exist", [conclusions], {t: i}

                return _TIER_EXISTENTIAL, build
            return _composite_rule(i, False, chi.program, chi.body, False, False)
        if isinstance(chi, Box):
            if isinstance(chi.program, Atomic):
                return None  # acts through the box pair rule
            return _composite_rule(i, True, chi.program, chi.body, False, False)
        if isinstance(chi, Neg):
            return _principal_neg(i, chi.body)
        return None  # p, 'j, false (false closes at insertion)
    # minus statements
    if isinstance(chi, At):
        return _TIER_DESTRUCTIVE, _simple(
            "at-elim-minus", [SignedFormula(At(chi.nominal, chi.body), True)]
        )
    if isinstance(chi, And):
        return _TIER_BRANCHING, _split(
            "and-minus",
            [_stmt(i, chi.left, minus=True)],
            [_stmt(i, chi.right, minus=True)],
        )
    if isinstance(chi, Or):
        return _TIER_DESTRUCTIVE, _simple(
            "or-minus",
            [_stmt(i, chi.left, minus=True), _stmt(i, chi.right, minus=True)],
        )
    if isinstance(chi, Implies):
        return _TIER_DESTRUCTIVE, _simple(
            "imp-minus", [_stmt(i, chi.left), _stmt(i, chi.right, minus=True)]
        )
    if isinstance(chi, Nominal):
        return _TIER_DESTRUCTIVE, _simple("id-minus", [_stmt(i, chi, neg=True)])
    if isinstance(chi, Diamond):
        if isinstance(chi.program, Atomic):
            return None  # acts through the minus diamond pair rule
        return _composite_rule(i, False, chi.program, chi.body, False, True)
    if isinstance(chi, Box):
        if isinstance(chi.program, Atomic):
            program, body = chi.program, chi.body

            def build(fresh):
                t = fresh()
                conclusions = [
                    SignedFormula(At(i, Diamond(program, Nominal(t)))),
                    SignedFormula(At(t, body), True),
                ]
                return "box-minus-exist", [conclusions], {t: i}

            return _TIER_EXISTENTIAL, build
        return _composite_rule(i, True, chi.program, chi.body, False, True)
    if isinstance(chi, Neg):
        return _principal_neg_minus(i, chi.body)
    return None  # (@'i p)- and (@'i false)- are terminal constraints


def _principal_neg(i: str, delta: Formula) -> Optional[tuple[int, _Builder]]:
    """Plain statements @'i !delta."""
    if isinstance(delta, (PropVar, Nominal, Bottom)):
        return None  # literal or constant (@'i !'i closes at insertion)
    if isinstance(delta, Neg):
        return _TIER_DESTRUCTIVE, _simple("neg-neg", [_stmt(i, delta.body)])
    if isinstance(delta, And):
        return _TIER_BRANCHING, _split(
            "neg-and", [_stmt(i, delta.left, neg=True)], [_stmt(i, delta.right, neg=True)]
        )
    if isinstance(delta, Or):
        return _TIER_DESTRUCTIVE, _simple(
            "neg-or", [_stmt(i, delta.left, neg=True), _stmt(i, delta.right, neg=True)]
        )
    if isinstance(delta, Implies):
        return _TIER_DESTRUCTIVE, _simple(
            "neg-imp",
            [_stmt(i, delta.left, neg=True, minus=True), _stmt(i, delta.right, neg=True)],
        )
    if isinstance(delta, At):
        return _TIER_DESTRUCTIVE, _simple(
            "neg-at", [_stmt(delta.nominal, delta.body, neg=True)]
        )
    if isinstance(delta, Diamond):
        if isinstance(delta.program, Atomic):
            return None  # acts through the negative diamond pair rule
        return _composite_rule(i, False, delta.program, delta.body, True, False)
    if isinstance(delta, Box):
        if isinstance(delta.program, Atomic):
            if isinstance(delta.body, Neg) and isinstance(delta.body.body, Nominal):
                return None  # relational literal !['a]!'j
            program, body = delta.program, delta.body

            def build(fresh):
                t = fresh()
                conclusions = [
                    SignedFormula(At(i, Neg(Box(program, Neg(Nominal(t)))))),
                    SignedFormula(At(t, Neg(body))),
                ]
                return "neg-box-exist", [conclusions], {t: i}

            return _TIER_EXISTENTIAL, build
        return _composite_rule(i, True, delta.program, delta.body, True, False)
    raise TypeError(f"not a formula: {delta!r}")


def _principal_neg_minus(i: str, delta: Formula) -> Optional[tuple[int, _Builder]]:
    """Minus statements (@'i !delta)-."""
    if isinstance(delta, Nominal):
        return _TIER_DESTRUCTIVE, _simple("id-minus", [_stmt(i, Neg(delta), neg=True)])
    if isinstance(delta, (PropVar, Bottom)):
        return None  # constraint; (@'i !false)- closes at insertion
    if isinstance(delta, Neg):
        return _TIER_DESTRUCTIVE, _simple(
            "neg-neg-minus", [_stmt(i, delta.body, minus=True)]
        )
    if isinstance(delta, And):
        return _TIER_DESTRUCTIVE, _simple(
            "neg-and-minus",
            [
                _stmt(i, delta.left, neg=True, minus=True),
                _stmt(i, delta.right, neg=True, minus=True),
            ],
        )
    if isinstance(delta, Or):
        return _TIER_BRANCHING, _split(
            "neg-or-minus",
            [_stmt(i, delta.left, neg=True, minus=True)],
            [_stmt(i, delta.right, neg=True, minus=True)],
        )
    if isinstance(delta, Implies):
        return _TIER_BRANCHING, _split(
            "neg-imp-minus",
            [_stmt(i, delta.left, neg=True)],
            [_stmt(i, delta.right, neg=True, minus=True)],
        )
    if isinstance(delta, At):
        return _TIER_DESTRUCTIVE, _simple(
            "neg-at-minus", [_stmt(delta.nominal, delta.body, neg=True, minus=True)]
        )
    if isinstance(delta, Diamond):
        if isinstance(delta.program, Atomic):
            program, body = delta.program, delta.body

            def build(fresh):
                t = fresh()
                conclusions = [
                    SignedFormula(At(i, Neg(Box(program, Neg(Nominal(t)))))),
                    SignedFormula(At(t, Neg(body)), True),
                ]
                return "neg-dia-minus-exist", [conclusions], {t: i}

            return _TIER_EXISTENTIAL, build
        return _composite_rule(i, False, delta.program, delta.body, True, True)
    if isinstance(delta, Box):
        if isinstance(delta.program, Atomic):
            return None  # acts through the minus negative box pair rule
        return _composite_rule(i, True, delta.program, delta.body, True, True)
    raise TypeError(f"not a formula: {delta!r}")


# ---------------------------------------------------------------------------
# Branches


class Branch:
    """One tableau branch: an ordered, duplicate-free statement set with
    the agenda, the nominal bookkeeping for the loop-check, and the
    origin tree of generated nominals."""

    def __init__(self, closure: frozenset[Formula], signature: Signature, fresh_start: int, branch_id: int = 0):
        self.closure = closure
        self.signature = signature
        self.branch_id = branch_id
        self.formulas: list[BranchFormula] = []
        self.index: dict[SignedFormula, BranchFormula] = {}
        self.nominal_order: list[str] = []
        self.generation: dict[str, str] = {}
        # Per-nominal decorated closure statements; the loop-check compares
        # these sets, so they are maintained incrementally (growing only).
        self.cl_statements: dict[str, set[tuple[bool, bool, Formula]]] = {}
        self.raw_plain: list[Formula] = []
        self.box_at: dict[tuple[str, str], list[Formula]] = {}
        self.diam_lit: dict[tuple[str, str], list[str]] = {}
        self.neg_diam: dict[tuple[str, str], list[Formula]] = {}
        self.negboxneg_lit: dict[tuple[str, str], list[str]] = {}
        self.minus_diam: dict[tuple[str, str], list[Formula]] = {}
        self.minus_negbox: dict[tuple[str, str], list[Formula]] = {}
        self.equalities: dict[str, list[str]] = {}
        self.literals_at: dict[str, list[Formula]] = {}
        self.queues: tuple[deque, deque, deque, deque] = (
            deque(),
            deque(),
            deque(),
            deque(),
        )
        self.parked: list[SignedFormula] = []
        self.closed = False
        self.closed_reason: Optional[str] = None
        self.fresh_counter = fresh_start

    # -- basic views

    def contains(self, stmt: SignedFormula) -> bool:
        return stmt in self.index

    def first_occurrence(self, nominal: str) -> int:
        return self.nominal_order.index(nominal)

    def statements(self) -> list[SignedFormula]:
        return [bf.statement for bf in self.formulas]

    def copy(self, branch_id: int) -> "Branch":
        clone = Branch.__new__(Branch)
        clone.closure = self.closure
        clone.signature = self.signature
        clone.branch_id = branch_id
        clone.formulas = [
            BranchFormula(bf.statement, bf.origin_index, bf.destructive_applied)
            for bf in self.formulas
        ]
        clone.index = {bf.statement: bf for bf in clone.formulas}
        clone.nominal_order = list(self.nominal_order)
        clone.generation = dict(self.generation)
        clone.cl_statements = {n: set(s) for n, s in self.cl_statements.items()}
        clone.raw_plain = list(self.raw_plain)
        for name in (
            "box_at",
            "diam_lit",
            "neg_diam",
            "negboxneg_lit",
            "minus_diam",
            "minus_negbox",
            "equalities",
            "literals_at",
        ):
            setattr(clone, name, {k: list(v) for k, v in getattr(self, name).items()})
        clone.queues = tuple(deque(q) for q in self.queues)
        clone.parked = list(self.parked)
        clone.closed = self.closed
        clone.closed_reason = self.closed_reason
        clone.fresh_counter = self.fresh_counter
        return clone

    # -- nominal bookkeeping

    def fresh_nominal(self) -> str:
        while True:
            name = f"t{self.fresh_counter}"
            self.fresh_counter += 1
            if name not in self.generation:
                return name

    def _register_nominal(self, name: str, parent: str) -> None:
        if name in self.generation:
            return
        self.generation[name] = parent
        self.nominal_order.append(name)
        # the self-equality axiom, and root-formula prefixing at this nominal
        self._enqueue_pair(
            _PairTask("id", (), (SignedFormula(At(name, Nominal(name))),))
        )
        for raw in self.raw_plain:
            self._enqueue_pair(
                _PairTask(
                    "at-intro",
                    (SignedFormula(raw),),
                    (SignedFormula(At(name, raw)),),
                )
            )

    # -- insertion

    def add(
        self,
        stmt: SignedFormula,
        fresh_parents: Optional[dict[str, str]] = None,
    ) -> bool:
        """Insert a statement unless it is already present."""
        if stmt in self.index:
            return False
        bf = BranchFormula(stmt, len(self.formulas))
        self.formulas.append(bf)
        self.index[stmt] = bf
        self._assert_closure_property(stmt)
        parents = fresh_parents or {}
        for name in dict.fromkeys(iter_nominals(stmt)):
            self._register_nominal(name, parents.get(name, ROOT_ORIGIN))
        self._update_cl_statements(stmt)
        self._check_closed(stmt)
        principal = _principal(stmt)
        if principal is not None:
            self.queues[principal[0]].append(stmt)
        self._register_roles(stmt)
        return True

    def _assert_closure_property(self, stmt: SignedFormula) -> None:
        f = stmt.formula
        if not isinstance(f, At):
            return
        body = f.body
        if not stmt.minus:
            if isinstance(body, Nominal):
                return
            if (
                isinstance(body, Diamond)
                and isinstance(body.program, Atomic)
                and isinstance(body.body, Nominal)
            ):
                return
            if (
                isinstance(body, Neg)
                and isinstance(body.body, Box)
                and isinstance(body.body.program, Atomic)
                and isinstance(body.body.body, Neg)
                and isinstance(body.body.body.body, Nominal)
            ):
                return
        in_closure = body in self.closure or (
            isinstance(body, Neg) and body.body in self.closure
        )
        if not in_closure:
            raise TableauError(f"statement escapes the root closure: {stmt}")

    def _update_cl_statements(self, stmt: SignedFormula) -> None:
        f = stmt.formula
        if not isinstance(f, At):
            return
        entries = self.cl_statements.setdefault(f.nominal, set())
        if f.body in self.closure:
            entries.add((False, stmt.minus, f.body))
        if isinstance(f.body, Neg) and f.body.body in self.closure:
            entries.add((True, stmt.minus, f.body.body))

    def _check_closed(self, stmt: SignedFormula) -> None:
        if self.closed:
            return
        f = stmt.formula
        if not isinstance(f, At):
            return
        if _flip_minus(stmt) in self.index:
            self.closed = True
            self.closed_reason = f"clash on {stmt}"
            return
        body = f.body
        if not stmt.minus:
            if isinstance(body, Bottom):
                self.closed = True
                self.closed_reason = f"{stmt} asserts falsum"
            elif (
                isinstance(body, Neg)
                and isinstance(body.body, Nominal)
                and body.body.name == f.nominal
            ):
                self.closed = True
                self.closed_reason = f"{stmt} denies self-equality"
        else:
            if isinstance(body, Neg) and isinstance(body.body, Bottom):
                self.closed = True
                self.closed_reason = f"{stmt} denies verum"

    # -- pair-rule bookkeeping

    def _enqueue_pair(self, task: _PairTask) -> None:
        self.queues[_TIER_PAIR].append(task)

    def _register_roles(self, stmt: SignedFormula) -> None:
        f = stmt.formula
        if not isinstance(f, At):
            if not stmt.minus:
                self.raw_plain.append(f)
                for name in self.nominal_order:
                    self._enqueue_pair(
                        _PairTask(
                            "at-intro", (stmt,), (SignedFormula(At(name, f)),)
                        )
                    )
            return
        i, chi = f.nominal, f.body
        if stmt.minus:
            if isinstance(chi, Diamond) and isinstance(chi.program, Atomic):
                key = (i, chi.program.name)
                self.minus_diam.setdefault(key, []).append(chi.body)
                for j in self.diam_lit.get(key, []):
                    self._enqueue_pair(
                        _PairTask(
                            "dia-minus-pair",
                            (stmt, _stmt(i, Diamond(chi.program, Nominal(j)))),
                            (SignedFormula(At(j, chi.body), True),),
                        )
                    )
            elif (
                isinstance(chi, Neg)
                and isinstance(chi.body, Box)
                and isinstance(chi.body.program, Atomic)
            ):
                key = (i, chi.body.program.name)
                body = chi.body.body
                self.minus_negbox.setdefault(key, []).append(body)
                for j in self.negboxneg_lit.get(key, []):
                    self._enqueue_pair(
                        _PairTask(
                            "neg-box-minus-pair",
                            (
                                stmt,
                                _stmt(i, Box(chi.body.program, Neg(Nominal(j))), neg=True),
                            ),
                            (SignedFormula(At(j, Neg(body)), True),),
                        )
                    )
            return
        if isinstance(chi, Box) and isinstance(chi.program, Atomic):
            key = (i, chi.program.name)
            self.box_at.setdefault(key, []).append(chi.body)
            for j in self.diam_lit.get(key, []):
                self._enqueue_pair(
                    _PairTask(
                        "box-pair",
                        (stmt, _stmt(i, Diamond(chi.program, Nominal(j)))),
                        (SignedFormula(At(j, chi.body)),),
                    )
                )
        if (
            isinstance(chi, Diamond)
            and isinstance(chi.program, Atomic)
            and isinstance(chi.body, Nominal)
        ):
            key = (i, chi.program.name)
            j = chi.body.name
            self.diam_lit.setdefault(key, []).append(j)
            for phi in self.box_at.get(key, []):
                self._enqueue_pair(
                    _PairTask(
                        "box-pair",
                        (_stmt(i, Box(chi.program, phi)), stmt),
                        (SignedFormula(At(j, phi)),),
                    )
                )
            for phi in self.minus_diam.get(key, []):
                self._enqueue_pair(
                    _PairTask(
                        "dia-minus-pair",
                        (SignedFormula(At(i, Diamond(chi.program, phi)), True), stmt),
                        (SignedFormula(At(j, phi), True),),
                    )
                )
        if isinstance(chi, Neg) and isinstance(chi.body, Diamond) and isinstance(
            chi.body.program, Atomic
        ):
            key = (i, chi.body.program.name)
            self.neg_diam.setdefault(key, []).append(chi.body.body)
            for j in self.negboxneg_lit.get(key, []):
                self._enqueue_pair(
                    _PairTask(
                        "neg-dia-pair",
                        (stmt, _stmt(i, Box(chi.body.program, Neg(Nominal(j))), neg=True)),
                        (SignedFormula(At(j, Neg(chi.body.body))),),
                    )
                )
        if (
            isinstance(chi, Neg)
            and isinstance(chi.body, Box)
            and isinstance(chi.body.program, Atomic)
            and isinstance(chi.body.body, Neg)
            and isinstance(chi.body.body.body, Nominal)
        ):
            key = (i, chi.body.program.name)
            j = chi.body.body.body.name
            self.negboxneg_lit.setdefault(key, []).append(j)
            for phi in self.neg_diam.get(key, []):
                self._enqueue_pair(
                    _PairTask(
                        "neg-dia-pair",
                        (_stmt(i, Diamond(chi.body.program, phi), neg=True), stmt),
                        (SignedFormula(At(j, Neg(phi))),),
                    )
                )
            for phi in self.minus_negbox.get(key, []):
                self._enqueue_pair(
                    _PairTask(
                        "neg-box-minus-pair",
                        (
                            SignedFormula(At(i, Neg(Box(chi.body.program, phi))), True),
                            stmt,
                        ),
                        (SignedFormula(At(j, Neg(phi)), True),),
                    )
                )
        if isinstance(chi, Nominal):
            self.equalities.setdefault(i, []).append(chi.name)
            for lit in self.literals_at.get(i, []):
                self._enqueue_pair(
                    _PairTask(
                        "nom",
                        (stmt, SignedFormula(At(i, lit))),
                        (SignedFormula(At(chi.name, lit)),),
                    )
                )
        if _is_literal_body(chi):
            self.literals_at.setdefault(i, []).append(chi)
            for j in self.equalities.get(i, []):
                self._enqueue_pair(
                    _PairTask(
                        "nom",
                        (_stmt(i, Nominal(j)), stmt),
                        (SignedFormula(At(j, chi)),),
                    )
                )

    # -- loop check

    def included_in(self, i: str, j: str) -> bool:
        """Whether i's decorated closure statements are subsumed by those of
        an earlier nominal j."""
        if i == j or i not in self.generation or j not in self.generation:
            return False
        if self.first_occurrence(j) >= self.first_occurrence(i):
            return False
        mine = self.cl_statements.get(i, set())
        theirs = self.cl_statements.get(j, set())
        return mine <= theirs

    def blockers_of(self, i: str) -> list[str]:
        return [j for j in self.nominal_order if self.included_in(i, j)]

    def _is_blocked(self, stmt: SignedFormula) -> bool:
        nominal = stmt.formula.nominal  # existential premises are @-statements
        return any(self.included_in(nominal, j) for j in self.nominal_order)

    # -- agenda

    def next_task(self, stats: Optional[ProofStats] = None):
        pairs, destructive, branching, existential = self.queues
        while pairs:
            task = pairs.popleft()
            if any(c not in self.index for c in task.conclusions):
                return task
        if destructive:
            return destructive.popleft()
        if branching:
            return branching.popleft()
        while existential:
            stmt = existential.popleft()
            if self._is_blocked(stmt):
                if stats is not None:
                    stats.blocked_existentials += 1
                self.parked.append(stmt)
                continue
            return stmt
        for pos, stmt in enumerate(self.parked):
            if not self._is_blocked(stmt):
                del self.parked[pos]
                return stmt
        return None

    def has_applicable(self) -> bool:
        pairs, destructive, branching, existential = self.queues
        if destructive or branching:
            return True
        for task in pairs:
            if any(c not in self.index for c in task.conclusions):
                return True
        for stmt in list(existential) + self.parked:
            if not self._is_blocked(stmt):
                return True
        return False

    def is_terminal(self) -> bool:
        """No rule instance is applicable under the restrictions."""
        return not self.has_applicable()

    # -- application

    def apply(
        self,
        task,
        next_branch_id: int,
        stats: Optional[ProofStats] = None,
        transcript: Optional[list[str]] = None,
    ) -> Optional["Branch"]:
        """Apply one admissible rule instance; returns the right sibling
        when the rule splits the branch."""
        if isinstance(task, _PairTask):
            for conclusion in task.conclusions:
                self.add(conclusion)
            if transcript is not None:
                transcript.append(
                    f"[b{self.branch_id}] {task.rule}: "
                    + ", ".join(map(str, task.premises))
                    + " ==> "
                    + "; ".join(map(str, task.conclusions))
                )
            return None
        stmt = task
        bf = self.index[stmt]
        if bf.destructive_applied:
            return None
        bf.destructive_applied = True
        rule, branches, fresh_parents = _principal(stmt)[1](self.fresh_nominal)
        if stats is not None and fresh_parents:
            stats.fresh_nominals += len(fresh_parents)
        if len(branches) == 1:
            for conclusion in branches[0]:
                self.add(conclusion, fresh_parents)
            if transcript is not None:
                transcript.append(
                    f"[b{self.branch_id}] {rule}: {stmt} ==> "
                    + "; ".join(map(str, branches[0]))
                )
            return None
        left, right = branches
        # Uninformative splits: when one side is already contained in the
        # branch, the branch coincides with that child, so no sibling is
        # needed (the case analysis the split stands for is realised).
        # Identical sides collapse to a plain addition.
        if all(c in self.index for c in left) or all(c in self.index for c in right):
            if transcript is not None:
                transcript.append(
                    f"[b{self.branch_id}] {rule}: {stmt} ==> (side already present)"
                )
            return None
        if left == right:
            for conclusion in left:
                self.add(conclusion)
            if transcript is not None:
                transcript.append(
                    f"[b{self.branch_id}] {rule}: {stmt} ==> "
                    + "; ".join(map(str, left))
                    + " (identical sides)"
                )
            return None
        sibling = self.copy(next_branch_id)
        for conclusion in left:
            self.add(conclusion)
        for conclusion in right:
            sibling.add(conclusion)
        if transcript is not None:
            transcript.append(
                f"[b{self.branch_id}] {rule}: {stmt} ==> "
                + "; ".join(map(str, left))
                + f"  -||-  [b{sibling.branch_id}] "
                + "; ".join(map(str, right))
            )
        return sibling


# ---------------------------------------------------------------------------
# Public single-step interface


def working_closure(
    roots: Iterable[Union[SignedFormula, Formula]]
) -> frozenset[Formula]:
    """The Fischer-Ladner closure of the roots, extended with the compound
    conclusions of the choice rewrite rules.

    The choice rules conclude [α]φ∧[β]φ (resp. ⟨α⟩φ∨⟨β⟩φ) but the closure
    itself only contains the two modal parts, so those transient compounds
    are added here to keep every branch statement inside the set the
    loop-check quantifies over."""
    closure = set(fischer_ladner_closure(roots))
    extra: set[Formula] = set()
    for f in closure:
        if isinstance(f, (Diamond, Box)) and isinstance(f.program, Choice):
            left_prog, right_prog = f.program.left, f.program.right
            if isinstance(f, Box):
                extra.add(And(Box(left_prog, f.body), Box(right_prog, f.body)))
            else:
                extra.add(Or(Diamond(left_prog, f.body), Diamond(right_prog, f.body)))
    return frozenset(closure | extra)


def initialize(roots: Iterable[Union[SignedFormula, Formula]]) -> Branch:
    """The one-branch tableau holding the root formulas."""
    normalized = [
        r if isinstance(r, SignedFormula) else SignedFormula(r) for r in roots
    ]
    closure = working_closure(normalized) if normalized else frozenset()
    signature = Signature.of(normalized)
    fresh_start = 0
    for name in signature.nominals:
        m = _RESERVED.match(name)
        if m:
            fresh_start = max(fresh_start, int(m.group(1)) + 1)
    branch = Branch(closure, signature, fresh_start)
    for sf in normalized:
        branch.add(sf)
    return branch


def apply_rules_step(
    branch: Branch, closure: Optional[frozenset[Formula]] = None
) -> list[Branch]:
    """Apply one admissible rule instance under the construction
    restrictions; returns the successor branches (the input branch is
    advanced in place, plus a sibling on splits).  Returns just the branch
    when nothing is applicable.

    The closure, when given, must be the one the branch was initialised
    with; the loop-check bookkeeping is built against it incrementally."""
    if closure is not None and not closure <= branch.closure:
        raise ValueError("closure does not match the branch's working closure")
    task = branch.next_task()
    if task is None:
        return [branch]
    sibling = branch.apply(task, branch.branch_id + 1)
    return [branch] if sibling is None else [branch, sibling]


def inclusion(
    i: str,
    j: str,
    branch: Branch,
    closure: Optional[frozenset[Formula]] = None,
) -> bool:
    """Definitional nominal inclusion: every decorated closure statement
    at i also holds at j, and j appeared first.  (The engine's loop-check
    uses an incrementally maintained equivalent.)"""
    if i not in branch.generation or j not in branch.generation:
        return False
    if i == j or branch.first_occurrence(j) >= branch.first_occurrence(i):
        return False
    cl = branch.closure if closure is None else closure
    for psi in cl:
        for neg in (False, True):
            for minus in (False, True):
                if branch.contains(_stmt(i, psi, neg, minus)) and not branch.contains(
                    _stmt(j, psi, neg, minus)
                ):
                    return False
    return True


# ---------------------------------------------------------------------------
# Branch classification


def _ignorable_scan(branch: Branch) -> Optional[tuple[str, Formula, str]]:
    """Returns (kind, star formula, witness) for the first matching
    ignorable pattern, if any."""
    # kind: plain diamond, minus negative diamond, minus box, plain negative box
    groups: dict[tuple[str, Formula], list[str]] = {}
    for bf in branch.formulas:
        f = bf.statement.formula
        if not isinstance(f, At):
            continue
        body = f.body
        if not bf.statement.minus:
            if isinstance(body, Diamond) and isinstance(body.program, Star):
                groups.setdefault(("dia-star", body), []).append(f.nominal)
            elif (
                isinstance(body, Neg)
                and isinstance(body.body, Box)
                and isinstance(body.body.program, Star)
            ):
                groups.setdefault(("neg-box-star", body), []).append(f.nominal)
        else:
            if isinstance(body, Box) and isinstance(body.program, Star):
                groups.setdefault(("box-star-minus", body), []).append(f.nominal)
            elif (
                isinstance(body, Neg)
                and isinstance(body.body, Diamond)
                and isinstance(body.body.program, Star)
            ):
                groups.setdefault(("neg-dia-star-minus", body), []).append(f.nominal)
    for (kind, body), nominals in groups.items():
        if kind == "dia-star":
            phi = body.body
            fulfilled = lambda j: branch.contains(SignedFormula(At(j, phi), True))
        elif kind == "neg-box-star":
            phi = body.body.body
            fulfilled = lambda j: branch.contains(
                SignedFormula(At(j, Neg(phi)), True)
            )
        elif kind == "box-star-minus":
            phi = body.body
            fulfilled = lambda j: branch.contains(SignedFormula(At(j, phi)))
        else:  # neg-dia-star-minus
            phi = body.body.body
            fulfilled = lambda j: branch.contains(SignedFormula(At(j, Neg(phi))))
        if all(fulfilled(j) for j in nominals):
            return kind, body, nominals[0]
    return None


def classify(branch: Branch) -> BranchStatus:
    """Closed takes precedence; ignorable and open apply to terminal
    branches only; anything else is unfinished."""
    if branch.closed:
        return BranchStatus("closed")
    if branch.has_applicable():
        return BranchStatus("unfinished")
    hit = _ignorable_scan(branch)
    if hit is not None:
        kind, body, witness = hit
        return BranchStatus("ignorable", kind, body, witness)
    return BranchStatus("open")


# ---------------------------------------------------------------------------
# Model extraction


def extract_model(branch: Branch) -> Model:
    """Build a model from an open branch: quotient the unblocked nominals
    by the equality statements, read the relations off the relational
    literals (routing blocked targets to the nominal that includes them),
    and read valuations off the local literals.

    Blocked nominals are named at the world of an including nominal so
    the naming is total on every nominal the branch mentions."""
    nominals = branch.nominal_order
    sig = branch.signature
    if not nominals:
        return Model(
            frozenset(("w0",)),
            {a: frozenset() for a in sig.actions},
            {a: frozenset((("w0", "w0"),)) for a in sig.actions},
            {},
            {p: frozenset() for p in sig.propositions},
            {p: frozenset() for p in sig.propositions},
        )
    blockers = {i: branch.blockers_of(i) for i in nominals}
    unblocked = [i for i in nominals if not blockers[i]]
    position = {i: k for k, i in enumerate(nominals)}
    # union-find over unblocked nominals, representative = earliest occurrence
    parent = {i: i for i in unblocked}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: str, y: str) -> None:
        rx, ry = find(x), find(y)
        if rx == ry:
            return
        if position[ry] < position[rx]:
            rx, ry = ry, rx
        parent[ry] = rx

    member = set(unblocked)
    for i in unblocked:
        for j in branch.equalities.get(i, []):
            if j in member:
                union(i, j)
    worlds = frozenset(find(i) for i in unblocked)
    naming: dict[str, str] = {}
    for i in nominals:
        if i in member:
            naming[i] = find(i)
        else:
            # route to the earliest unblocked nominal that includes i
            targets = [j for j in unblocked if branch.included_in(i, j)]
            if not targets:
                raise TableauError(f"blocked nominal {i} has no unblocked includer")
            naming[i] = find(targets[0])
    every_pair = frozenset((u, v) for u in worlds for v in worlds)
    pos_rel: dict[str, set[tuple[str, str]]] = {a: set() for a in sig.actions}
    neg_complement: dict[str, set[tuple[str, str]]] = {a: set() for a in sig.actions}
    for literal_index, target_rel in (
        (branch.diam_lit, pos_rel),
        (branch.negboxneg_lit, neg_complement),
    ):
        for (i, action), targets in literal_index.items():
            if i not in member:
                continue
            for x in targets:
                if x in member:
                    target_rel[action].add((find(i), find(x)))
                else:
                    for j in unblocked:
                        if branch.included_in(x, j):
                            target_rel[action].add((find(i), find(j)))
    neg_rel = {
        a: frozenset(every_pair - frozenset(neg_complement[a])) for a in sig.actions
    }
    pos_val: dict[str, set[str]] = {p: set() for p in sig.propositions}
    neg_val: dict[str, set[str]] = {p: set() for p in sig.propositions}
    for i in unblocked:
        for p in sig.propositions:
            if branch.contains(SignedFormula(At(i, PropVar(p)))):
                pos_val[p].add(find(i))
            if branch.contains(SignedFormula(At(i, Neg(PropVar(p))))):
                neg_val[p].add(find(i))
    return Model(
        worlds,
        {a: frozenset(v) for a, v in pos_rel.items()},
        neg_rel,
        naming,
        {p: frozenset(v) for p, v in pos_val.items()},
        {p: frozenset(v) for p, v in neg_val.items()},
    )


# ---------------------------------------------------------------------------
# The prover


@dataclass
class TableauResult:
    verdict: str  # proved | refuted | exhausted
    countermodel: Optional[Model] = None
    open_branch: Optional[Branch] = None
    stats: ProofStats = field(default_factory=ProofStats)
    transcript: Optional[list[str]] = None

    @property
    def proved(self) -> bool:
        return self.verdict == "proved"

    @property
    def refuted(self) -> bool:
        return self.verdict == "refuted"

    @property
    def exhausted(self) -> bool:
        return self.verdict == "exhausted"


def prove_from_roots(
    roots: Sequence[Union[SignedFormula, Formula]],
    limits: Optional[TableauLimits] = None,
    transcript: bool = False,
    verify: bool = True,
) -> TableauResult:
    """Saturate a tableau for the given signed roots.

    Proved means every branch ended closed or ignorable; refuted returns
    the model extracted from the first open branch (checked against every
    root unless verify is disabled); exhausted is only reachable by
    hitting the defensive limits."""
    limits = limits or TableauLimits()
    lines: Optional[list[str]] = [] if transcript else None
    stats = ProofStats()
    started = time.monotonic()
    normalized = [
        r if isinstance(r, SignedFormula) else SignedFormula(r) for r in roots
    ]
    stack = [initialize(normalized)]
    next_branch_id = 1
    while stack:
        branch = stack.pop()
        while True:
            if stats.steps >= limits.max_steps or (
                limits.time_limit is not None
                and time.monotonic() - started > limits.time_limit
            ):
                stats.elapsed = time.monotonic() - started
                return TableauResult("exhausted", stats=stats, transcript=lines)
            if branch.closed:
                stats.closed_branches += 1
                if lines is not None:
                    lines.append(f"[b{branch.branch_id}] closed: {branch.closed_reason}")
                break
            task = branch.next_task(stats)
            if task is None:
                status = classify(branch)
                if status.kind == "ignorable":
                    stats.ignorable_branches += 1
                    if lines is not None:
                        lines.append(
                            f"[b{branch.branch_id}] ignorable {status.ignorable_kind}"
                            f" on {status.ignorable_formula} at {status.witness}"
                        )
                    break
                model = extract_model(branch)
                if verify:
                    for sf in normalized:
                        if not globally_satisfies(model, sf):
                            raise CountermodelError(
                                f"extracted model fails root {sf}"
                            )
                stats.elapsed = time.monotonic() - started
                return TableauResult("refuted", model, branch, stats, lines)
            stats.steps += 1
            sibling = branch.apply(task, next_branch_id, stats, lines)
            if sibling is not None:
                next_branch_id += 1
                stats.branches += 1
                stack.append(sibling)
    stats.elapsed = time.monotonic() - started
    return TableauResult("proved", stats=stats, transcript=lines)


def prove_consequence(
    hypotheses: Sequence[Formula],
    goal: Formula,
    limits: Optional[TableauLimits] = None,
    transcript: bool = False,
    verify: bool = True,
) -> TableauResult:
    """Decide whether goal is a global consequence of the hypotheses."""
    roots: list[SignedFormula] = [SignedFormula(h) for h in hypotheses]
    roots.append(SignedFormula(goal, minus=True))
    return prove_from_roots(roots, limits, transcript, verify)


def prove_validity(
    goal: Formula,
    limits: Optional[TableauLimits] = None,
    transcript: bool = False,
    verify: bool = True,
) -> TableauResult:
    """Validity is consequence from the empty set."""
    return prove_consequence([], goal, limits, transcript, verify)
