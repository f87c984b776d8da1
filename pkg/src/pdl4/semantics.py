"""Finite two-relation models, composite-program interpretation, the
satisfaction relation, the equivalent four-valued model presentation, and
diagram extraction.

A model carries, per atomic action, separate evidence-of-presence and
evidence-of-absence relations, and per proposition separate positive and
negative valuations.  Positive modal formulas are read over the positive
relation; negated modal formulas are read over the *complement* of the
negative relation, which is only effective on a finite domain, so all
relations here are explicit pair sets.

Models are immutable after construction; satisfaction and interpretation
are pure and safe for concurrent evaluation (the denotation memo is
per-call).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .fourval import FourValue, imp4, join_t, meet_t, neg4
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
)

Pair = tuple[str, str]


class ModelError(ValueError):
    """Malformed model, or a formula outside the model's signature."""


class CompositeProgramError(ModelError):
    """Raised by the four-valued valuation when it meets a composite
    program; callers must use the two-relation checker for those."""


# ---------------------------------------------------------------------------
# Relation helpers


def compose(r: frozenset[Pair], s: frozenset[Pair]) -> frozenset[Pair]:
    by_source: dict[str, set[str]] = {}
    for u, v in s:
        by_source.setdefault(u, set()).add(v)
    return frozenset(
        (x, z) for x, y in r for z in by_source.get(y, ()))


def reflexive_transitive_closure(
    r: frozenset[Pair], worlds: frozenset[str]
) -> frozenset[Pair]:
    """Closure by iterated squaring to a fixpoint."""
    closure = r | frozenset((w, w) for w in worlds)
    while True:
        squared = closure | compose(closure, closure)
        if squared == closure:
            return closure
        closure = squared


# ---------------------------------------------------------------------------
# Models


def _freeze_rel(rel: Mapping[str, Iterable[Pair]]) -> dict[str, frozenset[Pair]]:
    return {name: frozenset(pairs) for name, pairs in rel.items()}


def _freeze_val(val: Mapping[str, Iterable[str]]) -> dict[str, frozenset[str]]:
    return {name: frozenset(worlds) for name, worlds in val.items()}


@dataclass(frozen=True)
class Model:
    """Finite model with positive/negative relations and valuations and a
    total nomination map.

    The proposition and action signature is given by the valuation and
    relation map keys; an action or proposition with no evidence at all
    still needs its (empty) entry to be in signature.
    """

    worlds: frozenset[str]
    pos_rel: Mapping[str, frozenset[Pair]]
    neg_rel: Mapping[str, frozenset[Pair]]
    naming: Mapping[str, str]
    pos_val: Mapping[str, frozenset[str]]
    neg_val: Mapping[str, frozenset[str]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "worlds", frozenset(self.worlds))
        object.__setattr__(self, "pos_rel", _freeze_rel(self.pos_rel))
        object.__setattr__(self, "neg_rel", _freeze_rel(self.neg_rel))
        object.__setattr__(self, "naming", dict(self.naming))
        object.__setattr__(self, "pos_val", _freeze_val(self.pos_val))
        object.__setattr__(self, "neg_val", _freeze_val(self.neg_val))
        if not self.worlds:
            raise ModelError("the domain must be nonempty")
        if set(self.pos_rel) != set(self.neg_rel):
            raise ModelError("positive and negative relations must cover the same actions")
        if set(self.pos_val) != set(self.neg_val):
            raise ModelError("positive and negative valuations must cover the same propositions")
        for rel in (self.pos_rel, self.neg_rel):
            for name, pairs in rel.items():
                for u, v in pairs:
                    if u not in self.worlds or v not in self.worlds:
                        raise ModelError(f"relation {name} mentions unknown world")
        for val in (self.pos_val, self.neg_val):
            for name, members in val.items():
                if not members <= self.worlds:
                    raise ModelError(f"valuation of {name} mentions unknown world")
        for nominal, world in self.naming.items():
            if world not in self.worlds:
                raise ModelError(f"nominal {nominal} names unknown world {world}")
        sig = Signature(
            frozenset(self.pos_val), frozenset(self.naming), frozenset(self.pos_rel)
        )
        object.__setattr__(self, "_signature", sig)

    @property
    def signature(self) -> Signature:
        return self._signature  # type: ignore[attr-defined]

    def named_world(self, nominal: str) -> str:
        try:
            return self.naming[nominal]
        except KeyError:
            raise ModelError(f"unknown nominal {nominal!r}") from None

    def is_named(self) -> bool:
        """Whether every world is named by at least one nominal."""
        return set(self.naming.values()) == set(self.worlds)


@dataclass(frozen=True)
class ProgramDenotation:
    """Interpretation of a program: the positive relation and the
    *complement* of the negative relation, matching how negated modal
    formulas are evaluated."""

    pos: frozenset[Pair]
    neg_complement: frozenset[Pair]


@dataclass(frozen=True)
class FourModel:
    """The same information as a Model, presented as four-valued relation
    and valuation functions.  The valuation is total on
    (propositions + nominals) x worlds and assigns each nominal t at
    exactly one world and f elsewhere."""

    worlds: frozenset[str]
    rel: Mapping[str, Mapping[Pair, FourValue]]
    val: Mapping[tuple[str, str], FourValue]
    nominals: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "worlds", frozenset(self.worlds))
        object.__setattr__(self, "rel", {a: dict(m) for a, m in self.rel.items()})
        object.__setattr__(self, "val", dict(self.val))
        object.__setattr__(self, "nominals", frozenset(self.nominals))
        if not self.worlds:
            raise ModelError("the domain must be nonempty")
        for action, table in self.rel.items():
            if set(table) != {(u, v) for u in self.worlds for v in self.worlds}:
                raise ModelError(f"relation for {action} must be total on world pairs")
        atoms = {name for name, _ in self.val}
        for name in atoms:
            for w in self.worlds:
                if (name, w) not in self.val:
                    raise ModelError(f"valuation must be total; missing ({name}, {w})")
        for i in self.nominals:
            marks = [w for w in self.worlds if self.val.get((i, w)) is FourValue.T]
            if len(marks) != 1:
                raise ModelError(f"nominal {i} must be t at exactly one world")
            for w in self.worlds:
                if w not in marks and self.val[(i, w)] is not FourValue.F:
                    raise ModelError(f"nominal {i} must be f away from its world")

    def named_world(self, nominal: str) -> str:
        for w in self.worlds:
            if self.val.get((nominal, w)) is FourValue.T:
                return w
        raise ModelError(f"unknown nominal {nominal!r}")


# ---------------------------------------------------------------------------
# Two-relation satisfaction


class _Evaluator:
    """Satisfaction over one model with per-call memoisation of program
    denotations (star and nested tests make naive recomputation blow up)."""

    def __init__(self, model: Model):
        self.model = model
        self._memo: dict[Program, ProgramDenotation] = {}

    def denotation(self, program: Program) -> ProgramDenotation:
        hit = self._memo.get(program)
        if hit is not None:
            return hit
        result = self._interpret(program)
        self._memo[program] = result
        return result

    def _interpret(self, program: Program) -> ProgramDenotation:
        m = self.model
        if isinstance(program, Atomic):
            if program.name not in m.pos_rel:
                raise ModelError(f"unknown action {program.name!r}")
            everything = frozenset((u, v) for u in m.worlds for v in m.worlds)
            return ProgramDenotation(
                m.pos_rel[program.name], everything - m.neg_rel[program.name]
            )
        if isinstance(program, Seq):
            a = self.denotation(program.first)
            b = self.denotation(program.second)
            return ProgramDenotation(
                compose(a.pos, b.pos),
                compose(a.neg_complement, b.neg_complement),
            )
        if isinstance(program, Choice):
            a = self.denotation(program.left)
            b = self.denotation(program.right)
            return ProgramDenotation(
                a.pos | b.pos, a.neg_complement | b.neg_complement
            )
        if isinstance(program, Star):
            a = self.denotation(program.body)
            return ProgramDenotation(
                reflexive_transitive_closure(a.pos, self.model.worlds),
                reflexive_transitive_closure(a.neg_complement, self.model.worlds),
            )
        if isinstance(program, Test):
            cond = program.condition
            pos = frozenset(
                (w, w) for w in m.worlds if self.satisfies(w, cond)
            )
            neg_complement = frozenset(
                (w, w) for w in m.worlds if not self.satisfies(w, Neg(cond))
            )
            return ProgramDenotation(pos, neg_complement)
        raise TypeError(f"not a program: {program!r}")

    def successors(self, pairs: frozenset[Pair], w: str) -> list[str]:
        return [v for u, v in pairs if u == w]

    def satisfies(self, w: str, f: Formula) -> bool:
        model = self.model
        if isinstance(f, PropVar):
            if f.name not in model.pos_val:
                raise ModelError(f"unknown proposition {f.name!r}")
            return w in model.pos_val[f.name]
        if isinstance(f, Nominal):
            return w == model.named_world(f.name)
        if isinstance(f, Bottom):
            return False
        if isinstance(f, And):
            return self.satisfies(w, f.left) and self.satisfies(w, f.right)
        if isinstance(f, Or):
            return self.satisfies(w, f.left) or self.satisfies(w, f.right)
        if isinstance(f, Implies):
            return (not self.satisfies(w, f.left)) or self.satisfies(w, f.right)
        if isinstance(f, At):
            return self.satisfies(model.named_world(f.nominal), f.body)
        if isinstance(f, Diamond):
            pairs = self.denotation(f.program).pos
            return any(self.satisfies(v, f.body) for v in self.successors(pairs, w))
        if isinstance(f, Box):
            pairs = self.denotation(f.program).pos
            return all(self.satisfies(v, f.body) for v in self.successors(pairs, w))
        if isinstance(f, Neg):
            return self._satisfies_neg(w, f.body)
        raise TypeError(f"not a formula: {f!r}")

    def _satisfies_neg(self, w: str, body: Formula) -> bool:
        """Satisfaction of the negation of body, pushed one level."""
        model = self.model
        if isinstance(body, PropVar):
            if body.name not in model.neg_val:
                raise ModelError(f"unknown proposition {body.name!r}")
            return w in model.neg_val[body.name]
        if isinstance(body, Nominal):
            return w != model.named_world(body.name)
        if isinstance(body, Bottom):
            return True
        if isinstance(body, Neg):
            return self.satisfies(w, body.body)
        if isinstance(body, And):
            return self._satisfies_neg(w, body.left) or self._satisfies_neg(w, body.right)
        if isinstance(body, Or):
            return self._satisfies_neg(w, body.left) and self._satisfies_neg(w, body.right)
        if isinstance(body, Implies):
            return (not self._satisfies_neg(w, body.left)) and self._satisfies_neg(
                w, body.right
            )
        if isinstance(body, At):
            return self._satisfies_neg(model.named_world(body.nominal), body.body)
        if isinstance(body, Diamond):
            pairs = self.denotation(body.program).neg_complement
            return all(
                self._satisfies_neg(v, body.body) for v in self.successors(pairs, w)
            )
        if isinstance(body, Box):
            pairs = self.denotation(body.program).neg_complement
            return any(
                self._satisfies_neg(v, body.body) for v in self.successors(pairs, w)
            )
        raise TypeError(f"not a formula: {body!r}")


def interpret_program(model: Model, program: Program) -> ProgramDenotation:
    """Positive relation and negative-relation complement of a program."""
    return _Evaluator(model).denotation(program)


def satisfies(model: Model, world: str, formula: Formula) -> bool:
    """Local satisfaction at a world."""
    if world not in model.worlds:
        raise ModelError(f"unknown world {world!r}")
    return _Evaluator(model).satisfies(world, formula)


def globally_satisfies(
    model: Model, sf: Union[SignedFormula, Formula]
) -> bool:
    """Global satisfaction: a plain formula must hold at every world; a
    minus formula asserts that the body fails at some world."""
    if isinstance(sf, Formula):
        sf = SignedFormula(sf)
    ev = _Evaluator(model)
    holds_everywhere = all(ev.satisfies(w, sf.formula) for w in model.worlds)
    return not holds_everywhere if sf.minus else holds_everywhere


# ---------------------------------------------------------------------------
# Four-valued satisfaction


def value4(fm: FourModel, world: str, f: Formula) -> FourValue:
    """Four-valued value of a formula whose modal operators are applied to
    atomic programs only."""
    if world not in fm.worlds:
        raise ModelError(f"unknown world {world!r}")
    return _value4(fm, world, f)


def _value4(fm: FourModel, w: str, f: Formula) -> FourValue:
    if isinstance(f, (PropVar, Nominal)):
        try:
            return fm.val[(f.name, w)]
        except KeyError:
            raise ModelError(f"unknown atom {f.name!r}") from None
    if isinstance(f, Bottom):
        return FourValue.F
    if isinstance(f, Neg):
        return neg4(_value4(fm, w, f.body))
    if isinstance(f, And):
        return meet_t(_value4(fm, w, f.left), _value4(fm, w, f.right))
    if isinstance(f, Or):
        return join_t(_value4(fm, w, f.left), _value4(fm, w, f.right))
    if isinstance(f, Implies):
        return imp4(_value4(fm, w, f.left), _value4(fm, w, f.right))
    if isinstance(f, At):
        return _value4(fm, fm.named_world(f.nominal), f.body)
    if isinstance(f, (Diamond, Box)):
        prog = f.program
        if not isinstance(prog, Atomic):
            raise CompositeProgramError(
                "four-valued evaluation is defined for atomic programs only; "
                "use the two-relation checker for composite programs"
            )
        if prog.name not in fm.rel:
            raise ModelError(f"unknown action {prog.name!r}")
        table = fm.rel[prog.name]
        if isinstance(f, Diamond):
            out = FourValue.F
            for v in fm.worlds:
                out = join_t(out, meet_t(table[(w, v)], _value4(fm, v, f.body)))
            return out
        out = FourValue.T
        for v in fm.worlds:
            out = meet_t(out, imp4(table[(w, v)], _value4(fm, v, f.body)))
        return out
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Conversions between the two presentations


def to_four_model(model: Model) -> FourModel:
    """Four-valued presentation: membership in both relations (or both
    valuations) reads as b, positive only as t, negative only as f,
    neither as n; nominals are t exactly at their named world."""
    rel: dict[str, dict[Pair, FourValue]] = {}
    for action in model.pos_rel:
        table: dict[Pair, FourValue] = {}
        pos, neg = model.pos_rel[action], model.neg_rel[action]
        for u in model.worlds:
            for v in model.worlds:
                pair = (u, v)
                inp, inn = pair in pos, pair in neg
                table[pair] = (
                    FourValue.B if inp and inn
                    else FourValue.T if inp
                    else FourValue.F if inn
                    else FourValue.N
                )
        rel[action] = table
    val: dict[tuple[str, str], FourValue] = {}
    for p in model.pos_val:
        for w in model.worlds:
            inp, inn = w in model.pos_val[p], w in model.neg_val[p]
            val[(p, w)] = (
                FourValue.B if inp and inn
                else FourValue.T if inp
                else FourValue.F if inn
                else FourValue.N
            )
    for i, named in model.naming.items():
        for w in model.worlds:
            val[(i, w)] = FourValue.T if w == named else FourValue.F
    return FourModel(model.worlds, rel, val, frozenset(model.naming))


def from_four_model(fm: FourModel) -> Model:
    """Inverse presentation change; t/b map into the positive side and
    f/b into the negative side."""
    pos_rel: dict[str, frozenset[Pair]] = {}
    neg_rel: dict[str, frozenset[Pair]] = {}
    for action, table in fm.rel.items():
        pos_rel[action] = frozenset(
            pair for pair, v in table.items() if v in (FourValue.T, FourValue.B)
        )
        neg_rel[action] = frozenset(
            pair for pair, v in table.items() if v in (FourValue.F, FourValue.B)
        )
    props = {name for name, _ in fm.val} - fm.nominals
    pos_val = {
        p: frozenset(w for w in fm.worlds if fm.val[(p, w)] in (FourValue.T, FourValue.B))
        for p in props
    }
    neg_val = {
        p: frozenset(w for w in fm.worlds if fm.val[(p, w)] in (FourValue.F, FourValue.B))
        for p in props
    }
    naming = {i: fm.named_world(i) for i in fm.nominals}
    return Model(fm.worlds, pos_rel, neg_rel, naming, pos_val, neg_val)


# ---------------------------------------------------------------------------
# Diagram


def diagram(model: Model) -> frozenset[Formula]:
    """The set of irreducible statements the model globally satisfies:
    local properties @'i p and @'i !p, transitions @'i <a>'j, absent
    transitions @'i !<a>'j, and equalities @'i 'j.

    Defined for named models only (every world carries a nominal)."""
    if not model.is_named():
        unnamed = sorted(set(model.worlds) - set(model.naming.values()))
        raise ModelError(f"unnamed worlds present: {', '.join(unnamed)}")
    ev = _Evaluator(model)
    nominals = sorted(model.naming)
    candidates: list[Formula] = []
    for i in nominals:
        for p in sorted(model.pos_val):
            candidates.append(At(i, PropVar(p)))
            candidates.append(At(i, Neg(PropVar(p))))
        for a in sorted(model.pos_rel):
            for j in nominals:
                candidates.append(At(i, Diamond(Atomic(a), Nominal(j))))
                candidates.append(At(i, Neg(Diamond(Atomic(a), Nominal(j)))))
        for j in nominals:
            candidates.append(At(i, Nominal(j)))
    # @-statements are world independent, so one world decides them.
    anchor = next(iter(model.worlds))
    return frozenset(f for f in candidates if ev.satisfies(anchor, f))


# ---------------------------------------------------------------------------
# Model file format

# Line-oriented text:  `worlds: w1 w2`, `name 'i = w1`,
# `action a pos: (w1,w2) (w2,w1)`, `action a neg: (w1,w2)`,
# `prop p pos: w1`, `prop p neg:`, `#` comments.  Missing pos/neg lines
# mean empty sets.

_PAIR_RE = re.compile(r"\(\s*([A-Za-z0-9_]+)\s*,\s*([A-Za-z0-9_]+)\s*\)")


def _parse_pairs(text: str, lineno: int) -> list[Pair]:
    pairs = []
    rest = text.strip()
    pos = 0
    while pos < len(rest):
        if rest[pos].isspace():
            pos += 1
            continue
        m = _PAIR_RE.match(rest, pos)
        if not m:
            raise ModelError(f"line {lineno}: malformed pair list {rest[pos:]!r}")
        pairs.append((m.group(1), m.group(2)))
        pos = m.end()
    return pairs


def parse_model(text: str) -> Model:
    """Parse the line-oriented model format."""
    worlds: list[str] = []
    naming: dict[str, str] = {}
    pos_rel: dict[str, set[Pair]] = {}
    neg_rel: dict[str, set[Pair]] = {}
    pos_val: dict[str, set[str]] = {}
    neg_val: dict[str, set[str]] = {}
    seen_worlds = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("worlds:"):
            worlds.extend(line[len("worlds:"):].split())
            seen_worlds = True
        elif line.startswith("name "):
            body = line[len("name "):]
            if "=" not in body:
                raise ModelError(f"line {lineno}: expected name 'i = w")
            nominal, world = (part.strip() for part in body.split("=", 1))
            if not nominal.startswith("'"):
                raise ModelError(f"line {lineno}: nominals are written with a leading '")
            naming[nominal[1:]] = world
        elif line.startswith("action "):
            body = line[len("action "):]
            if ":" not in body:
                raise ModelError(f"line {lineno}: expected action a pos:/neg:")
            head, rest = body.split(":", 1)
            parts = head.split()
            if len(parts) != 2 or parts[1] not in ("pos", "neg"):
                raise ModelError(f"line {lineno}: expected action a pos:/neg:")
            name, side = parts
            pos_rel.setdefault(name, set())
            neg_rel.setdefault(name, set())
            target = pos_rel if side == "pos" else neg_rel
            target[name].update(_parse_pairs(rest, lineno))
        elif line.startswith("prop "):
            body = line[len("prop "):]
            if ":" not in body:
                raise ModelError(f"line {lineno}: expected prop p pos:/neg:")
            head, rest = body.split(":", 1)
            parts = head.split()
            if len(parts) != 2 or parts[1] not in ("pos", "neg"):
                raise ModelError(f"line {lineno}: expected prop p pos:/neg:")
            name, side = parts
            pos_val.setdefault(name, set())
            neg_val.setdefault(name, set())
            target = pos_val if side == "pos" else neg_val
            target[name].update(rest.split())
        else:
            raise ModelError(f"line {lineno}: unrecognised directive {line!r}")
    if not seen_worlds:
        raise ModelError("missing worlds: line")
    return Model(
        frozenset(worlds),
        {a: frozenset(v) for a, v in pos_rel.items()},
        {a: frozenset(v) for a, v in neg_rel.items()},
        naming,
        {p: frozenset(v) for p, v in pos_val.items()},
        {p: frozenset(v) for p, v in neg_val.items()},
    )


def load_model(path: str) -> Model:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_model(handle.read())


def serialize_model(model: Model) -> str:
    """Canonical text form; serialising a parsed model is stable."""
    lines = ["worlds: " + " ".join(sorted(model.worlds))]
    for nominal in sorted(model.naming):
        lines.append(f"name '{nominal} = {model.naming[nominal]}")
    for action in sorted(model.pos_rel):
        for side, rel in (("pos", model.pos_rel), ("neg", model.neg_rel)):
            pairs = " ".join(f"({u},{v})" for u, v in sorted(rel[action]))
            lines.append(f"action {action} {side}:" + (" " + pairs if pairs else ""))
    for prop in sorted(model.pos_val):
        for side, val in (("pos", model.pos_val), ("neg", model.neg_val)):
            members = " ".join(sorted(val[prop]))
            lines.append(f"prop {prop} {side}:" + (" " + members if members else ""))
    return "\n".join(lines) + "\n"
