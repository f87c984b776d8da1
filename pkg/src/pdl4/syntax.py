"""Abstract syntax, concrete parser and printer for four-valued dynamic
hybrid formulas, plus the Fischer-Ladner closure.

Formulas and programs are immutable trees; every value in this module is
safe to share between threads, and parsing is reentrant.

Concrete grammar (ASCII):

    formula  :=  implic
    implic   :=  disj ('->' implic)?             right associative
    disj     :=  conj ('|' conj)*
    conj     :=  unary ('&' unary)*
    unary    :=  '!' unary | '~' unary | '@' NOMINAL unary
              |  '<' program '>' unary | '[' program ']' unary | atom
    atom     :=  'false' | 'true' | IDENT | NOMINAL | '(' formula ')'

    program  :=  choice
    choice   :=  seq ('+' seq)*
    seq      :=  postfix (';' postfix)*
    postfix  :=  primary '*'*
    primary  :=  formula '?' | IDENT | '(' program ')'

Identifiers are ``[a-z][a-z0-9_]*``; nominals carry a leading apostrophe
(``'i``) so their namespace is lexically disjoint.  ``~f`` abbreviates
``f -> false`` and ``true`` abbreviates ``~false``; both are expanded at
parse time and re-sugared by the printer.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Formula:
    """Base class for formula nodes."""

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Program:
    """Base class for program nodes."""

    def __str__(self) -> str:
        return render_program(self)


@dataclass(frozen=True)
class PropVar(Formula):
    name: str


@dataclass(frozen=True)
class Nominal(Formula):
    name: str


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Neg(Formula):
    """Paraconsistent negation.  Classical negation is the derived form
    ``Implies(f, Bottom())`` and never a distinct node."""

    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class At(Formula):
    nominal: str
    body: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    program: Program
    body: Formula


@dataclass(frozen=True)
class Box(Formula):
    program: Program
    body: Formula


@dataclass(frozen=True)
class Atomic(Program):
    name: str


@dataclass(frozen=True)
class Seq(Program):
    first: Program
    second: Program


@dataclass(frozen=True)
class Choice(Program):
    left: Program
    right: Program


@dataclass(frozen=True)
class Star(Program):
    body: Program


@dataclass(frozen=True)
class Test(Program):
    condition: Formula

    __test__ = False  # keep pytest from collecting the AST node


@dataclass(frozen=True)
class SignedFormula:
    """A formula or its minus form.  ``minus`` applies at top level only;
    a minus-marked formula asserts global *failure* of the body."""

    formula: Formula
    minus: bool = False

    def __str__(self) -> str:
        if self.minus:
            return f"({render(self.formula)})-"
        return render(self.formula)


def cneg(f: Formula) -> Formula:
    """Classical negation ~f, the derived form f -> false."""
    return Implies(f, Bottom())


def top() -> Formula:
    """The derived constant true, i.e. ~false."""
    return Implies(Bottom(), Bottom())


def iff(f: Formula, g: Formula) -> Formula:
    """Biconditional (f -> g) & (g -> f)."""
    return And(Implies(f, g), Implies(g, f))


# ---------------------------------------------------------------------------
# Signatures and name collection


@dataclass(frozen=True)
class Signature:
    """The vocabulary of a formula set or model: three pairwise disjoint
    name sets."""

    propositions: frozenset[str] = frozenset()
    nominals: frozenset[str] = frozenset()
    actions: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        clashes = (
            (self.propositions & self.nominals)
            | (self.propositions & self.actions)
            | (self.nominals & self.actions)
        )
        if clashes:
            raise ValueError(
                "signature namespaces must be disjoint; shared names: "
                + ", ".join(sorted(clashes))
            )

    def union(self, other: "Signature") -> "Signature":
        return Signature(
            self.propositions | other.propositions,
            self.nominals | other.nominals,
            self.actions | other.actions,
        )

    @classmethod
    def of(cls, items: Iterable[Union[Formula, Program, SignedFormula]]) -> "Signature":
        props: set[str] = set()
        noms: set[str] = set()
        acts: set[str] = set()
        for item in items:
            props |= propositions_of(item)
            noms |= nominals_of(item)
            acts |= actions_of(item)
        return cls(frozenset(props), frozenset(noms), frozenset(acts))


Syntax = Union[Formula, Program, SignedFormula]


def _children(x: Syntax) -> Iterator[Syntax]:
    if isinstance(x, SignedFormula):
        yield x.formula
    elif isinstance(x, Neg):
        yield x.body
    elif isinstance(x, (And, Or, Implies)):
        yield x.left
        yield x.right
    elif isinstance(x, At):
        yield x.body
    elif isinstance(x, (Diamond, Box)):
        yield x.program
        yield x.body
    elif isinstance(x, Seq):
        yield x.first
        yield x.second
    elif isinstance(x, Choice):
        yield x.left
        yield x.right
    elif isinstance(x, Star):
        yield x.body
    elif isinstance(x, Test):
        yield x.condition


def iter_nominals(x: Syntax) -> Iterator[str]:
    """Yield nominal names in leftmost-first traversal order, with repeats."""
    if isinstance(x, Nominal):
        yield x.name
    elif isinstance(x, At):
        yield x.nominal
    for child in _children(x):
        yield from iter_nominals(child)


def nominals_of(x: Syntax) -> frozenset[str]:
    """All nominal names occurring in x, at either @ or atom position."""
    return frozenset(iter_nominals(x))


def actions_of(x: Syntax) -> frozenset[str]:
    """All atomic action names occurring in x."""
    if isinstance(x, Atomic):
        return frozenset((x.name,))
    out: frozenset[str] = frozenset()
    for child in _children(x):
        out |= actions_of(child)
    return out


def propositions_of(x: Syntax) -> frozenset[str]:
    """All propositional variable names occurring in x."""
    if isinstance(x, PropVar):
        return frozenset((x.name,))
    out: frozenset[str] = frozenset()
    for child in _children(x):
        out |= propositions_of(child)
    return out


# ---------------------------------------------------------------------------
# Tokenizer


class ParseError(ValueError):
    """Syntax error with character position and the expected token set."""

    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        self.position = position
        self.expected = expected
        detail = f"{message} at position {position}"
        if expected:
            detail += " (expected " + " or ".join(expected) + ")"
        super().__init__(detail)


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    pos: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<nominal>'[a-z][a-z0-9_]*)
  | (?P<ident>[a-z][a-z0-9_]*)
  | (?P<arrow>->)
  | (?P<punct>[&|!~@<>\[\]();+*?])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"false", "true"}


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "nominal":
            tokens.append(_Token("nominal", m.group()[1:], pos))
        elif m.lastgroup == "ident":
            word = m.group()
            kind = word if word in _KEYWORDS else "ident"
            tokens.append(_Token(kind, word, pos))
        elif m.lastgroup == "arrow":
            tokens.append(_Token("->", "->", pos))
        elif m.lastgroup == "punct":
            tokens.append(_Token(m.group(), m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"unexpected {tok.value or 'end of input'!r}", tok.pos, (kind,))
        return self.advance()

    # formulas

    def formula(self) -> Formula:
        left = self.disj()
        if self.peek().kind == "->":
            self.advance()
            return Implies(left, self.formula())
        return left

    def disj(self) -> Formula:
        out = self.conj()
        while self.peek().kind == "|":
            self.advance()
            out = Or(out, self.conj())
        return out

    def conj(self) -> Formula:
        out = self.unary()
        while self.peek().kind == "&":
            self.advance()
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "!":
            self.advance()
            return Neg(self.unary())
        if tok.kind == "~":
            self.advance()
            return cneg(self.unary())
        if tok.kind == "@":
            self.advance()
            name = self.expect("nominal")
            return At(name.value, self.unary())
        if tok.kind == "<":
            self.advance()
            prog = self.program()
            self.expect(">")
            return Diamond(prog, self.unary())
        if tok.kind == "[":
            self.advance()
            prog = self.program()
            self.expect("]")
            return Box(prog, self.unary())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "false":
            self.advance()
            return Bottom()
        if tok.kind == "true":
            self.advance()
            return top()
        if tok.kind == "ident":
            self.advance()
            return PropVar(tok.value)
        if tok.kind == "nominal":
            self.advance()
            return Nominal(tok.value)
        if tok.kind == "(":
            self.advance()
            f = self.formula()
            self.expect(")")
            return f
        raise ParseError(
            f"unexpected {tok.value or 'end of input'!r}",
            tok.pos,
            ("proposition", "nominal", "false", "true", "("),
        )

    # programs

    def program(self) -> Program:
        out = self.prog_seq()
        while self.peek().kind == "+":
            self.advance()
            out = Choice(out, self.prog_seq())
        return out

    def prog_seq(self) -> Program:
        out = self.prog_postfix()
        while self.peek().kind == ";":
            self.advance()
            out = Seq(out, self.prog_postfix())
        return out

    def prog_postfix(self) -> Program:
        out = self.prog_primary()
        while self.peek().kind == "*":
            self.advance()
            out = Star(out)
        return out

    def prog_primary(self) -> Program:
        # A test is a formula followed by '?'.  Since an identifier or a
        # parenthesised group can open either a formula or a program, try
        # the test reading first and backtrack when '?' does not follow.
        mark = self.pos
        try:
            condition = self.formula()
            if self.peek().kind == "?":
                self.advance()
                return Test(condition)
        except ParseError:
            pass
        self.pos = mark
        tok = self.peek()
        if tok.kind == "ident":
            self.advance()
            return Atomic(tok.value)
        if tok.kind == "(":
            self.advance()
            prog = self.program()
            self.expect(")")
            return prog
        raise ParseError(
            f"unexpected {tok.value or 'end of input'!r}",
            tok.pos,
            ("action", "test", "("),
        )


def parse_formula(text: str) -> Formula:
    """Parse a formula; raises ParseError with position on bad input."""
    parser = _Parser(_tokenize(text))
    f = parser.formula()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.value!r}", tok.pos, ("end of input",))
    return f


def parse_program(text: str) -> Program:
    """Parse a program; raises ParseError with position on bad input."""
    parser = _Parser(_tokenize(text))
    p = parser.program()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.value!r}", tok.pos, ("end of input",))
    return p


# ---------------------------------------------------------------------------
# Printer

# Formula precedence levels: -> is 0 (right associative), | is 1, & is 2,
# prefixes are 3, atoms 4.  Programs: + is 0, ; is 1, postfix */? and atoms 2.


def render(f: Formula) -> str:
    """Render a formula so that parse_formula(render(f)) == f.

    The classical-negation pattern Implies(x, Bottom) is re-sugared to ~x,
    and Implies(Bottom, Bottom) to true.
    """
    return _render_f(f, 0)


def _render_f(f: Formula, context: int) -> str:
    if isinstance(f, Implies) and f.right == Bottom():
        if f.left == Bottom():
            return "true"
        return "~" + _render_f(f.left, 3)
    if isinstance(f, PropVar):
        return f.name
    if isinstance(f, Nominal):
        return "'" + f.name
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Neg):
        return "!" + _render_f(f.body, 3)
    if isinstance(f, At):
        return f"@'{f.nominal} " + _render_f(f.body, 3)
    if isinstance(f, Diamond):
        return f"<{render_program(f.program)}>" + _render_f(f.body, 3)
    if isinstance(f, Box):
        return f"[{render_program(f.program)}]" + _render_f(f.body, 3)
    if isinstance(f, And):
        text = _render_f(f.left, 2) + " & " + _render_f(f.right, 3)
        return f"({text})" if context > 2 else text
    if isinstance(f, Or):
        text = _render_f(f.left, 1) + " | " + _render_f(f.right, 2)
        return f"({text})" if context > 1 else text
    if isinstance(f, Implies):
        text = _render_f(f.left, 1) + " -> " + _render_f(f.right, 0)
        return f"({text})" if context > 0 else text
    raise TypeError(f"not a formula: {f!r}")


def render_program(p: Program) -> str:
    """Render a program so that parse_program(render_program(p)) == p."""
    return _render_p(p, 0)


def _render_p(p: Program, context: int) -> str:
    if isinstance(p, Atomic):
        return p.name
    if isinstance(p, Star):
        return _render_p(p.body, 2) + "*"
    if isinstance(p, Test):
        cond = p.condition
        if isinstance(cond, (PropVar, Nominal, Bottom)) or cond == top():
            return _render_f(cond, 4) + "?"
        return "(" + render(cond) + ")?"
    if isinstance(p, Seq):
        text = _render_p(p.first, 1) + ";" + _render_p(p.second, 2)
        return f"({text})" if context > 1 else text
    if isinstance(p, Choice):
        text = _render_p(p.left, 0) + "+" + _render_p(p.right, 1)
        return f"({text})" if context > 0 else text
    raise TypeError(f"not a program: {p!r}")


# ---------------------------------------------------------------------------
# Fischer-Ladner closure


def _closure_steps(f: Formula) -> list[Formula]:
    """One decomposition step of the closure construction."""
    if isinstance(f, Neg):
        return [f.body]
    if isinstance(f, (And, Or, Implies)):
        return [f.left, f.right]
    if isinstance(f, At):
        return [f.body]
    if isinstance(f, (Diamond, Box)):
        wrap = Diamond if isinstance(f, Diamond) else Box
        out: list[Formula] = [f.body]
        prog = f.program
        if isinstance(prog, Seq):
            out.append(wrap(prog.first, wrap(prog.second, f.body)))
        elif isinstance(prog, Choice):
            out.append(wrap(prog.left, f.body))
            out.append(wrap(prog.right, f.body))
        elif isinstance(prog, Star):
            out.append(wrap(prog.body, wrap(prog, f.body)))
        elif isinstance(prog, Test):
            if isinstance(f, Diamond):
                out.append(And(prog.condition, f.body))
            else:
                out.append(Implies(prog.condition, f.body))
        return out
    return []


def fischer_ladner_closure(
    root: Union[SignedFormula, Formula, Iterable[Union[SignedFormula, Formula]]],
) -> frozenset[Formula]:
    """Least formula set containing the root and closed under decomposition,
    program unfolding and single paraconsistent negation.

    Computed as a worklist fixpoint; the result is finite.  A minus root
    contributes its body.  An iterable of roots yields the union closure.
    """
    if isinstance(root, (SignedFormula, Formula)):
        roots: list[Union[SignedFormula, Formula]] = [root]
    else:
        roots = list(root)
    closure: set[Formula] = set()
    todo: list[Formula] = [
        r.formula if isinstance(r, SignedFormula) else r for r in roots
    ]
    while todo:
        f = todo.pop()
        if f in closure:
            continue
        closure.add(f)
        todo.extend(_closure_steps(f))
        if not isinstance(f, Neg):
            todo.append(Neg(f))
    return frozenset(closure)
