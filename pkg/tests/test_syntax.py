import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdl4.syntax import (
    And,
    At,
    Atomic,
    Bottom,
    Box,
    Choice,
    Diamond,
    Implies,
    Neg,
    Nominal,
    Or,
    ParseError,
    PropVar,
    Seq,
    SignedFormula,
    Signature,
    Star,
    Test,
    actions_of,
    cneg,
    fischer_ladner_closure,
    iff,
    nominals_of,
    parse_formula,
    parse_program,
    propositions_of,
    render,
    render_program,
    top,
)
from pdl4.generators import random_formula

p, q = PropVar("p"), PropVar("q")
a, b = Atomic("a"), Atomic("b")


class TestParsing:
    def test_at_diamond_nominal(self):
        assert parse_formula("@'i <a>'j") == At("i", Diamond(a, Nominal("j")))

    def test_negated_sequence_modality(self):
        expected = Neg(Diamond(Seq(a, b), And(Neg(p), q)))
        assert parse_formula("!<a;b>(!p & q)") == expected

    def test_classical_negation_desugars(self):
        assert parse_formula("~p") == Implies(p, Bottom())

    def test_true_desugars(self):
        assert parse_formula("true") == Implies(Bottom(), Bottom())

    def test_precedence(self):
        # unary > & > | > ->, with -> right associative
        assert parse_formula("!p & q | r -> s -> t") == Implies(
            Or(And(Neg(p), q), PropVar("r")),
            Implies(PropVar("s"), PropVar("t")),
        )

    def test_at_binds_tightly(self):
        assert parse_formula("@'i p & q") == And(At("i", p), q)

    def test_program_operators(self):
        assert parse_program("a;b+c*") == Choice(Seq(a, b), Star(Atomic("c")))
        assert parse_program("p?;a") == Seq(Test(p), a)
        assert parse_program("(p & q)?") == Test(And(p, q))
        assert parse_program("(a+b)*") == Star(Choice(a, b))

    def test_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_formula("p & & q")
        assert err.value.position == 4

    def test_error_on_trailing_input(self):
        with pytest.raises(ParseError):
            parse_formula("p q")

    def test_error_on_bad_character(self):
        with pytest.raises(ParseError):
            parse_formula("p % q")


class TestRendering:
    def test_bottom(self):
        assert render(Bottom()) == "false"

    def test_box_star(self):
        assert render(At("i", Box(Star(a), p))) == "@'i [a*]p"

    def test_classical_negation_resugars(self):
        assert render(Implies(p, Bottom())) == "~p"
        assert render(top()) == "true"

    def test_minus_form(self):
        assert str(SignedFormula(p, minus=True)) == "(p)-"

    def test_minimal_parentheses(self):
        f = parse_formula("(p -> q) -> r")
        assert render(f) == "(p -> q) -> r"
        g = parse_formula("p -> (q -> r)")
        assert render(g) == "p -> q -> r"


def _signature():
    return Signature(
        frozenset({"p", "q"}), frozenset({"i", "j"}), frozenset({"a", "b"})
    )


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 6), st.randoms(use_true_random=False))
def test_parse_render_round_trip(depth, rng):
    f = random_formula(rng, _signature(), depth)
    assert parse_formula(render(f)) == f


def test_render_round_trip_programs():
    rng = random.Random(5)
    sig = _signature()
    from pdl4.generators import random_program

    for _ in range(300):
        prog = random_program(rng, sig, 3)
        assert parse_program(render_program(prog)) == prog


class TestNameCollection:
    def test_mixed(self):
        f = At("i", Diamond(a, Nominal("j")))
        assert nominals_of(f) == {"i", "j"}
        assert actions_of(f) == {"a"}

    def test_bottom_is_empty(self):
        assert nominals_of(Bottom()) == frozenset()
        assert actions_of(Bottom()) == frozenset()

    def test_inside_programs(self):
        f = Diamond(Seq(Test(p), b), Nominal("i"))
        assert nominals_of(f) == {"i"}
        assert actions_of(f) == {"b"}
        assert propositions_of(f) == {"p"}


class TestSignature:
    def test_disjointness_enforced(self):
        with pytest.raises(ValueError):
            Signature(frozenset({"p"}), frozenset(), frozenset({"p"}))

    def test_of_formulas(self):
        sig = Signature.of([parse_formula("@'i <a>(p & 'j)")])
        assert sig.propositions == {"p"}
        assert sig.nominals == {"i", "j"}
        assert sig.actions == {"a"}


class TestFischerLadnerClosure:
    def test_atom(self):
        assert fischer_ladner_closure(SignedFormula(p)) == {p, Neg(p)}

    def test_minus_box_star(self):
        boxstar = Box(Star(a), p)
        unfold = Box(a, boxstar)
        closure = fischer_ladner_closure(SignedFormula(boxstar, minus=True))
        assert closure == {boxstar, Neg(boxstar), unfold, Neg(unfold), p, Neg(p)}

    def test_diamond_test(self):
        f = Diamond(Test(q), p)
        closure = fischer_ladner_closure(SignedFormula(f))
        assert closure == {
            f,
            Neg(f),
            And(q, p),
            Neg(And(q, p)),
            q,
            Neg(q),
            p,
            Neg(p),
        }

    def test_minus_root_contains_body(self):
        f = parse_formula("<a>(p | q)")
        closure = fischer_ladner_closure(SignedFormula(f, minus=True))
        assert f in closure

    def test_negation_closure(self):
        # every member that is not itself negated has its negation present
        f = parse_formula("[a*](p -> <b>(q & 'i))")
        closure = fischer_ladner_closure(SignedFormula(f))
        for member in closure:
            if not isinstance(member, Neg):
                assert Neg(member) in closure

    def test_finite_on_random_corpus(self):
        rng = random.Random(99)
        sig = _signature()
        for _ in range(1000):
            f = random_formula(rng, sig, rng.randint(0, 8))
            closure = fischer_ladner_closure(SignedFormula(f, minus=bool(rng.getrandbits(1))))
            assert len(closure) < 10_000

    def test_iterable_roots_union(self):
        c1 = fischer_ladner_closure(SignedFormula(p))
        c2 = fischer_ladner_closure(SignedFormula(q))
        both = fischer_ladner_closure([SignedFormula(p), SignedFormula(q)])
        assert both == c1 | c2


def test_derived_forms():
    assert cneg(p) == Implies(p, Bottom())
    assert top() == Implies(Bottom(), Bottom())
    assert iff(p, q) == And(Implies(p, q), Implies(q, p))
