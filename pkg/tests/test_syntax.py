import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ptel.gen import GenParams, gen_formula
from ptel.grammar import parse, unparse
from ptel.syntax import (
    OMEGA, ONE, AgentSignature, And, Atom, Common, Everyone, FormulaSyntaxError,
    Implies, Know, NestedContext, Next, Not, OrdinalRank, ProbAgent, ProbRun,
    ProbRunCmp, Top, Until, WeakPrev, build_k_nested, everyone_n, expand, is_core,
    match_k_nested, node_count, rank, subformulas,
)

SIG = AgentSignature(("a1", "a2", "a3"))
p, q = Atom("p"), Atom("q")


def test_parse_next():
    assert parse("X p") == Next(p)


def test_parse_prob_run():
    assert parse("Pr>=1/2 (p & ~q)") == ProbRun(Fraction(1, 2), And(p, Not(q)))


def test_print_examples():
    assert unparse(Next(p)) == "X p"
    assert unparse(ProbAgent("a1", Fraction(1, 3), p)) == "Pr[a1]>=1/3 p"
    assert parse(unparse(And(p, Not(q)))) == And(p, Not(q))


def test_parse_k4_display_matches_builder():
    text = "b4 -> K[a3](b3 -> X(b2 -> K[a1](b1 -> Z(b0 -> alpha))))"
    ctx = NestedContext(tuple(Atom(f"b{i}") for i in range(5)), ("Z", "K[a1]", "X", "K[a3]"))
    built = build_k_nested(ctx, Atom("alpha"))
    assert parse(text, SIG) == built
    assert unparse(built) == text


@pytest.mark.parametrize("text", ["p &", "K[zz] p", "Pr>=3/2 p", "Pr>=1/0 p", "(p", "p q"])
def test_parse_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse(text, SIG)


def test_syntax_error_has_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse("p & & q")
    assert "position" in str(info.value)


def test_precedence_and_associativity():
    assert parse("p -> q -> p") == Implies(p, Implies(q, p))
    assert parse("p & q U p") == And(p, Until(q, p))
    assert parse("~p U q") == Until(Not(p), q)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32))
def test_round_trip_generated(seed):
    params = GenParams(seed=seed, depth=(0, 5), agents=3)
    phi = gen_formula(params)
    assert parse(unparse(phi), params.signature) == phi


def test_expand_examples():
    assert expand(parse("F p")) == Until(Not(And(p, Not(p))), p)
    assert expand(Everyone(p), AgentSignature(("a1", "a2"))) == And(Know("a1", p), Know("a2", p))
    assert expand(ProbRunCmp("<=", Fraction(2, 3), p)) == ProbRun(Fraction(1, 3), Not(p))
    assert expand(parse("Pr<1/2 p")) == Not(ProbRun(Fraction(1, 2), p))


def test_expand_everyone_needs_signature():
    with pytest.raises(ValueError):
        expand(Everyone(p))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_expand_is_core_and_idempotent(seed):
    params = GenParams(seed=seed, depth=(0, 4))
    core = expand(gen_formula(params), params.signature)
    assert is_core(core)
    assert expand(core, params.signature) == core


def test_build_k_nested_small_cases():
    ctx0 = NestedContext((q,), ())
    assert build_k_nested(ctx0, p) == Implies(q, p)
    ctx1 = NestedContext((Top(), Top()), ("X",))
    assert build_k_nested(ctx1, p) == Implies(Top(), Next(Implies(Top(), p)))


def test_match_k_nested():
    ctx0 = NestedContext((q,), ())
    assert match_k_nested(Implies(q, p), ctx0) == p
    assert match_k_nested(expand(Implies(q, p)), ctx0) == p
    assert match_k_nested(p, NestedContext((q, q), ("X",))) is None


def test_context_invariants():
    with pytest.raises(ValueError):
        NestedContext((p,), ("X",))
    with pytest.raises(ValueError):
        NestedContext((p, q), ("Y",))


def test_rank_examples():
    assert rank(p) == OrdinalRank(0, 0)
    assert rank(Common(p)) == OMEGA
    assert rank(expand(everyone_n(5, p), SIG)) < rank(Common(p))
    assert str(rank(Common(Next(p)))) == "omega + 1"


def test_ordinal_addition():
    assert OrdinalRank(1, 3) + OrdinalRank(0, 2) == OrdinalRank(1, 5)
    assert OrdinalRank(1, 3) + OrdinalRank(2, 1) == OrdinalRank(3, 1)
    rng = random.Random(1)
    for _ in range(200):
        a, b, c = (OrdinalRank(rng.randint(0, 3), rng.randint(0, 5)) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        if b < c:
            assert a + b < a + c
    assert ONE + OMEGA == OMEGA


def test_subformulas():
    assert subformulas(p) == [p]
    phi = And(p, Not(p))
    assert subformulas(phi) == [p, Not(p), phi]
    big = expand(parse("K[a1](p U q) & Z(p & p)", SIG))
    subs = subformulas(big)
    assert len(subs) <= node_count(big)
    for i, f in enumerate(subs):
        assert all(subs.index(c) < i for c in f.children())


def test_weak_prev_token():
    assert parse("Z p") == WeakPrev(p)
