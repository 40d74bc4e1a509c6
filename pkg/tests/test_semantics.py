import re
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from ptel.gen import GenParams, gen_formula, gen_model
from ptel.grammar import parse
from ptel.model import CanonicalWorld, load_model, model_from_dict
from ptel.oracle import brute_force_holds
from ptel.semantics import (
    Evaluator, common_holds, consequence_in_model, eval_agent_probability,
    eval_run_probability, holds, holds_at_all_instances, truth_set, valid_in_model,
)
from ptel.syntax import Atom, Know, Next, WeakPrev, contradiction, expand
from ptel.upset import UPSet
from trials import common_trials, oracle_trials

DATA = Path(__file__).resolve().parent.parent / "data"
p = Atom("p")


def model(runs, agents=("a1",), access=None, run_measure=None, spaces=None):
    return model_from_dict({
        "agents": list(agents), "atoms": ["p", "q"],
        "runs": [{"stem": s, "loop": l} for s, l in runs],
        "access": access or {},
        "run_measure": run_measure or {"default": {str(i): f"1/{len(runs)}" for i in range(len(runs))}},
        "agent_spaces": spaces or {"default_agent": [{"world": [0, 0], "w": "1"}]}})


def test_atom_truth_set_is_valuation():
    m = model([([["p"], []], [["p"], [], []])])
    assert truth_set(m, 0, p) == UPSet([True, False], [True, False, False])


def test_know_vacuous_when_inactive():
    m = model([([], [["p"]])])
    assert holds(m, 0, 0, Know("a1", contradiction(p)))


def test_next_weak_prev_inversion():
    for seed in range(30):
        params = GenParams(seed=seed, core_only=True)
        m, phi = gen_model(params), gen_formula(params)
        for r in range(len(m.runs)):
            assert truth_set(m, r, Next(WeakPrev(phi))) == truth_set(m, r, phi)


def test_holds_at_all_instances():
    m = model([([["p"]], [[], ["p"]])])
    assert holds_at_all_instances(m, CanonicalWorld(0, 0), p)
    stemless = model([([], [["p"], []])])
    assert not holds_at_all_instances(stemless, CanonicalWorld(0, 0), parse("Z false"))
    assert holds(stemless, 0, 0, parse("Z false"))
    assert holds_at_all_instances(stemless, CanonicalWorld(0, 1), parse("true"))


def test_common_without_relations_is_plain_truth():
    m = model([([["p"]], [[]])])
    assert common_holds(m, 0, 0, p) is True
    assert common_holds(m, 0, 1, p) is False


def test_common_two_linked_worlds():
    act = "active(a1)"
    pairs = [[[0, 0], [0, 1]], [[0, 1], [0, 0]], [[0, 0], [0, 0]], [[0, 1], [0, 1]]]
    m = model([([["p", act]], [["p", act]])], access={"a1": pairs})
    assert common_holds(m, 0, 0, p)
    m2 = model([([["p", act]], [[act]])], access={"a1": pairs})
    assert not common_holds(m2, 0, 0, p)


def test_run_probability_examples():
    m = load_model(DATA / "two_runs.json")
    c = CanonicalWorld(0, 0)
    assert eval_run_probability(m, c, parse("true")) == 1
    assert eval_run_probability(m, c, parse("Z false")) == 1
    # p at time 0 of run 1 (weight 2/3) and of run 0 (weight 1/3)
    assert eval_run_probability(m, c, parse("p & ~active(a1)")) == Fraction(2, 3)


def test_agent_probability_examples():
    m = model([([], [["p"], []])], spaces={"default_agent": [{"world": [0, 4], "w": "1"}]})
    assert eval_agent_probability(m, CanonicalWorld(0, 0), "a1", parse("true")) == 1
    assert eval_agent_probability(m, CanonicalWorld(0, 0), "a1", p) == 1
    four = [{"world": [0, t], "w": "1/4"} for t in (0, 2, 4, 5)]
    m = model([([], [["p"], []])], spaces={"default_agent": four})
    assert eval_agent_probability(m, CanonicalWorld(0, 1), "a1", parse("~(p & Z false)")) == Fraction(3, 4)


def test_since_and_axiom_instances_hold():
    for seed in range(40):
        params = GenParams(seed=seed, core_only=True, depth=(0, 2))
        m = gen_model(params)
        a, b = gen_formula(params), gen_formula(params.with_seed(seed + 999))
        ev = Evaluator(m)
        assert ev.valid(parse(f"(Z ({a}) & Z ({b})) -> Z (({a}) & ({b}))", m.signature))
        assert ev.valid(parse(f"~Z false -> (X Z ({a}) <-> Z X ({a}))", m.signature))
        for r, run in enumerate(m.runs):
            for n in range(run.p + 3 * run.ell):
                phi = parse(f"({a}) S ({b})", m.signature)
                assert brute_force_holds(m, r, n, phi, 40) == ev.holds(r, n, phi)


def test_validity_and_consequence():
    for seed in range(20):
        m = gen_model(GenParams(seed=seed))
        assert valid_in_model(m, parse("p | ~p"))
        assert consequence_in_model(m, [p], p)
    m = load_model(DATA / "two_runs.json")
    assert consequence_in_model(m, [parse("p | q"), parse("~q")], p)
    assert not valid_in_model(m, p)


def test_oracle_examples():
    all_p = model([([["p"]], [["p"], ["p"]])])
    assert brute_force_holds(all_p, 0, 0, parse("G p"), 1 + 2 * 2) is True
    assert brute_force_holds(all_p, 0, 0, parse("F q"), 3) is False


def test_oracle_agreement_sample():
    tally = oracle_trials(150, seed=3)
    assert not tally.mismatches
    assert tally.definite_rate >= 0.8


def test_common_matches_iterated_everyone():
    assert common_trials(40, seed=2) == []


DERIVED = [
    "~Z a -> Z ~a",
    "Z (a & b) <-> (Z a & Z b)",
    "(Z a | Z b) -> Z (a | b)",
    "(X a -> X b) <-> X (a -> b)",
    "(X a & X b) <-> X (a & b)",
    "(X a | X b) <-> X (a | b)",
    "(a S b) <-> (b | (a & ~Z false & Z (a S b)))",
    "Pr>=3/4 a -> Pr>=1/2 a",
    "Pr[a1]>=3/4 a -> Pr[a1]>=1/4 a",
    "Pr[a2]>=1 a -> Pr[a2]>=0 a",
]


@pytest.mark.parametrize("schema", DERIVED)
def test_derived_validities(schema):
    for seed in range(40):
        params = GenParams(seed=seed, depth=(0, 2))
        m = gen_model(params)
        a, b = gen_formula(params), gen_formula(params.with_seed(seed + 17))
        text = re.sub(r"\bb\b", f"({b})", re.sub(r"\ba\b", f"({a})", schema))
        assert valid_in_model(m, parse(text, m.signature)), (seed, text)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31))
def test_agp_weak_prev_probability_is_one(seed):
    m = gen_model(GenParams(seed=seed))
    ev = Evaluator(m)
    bot_prev = expand(parse("Z false"))
    for c in m.worlds():
        assert ev.run_probability(c, bot_prev) == 1
