import pytest

from ptel.fixtures import SIG, rule_fixture
from ptel.grammar import parse
from ptel.proof import (
    InfStep, Proof, ProofBuilder, Theory, Verified, VerifiedBounded, check_proof, theorem_flags,
)
from ptel.syntax import And, Atom, Implies, Next, expand
from ptel.transform import (
    TransformError, deduction_transform, strong_necessitation_transform,
)
from trials import deduction_trials, necessitation_trials

a, b = Atom("p"), Atom("q")


def test_deduction_modus_ponens():
    imp = Implies(a, b)
    pb = ProofBuilder()
    h1, h2 = pb.hyp(a), pb.hyp(imp)
    pb.mp(b, h1, h2)
    proof = Proof(pb.steps, Theory([imp, a], sig=SIG), SIG)
    out = deduction_transform(proof, a)
    assert check_proof(out) == Verified()
    assert out.conclusion == Implies(a, b)
    assert a not in out.theory and imp in out.theory


def test_deduction_identity():
    pb = ProofBuilder()
    pb.hyp(a)
    out = deduction_transform(Proof(pb.steps, Theory([a], sig=SIG), SIG), a)
    assert check_proof(out) == Verified()
    assert out.conclusion == Implies(a, a)
    assert all(theorem_flags(out))


def test_deduction_requires_alpha_hypothesis():
    pb = ProofBuilder()
    pb.axiom(Implies(a, a), "Prop")
    with pytest.raises(TransformError):
        deduction_transform(Proof(pb.steps, Theory(sig=SIG), SIG), b)


@pytest.mark.parametrize("rule", ["RS", "RU", "RC", "RGA", "RA"])
def test_deduction_over_rule_step(rule):
    proof = rule_fixture(rule)
    inf = proof.steps[-1]
    alpha = proof.steps[0].formula      # a premise of the rule, used as the discharged hypothesis
    out = deduction_transform(proof, alpha)
    assert check_proof(out) == VerifiedBounded(proof.bound)
    new_inf = [s for s in out.steps if isinstance(s, InfStep)][-1]
    top = inf.ctx.premises[-1]
    assert new_inf.ctx.premises == inf.ctx.premises[:-1] + (And(alpha, top),)
    assert expand(out.conclusion, SIG) == expand(Implies(alpha, proof.conclusion), SIG)


def test_necessitation_of_theorem():
    pb = ProofBuilder()
    pb.axiom(Implies(a, a), "Prop")
    out = strong_necessitation_transform(Proof(pb.steps, Theory(sig=SIG), SIG), "K[a1]")
    assert check_proof(out) == Verified()
    assert out.conclusion == parse("K[a1](p -> p)")
    assert all(theorem_flags(out))


def test_necessitation_of_hypothesis():
    pb = ProofBuilder()
    pb.hyp(a)
    out = strong_necessitation_transform(Proof(pb.steps, Theory([a], sig=SIG), SIG), "X")
    assert check_proof(out) == Verified()
    assert out.conclusion == Next(a)
    assert Next(a) in out.theory


@pytest.mark.parametrize("op", ["X", "Z", "K[a2]"])
def test_necessitation_over_ru(op):
    proof = rule_fixture("RU")
    inf = proof.steps[-1]
    out = strong_necessitation_transform(proof, op)
    assert check_proof(out) == VerifiedBounded(proof.bound)
    new_inf = [s for s in out.steps if isinstance(s, InfStep)][-1]
    assert new_inf.ctx.ops == inf.ctx.ops + (op,)
    assert new_inf.ctx.premises[:-1] == inf.ctx.premises
    assert str(new_inf.ctx.premises[-1]) == "s | ~s"


def test_generated_deductions():
    tally = deduction_trials(40, seed=5)
    assert tally.failures == [] and tally.with_inf > 0


def test_generated_necessitations():
    tally = necessitation_trials(40, seed=5)
    assert tally.failures == [] and tally.with_inf > 0
