"""Randomized trial loops shared by the unit and acceptance tests."""

import random
from dataclasses import dataclass, field, replace

from ptel.gen import GenParams, gen_formula, gen_model, gen_proof
from ptel.oracle import brute_force_holds
from ptel.proof import (
    InfStep, MPStep, NecStep, Proof, accepted, check_proof, theorem_flags,
)
from ptel.semantics import Evaluator, iterated_everyone_holds
from ptel.syntax import Common, Implies, Not, apply_op, expand
from ptel.transform import deduction_transform, strong_necessitation_transform


@dataclass
class OracleTally:
    pairs: int = 0
    checks: int = 0
    definite: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def definite_rate(self) -> float:
        return self.definite / self.checks if self.checks else 0.0


def oracle_trials(pairs: int, seed: int = 0, max_depth: int = 5) -> OracleTally:
    """Compare the truth-set engine with the brute-force oracle on random
    (model, formula) pairs, at every time up to p + 3 loop lengths."""
    tally = OracleTally()
    rng = random.Random(seed)
    base = GenParams(depth=(0, max_depth), core_only=True)
    for i in range(pairs):
        params = base.with_seed(seed * 100_003 + i)
        model = gen_model(params)
        phi = gen_formula(params, rng=rng)
        ev = Evaluator(model)
        horizon = 4 * max(run.size for run in model.runs) + 4
        for r, run in enumerate(model.runs):
            for n in range(run.p + 3 * run.ell):
                got = brute_force_holds(model, r, n, phi, horizon)
                tally.checks += 1
                if got is None:
                    continue
                tally.definite += 1
                if got != ev.holds(r, n, phi):
                    tally.mismatches.append((params.seed, str(phi), r, n))
        tally.pairs += 1
    return tally


def common_trials(models: int, seed: int = 0) -> list:
    """Models and worlds where C disagrees with E^k for all k up to the
    number of canonical worlds."""
    bad = []
    rng = random.Random(seed)
    params = GenParams(edge_density=0.5, depth=(0, 2), core_only=True)
    for i in range(models):
        p = params.with_seed(seed * 7 + i)
        model = gen_model(p)
        phi = gen_formula(p, rng=rng)
        ev = Evaluator(model)
        c_phi = expand(Common(phi), model.signature)
        for r, run in enumerate(model.runs):
            for n in range(run.size + run.ell):
                if ev.holds(r, n, c_phi) != iterated_everyone_holds(model, r, n, phi):
                    bad.append((p.seed, str(phi), r, n))
    return bad


def corrupted(proof, pos):
    """A copy of the proof whose step at `pos` claims the negation of its formula."""
    steps = list(proof.steps)
    steps[pos] = replace(steps[pos], formula=Not(steps[pos].formula))
    return Proof(steps, proof.theory, proof.sig, proof.bound)


def relabeled(proof, prefix="z"):
    """The same proof with every step id renamed."""
    names = {s.id: f"{prefix}{i}" for i, s in enumerate(reversed(proof.steps))}
    steps = []
    for s in proof.steps:
        s = replace(s, id=names[s.id])
        if isinstance(s, MPStep):
            s = replace(s, minor=names[s.minor], major=names[s.major])
        elif isinstance(s, NecStep):
            s = replace(s, premise=names[s.premise])
        elif isinstance(s, InfStep):
            s = replace(s, premises={i: names[v] for i, v in s.premises.items()})
        steps.append(s)
    return Proof(steps, proof.theory, proof.sig, proof.bound)


@dataclass
class TransformTally:
    proofs: int = 0
    with_inf: int = 0
    failures: list = field(default_factory=list)


def _has_inf(proof) -> bool:
    return any(isinstance(s, InfStep) for s in proof.steps)


def deduction_trials(count: int, seed: int = 0) -> TransformTally:
    """Generated proofs of beta from T + {alpha}, every third one with an
    infinitary step; each is transformed and re-checked."""
    tally = TransformTally()
    rng = random.Random(seed)
    for i in range(count):
        proof, alpha = gen_proof(GenParams(seed=seed * 1_000 + i), rng, infinitary=i % 3 == 0)
        out = deduction_transform(proof, alpha)
        result = check_proof(out)
        want = expand(Implies(alpha, proof.conclusion), proof.sig)
        ok = accepted(result) and expand(out.conclusion, proof.sig) == want
        if _has_inf(out):
            tally.with_inf += 1
        if not ok:
            tally.failures.append((i, str(result)))
        tally.proofs += 1
    return tally


def necessitation_trials(count: int, seed: int = 0) -> TransformTally:
    """Generated proofs of gamma from T under X, Z and K[a]; half of them
    hypothesis-free, which must stay theorem-flagged throughout."""
    tally = TransformTally()
    rng = random.Random(seed)
    for i in range(count):
        params = GenParams(seed=seed * 1_000 + i)
        hyps = i % 2 == 0
        proof, _ = gen_proof(params, rng, infinitary=i % 3 == 0, hypotheses=hyps)
        op = rng.choice(("X", "Z", f"K[{rng.choice(params.signature.agents)}]"))
        out = strong_necessitation_transform(proof, op)
        result = check_proof(out)
        want = expand(apply_op(op, proof.conclusion), proof.sig)
        ok = accepted(result) and expand(out.conclusion, proof.sig) == want
        if not hyps and all(theorem_flags(proof)):
            ok = ok and all(theorem_flags(out))
        if _has_inf(out):
            tally.with_inf += 1
        if not ok:
            tally.failures.append((i, op, str(result)))
        tally.proofs += 1
    return tally
