"""Proof transformations: the deduction theorem and strong necessitation.

Both work step by step.  Every step of the input proof is mapped to a short
block of steps proving the transformed formula; steps that are theorems
are copied unchanged first, since their own derivation needs no rewriting.
"""

from __future__ import annotations

from ptel.proof import (
    AxiomStep, HypStep, InfStep, MPStep, NecStep, Proof, ProofBuilder, Step,
    Theory, conclusion_template, normalize_inf, premise_template, theorem_flags,
)
from ptel.syntax import (
    And, Formula, Implies, NestedContext, Not, Or, apply_op, build_k_nested,
    expand, op_agent,
)

NEC_FOR_OP = {"X": "RXN", "Z": "RZN"}
DIST_FOR_OP = {"X": "AXImp", "Z": "AZImp"}


class TransformError(ValueError):
    pass


def _copy(builder: ProofBuilder, step: Step, rename: dict[str, str]) -> str:
    """Re-emit a theorem step under a fresh id."""
    new_id = builder._id()
    match step:
        case AxiomStep():
            out = AxiomStep(new_id, step.formula, step.axiom)
        case MPStep():
            out = MPStep(new_id, step.formula, rename[step.minor], rename[step.major])
        case NecStep():
            out = NecStep(new_id, step.formula, step.rule, rename[step.premise], step.agent)
        case InfStep():
            out = InfStep(new_id, step.formula, step.rule, step.ctx, step.alpha, step.beta,
                          step.r, step.agent, {i: rename[s] for i, s in step.premises.items()},
                          step.bound)
        case _:
            raise TransformError("hypothesis steps are never theorems")
    return builder.add(out)


def _premise_formula(step: InfStep, i: int, sig) -> Formula:
    return build_k_nested(step.ctx, premise_template(normalize_inf(step), i, sig))


# ----------------------------------------------------------------- deduction

def deduction_transform(proof: Proof, alpha: Formula, theory: Theory | None = None) -> Proof:
    """From a proof of beta from T + {alpha}, build a proof of alpha -> beta from T."""
    sig = proof.sig
    theory = proof.theory if theory is None else theory
    a_core = expand(alpha, sig)
    flags = theorem_flags(proof)
    b = ProofBuilder("d")
    plain: dict[str, str] = {}   # theorem steps copied verbatim
    cond: dict[str, str] = {}    # step id -> id proving alpha -> formula
    used_alpha = False

    def weaken(step_id: str, phi: Formula) -> str:
        # phi -> (alpha -> phi)
        return b.prop_mp(phi, Implies(alpha, phi), step_id)

    for step, flag in zip(proof.steps, flags):
        phi = step.formula
        if flag:
            plain[step.id] = _copy(b, step, plain)
            cond[step.id] = weaken(plain[step.id], phi)
        elif isinstance(step, HypStep):
            if expand(phi, sig) == a_core:
                used_alpha = True
                cond[step.id] = b.axiom(Implies(alpha, phi), "Prop")
            else:
                cond[step.id] = weaken(b.hyp(phi), phi)
        elif isinstance(step, MPStep):
            major = _formula_of(proof, step.major)
            minor = _formula_of(proof, step.minor)
            # (alpha -> A) -> ((alpha -> (A -> B)) -> (alpha -> B))
            target = Implies(alpha, phi)
            s1 = b.prop_mp(Implies(alpha, minor),
                           Implies(Implies(alpha, major), target), cond[step.minor])
            cond[step.id] = b.mp(target, cond[step.major], s1)
        elif isinstance(step, InfStep):
            cond[step.id] = _deduce_inf(b, proof, step, alpha, cond)
        else:
            raise TransformError(f"step {step.id}: necessitation applied to a non-theorem")
    if not used_alpha:
        raise TransformError("alpha is not used as a hypothesis in this proof")
    return Proof(b.steps, theory.without(alpha), sig, proof.bound)


def _formula_of(proof: Proof, step_id: str) -> Formula:
    for s in proof.steps:
        if s.id == step_id:
            return s.formula
    raise TransformError(f"unknown step {step_id!r}")


def _deduce_inf(b: ProofBuilder, proof: Proof, step: InfStep, alpha: Formula,
                cond: dict[str, str]) -> str:
    """Rebuild an infinitary step with top premise alpha & beta_k."""
    sig = proof.sig
    ctx = step.ctx
    top = ctx.premises[-1]
    new_ctx = NestedContext(ctx.premises[:-1] + (And(alpha, top),), ctx.ops)

    premises = {}
    for i, sid in step.premises.items():
        old = _premise_formula(step, i, sig)
        new = build_k_nested(new_ctx, premise_template(normalize_inf(step), i, sig))
        # (alpha -> (beta_k -> Y)) -> ((alpha & beta_k) -> Y)
        premises[i] = b.prop_mp(Implies(alpha, old), new, cond[sid])
    concl = build_k_nested(new_ctx, conclusion_template(normalize_inf(step)))
    inf = b.add(InfStep(b._id(), concl, step.rule, new_ctx, step.alpha, step.beta, step.r,
                        step.agent, premises, step.bound))
    # ((alpha & beta_k) -> Y) -> (alpha -> (beta_k -> Y))
    return b.prop_mp(concl, Implies(alpha, step.formula), inf)


# ------------------------------------------------------ strong necessitation

def strong_necessitation_transform(proof: Proof, op: str, theory: Theory | None = None) -> Proof:
    """From a proof of gamma from T, build a proof of op gamma from {op d : d in T}.

    `op` is "X", "Z" or "K[agent]".
    """
    agent = op_agent(op)
    sig = proof.sig
    theory = proof.theory if theory is None else theory
    nec_rule = NEC_FOR_OP.get(op, "RKN")
    dist = DIST_FOR_OP.get(op, "AKImp")
    flags = theorem_flags(proof)
    b = ProofBuilder("n")
    plain: dict[str, str] = {}
    boxed: dict[str, str] = {}

    for step, flag in zip(proof.steps, flags):
        phi = step.formula
        if flag:
            plain[step.id] = _copy(b, step, plain)
            boxed[step.id] = b.nec(apply_op(op, phi), nec_rule, plain[step.id], agent)
        elif isinstance(step, HypStep):
            boxed[step.id] = b.hyp(apply_op(op, phi))
        elif isinstance(step, MPStep):
            minor = _formula_of(proof, step.minor)
            major = _formula_of(proof, step.major)
            # op(A -> B) -> (op A -> op B)
            ax = b.axiom(Implies(apply_op(op, major),
                                 Implies(apply_op(op, minor), apply_op(op, phi))), dist)
            s1 = b.mp(Implies(apply_op(op, minor), apply_op(op, phi)), boxed[step.major], ax)
            boxed[step.id] = b.mp(apply_op(op, phi), boxed[step.minor], s1)
        elif isinstance(step, InfStep):
            boxed[step.id] = _necessitate_inf(b, proof, step, op, boxed)
        else:
            raise TransformError(f"step {step.id}: necessitation applied to a non-theorem")
    return Proof(b.steps, theory.wrapped(op), sig, proof.bound)


def _necessitate_inf(b: ProofBuilder, proof: Proof, step: InfStep, op: str,
                     boxed: dict[str, str]) -> str:
    """Rebuild an infinitary step in the context extended by op."""
    sig = proof.sig
    ctx = step.ctx
    top = ctx.premises[-1]
    taut = Or(top, Not(top))
    new_ctx = NestedContext(ctx.premises + (taut,), ctx.ops + (op,))
    norm = normalize_inf(step)
    premises = {}
    for i, sid in step.premises.items():
        old = apply_op(op, _premise_formula(step, i, sig))
        new = build_k_nested(new_ctx, premise_template(norm, i, sig))
        # Y -> ((b | ~b) -> Y)
        premises[i] = b.prop_mp(old, new, boxed[sid])
    concl = build_k_nested(new_ctx, conclusion_template(norm))
    inf = b.add(InfStep(b._id(), concl, step.rule, new_ctx, step.alpha, step.beta, step.r,
                        step.agent, premises, step.bound))
    # ((b | ~b) -> Y) -> Y
    return b.prop_mp(concl, apply_op(op, step.formula), inf)
