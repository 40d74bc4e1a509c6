"""Bundled proofs and non-compactness witness models."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

from ptel.model import CanonicalWorld, Model, Run, World, validate
from ptel.proof import (
    CheckResult, Family, InfStep, Proof, ProofBuilder, RulePremises, Theory,
    accepted, check_proof, conclusion_template, normalize_inf,
)
from ptel.semantics import Evaluator
from ptel.syntax import (
    AgentSignature, Always, Atom, Bottom, Common, Formula, Implies, Know, Not,
    NestedContext, ProbAgent, ProbRun, ProbRunCmp, Top, WeakPrev, active,
    build_k_nested, contradiction, everyone_n, next_n,
)

SIG = AgentSignature(("a1", "a2"))
P, Q = Atom("p"), Atom("q")
EXAMPLE1_BOUND = 100
RULE_BOUND = 12


# ------------------------------------------------------------------ proofs

def example1(bound: int = EXAMPLE1_BOUND) -> Proof:
    """From {Pr<=1/k p : k >= 1} and ~Pr=0 p derive a contradiction.

    The premises Pr<=1/i p give Pr<=0 p by the upper-bound Archimedean rule
    (in the trivial context true -> _); together with Pr>=0 p this forces
    Pr=0 p.
    """
    theory = Theory([Not(ProbRunCmp("=", Fraction(0), P))],
                    [Family("Pr<=1/{k} p", 1)], SIG)
    b = ProofBuilder()
    ctx = NestedContext((Top(),), ())
    premises = {}
    for i in range(1, bound + 1):
        phi = ProbRunCmp("<=", Fraction(1, i), P)
        premises[i] = b.prop_mp(phi, Implies(Top(), phi), b.hyp(phi))
    le0 = ProbRunCmp("<=", Fraction(0), P)
    inf = b.inf(Implies(Top(), le0), "RGA'", ctx, P, premises, r=Fraction(0), bound=bound)
    top = b.axiom(Top(), "Prop")
    s_le0 = b.mp(le0, top, inf)
    ge0 = ProbRun(Fraction(0), P)
    s_ge0 = b.axiom(ge0, "AGP1")
    not_eq0 = Not(ProbRunCmp("=", Fraction(0), P))
    s_neg = b.hyp(not_eq0)
    taut = b.axiom(Implies(ge0, Implies(le0, Implies(not_eq0, Bottom()))), "Prop")
    s1 = b.mp(Implies(le0, Implies(not_eq0, Bottom())), s_ge0, taut)
    s2 = b.mp(Implies(not_eq0, Bottom()), s_le0, s1)
    b.mp(Bottom(), s_neg, s2)
    return Proof(b.steps, theory, SIG, bound)


RULE_CTX = NestedContext((Q, Atom("r"), Atom("s")), ("X", "K[a1]"))

RULE_PARAMS: dict[str, dict] = {
    "RU": dict(alpha=P, beta=Q),
    "RS": dict(alpha=P, beta=Q),
    "RC": dict(alpha=P),
    "RGA": dict(alpha=P, r=Fraction(1, 2)),
    "RA": dict(alpha=Q, r=Fraction(2, 3), agent="a2"),
}


def rule_fixture(rule: str, ctx: NestedContext = RULE_CTX, bound: int = RULE_BOUND) -> Proof:
    """One application of an infinitary rule, each premise taken as a hypothesis
    from the theory of all its premises."""
    params = RULE_PARAMS[rule]
    family = RulePremises(rule, ctx, params["alpha"], params.get("beta"), params.get("r"),
                          params.get("agent"))
    b = ProofBuilder()
    probe = normalize_inf(InfStep("", P, rule, ctx, params["alpha"], params.get("beta"),
                                  params.get("r"), params.get("agent")))
    premises = {i: b.hyp(family.member(i, SIG)) for i in range(family.first, bound + 1)}
    b.inf(build_k_nested(ctx, conclusion_template(probe)), rule, ctx, params["alpha"],
          premises, beta=params.get("beta"), r=params.get("r"), agent=params.get("agent"),
          bound=bound)
    return Proof(b.steps, Theory([], [family], SIG), SIG, bound)


def finitary_fixture() -> Proof:
    """Hyp, Prop, MP and every necessitation rule."""
    b = ProofBuilder()
    h = b.hyp(Q)
    b.prop_mp(Q, Implies(Not(Q), P), h)
    phi = Implies(P, P)
    s = b.axiom(phi, "Prop")
    for rule, wrap, agent in (("RXN", lambda f: next_n(1, f), None),
                              ("RZN", WeakPrev, None),
                              ("RKN", lambda f: Know("a1", f), "a1"),
                              ("RGPN", lambda f: ProbRun(Fraction(1), f), None),
                              ("RPN", lambda f: ProbAgent("a2", Fraction(1), f), "a2")):
        phi = wrap(phi)
        s = b.nec(phi, rule, s, agent)
    return Proof(b.steps, Theory([Q], sig=SIG), SIG)


def agpz_fixture() -> Proof:
    """Pr=1 Z(p & ~p): the initial-instant axiom plus the primed form Pr<=1."""
    start = WeakPrev(contradiction(P))
    b = ProofBuilder()
    s1 = b.axiom(ProbRun(Fraction(1), start), "AGPZ")
    s2 = b.axiom(ProbRunCmp("<=", Fraction(1), start), "AGP1")
    eq1 = ProbRunCmp("=", Fraction(1), start)
    taut = b.axiom(Implies(ProbRun(Fraction(1), start),
                           Implies(ProbRunCmp("<=", Fraction(1), start), eq1)), "Prop")
    s3 = b.mp(Implies(ProbRunCmp("<=", Fraction(1), start), eq1), s1, taut)
    s4 = b.mp(eq1, s2, s3)
    b.nec(WeakPrev(eq1), "RZN", s4)
    return Proof(b.steps, Theory(sig=SIG), SIG)


def fixtures() -> dict[str, Proof]:
    out = {"example1": example1(), "finitary": finitary_fixture(), "agpz": agpz_fixture()}
    for rule in RULE_PARAMS:
        out[f"rule-{rule}"] = rule_fixture(rule)
    out["rule-RGA'"] = example1(RULE_BOUND)
    return out


# ------------------------------------------------------ non-compactness

def _model(runs: list[Run], measure: Callable[[CanonicalWorld], dict],
           access: dict | None = None) -> Model:
    runs = tuple(runs)
    worlds = [CanonicalWorld(r, pos) for r, run in enumerate(runs) for pos in range(run.size)]
    spaces = {(c, a): ((World(c.run, c.pos), Fraction(1)),) for c in worlds for a in SIG.agents}
    return Model(SIG, ("p",), runs, access or {a: frozenset() for a in SIG.agents},
                 {c: measure(c) for c in worlds}, spaces)


def witness_next(k: int) -> tuple[Model, World, list[Formula]]:
    """{X^i p : i <= k} with ~G p: p for k+1 steps, then ~p forever."""
    model = _model([Run([{"p"}] * (k + 1), [set()])], lambda c: {0: Fraction(1)})
    formulas = [next_n(i, P) for i in range(k + 1)] + [Not(Always(P))]
    return model, World(0, 0), formulas


def witness_everyone(k: int) -> tuple[Model, World, list[Formula]]:
    """{E^i p : i <= k} with ~C p: a chain of k+2 worlds whose links
    alternate between the two agents; p fails only at the far end."""
    n = k + 2
    acts = {active(a).name for a in SIG.agents}
    runs = [Run([], [acts | ({"p"} if j < n - 1 else set())]) for j in range(n)]
    w = [CanonicalWorld(j, 0) for j in range(n)]
    access = {}
    for parity, agent in enumerate(SIG.agents):
        pairs = {(x, x) for x in w}
        for j in range(parity, n - 1, 2):
            pairs |= {(w[j], w[j + 1]), (w[j + 1], w[j])}
        access[agent] = frozenset(pairs)
    model = _model(runs, lambda c: {c.run: Fraction(1)}, access)
    formulas = [everyone_n(i, P) for i in range(k + 1)] + [Not(Common(P))]
    return model, World(0, 0), formulas


def witness_probability(k: int) -> tuple[Model, World, list[Formula]]:
    """{Pr<=1/i p : 1 <= i <= k} with ~Pr=0 p: p holds on a run of weight 1/(k+1)."""
    w = Fraction(1, k + 1)
    model = _model([Run([], [{"p"}]), Run([], [set()])], lambda c: {0: w, 1: 1 - w})
    formulas = ([ProbRunCmp("<=", Fraction(1, i), P) for i in range(1, k + 1)]
                + [Not(ProbRunCmp("=", Fraction(0), P))])
    return model, World(0, 0), formulas


WITNESSES = {"next": witness_next, "everyone": witness_everyone,
             "probability": witness_probability}


def witness_holds(family: str, k: int) -> bool:
    model, world, formulas = WITNESSES[family](k)
    ev = Evaluator(model)
    return all(ev.holds(world.run, world.time, f) for f in formulas)


# ----------------------------------------------------------------- runner

def run_fixtures(max_k: int = 20) -> list[tuple[str, bool, str]]:
    """(name, ok, detail) for every bundled proof and witness family."""
    out = []
    for name, proof in fixtures().items():
        result: CheckResult = check_proof(proof)
        out.append((f"proof {name}", accepted(result), str(result)))
    for family, make in WITNESSES.items():
        bad = [k for k in range(max_k + 1) if validate(make(k)[0]) or not witness_holds(family, k)]
        detail = "all satisfied" if not bad else f"failing k: {bad}"
        out.append((f"witness {family} k<={max_k}", not bad, detail))
    return out
