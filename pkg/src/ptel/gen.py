"""Seeded random generators for models, formulas, axiom instances and proofs."""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction

from ptel.axioms import AXIOM_IDS, random_instance
from ptel.model import CanonicalWorld, Model, Run, World
from ptel.proof import (
    InfStep, Proof, ProofBuilder, RulePremises, Theory, conclusion_template,
    normalize_inf,
)
from ptel.syntax import (
    AgentSignature, Always, And, Atom, Bottom, Common, Eventually, Everyone,
    Formula, Iff, Implies, Know, NestedContext, Next, Not, Once, Or, ProbAgent,
    ProbAgentCmp, ProbRun, ProbRunCmp, Since, SoFar, Top, Until, WeakPrev, active,
    build_k_nested,
)

ATOM_NAMES = ("p", "q", "r", "s", "t", "u")


@dataclass(frozen=True)
class GenParams:
    seed: int = 0
    runs: tuple[int, int] = (1, 3)
    stem: tuple[int, int] = (0, 2)
    loop: tuple[int, int] = (1, 3)
    agents: int = 2
    atoms: int = 2
    edge_density: float = 0.3
    active_rate: float = 0.75
    depth: tuple[int, int] = (0, 3)
    denominator_bound: int = 4
    core_only: bool = False
    agent_names: tuple[str, ...] | None = None
    atom_list: tuple[str, ...] | None = None

    def __post_init__(self):
        for name in ("runs", "stem", "loop", "depth"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"empty range for {name}: {lo}..{hi}")
        if self.runs[0] < 1 or self.loop[0] < 1 or self.stem[0] < 0:
            raise ValueError("need at least one run and loops of length >= 1")
        if self.agent_names is None and not 1 <= self.agents <= 4:
            raise ValueError("agent count must be in 1..4")
        if self.atom_list is None and not 1 <= self.atoms <= 6:
            raise ValueError("atom count must be in 1..6")
        if self.agent_names is not None and not self.agent_names:
            raise ValueError("need at least one agent")
        if self.atom_list is not None and not self.atom_list:
            raise ValueError("need at least one atom")
        if not 0 <= self.edge_density <= 1:
            raise ValueError("edge density must lie in [0, 1]")
        if self.denominator_bound < 1:
            raise ValueError("denominator bound must be positive")

    def with_seed(self, seed: int) -> "GenParams":
        return replace(self, seed=seed)

    @property
    def signature(self) -> AgentSignature:
        if self.agent_names is not None:
            return AgentSignature(tuple(self.agent_names))
        return AgentSignature(tuple(f"a{i + 1}" for i in range(self.agents)))

    @property
    def atom_names(self) -> tuple[str, ...]:
        if self.atom_list is not None:
            return tuple(self.atom_list)
        return ATOM_NAMES[:self.atoms]


def _weights(rng: random.Random, n: int) -> list[Fraction]:
    raw = [rng.randint(0, 3) for _ in range(n)]
    if not any(raw):
        raw[rng.randrange(n)] = 1
    total = sum(raw)
    return [Fraction(x, total) for x in raw]


def gen_model(params: GenParams) -> Model:
    """A random model that satisfies every structural condition by construction."""
    rng = random.Random(params.seed)
    sig = params.signature
    atoms = params.atom_names
    act = [active(a).name for a in sig.agents]

    def valuation():
        v = {x for x in atoms if rng.random() < 0.5}
        v |= {x for x in act if rng.random() < params.active_rate}
        return frozenset(v)

    runs = []
    for _ in range(rng.randint(*params.runs)):
        stem = tuple(valuation() for _ in range(rng.randint(*params.stem)))
        loop = tuple(valuation() for _ in range(rng.randint(*params.loop)))
        runs.append(Run(stem, loop))
    runs = tuple(runs)
    worlds = [CanonicalWorld(r, pos) for r, run in enumerate(runs) for pos in range(run.size)]

    def val(c):
        return runs[c.run].valuation(c.pos)

    access = {}
    for a, flag in zip(sig.agents, act):
        live = [c for c in worlds if flag in val(c)]
        parent = {c: c for c in live}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, x in enumerate(live):
            for y in live[i + 1:]:
                if rng.random() < params.edge_density:
                    parent[find(x)] = find(y)
        classes: dict = {}
        for c in live:
            classes.setdefault(find(c), []).append(c)
        access[a] = frozenset((x, y) for cls in classes.values() for x in cls for y in cls)

    run_measure = {}
    agent_spaces = {}
    for c in worlds:
        run_measure[c] = dict(enumerate(_weights(rng, len(runs))))
        for a in sig.agents:
            k = rng.randint(1, 3)
            sample = []
            for _ in range(k):
                rr = rng.randrange(len(runs))
                sample.append(World(rr, rng.randint(0, runs[rr].size + runs[rr].ell + 1)))
            agent_spaces[(c, a)] = tuple(zip(sample, _weights(rng, k)))
    return Model(sig, atoms, runs, access, run_measure, agent_spaces)


# ---------------------------------------------------------------- formulas

_UNARY_CORE = ("not", "next", "prev", "know", "common", "prob", "prob_agent")
_UNARY_SURFACE = ("F", "G", "O", "H", "E", "prob_cmp", "prob_agent_cmp")
_BINARY_CORE = ("and", "until", "since")
_BINARY_SURFACE = ("or", "implies", "iff")


def gen_bound(rng: random.Random, params: GenParams) -> Fraction:
    d = rng.randint(1, params.denominator_bound)
    return Fraction(rng.randint(0, d), d)


def gen_formula(params: GenParams, sig: AgentSignature | None = None,
                atoms: tuple[str, ...] | None = None, rng: random.Random | None = None,
                depth: int | None = None) -> Formula:
    """A depth-bounded random formula (surface syntax unless `core_only`)."""
    rng = rng or random.Random(params.seed)
    sig = sig or params.signature
    atoms = atoms or params.atom_names
    if depth is None:
        depth = rng.randint(*params.depth)
    return _formula(rng, params, sig, atoms, depth)


def _formula(rng, params, sig, atoms, depth) -> Formula:
    if depth == 0:
        roll = rng.random()
        if roll < 0.15:
            return active(rng.choice(sig.agents))
        if roll < 0.2 and not params.core_only:
            return rng.choice((Top(), Bottom()))
        return Atom(rng.choice(atoms))
    sub = lambda: _formula(rng, params, sig, atoms, rng.randint(0, depth - 1))  # noqa: E731
    unary = _UNARY_CORE + (() if params.core_only else _UNARY_SURFACE)
    binary = _BINARY_CORE + (() if params.core_only else _BINARY_SURFACE)
    if rng.random() < 0.55:
        op = rng.choice(unary)
        a = sub()
        agent = rng.choice(sig.agents)
        match op:
            case "not":
                return Not(a)
            case "next":
                return Next(a)
            case "prev":
                return WeakPrev(a)
            case "know":
                return Know(agent, a)
            case "common":
                return Common(a)
            case "prob":
                return ProbRun(gen_bound(rng, params), a)
            case "prob_agent":
                return ProbAgent(agent, gen_bound(rng, params), a)
            case "F":
                return Eventually(a)
            case "G":
                return Always(a)
            case "O":
                return Once(a)
            case "H":
                return SoFar(a)
            case "E":
                return Everyone(a)
            case "prob_cmp":
                return ProbRunCmp(rng.choice(("<", "<=", ">", "=")), gen_bound(rng, params), a)
            case "prob_agent_cmp":
                return ProbAgentCmp(agent, rng.choice(("<", "<=", ">", "=")),
                                    gen_bound(rng, params), a)
    op = rng.choice(binary)
    a, b = sub(), sub()
    return {"and": And, "until": Until, "since": Since, "or": Or,
            "implies": Implies, "iff": Iff}[op](a, b)


# ---------------------------------------------------------- axiom instances

def gen_axiom_instance(axiom_id: str, params: GenParams, rng: random.Random | None = None) -> Formula:
    """A random core instance of one schema, side conditions honoured."""
    rng = rng or random.Random(params.seed)
    sig = params.signature
    core = replace(params, core_only=True)

    def sub():
        return gen_formula(core, sig, rng=rng, depth=rng.randint(0, 1))

    return random_instance(axiom_id, rng, sub, sig, params.denominator_bound)


# ------------------------------------------------------------------ proofs

_NEC = (("RXN", "X"), ("RZN", "Z"), ("RKN", "K"), ("RGPN", None), ("RPN", "P"))


def gen_proof(params: GenParams, rng: random.Random | None = None, infinitary: bool = False,
              hypotheses: bool = True):
    """A random checkable proof and its discharged hypothesis.

    Returns (proof, alpha); alpha is None when `hypotheses` is false, in
    which case every step is a theorem.  With `infinitary` one rule
    application is included, its premises drawn from a premise family.
    """
    rng = rng or random.Random(params.seed)
    sig = params.signature
    core = replace(params, core_only=True)

    def small():
        return gen_formula(core, sig, rng=rng, depth=rng.randint(0, 1))

    b = ProofBuilder("g")
    pool: list[tuple[str, Formula, bool]] = []   # (id, formula, theorem?)
    extra = [small() for _ in range(rng.randint(0, 2))] if hypotheses else []
    alpha = small() if hypotheses else None
    families = []
    if hypotheses:
        pool.append((b.hyp(alpha), alpha, False))

    def axiom():
        aid = rng.choice(AXIOM_IDS)
        phi = gen_axiom_instance(aid, params, rng)
        pool.append((b.axiom(phi, aid), phi, True))

    axiom()
    for _ in range(rng.randint(2, 6)):
        roll = rng.random()
        if roll < 0.3:
            axiom()
        elif roll < 0.45 and extra:
            phi = rng.choice(extra)
            pool.append((b.hyp(phi), phi, False))
        elif roll < 0.75:
            sid, phi, flag = rng.choice(pool)
            target = Or(phi, small())
            taut = b.axiom(Implies(phi, target), "Prop")
            pool.append((b.mp(target, sid, taut), target, flag))
        else:
            theorems = [x for x in pool if x[2]]
            if not theorems:
                continue
            sid, phi, _ = rng.choice(theorems)
            rule, op = rng.choice(_NEC)
            agent = rng.choice(sig.agents)
            wrapped = {"X": lambda: Next(phi), "Z": lambda: WeakPrev(phi),
                       "K": lambda: Know(agent, phi),
                       None: lambda: ProbRun(Fraction(1), phi),
                       "P": lambda: ProbAgent(agent, Fraction(1), phi)}[op]()
            pool.append((b.nec(wrapped, rule, sid, agent if op in ("K", "P") else None),
                         wrapped, True))

    if infinitary:
        rule = rng.choice(("RU", "RS", "RC", "RGA", "RA", "RGA'", "RA'"))
        k = rng.randint(0, 2)
        ctx = NestedContext(tuple(small() for _ in range(k + 1)),
                            tuple(rng.choice(("X", "Z", f"K[{rng.choice(sig.agents)}]"))
                                  for _ in range(k)))
        a, bt = small(), small()
        r = None
        if rule.startswith(("RGA", "RA")):
            # the primed forms take r in [0, 1), the plain ones r in (0, 1]
            r = Fraction(rng.randint(0, 3), 4) if rule.endswith("'") else Fraction(rng.randint(1, 4), 4)
        agent = rng.choice(sig.agents) if rule.startswith("RA") else None
        beta = bt if rule in ("RU", "RS") else None
        fam = RulePremises(rule, ctx, a, beta, r, agent)
        families.append(fam)
        bound = fam.first + rng.randint(1, 3)
        premises = {i: b.hyp(fam.member(i, sig)) for i in range(fam.first, bound + 1)}
        probe = normalize_inf(InfStep("", a, rule, ctx, a, beta, r, agent))
        concl = build_k_nested(ctx, conclusion_template(probe))
        pool.append((b.inf(concl, rule, ctx, a, premises, beta=beta, r=r, agent=agent,
                           bound=bound), concl, False))

    # end on a formula that depends on the last step and, if present, alpha
    sid, phi, flag = pool[-1]
    if alpha is not None:
        target = And(phi, alpha)
        taut = b.axiom(Implies(phi, Implies(alpha, target)), "Prop")
        s1 = b.mp(Implies(alpha, target), sid, taut)
        b.mp(target, pool[0][0], s1)
    theory = Theory(extra + ([alpha] if alpha is not None else []), families, sig)
    return Proof(b.steps, theory, sig), alpha
