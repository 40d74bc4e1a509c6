"""Axiom schemas of the Hilbert system and a matcher for their instances.

Schemas are written once in surface syntax over metavariables and expanded
with the same routine used for ordinary formulas, so matching happens on
core formulas.  The primed probability forms are extra shapes of their
unprimed schema.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from ptel.syntax import (
    AgentSignature, And, Atom, Common, Eventually, Everyone, Formula, Iff,
    Implies, Know, Next, Not, Once, Or, ProbAgent, ProbAgentCmp, ProbRun,
    ProbRunCmp, Since, Until, WeakPrev, _node, active_agent, contradiction,
    everyone_n, expand,
)

PROP_ATOM_LIMIT = 20


class PropositionalAbstractionTooLarge(ValueError):
    pass


# ---------------------------------------------------------- pattern pieces

@_node
class Meta(Formula):
    name: str
    is_pattern_leaf = True


@_node
class ActiveMeta(Formula):
    """The activity atom of the agent bound to `agent_var`."""
    agent_var: str
    is_pattern_leaf = True


@dataclass(frozen=True)
class Th:
    """Affine threshold expression const + sum(coef * var), optionally
    capped at 1 (for min(1, r + t))."""

    const: Fraction = Fraction(0)
    coeffs: tuple[tuple[str, int], ...] = ()
    cap_one: bool = False

    @classmethod
    def var(cls, name: str) -> "Th":
        return cls(Fraction(0), ((name, 1),))

    def _combine(self, other, sign):
        if isinstance(other, Th):
            coeffs = dict(self.coeffs)
            for v, c in other.coeffs:
                coeffs[v] = coeffs.get(v, 0) + sign * c
            return Th(self.const + sign * other.const,
                      tuple(sorted((v, c) for v, c in coeffs.items() if c)))
        return Th(self.const + sign * Fraction(other), self.coeffs)

    def __add__(self, other):
        return self._combine(other, 1)

    def __radd__(self, other):
        return self._combine(other, 1)

    def __rsub__(self, other):
        neg = Th(-self.const, tuple((v, -c) for v, c in self.coeffs))
        return neg + other

    def capped(self) -> "Th":
        return Th(self.const, self.coeffs, True)

    def evaluate(self, env: dict) -> Fraction:
        out = self.const + sum(Fraction(c) * env[v] for v, c in self.coeffs)
        return min(Fraction(1), out) if self.cap_one else out

    def free(self, env: dict) -> list[str]:
        return [v for v, _ in self.coeffs if v not in env]


ALPHA, BETA, GAMMA = Meta("alpha"), Meta("beta"), Meta("gamma")
R, T = Th.var("r"), Th.var("t")
AG = "?a"


def _prob(bound, arg, agent=None, cmp=">="):
    if agent is None:
        return ProbRun(bound, arg) if cmp == ">=" else ProbRunCmp(cmp, bound, arg)
    return ProbAgent(agent, bound, arg) if cmp == ">=" else ProbAgentCmp(agent, cmp, bound, arg)


# ---------------------------------------------------------------- schemas

@dataclass(frozen=True)
class Schema:
    id: str
    group: str
    shapes: tuple[Formula, ...]
    side: Callable[[dict], bool] | None = None
    label: str = ""


def _prob_schemas(group: str, agent) -> list[Schema]:
    pre = "AGP" if agent is None else "AP"
    P = lambda cmp, b, f: _prob(b, f, agent, cmp)  # noqa: E731
    return [
        Schema(f"{pre}1", group, (P(">=", Fraction(0), ALPHA), P("<=", Fraction(1), ALPHA))),
        Schema(f"{pre}2", group, (Implies(P("<=", R, ALPHA), P("<", T, ALPHA)),
                                  Implies(P(">=", T, ALPHA), P(">", R, ALPHA))),
               side=lambda e: e["t"] > e["r"]),
        Schema(f"{pre}3", group, (Implies(P("<", T, ALPHA), P("<=", T, ALPHA)),
                                  Implies(P(">", T, ALPHA), P(">=", T, ALPHA)))),
        Schema(f"{pre}4", group, (Implies(And(And(P(">=", R, ALPHA), P(">=", T, BETA)),
                                              P(">=", Fraction(1), Not(And(ALPHA, BETA)))),
                                          P(">=", (R + T).capped(), Or(ALPHA, BETA))),)),
        Schema(f"{pre}5", group, (Implies(And(P("<=", R, ALPHA), P("<", T, BETA)),
                                          P("<", R + T, Or(ALPHA, BETA))),),
               side=lambda e: e["r"] + e["t"] <= 1),
    ]


def _build_schemas() -> list[Schema]:
    X, Z, K = Next, WeakPrev, (lambda f: Know(AG, f))
    A = ActiveMeta(AG)
    out = [
        Schema("Prop", "I", ()),
        Schema("AXNot", "II", (Iff(Not(X(ALPHA)), X(Not(ALPHA))),)),
        Schema("AXImp", "II", (Implies(X(Implies(ALPHA, BETA)), Implies(X(ALPHA), X(BETA))),)),
        Schema("AUX", "II", (Iff(Until(ALPHA, BETA),
                                 Or(BETA, And(ALPHA, X(Until(ALPHA, BETA))))),)),
        Schema("AUF", "II", (Implies(Until(ALPHA, BETA), Eventually(BETA)),)),
        Schema("AZNot", "II", (Implies(Not(Z(Not(ALPHA))), Z(ALPHA)),)),
        Schema("AZImp", "II", (Implies(Z(Implies(ALPHA, BETA)), Implies(Z(ALPHA), Z(BETA))),)),
        Schema("AZAnd", "II", (Implies(And(Z(ALPHA), Z(BETA)), Z(And(ALPHA, BETA))),)),
        Schema("AXZ", "II", (Iff(X(Z(ALPHA)), ALPHA),)),
        Schema("AXZC1", "II", (Implies(X(Z(ALPHA)), Z(X(ALPHA))),)),
        Schema("AXZC2", "II", (Implies(Not(Z(contradiction(GAMMA))),
                                       Iff(X(Z(ALPHA)), Z(X(ALPHA)))),)),
        Schema("ASZ", "II", (Iff(Since(ALPHA, BETA),
                                 Or(BETA, And(Not(Z(contradiction(ALPHA))),
                                              And(ALPHA, Z(Since(ALPHA, BETA)))))),)),
        Schema("AOZ", "II", (Once(Z(BETA)),)),
        Schema("AKImp", "III", (Implies(K(Implies(ALPHA, BETA)), Implies(K(ALPHA), K(BETA))),)),
        Schema("AKR", "III", (Implies(A, Implies(K(ALPHA), ALPHA)),)),
        Schema("AKA", "III", (Implies(A, K(A)),)),
        Schema("AKDE", "III", (Implies(Not(A), K(contradiction(ALPHA))),)),
        Schema("AKS", "III", (Implies(K(Not(ALPHA)), K(Not(K(ALPHA)))),)),
        Schema("AKT", "III", (Implies(K(ALPHA), K(K(ALPHA))),)),
        Schema("ACE", "III", ()),
    ]
    out += _prob_schemas("IV", None)
    out.append(Schema("AGPZ", "IV", (ProbRun(Fraction(1), WeakPrev(contradiction(ALPHA))),)))
    out += _prob_schemas("V", AG)
    return out


SCHEMAS: dict[str, Schema] = {s.id: s for s in _build_schemas()}
AXIOM_IDS: tuple[str, ...] = tuple(SCHEMAS)

# the usual symbolic names
ALIASES = {
    "A◯¬": "AXNot", "A◯→": "AXImp", "AU◯": "AUX", "AU♦": "AUF", "A⊖¬": "AZNot",
    "A⊖→": "AZImp", "A⊖∧": "AZAnd", "A◯⊖": "AXZ", "A◯⊖C1": "AXZC1",
    "A◯⊖C2": "AXZC2", "AS⊖": "ASZ", "AO⊖": "AOZ", "AK→": "AKImp",
    "ACE(m)": "ACE", "AGP⊖": "AGPZ",
}


def canonical_id(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in SCHEMAS:
        raise KeyError(f"unknown axiom {name!r}")
    return name


_EXPANDED: dict[str, tuple[Formula, ...]] = {
    s.id: tuple(expand(shape) for shape in s.shapes) for s in SCHEMAS.values()
}


# ---------------------------------------------------------------- matching

def _unify(pat, target, env, constraints) -> bool:
    if isinstance(pat, Meta):
        bound = env.get(pat.name)
        if bound is None:
            env[pat.name] = target
            return True
        return bound == target
    if isinstance(pat, ActiveMeta):
        if not isinstance(target, Atom):
            return False
        ag = active_agent(target)
        return ag is not None and _bind_agent(pat.agent_var, ag, env)
    if type(pat) is not type(target):
        return False
    match pat:
        case Atom(name):
            return name == target.name
        case Not(a) | Next(a) | WeakPrev(a) | Common(a):
            return _unify(a, target.arg, env, constraints)
        case And(a, b) | Until(a, b) | Since(a, b):
            return (_unify(a, target.left, env, constraints)
                    and _unify(b, target.right, env, constraints))
        case Know(ag, a):
            return _agent_ok(ag, target.agent, env) and _unify(a, target.arg, env, constraints)
        case ProbRun(s, a):
            return (_bound_ok(s, target.bound, constraints)
                    and _unify(a, target.arg, env, constraints))
        case ProbAgent(ag, s, a):
            return (_agent_ok(ag, target.agent, env)
                    and _bound_ok(s, target.bound, constraints)
                    and _unify(a, target.arg, env, constraints))
    return pat == target


def _bind_agent(var, agent, env) -> bool:
    bound = env.get(var)
    if bound is None:
        env[var] = agent
        return True
    return bound == agent


def _agent_ok(pat_agent, agent, env) -> bool:
    if pat_agent.startswith("?"):
        return _bind_agent(pat_agent, agent, env)
    return pat_agent == agent


def _bound_ok(pat_bound, value, constraints) -> bool:
    if isinstance(pat_bound, Th):
        constraints.append((pat_bound, value))
        return True
    return pat_bound == value


def _solve(constraints) -> dict | None:
    env: dict[str, Fraction] = {}
    pending = list(constraints)
    progress = True
    while pending and progress:
        progress = False
        for item in list(pending):
            expr, value = item
            free = expr.free(env)
            if not free:
                if expr.evaluate(env) != value:
                    return None
                pending.remove(item)
                progress = True
            elif len(free) == 1 and not expr.cap_one:
                var = free[0]
                coef = dict(expr.coeffs)[var]
                rest = Th(expr.const, tuple((v, c) for v, c in expr.coeffs if v != var))
                env[var] = (value - rest.evaluate(env)) / coef
                pending.remove(item)
                progress = True
    if pending:
        return None
    if any(not 0 <= v <= 1 for v in env.values()):
        return None
    return env


def _depth(phi: Formula, memo: dict) -> int:
    key = id(phi)
    if key not in memo:
        memo[key] = 1 + max((_depth(c, memo) for c in phi.children()), default=0)
    return memo[key]


def _match_ace(phi, sig) -> list[dict]:
    # C alpha -> E^m alpha, i.e. ~(C alpha & ~E^m alpha)
    if not (isinstance(phi, Not) and isinstance(phi.arg, And)
            and isinstance(phi.arg.left, Common) and isinstance(phi.arg.right, Not)):
        return []
    alpha, target = phi.arg.left.arg, phi.arg.right.arg
    if sig is None:
        return [{"alpha": alpha, "m": 0}] if target == alpha else []
    limit = _depth(target, {})
    cand = alpha
    for m in range(limit + 1):
        if cand == target:
            return [{"alpha": alpha, "m": m}]
        cand = expand(Everyone(cand), sig)
    return []


def match_axiom(phi: Formula, sig: AgentSignature | None = None) -> list[tuple[str, dict]]:
    """Every axiom schema that has `phi` (a core formula) as an instance,
    with the instantiation that produces it."""
    out = []
    if is_tautology(phi):
        skeleton, atoms = abstraction(phi)
        out.append(("Prop", {"skeleton": skeleton, "atoms": atoms}))
    for sid, shapes in _EXPANDED.items():
        if sid == "ACE":
            out.extend(("ACE", inst) for inst in _match_ace(phi, sig))
            continue
        schema = SCHEMAS[sid]
        for variant, shape in enumerate(shapes):
            env: dict = {}
            constraints: list = []
            if not _unify(shape, phi, env, constraints):
                continue
            nums = _solve(constraints)
            if nums is None:
                continue
            if schema.side is not None and not schema.side(nums):
                continue
            inst = {k.lstrip("?"): v for k, v in env.items()}
            inst.update(nums)
            inst["variant"] = variant
            out.append((sid, inst))
            break
    return out


def instantiate(axiom_id: str, inst: dict, sig: AgentSignature | None = None) -> Formula:
    """The core formula obtained by filling a schema with `inst`."""
    axiom_id = canonical_id(axiom_id)
    if axiom_id == "Prop":
        return _fill_skeleton(inst["skeleton"], inst["atoms"])
    if axiom_id == "ACE":
        alpha = inst["alpha"]
        return expand(Implies(Common(alpha), everyone_n(inst["m"], alpha)), sig)
    shape = _EXPANDED[axiom_id][inst.get("variant", 0)]
    return _subst(shape, inst)


def _subst(pat, inst):
    if isinstance(pat, Meta):
        return inst[pat.name]
    if isinstance(pat, ActiveMeta):
        return Atom(f"active({inst[pat.agent_var.lstrip('?')]})")
    match pat:
        case Atom():
            return pat
        case Not(a):
            return Not(_subst(a, inst))
        case Next(a):
            return Next(_subst(a, inst))
        case WeakPrev(a):
            return WeakPrev(_subst(a, inst))
        case Common(a):
            return Common(_subst(a, inst))
        case And(a, b):
            return And(_subst(a, inst), _subst(b, inst))
        case Until(a, b):
            return Until(_subst(a, inst), _subst(b, inst))
        case Since(a, b):
            return Since(_subst(a, inst), _subst(b, inst))
        case Know(ag, a):
            return Know(_agent(ag, inst), _subst(a, inst))
        case ProbRun(s, a):
            return ProbRun(_th(s, inst), _subst(a, inst))
        case ProbAgent(ag, s, a):
            return ProbAgent(_agent(ag, inst), _th(s, inst), _subst(a, inst))
    raise TypeError(f"unexpected pattern node {pat!r}")


def _agent(ag, inst):
    return inst[ag.lstrip("?")] if ag.startswith("?") else ag


def _th(s, inst):
    return s.evaluate(inst) if isinstance(s, Th) else s


# ------------------------------------------------- propositional tautologies

def abstraction(phi: Formula) -> tuple[Formula, tuple[Formula, ...]]:
    """Replace maximal non-boolean subformulas by atoms x0, x1, ...

    Returns the boolean skeleton and the formulas standing behind its atoms.
    """
    index: dict[Formula, int] = {}

    def go(f):
        if isinstance(f, Not):
            return Not(go(f.arg))
        if isinstance(f, And):
            return And(go(f.left), go(f.right))
        if f not in index:
            index[f] = len(index)
        return Atom(f"x{index[f]}")

    skeleton = go(phi)
    return skeleton, tuple(index)


def _fill_skeleton(skeleton, atoms):
    match skeleton:
        case Not(a):
            return Not(_fill_skeleton(a, atoms))
        case And(a, b):
            return And(_fill_skeleton(a, atoms), _fill_skeleton(b, atoms))
        case Atom(name):
            return atoms[int(name[1:])]
    raise TypeError("a skeleton holds only ~, & and atoms")


def is_tautology(phi: Formula) -> bool:
    """Truth-table check over the propositional abstraction, all rows at once
    as bit vectors."""
    skeleton, atoms = abstraction(phi)
    k = len(atoms)
    if k > PROP_ATOM_LIMIT:
        raise PropositionalAbstractionTooLarge(
            f"propositional abstraction has {k} atoms (limit {PROP_ATOM_LIMIT})")
    rows = 1 << k
    full = (1 << rows) - 1
    columns = []
    for i in range(k):
        # bit j of column i is bit i of j
        block = (1 << (1 << i)) - 1
        pattern = 0
        period = 1 << (i + 1)
        for start in range(1 << i, rows, period):
            pattern |= block << start
        columns.append(pattern)

    memo: dict[int, int] = {}

    def ev(f):
        key = id(f)
        if key in memo:
            return memo[key]
        if isinstance(f, Not):
            v = full ^ ev(f.arg)
        elif isinstance(f, And):
            v = ev(f.left) & ev(f.right)
        else:
            v = columns[int(f.name[1:])]
        memo[key] = v
        return v

    return ev(skeleton) == full


# --------------------------------------------------------------- instances

PROP_TEMPLATES = (
    Implies(ALPHA, Implies(BETA, ALPHA)),
    Implies(Implies(ALPHA, Implies(BETA, GAMMA)), Implies(Implies(ALPHA, BETA), Implies(ALPHA, GAMMA))),
    Implies(Implies(Not(ALPHA), Not(BETA)), Implies(BETA, ALPHA)),
    Or(ALPHA, Not(ALPHA)),
    Implies(And(ALPHA, BETA), ALPHA),
    Implies(Implies(Implies(ALPHA, BETA), ALPHA), ALPHA),
    Iff(ALPHA, Not(Not(ALPHA))),
)


def random_instance(axiom_id: str, rng: random.Random, subformula: Callable[[], Formula],
                    sig: AgentSignature, denominator_bound: int = 4) -> Formula:
    """A random core instance of a schema honouring its side conditions.

    `subformula` draws core formulas for the metavariables.
    """
    axiom_id = canonical_id(axiom_id)
    metas = {"alpha": subformula(), "beta": subformula(), "gamma": subformula()}
    if axiom_id == "Prop":
        template = rng.choice(PROP_TEMPLATES)
        return _subst(expand(template), metas)
    if axiom_id == "ACE":
        return instantiate("ACE", {"alpha": metas["alpha"], "m": rng.randint(0, 3)}, sig)

    def frac():
        d = rng.randint(1, denominator_bound)
        return Fraction(rng.randint(0, d), d)

    r, t = frac(), frac()
    if axiom_id in ("AGP2", "AP2"):
        while t <= r:
            r, t = frac(), frac()
    if axiom_id in ("AGP5", "AP5"):
        while r + t > 1:
            r, t = frac(), frac()
    inst = dict(metas, r=r, t=t, a=rng.choice(sig.agents))
    inst["variant"] = rng.randrange(len(_EXPANDED[axiom_id]))
    return instantiate(axiom_id, inst)


__all__ = [
    "AXIOM_IDS", "SCHEMAS", "PropositionalAbstractionTooLarge", "abstraction",
    "canonical_id", "instantiate", "is_tautology", "match_axiom", "random_instance",
]
