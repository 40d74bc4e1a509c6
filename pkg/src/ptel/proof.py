"""Proof objects and the proof checker.

Finitary steps are checked exactly.  A step using one of the infinitary
rules lists its premises by index; the checker regenerates the premise
formula for every index up to a finite bound and compares.  Such proofs are
reported as ``VerifiedBounded(n)``, never as plainly verified.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import ceil
from typing import Iterable, Union

from ptel.axioms import PropositionalAbstractionTooLarge, canonical_id, match_axiom
from ptel.grammar import format_bound, parse, unparse
from ptel.syntax import (
    AgentSignature, And, Common, Formula, Implies, Know, NestedContext, Next,
    Not, ProbAgent, ProbRun, Since, Until, WeakPrev, apply_op, build_k_nested,
    conj, contradiction, everyone_n, expand, next_n, node_count, prev_n,
)

NEC_RULES = ("RXN", "RZN", "RKN", "RGPN", "RPN")
INF_RULES = ("RU", "RS", "RC", "RGA", "RA")
RULE_ALIASES = {"R◯N": "RXN", "R⊖N": "RZN", "RKaN": "RKN", "RKₐN": "RKN",
                "RUntil": "RU", "RSince": "RS", "R∪": "RU"}

FAMILY_SEARCH_LIMIT = 2000


# ------------------------------------------------------------------ theory

_POWER = re.compile(r"\b([XZE])\^\{k\}")


def _wrap_all(ops: tuple[str, ...], phi: Formula) -> Formula:
    for op in ops:
        phi = apply_op(op, phi)
    return phi


@dataclass(frozen=True)
class Family:
    """The countable set {template with {k} := k : k >= start}.

    `X^{k}`, `Z^{k}` and `E^{k}` in the template repeat the operator k
    times; `wrap` lists nesting operators applied to every member, innermost
    first.
    """
    template: str
    start: int = 0
    wrap: tuple[str, ...] = ()

    def member(self, k: int, sig: AgentSignature | None) -> Formula:
        text = _POWER.sub(lambda m: (m.group(1) + " ") * k, self.template)
        return _wrap_all(self.wrap, parse(text.replace("{k}", str(k)), sig))

    def wrapped(self, op: str) -> "Family":
        return Family(self.template, self.start, self.wrap + (op,))

    def to_json(self) -> dict:
        out = {"family": self.template, "from": self.start}
        if self.wrap:
            out["wrap"] = list(self.wrap)
        return out


@dataclass(frozen=True)
class RulePremises:
    """All premises (indices i >= start) of one infinitary rule instance."""
    rule: str
    ctx: NestedContext
    alpha: Formula
    beta: Formula | None = None
    r: Fraction | None = None
    agent: str | None = None
    start: int | None = None
    wrap: tuple[str, ...] = ()

    def _step(self) -> "InfStep":
        return normalize_inf(InfStep("", self.alpha, self.rule, self.ctx, self.alpha,
                                     self.beta, self.r, self.agent))

    @property
    def first(self) -> int:
        return premise_start(self._step()) if self.start is None else self.start

    def member(self, i: int, sig: AgentSignature | None) -> Formula:
        return _wrap_all(self.wrap, build_k_nested(self.ctx, premise_template(self._step(), i, sig)))

    def wrapped(self, op: str) -> "RulePremises":
        return replace(self, wrap=self.wrap + (op,))

    def to_json(self) -> dict:
        out = {"premises_of": self.rule, "ctx": _ctx_to_json(self.ctx),
               "params": _params_to_json(self.alpha, self.beta, self.r, self.agent)}
        if self.start is not None:
            out["from"] = self.start
        if self.wrap:
            out["wrap"] = list(self.wrap)
        return out


def _family_from_json(doc: dict, sig) -> "Family | RulePremises":
    wrap = tuple(doc.get("wrap", ()))
    if "family" in doc:
        return Family(doc["family"], int(doc.get("from", 0)), wrap)
    alpha, beta, r, agent = _params_from_json(doc.get("params", {}), sig)
    start = doc.get("from")
    return RulePremises(doc["premises_of"], _ctx_from_json(doc["ctx"], sig), alpha, beta, r,
                        agent, None if start is None else int(start), wrap)


class Theory:
    """A set of hypotheses: finitely many formulas plus indexed families."""

    def __init__(self, formulas: Iterable[Formula] = (), families: Iterable = (),
                 sig: AgentSignature | None = None):
        self.formulas = tuple(formulas)
        self.families = tuple(families)
        self.sig = sig
        self._core = {expand(f, sig) for f in self.formulas}
        self._family_members: list[dict[Formula, int]] = [{} for _ in self.families]
        self._family_next = [self._first(fam) for fam in self.families]
        self._family_size = [0 for _ in self.families]

    @staticmethod
    def _first(fam) -> int:
        return fam.first if isinstance(fam, RulePremises) else fam.start

    def __contains__(self, phi: Formula) -> bool:
        core = expand(phi, self.sig)
        if core in self._core:
            return True
        size = node_count(core)
        for i, fam in enumerate(self.families):
            members = self._family_members[i]
            limit = self._first(fam) + FAMILY_SEARCH_LIMIT
            # member size never decreases with k, so larger members end the search
            while (core not in members and self._family_next[i] < limit
                   and self._family_size[i] <= size):
                k = self._family_next[i]
                member = expand(fam.member(k, self.sig), self.sig)
                members[member] = k
                self._family_size[i] = node_count(member)
                self._family_next[i] += 1
            if core in members:
                return True
        return False

    def union(self, other: Iterable[Formula]) -> "Theory":
        return Theory(self.formulas + tuple(other), self.families, self.sig)

    def without(self, phi: Formula) -> "Theory":
        core = expand(phi, self.sig)
        return Theory([f for f in self.formulas if expand(f, self.sig) != core],
                      self.families, self.sig)

    def wrapped(self, op: str) -> "Theory":
        """The theory {op d : d in self}."""
        return Theory([apply_op(op, f) for f in self.formulas],
                      [fam.wrapped(op) for fam in self.families], self.sig)

    def to_json(self) -> list:
        return [unparse(f) for f in self.formulas] + [fam.to_json() for fam in self.families]

    @classmethod
    def from_json(cls, items: list, sig: AgentSignature | None) -> "Theory":
        formulas, families = [], []
        for item in items:
            if isinstance(item, dict):
                families.append(_family_from_json(item, sig))
            else:
                formulas.append(parse(item, sig))
        return cls(formulas, families, sig)


def read_theory_file(path, sig: AgentSignature | None) -> Theory:
    """Newline-separated formulas; `#` starts a comment."""
    formulas = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                formulas.append(parse(line, sig))
    return Theory(formulas, sig=sig)


# ------------------------------------------------------------------- steps

@dataclass(frozen=True)
class AxiomStep:
    id: str
    formula: Formula
    axiom: str


@dataclass(frozen=True)
class HypStep:
    id: str
    formula: Formula


@dataclass(frozen=True)
class MPStep:
    """From `minor` (alpha) and `major` (alpha -> beta) infer beta."""
    id: str
    formula: Formula
    minor: str
    major: str


@dataclass(frozen=True)
class NecStep:
    id: str
    formula: Formula
    rule: str
    premise: str
    agent: str | None = None


@dataclass(frozen=True)
class InfStep:
    """An infinitary rule applied in a k-nested context.

    `premises` maps each index i to the step proving the i-th premise.
    """
    id: str
    formula: Formula
    rule: str
    ctx: NestedContext
    alpha: Formula
    beta: Formula | None = None
    r: Fraction | None = None
    agent: str | None = None
    premises: dict[int, str] = field(default_factory=dict)
    bound: int | None = None


Step = Union[AxiomStep, HypStep, MPStep, NecStep, InfStep]


@dataclass
class Proof:
    steps: list[Step]
    theory: Theory = field(default_factory=Theory)
    sig: AgentSignature | None = None
    bound: int | None = None

    @property
    def conclusion(self) -> Formula:
        return self.steps[-1].formula


# ------------------------------------------------------------------ result

@dataclass(frozen=True)
class Verified:
    def __str__(self):
        return "Verified"


@dataclass(frozen=True)
class VerifiedBounded:
    bound: int

    def __str__(self):
        return f"VerifiedBounded({self.bound})"


@dataclass(frozen=True)
class Rejected:
    step: int
    reason: str

    def __str__(self):
        return f"Rejected(step {self.step}: {self.reason})"


CheckResult = Union[Verified, VerifiedBounded, Rejected]


def accepted(result: CheckResult) -> bool:
    return not isinstance(result, Rejected)


# ------------------------------------------------------- rule templates

def normalize_rule(rule: str) -> str:
    return RULE_ALIASES.get(rule, rule)


def normalize_inf(step: InfStep) -> InfStep:
    """Rewrite the upper-bound forms RGA'/RA' as RGA/RA: P<=(r+1/i) alpha is
    P>=((1-r)-1/i) ~alpha."""
    rule = normalize_rule(step.rule)
    if rule in ("RGA'", "RA'"):
        return InfStep(step.id, step.formula, rule[:-1], step.ctx, Not(step.alpha),
                       step.beta, 1 - Fraction(step.r), step.agent, step.premises, step.bound)
    return step


def premise_start(step: InfStep) -> int:
    if step.rule in ("RGA", "RA"):
        return ceil(1 / Fraction(step.r))
    return 0


def premise_template(step: InfStep, i: int, sig: AgentSignature | None) -> Formula:
    """The core formula of premise i, before nesting in the context."""
    a, b = step.alpha, step.beta
    if step.rule == "RU":
        parts = [next_n(l, a) for l in range(i)] + [next_n(i, b)]
        return Not(conj(parts))
    if step.rule == "RS":
        parts = ([prev_n(l, a) for l in range(i)]
                 + [Not(prev_n(l, contradiction(a))) for l in range(i + 1)]
                 + [prev_n(i, b)])
        return Not(conj(parts))
    if step.rule == "RC":
        return everyone_n(i, a)
    if step.rule == "RGA":
        return ProbRun(Fraction(step.r) - Fraction(1, i), a)
    if step.rule == "RA":
        return ProbAgent(step.agent, Fraction(step.r) - Fraction(1, i), a)
    raise ValueError(f"unknown infinitary rule {step.rule!r}")


def conclusion_template(step: InfStep) -> Formula:
    a, b = step.alpha, step.beta
    return {
        "RU": lambda: Not(Until(a, b)),
        "RS": lambda: Not(Since(a, b)),
        "RC": lambda: Common(a),
        "RGA": lambda: ProbRun(Fraction(step.r), a),
        "RA": lambda: ProbAgent(step.agent, Fraction(step.r), a),
    }[step.rule]()


def nec_apply(rule: str, phi: Formula, agent: str | None) -> Formula:
    return {
        "RXN": lambda: Next(phi),
        "RZN": lambda: WeakPrev(phi),
        "RKN": lambda: Know(agent, phi),
        "RGPN": lambda: ProbRun(Fraction(1), phi),
        "RPN": lambda: ProbAgent(agent, Fraction(1), phi),
    }[rule]()


# ----------------------------------------------------------------- checker

class _Reject(Exception):
    pass


def check_proof(proof: Proof, theory: Theory | None = None, bound: int | None = None,
                sig: AgentSignature | None = None) -> CheckResult:
    """Check every step; `bound` overrides the declared infinitary bounds."""
    theory = proof.theory if theory is None else theory
    sig = sig or proof.sig or theory.sig
    if bound is None:
        bound = proof.bound
    index: dict[str, int] = {}
    cores: list[Formula] = []
    flags: list[bool] = []
    bounds: list[int] = []
    memo: dict[Formula, Formula] = {}

    def core(f):
        hit = memo.get(f)
        if hit is None:
            hit = expand(f, sig)
            memo[f] = hit
        return hit

    def ref(name):
        if name not in index:
            raise _Reject(f"bad reference {name!r} (must name an earlier step)")
        return index[name]

    for pos, step in enumerate(proof.steps):
        try:
            if step.id in index:
                raise _Reject(f"duplicate step id {step.id!r}")
            phi = core(step.formula)
            flag = _check_step(step, phi, theory, sig, bound, cores, flags, ref, core, bounds)
        except _Reject as exc:
            return Rejected(pos, str(exc))
        except (ValueError, KeyError, TypeError) as exc:
            return Rejected(pos, f"malformed step: {exc}")
        index[step.id] = pos
        cores.append(phi)
        flags.append(flag)
    if not proof.steps:
        return Rejected(0, "empty proof")
    if bounds:
        return VerifiedBounded(min(bounds))
    return Verified()


def theorem_flags(proof: Proof, sig: AgentSignature | None = None) -> list[bool]:
    """Per step: true iff no ancestor is a hypothesis."""
    flags: dict[str, bool] = {}
    out = []
    for step in proof.steps:
        if isinstance(step, AxiomStep):
            f = True
        elif isinstance(step, HypStep):
            f = False
        elif isinstance(step, MPStep):
            f = flags[step.minor] and flags[step.major]
        elif isinstance(step, NecStep):
            f = flags[step.premise]
        else:
            f = all(flags[s] for s in step.premises.values())
        flags[step.id] = f
        out.append(f)
    return out


def _check_step(step, phi, theory, sig, bound, cores, flags, ref, core, bounds) -> bool:
    if isinstance(step, AxiomStep):
        name = canonical_id(step.axiom)
        try:
            ids = [aid for aid, _ in match_axiom(phi, sig)]
        except PropositionalAbstractionTooLarge as exc:
            raise _Reject(str(exc))
        if name not in ids:
            raise _Reject(f"schema mismatch: not an instance of {name}")
        return True

    if isinstance(step, HypStep):
        if phi not in theory:
            raise _Reject("hypothesis not in the theory")
        return False

    if isinstance(step, MPStep):
        i, j = ref(step.minor), ref(step.major)
        if cores[j] != Not(And(cores[i], Not(phi))):
            raise _Reject("modus ponens shape mismatch")
        return flags[i] and flags[j]

    if isinstance(step, NecStep):
        rule = normalize_rule(step.rule)
        if rule not in NEC_RULES:
            raise _Reject(f"unknown necessitation rule {step.rule!r}")
        i = ref(step.premise)
        if not flags[i]:
            raise _Reject("premise not a theorem")
        if rule in ("RKN", "RPN") and (step.agent is None or (sig and step.agent not in sig)):
            raise _Reject("necessitation needs a known agent")
        if phi != nec_apply(rule, cores[i], step.agent):
            raise _Reject("necessitation shape mismatch")
        return True

    if isinstance(step, InfStep):
        st = _core_inf(normalize_inf(step), core)
        if st.rule not in INF_RULES:
            raise _Reject(f"unknown infinitary rule {step.rule!r}")
        if st.rule in ("RGA", "RA"):
            if st.r is None or not 0 < Fraction(st.r) <= 1:
                raise _Reject("side condition violated: r must lie in (0, 1]")
        if st.rule == "RA" and st.agent is None:
            raise _Reject("RA needs an agent")
        if st.rule in ("RU", "RS") and st.beta is None:
            raise _Reject(f"{st.rule} needs beta")
        n = bound if bound is not None else st.bound
        if n is None:
            raise _Reject("no bound declared for an infinitary step")
        if phi != core(build_k_nested(st.ctx, conclusion_template(st))):
            raise _Reject("conclusion does not match the rule in the declared context")
        flag = True
        for i in range(premise_start(st), n + 1):
            name = st.premises.get(i)
            if name is None:
                raise _Reject(f"premise {i} missing (bound {n})")
            j = ref(name)
            want = core(build_k_nested(st.ctx, premise_template(st, i, sig)))
            if cores[j] != want:
                raise _Reject(f"premise {i} does not match the rule template")
            flag = flag and flags[j]
        bounds.append(n)
        return flag

    raise _Reject(f"unknown step kind {type(step).__name__}")


def _core_inf(st: InfStep, core) -> InfStep:
    beta = None if st.beta is None else core(st.beta)
    ctx = NestedContext(tuple(core(b) for b in st.ctx.premises), st.ctx.ops)
    return InfStep(st.id, st.formula, st.rule, ctx, core(st.alpha), beta, st.r,
                   st.agent, st.premises, st.bound)


# ------------------------------------------------------------------- JSON

def _ctx_to_json(ctx: NestedContext) -> dict:
    return {"k": ctx.k, "B": [unparse(b) for b in ctx.premises], "X": list(ctx.ops)}


def _ctx_from_json(doc: dict, sig) -> NestedContext:
    ctx = NestedContext(tuple(parse(b, sig) for b in doc["B"]), tuple(doc["X"]))
    if "k" in doc and doc["k"] != ctx.k:
        raise ValueError(f"context declares k={doc['k']} but has {ctx.k} operators")
    return ctx


def _params_to_json(alpha, beta, r, agent) -> dict:
    params = {"alpha": unparse(alpha)}
    if beta is not None:
        params["beta"] = unparse(beta)
    if r is not None:
        params["r"] = format_bound(r)
    if agent is not None:
        params["agent"] = agent
    return params


def _params_from_json(params: dict, sig):
    beta, r = params.get("beta"), params.get("r")
    return (parse(params["alpha"], sig), None if beta is None else parse(beta, sig),
            None if r is None else Fraction(r), params.get("agent"))


def step_to_json(step: Step) -> dict:
    out = {"id": step.id, "formula": unparse(step.formula)}
    if isinstance(step, AxiomStep):
        out.update(kind="axiom", axiom=step.axiom)
    elif isinstance(step, HypStep):
        out.update(kind="hyp")
    elif isinstance(step, MPStep):
        out.update(kind="mp", **{"from": [step.minor, step.major]})
    elif isinstance(step, NecStep):
        out.update(kind="nec", rule=step.rule, **{"from": [step.premise]})
        if step.agent is not None:
            out["agent"] = step.agent
    else:
        params = _params_to_json(step.alpha, step.beta, step.r, step.agent)
        out.update(kind="inf", rule=step.rule, ctx=_ctx_to_json(step.ctx), params=params,
                   premises={str(i): s for i, s in sorted(step.premises.items())})
        if step.bound is not None:
            out["bound"] = step.bound
    return out


def step_from_json(doc: dict, sig) -> Step:
    kind = doc["kind"]
    sid = str(doc["id"])
    phi = parse(doc["formula"], sig)
    if kind == "axiom":
        return AxiomStep(sid, phi, doc["axiom"])
    if kind == "hyp":
        return HypStep(sid, phi)
    if kind == "mp":
        minor, major = doc["from"]
        return MPStep(sid, phi, str(minor), str(major))
    if kind == "nec":
        (premise,) = doc["from"]
        return NecStep(sid, phi, doc["rule"], str(premise), doc.get("agent"))
    if kind == "inf":
        alpha, beta, r, agent = _params_from_json(doc.get("params", {}), sig)
        return InfStep(sid, phi, doc["rule"], _ctx_from_json(doc["ctx"], sig),
                       alpha, beta, r, agent,
                       {int(i): str(s) for i, s in doc.get("premises", {}).items()},
                       doc.get("bound"))
    raise ValueError(f"unknown step kind {kind!r}")


def proof_to_json(proof: Proof) -> dict:
    out = {"theory": proof.theory.to_json(), "steps": [step_to_json(s) for s in proof.steps]}
    if proof.sig is not None:
        out["agents"] = list(proof.sig.agents)
    if proof.bound is not None:
        out["bound"] = proof.bound
    return out


def proof_from_json(doc: dict, sig: AgentSignature | None = None) -> Proof:
    if sig is None and doc.get("agents"):
        sig = AgentSignature(tuple(doc["agents"]))
    theory = Theory.from_json(doc.get("theory", []), sig)
    steps = [step_from_json(s, sig) for s in doc["steps"]]
    return Proof(steps, theory, sig, doc.get("bound"))


def load_proof(path, sig: AgentSignature | None = None) -> Proof:
    with open(path, encoding="utf-8") as fh:
        return proof_from_json(json.load(fh), sig)


def dump_proof(proof: Proof) -> str:
    return json.dumps(proof_to_json(proof), indent=1, ensure_ascii=False)


# ------------------------------------------------------- building helpers

class ProofBuilder:
    """Appends steps with fresh ids and returns each new id."""

    def __init__(self, prefix: str = "s"):
        self.steps: list[Step] = []
        self.prefix = prefix
        self._n = 0

    def _id(self) -> str:
        self._n += 1
        return f"{self.prefix}{self._n}"

    def add(self, step: Step) -> str:
        self.steps.append(step)
        return step.id

    def axiom(self, phi: Formula, axiom: str) -> str:
        return self.add(AxiomStep(self._id(), phi, axiom))

    def hyp(self, phi: Formula) -> str:
        return self.add(HypStep(self._id(), phi))

    def mp(self, phi: Formula, minor: str, major: str) -> str:
        return self.add(MPStep(self._id(), phi, minor, major))

    def nec(self, phi: Formula, rule: str, premise: str, agent: str | None = None) -> str:
        return self.add(NecStep(self._id(), phi, rule, premise, agent))

    def inf(self, phi: Formula, rule: str, ctx: NestedContext, alpha: Formula, premises: dict,
            beta=None, r=None, agent=None, bound=None) -> str:
        return self.add(InfStep(self._id(), phi, rule, ctx, alpha, beta, r, agent,
                                dict(premises), bound))

    def formula(self, step_id: str) -> Formula:
        for s in self.steps:
            if s.id == step_id:
                return s.formula
        raise KeyError(step_id)

    def prop_mp(self, phi: Formula, target: Formula, premise: str) -> str:
        """From phi (step `premise`) derive target using the tautology phi -> target."""
        taut = self.axiom(Implies(phi, target), "Prop")
        return self.mp(target, premise, taut)
