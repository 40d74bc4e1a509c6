"""Soundness fuzzing: axiom instances and rule applications on random models.

Each axiom schema is instantiated at random and checked for validity in
random models.  Each finitary rule is checked for local soundness (valid
premises give a valid conclusion in the same model).  Infinitary rules are
checked the same way, with the premise set cut at a bound derived from the
model, large enough that the cut premises already carry all the
information the model can distinguish.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from math import lcm
from typing import Callable

from ptel.axioms import AXIOM_IDS, instantiate, match_axiom
from ptel.gen import GenParams, gen_axiom_instance, gen_formula, gen_model
from ptel.model import Model, dump_model
from ptel.proof import (
    InfStep, conclusion_template, normalize_inf, premise_start, premise_template,
)
from ptel.semantics import Evaluator
from ptel.syntax import (
    And, Formula, Know, NestedContext, Next, Not, ProbAgent, ProbRun, WeakPrev,
    build_k_nested, expand, node_count,
)

INF_RULES = ("RU", "RS", "RC", "RGA", "RA")


@dataclass(frozen=True)
class SoundnessConfig:
    seed: int = 0
    models: int = 200
    instances: int = 5
    rule_trials: int = 200
    axioms: tuple[str, ...] = AXIOM_IDS
    params: GenParams = field(default_factory=GenParams)
    mutate: str | None = None     # corrupt this schema's instances (mutation check)
    shrink: bool = True


@dataclass
class Violation:
    check: str
    formula: str
    model: dict
    world: tuple[int, int]
    model_worlds: int
    formula_size: int


@dataclass
class SoundnessReport:
    trials: dict[str, int] = field(default_factory=dict)
    nonvacuous: dict[str, int] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> str:
        return json.dumps({"ok": self.ok, "trials": self.trials, "nonvacuous": self.nonvacuous,
                           "violations": [asdict(v) for v in self.violations],
                           "seconds": round(self.seconds, 3)}, indent=1)

    def to_text(self) -> str:
        lines = [f"{'check':<12} {'trials':>7} {'nonvacuous':>10}"]
        for name, n in self.trials.items():
            nv = self.nonvacuous.get(name)
            lines.append(f"{name:<12} {n:>7} {'' if nv is None else nv:>10}")
        lines.append(f"violations: {len(self.violations)}")
        for v in self.violations:
            lines.append(f"  {v.check}: {v.formula} fails at world {v.world} "
                         f"of a {v.model_worlds}-world model")
        lines.append(f"time: {self.seconds:.2f}s")
        return "\n".join(lines)


def corrupt(phi: Formula) -> Formula:
    """A mutation of a formula: an implication becomes its converse,
    anything else its negation."""
    if isinstance(phi, Not) and isinstance(phi.arg, And) and isinstance(phi.arg.right, Not):
        return Not(And(phi.arg.right.arg, Not(phi.arg.left)))
    return Not(phi)


# ----------------------------------------------------------------- checks

def _model_for(config: SoundnessConfig, i: int) -> Model:
    return gen_model(config.params.with_seed(config.seed * 1_000_003 + i))


def soundness_suite(config: SoundnessConfig = SoundnessConfig(),
                    progress: Callable[[str], None] | None = None) -> SoundnessReport:
    start = time.perf_counter()
    report = SoundnessReport()
    rng = random.Random(config.seed)
    for aid in config.axioms:
        report.trials[aid] = 0
    for name in ("MP", "RXN", "RZN", "RKN", "RGPN", "RPN") + INF_RULES:
        report.trials[name] = 0
        report.nonvacuous[name] = 0

    for i in range(config.models):
        model = _model_for(config, i)
        ev = Evaluator(model)
        for aid in config.axioms:
            for _ in range(config.instances):
                phi = gen_axiom_instance(aid, config.params, rng)
                if aid == config.mutate:
                    phi = corrupt(phi)
                report.trials[aid] += 1
                world = ev.counter_world([], phi)
                if world is not None:
                    report.violations.append(_violation(aid, phi, model, world, config, i))
                    break
        if progress:
            progress(f"model {i + 1}/{config.models}")

    for j in range(config.rule_trials):
        model = _model_for(config, config.models + j)
        ev = Evaluator(model)
        _check_rules(ev, model, config, rng, report)
    report.seconds = time.perf_counter() - start
    return report


def _valid_formula(config: SoundnessConfig, rng: random.Random) -> Formula:
    return gen_axiom_instance(rng.choice(AXIOM_IDS), config.params, rng)


def _premise_formula(config, rng) -> Formula:
    """Half the time a valid formula, so rule premises are often satisfied."""
    core = replace(config.params, core_only=True)
    if rng.random() < 0.5:
        return _valid_formula(config, rng)
    return gen_formula(core, rng=rng, depth=rng.randint(0, 2))


def _record(report, name, premises_valid: bool, conclusion_valid: bool, model, phi, ev):
    report.trials[name] += 1
    if premises_valid:
        report.nonvacuous[name] += 1
        if not conclusion_valid:
            world = ev.counter_world([], phi)
            report.violations.append(Violation(
                name, str(phi), _model_json(model), tuple(world),
                len(model.worlds()), node_count(phi)))


def _model_json(model: Model) -> dict:
    return json.loads(dump_model(model))


def _check_rules(ev: Evaluator, model: Model, config, rng, report):
    sig = model.signature
    a = _premise_formula(config, rng)
    b = _premise_formula(config, rng)
    imp = Not(And(a, Not(b)))
    _record(report, "MP", ev.valid(a) and ev.valid(imp), ev.valid(b), model, b, ev)
    agent = rng.choice(sig.agents)
    for name, wrapped in (("RXN", Next(a)), ("RZN", WeakPrev(a)), ("RKN", Know(agent, a)),
                          ("RGPN", ProbRun(Fraction(1), a)),
                          ("RPN", ProbAgent(agent, Fraction(1), a))):
        _record(report, name, ev.valid(a), ev.valid(wrapped), model, wrapped, ev)

    rule = rng.choice(INF_RULES)
    k = rng.randint(0, 2)
    core = replace(config.params, core_only=True)
    ctx = NestedContext(tuple(gen_formula(core, rng=rng, depth=rng.randint(0, 1))
                              for _ in range(k + 1)),
                        tuple(rng.choice(("X", "Z", f"K[{rng.choice(sig.agents)}]"))
                              for _ in range(k)))
    r = Fraction(rng.randint(1, 4), 4)
    step = normalize_inf(InfStep("", a, rule, ctx, a, b, r, agent))
    bound = premise_bound(model, step)
    premises_valid = all(
        ev.valid(expand(build_k_nested(ctx, premise_template(step, i, sig)), sig))
        for i in range(premise_start(step), bound + 1))
    concl = expand(build_k_nested(ctx, conclusion_template(step)), sig)
    _record(report, rule, premises_valid, premises_valid and ev.valid(concl), model, concl, ev)


def premise_bound(model: Model, step: InfStep) -> int:
    """Premise index up to which an infinitary rule's premises are checked.

    Temporal premises range over witness distances, and every truth set of
    a run repeats within the run's canonical size, so twice the largest
    size covers each distance that matters.  Probability premises
    r - 1/i hold for all i up to the bound only if the attained value is
    at least r: attained values and r share the denominator D below, so a
    value under r falls short by at least 1/D.
    """
    if step.rule in ("RGA", "RA"):
        if step.rule == "RGA":
            dens = [w.denominator for ws in model.run_measure.values() for w in ws.values()]
        else:
            dens = [w.denominator for sp in model.agent_spaces.values() for _, w in sp]
        return lcm(Fraction(step.r).denominator, *dens) + 1
    return 2 * max(run.size for run in model.runs) + 2


# --------------------------------------------------------------- shrinking

def _violation(aid: str, phi: Formula, model: Model, world, config, i) -> Violation:
    if config.shrink:
        model, phi = shrink(model, phi, aid, config)
        world = Evaluator(model).counter_world([], phi)
    return Violation(aid, str(phi), _model_json(model), tuple(world),
                     len(model.worlds()), node_count(phi))


def _invalid(model: Model, phi: Formula) -> bool:
    return Evaluator(model).counter_world([], phi) is not None


def shrink(model: Model, phi: Formula, aid: str, config: SoundnessConfig,
           attempts: int = 40) -> tuple[Model, Formula]:
    """A smaller (model, instance) pair on which the check still fails.

    Model size is halved by regenerating with halved shape ranges.  The
    formula shrinks by replacing a metavariable binding of the schema
    instance with one of its children, so the result is still an instance
    (corrupted the same way when mutation is on).  Every accepted
    candidate is re-checked, so the violation survives.
    """
    params = config.params
    for _ in range(6):
        smaller = replace(params,
                          runs=(1, max(1, params.runs[1] // 2)),
                          stem=(0, params.stem[1] // 2),
                          loop=(1, max(1, params.loop[1] // 2)))
        if smaller == params:
            break
        found = None
        for s in range(attempts):
            cand = gen_model(smaller.with_seed(config.seed * 7919 + s))
            if len(cand.worlds()) < len(model.worlds()) and _invalid(cand, phi):
                found = cand
                break
        if found is None:
            break
        model, params = found, smaller

    original = corrupt_inverse(phi) if aid == config.mutate else phi
    matches = [inst for mid, inst in match_axiom(original, model.signature) if mid == aid]
    if not matches:
        return model, phi
    inst = matches[0]

    def build(x):
        f = instantiate(aid, x, model.signature)
        return corrupt(f) if aid == config.mutate else f

    improved = True
    while improved:
        improved = False
        for cand in _smaller_bindings(inst):
            f = build(cand)
            if node_count(f) < node_count(phi) and _invalid(model, f):
                inst, phi, improved = cand, f, True
                break
    return model, phi


def corrupt_inverse(phi: Formula) -> Formula:
    """Undo `corrupt`."""
    if isinstance(phi, Not) and not (isinstance(phi.arg, And) and isinstance(phi.arg.right, Not)):
        return phi.arg
    if isinstance(phi, Not) and isinstance(phi.arg, And) and isinstance(phi.arg.right, Not):
        return Not(And(phi.arg.right.arg, Not(phi.arg.left)))
    return phi


def _smaller_bindings(inst: dict):
    for key, value in inst.items():
        if isinstance(value, Formula):
            for kid in value.children():
                yield dict(inst, **{key: kid})
        elif key == "atoms":
            for j, atom in enumerate(value):
                for kid in atom.children():
                    yield dict(inst, atoms=value[:j] + (kid,) + value[j + 1:])
