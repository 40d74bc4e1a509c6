"""Exact satisfaction over finitely presented models.

Truth of a formula along a run is an ultimately periodic set of time
points.  Boolean and temporal operators act on those sets directly;
knowledge, common knowledge and probability are computed per canonical
world and are therefore periodic with the run's own stem and loop.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Iterable

from ptel.model import CanonicalWorld, Model, Progression, SingleTime, World
from ptel.syntax import (
    AgentSignature, And, Atom, Common, Formula, Know, Next, Not, ProbAgent,
    ProbRun, Since, Until, WeakPrev, everyone_n, expand, is_core,
)
from ptel.upset import (
    UPSet, up_and, up_complement, up_next, up_or, up_since, up_until,
    up_weak_prev,
)


class Evaluator:
    """Evaluation session over one model; memoizes truth sets per
    (run, subformula)."""

    def __init__(self, model: Model):
        self.model = model
        self._truth: dict[tuple[int, Formula], UPSet] = {}
        self._reach: dict[CanonicalWorld, frozenset[CanonicalWorld]] = {}

    # ------------------------------------------------------------ truth sets
    def truth_set(self, run_index: int, phi: Formula) -> UPSet:
        key = (run_index, phi)
        hit = self._truth.get(key)
        if hit is None:
            hit = self._compute(run_index, phi)
            self._truth[key] = hit
        return hit

    def _compute(self, r: int, phi: Formula) -> UPSet:
        run = self.model.runs[r]
        match phi:
            case Atom(name):
                return UPSet([name in v for v in run.stem], [name in v for v in run.loop])
            case Not(a):
                return up_complement(self.truth_set(r, a))
            case And(a, b):
                return up_and(self.truth_set(r, a), self.truth_set(r, b))
            case Next(a):
                return up_next(self.truth_set(r, a))
            case WeakPrev(a):
                return up_weak_prev(self.truth_set(r, a))
            case Until(a, b):
                return up_until(self.truth_set(r, a), self.truth_set(r, b))
            case Since(a, b):
                return up_since(self.truth_set(r, a), self.truth_set(r, b))
            case Know(agent, a):
                return self._per_world(r, lambda c: self.knows(c, agent, a))
            case Common(a):
                reach = self._per_world(r, lambda c: self.reachable_holds(c, a))
                return up_and(self.truth_set(r, a), reach)
            case ProbRun(s, a):
                return self._per_world(r, lambda c: self.run_probability(c, a) >= s)
            case ProbAgent(agent, s, a):
                return self._per_world(r, lambda c: self.agent_probability(c, agent, a) >= s)
        raise TypeError(f"truth_set needs a core formula, got {type(phi).__name__}")

    def _per_world(self, r: int, pred) -> UPSet:
        run = self.model.runs[r]
        bits = [pred(CanonicalWorld(r, pos)) for pos in range(run.size)]
        return UPSet(bits[:run.p], bits[run.p:])

    # -------------------------------------------------------- epistemic part
    def holds_at_all_instances(self, c: CanonicalWorld, phi: Formula) -> bool:
        truth = self.truth_set(c.run, phi)
        inst = self.model.instances(c)
        if isinstance(inst, SingleTime):
            return inst.time in truth
        # first + k*step for all k: past len(stem) membership has period
        # len(loop), so k up to (stem / step) + len(loop) covers every residue
        s, period = truth.shape
        limit = s // inst.step + period + 1
        return all(inst.first + k * inst.step in truth for k in range(limit))

    def knows(self, c: CanonicalWorld, agent: str, phi: Formula) -> bool:
        if not self.model.is_active(c, agent):
            return True
        return all(self.holds_at_all_instances(d, phi)
                   for d in self.model.successors(agent, c))

    def reachable(self, c: CanonicalWorld) -> frozenset[CanonicalWorld]:
        """Canonical worlds reachable from c in one or more steps of any agent."""
        hit = self._reach.get(c)
        if hit is not None:
            return hit
        seen: set[CanonicalWorld] = set()
        queue = deque([c])
        while queue:
            x = queue.popleft()
            for a in self.model.agents:
                for y in self.model.successors(a, x):
                    if y not in seen:
                        seen.add(y)
                        queue.append(y)
        out = frozenset(seen)
        self._reach[c] = out
        return out

    def reachable_holds(self, c: CanonicalWorld, phi: Formula) -> bool:
        return all(self.holds_at_all_instances(d, phi) for d in self.reachable(c))

    def common_holds(self, run_index: int, n: int, phi: Formula) -> bool:
        return n in self.truth_set(run_index, Common(phi))

    # ------------------------------------------------------- probability part
    def run_probability(self, c: CanonicalWorld, phi: Formula) -> Fraction:
        weights = self.model.run_measure[c]
        return sum((w for r, w in weights.items() if 0 in self.truth_set(r, phi)),
                   Fraction(0))

    def agent_probability(self, c: CanonicalWorld, agent: str, phi: Formula) -> Fraction:
        space = self.model.agent_spaces[(c, agent)]
        return sum((w for (r, t), w in space if t in self.truth_set(r, phi)),
                   Fraction(0))

    # ------------------------------------------------------------- queries
    def holds(self, run_index: int, n: int, phi: Formula) -> bool:
        if not 0 <= run_index < len(self.model.runs) or n < 0:
            raise IndexError(f"no world ({run_index}, {n}) in this model")
        return n in self.truth_set(run_index, self._core(phi))

    def valid(self, phi: Formula) -> bool:
        core = self._core(phi)
        return all(self.truth_set(r, core).is_full() for r in range(len(self.model.runs)))

    def consequence(self, theory: Iterable[Formula], phi: Formula) -> bool:
        return self.counter_world(theory, phi) is None

    def counter_world(self, theory: Iterable[Formula], phi: Formula) -> World | None:
        """A world satisfying every formula of the theory but not phi."""
        theory = [self._core(t) for t in theory]
        core = self._core(phi)
        for r in range(len(self.model.runs)):
            bad = up_complement(self.truth_set(r, core))
            for t in theory:
                bad = up_and(bad, self.truth_set(r, t))
            n = bad.first_member()
            if n is not None:
                return World(r, n)
        return None

    def _core(self, phi: Formula) -> Formula:
        return phi if is_core(phi) else expand(phi, self.model.signature)


# -------------------------------------------------------- functional facade

def truth_set(m: Model, run_index: int, phi: Formula) -> UPSet:
    return Evaluator(m).truth_set(run_index, expand(phi, m.signature))


def holds(m: Model, run_index: int, n: int, phi: Formula) -> bool:
    return Evaluator(m).holds(run_index, n, phi)


def holds_at_all_instances(m: Model, c: CanonicalWorld, phi: Formula) -> bool:
    return Evaluator(m).holds_at_all_instances(CanonicalWorld(*c), expand(phi, m.signature))


def common_holds(m: Model, run_index: int, n: int, phi: Formula) -> bool:
    return Evaluator(m).common_holds(run_index, n, expand(phi, m.signature))


def eval_run_probability(m: Model, c: CanonicalWorld, phi: Formula) -> Fraction:
    return Evaluator(m).run_probability(CanonicalWorld(*c), expand(phi, m.signature))


def eval_agent_probability(m: Model, c: CanonicalWorld, agent: str, phi: Formula) -> Fraction:
    return Evaluator(m).agent_probability(CanonicalWorld(*c), agent, expand(phi, m.signature))


def valid_in_model(m: Model, phi: Formula) -> bool:
    return Evaluator(m).valid(phi)


def consequence_in_model(m: Model, theory: Iterable[Formula], phi: Formula) -> bool:
    return Evaluator(m).consequence(theory, phi)


def iterated_everyone_holds(m: Model, run_index: int, n: int, phi: Formula,
                            depth: int | None = None) -> bool:
    """C phi read as E^k phi for every k up to `depth` (default: the number
    of canonical worlds, after which reachability has stabilized)."""
    ev = Evaluator(m)
    if depth is None:
        depth = len(m.worlds())
    sig: AgentSignature = m.signature
    return all(ev.holds(run_index, n, expand(everyone_n(k, phi), sig))
               for k in range(depth + 1))
