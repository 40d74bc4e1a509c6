"""Brute-force satisfaction by literal bounded quantification.

This evaluator shares no code with the truth-set engine: every clause is read
as its quantifier over concrete worlds.  Until searches a finite look-ahead
window; a miss is reported as ``None`` (unknown) unless the window already
covers a full period past the point where every truth set along the run
must have become periodic.
"""

from __future__ import annotations

from fractions import Fraction

from ptel.model import Model
from ptel.syntax import (
    And, Atom, Common, Formula, Know, Next, Not, ProbAgent, ProbRun, Since,
    Until, WeakPrev, everyone_n, expand, is_core,
)


def _and3(vals):
    out = True
    for v in vals:
        if v is False:
            return False
        if v is None:
            out = None
    return out


def _or3(vals):
    out = False
    for v in vals:
        if v is True:
            return True
        if v is None:
            out = None
    return out


def _not3(v):
    return None if v is None else not v


class BruteForce:
    def __init__(self, model: Model, horizon: int):
        self.model = model
        self.horizon = horizon
        self._memo: dict = {}
        self._stem_memo: dict = {}

    def stem_bound(self, r: int, phi: Formula) -> int:
        """A time after which the truth of phi along run r is periodic with
        the run's loop length."""
        key = (r, phi)
        hit = self._stem_memo.get(key)
        if hit is not None:
            return hit
        run = self.model.runs[r]
        kids = [self.stem_bound(r, c) for c in phi.children()]
        base = max(kids, default=run.p)
        if isinstance(phi, WeakPrev):
            base += 1
        elif isinstance(phi, Since):
            base += run.ell
        elif isinstance(phi, (Know, ProbRun, ProbAgent)):
            base = run.p
        elif isinstance(phi, Common):
            base = max(base, run.p)
        self._stem_memo[key] = base
        return base

    def holds(self, r: int, n: int, phi: Formula):
        key = (r, n, phi)
        if key in self._memo:
            return self._memo[key]
        out = self._eval(r, n, phi)
        self._memo[key] = out
        return out

    def _eval(self, r, n, phi):
        m = self.model
        match phi:
            case Atom(name):
                return name in m.runs[r].valuation(n)
            case Not(a):
                return _not3(self.holds(r, n, a))
            case And(a, b):
                return _and3([self.holds(r, n, a), self.holds(r, n, b)])
            case Next(a):
                return self.holds(r, n + 1, a)
            case WeakPrev(a):
                return True if n == 0 else self.holds(r, n - 1, a)
            case Until(a, b):
                return self._until(r, n, phi, a, b)
            case Since(a, b):
                # exists j in [0, n]: b at j and a on (j, n]
                disjuncts = []
                for j in range(n, -1, -1):
                    disjuncts.append(_and3([self.holds(r, j, b)]
                                           + [self.holds(r, k, a) for k in range(j + 1, n + 1)]))
                return _or3(disjuncts)
            case Know(agent, a):
                c = m.canon(r, n)
                if not m.is_active(c, agent):
                    return True
                vals = []
                for d in m.successors(agent, c):
                    vals.extend(self._all_instances(d, a))
                return _and3(vals)
            case Common(a):
                depth = len(m.worlds())
                return _and3(self.holds(r, n, expand(everyone_n(k, a), m.signature))
                             for k in range(depth + 1))
            case ProbRun(s, a):
                weights = m.run_measure[m.canon(r, n)]
                return self._threshold(((w, self.holds(rr, 0, a)) for rr, w in weights.items()), s)
            case ProbAgent(agent, s, a):
                space = m.agent_spaces[(m.canon(r, n), agent)]
                return self._threshold(((w, self.holds(rr, t, a)) for (rr, t), w in space), s)
        raise TypeError(f"brute force needs a core formula, got {type(phi).__name__}")

    def _all_instances(self, d, a):
        run = self.model.runs[d.run]
        if d.pos < run.p:
            return [self.holds(d.run, d.pos, a)]
        # beyond the stem bound the whole progression d.pos + k*ell agrees
        last = max(d.pos, self.stem_bound(d.run, a))
        times = range(d.pos, last + run.ell, run.ell)
        return [self.holds(d.run, t, a) for t in times]

    @staticmethod
    def _threshold(pairs, s):
        lo, hi = Fraction(0), Fraction(0)
        for w, v in pairs:
            if v is True:
                lo += w
                hi += w
            elif v is None:
                hi += w
        if lo >= s:
            return True
        if hi < s:
            return False
        return None

    def _until(self, r, n, phi, a, b):
        # exists j >= n: b at j and a on [n, j)
        run = self.model.runs[r]
        prefix = True
        disjuncts = []
        end = n + self.horizon
        for j in range(n, end + 1):
            disjuncts.append(_and3([prefix, self.holds(r, j, b)]))
            prefix = _and3([prefix, self.holds(r, j, a)])
            if prefix is False:
                return _or3(disjuncts)
        found = _or3(disjuncts)
        if found is True:
            return True
        settled = max(n, self.stem_bound(r, a), self.stem_bound(r, b)) + run.ell - 1
        if end >= settled:
            return found
        return _or3([found, None])


def brute_force_holds(m: Model, run_index: int, n: int, phi: Formula, horizon: int):
    """True, False, or None when the bounded search is inconclusive."""
    core = phi if is_core(phi) else expand(phi, m.signature)
    return BruteForce(m, horizon).holds(run_index, n, core)

