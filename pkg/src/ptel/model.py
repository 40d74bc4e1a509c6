"""Finitely presented models: ultimately periodic runs, accessibility on
canonical worlds, run measures and agent probability spaces."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple

from ptel.syntax import AgentSignature, active


class CanonicalWorld(NamedTuple):
    run: int
    pos: int


class World(NamedTuple):
    """A concrete possible world (run, time)."""
    run: int
    time: int


class SingleTime(NamedTuple):
    time: int


class Progression(NamedTuple):
    first: int
    step: int


@dataclass(frozen=True)
class Run:
    stem: tuple[frozenset[str], ...]
    loop: tuple[frozenset[str], ...]

    def __post_init__(self):
        object.__setattr__(self, "stem", tuple(frozenset(v) for v in self.stem))
        object.__setattr__(self, "loop", tuple(frozenset(v) for v in self.loop))
        if not self.loop:
            raise ValueError("a run needs a loop of length >= 1")

    @property
    def p(self) -> int:
        return len(self.stem)

    @property
    def ell(self) -> int:
        return len(self.loop)

    @property
    def size(self) -> int:
        return len(self.stem) + len(self.loop)

    def canon(self, n: int) -> int:
        if n < self.size:
            return n
        return self.p + (n - self.p) % self.ell

    def valuation(self, n: int) -> frozenset[str]:
        pos = self.canon(n)
        return self.stem[pos] if pos < self.p else self.loop[pos - self.p]


@dataclass(frozen=True)
class Model:
    """A finite presentation of a model.

    ``access[a]`` is a set of pairs of canonical worlds.  ``run_measure[c]``
    maps run index to weight.  ``agent_spaces[(c, a)]`` is a tuple of
    (World, weight) pairs with concrete, unbounded times.
    """

    signature: AgentSignature
    atoms: tuple[str, ...]
    runs: tuple[Run, ...]
    access: Mapping[str, frozenset[tuple[CanonicalWorld, CanonicalWorld]]]
    run_measure: Mapping[CanonicalWorld, Mapping[int, Fraction]]
    agent_spaces: Mapping[tuple[CanonicalWorld, str], tuple[tuple[World, Fraction], ...]]
    _succ: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        succ = {}
        for a, pairs in self.access.items():
            table: dict[CanonicalWorld, list[CanonicalWorld]] = {}
            for src, dst in pairs:
                table.setdefault(CanonicalWorld(*src), []).append(CanonicalWorld(*dst))
            succ[a] = {k: tuple(sorted(v)) for k, v in table.items()}
        object.__setattr__(self, "_succ", succ)

    @property
    def agents(self) -> tuple[str, ...]:
        return self.signature.agents

    def worlds(self) -> list[CanonicalWorld]:
        return [CanonicalWorld(r, pos) for r, run in enumerate(self.runs)
                for pos in range(run.size)]

    def canon(self, run_index: int, n: int) -> CanonicalWorld:
        return CanonicalWorld(run_index, self.runs[run_index].canon(n))

    def valuation(self, c: CanonicalWorld) -> frozenset[str]:
        return self.runs[c.run].valuation(c.pos)

    def is_active(self, c: CanonicalWorld, agent: str) -> bool:
        return active(agent).name in self.valuation(c)

    def successors(self, agent: str, c: CanonicalWorld) -> tuple[CanonicalWorld, ...]:
        return self._succ.get(agent, {}).get(c, ())

    def instances(self, c: CanonicalWorld) -> SingleTime | Progression:
        run = self.runs[c.run]
        if c.pos < run.p:
            return SingleTime(c.pos)
        return Progression(c.pos, run.ell)

    def lifted_access(self, agent: str, w: World, v: World) -> bool:
        return self.canon(*v) in self.successors(agent, self.canon(*w))


def canon(m: Model, run_index: int, n: int) -> CanonicalWorld:
    return m.canon(run_index, n)


def instances(m: Model, c: CanonicalWorld) -> SingleTime | Progression:
    return m.instances(c)


def lifted_access(m: Model, agent: str, w: World, v: World) -> bool:
    return m.lifted_access(agent, World(*w), World(*v))


# -------------------------------------------------------------- validation

def validate(m: Model) -> list[str]:
    """All violated model conditions; empty when the model is well formed."""
    out: list[str] = []
    if not m.runs:
        out.append("no runs: the run set must be non-empty")
        return out
    universe = set(m.atoms) | {active(a).name for a in m.agents}
    worlds = m.worlds()
    world_set = set(worlds)
    for r, run in enumerate(m.runs):
        for i, val in enumerate(run.stem + run.loop):
            extra = set(val) - universe
            if extra:
                out.append(f"unknown atoms {sorted(extra)} in run {r} position {i}")

    for a in m.agents:
        pairs = {(CanonicalWorld(*x), CanonicalWorld(*y)) for x, y in m.access.get(a, ())}
        for x, y in sorted(pairs):
            if x not in world_set or y not in world_set:
                out.append(f"agent {a}: pair {tuple(x)}->{tuple(y)} names a missing world")
                continue
            if not m.is_active(x, a):
                out.append(f"agent {a}: inactive source {tuple(x)} has successor {tuple(y)}")
            if not m.is_active(y, a):
                out.append(f"agent {a}: target inactive at {tuple(y)} (from {tuple(x)})")
            if (y, x) not in pairs:
                out.append(f"agent {a}: not symmetric, {tuple(x)}->{tuple(y)} lacks its converse")
        succ: dict[CanonicalWorld, set[CanonicalWorld]] = {}
        for x, y in pairs:
            succ.setdefault(x, set()).add(y)
        for x, ys in sorted(succ.items()):
            for y in sorted(ys):
                for z in sorted(succ.get(y, ())):
                    if z not in ys:
                        out.append(f"agent {a}: not transitive, {tuple(x)}->{tuple(y)}->{tuple(z)}")
        for c in worlds:
            if m.is_active(c, a) and (c, c) not in pairs:
                out.append(f"agent {a}: active world {tuple(c)} lacks its self-loop")
    for a in m.access:
        if a not in m.agents:
            out.append(f"access relation for unknown agent {a!r}")

    for c in worlds:
        weights = m.run_measure.get(c)
        if weights is None:
            out.append(f"world {tuple(c)}: missing run measure")
        else:
            out.extend(_check_weights(f"world {tuple(c)} run measure", weights.items(),
                                      lambda r: 0 <= r < len(m.runs)))
        for a in m.agents:
            space = m.agent_spaces.get((c, a))
            label = f"world {tuple(c)} agent {a} space"
            if not space:
                out.append(f"{label}: empty sample set")
                continue
            out.extend(_check_weights(label, space,
                                      lambda w: 0 <= w[0] < len(m.runs) and w[1] >= 0))
    return out


def _check_weights(label, items, key_ok) -> list[str]:
    out = []
    total = Fraction(0)
    for key, w in items:
        if not key_ok(key):
            out.append(f"{label}: bad key {key!r}")
        if w < 0:
            out.append(f"{label}: negative weight {w}")
        total += w
    if total != 1:
        out.append(f"{label}: measure not normalized (sum {total})")
    return out


# ------------------------------------------------------------------ JSON I/O

def _frac(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    return Fraction(str(text))


def _fmt(value: Fraction) -> str:
    return str(Fraction(value))


def model_from_dict(doc: dict) -> Model:
    sig = AgentSignature(tuple(doc["agents"]))
    runs = tuple(Run(tuple(frozenset(v) for v in r.get("stem", [])),
                     tuple(frozenset(v) for v in r["loop"])) for r in doc["runs"])
    access = {a: frozenset((CanonicalWorld(*x), CanonicalWorld(*y)) for x, y in pairs)
              for a, pairs in doc.get("access", {}).items()}
    worlds = [CanonicalWorld(r, pos) for r, run in enumerate(runs) for pos in range(run.size)]

    rm_doc = doc.get("run_measure", {})
    default = rm_doc.get("default")
    run_measure = {}
    for c in worlds:
        entry = rm_doc.get(f"{c.run},{c.pos}", default)
        if entry is not None:
            run_measure[c] = {int(k): _frac(v) for k, v in entry.items()}

    sp_doc = doc.get("agent_spaces", {})
    default_sp = sp_doc.get("default_agent")
    spaces = {}
    for c in worlds:
        for a in sig.agents:
            entry = sp_doc.get(f"{c.run},{c.pos},{a}", default_sp)
            if entry is not None:
                spaces[(c, a)] = tuple((World(*e["world"]), _frac(e["w"])) for e in entry)
    return Model(sig, tuple(doc.get("atoms", [])), runs, access, run_measure, spaces)


def model_to_dict(m: Model) -> dict:
    return {
        "agents": list(m.agents),
        "atoms": list(m.atoms),
        "runs": [{"stem": [sorted(v) for v in run.stem],
                  "loop": [sorted(v) for v in run.loop]} for run in m.runs],
        "access": {a: [[list(x), list(y)] for x, y in sorted(m.access.get(a, ()))]
                   for a in m.agents},
        "run_measure": {f"{c.run},{c.pos}": {str(r): _fmt(w) for r, w in sorted(ws.items())}
                        for c, ws in sorted(m.run_measure.items())},
        "agent_spaces": {f"{c.run},{c.pos},{a}": [{"world": list(w), "w": _fmt(x)}
                                                   for w, x in space]
                         for (c, a), space in sorted(m.agent_spaces.items())},
    }


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


_FLAT = re.compile(r"\[\s*([^\[\]{}]*?)\s*\]")


def dump_model(m: Model) -> str:
    """Indented JSON with short lists (pairs, world coordinates) on one line."""
    text = json.dumps(model_to_dict(m), indent=1, sort_keys=True)
    text = _FLAT.sub(lambda mt: "[" + re.sub(r"\s*\n\s*", " ", mt.group(1)) + "]", text)
    return re.sub(r"\[\s*(\[[^\[\]]*\]),\s*(\[[^\[\]]*\])\s*\]", r"[\1, \2]", text)
