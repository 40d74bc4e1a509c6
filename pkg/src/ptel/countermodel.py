"""Countermodel search over small generated models.

Finding nothing within the budget says nothing about validity: the search
only visits the models the generator happens to produce.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Iterable

from ptel.gen import GenParams, gen_model
from ptel.model import Model, World
from ptel.semantics import Evaluator
from ptel.syntax import (
    BOT_ATOM, AgentSignature, Atom, Formula, active_agent, agents_in, atoms_in,
)


@dataclass(frozen=True)
class Countermodel:
    model: Model
    world: World
    tries: int


def _vocabulary(formulas: list[Formula], sig: AgentSignature | None):
    agents, atoms = set(), set()
    for f in formulas:
        agents |= agents_in(f)
        atoms |= {a for a in atoms_in(f) if active_agent(Atom(a)) is None}
    agents.update(sig.agents if sig else ())
    atoms.discard(BOT_ATOM)
    return tuple(sorted(agents)) or ("a1",), tuple(sorted(atoms)) or ("p",)


def falsify(theory: Iterable[Formula], phi: Formula, budget: int = 200, seed: int = 0,
            sig: AgentSignature | None = None,
            params: GenParams | None = None) -> Countermodel | None:
    """Search `budget` generated models for a world where the theory holds and phi fails."""
    theory = list(theory)
    agents, atoms = _vocabulary(theory + [phi], sig)
    base = params or GenParams()
    base = replace(base, agent_names=agents, atom_list=atoms)
    rng = random.Random(seed)
    for attempt in range(budget):
        # widen the model shape slowly as the search goes on
        grow = attempt // 50
        shaped = replace(base, seed=rng.getrandbits(64),
                         runs=(1, base.runs[1] + grow), loop=(1, base.loop[1] + grow),
                         edge_density=rng.choice((0.0, 0.3, 0.7, 1.0)),
                         active_rate=rng.choice((0.5, 0.75, 1.0)))
        model = gen_model(shaped)
        world = Evaluator(model).counter_world(theory, phi)
        if world is not None:
            return Countermodel(model, world, attempt + 1)
    return None
