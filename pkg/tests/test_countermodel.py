from ptel.countermodel import falsify
from ptel.grammar import parse
from ptel.model import validate
from ptel.semantics import Evaluator

p = parse("p")


def test_empty_theory_atom_falsified_quickly():
    found = falsify([], p, budget=10, seed=0)
    assert found is not None and found.tries <= 10
    assert not Evaluator(found.model).holds(found.world.run, found.world.time, p)


def test_theory_entails_phi_has_no_countermodel():
    for seed in range(3):
        assert falsify([p], p, budget=300, seed=seed) is None


def test_knowledge_without_activity():
    phi = parse("K[a1] p -> p")
    found = falsify([], phi, budget=200, seed=1)
    assert found is not None
    m, w = found.model, found.world
    assert validate(m) == []
    c = m.canon(*w)
    assert not m.is_active(c, "a1")
    ev = Evaluator(m)
    assert ev.holds(w.run, w.time, parse("K[a1] p")) and not ev.holds(w.run, w.time, p)


def test_countermodel_satisfies_theory():
    theory = [parse("p | q")]
    found = falsify(theory, parse("q"), budget=200, seed=4)
    ev = Evaluator(found.model)
    w = found.world
    assert ev.holds(w.run, w.time, theory[0]) and not ev.holds(w.run, w.time, parse("q"))
