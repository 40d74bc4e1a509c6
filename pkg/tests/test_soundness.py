import json

from ptel.axioms import AXIOM_IDS
from ptel.grammar import parse
from ptel.model import model_from_dict
from ptel.semantics import Evaluator
from ptel.soundness import SoundnessConfig, corrupt, corrupt_inverse, soundness_suite
from ptel.syntax import Atom, Implies, expand


def test_small_suite_is_clean_and_counts_trials():
    report = soundness_suite(SoundnessConfig(seed=1, models=10, instances=2, rule_trials=40))
    assert report.ok, report.to_text()
    assert set(AXIOM_IDS) <= set(report.trials)
    assert all(report.trials[aid] == 20 for aid in AXIOM_IDS)
    assert sum(report.trials[r] for r in ("RU", "RS", "RC", "RGA", "RA")) == 40
    assert report.nonvacuous["MP"] > 0
    doc = json.loads(report.to_json())
    assert doc["ok"] is True and doc["violations"] == []
    assert "violations: 0" in report.to_text()


def test_mutation_is_caught_and_shrunk():
    config = SoundnessConfig(seed=0, models=20, instances=3, rule_trials=0,
                             axioms=("AKR",), mutate="AKR")
    report = soundness_suite(config)
    assert not report.ok
    v = report.violations[0]
    assert v.check == "AKR"
    # the reported pair still fails after shrinking
    model = model_from_dict(v.model)
    phi = parse(v.formula, model.signature)
    assert not Evaluator(model).valid(phi)


def test_corrupt_round_trip():
    p, q = Atom("p"), Atom("q")
    imp = Implies(p, q)
    core = expand(imp)
    assert corrupt_inverse(corrupt(core)) == core
    assert corrupt_inverse(corrupt(p)) == p
