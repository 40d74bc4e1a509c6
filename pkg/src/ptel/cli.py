"""Command-line interface.

Exit codes: 0 success or true, 1 false or countermodel found, 2 usage or
I/O error, 3 validation or proof-check rejection.  Results go to standard
output, diagnostics to standard error.  PTEL_SEED sets the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from ptel.axioms import match_axiom
from ptel.countermodel import falsify
from ptel.fixtures import fixtures, run_fixtures
from ptel.gen import GenParams, gen_formula, gen_model
from ptel.grammar import parse, unparse
from ptel.model import Model, dump_model, load_model, validate
from ptel.proof import accepted, check_proof, dump_proof, load_proof, read_theory_file
from ptel.semantics import Evaluator
from ptel.soundness import SoundnessConfig, soundness_suite
from ptel.syntax import (
    AgentSignature, FormulaSyntaxError, NestedContext, build_k_nested, expand,
    match_k_nested, rank,
)

OK, FALSE, USAGE, REJECTED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get("PTEL_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"PTEL_SEED must be an integer, got {raw!r}")


def _sig(args, model: Model | None = None) -> AgentSignature:
    if model is not None and not args.agents:
        return model.signature
    names = tuple(a.strip() for a in (args.agents or "a1,a2").split(",") if a.strip())
    if not names:
        raise UsageError("--agents needs at least one agent name")
    return AgentSignature(names)


def _model(args) -> Model:
    model = load_model(args.model)
    problems = validate(model)
    if problems:
        raise _Invalid(problems)
    return model


class _Invalid(Exception):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = problems


def _theory(path, sig):
    return list(read_theory_file(path, sig).formulas) if path else []


# ---------------------------------------------------------------- commands

def cmd_eval(args) -> int:
    model = _model(args)
    phi = parse(args.formula, _sig(args, model))
    value = Evaluator(model).holds(args.run, args.time, phi)
    print("true" if value else "false")
    return OK if value else FALSE


def cmd_valid(args) -> int:
    model = _model(args)
    phi = parse(args.formula, _sig(args, model))
    world = Evaluator(model).counter_world([], phi)
    if world is None:
        print("valid")
        return OK
    print(f"invalid: fails at run {world.run} time {world.time}")
    return FALSE


def cmd_consequence(args) -> int:
    model = _model(args)
    sig = _sig(args, model)
    theory = _theory(args.theory, sig)
    world = Evaluator(model).counter_world(theory, parse(args.formula, sig))
    if world is None:
        print("consequence holds")
        return OK
    print(f"not a consequence: theory holds but formula fails at run {world.run} time {world.time}")
    return FALSE


def cmd_falsify(args) -> int:
    sig = _sig(args)
    theory = _theory(args.theory, sig)
    seed = default_seed() if args.seed is None else args.seed
    found = falsify(theory, parse(args.formula, sig), args.budget, seed)
    if found is None:
        print(f"no countermodel in {args.budget} models (this is not a validity proof)")
        return OK
    print(f"countermodel found after {found.tries} models at run {found.world.run} "
          f"time {found.world.time}")
    text = dump_model(found.model)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return FALSE


def cmd_check_model(args) -> int:
    problems = validate(load_model(args.model))
    if problems:
        for p in problems:
            print(p)
        return REJECTED
    print("ok")
    return OK


def cmd_check_proof(args) -> int:
    proof = load_proof(args.proof, AgentSignature(tuple(args.agents.split(",")))
                       if args.agents else None)
    theory = proof.theory
    if args.theory:
        theory = theory.union(_theory(args.theory, proof.sig))
    result = check_proof(proof, theory, bound=args.bound)
    print(result)
    return OK if accepted(result) else REJECTED


def cmd_axiom_match(args) -> int:
    sig = _sig(args)
    matches = match_axiom(expand(parse(args.formula, sig), sig), sig)
    if not matches:
        print("no axiom")
        return FALSE
    seen = []
    for aid, _ in matches:
        if aid not in seen:
            seen.append(aid)
    print("\n".join(seen))
    return OK


def cmd_expand(args) -> int:
    sig = _sig(args)
    print(unparse(expand(parse(args.formula, sig), sig)))
    return OK


def cmd_rank(args) -> int:
    sig = _sig(args)
    print(rank(expand(parse(args.formula, sig), sig)))
    return OK


def _ctx(args, sig) -> NestedContext:
    premises = tuple(parse(b, sig) for b in args.premise)
    ops = tuple(args.op or ())
    try:
        return NestedContext(premises, ops)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_knested(args) -> int:
    sig = _sig(args)
    ctx = _ctx(args, sig)
    if args.knested_cmd == "build":
        print(unparse(build_k_nested(ctx, parse(args.core, sig))))
        return OK
    core = match_k_nested(parse(args.formula, sig), ctx, sig)
    if core is None:
        print("no match")
        return FALSE
    print(unparse(core))
    return OK


def _params(args) -> GenParams:
    seed = default_seed() if args.seed is None else args.seed
    try:
        return GenParams(seed=seed, runs=tuple(args.runs), stem=tuple(args.stem),
                         loop=tuple(args.loop), agents=args.agent_count, atoms=args.atoms,
                         edge_density=args.edge_density, depth=tuple(args.depth),
                         denominator_bound=args.denominator_bound, core_only=args.core_only)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_gen(args) -> int:
    params = _params(args)
    if args.gen_cmd == "model":
        print(dump_model(gen_model(params)))
    else:
        print(unparse(gen_formula(params)))
    return OK


def cmd_soundness(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    config = SoundnessConfig(seed=seed, models=args.trials, instances=args.instances,
                             rule_trials=args.rule_trials, mutate=args.mutate)
    report = soundness_suite(config)
    print(report.to_json() if args.json else report.to_text())
    return OK if report.ok else FALSE


def cmd_fixtures(args) -> int:
    if args.fixtures_cmd == "list":
        print("\n".join(fixtures()))
        return OK
    if args.fixtures_cmd == "dump":
        table = fixtures()
        if args.name not in table:
            raise UsageError(f"no fixture named {args.name!r}; try `fixtures list`")
        print(dump_proof(table[args.name]))
        return OK
    rows = run_fixtures(args.max_k)
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return OK if all(ok for _, ok, _ in rows) else REJECTED


# ------------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ptel", description="Evaluate, prove and fuzz probabilistic "
                                         "temporal epistemic formulas.")
    p.add_argument("--agents", help="comma-separated agent names (default a1,a2, "
                                    "or the model's agents)")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("eval", help="truth of a formula at one world")
    s.add_argument("--model", required=True)
    s.add_argument("--run", type=int, required=True)
    s.add_argument("--time", type=int, required=True)
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("valid", help="validity in a model")
    s.add_argument("--model", required=True)
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_valid)

    s = sub.add_parser("consequence", help="local consequence in a model")
    s.add_argument("--model", required=True)
    s.add_argument("--theory", required=True)
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_consequence)

    s = sub.add_parser("falsify", help="search generated models for a countermodel")
    s.add_argument("--theory")
    s.add_argument("--formula", required=True)
    s.add_argument("--budget", type=int, default=200)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="write the countermodel JSON here instead of stdout")
    s.set_defaults(func=cmd_falsify)

    s = sub.add_parser("check-model", help="validate a model file")
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_check_model)

    s = sub.add_parser("check-proof", help="check a proof file")
    s.add_argument("--proof", required=True)
    s.add_argument("--theory", help="extra hypotheses, added to the proof's own theory")
    s.add_argument("--bound", type=int, help="premise bound for infinitary steps")
    s.set_defaults(func=cmd_check_proof)

    s = sub.add_parser("axiom-match", help="axiom schemas a formula instantiates")
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_axiom_match)

    s = sub.add_parser("expand", help="rewrite into core syntax")
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_expand)

    s = sub.add_parser("rank", help="ordinal rank of a formula")
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("knested", help="build or match k-nested implications")
    ks = s.add_subparsers(dest="knested_cmd", required=True, parser_class=_Parser)
    for name in ("build", "match"):
        k = ks.add_parser(name)
        k.add_argument("--premise", action="append", required=True,
                       help="beta_0 first; repeat k+1 times")
        k.add_argument("--op", action="append",
                       help="X, Z or K[agent]; X_1 first; repeat k times")
        if name == "build":
            k.add_argument("--core", required=True)
        else:
            k.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_knested)

    s = sub.add_parser("gen", help="generate a random model or formula")
    gs = s.add_subparsers(dest="gen_cmd", required=True, parser_class=_Parser)
    defaults = GenParams()
    for name in ("model", "formula"):
        g = gs.add_parser(name)
        g.add_argument("--seed", type=int)
        g.add_argument("--runs", type=int, nargs=2, default=defaults.runs)
        g.add_argument("--stem", type=int, nargs=2, default=defaults.stem)
        g.add_argument("--loop", type=int, nargs=2, default=defaults.loop)
        g.add_argument("--agent-count", type=int, default=defaults.agents)
        g.add_argument("--atoms", type=int, default=defaults.atoms)
        g.add_argument("--edge-density", type=float, default=defaults.edge_density)
        g.add_argument("--depth", type=int, nargs=2, default=defaults.depth)
        g.add_argument("--denominator-bound", type=int, default=defaults.denominator_bound)
        g.add_argument("--core-only", action="store_true")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("soundness", help="fuzz axioms and rules on random models")
    s.add_argument("--trials", type=int, default=200, help="random models for the axiom sweep")
    s.add_argument("--instances", type=int, default=5)
    s.add_argument("--rule-trials", type=int, default=200)
    s.add_argument("--seed", type=int)
    s.add_argument("--mutate", help="corrupt this schema (checks that violations are caught)")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_soundness)

    s = sub.add_parser("fixtures", help="bundled proofs and witness models")
    fs = s.add_subparsers(dest="fixtures_cmd", required=True, parser_class=_Parser)
    r = fs.add_parser("run")
    r.add_argument("--max-k", type=int, default=20)
    fs.add_parser("list")
    d = fs.add_parser("dump")
    d.add_argument("name")
    s.set_defaults(func=cmd_fixtures)
    return p


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"ptel: {exc}", file=sys.stderr)
        return USAGE
    except _Invalid as exc:
        print("ptel: invalid model:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return REJECTED
    except FormulaSyntaxError as exc:
        print(f"ptel: syntax error: {exc}", file=sys.stderr)
        return USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"ptel: {exc}", file=sys.stderr)
        return USAGE
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        print(f"ptel: {exc}", file=sys.stderr)
        return USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
