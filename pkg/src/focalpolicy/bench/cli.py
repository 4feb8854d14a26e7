"""Command line entry points.

Exit codes: 0 success, 2 configuration error, 3 a search stopped on a resource limit.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ..domains import format_instance, load_space, make_domain, parse_instance
from ..heuristics import FocalConfig
from ..mlp import MlpPolicy, load_model
from ..policy import PolicyCorruption, SyntheticPolicyTable, build_opt_table, measure_accuracy, synthesize_policy
from ..search import Limits, focal_search, preferred_astar, weighted_astar
from .config import ConfigError, check_algorithm, parse_config
from .runner import LIMIT_STATUSES, run_sweep

OK, CONFIG_ERROR, RESOURCE_LIMIT = 0, 2, 3


def _domain(name):
    try:
        return make_domain(name)
    except ValueError as e:
        raise ConfigError(f"{e}") from None


def _space(name):
    try:
        return load_space(name)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _read_instance(domain_name, arg):
    p = Path(arg)
    text = p.read_text() if p.is_file() else arg.replace(";", "\n")
    try:
        return parse_instance(domain_name.rstrip("0123456789"), text)
    except ValueError as e:  # ParseError and UnsolvableInstance
        raise ConfigError(f"bad instance: {e}") from None


def cmd_oracle(args):
    space = _space(args.domain)
    h = space.hstar
    print(f"{args.domain}: {len(space)} states, max h* {h.max():g}, mean h* {h.mean():.3f}")
    if args.out:
        space.table.save(args.out)
        print(f"wrote {args.out}")
    return OK


def cmd_gen_policy(args):
    space = _space(args.domain)
    if not 0.0 <= args.acc <= 1.0:
        raise ConfigError("--acc must lie in [0, 1]")
    opt = build_opt_table(space.domain, space.table, seed=args.seed)
    table = synthesize_policy(opt, space.domain, args.acc, args.seed)
    table.save(args.output)
    print(f"wrote {args.output}: {len(table.rows)} states, target {args.acc:g}, measured {table.measured_acc:.6f}")
    return OK


def _load_policy(path):
    try:
        return SyntheticPolicyTable.load(path)
    except (OSError, PolicyCorruption) as e:
        raise ConfigError(f"cannot load policy {path}: {e}") from None


def cmd_measure_acc(args):
    table = _load_policy(args.policy)
    space = _space(table.domain)
    if len(space) != len(table.rows):
        raise ConfigError(f"policy has {len(table.rows)} rows, {table.domain} has {len(space)} states")
    opt = build_opt_table(space.domain, space.table)
    sample = None
    if args.sample:
        scored = opt.scored
        rng = np.random.default_rng(args.seed)
        sample = rng.choice(scored, size=min(args.sample, len(scored)), replace=False)
    print(f"{measure_accuracy(table, opt, sample):.6f}")
    return OK


def cmd_solve(args):
    algo = check_algorithm(args.algo)
    base = _domain(args.domain)
    state = _read_instance(args.domain, args.instance)
    if len(state) != len(base.goal):
        raise ConfigError(f"instance does not fit domain {args.domain}")
    limits = Limits(args.max_expansions, args.max_seconds)
    domain, start, policy, acc = base, state, None, args.acc
    if args.policy:
        table = _load_policy(args.policy)
        if table.domain != args.domain:
            raise ConfigError(f"policy was built for {table.domain}, not {args.domain}")
        space = _space(args.domain)
        domain, policy = space.domain, table
        try:
            start = domain.index_of(state)
        except KeyError:
            raise ConfigError("instance cannot reach the goal") from None
        if acc is None:
            acc = table.measured_acc
    elif args.model:
        try:
            model = load_model(args.model)
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot load model {args.model}: {e}") from None
        if model.output_dim != base.action_count:
            raise ConfigError(f"model has {model.output_dim} outputs, {args.domain} has {base.action_count} actions")
        policy = MlpPolicy(model)
    if algo != "wastar" and policy is None:
        raise ConfigError(f"{algo} needs --policy or --model")
    if algo == "wastar":
        res = weighted_astar(domain, start, args.w, limits)
    elif algo == "prefastar":
        res = preferred_astar(domain, start, policy, limits)
    else:
        fc = FocalConfig(algo.split(":", 1)[1], acc=0.875 if acc is None else acc,
                         alpha=base.action_count - 1)
        res = focal_search(domain, start, args.w, fc, policy, limits)
    cost = f"{res.cost:g}" if res.solved else "-"
    print(f"status {res.status} cost {cost} expansions {res.expansions} generations {res.generations}")
    if res.solved and args.plan:
        for s, a in res.path:
            shown = domain.base_state(s) if domain is not base else s
            print(f"{'start' if a is None else a}: {format_instance(base, shown).replace(chr(10), '; ')}")
    return RESOURCE_LIMIT if res.status in LIMIT_STATUSES else OK


def cmd_sweep(args):
    try:
        text = Path(args.config).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    cfg = parse_config(text)
    records = run_sweep(cfg, args.output)
    limited = sum(r.status in LIMIT_STATUSES for r in records)
    solved = sum(r.solved for r in records)
    print(f"{len(records)} rows, {solved} solved, {limited} stopped on limits")
    return RESOURCE_LIMIT if limited else OK


def build_parser():
    p = argparse.ArgumentParser(prog="focalpolicy", description="Policy-guided bounded-suboptimal search.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    o = sub.add_parser("oracle", help="enumerate a small domain and cache its cost-to-go table")
    o.add_argument("domain")
    o.add_argument("--out", help="also save the table to this .npz path")
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen-policy", help="synthesize a policy table of given accuracy")
    g.add_argument("domain")
    g.add_argument("--acc", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen_policy)

    s = sub.add_parser("solve", help="solve one instance (file path or literal text, ';' separates lines)")
    s.add_argument("domain")
    s.add_argument("instance")
    s.add_argument("--algo", default="wastar")
    s.add_argument("--w", type=float, default=1.5)
    src = s.add_mutually_exclusive_group()
    src.add_argument("--policy")
    src.add_argument("--model")
    s.add_argument("--acc", type=float, help="policy accuracy used by disc1 (default: measured or 0.875)")
    s.add_argument("--max-expansions", type=int, default=10_000_000)
    s.add_argument("--max-seconds", type=float, default=300.0)
    s.add_argument("--plan", action="store_true", help="print the solution path")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="run a sweep config and write its CSV")
    w.add_argument("config")
    w.add_argument("-o", "--output", help="CSV path (overrides the config's 'output')")
    w.set_defaults(func=cmd_sweep)

    m = sub.add_parser("measure-acc", help="accuracy of a saved policy table")
    m.add_argument("--policy", required=True)
    m.add_argument("--sample", type=int, default=0, help="sample size (default: every state)")
    m.add_argument("--seed", type=int, default=0)
    m.set_defaults(func=cmd_measure_acc)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return CONFIG_ERROR if e.code else OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if not getattr(args, "w", 1.0) >= 1:
        print("error: --w must be >= 1", file=sys.stderr)
        return CONFIG_ERROR
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return CONFIG_ERROR
    except MemoryError as e:
        print(f"error: {e}", file=sys.stderr)
        return RESOURCE_LIMIT


if __name__ == "__main__":
    sys.exit(main())
