"""Sweep execution: one row per (accuracy, seed, algorithm, bound, instance) cell."""

from __future__ import annotations

import csv
import io
import math
import multiprocessing as mp
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from ..domains import BlocksDomain, load_space, make_domain, parse_instance
from ..heuristics import FocalConfig
from ..mlp import MlpPolicy, load_model
from ..policy import build_opt_table, synthesize_policy
from ..search import EXHAUSTED, SOLVED, Limits, focal_search, preferred_astar, weighted_astar
from .config import ConfigError, ExperimentConfig

COLUMNS = ("domain", "instance", "algorithm", "heuristic", "w", "target_acc", "measured_acc", "seed",
           "status", "cost", "opt", "subopt", "expansions", "generations", "wall_s")
LIMIT_STATUSES = frozenset({"timeout", "expansion-limit"})


@dataclass
class RunRecord:
    domain: str
    instance: str
    algorithm: str
    heuristic: str
    w: float
    target_acc: float | None
    measured_acc: float | None
    seed: int | None
    status: str
    cost: float | None
    opt: float | None
    subopt: float | None
    expansions: int
    generations: int
    wall_s: float | None

    @property
    def solved(self) -> bool:
        return self.status == SOLVED

    @property
    def bounded(self) -> bool:
        return self.algorithm != "prefastar"

    def row(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "measured_acc" and v is not None:
                out.append(f"{v:.6f}")
            elif f.name == "wall_s" and v is not None:
                out.append(f"{v:.6f}")
            else:
                out.append(_text(v))
        return out


def _text(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        r = repr(v)
        return r[:-2] if r.endswith(".0") else r
    return str(v)


def _num(text: str):
    return None if text == "" else float(text)


def read_csv(path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        out = []
        for r in reader:
            out.append(RunRecord(
                r["domain"], r["instance"], r["algorithm"], r["heuristic"], float(r["w"]),
                _num(r["target_acc"]), _num(r["measured_acc"]),
                None if r["seed"] == "" else int(r["seed"]), r["status"],
                _num(r["cost"]), _num(r["opt"]), _num(r["subopt"]),
                int(r["expansions"]), int(r["generations"]), _num(r["wall_s"])))
        return out


def format_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


# ---------------------------------------------------------------- instances

@dataclass
class Instance:
    label: str
    state: object          # state of the domain the search runs on
    opt: float | None


def _kind(domain_name: str) -> str:
    return domain_name.rstrip("0123456789")


def read_instance_file(path, domain_name: str) -> list[str]:
    """Blocksworld records are separated by blank lines; other domains use one line each."""
    text = Path(path).read_text()
    if _kind(domain_name) == "blocks":
        chunks, cur = [], []
        for line in text.splitlines():
            body = line.split("#", 1)[0].strip()
            if body:
                cur.append(body)
            elif cur:
                chunks.append("\n".join(cur))
                cur = []
        if cur:
            chunks.append("\n".join(cur))
        return chunks
    return [ln.split("#", 1)[0].strip() for ln in text.splitlines() if ln.split("#", 1)[0].strip()]


def read_opt_file(path) -> list[float | None]:
    out = []
    for line in Path(path).read_text().splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            out.append(None if body in ("-", "?") else float(body))
    return out


def sample_instances(hstar: np.ndarray, count: int, seed: int, full_space: bool = False) -> np.ndarray:
    """Uniform sample without replacement from the non-goal states, in ascending index order."""
    candidates = np.flatnonzero(hstar > 0)
    if full_space or count >= len(candidates):
        return candidates
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(candidates, size=count, replace=False))


def _label(state) -> str:
    return " ".join(str(v) for v in state)


def file_instances(cfg: ExperimentConfig, base) -> list[tuple[str, object, float | None]]:
    texts = read_instance_file(cfg.instance_file, cfg.domain)
    opts = read_opt_file(cfg.opt_file) if cfg.opt_file else []
    if opts and len(opts) != len(texts):
        raise ConfigError(f"{cfg.opt_file} has {len(opts)} entries for {len(texts)} instances")
    out = []
    for i, text in enumerate(texts):
        try:
            state = parse_instance(_kind(cfg.domain), text)
        except ValueError as e:
            raise ConfigError(f"{cfg.instance_file}: instance {i + 1}: {e}") from None
        if len(state) != len(base.goal):
            raise ConfigError(f"{cfg.instance_file}: instance {i + 1} does not fit domain {cfg.domain}")
        out.append((_label(state), state, opts[i] if opts else None))
    return out[: cfg.instances] if cfg.instances < len(out) else out


# ------------------------------------------------------------------- cells

@dataclass(frozen=True)
class Cell:
    algorithm: str
    w: float
    instance: int


class _Context:
    """Read-only state shared by every cell of one (accuracy, seed) group."""

    def __init__(self, cfg, domain, instances, policy, acc_param):
        self.cfg = cfg
        self.domain = domain
        self.instances = instances
        self.policy = policy
        self.acc_param = acc_param
        self.limits = Limits(cfg.max_expansions, cfg.max_seconds)


_CTX: _Context | None = None


def _run_cell(cell: Cell):
    ctx = _CTX
    inst = ctx.instances[cell.instance]
    if cell.algorithm == "wastar":
        res = weighted_astar(ctx.domain, inst.state, cell.w, ctx.limits)
    elif cell.algorithm == "prefastar":
        res = preferred_astar(ctx.domain, inst.state, ctx.policy, ctx.limits)
    else:
        kind = cell.algorithm.split(":", 1)[1]
        fc = FocalConfig(kind, acc=ctx.acc_param, alpha=ctx.domain.action_count - 1,
                         disc3_last_edge_only=ctx.cfg.disc3_last_edge_only)
        res = focal_search(ctx.domain, inst.state, cell.w, fc, ctx.policy, ctx.limits)
    return res.status, res.cost, res.expansions, res.generations, res.wall_time


def _map_cells(cells, workers):
    if workers <= 1 or len(cells) < 2:
        return [_run_cell(c) for c in cells]
    # fork shares the context without pickling; imap keeps config order.
    with mp.get_context("fork").Pool(workers) as pool:
        return list(pool.imap(_run_cell, cells, chunksize=max(1, len(cells) // (8 * workers))))


def _record(cfg, inst, cell, out, target, measured, seed) -> RunRecord:
    status, cost, expansions, generations, wall = out
    solved = status == SOLVED
    cost_v = float(cost) if solved else None
    subopt = None
    if solved and inst.opt is not None:
        subopt = 1.0 if inst.opt == 0 else cost_v / inst.opt
    algo = "focal" if cell.algorithm.startswith("focal:") else cell.algorithm
    heur = cell.algorithm.split(":", 1)[1] if algo == "focal" else ""
    return RunRecord(cfg.domain, inst.label, algo, heur, float(cell.w), target, measured, seed,
                     status, cost_v, inst.opt, subopt, int(expansions), int(generations),
                     float(wall) if cfg.wall_clock else None)


def _cells(cfg, n_instances):
    cells = []
    for algo in cfg.algorithms:
        bounds = [math.inf] if algo == "prefastar" else cfg.bounds
        for w in bounds:
            for i in range(n_instances):
                cells.append(Cell(algo, w, i))
    return cells


def _groups(cfg):
    """(domain, instances, policy, acc_param, target, measured, seed) per policy."""
    if cfg.synthetic:
        try:
            space = load_space(cfg.domain)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        dom = space.domain
        hstar = space.hstar
        if cfg.instance_file:
            instances = []
            for label, state, _ in file_instances(cfg, dom.base):
                try:
                    idx = dom.index_of(state)
                except KeyError:
                    raise ConfigError(f"instance {label!r} cannot reach the goal") from None
                instances.append(Instance(label, idx, float(hstar[idx])))
        else:
            idx = sample_instances(hstar, cfg.instances, cfg.instance_seed, cfg.full_space)
            instances = [Instance(_label(dom.base_state(int(i))), int(i), float(hstar[i])) for i in idx]
        opt_tables = {}
        for acc in cfg.accuracies:
            for seed in cfg.seeds:
                if seed not in opt_tables:
                    opt_tables[seed] = build_opt_table(dom, space.table, seed=seed)
                table = synthesize_policy(opt_tables[seed], dom, acc, seed)
                yield dom, instances, table, table.measured_acc, float(acc), table.measured_acc, seed
    else:
        try:
            base = make_domain(cfg.domain)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if isinstance(base, BlocksDomain):
            raise ConfigError("learned-policy sweeps support tile and pancake domains")
        try:
            model = load_model(cfg.model)
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot load model {cfg.model}: {e}") from None
        if model.output_dim != base.action_count:
            raise ConfigError(f"model has {model.output_dim} outputs, {cfg.domain} has {base.action_count} actions")
        instances = [Instance(label, state, opt) for label, state, opt in file_instances(cfg, base)]
        yield base, instances, MlpPolicy(model), cfg.model_acc, None, None, None


def iter_sweep(cfg: ExperimentConfig):
    """Yield RunRecords in config order: policy groups, then algorithm, bound, instance."""
    global _CTX
    workers = cfg.worker_count()
    wastar_cache = {}
    for domain, instances, policy, acc_param, target, measured, seed in _groups(cfg):
        cells = _cells(cfg, len(instances))
        todo = [c for c in cells if not (c.algorithm == "wastar" and c in wastar_cache)]
        _CTX = _Context(cfg, domain, instances, policy, acc_param)
        try:
            done = dict(zip(todo, _map_cells(todo, workers)))
        finally:
            _CTX = None
        for c in cells:
            if c.algorithm == "wastar":
                out = wastar_cache.setdefault(c, done.get(c))
            else:
                out = done[c]
            yield _record(cfg, instances[c.instance], c, out, target, measured, seed)


def run_sweep(cfg: ExperimentConfig, output=None) -> list[RunRecord]:
    """Run every cell and write the CSV to ``output`` (or ``cfg.output``) when given."""
    records = list(iter_sweep(cfg))
    path = output or cfg.output
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(format_csv(records))
    return records


def expected_row_count(cfg: ExperimentConfig, n_instances: int) -> int:
    per_policy = sum(1 if a == "prefastar" else len(cfg.bounds) for a in cfg.algorithms)
    groups = len(cfg.accuracies) * len(cfg.seeds) if cfg.synthetic else 1
    return n_instances * per_policy * groups


def bound_violations(records, tol: float = 1e-9) -> list[RunRecord]:
    return [r for r in records if r.bounded and r.solved and r.opt is not None
            and r.cost > r.w * r.opt + tol]


__all__ = ["COLUMNS", "EXHAUSTED", "LIMIT_STATUSES", "RunRecord", "bound_violations", "expected_row_count",
           "format_csv", "iter_sweep", "read_csv", "run_sweep", "sample_instances"]
