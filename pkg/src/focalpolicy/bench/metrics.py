"""Summary statistics over sweep rows."""

from __future__ import annotations

from collections import defaultdict
from statistics import median
from typing import NamedTuple


class AccumulatedSubopt(NamedTuple):
    value: float
    solved: int
    unsolved: int
    missing_opt: int


def accumulated_suboptimality(records) -> AccumulatedSubopt:
    """Sum of ``cost/opt - 1`` over solved rows that know their optimal cost."""
    cells = {(r.algorithm, r.heuristic, r.w) for r in records}
    if len(cells) > 1:
        raise ValueError(f"records span {len(cells)} (algorithm, heuristic, w) cells")
    total = 0.0
    solved = unsolved = missing = 0
    for r in records:
        if not r.solved:
            unsolved += 1
        elif r.opt is None:
            missing += 1
        else:
            solved += 1
            total += (1.0 if r.opt == 0 else r.cost / r.opt) - 1.0
    return AccumulatedSubopt(total, solved, unsolved, missing)


def group_by(records, *names):
    out = defaultdict(list)
    for r in records:
        out[tuple(getattr(r, n) for n in names)].append(r)
    return dict(out)


def median_expansions(records) -> float:
    return median(r.expansions for r in records)


def label(r) -> str:
    return f"focal:{r.heuristic}" if r.algorithm == "focal" else r.algorithm
