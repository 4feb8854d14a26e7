"""Policy-derived FOCAL orderings.

Every key is minimized: lower means expanded earlier. Score kinds negate
likelihoods; discrepancy kinds count (weighted) departures from the argmax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

KINDS = ("score1", "score2", "score3", "score4", "disc1", "disc2", "disc3")
PROB_FLOOR = 1e-30
ACC_CLAMP = 1e-6
F_FLOOR = 1e-12


class FocalAnnotation(NamedTuple):
    log_likelihood: float = 0.0
    last_edge_prob: float = 1.0
    n_pref: int = 0
    n_nonpref: int = 0
    rank_sum: int = 0
    last_rank: int = 0


ROOT = FocalAnnotation()


@dataclass(frozen=True)
class FocalConfig:
    kind: str
    acc: float = 0.9
    alpha: int = 3
    prob_floor: float = PROB_FLOOR
    disc3_last_edge_only: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown focal heuristic {self.kind!r}; valid: {', '.join(KINDS)}")
        if self.alpha < 1:
            raise ValueError("alpha must be at least 1")
        object.__setattr__(self, "acc", min(max(self.acc, ACC_CLAMP), 1.0 - ACC_CLAMP))


class EdgeView(NamedTuple):
    """Per-state policy summary reused for every child of one expansion."""

    probs: list
    preferred: int
    ranks: list


def edge_view(scores) -> EdgeView:
    """Scores, argmax and descending-score rank (ties by index) of every action."""
    if len(scores) > 16:
        arr = np.asarray(scores)
        order = np.argsort(-arr, kind="stable")
        ranks = np.empty(len(arr), dtype=np.int64)
        ranks[order] = np.arange(len(arr))
        return EdgeView(arr.tolist(), int(order[0]), ranks.tolist())
    probs = [float(p) for p in scores]
    order = sorted(range(len(probs)), key=lambda a: (-probs[a], a))
    ranks = [0] * len(probs)
    for r, a in enumerate(order):
        ranks[a] = r
    return EdgeView(probs, order[0], ranks)


def extend(ann: FocalAnnotation, view: EdgeView, action: int, prob_floor: float = PROB_FLOOR) -> FocalAnnotation:
    p = view.probs[action]
    if p < prob_floor:
        p = prob_floor
    rank = view.ranks[action]
    pref = action == view.preferred
    return FocalAnnotation(
        ann.log_likelihood + math.log(p),
        p,
        ann.n_pref + pref,
        ann.n_nonpref + (not pref),
        ann.rank_sum + rank,
        rank,
    )


def annotate_child(parent_annotation: FocalAnnotation, policy, parent_state, action_index: int,
                   prob_floor: float = PROB_FLOOR) -> FocalAnnotation:
    return extend(parent_annotation, edge_view(policy.scores(parent_state)), action_index, prob_floor)


def disc1_coefficient(acc: float, alpha: int) -> float:
    acc = min(max(acc, ACC_CLAMP), 1.0 - ACC_CLAMP)
    return math.log(acc) / math.log((1.0 - acc) / alpha)


def key_function(config: FocalConfig):
    """Return ``key(annotation, f)`` for ``config``; lower keys are preferred."""
    kind = config.kind
    exp = math.exp
    if kind == "score1":
        return lambda ann, f: -exp(ann.log_likelihood)
    if kind == "score2":
        return lambda ann, f: -exp(ann.log_likelihood) / max(f, F_FLOOR)
    if kind == "score3":
        return lambda ann, f: -ann.last_edge_prob
    if kind == "score4":
        return lambda ann, f: -ann.last_edge_prob / max(f, F_FLOOR)
    if kind == "disc1":
        coef = disc1_coefficient(config.acc, config.alpha)
        return lambda ann, f: coef * ann.n_pref + ann.n_nonpref
    if kind == "disc2":
        return lambda ann, f: ann.n_nonpref
    if config.disc3_last_edge_only:
        return lambda ann, f: ann.last_rank
    return lambda ann, f: ann.rank_sum


def focal_key(config: FocalConfig, annotation: FocalAnnotation, f: float) -> float:
    return key_function(config)(annotation, f)


def p_prefix(annotation: FocalAnnotation, acc: float, alpha: int) -> float:
    """Modelled probability that the annotated path prefixes an optimal path."""
    if not 0.0 < acc < 1.0:
        raise ValueError("acc must lie strictly between 0 and 1")
    log_p = annotation.n_pref * math.log(acc) + annotation.n_nonpref * math.log((1.0 - acc) / alpha)
    return math.exp(log_p)
