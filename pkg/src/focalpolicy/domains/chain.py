"""A line of states ``0..length`` with the goal at the far end.

Action 0 steps forward, action 1 steps back. Handy for unrolling policies
whose per-step success rate is known in closed form.
"""

from __future__ import annotations

import numpy as np

from .base import Domain


class ChainDomain(Domain):
    action_count = 2

    def __init__(self, length: int = 50):
        if length < 1:
            raise ValueError("chain length must be positive")
        self.length = length
        self.name = f"chain{length}"
        super().__init__(length)

    def key(self, state) -> int:
        return int(state)

    def decode(self, key: int):
        return key

    def successors(self, state):
        out = []
        if state < self.length:
            out.append((0, state + 1, 1.0))
        if state > 0:
            out.append((1, state - 1, 1.0))
        return out

    def predecessors(self, state):
        out = []
        if state > 0:
            out.append((state - 1, 0))
        if state < self.length:
            out.append((state + 1, 1))
        return out

    def heuristic(self, state) -> float:
        return float(self.length - state)


class NoisyChainPolicy:
    """Prefers the forward action with probability ``p_correct`` at each state.

    Per state and trial the argmax is fixed by a seeded draw, so a greedy
    unroll succeeds exactly when every one of its steps drew the right action.
    """

    action_count = 2

    def __init__(self, p_correct: float, seed: int = 0, margin: float = 0.8):
        rng = np.random.default_rng(seed)
        self.p_correct = p_correct
        self._good = np.array([margin, 1.0 - margin])
        self._bad = self._good[::-1].copy()
        self._rng = rng
        self._draws = {}

    def scores(self, state):
        ok = self._draws.get(state)
        if ok is None:
            ok = self._draws[state] = bool(self._rng.random() < self.p_correct)
        return self._good if ok else self._bad


def greedy_success_rate(p_correct: float, steps: int, trials: int, seed: int = 0) -> float:
    """Fraction of trials in which ``steps`` independent greedy choices are all right."""
    rng = np.random.default_rng(seed)
    hits = 0
    block = 10_000
    for lo in range(0, trials, block):
        m = min(block, trials - lo)
        hits += int((rng.random((m, steps)) < p_correct).all(axis=1).sum())
    return hits / trials
