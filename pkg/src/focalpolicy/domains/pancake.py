"""Pancake sorting with the gap heuristic.

A state lists pancake sizes from the top of the stack down. Action ``k``
flips the top ``k + 2`` pancakes, so there are ``n - 1`` actions.
"""

from __future__ import annotations

from .base import Domain


def gap_heuristic(state) -> int:
    n = len(state)
    gaps = 0
    for i in range(n - 1):
        d = state[i] - state[i + 1]
        if d > 1 or d < -1:
            gaps += 1
    # The plate acts as pancake n + 1 under the bottom one.
    if state[-1] != n:
        gaps += 1
    return gaps


def flip(state, k: int):
    return tuple(reversed(state[:k])) + tuple(state[k:])


class PancakeDomain(Domain):
    def __init__(self, n: int = 9):
        if n < 2 or n > 15:
            raise ValueError("pancake stacks are supported for 2 <= n <= 15")
        self.n = n
        self.name = f"pancake{n}"
        self.action_count = n - 1
        super().__init__(tuple(range(1, n + 1)))

    def key(self, state) -> int:
        k = 0
        for i, p in enumerate(state):
            k |= p << (4 * i)
        return k

    def decode(self, key: int):
        return tuple((key >> (4 * i)) & 15 for i in range(self.n))

    def successors(self, state):
        return [(k - 2, flip(state, k), 1.0) for k in range(2, self.n + 1)]

    def predecessors(self, state):
        # Flips are involutions.
        return [(child, a) for a, child, _ in self.successors(state)]

    def heuristic(self, state) -> int:
        return gap_heuristic(state)

    def validate(self, state):
        if sorted(state) != list(range(1, self.n + 1)):
            raise ValueError(f"not a permutation of 1..{self.n}: {state!r}")
        return tuple(state)
