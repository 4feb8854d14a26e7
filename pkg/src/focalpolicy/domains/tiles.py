"""N x N sliding-tile puzzle with Manhattan distance plus linear conflicts.

The goal places the blank at cell 0 and tiles 1..N*N-1 in reading order.
Actions move the blank: Up=0, Down=1, Left=2, Right=3.
"""

from __future__ import annotations

from bisect import bisect_left

from .base import Domain

UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3
ACTION_NAMES = ("up", "down", "left", "right")
INVERSE = (DOWN, UP, RIGHT, LEFT)


def _lis_length(seq):
    tails = []
    for x in seq:
        i = bisect_left(tails, x)
        if i == len(tails):
            tails.append(x)
        else:
            tails[i] = x
    return len(tails)


def inversions(state) -> int:
    tiles = [t for t in state if t]
    return sum(1 for i in range(len(tiles)) for j in range(i + 1, len(tiles)) if tiles[i] > tiles[j])


def is_solvable(state, n: int) -> bool:
    inv = inversions(state)
    if n % 2 == 1:
        return inv % 2 == 0
    blank_row = state.index(0) // n
    return (inv + blank_row) % 2 == 0


class TileDomain(Domain):
    action_count = 4

    def __init__(self, n: int = 3):
        if n < 2 or n > 4:
            raise ValueError("tile puzzles are supported for 2 <= N <= 4")
        self.n = n
        self.size = n * n
        self.name = f"tile{self.size - 1}"
        # moves[cell] = list of (action, neighbour cell)
        self.moves = []
        for cell in range(self.size):
            r, c = divmod(cell, n)
            opts = []
            if r > 0:
                opts.append((UP, cell - n))
            if r < n - 1:
                opts.append((DOWN, cell + n))
            if c > 0:
                opts.append((LEFT, cell - 1))
            if c < n - 1:
                opts.append((RIGHT, cell + 1))
            self.moves.append(tuple(opts))
        self._rows = [tuple(range(r * n, r * n + n)) for r in range(n)]
        self._cols = [tuple(range(c, self.size, n)) for c in range(n)]
        super().__init__(tuple(range(self.size)))

    def key(self, state) -> int:
        k = 0
        for i, t in enumerate(state):
            k |= t << (4 * i)
        return k

    def decode(self, key: int):
        return tuple((key >> (4 * i)) & 15 for i in range(self.size))

    def successors(self, state):
        blank = state.index(0)
        out = []
        for action, cell in self.moves[blank]:
            child = list(state)
            child[blank] = child[cell]
            child[cell] = 0
            out.append((action, tuple(child), 1.0))
        return out

    def predecessors(self, state):
        # Every move is undone by the opposite blank move.
        return [(child, INVERSE[a]) for a, child, _ in self.successors(state)]

    def heuristic(self, state) -> int:
        return tile_heuristic(state, self.n)

    def validate(self, state):
        if sorted(state) != list(range(self.size)):
            raise ValueError(f"not a permutation of 0..{self.size - 1}: {state!r}")
        if not is_solvable(state, self.n):
            raise ValueError(f"unsolvable parity for the blank-first goal: {state!r}")
        return tuple(state)


def manhattan(state, n: int) -> int:
    total = 0
    for cell, t in enumerate(state):
        if t:
            r, c = divmod(cell, n)
            gr, gc = divmod(t, n)
            total += abs(r - gr) + abs(c - gc)
    return total


def linear_conflicts(state, n: int) -> int:
    """Extra moves forced by tiles blocking each other inside their goal line.

    For each row (column), the tiles already in their goal row (column) must
    keep one increasing subsequence of goal positions in place; every other
    such tile has to leave the line and come back, costing 2 moves.
    """
    extra = 0
    for r in range(n):
        goal_cols = []
        for c in range(n):
            t = state[r * n + c]
            if t and t // n == r:
                goal_cols.append(t % n)
        if len(goal_cols) > 1:
            extra += 2 * (len(goal_cols) - _lis_length(goal_cols))
    for c in range(n):
        goal_rows = []
        for r in range(n):
            t = state[r * n + c]
            if t and t % n == c:
                goal_rows.append(t // n)
        if len(goal_rows) > 1:
            extra += 2 * (len(goal_rows) - _lis_length(goal_rows))
    return extra


def tile_heuristic(state, n: int) -> int:
    return manhattan(state, n) + linear_conflicts(state, n)
