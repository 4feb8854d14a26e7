"""4-operator blocks world (pick-up, put-down, stack, unstack) with h_max.

A state is a tuple ``on`` where ``on[b]`` is the index of the block under
``b``, ``TABLE`` (= B) when ``b`` sits on the table, or ``HAND`` (= B + 1)
when the arm holds it.

Grounded action indices, for B blocks:

* ``pick-up(x)``       -> ``x``
* ``put-down(x)``      -> ``B + x``
* ``stack(x, y)``      -> ``2B + pair(x, y)``
* ``unstack(x, y)``    -> ``2B + B(B-1) + pair(x, y)``

where ``pair`` enumerates ordered pairs ``x != y`` lexicographically.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .base import Domain


def _pair(x: int, y: int, b: int) -> int:
    return x * (b - 1) + (y if y < x else y - 1)


class GroundedStrips:
    """Propositional STRIPS model of a B-block instance."""

    def __init__(self, nblocks: int):
        b = nblocks
        self.nblocks = b
        names = [f"b{i + 1}" for i in range(b)]
        props = []
        for x in range(b):
            for y in range(b):
                if x != y:
                    props.append(("on", x, y))
        props += [("ontable", x) for x in range(b)]
        props += [("clear", x) for x in range(b)]
        props += [("holding", x) for x in range(b)]
        props.append(("handempty",))
        self.props = props
        self.prop_index = {p: i for i, p in enumerate(props)}
        P = self.prop_index

        actions = [None] * (2 * b * b)
        for x in range(b):
            actions[x] = (
                f"pick-up {names[x]}",
                (P["clear", x], P["ontable", x], P["handempty",]),
                (P["holding", x],),
                (P["clear", x], P["ontable", x], P["handempty",]),
            )
            actions[b + x] = (
                f"put-down {names[x]}",
                (P["holding", x],),
                (P["clear", x], P["ontable", x], P["handempty",]),
                (P["holding", x],),
            )
        for x in range(b):
            for y in range(b):
                if x == y:
                    continue
                k = _pair(x, y, b)
                actions[2 * b + k] = (
                    f"stack {names[x]} {names[y]}",
                    (P["holding", x], P["clear", y]),
                    (P["on", x, y], P["clear", x], P["handempty",]),
                    (P["holding", x], P["clear", y]),
                )
                actions[2 * b + b * (b - 1) + k] = (
                    f"unstack {names[x]} {names[y]}",
                    (P["on", x, y], P["clear", x], P["handempty",]),
                    (P["holding", x], P["clear", y]),
                    (P["on", x, y], P["clear", x], P["handempty",]),
                )
        self.action_names = [a[0] for a in actions]
        self.pre = [a[1] for a in actions]
        self.add = [a[2] for a in actions]
        self.delete = [a[3] for a in actions]
        self.action_cost = [1.0] * len(actions)
        self.by_pre = [[] for _ in props]
        for ai, pre in enumerate(self.pre):
            for p in pre:
                self.by_pre[p].append(ai)

    def state_props(self, state) -> set[int]:
        b = self.nblocks
        P = self.prop_index
        true = set()
        covered = set()
        held = False
        for x, below in enumerate(state):
            if below == b:
                true.add(P["ontable", x])
            elif below == b + 1:
                true.add(P["holding", x])
                held = True
            else:
                true.add(P["on", x, below])
                covered.add(below)
        for x in range(b):
            if x not in covered and state[x] != b + 1:
                true.add(P["clear", x])
        if not held:
            true.add(P["handempty",])
        return true

    def applicable(self, props: set[int]) -> list[int]:
        return [a for a, pre in enumerate(self.pre) if all(p in props for p in pre)]

    def apply(self, props: set[int], action: int) -> set[int]:
        return (props - set(self.delete[action])) | set(self.add[action])


def hmax_heuristic(grounded: GroundedStrips, state, goal_propositions) -> float:
    """Delete-relaxation h_max by Dijkstra-style propagation over propositions.

    Returns ``math.inf`` when some goal proposition is relaxed-unreachable.
    """
    nprops = len(grounded.props)
    cost = [math.inf] * nprops
    heap = []
    for p in grounded.state_props(state):
        cost[p] = 0.0
        heap.append((0.0, p))
    heapq.heapify(heap)
    missing = [len(pre) for pre in grounded.pre]
    remaining = set(goal_propositions)
    done = [False] * nprops
    best = 0.0
    while heap and remaining:
        c, p = heapq.heappop(heap)
        if done[p]:
            continue
        done[p] = True
        if p in remaining:
            remaining.discard(p)
            best = c
        for a in grounded.by_pre[p]:
            missing[a] -= 1
            if missing[a] == 0:
                # Propositions pop in cost order, so c is the max precondition cost.
                nc = c + grounded.action_cost[a]
                for q in grounded.add[a]:
                    if nc < cost[q]:
                        cost[q] = nc
                        heapq.heappush(heap, (nc, q))
    if remaining:
        return math.inf
    return best


def hmax_batch(grounded: GroundedStrips, prop_matrix: np.ndarray, goal_propositions, chunk: int = 65536) -> np.ndarray:
    """Unit-cost h_max for many states at once by relaxed layer expansion.

    ``prop_matrix`` is an (n, |props|) 0/1 array of true propositions.
    """
    nact = len(grounded.pre)
    nprops = len(grounded.props)
    pre = np.zeros((nprops, nact), dtype=np.float32)
    add = np.zeros((nact, nprops), dtype=np.float32)
    for a in range(nact):
        pre[list(grounded.pre[a]), a] = 1.0
        add[a, list(grounded.add[a])] = 1.0
    need = pre.sum(axis=0)
    goal = np.asarray(sorted(goal_propositions), dtype=np.int64)
    out = np.full(prop_matrix.shape[0], np.inf)
    for lo in range(0, prop_matrix.shape[0], chunk):
        reached = prop_matrix[lo:lo + chunk].astype(bool)
        h = np.full(reached.shape[0], np.inf)
        h[reached[:, goal].all(axis=1)] = 0.0
        layer = 0
        while True:
            layer += 1
            sat = (reached.astype(np.float32) @ pre) >= need
            new = reached | ((sat.astype(np.float32) @ add) > 0)
            hit = np.isinf(h) & new[:, goal].all(axis=1)
            h[hit] = layer
            if (new == reached).all():
                break
            reached = new
        out[lo:lo + chunk] = h
    return out


class BlocksDomain(Domain):
    """B-block world whose goal is the single tower b1 on b2 on ... on bB."""

    def __init__(self, nblocks: int = 8):
        if nblocks < 2 or nblocks > 14:
            raise ValueError("blocks world is supported for 2 <= B <= 14")
        self.nblocks = b = nblocks
        self.TABLE = b
        self.HAND = b + 1
        self.name = f"blocks{b}"
        self.action_count = 2 * b * b
        self.grounded = GroundedStrips(b)
        P = self.grounded.prop_index
        self.goal_propositions = tuple(P["on", x, x + 1] for x in range(b - 1))
        self._pair_count = b * (b - 1)
        super().__init__(tuple(list(range(1, b)) + [b]))

    def key(self, state) -> int:
        k = 0
        for i, v in enumerate(state):
            k |= v << (4 * i)
        return k

    def decode(self, key: int):
        return tuple((key >> (4 * i)) & 15 for i in range(self.nblocks))

    def successors(self, state):
        b = self.nblocks
        table, hand = b, b + 1
        covered = [False] * b
        held = -1
        for x, below in enumerate(state):
            if below == hand:
                held = x
            elif below < b:
                covered[below] = True
        out = []
        base_stack = 2 * b
        base_unstack = 2 * b + self._pair_count
        if held < 0:
            for x in range(b):
                if covered[x]:
                    continue
                below = state[x]
                child = list(state)
                child[x] = hand
                if below == table:
                    out.append((x, tuple(child), 1.0))
                else:
                    out.append((base_unstack + _pair(x, below, b), tuple(child), 1.0))
        else:
            child = list(state)
            child[held] = table
            out.append((b + held, tuple(child), 1.0))
            for y in range(b):
                if y != held and not covered[y]:
                    child = list(state)
                    child[held] = y
                    out.append((base_stack + _pair(held, y, b), tuple(child), 1.0))
        out.sort(key=lambda t: t[0])
        return out

    def inverse_action(self, action: int) -> int:
        b = self.nblocks
        if action < b:
            return action + b
        if action < 2 * b:
            return action - b
        if action < 2 * b + self._pair_count:
            return action + self._pair_count
        return action - self._pair_count

    def predecessors(self, state):
        return [(child, self.inverse_action(a)) for a, child, _ in self.successors(state)]

    def heuristic(self, state) -> float:
        return hmax_heuristic(self.grounded, state, self.goal_propositions)

    def clear(self, state) -> set[int]:
        covered = {v for v in state if v < self.nblocks}
        return {x for x in range(self.nblocks) if x not in covered and state[x] != self.HAND}

    def holding(self, state):
        for x, v in enumerate(state):
            if v == self.HAND:
                return x
        return None

    def validate(self, state):
        b = self.nblocks
        state = tuple(state)
        if len(state) != b or any(v < 0 or v > b + 1 or v == i for i, v in enumerate(state)):
            raise ValueError(f"malformed blocks state {state!r}")
        if sum(1 for v in state if v == b + 1) > 1:
            raise ValueError("the arm holds at most one block")
        below = [v for v in state if v < b]
        if len(below) != len(set(below)):
            raise ValueError("two blocks sit on the same block")
        for x in range(b):
            seen = set()
            y = x
            while y < b:
                if y in seen:
                    raise ValueError("cyclic on-relation")
                seen.add(y)
                y = state[y]
            if y == b + 1 and state[x] != b + 1:
                raise ValueError("a block rests on the held block")
        return state

    def prop_matrix(self, states) -> np.ndarray:
        m = np.zeros((len(states), len(self.grounded.props)), dtype=np.uint8)
        for i, s in enumerate(states):
            m[i, list(self.grounded.state_props(s))] = 1
        return m

    def heuristic_batch(self, states) -> np.ndarray:
        return hmax_batch(self.grounded, self.prop_matrix(states), self.goal_propositions)
