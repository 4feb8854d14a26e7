"""Exact cost-to-go tables from exhaustive backward search."""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np


class OracleMemoryError(MemoryError):
    def __init__(self, reached: int, budget: int):
        super().__init__(f"reverse search exceeded its budget of {budget} states ({reached} states reached)")
        self.reached = reached
        self.budget = budget


@dataclass
class CostTable:
    """Optimal cost-to-go ``h*`` for every state that can reach the goal.

    ``keys`` is sorted ascending; ``costs[i]`` belongs to ``keys[i]``.
    """

    domain: str
    keys: np.ndarray
    costs: np.ndarray

    def __len__(self):
        return len(self.keys)

    def index_of(self, key: int) -> int:
        i = int(np.searchsorted(self.keys, key))
        if i == len(self.keys) or self.keys[i] != key:
            raise KeyError(key)
        return i

    def __contains__(self, key: int) -> bool:
        i = int(np.searchsorted(self.keys, key))
        return i < len(self.keys) and self.keys[i] == key

    def cost_of(self, key: int) -> float:
        return float(self.costs[self.index_of(key)])

    def save(self, path):
        np.savez(path, domain=np.array(self.domain), keys=self.keys, costs=self.costs)

    @classmethod
    def load(cls, path):
        with np.load(path) as z:
            return cls(str(z["domain"]), z["keys"], z["costs"])


def exhaustive_reverse_dijkstra(domain, max_states: int | None = None) -> CostTable:
    """Dijkstra from the goal over reversed edges.

    Unit-cost domains use a plain breadth-first sweep, which settles states in
    the same order. States that cannot reach the goal are absent from the table.
    """
    goal = domain.goal
    dist = {domain.key(goal): 0.0}
    key = domain.key
    if domain.unit_cost:
        frontier = deque([(goal, 0.0)])
        while frontier:
            state, d = frontier.popleft()
            nd = d + 1.0
            for pred, _ in domain.predecessors(state):
                k = key(pred)
                if k not in dist:
                    dist[k] = nd
                    frontier.append((pred, nd))
            if max_states is not None and len(dist) > max_states:
                raise OracleMemoryError(len(dist), max_states)
    else:
        settled = set()
        heap = [(0.0, 0, goal)]
        tie = 1
        while heap:
            d, _, state = heapq.heappop(heap)
            k = key(state)
            if k in settled or d > dist[k]:
                continue
            settled.add(k)
            for pred, action in domain.predecessors(state):
                pk = key(pred)
                nd = d + domain.edge_cost(pred, action)
                if nd < dist.get(pk, np.inf):
                    dist[pk] = nd
                    heapq.heappush(heap, (nd, tie, pred))
                    tie += 1
            if max_states is not None and len(dist) > max_states:
                raise OracleMemoryError(len(dist), max_states)
    keys = np.fromiter(dist.keys(), dtype=np.int64, count=len(dist))
    costs = np.fromiter(dist.values(), dtype=np.float64, count=len(dist))
    order = np.argsort(keys, kind="stable")
    return CostTable(getattr(domain, "name", "domain"), keys[order], costs[order])
