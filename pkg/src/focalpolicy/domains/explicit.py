"""Fully enumerated state spaces stored as compressed adjacency arrays.

Small domains are solved in bulk, so it pays to enumerate them once: states
become dense indices (position in the sorted key array), successors come from
CSR arrays and heuristic values from a precomputed table.
"""

from __future__ import annotations

import numpy as np

from .base import Domain


class IndexedDomain(Domain):
    """Index-addressed view of ``base`` restricted to the states in ``keys``.

    A state of this domain is an ``int`` in ``range(len(keys))``.
    """

    def __init__(self, base, keys, indptr, actions, targets, h, edge_costs=None):
        self.base = base
        self.name = base.name
        self.action_count = base.action_count
        self.unit_cost = edge_costs is None
        self.keys = np.asarray(keys, dtype=np.int64)
        self.indptr_arr = np.asarray(indptr, dtype=np.int64)
        self.actions = np.asarray(actions, dtype=np.int16)
        self.targets = np.asarray(targets, dtype=np.int32)
        self.edge_costs = None if edge_costs is None else np.asarray(edge_costs, dtype=np.float64)
        self.h = np.asarray(h, dtype=np.float64)
        self._indptr = self.indptr_arr.tolist()
        self._h = [int(x) if float(x).is_integer() else float(x) for x in self.h.tolist()]
        self._rev = None
        self.goal = self.index_of_key(base.goal_key)
        self.goal_key = self.goal

    @classmethod
    def build(cls, base, keys, heuristic_values=None) -> "IndexedDomain":
        keys = np.asarray(keys, dtype=np.int64)
        indptr = np.zeros(len(keys) + 1, dtype=np.int64)
        actions = []
        child_keys = []
        costs = []
        unit = base.unit_cost
        key = base.key
        decode = base.decode
        states = [] if heuristic_values is None else None
        for i, k in enumerate(keys.tolist()):
            s = decode(k)
            if states is not None:
                states.append(s)
            succ = base.successors(s)
            for a, child, c in succ:
                actions.append(a)
                child_keys.append(key(child))
                if not unit:
                    costs.append(c)
            indptr[i + 1] = indptr[i] + len(succ)
        child_keys = np.asarray(child_keys, dtype=np.int64)
        targets = np.searchsorted(keys, child_keys)
        targets = np.minimum(targets, len(keys) - 1)
        if not np.array_equal(keys[targets], child_keys):
            raise ValueError("key set is not closed under successors")
        if heuristic_values is None:
            batch = getattr(base, "heuristic_batch", None)
            heuristic_values = batch(states) if batch else [base.heuristic(s) for s in states]
        return cls(base, keys, indptr, actions, targets, heuristic_values, None if unit else costs)

    def __len__(self):
        return len(self.keys)

    def key(self, state) -> int:
        return state

    def decode(self, key: int):
        return key

    def index_of_key(self, base_key: int) -> int:
        i = int(np.searchsorted(self.keys, base_key))
        if i == len(self.keys) or self.keys[i] != base_key:
            raise KeyError(f"state key {base_key} is outside the enumerated space")
        return i

    def index_of(self, base_state) -> int:
        return self.index_of_key(self.base.key(base_state))

    def base_state(self, index: int):
        return self.base.decode(int(self.keys[index]))

    def successors(self, state):
        lo = self._indptr[state]
        hi = self._indptr[state + 1]
        acts = self.actions[lo:hi].tolist()
        tgts = self.targets[lo:hi].tolist()
        if self.edge_costs is None:
            return [(a, t, 1.0) for a, t in zip(acts, tgts)]
        return list(zip(acts, tgts, self.edge_costs[lo:hi].tolist()))

    def edge_cost(self, state, action):
        if self.edge_costs is None:
            return 1.0
        for a, _, c in self.successors(state):
            if a == action:
                return c
        raise ValueError(f"action {action} is not applicable in state {state}")

    def predecessors(self, state):
        if self._rev is None:
            sources = np.repeat(np.arange(len(self.keys), dtype=np.int32), np.diff(self.indptr_arr))
            order = np.argsort(self.targets, kind="stable")
            rev_ptr = np.zeros(len(self.keys) + 1, dtype=np.int64)
            np.cumsum(np.bincount(self.targets, minlength=len(self.keys)), out=rev_ptr[1:])
            self._rev = (rev_ptr.tolist(), sources[order], self.actions[order])
        ptr, src, act = self._rev
        lo, hi = ptr[state], ptr[state + 1]
        return list(zip(src[lo:hi].tolist(), act[lo:hi].tolist()))

    def heuristic(self, state):
        return self._h[state]

    def edge_arrays(self):
        """``(sources, actions, targets, costs)`` for every edge."""
        sources = np.repeat(np.arange(len(self.keys), dtype=np.int64), np.diff(self.indptr_arr))
        costs = np.ones(len(self.targets)) if self.edge_costs is None else self.edge_costs
        return sources, self.actions.astype(np.int64), self.targets.astype(np.int64), costs

    def save(self, path):
        np.savez(
            path,
            keys=self.keys,
            indptr=self.indptr_arr,
            actions=self.actions,
            targets=self.targets,
            h=self.h,
            edge_costs=np.zeros(0) if self.edge_costs is None else self.edge_costs,
            unit=np.array(self.edge_costs is None),
        )

    @classmethod
    def load(cls, base, path) -> "IndexedDomain":
        with np.load(path) as z:
            costs = None if bool(z["unit"]) else z["edge_costs"]
            return cls(base, z["keys"], z["indptr"], z["actions"], z["targets"], z["h"], costs)
