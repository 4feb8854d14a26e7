"""Stochastic policies: synthetic tables of controlled accuracy, argmax, unrolling."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"SPT1"
_CHUNK = 65536


class PolicyCorruption(ValueError):
    """A policy or optimal-action table violates its structural contract."""


def deterministic_action(policy, state) -> int:
    """Argmax action; ties go to the lowest index."""
    return int(np.argmax(np.asarray(policy.scores(state))))


@dataclass
class OptTable:
    """Optimal first actions for every state of an enumerated space.

    ``opt_mask[s, a]`` is true when ``a`` starts an optimal path from ``s``;
    ``opt_choice[s]`` is one representative of that set (-1 for the goal).
    """

    opt_mask: np.ndarray
    opt_choice: np.ndarray

    def __len__(self):
        return len(self.opt_choice)

    def opt_set(self, state) -> set[int]:
        return set(np.flatnonzero(self.opt_mask[state]).tolist())

    @property
    def scored(self) -> np.ndarray:
        """Indices of states with at least one optimal action."""
        return np.flatnonzero(self.opt_choice >= 0)


def build_opt_table(domain, cost_table, seed: int = 0, tol: float = 1e-9) -> OptTable:
    """One-step Bellman test over every edge of an enumerated domain."""
    hstar = cost_table.costs if hasattr(cost_table, "costs") else np.asarray(cost_table)
    src, act, tgt, cost = domain.edge_arrays()
    n = len(hstar)
    opt_edge = np.abs(hstar[src] - (cost + hstar[tgt])) <= tol
    mask = np.zeros((n, domain.action_count), dtype=bool)
    mask[src[opt_edge], act[opt_edge]] = True
    has_opt = mask.any(axis=1)
    bad = np.flatnonzero(~has_opt & (hstar > 0))
    if len(bad):
        raise PolicyCorruption(f"{len(bad)} non-goal states have no Bellman-consistent action (first: {bad[0]})")
    rng = np.random.default_rng(seed)
    osrc, oact = src[opt_edge], act[opt_edge]
    order = np.lexsort((rng.random(len(osrc)), osrc))
    osrc, oact = osrc[order], oact[order]
    first = np.ones(len(osrc), dtype=bool)
    first[1:] = osrc[1:] != osrc[:-1]
    choice = np.full(n, -1, dtype=np.int16)
    choice[osrc[first]] = oact[first]
    # The goal needs no action and stays out of accuracy statistics.
    goal = hstar == 0
    choice[goal] = -1
    mask[goal] = False
    return OptTable(mask, choice)


@dataclass
class SyntheticPolicyTable:
    """Dense per-state score vectors; states are dense indices of an enumerated space."""

    rows: np.ndarray
    domain: str = ""
    target_acc: float = float("nan")
    measured_acc: float = float("nan")
    seed: int = 0
    _argmax: np.ndarray | None = field(default=None, repr=False)

    @property
    def action_count(self) -> int:
        return self.rows.shape[1]

    @property
    def alpha(self) -> int:
        return self.action_count - 1

    def scores(self, state) -> np.ndarray:
        return self.rows[state]

    def argmax(self) -> np.ndarray:
        if self._argmax is None:
            self._argmax = np.argmax(self.rows, axis=1)
        return self._argmax

    def save(self, path):
        did = self.domain.encode()
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<H", len(did)))
            fh.write(did)
            fh.write(struct.pack("<IQqdd", self.action_count, len(self.rows), self.seed,
                                 self.target_acc, self.measured_acc))
            fh.write(np.ascontiguousarray(self.rows, dtype="<f4").tobytes())

    @classmethod
    def load(cls, path) -> "SyntheticPolicyTable":
        with open(path, "rb") as fh:
            data = fh.read()
        if data[:4] != MAGIC:
            raise PolicyCorruption(f"{path}: bad magic {data[:4]!r}")
        (dlen,) = struct.unpack_from("<H", data, 4)
        off = 6 + dlen
        domain = data[6:off].decode()
        nact, nstates, seed, target, measured = struct.unpack_from("<IQqdd", data, off)
        off += struct.calcsize("<IQqdd")
        expected = nact * nstates * 4
        if len(data) - off != expected:
            raise PolicyCorruption(f"{path}: expected {expected} bytes of rows at offset {off}, found {len(data) - off}")
        rows = np.frombuffer(data, dtype="<f4", offset=off).reshape(nstates, nact).astype(np.float32)
        check_rows(rows)
        return cls(rows, domain, target, measured, seed)


def check_rows(rows: np.ndarray, tol: float = 1e-6):
    if (rows < 0).any():
        raise PolicyCorruption("negative policy score")
    sums = rows.sum(axis=1, dtype=np.float64)
    worst = np.abs(sums - 1.0).max(initial=0.0)
    if worst > tol:
        raise PolicyCorruption(f"policy row sums deviate from 1 by {worst:.3g}")


def synthesize_policy(opt_table: OptTable, domain, target_acc: float, seed: int = 0) -> SyntheticPolicyTable:
    """Synthetic stochastic policy whose argmax is optimal with probability ``target_acc``.

    Per state: softmax of fresh standard-normal draws sorted descending gives
    scores y_1 >= ... >= y_|A|. The representative optimal action receives y_1
    with probability ``target_acc``, otherwise y_j (j >= 2) with probability
    proportional to y_j. In that error case y_1 goes to a random non-optimal
    action; every other score lands on a random remaining action.
    """
    nact = domain.action_count
    if nact < 2:
        raise ValueError("synthetic policies need at least two actions")
    if not 0.0 <= target_acc <= 1.0:
        raise ValueError(f"target accuracy {target_acc} outside [0, 1]")
    n = len(opt_table)
    rng = np.random.default_rng(seed)
    # States where every action is optimal cannot err; shift their share of the
    # error mass onto the rest so the full-space expectation equals target_acc.
    scored = opt_table.opt_choice >= 0
    forced = scored & opt_table.opt_mask.all(axis=1)
    n_scored, n_forced = int(scored.sum()), int(forced.sum())
    p_top = target_acc
    if n_forced and n_scored > n_forced:
        p_top = max(0.0, (target_acc * n_scored - n_forced) / (n_scored - n_forced))
    rows = np.empty((n, nact), dtype=np.float32)
    others = np.arange(nact - 1)
    for lo in range(0, n, _CHUNK):
        hi = min(n, lo + _CHUNK)
        m = hi - lo
        z = rng.standard_normal((m, nact))
        z -= z.max(axis=1, keepdims=True)
        y = np.exp(z)
        y /= y.sum(axis=1, keepdims=True)
        y = -np.sort(-y, axis=1)
        u = rng.random(m)
        v = rng.random(m)
        keys = rng.random((m, nact))
        goal_pick = rng.integers(0, nact, size=m)

        choice = opt_table.opt_choice[lo:hi].astype(np.int64)
        mask = opt_table.opt_mask[lo:hi]
        is_goal = choice < 0
        aopt = np.where(is_goal, goal_pick, choice)
        err = (u >= p_top) & ~is_goal
        tail = np.cumsum(y[:, 1:], axis=1)
        tail /= tail[:, -1:]
        j_err = 1 + np.minimum((tail < v[:, None]).sum(axis=1), nact - 2)
        j = np.where(err, j_err, 0)

        rix = np.arange(m)
        # In the error branch the top score must go to an action outside opt(s).
        nonopt_keys = np.where(mask, np.inf, keys)
        nonopt_keys[rix, aopt] = np.inf
        top = np.argmin(nonopt_keys, axis=1)
        can_err = np.isfinite(nonopt_keys[rix, top])
        keys[rix, aopt] = 2.0
        flag = err & can_err
        keys[rix[flag], top[flag]] = -1.0
        order = np.argsort(keys, axis=1)[:, : nact - 1]
        ranks = others[None, :] + (others[None, :] >= j[:, None])
        row = np.empty((m, nact))
        np.put_along_axis(row, order, np.take_along_axis(y, ranks, axis=1), axis=1)
        row[rix, aopt] = y[rix, j]
        rows[lo:hi] = row
    table = SyntheticPolicyTable(rows, getattr(domain, "name", ""), float(target_acc), float("nan"), int(seed))
    table.measured_acc = measure_accuracy(table, opt_table)
    return table


def measure_accuracy(policy, opt_table: OptTable, sample=None) -> float:
    """Fraction of sampled states whose argmax action is in opt(s)."""
    states = opt_table.scored if sample is None else np.asarray(sample, dtype=np.int64)
    if len(states) == 0:
        raise ValueError("accuracy needs a non-empty sample of scored states")
    if isinstance(policy, SyntheticPolicyTable):
        chosen = policy.argmax()[states]
    else:
        chosen = np.array([deterministic_action(policy, int(s)) for s in states])
    hits = opt_table.opt_mask[states, chosen]
    return float(hits.sum()) / len(states)


@dataclass
class UnrollResult:
    status: str  # "goal", "steps", or "inapplicable"
    path: list
    steps: int
    failure: tuple | None = None

    @property
    def reached_goal(self) -> bool:
        return self.status == "goal"


def unroll(policy, domain, start, k: int, mode: str = "greedy", seed: int = 0) -> UnrollResult:
    """Follow the policy for up to ``k`` steps from ``start``.

    ``greedy`` takes the argmax action, ``sample`` draws from the scores.
    Stops early at the goal; fails on an inapplicable action.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if mode not in ("greedy", "sample"):
        raise ValueError(f"unknown unroll mode {mode!r}")
    rng = np.random.default_rng(seed)
    state = start
    path = [(state, None)]
    for step in range(k):
        if domain.is_goal(state):
            return UnrollResult("goal", path, step)
        scores = np.asarray(policy.scores(state), dtype=np.float64)
        if mode == "greedy":
            action = int(np.argmax(scores))
        else:
            cdf = np.cumsum(scores)
            action = int(min(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"), len(scores) - 1))
        nxt = None
        for a, child, _ in domain.successors(state):
            if a == action:
                nxt = child
                break
        if nxt is None:
            return UnrollResult("inapplicable", path, step, (state, action))
        state = nxt
        path.append((state, action))
    return UnrollResult("goal" if domain.is_goal(state) else "steps", path, k)
