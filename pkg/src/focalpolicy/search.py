"""Weighted A*, Focal Search and A* with policy-preferred operators.

All three re-open states whenever a strictly cheaper path is found and test
for the goal when a node is extracted, not when it is generated. Queues use
lazy deletion: every heap entry carries the node's stamp at push time and is
skipped once the node has been re-pushed or removed from OPEN.

Besides the parent key (the best parent known so far) every node keeps the
immutable trail ``(parent_trail, state, action)`` it was generated along.
When an ancestor is reopened and not yet re-expanded the two can differ; the
returned path always follows the trail, so it agrees with the node's g and
policy annotation.
"""

from __future__ import annotations

import math
from bisect import bisect_right, insort
from dataclasses import dataclass, field
from heapq import heappop, heappush
from itertools import count
from time import perf_counter

from .heuristics import ROOT, FocalConfig, edge_view, extend, key_function

TOL = 1e-9

SOLVED = "solved"
EXHAUSTED = "exhausted"
TIMEOUT = "timeout"
EXPANSION_LIMIT = "expansion-limit"


class PathCorruption(RuntimeError):
    pass


@dataclass(frozen=True)
class Limits:
    max_expansions: int = 10_000_000
    max_seconds: float = 300.0


class NodeRecord:
    __slots__ = ("key", "state", "g", "h", "f", "parent", "action", "annotation",
                 "focal_key", "stamp", "in_open", "seq", "trail")

    def __init__(self, key, state, g, h, f, parent=None, action=None, annotation=ROOT):
        self.key = key
        self.state = state
        self.g = g
        self.h = h
        self.f = f
        self.parent = parent
        self.action = action
        self.annotation = annotation
        self.focal_key = 0.0
        self.stamp = 0
        self.in_open = True
        self.seq = 0
        self.trail = None

    def __repr__(self):
        return f"NodeRecord(key={self.key!r}, g={self.g}, f={self.f})"


@dataclass
class SearchResult:
    status: str
    path: list = field(default_factory=list)
    cost: float = math.inf
    expansions: int = 0
    generations: int = 0
    wall_time: float = 0.0
    bound_w: float = 1.0
    f_min_at_termination: float = math.nan
    annotation: object = None
    g_improvements: int = 0
    stale_pops: int = 0
    nodes: dict | None = None

    @property
    def solved(self) -> bool:
        return self.status == SOLVED


def reconstruct_path(node_table, terminal_key):
    """``[(state, action), ...]`` from the start (action ``None``) to the terminal."""
    out = []
    key = terminal_key
    limit = len(node_table)
    while key is not None:
        node = node_table.get(key)
        if node is None:
            raise PathCorruption(f"parent chain references unknown state key {key!r}")
        out.append((node.state, node.action))
        if len(out) > limit:
            raise PathCorruption("parent chain contains a cycle")
        key = node.parent
    out.reverse()
    if out[0][1] is not None:
        raise PathCorruption("parent chain does not end at a root node")
    return out


def trail_path(trail):
    """Expand a ``(parent_trail, state, action)`` chain into ``[(state, action), ...]``."""
    out = []
    while trail is not None:
        trail, state, action = trail
        out.append((state, action))
    out.reverse()
    if not out or out[0][1] is not None:
        raise PathCorruption("trail does not start at a root node")
    return out


class QueuePair:
    """OPEN (by f) and FOCAL (by focal key) with an f-bucketed index of the
    OPEN members that are still outside FOCAL."""

    def __init__(self, bound: float = -math.inf, tol: float = TOL):
        self.open = []
        self.focal = []
        self.buckets = {}
        self.f_values = []
        self.current_bound = bound
        self.tol = tol
        self.stale_focal = 0
        self._seq = count()

    def push(self, node):
        """Insert ``node`` into OPEN, and into FOCAL when within the bound."""
        seq = next(self._seq)
        node.seq = seq
        f = node.f
        heappush(self.open, (f, -node.g, seq, node.stamp, node))
        if f <= self.current_bound + self.tol:
            heappush(self.focal, (node.focal_key, f, -node.g, seq, node.stamp, node))
        else:
            bucket = self.buckets.get(f)
            if bucket is None:
                self.buckets[f] = bucket = []
                insort(self.f_values, f)
            bucket.append((node, node.stamp))

    def f_min(self):
        heap = self.open
        while heap:
            entry = heap[0]
            node = entry[4]
            if node.in_open and node.stamp == entry[3]:
                return entry[0]
            heappop(heap)
        return None

    def pop_focal(self):
        heap = self.focal
        while heap:
            entry = heappop(heap)
            node = entry[5]
            if node.in_open and node.stamp == entry[4]:
                node.in_open = False
                return node
            self.stale_focal += 1
        return None

    def focal_members(self):
        return {e[5].key for e in self.focal if e[5].in_open and e[5].stamp == e[4]}

    def open_members(self):
        return {e[4].key: e[4].f for e in self.open if e[4].in_open and e[4].stamp == e[3]}


def update_lower_bound(queues: QueuePair, old_bound: float, new_bound: float) -> int:
    """Move every OPEN member with ``old_bound < f <= new_bound`` into FOCAL.

    Only the f-buckets inside the interval are visited. Returns the number of
    nodes moved.
    """
    moved = 0
    if new_bound > old_bound:
        tol = queues.tol
        fv = queues.f_values
        lo = bisect_right(fv, old_bound + tol)
        hi = bisect_right(fv, new_bound + tol)
        focal = queues.focal
        for f in fv[lo:hi]:
            for node, stamp in queues.buckets.pop(f):
                if node.in_open and node.stamp == stamp:
                    heappush(focal, (node.focal_key, node.f, -node.g, node.seq, stamp, node))
                    moved += 1
        del fv[lo:hi]
    if new_bound > queues.current_bound:
        queues.current_bound = new_bound
    return moved


def _result(status, nodes, terminal, expansions, generations, t0, w, f_min, improvements, stale, keep_nodes):
    res = SearchResult(status, expansions=expansions, generations=generations,
                       wall_time=perf_counter() - t0, bound_w=w,
                       f_min_at_termination=math.nan if f_min is None else f_min,
                       g_improvements=improvements, stale_pops=stale)
    if terminal is not None:
        res.path = trail_path(terminal.trail)
        res.cost = terminal.g
        res.annotation = terminal.annotation
    if keep_nodes:
        res.nodes = nodes
    return res


def focal_search(domain, start, w: float, config: FocalConfig, policy, limits: Limits = Limits(),
                 trace=None, keep_nodes: bool = False) -> SearchResult:
    """Focal Search with a policy-derived FOCAL ordering.

    ``trace(node, f_min)`` is called at every extraction with the OPEN
    minimum measured just before the node left OPEN.
    """
    if w < 1:
        raise ValueError("suboptimality bound w must be >= 1")
    t0 = perf_counter()
    deadline = t0 + limits.max_seconds
    max_exp = limits.max_expansions
    key = domain.key
    heuristic = domain.heuristic
    successors = domain.successors
    goal_key = domain.goal_key
    keyfn = key_function(config)
    floor = config.prob_floor
    scores = policy.scores

    h0 = heuristic(start)
    root = NodeRecord(key(start), start, 0.0, h0, h0)
    root.trail = (None, start, None)
    root.focal_key = keyfn(ROOT, h0)
    nodes = {root.key: root}
    q = QueuePair(w * h0)
    q.push(root)
    expansions = generations = improvements = 0
    status, terminal = EXHAUSTED, None

    while True:
        f_min = q.f_min()
        if f_min is None:
            break
        node = q.pop_focal()
        if node is None:
            break
        if trace is not None:
            trace(node, f_min)
        expansions += 1
        if node.key == goal_key:
            status, terminal = SOLVED, node
            break
        if expansions >= max_exp:
            status = EXPANSION_LIMIT
            break
        if not expansions & 255 and perf_counter() > deadline:
            status = TIMEOUT
            break
        view = edge_view(scores(node.state))
        g = node.g
        ann = node.annotation
        nkey = node.key
        for a, child, c in successors(node.state):
            generations += 1
            g2 = g + c
            ck = key(child)
            rec = nodes.get(ck)
            if rec is None:
                h = heuristic(child)
                if h == math.inf:
                    continue
                rec = NodeRecord(ck, child, g2, h, g2 + h, nkey, a)
                nodes[ck] = rec
            elif g2 < rec.g:
                improvements += 1
                rec.g = g2
                rec.f = g2 + rec.h
                rec.parent = nkey
                rec.action = a
                rec.stamp += 1
                rec.in_open = True
            else:
                continue
            rec.trail = (node.trail, child, a)
            rec.annotation = cann = extend(ann, view, a, floor)
            rec.focal_key = keyfn(cann, rec.f)
            q.push(rec)
        top = q.f_min()
        if top is not None and w * top > q.current_bound:
            update_lower_bound(q, q.current_bound, w * top)

    return _result(status, nodes, terminal, expansions, generations, t0, w, q.f_min(),
                   improvements, q.stale_focal, keep_nodes)


def weighted_astar(domain, start, w: float, limits: Limits = Limits(), keep_nodes: bool = False) -> SearchResult:
    """Best-first search on g + w*h; ties prefer larger g, then insertion order."""
    if w < 1:
        raise ValueError("suboptimality bound w must be >= 1")
    t0 = perf_counter()
    deadline = t0 + limits.max_seconds
    max_exp = limits.max_expansions
    key = domain.key
    heuristic = domain.heuristic
    successors = domain.successors
    goal_key = domain.goal_key

    h0 = heuristic(start)
    root = NodeRecord(key(start), start, 0.0, h0, w * h0)
    root.trail = (None, start, None)
    nodes = {root.key: root}
    seq = count()
    heap = [(root.f, 0.0, next(seq), 0, root)]
    expansions = generations = improvements = stale = 0
    status, terminal = EXHAUSTED, None

    while heap:
        f, _, _, stamp, node = heappop(heap)
        if not node.in_open or node.stamp != stamp:
            stale += 1
            continue
        node.in_open = False
        expansions += 1
        if node.key == goal_key:
            status, terminal = SOLVED, node
            break
        if expansions >= max_exp:
            status = EXPANSION_LIMIT
            break
        if not expansions & 255 and perf_counter() > deadline:
            status = TIMEOUT
            break
        g = node.g
        nkey = node.key
        for a, child, c in successors(node.state):
            generations += 1
            g2 = g + c
            ck = key(child)
            rec = nodes.get(ck)
            if rec is None:
                h = heuristic(child)
                if h == math.inf:
                    continue
                rec = NodeRecord(ck, child, g2, h, g2 + w * h, nkey, a)
                nodes[ck] = rec
            elif g2 < rec.g:
                improvements += 1
                rec.g = g2
                rec.f = g2 + w * rec.h
                rec.parent = nkey
                rec.action = a
                rec.stamp += 1
                rec.in_open = True
            else:
                continue
            rec.trail = (node.trail, child, a)
            heappush(heap, (rec.f, -g2, next(seq), rec.stamp, rec))

    f_top = None
    while heap:
        f_top, _, _, stamp, node = heap[0]
        if node.in_open and node.stamp == stamp:
            break
        heappop(heap)
        f_top = None
    return _result(status, nodes, terminal, expansions, generations, t0, w, f_top,
                   improvements, stale, keep_nodes)


def preferred_astar(domain, start, policy, limits: Limits = Limits(), keep_nodes: bool = False) -> SearchResult:
    """A* with two open lists, both on g + h.

    The child reached by the policy's argmax action goes to the preferred
    list, every other child to the regular list; extraction always drains the
    preferred list first. No suboptimality bound holds, so ``bound_w`` is inf.
    """
    t0 = perf_counter()
    deadline = t0 + limits.max_seconds
    max_exp = limits.max_expansions
    key = domain.key
    heuristic = domain.heuristic
    successors = domain.successors
    goal_key = domain.goal_key
    argmax_table = policy.argmax() if hasattr(policy, "argmax") else None

    h0 = heuristic(start)
    root = NodeRecord(key(start), start, 0.0, h0, h0)
    root.trail = (None, start, None)
    nodes = {root.key: root}
    seq = count()
    preferred = [(root.f, 0.0, next(seq), 0, root)]
    regular = []
    expansions = generations = improvements = stale = 0
    status, terminal = EXHAUSTED, None

    while True:
        node = None
        for heap in (preferred, regular):
            while heap:
                _, _, _, stamp, cand = heappop(heap)
                if cand.in_open and cand.stamp == stamp:
                    node = cand
                    break
                stale += 1
            if node is not None:
                break
        if node is None:
            break
        node.in_open = False
        expansions += 1
        if node.key == goal_key:
            status, terminal = SOLVED, node
            break
        if expansions >= max_exp:
            status = EXPANSION_LIMIT
            break
        if not expansions & 255 and perf_counter() > deadline:
            status = TIMEOUT
            break
        if argmax_table is not None:
            pref_action = int(argmax_table[node.state])
        else:
            pref_action = edge_view(policy.scores(node.state)).preferred
        g = node.g
        nkey = node.key
        for a, child, c in successors(node.state):
            generations += 1
            g2 = g + c
            ck = key(child)
            rec = nodes.get(ck)
            if rec is None:
                h = heuristic(child)
                if h == math.inf:
                    continue
                rec = NodeRecord(ck, child, g2, h, g2 + h, nkey, a)
                nodes[ck] = rec
            elif g2 < rec.g:
                improvements += 1
                rec.g = g2
                rec.f = g2 + rec.h
                rec.parent = nkey
                rec.action = a
                rec.stamp += 1
                rec.in_open = True
            else:
                continue
            rec.trail = (node.trail, child, a)
            heappush(preferred if a == pref_action else regular, (rec.f, -g2, next(seq), rec.stamp, rec))

    f_top = min((e[0] for h in (preferred, regular) for e in h if e[4].in_open and e[4].stamp == e[3]), default=None)
    return _result(status, nodes, terminal, expansions, generations, t0, math.inf, f_top,
                   improvements, stale, keep_nodes)
