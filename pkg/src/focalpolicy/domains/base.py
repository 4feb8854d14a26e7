"""Search-graph interface shared by every domain."""

from __future__ import annotations


class Domain:
    """A labeled search graph with a single goal state.

    States are hashable Python values; ``key`` maps a state to a compact
    integer and ``decode`` inverts it. Actions are indexed ``0..action_count-1``
    and every outgoing edge of a state carries a distinct action index.
    """

    name = "domain"
    action_count = 0
    unit_cost = True

    def __init__(self, goal):
        self.goal = goal
        self.goal_key = self.key(goal)

    def key(self, state) -> int:
        raise NotImplementedError

    def decode(self, key: int):
        raise NotImplementedError

    def applicable_actions(self, state) -> list[int]:
        return [a for a, _, _ in self.successors(state)]

    def successor(self, state, action: int):
        for a, child, _ in self.successors(state):
            if a == action:
                return child
        raise ValueError(f"action {action} is not applicable in {state!r}")

    def edge_cost(self, state, action: int) -> float:
        return 1.0

    def successors(self, state) -> list[tuple[int, object, float]]:
        """Ordered ``(action, child, cost)`` triples, ascending by action."""
        raise NotImplementedError

    def predecessors(self, state) -> list[tuple[object, int]]:
        """``(parent, action)`` pairs such that ``successor(parent, action) == state``."""
        raise NotImplementedError

    def heuristic(self, state) -> float:
        raise NotImplementedError

    def is_goal(self, state) -> bool:
        return self.key(state) == self.goal_key


class UnsolvableInstance(ValueError):
    """Raised for start states outside the goal's connected component."""
