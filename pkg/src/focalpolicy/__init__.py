"""Bounded-suboptimal search guided by stochastic policies."""

from .domains import (BlocksDomain, IndexedDomain, PancakeDomain, TileDomain, load_space, make_domain,
                      parse_instance)
from .heuristics import KINDS, FocalAnnotation, FocalConfig, annotate_child, disc1_coefficient, focal_key, p_prefix
from .mlp import MlpModel, MlpPolicy, load_model
from .oracle import CostTable, exhaustive_reverse_dijkstra
from .policy import (OptTable, SyntheticPolicyTable, build_opt_table, deterministic_action, measure_accuracy,
                     synthesize_policy, unroll)
from .search import Limits, SearchResult, focal_search, preferred_astar, update_lower_bound, weighted_astar

__all__ = [
    "BlocksDomain", "CostTable", "FocalAnnotation", "FocalConfig", "IndexedDomain", "KINDS", "Limits",
    "MlpModel", "MlpPolicy", "OptTable", "PancakeDomain", "SearchResult", "SyntheticPolicyTable",
    "TileDomain", "annotate_child", "build_opt_table", "deterministic_action", "disc1_coefficient",
    "exhaustive_reverse_dijkstra", "focal_key", "focal_search", "load_model", "load_space", "make_domain",
    "measure_accuracy", "p_prefix", "parse_instance", "preferred_astar", "synthesize_policy", "unroll",
    "update_lower_bound", "weighted_astar",
]
