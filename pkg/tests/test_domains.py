import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from focalpolicy.domains import (BlocksDomain, ChainDomain, PancakeDomain, ParseError, TileDomain,
                                 UnsolvableInstance, format_instance, gap_heuristic, hmax_batch, hmax_heuristic,
                                 linear_conflicts, load_space, make_domain, manhattan, parse_instance,
                                 is_solvable, korf100, tile_heuristic)
from focalpolicy.domains.tiles import UP, DOWN, LEFT, RIGHT
from focalpolicy.oracle import exhaustive_reverse_dijkstra

T8 = TileDomain(3)
P9 = PancakeDomain(9)
B8 = BlocksDomain(8)


def random_walk(domain, steps, rng):
    s = domain.goal
    for _ in range(steps):
        s = rng.choice(domain.successors(s))[1]
    return s


# ---- tiles

def test_tile_goal_has_two_successors_with_blank_in_corner():
    succ = T8.successors(T8.goal)
    assert [a for a, _, _ in succ] == [DOWN, RIGHT]
    assert T8.successors((1, 2, 0, 3, 4, 5, 6, 7, 8)).__len__() == 2


def test_tile_actions_move_the_blank():
    s = (1, 2, 3, 4, 0, 5, 6, 7, 8)
    kids = {a: c for a, c, _ in T8.successors(s)}
    assert kids[UP].index(0) == 1
    assert kids[DOWN].index(0) == 7
    assert kids[LEFT].index(0) == 3
    assert kids[RIGHT].index(0) == 5


def test_tile_heuristic_goal_and_row_swap():
    assert T8.heuristic(T8.goal) == 0
    swapped = (0, 2, 1, 3, 4, 5, 6, 7, 8)
    assert manhattan(swapped, 3) == 2
    assert linear_conflicts(swapped, 3) == 2
    assert T8.heuristic(swapped) == manhattan(swapped, 3) + 2


def test_linear_conflict_reversed_row_counts_all_but_one_tile():
    # row 0 of the 15-puzzle holding 3 2 1 in goal row: two tiles must leave
    s = list(range(16))
    s[1], s[3] = 3, 1
    assert linear_conflicts(s, 4) == 4


def test_tile8_space_size(tile8):
    assert len(tile8) == 181_440
    assert tile8.hstar.max() == 31
    assert tile8.table.cost_of(T8.goal_key) == 0


def test_tile_and_gap_heuristics_admissible_and_consistent(tile8, pancake9):
    for space in (tile8, pancake9):
        dom = space.domain
        assert (dom.h <= space.hstar + 1e-9).all()
        src, _, tgt, cost = dom.edge_arrays()
        assert (np.abs(dom.h[src] - dom.h[tgt]) <= cost + 1e-9).all()


def test_indexed_heuristic_matches_scalar(tile8, pancake9):
    rng = np.random.default_rng(0)
    for space in (tile8, pancake9):
        dom = space.domain
        for i in rng.integers(0, len(dom), 300):
            assert dom.heuristic(int(i)) == dom.base.heuristic(dom.base_state(int(i)))


def test_tile_reverse_edges_are_inverse_moves():
    rng = random.Random(1)
    for _ in range(200):
        s = random_walk(T8, 20, rng)
        for parent, a in T8.predecessors(s):
            assert T8.successor(parent, a) == s


# ---- pancakes

def test_pancake_flip_and_branching():
    d = PancakeDomain(3)
    kids = dict((a, c) for a, c, _ in d.successors((2, 1, 3)))
    assert kids[0] == (1, 2, 3)
    assert len(P9.successors(P9.goal)) == 8
    assert P9.action_count == 8


def test_gap_heuristic_small_cases():
    assert gap_heuristic((1, 2, 3)) == 0
    # (1,3) differ by 2, and 2 is not the largest pancake resting on the plate
    assert gap_heuristic((1, 3, 2)) == 2
    assert gap_heuristic((3, 2, 1)) == 1


def test_gap_heuristic_admissible_on_all_small_stacks():
    for n in range(2, 7):
        table = exhaustive_reverse_dijkstra(PancakeDomain(n))
        assert len(table) == math.factorial(n)
        d = PancakeDomain(n)
        for k, h in zip(table.keys.tolist(), table.costs.tolist()):
            assert gap_heuristic(d.decode(k)) <= h


def test_pancake9_space_size(pancake9):
    assert len(pancake9) == 362_880
    assert pancake9.hstar.max() == 10


# ---- blocks

def test_blocks_action_count_and_disjoint_effects():
    g = B8.grounded
    assert B8.action_count == 2 * 8 + 2 * 8 * 7 == 128
    assert len(g.pre) == 128
    for add, delete in zip(g.add, g.delete):
        assert not set(add) & set(delete)


def test_blocks_all_on_table_allows_only_pickups():
    s = tuple([8] * 8)
    assert [a for a, _, _ in B8.successors(s)] == list(range(8))


def test_blocks_holding_one_block():
    s = tuple([9] + [8] * 7)
    acts = [a for a, _, _ in B8.successors(s)]
    assert len(acts) == 8
    assert acts[0] == 8  # put-down b1
    names = [B8.grounded.action_names[a] for a in acts]
    assert names[0] == "put-down b1"
    assert all(n.startswith("stack b1") for n in names[1:])


def test_blocks_successors_match_grounded_strips():
    rng = random.Random(3)
    g = B8.grounded
    for _ in range(300):
        s = random_walk(B8, rng.randint(0, 40), rng)
        props = g.state_props(s)
        succ = B8.successors(s)
        assert [a for a, _, _ in succ] == g.applicable(props)
        for a, child, _ in succ:
            assert g.apply(props, a) == g.state_props(child)
            assert B8.successor(child, B8.inverse_action(a)) == s


def test_blocks_pickup_putdown_involution(blocks8):
    rng = np.random.default_rng(0)
    dom = blocks8.domain
    for i in rng.choice(len(dom), 10_000, replace=False):
        s = dom.base_state(int(i))
        for a, child, _ in B8.successors(s):
            if a < 8:
                assert B8.successor(child, 8 + a) == s


def test_hmax_goal_and_one_step():
    assert B8.heuristic(B8.goal) == 0
    one_away = [a for a, c, _ in B8.successors(B8.goal)]
    # unstacking the top block leaves the goal tower one stack away
    child = B8.successors(B8.goal)[0][1]
    assert one_away and B8.heuristic(child) == 1


def test_hmax_batch_matches_scalar():
    rng = random.Random(5)
    states = [random_walk(B8, rng.randint(0, 60), rng) for _ in range(400)]
    batch = hmax_batch(B8.grounded, B8.prop_matrix(states), B8.goal_propositions)
    scalar = [hmax_heuristic(B8.grounded, s, B8.goal_propositions) for s in states]
    assert batch.tolist() == scalar


def test_hmax_admissible_on_sample(blocks8):
    rng = np.random.default_rng(1)
    dom = blocks8.domain
    idx = rng.choice(len(dom), 10_000, replace=False)
    for i in idx[:300]:
        assert B8.heuristic(dom.base_state(int(i))) == dom.h[i]
    assert (dom.h[idx] <= blocks8.hstar[idx]).all()


def test_blocks_reverse_and_forward_enumeration_agree():
    b = BlocksDomain(4)
    table = exhaustive_reverse_dijkstra(b)
    seen = {b.key(b.goal)}
    frontier = [b.goal]
    while frontier:
        nxt = []
        for s in frontier:
            for _, c, _ in b.successors(s):
                k = b.key(c)
                if k not in seen:
                    seen.add(k)
                    nxt.append(c)
        frontier = nxt
    assert seen == set(table.keys.tolist())


def test_blocks8_space(blocks8):
    assert len(blocks8) == 695_417
    assert blocks8.hstar.max() == 28


# ---- enumeration and caching

def test_adjacency_is_deterministic():
    a = load_space("tile3", use_cache=False).domain
    b = load_space("tile3", use_cache=False).domain
    assert np.array_equal(a.targets, b.targets) and np.array_equal(a.actions, b.actions)
    assert len(a) == 12


def test_indexed_domain_save_load_round_trip(tmp_path):
    space = load_space("pancake5", use_cache=False)
    path = tmp_path / "g.npz"
    space.domain.save(path)
    again = type(space.domain).load(space.domain.base, path)
    for i in range(len(again)):
        assert again.successors(i) == space.domain.successors(i)


def test_make_domain_rejects_unknown_names():
    with pytest.raises(ValueError, match="tile8"):
        make_domain("sokoban3")


def test_chain_domain():
    d = ChainDomain(5)
    assert d.heuristic(0) == 5 and d.is_goal(5)
    assert [a for a, _, _ in d.successors(0)] == [0]
    assert [a for a, _, _ in d.successors(5)] == [1]


# ---- parsing

def test_parse_tile_literal_blank_last():
    # read literally: blank in the last cell, solvable against the blank-first goal
    s = parse_instance("tile", "1 2 3 4 5 6 7 8 0")
    assert s == (1, 2, 3, 4, 5, 6, 7, 8, 0)
    assert T8.validate(s) == s


def test_parse_tile_errors():
    with pytest.raises(ParseError, match="line 1, column 3"):
        parse_instance("tile", "1 x 3")
    with pytest.raises(ParseError):
        parse_instance("tile", "1 2 3 4 5 6 7 8 8")
    with pytest.raises(UnsolvableInstance):
        parse_instance("tile", "0 2 1 3 4 5 6 7 8")


def test_parse_korf_first_instance():
    s = parse_instance("tile", "14 13 15 7 11 12 9 5 6 0 2 1 4 8 10 3")
    assert len(s) == 16 and TileDomain(4).heuristic(s) <= 57


def test_parse_blocks_tower():
    text = "\n".join(["on b1 b2", "on b2 b3", "on b3 b4", "on b4 b5", "on b5 b6", "on b6 b7", "on b7 b8",
                      "on b8 table"])
    s = parse_instance("blocks", text)
    assert s == B8.goal and B8.holding(s) is None
    assert parse_instance("blocks", format_instance(B8, s)) == s


def test_parse_blocks_errors():
    with pytest.raises(ParseError):
        parse_instance("blocks", "on b1 b2\non b2 b1")
    with pytest.raises(ParseError, match="line 2"):
        parse_instance("blocks", "on b1 table\nfloat b2")
    with pytest.raises(ParseError):
        parse_instance("blocks", "holding b1\nholding b2")


def test_parse_pancake():
    assert parse_instance("pancake", "3 1 2") == (3, 1, 2)
    with pytest.raises(ParseError):
        parse_instance("pancake", "0 1 2")


@given(st.permutations(list(range(1, 10))))
def test_pancake_format_round_trip(perm):
    s = tuple(perm)
    assert parse_instance("pancake", format_instance(P9, s)) == s
    assert P9.decode(P9.key(s)) == s


@given(st.randoms(use_true_random=False), st.integers(0, 60))
def test_blocks_random_states_are_valid(rnd, steps):
    s = random_walk(B8, steps, rnd)
    assert B8.validate(s) == s
    assert parse_instance("blocks", format_instance(B8, s)) == s


def test_korf_data_parses_and_costs_are_consistent():
    states, opts = korf100()
    assert len(states) == len(opts) == 100
    assert len(set(map(tuple, states))) == 100
    for s, opt in zip(states, opts):
        assert is_solvable(s, 4)
        h = tile_heuristic(s, 4)
        assert h <= opt and (opt - manhattan(s, 4)) % 2 == 0
    assert opts[0] == 57
    assert manhattan(states[0], 4) == 41
