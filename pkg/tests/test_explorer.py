import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from orthoexplore import instances
from orthoexplore.explorer import (
    ExplorationTree,
    Explorer,
    GeometricWorld,
    NodeState,
    StateError,
    competitive_bound,
    explore,
    single_robot_ratio,
    split_robots,
    tree_exploration_bound,
)
from orthoexplore.geometry import essential_extensions, geodesic_distance, point

from conftest import staircase
from helpers import clockwise_visit_keys, is_rotation_of_sorted

SQ2 = math.sqrt(2)


def run(P, s, p):
    w = GeometricWorld(P, s)
    return w, explore(w, p)


# -- bounds


@pytest.mark.parametrize(
    "p, expected",
    [(1, 2 * SQ2), (2, 2 * SQ2 + 1), (4, 2 * (4 * SQ2 + 2) / 3)],
)
def test_competitive_bound_values(p, expected):
    assert competitive_bound(p) == pytest.approx(expected, abs=1e-12)


def test_competitive_bound_nondecreasing():
    vals = [competitive_bound(p) for p in range(1, 65)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        competitive_bound(0)


def test_competitive_bound_scales_with_alpha():
    assert competitive_bound(3, alpha=2) == pytest.approx(2 * competitive_bound(3))


def test_single_robot_ratio_below_bound():
    assert single_robot_ratio() < competitive_bound(1)


def test_tree_bound_values():
    assert tree_exploration_bound(Fraction(5), Fraction(3), 1) == 10
    assert tree_exploration_bound(Fraction(0), Fraction(3), 4) == 4
    assert tree_exploration_bound(Fraction(6), Fraction(2), 2) == 8
    assert tree_exploration_bound(6, 2, 3) == pytest.approx(2 * (6 + 2 * math.log2(3)) / (1 + math.log2(3)))
    with pytest.raises(ValueError):
        tree_exploration_bound(-1, 0, 1)


# -- tree bookkeeping


def test_tree_state_machine():
    t = ExplorationTree(point(0, 0))
    a = t.add(0, point(1, 0), "extension-goal", 1, key="a")
    t.set_state(a.id, NodeState.UNDER_EXPLORATION)
    t.set_state(a.id, NodeState.EXPLORED)
    with pytest.raises(StateError):
        t.set_state(a.id, NodeState.UNEXPLORED)
    with pytest.raises(StateError):
        t.add(0, point(2, 0), "extension-goal", 2, key="a")


def test_tree_rejects_cycles_and_reports_costs():
    t = ExplorationTree(point(0, 0))
    a = t.add(0, point(1, 0), "extension-goal", 1)
    b = t.add(a.id, point(1, 2), "extension-goal", 2)
    with pytest.raises(StateError):
        t.reparent(a.id, b.id, 2)
    assert t.total_length == 3 and t.d_max == 3
    t.reparent(b.id, 0, 3)
    assert t.d_max == 3 and t.total_length == 4
    t.check()


def test_explored_node_with_open_child_fails_check():
    t = ExplorationTree(point(0, 0))
    t.add(0, point(1, 0), "extension-goal", 1)
    t.set_state(0, NodeState.EXPLORED)
    with pytest.raises(StateError):
        t.check()


# -- cluster splitting


@pytest.mark.parametrize(
    "robots, k, expected",
    [
        ((0, 1, 2, 3), 2, [(0, 1), (2, 3)]),
        ((0, 1, 2), 2, [(0, 1), (2,)]),
        ((0,), 2, [(0,)]),
        ((4, 2, 3), 3, [(2,), (3,), (4,)]),
    ],
)
def test_split_robots(robots, k, expected):
    assert split_robots(robots, k) == expected


@given(st.integers(1, 20), st.integers(1, 8))
def test_split_robots_balanced_partition(n, k):
    groups = split_robots(range(n), k)
    assert sorted(r for g in groups for r in g) == list(range(n))
    sizes = [len(g) for g in groups]
    assert max(sizes) - min(sizes) <= 1
    assert sizes == sorted(sizes, reverse=True)


# -- runs on fixtures


def test_unit_square_root_only():
    _, r = run(instances.unit_square(), point(Fraction(1, 2), Fraction(1, 2)), 1)
    assert len(r.tree) == 1 and r.makespan == 0 and r.c_tree == 0


def test_l6_single_child():
    _, r = run(instances.l6(), point(1, 3), 1)
    assert [n.position for n in r.tree.nodes] == [point(1, 3), point(1, 2)]
    assert r.tree[1].kind == "extension-goal"
    assert r.makespan == 2 and r.c_tree == 1


def test_l6_two_robots_within_tree_bound():
    _, r = run(instances.l6(), point(1, 3), 2)
    assert r.makespan <= r.tree_bound()
    assert set(r.distances) == {0, 1}


def test_nested_notches_chain_parentage():
    P, s = instances.nested_staircase()
    _, r = run(P, s, 1)
    assert [(n.id, n.parent) for n in r.tree.nodes] == [(0, None), (1, 0), (2, 1)]
    assert r.makespan == 6


def test_disjoint_notches_are_siblings_and_split():
    P, s = instances.two_room()
    _, r1 = run(P, s, 1)
    _, r2 = run(P, s, 2)
    assert [n.parent for n in r1.tree.nodes[1:]] == [0, 0]
    assert [n.position for n in r1.tree.nodes[1:]] == [point(2, 2), point(6, 2)]
    assert (r1.makespan, r2.makespan) == (8, 4)
    # each robot takes one room
    assert r2.distances == {0: 4, 1: 4}


def test_four_branch_cross_one_robot_per_branch():
    P, s = instances.pinwheel(1)
    _, r1 = run(P, s, 1)
    _, r4 = run(P, s, 4)
    assert r1.makespan == 16
    assert r4.makespan == 4
    assert r4.makespan <= r4.tree_bound()


def test_shortcut_across_l6_is_geodesic():
    P = instances.l6()
    a, b = point(1, 3), point(3, 1)
    w = GeometricWorld(P, a)
    route = w.route(a, b)
    assert route.total == geodesic_distance(P, a, b) == 4


def test_p_must_be_positive():
    with pytest.raises(ValueError):
        Explorer(GeometricWorld(instances.l6(), point(1, 3)), 0)


def test_start_outside_rejected():
    with pytest.raises(ValueError):
        GeometricWorld(instances.l6(), point(3, 3))


def test_events_log_merges_and_divisions():
    P, s = instances.two_room()
    _, r = run(P, s, 2)
    assert any("divides" in e for e in r.events)


# -- invariants over random staircases


@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3, 4]))
def test_run_invariants(seed, p):
    P, s = staircase(seed)
    w, r = run(P, s, p)
    r.tree.check()
    assert all(n.state is NodeState.EXPLORED for n in r.tree.nodes)
    assert r.makespan <= r.tree_bound()
    assert w.coverage() == 1.0
    assert r.makespan == max(r.distances.values())
    for rid, traj in r.trajectories.items():
        assert traj[0][1] == s and traj[-1][1] == s
        # unit speed: elapsed time equals path length on every leg
        for (t0, a), (t1, b) in zip(traj, traj[1:]):
            assert t1 - t0 >= abs(a[0] - b[0]) + abs(a[1] - b[1])
            if t1 - t0 > 0 and a != b:
                assert t1 - t0 == abs(a[0] - b[0]) + abs(a[1] - b[1])
        moved = sum((abs(a[0] - b[0]) + abs(a[1] - b[1]) for (_, a), (_, b) in zip(traj, traj[1:])), Fraction(0))
        assert moved == r.distances[rid]


@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3]))
def test_runs_are_deterministic(seed, p):
    P, s = staircase(seed)
    _, a = run(P, s, p)
    _, b = run(P, s, p)
    assert a.trajectories == b.trajectories and a.events == b.events
    assert a.tree.to_dot() == b.tree.to_dot()


@given(st.integers(0, 10_000))
def test_single_robot_visits_extensions_clockwise(seed):
    P, s = staircase(seed)
    w, r = run(P, s, 1)
    keys = clockwise_visit_keys(w, r, essential_extensions(P, s))
    assert keys is not None
    assert is_rotation_of_sorted(keys)


def test_rotation_helper():
    assert is_rotation_of_sorted([1, 2, 3])
    assert is_rotation_of_sorted([2, 3, 1])
    assert not is_rotation_of_sorted([2, 1, 3, 0])


def _moved(traj):
    return sum((abs(a[0] - b[0]) + abs(a[1] - b[1]) for (_, a), (_, b) in zip(traj, traj[1:])), Fraction(0))


def test_merged_clusters_book_each_leg_once(staircases):
    # two robots split at a shared goal and meet again at the next node
    P, s = staircases[49]
    _, r = run(P, s, 2)
    assert any("merge" in e for e in r.events)
    assert r.distances == {0: 10, 1: 10} and r.makespan == 10
    for rid, traj in r.trajectories.items():
        assert _moved(traj) == r.distances[rid]
        assert all(t0 <= t1 for (t0, _), (t1, _) in zip(traj, traj[1:]))


def test_distances_match_trajectories_on_suite(staircases):
    for P, s in staircases:
        for p in (2, 3):
            _, r = run(P, s, p)
            for rid, traj in r.trajectories.items():
                assert _moved(traj) == r.distances[rid]
                assert traj[-1][0] >= r.distances[rid]
