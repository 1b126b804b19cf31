import random
import re

import pytest
from hypothesis import given, settings, strategies as st

from georoute.addressing import is_ancestor
from georoute.errors import InvalidArgument, NotCovered, Unreachable
from georoute.evaluation import iter_pair_stats, shortest_to
from georoute.forest import VERTICAL, build_forest
from georoute.router import (
    ASC,
    DESC,
    DOWN,
    SIDE,
    UP,
    RoutingState,
    classify_arc,
    format_trace,
    greedy_candidates,
    legal_next_hops,
    next_hop,
    route,
)
from georoute.topology import build_mesh, from_links, inject_link_faults

from conftest import routing_states

SHAPE = re.compile(r"[US]*D*")


def test_classify_by_depth(se_tree):
    n, nn, wn, root = (se_tree.resolve(x) for x in ("N", "NN", "WN", "-"))
    assert classify_arc(se_tree, (nn, n)) is UP
    assert classify_arc(se_tree, (n, root)) is UP
    assert classify_arc(se_tree, (n, wn)) is DOWN
    assert se_tree.depth[n] == 1 and se_tree.depth[wn] == 2


def test_classify_side():
    # triangle: both non-root nodes sit at depth 1
    t = from_links(3, [(0, 1), (1, 2), (0, 2)])
    s = RoutingState.build(t, k=1, root=0)
    assert classify_arc(s, (1, 2)) is SIDE


def test_classify_uncovered():
    t = from_links(3, [(0, 1), (1, 2)]).with_failed([(1, 2), (2, 1)])
    s = RoutingState.build(t, k=1, root=0)
    with pytest.raises(NotCovered):
        classify_arc(s, (1, 2))


def test_excludes_non_ancestor_descent(se_tree):
    n, wn, wwnn = (se_tree.resolve(x) for x in ("N", "WN", "WWNN"))
    hops = legal_next_hops(se_tree, n, wwnn, ASC)
    assert wn not in {m for m, _, _ in hops}
    assert {m for m, _, _ in hops} == {se_tree.resolve("-")}
    nn, wnn = se_tree.resolve("NN"), se_tree.resolve("WNN")
    assert wnn not in {m for m, _, _ in legal_next_hops(se_tree, nn, wwnn, ASC)}


@pytest.mark.parametrize("phase", [ASC, DESC])
def test_parent_may_always_descend_to_child(se_tree, phase):
    ww, wwn = se_tree.resolve("WW"), se_tree.resolve("WWN")
    assert (wwn, DOWN, DESC) in legal_next_hops(se_tree, ww, wwn, phase)


def test_2x2_legal_sets_fixture():
    # root 3; addresses 1=N, 2=W, 0=WN (vertical preference)
    s = RoutingState.build(build_mesh(2, 2), k=1, root=3, preferences=[VERTICAL])
    expected = {
        (0, 3, ASC): {(1, UP, ASC), (2, UP, ASC)},
        (1, 3, ASC): {(3, UP, ASC)},
        (2, 3, ASC): {(3, UP, ASC)},
        (3, 0, ASC): {(2, DOWN, DESC)},
        (2, 0, ASC): {(0, DOWN, DESC), (3, UP, ASC)},
        (2, 0, DESC): {(0, DOWN, DESC)},
        (1, 0, ASC): {(0, DOWN, DESC), (3, UP, ASC)},
        (1, 0, DESC): {(0, DOWN, DESC)},
        (1, 2, ASC): {(3, UP, ASC)},
        (3, 2, ASC): {(2, DOWN, DESC)},
    }
    for (cur, dst, ph), hops in expected.items():
        assert set(legal_next_hops(s, cur, dst, ph)) == hops, (cur, dst, ph)


def test_descending_never_climbs(se_tree):
    n, wwnn = se_tree.resolve("N"), se_tree.resolve("WWNN")
    assert legal_next_hops(se_tree, n, wwnn, DESC) == ()


def test_greedy_adjacent_pair():
    s = RoutingState.build(build_mesh(4, 4), k=2)
    for a, b in s.topo.links:
        assert greedy_candidates(s, a, b, ASC)[0][0] == b
        assert len(greedy_candidates(s, a, b, ASC)) == 1


def test_greedy_root_prefers_west(se_tree):
    root, wwnn = se_tree.resolve("-"), se_tree.resolve("WWNN")
    assert greedy_candidates(se_tree, root, wwnn, ASC) == ((se_tree.resolve("W"), DESC),)


def test_greedy_two_trees_shortcut(se_forest):
    nn, wwnn, wnn = (se_forest.resolve(x) for x in ("NN", "WWNN", "WNN"))
    phis = {m: se_forest.phi(m, wwnn) for m in se_forest.topo.out_neighbors[nn]}
    assert phis[wnn] == 1 and min(phis.values()) == 1
    assert greedy_candidates(se_forest, nn, wwnn, ASC) == ((wnn, DESC),)


def test_manhattan_tie_break():
    t = build_mesh(4, 4)
    on = RoutingState.build(t, k=1, root="corner_se")
    off = RoutingState.build(t, k=1, root="corner_se", manhattan=False)
    wider = 0
    for dst in range(16):
        for cur in range(16):
            if cur == dst:
                continue
            a = greedy_candidates(on, cur, dst, ASC)
            b = greedy_candidates(off, cur, dst, ASC)
            assert set(a) <= set(b)
            wider += len(b) > len(a)
    assert wider > 0


def test_next_hop_modes(se_forest):
    nn, wwnn = se_forest.resolve("NN"), se_forest.resolve("WWNN")
    wnn = se_forest.resolve("WNN")
    assert next_hop(se_forest, nn, wwnn) == (wnn, DESC)
    assert next_hop(se_forest, nn, wwnn, rng=random.Random(3)) == (wnn, DESC)
    s = RoutingState.build(build_mesh(8, 8), k=2)
    first = [next_hop(s, 0, 63) for _ in range(5)]
    assert len(set(first)) == 1


def test_adaptive_replay_regression():
    s4 = RoutingState.build(build_mesh(4, 4), k=2)
    assert route(s4, 0, 15, "adaptive", 7).nodes == (0, 4, 5, 9, 10, 11, 15)
    s8 = RoutingState.build(build_mesh(8, 8), k=2)
    trace = route(s8, 0, 63, "adaptive", 7)
    assert trace.nodes == (0, 8, 9, 17, 18, 19, 20, 28, 36, 37, 38, 39, 47, 55, 63)
    assert route(s8, 0, 63, "adaptive", 7) == trace


def test_route_to_self(se_tree):
    assert route(se_tree, 4, 4).length == 0


def test_se_tree_route(se_tree):
    names = ("NN", "N", "-", "W", "WW", "WWN", "WWNN")
    trace = route(se_tree, se_tree.resolve("NN"), se_tree.resolve("WWNN"))
    assert trace.nodes == tuple(se_tree.resolve(x) for x in names)
    assert trace.length == 6
    assert trace.shape == "UUDDDD"
    text = format_trace(se_tree, trace)
    assert text.splitlines()[0] == "NN -> N class=UP phi=5"
    assert text.splitlines()[-1] == "WWN -> WWNN class=DOWN phi=0"


def test_two_tree_route_uses_shortcut(se_forest):
    trace = route(se_forest, se_forest.resolve("NN"), se_forest.resolve("WWNN"))
    assert trace.length == 2
    assert trace.nodes[1] == se_forest.resolve("WNN")


def test_unreachable():
    t = from_links(3, [(0, 1), (1, 2)]).with_failed([(1, 2), (2, 1)])
    s = RoutingState.build(t, k=1, root=0)
    with pytest.raises(Unreachable):
        route(s, 0, 2)
    with pytest.raises(InvalidArgument):
        route(s, 0, 1, mode="psychic")


def test_forest_validation(mesh4):
    a = build_forest(mesh4, 15, [VERTICAL])[0]
    b = build_forest(mesh4, 0, [VERTICAL])[0]
    with pytest.raises(InvalidArgument):
        RoutingState(mesh4, [a, b])
    with pytest.raises(InvalidArgument):
        RoutingState(mesh4, [])


@given(routing_states(), st.randoms(use_true_random=False))
@settings(max_examples=120, deadline=None)
def test_delivery_shape_and_soundness(state, rnd):
    nodes = sorted(state.covered)
    limit = 2 * state.topo.node_count
    for src in nodes:
        for dst in nodes:
            trace = route(state, src, dst, "adaptive", random.Random(rnd.random()))
            assert trace.nodes[0] == src and trace.nodes[-1] == dst
            assert trace.length <= limit
            assert SHAPE.fullmatch(trace.shape)
            for (a, b), cls in zip(zip(trace.nodes, trace.nodes[1:]), trace.classes):
                assert state.topo.is_healthy(a, b)
                assert classify_arc(state, (a, b)) is cls
                if cls is DOWN:
                    assert any(is_ancestor(addr[b], addr[dst]) for addr in state.addr)
            phase_states = [(v, "D" in trace.shape[:i]) for i, v in enumerate(trace.nodes)]
            assert len(set(phase_states)) == len(phase_states)


@given(routing_states())
@settings(max_examples=60, deadline=None)
def test_legal_set_never_empty(state):
    for dst in state.covered:
        for cur in state.covered:
            if cur == dst:
                continue
            assert legal_next_hops(state, cur, dst, ASC)
            # descending states are only entered at ancestors of dst
            if any(is_ancestor(addr[cur], addr[dst]) for addr in state.addr):
                assert legal_next_hops(state, cur, dst, DESC)


def test_deterministic_mode_is_stable():
    t = inject_link_faults(build_mesh(6, 6), 0.1, 9)
    a = RoutingState.build(t, k=2)
    b = RoutingState.build(t, k=2)
    for src in sorted(a.covered)[:10]:
        for dst in sorted(a.covered):
            assert route(a, src, dst) == route(b, src, dst) == route(a, src, dst)


def test_zero_fault_minimality_4x4():
    s = RoutingState.build(build_mesh(4, 4), k=2)
    for dst in range(16):
        dist, _ = shortest_to(s.topo, dst)
        for src in range(16):
            assert route(s, src, dst).length == dist[src]
    assert all(p.always_minimal for p in iter_pair_stats(s))


def test_zero_fault_8x8_known_detours():
    """Two-tree routing on the fault-free 8x8 is not minimal everywhere.

    With a central root, a destination deep inside a quadrant has only the
    two L-shaped tree paths as ancestors; a source inside the rectangle but
    two or more hops from both L paths has no legal down arc and must climb.
    """
    s = RoutingState.build(build_mesh(8, 8), k=2)
    bad = [(p.src, p.dst) for p in iter_pair_stats(s) if not p.always_minimal]
    assert len(bad) == 16
    src, dst = s.topo.node_at(2, 2), s.topo.node_at(0, 0)
    assert (src, dst) in bad
    assert all(cls is UP for _, cls, _ in legal_next_hops(s, src, dst, ASC))
