import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from georoute.errors import InvalidArgument
from georoute.topology import (
    Arc,
    build_mesh,
    connected_component,
    format_topology,
    from_links,
    inject_link_faults,
    link_components,
    parse_topology,
)

from conftest import faulted_meshes


@pytest.mark.parametrize("w,h,nodes,arcs", [(4, 4, 16, 48), (1, 1, 1, 0), (8, 8, 64, 224), (3, 2, 6, 14)])
def test_mesh_sizes(w, h, nodes, arcs):
    t = build_mesh(w, h)
    assert t.node_count == nodes
    assert len(t.arcs) == arcs
    assert len(t.healthy_arcs) == arcs


def test_mesh_ids_and_coords():
    t = build_mesh(4, 3)
    for n, (x, y) in enumerate(t.coords):
        assert n == y * 4 + x
    for a in t.arcs:
        assert t.manhattan(*a) == 1
    assert t.direction(5, 1) == "N"
    assert t.direction(5, 6) == "E"
    assert t.direction(5, 9) == "S"
    assert t.direction(5, 4) == "W"


@pytest.mark.parametrize("w,h", [(0, 3), (3, 0), (-1, 2)])
def test_mesh_rejects_empty(w, h):
    with pytest.raises(InvalidArgument):
        build_mesh(w, h)


def test_zero_probability_is_identity(mesh4):
    assert inject_link_faults(mesh4, 0.0, 123) == mesh4


@pytest.mark.parametrize("gran", ["link", "arc"])
def test_certain_failure(mesh4, gran):
    t = inject_link_faults(mesh4, 1.0, 5, gran)
    assert not t.healthy_arcs


def test_half_probability_regression(mesh4):
    t = inject_link_faults(mesh4, 0.5, 2024)
    failed_links = sorted(l for l in t.links if not t.is_healthy(*l))
    assert failed_links == [
        (0, 4), (1, 2), (2, 6), (3, 7), (4, 5), (4, 8), (5, 6),
        (6, 10), (8, 9), (8, 12), (10, 14), (11, 15), (12, 13), (13, 14),
    ]
    # link granularity always fails both arcs
    assert all(t.is_healthy(a, b) == t.is_healthy(b, a) for a, b in t.links)
    assert inject_link_faults(mesh4, 0.5, 2024) == t


def test_bad_probability(mesh4):
    with pytest.raises(InvalidArgument):
        inject_link_faults(mesh4, 1.5, 0)


def test_arc_granularity_can_split_links():
    t = inject_link_faults(build_mesh(8, 8), 0.3, 3, "arc")
    assert any(t.is_healthy(a, b) != t.is_healthy(b, a) for a, b in t.links)


@given(faulted_meshes())
@settings(max_examples=60, deadline=None)
def test_arc_pairs_always_present(t):
    arcs = set(t.arcs)
    assert all(Arc(a.head, a.tail) in arcs for a in arcs)
    assert t.failed <= arcs


def test_component_fault_free(mesh4):
    for n in mesh4.nodes:
        assert connected_component(mesh4, n) == frozenset(range(16))


def test_component_all_failed(mesh4):
    t = inject_link_faults(mesh4, 1.0, 0)
    assert connected_component(t, 6) == {6}


def test_column_cut_gives_two_halves(mesh4):
    cut = []
    for y in range(4):
        a = 4 * y + 1
        cut += [(a, a + 1), (a + 1, a)]
    t = mesh4.with_failed(cut)
    left = connected_component(t, 0)
    right = connected_component(t, 3)
    g = nx.DiGraph([tuple(a) for a in t.healthy_arcs])
    assert left == set(nx.descendants(g, 0)) | {0}
    assert left == {0, 1, 4, 5, 8, 9, 12, 13}
    assert right == set(range(16)) - left
    assert [len(c) for c in link_components(t)] == [8, 8]


def test_half_failed_link_directional_reach():
    t = from_links(2, [(0, 1)]).with_failed([(1, 0)])
    assert connected_component(t, 0) == {0, 1}
    assert connected_component(t, 1) == {1}
    assert connected_component(t, 0, bidirectional=True) == {0}


@given(faulted_meshes())
@settings(max_examples=40, deadline=None)
def test_text_roundtrip(t):
    back = parse_topology(format_topology(t))
    assert back == t


def test_text_format_parsing():
    text = """# a triangle with one one-way link
nodes 3
link 0 1
link 1 2
arc 2 0
"""
    t = parse_topology(text)
    assert t.node_count == 3
    assert t.is_healthy(2, 0) and not t.is_healthy(0, 2)
    assert t.coords is None


@pytest.mark.parametrize("text", ["", "link 0 1", "nodes 2\nlink 0 x", "nodes 2\nlink 0 5", "nodes 2\nfoo 1"])
def test_text_format_errors(text):
    with pytest.raises(InvalidArgument):
        parse_topology(text)


def test_without_node(mesh4):
    t = mesh4.without_node(5)
    assert connected_component(t, 5) == {5}
    assert len(t.healthy_arcs) == 48 - 8
