import random

import networkx as nx
import pytest
from hypothesis import strategies as st

from georoute.router import ASC, RoutingState, greedy_candidates
from georoute.topology import build_mesh, from_links, inject_link_faults


def random_graph(n: int, extra: int, seed: int):
    """Connected random graph: a random spanning tree plus ``extra`` chords."""
    rng = random.Random(seed)
    links = set()
    for v in range(1, n):
        u = rng.randrange(v)
        links.add((u, v))
    for _ in range(extra):
        a, b = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if a != b:
            links.add((min(a, b), max(a, b)))
    return from_links(n, sorted(links))


@st.composite
def faulted_meshes(draw, max_side=5, max_p=0.4):
    w = draw(st.integers(1, max_side))
    h = draw(st.integers(1, max_side))
    p = draw(st.sampled_from([0.0, 0.05, 0.1, 0.2, max_p]))
    seed = draw(st.integers(0, 2**16))
    gran = draw(st.sampled_from(["link", "arc"]))
    return inject_link_faults(build_mesh(w, h), p, seed, gran)


@st.composite
def random_topologies(draw, max_nodes=25):
    n = draw(st.integers(1, max_nodes))
    extra = draw(st.integers(0, 2 * n))
    seed = draw(st.integers(0, 2**16))
    topo = random_graph(n, extra, seed)
    p = draw(st.sampled_from([0.0, 0.1, 0.3]))
    return inject_link_faults(topo, p, seed, draw(st.sampled_from(["link", "arc"])))


@st.composite
def routing_states(draw, max_side=5):
    topo = draw(st.one_of(faulted_meshes(max_side), random_topologies(max_side * max_side)))
    k = draw(st.integers(1, 2))
    root = draw(st.sampled_from(["central", "highest_id"]))
    return RoutingState.build(topo, k=k, root=root)


def tree_graph(tree) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(tree.depth)
    g.add_edges_from((n, p) for n, p in tree.parent.items() if p is not None)
    return g


def enumerate_routes(state, src, dst):
    """Every node sequence the greedy router can emit, by explicit DFS."""
    routes = []

    def walk(path, phase):
        v = path[-1]
        if v == dst:
            routes.append(tuple(path))
            return
        assert len(path) <= 2 * state.topo.node_count
        for m, p in greedy_candidates(state, v, dst, phase):
            walk(path + [m], p)

    walk([src], ASC)
    return routes


@pytest.fixture
def mesh4():
    return build_mesh(4, 4)


@pytest.fixture
def se_tree(mesh4):
    """Single vertical-preference tree rooted at the south-east corner."""
    return RoutingState.build(mesh4, k=1, root="corner_se")


@pytest.fixture
def se_forest(mesh4):
    """Vertical plus horizontal preference trees, south-east root."""
    return RoutingState.build(mesh4, k=2, root="corner_se")


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
