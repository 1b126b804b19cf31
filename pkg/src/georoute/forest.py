"""Breadth-first spanning trees with direction-preferential parent choice."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .addressing import address_of
from .errors import InvalidArgument, NotInTree
from .topology import Topology, hop_distances, link_components

VERTICAL = ("N", "S", "E", "W")
HORIZONTAL = ("E", "W", "N", "S")
DEFAULT_PREFERENCES = (VERTICAL, HORIZONTAL, ("S", "N", "W", "E"), ("W", "E", "S", "N"))


@dataclass(frozen=True)
class SpanningTree:
    root: int
    parent: dict[int, Optional[int]]
    label: dict[int, object]  # label of the arc parent -> node
    depth: dict[int, int]

    @property
    def nodes(self) -> frozenset[int]:
        return frozenset(self.depth)

    @property
    def children(self) -> dict[int, dict[object, int]]:
        """``children[p][label] -> child``; every spanned node has an entry."""
        kids: dict[int, dict[object, int]] = {n: {} for n in self.depth}
        for n, p in self.parent.items():
            if p is not None:
                kids[p][self.label[n]] = n
        return kids

    def child_by_label(self, parent: int, label) -> int:
        return self.children[parent][label]

    def is_leaf(self, n: int) -> bool:
        if n not in self.depth:
            raise NotInTree(f"node {n} is not in the tree")
        return not any(p == n for p in self.parent.values())

    @property
    def max_depth(self) -> int:
        return max(self.depth.values())

    def address(self, n: int) -> tuple:
        return address_of(self, n)

    def without_leaf(self, n: int) -> "SpanningTree":
        if n == self.root or not self.is_leaf(n):
            raise InvalidArgument(f"node {n} is not a removable leaf")
        keep = lambda d: {k: v for k, v in d.items() if k != n}
        return SpanningTree(self.root, keep(self.parent), keep(self.label), keep(self.depth))

    def dump(self) -> str:
        """Text dump: ``root ID`` then ``node ID depth D parent P label L`` lines."""
        lines = [f"root {self.root}"]
        for n in sorted(self.depth):
            if n != self.root:
                lines.append(
                    f"node {n} depth {self.depth[n]} parent {self.parent[n]} label {self.label[n]}"
                )
        return "\n".join(lines) + "\n"


def parse_tree_dump(text: str) -> SpanningTree:
    root = None
    parent: dict[int, Optional[int]] = {}
    label: dict[int, object] = {}
    depth: dict[int, int] = {}
    for line in text.split("\n"):
        f = line.split()
        if not f:
            continue
        if f[0] == "root":
            root = int(f[1])
            parent[root], depth[root] = None, 0
        elif f[0] == "node" and len(f) == 8:
            n = int(f[1])
            depth[n], parent[n] = int(f[3]), int(f[5])
            label[n] = int(f[7]) if f[7].lstrip("-").isdigit() else f[7]
        else:
            raise InvalidArgument(f"bad tree dump line {line!r}")
    if root is None:
        raise InvalidArgument("tree dump has no root line")
    return SpanningTree(root, parent, label, depth)


def choose_root(topo: Topology, policy: Union[str, int] = "central") -> int:
    """Pick the common root of the forest.

    ``central`` minimises eccentricity inside the largest component,
    ``highest_id`` takes the largest id there, an ``int`` is used as is.
    Ties go to the higher node id.
    """
    if topo.node_count == 0:
        raise InvalidArgument("empty topology")
    if isinstance(policy, int) and not isinstance(policy, bool):
        if not 0 <= policy < topo.node_count:
            raise InvalidArgument(f"root {policy} is not a node")
        return policy
    comp = link_components(topo)[0]
    if policy == "highest_id":
        return max(comp)
    if policy == "central":
        ecc = {n: max(hop_distances(topo, n, bidirectional=True).values()) for n in comp}
        return min(comp, key=lambda n: (ecc[n], -n))
    if isinstance(policy, str) and policy.startswith("corner_"):
        return _corner(topo, policy[len("corner_"):])
    raise InvalidArgument(f"unknown root policy {policy!r}")


def _corner(topo: Topology, which: str) -> int:
    if topo.coords is None:
        raise InvalidArgument("corner roots need a mesh")
    xs = [c[0] for c in topo.coords]
    ys = [c[1] for c in topo.coords]
    try:
        y = {"n": min(ys), "s": max(ys)}[which[0]]
        x = {"w": min(xs), "e": max(xs)}[which[1]]
    except (KeyError, IndexError):
        raise InvalidArgument(f"unknown corner {which!r}") from None
    return topo.node_at(x, y)


def port_label(topo: Topology, parent: int, child: int):
    """Compass letter on grids, else the child's index among the parent's ports."""
    if topo.is_grid:
        return topo.direction(parent, child)
    return topo.neighbors[parent].index(child)


def grow_tree(
    topo: Topology, root: int, preference: Optional[Sequence] = None
) -> SpanningTree:
    """BFS tree over bidirectionally healthy links.

    When a node has several candidate parents one layer up, the parent
    whose parent->child arc label ranks earliest in ``preference`` wins;
    labels missing from ``preference`` rank last, then the lowest parent id.
    On graphs without grid coordinates ``preference`` ranks parent node ids.
    """
    if not 0 <= root < topo.node_count:
        raise InvalidArgument(f"root {root} is not a node")
    preference = tuple(preference or ())
    rank = {lab: i for i, lab in enumerate(preference)}
    grid = topo.is_grid

    def key(p: int, n: int):
        lab = topo.direction(p, n) if grid else p
        return (rank.get(lab, len(rank)), p)

    depth = {root: 0}
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in topo.link_neighbors[u]:
            if v not in depth:
                depth[v] = depth[u] + 1
                order.append(v)
                queue.append(v)
    parent: dict[int, Optional[int]] = {root: None}
    label: dict[int, object] = {}
    for n in order[1:]:
        cands = [p for p in topo.link_neighbors[n] if depth.get(p) == depth[n] - 1]
        p = min(cands, key=lambda c: key(c, n))
        parent[n] = p
        label[n] = port_label(topo, p, n)
    return SpanningTree(root, parent, label, depth)


def build_forest(
    topo: Topology, root: int, preferences: Sequence[Optional[Sequence]]
) -> list[SpanningTree]:
    """One BFS tree per preference order, all sharing ``root``."""
    if not preferences:
        raise InvalidArgument("a forest needs at least one tree")
    return [grow_tree(topo, root, pref) for pref in preferences]


def default_preferences(k: int) -> list[tuple[str, ...]]:
    if not 1 <= k <= len(DEFAULT_PREFERENCES):
        raise InvalidArgument(f"no default preferences for {k} trees")
    return [DEFAULT_PREFERENCES[i] for i in range(k)]


def removable_without_reconfig(forest: Sequence[SpanningTree], n: int) -> bool:
    """A node can be powered off without re-addressing iff it is a leaf everywhere."""
    if any(n == t.root for t in forest):
        return False
    return all(t.is_leaf(n) for t in forest)
