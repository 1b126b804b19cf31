"""Chip network graphs: mesh builder, fault injection, text I/O.

A :class:`Topology` is a set of directed arcs over dense integer node ids.
Every physical link is stored as two arcs, each of which can fail on its
own.  Mesh instances also carry ``(x, y)`` coordinates with ``y`` growing
southwards, so the south-east corner has the highest id.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Optional, Sequence, TextIO

import numpy as np

from .errors import InvalidArgument


class Arc(NamedTuple):
    tail: int
    head: int


Coord = tuple[int, int]

# unit step -> compass label, y grows southwards
_COMPASS = {(0, -1): "N", (1, 0): "E", (0, 1): "S", (-1, 0): "W"}


@dataclass(frozen=True)
class Topology:
    """Immutable directed-arc graph with optional grid coordinates."""

    node_count: int
    arcs: tuple[Arc, ...]
    failed: frozenset[Arc] = frozenset()
    coords: Optional[tuple[Coord, ...]] = None
    width: Optional[int] = field(default=None, compare=False)
    height: Optional[int] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        arcs = tuple(sorted(Arc(*a) for a in self.arcs))
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "failed", frozenset(Arc(*a) for a in self.failed))
        seen = set(arcs)
        if len(seen) != len(arcs):
            raise InvalidArgument("duplicate arc")
        for a in arcs:
            if a.tail == a.head:
                raise InvalidArgument(f"self-loop at node {a.tail}")
            if not (0 <= a.tail < self.node_count and 0 <= a.head < self.node_count):
                raise InvalidArgument(f"arc {a} references an unknown node")
            if Arc(a.head, a.tail) not in seen:
                raise InvalidArgument(f"arc {a} has no reverse arc")
        if not self.failed <= seen:
            raise InvalidArgument("failed arcs must be arcs of the topology")
        if self.coords is not None:
            coords = tuple(tuple(c) for c in self.coords)
            if len(coords) != self.node_count or len(set(coords)) != len(coords):
                raise InvalidArgument("coords must map nodes one-to-one")
            object.__setattr__(self, "coords", coords)

    # -- structure ---------------------------------------------------------

    @property
    def nodes(self) -> range:
        return range(self.node_count)

    @cached_property
    def links(self) -> tuple[tuple[int, int], ...]:
        """Undirected links as ``(a, b)`` with ``a < b``."""
        return tuple((a.tail, a.head) for a in self.arcs if a.tail < a.head)

    @cached_property
    def healthy_arcs(self) -> tuple[Arc, ...]:
        return tuple(a for a in self.arcs if a not in self.failed)

    def is_healthy(self, tail: int, head: int) -> bool:
        arc = Arc(tail, head)
        return arc not in self.failed and arc in self._arc_set

    @cached_property
    def _arc_set(self) -> frozenset[Arc]:
        return frozenset(self.arcs)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """All physical neighbours regardless of health (the router ports)."""
        adj: list[list[int]] = [[] for _ in self.nodes]
        for a in self.arcs:
            adj[a.tail].append(a.head)
        return tuple(tuple(sorted(ns)) for ns in adj)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Heads of the healthy arcs leaving each node."""
        adj: list[list[int]] = [[] for _ in self.nodes]
        for a in self.healthy_arcs:
            adj[a.tail].append(a.head)
        return tuple(tuple(sorted(ns)) for ns in adj)

    @cached_property
    def in_neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in self.nodes]
        for a in self.healthy_arcs:
            adj[a.head].append(a.tail)
        return tuple(tuple(sorted(ns)) for ns in adj)

    @cached_property
    def link_neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Neighbours joined by a link healthy in both directions."""
        return tuple(
            tuple(m for m in outs if self.is_healthy(m, n))
            for n, outs in enumerate(self.out_neighbors)
        )

    @property
    def is_mesh(self) -> bool:
        return self.coords is not None

    @cached_property
    def is_grid(self) -> bool:
        """True when every arc joins coordinates at Manhattan distance one."""
        if self.coords is None:
            return False
        return all(self.manhattan(a.tail, a.head) == 1 for a in self.arcs)

    def manhattan(self, a: int, b: int) -> int:
        if self.coords is None:
            raise InvalidArgument("topology has no coordinates")
        (xa, ya), (xb, yb) = self.coords[a], self.coords[b]
        return abs(xa - xb) + abs(ya - yb)

    def direction(self, tail: int, head: int) -> str:
        """Compass label of the arc ``tail -> head`` on a grid topology."""
        (xa, ya), (xb, yb) = self.coords[tail], self.coords[head]
        try:
            return _COMPASS[(xb - xa, yb - ya)]
        except KeyError:
            raise InvalidArgument(f"arc {tail}->{head} is not a unit grid step") from None

    def node_at(self, x: int, y: int) -> int:
        if self.coords is None:
            raise InvalidArgument("topology has no coordinates")
        try:
            return self._coord_index[(x, y)]
        except KeyError:
            raise InvalidArgument(f"no node at ({x}, {y})") from None

    @cached_property
    def _coord_index(self) -> dict[Coord, int]:
        return {c: n for n, c in enumerate(self.coords or ())}

    # -- derived topologies ------------------------------------------------

    def with_failed(self, arcs: Iterable[tuple[int, int]]) -> "Topology":
        return Topology(
            self.node_count,
            self.arcs,
            self.failed | frozenset(Arc(*a) for a in arcs),
            self.coords,
            self.width,
            self.height,
        )

    def without_node(self, n: int) -> "Topology":
        """Switch a node off by failing every arc touching it."""
        return self.with_failed(a for a in self.arcs if n in a)


def build_mesh(width: int, height: int) -> Topology:
    """``width x height`` 2D mesh, node id ``y * width + x``, all arcs healthy."""
    if width < 1 or height < 1:
        raise InvalidArgument(f"mesh dimensions must be positive, got {width}x{height}")
    arcs = []
    for y in range(height):
        for x in range(width):
            n = y * width + x
            if x + 1 < width:
                arcs += [Arc(n, n + 1), Arc(n + 1, n)]
            if y + 1 < height:
                arcs += [Arc(n, n + width), Arc(n + width, n)]
    coords = tuple((n % width, n // width) for n in range(width * height))
    return Topology(width * height, tuple(arcs), frozenset(), coords, width, height)


def inject_link_faults(
    topo: Topology, p: float, seed=0, granularity: str = "link"
) -> Topology:
    """Fail each link (or each arc) independently with probability ``p``.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`, so a
    ``(master_seed, pattern_index)`` pair gives independent reproducible
    streams.  Already failed arcs stay failed.
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidArgument(f"probability must lie in [0, 1], got {p}")
    if granularity not in ("link", "arc"):
        raise InvalidArgument(f"unknown fault granularity {granularity!r}")
    if p == 0.0:
        return topo
    rng = np.random.default_rng(seed)
    if granularity == "link":
        links = topo.links
        hit = rng.random(len(links)) < p
        failed = [arc for (a, b), h in zip(links, hit) if h for arc in ((a, b), (b, a))]
    else:
        hit = rng.random(len(topo.arcs)) < p
        failed = [a for a, h in zip(topo.arcs, hit) if h]
    return topo.with_failed(failed)


def connected_component(topo: Topology, n: int, bidirectional: bool = False) -> frozenset[int]:
    """Nodes reachable from ``n`` over healthy arcs.

    With ``bidirectional=True`` only links healthy in both directions are
    followed; that is the notion used when building spanning trees.
    """
    if not 0 <= n < topo.node_count:
        raise InvalidArgument(f"unknown node {n}")
    adj = topo.link_neighbors if bidirectional else topo.out_neighbors
    seen = {n}
    queue = deque([n])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return frozenset(seen)


def link_components(topo: Topology) -> list[frozenset[int]]:
    """Components over bidirectionally healthy links, largest first.

    Equal sizes are ordered by their highest node id, descending.
    """
    seen: set[int] = set()
    comps = []
    for n in topo.nodes:
        if n not in seen:
            comp = connected_component(topo, n, bidirectional=True)
            seen |= comp
            comps.append(comp)
    comps.sort(key=lambda c: (len(c), max(c)), reverse=True)
    return comps


def hop_distances(topo: Topology, src: int, bidirectional: bool = False) -> dict[int, int]:
    adj = topo.link_neighbors if bidirectional else topo.out_neighbors
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


# -- text format -----------------------------------------------------------


def parse_topology(text: str) -> Topology:
    """Parse ``nodes N`` / ``arc A B`` / ``link A B`` / ``coord N X Y`` lines.

    ``failed A B`` marks an existing arc unhealthy.  A lone ``arc`` line
    implies its reverse arc, which exists but is failed.
    """
    node_count = None
    arcs: set[Arc] = set()
    declared: set[Arc] = set()
    failed: set[Arc] = set()
    coords: dict[int, Coord] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, *rest = line.split()
        try:
            vals = [int(v) for v in rest]
        except ValueError:
            raise InvalidArgument(f"line {lineno}: non-integer field in {raw!r}") from None
        if node_count is None:
            if key != "nodes" or len(vals) != 1:
                raise InvalidArgument(f"line {lineno}: expected 'nodes N' first")
            node_count = vals[0]
            continue
        if key in ("arc", "link", "failed") and len(vals) == 2:
            a, b = vals
            if key == "link":
                arcs |= {Arc(a, b), Arc(b, a)}
                declared |= {Arc(a, b), Arc(b, a)}
            elif key == "arc":
                arcs |= {Arc(a, b), Arc(b, a)}
                declared.add(Arc(a, b))
            else:
                failed.add(Arc(a, b))
        elif key == "coord" and len(vals) == 3:
            coords[vals[0]] = (vals[1], vals[2])
        else:
            raise InvalidArgument(f"line {lineno}: cannot parse {raw!r}")
    if node_count is None:
        raise InvalidArgument("empty topology description")
    failed |= arcs - declared
    coord_tuple = None
    if coords:
        if set(coords) != set(range(node_count)):
            raise InvalidArgument("coord lines must cover every node")
        coord_tuple = tuple(coords[n] for n in range(node_count))
    return Topology(node_count, tuple(arcs), frozenset(failed), coord_tuple)


def format_topology(topo: Topology) -> str:
    lines = [f"nodes {topo.node_count}"]
    for a, b in topo.links:
        ab, ba = topo.is_healthy(a, b), topo.is_healthy(b, a)
        if ab and ba:
            lines.append(f"link {a} {b}")
        elif ab:
            lines.append(f"arc {a} {b}")
        elif ba:
            lines.append(f"arc {b} {a}")
        else:
            lines += [f"link {a} {b}", f"failed {a} {b}", f"failed {b} {a}"]
    if topo.coords is not None:
        lines += [f"coord {n} {x} {y}" for n, (x, y) in enumerate(topo.coords)]
    return "\n".join(lines) + "\n"


def read_topology(fp: TextIO) -> Topology:
    return parse_topology(fp.read())


def from_links(node_count: int, links: Sequence[tuple[int, int]]) -> Topology:
    """Fault-free topology from an undirected edge list."""
    arcs = {Arc(a, b) for a, b in links} | {Arc(b, a) for a, b in links}
    return Topology(node_count, tuple(arcs))
