"""Greedy multi-tree forwarding with the up/side-then-down path restriction.

Every arc is classified by the depth change of its endpoints (depths are
the same in all trees because they are BFS trees sharing one root).  A
packet carries one phase bit: while *ascending* it may take up arcs, and
side arcs that shorten its tree distance in the designated tree; the first
down arc switches it to *descending*, after which only down arcs into an
ancestor of the destination are allowed.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .addressing import format_address, parse_address
from .errors import InvalidArgument, NotCovered, Unreachable
from .forest import SpanningTree, build_forest, choose_root, default_preferences
from .topology import Topology


class ArcClass(enum.Enum):
    UP = "UP"
    SIDE = "SIDE"
    DOWN = "DOWN"

    @property
    def symbol(self) -> str:
        return {"UP": "U", "SIDE": "S", "DOWN": "D"}[self.value]


class Phase(enum.IntEnum):
    ASCENDING = 0
    DESCENDING = 1


UP, SIDE, DOWN = ArcClass.UP, ArcClass.SIDE, ArcClass.DOWN
ASC, DESC = Phase.ASCENDING, Phase.DESCENDING


def _tree_tables(tree: SpanningTree, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Ancestor matrix ``anc[a, b]`` (a is an ancestor of b) and distances."""
    anc = np.zeros((n, n), dtype=bool)
    for b in tree.depth:
        a = b
        while a is not None:
            anc[a, b] = True
            a = tree.parent[a]
    depth = np.full(n, -1, dtype=np.int64)
    for v, d in tree.depth.items():
        depth[v] = d
    common = anc[:, :, None] & anc[:, None, :]
    lca_depth = np.where(common, depth[:, None, None], -1).max(axis=0)
    dist = depth[:, None] + depth[None, :] - 2 * lca_depth
    covered = depth >= 0
    dist[~(covered[:, None] & covered[None, :])] = -1
    return anc, dist


class RoutingState:
    """Topology plus a common-root forest and the lookup tables routing needs.

    ``designated_tree`` is the tree whose distance governs side arcs.
    ``manhattan`` enables the grid tie-break among equally good hops.
    ``restricted=False`` drops the ancestor rule and the phase restriction;
    it exists only as a negative control for the deadlock checker.
    """

    def __init__(
        self,
        topo: Topology,
        forest: Sequence[SpanningTree],
        designated_tree: int = 0,
        manhattan: bool = True,
        restricted: bool = True,
    ):
        if not forest:
            raise InvalidArgument("empty forest")
        root = forest[0].root
        if any(t.root != root for t in forest):
            raise InvalidArgument("all trees must share one root")
        if any(t.depth != forest[0].depth for t in forest):
            raise InvalidArgument("trees disagree on node depths")
        if not 0 <= designated_tree < len(forest):
            raise InvalidArgument(f"designated tree {designated_tree} out of range")
        self.topo = topo
        self.forest = tuple(forest)
        self.root = root
        self.designated_tree = designated_tree
        self.manhattan = manhattan and topo.coords is not None
        self.restricted = restricted
        n = topo.node_count
        self.covered = frozenset(forest[0].depth)
        self.depth = [forest[0].depth.get(v, -1) for v in range(n)]
        self.addr = [{v: t.address(v) for v in t.depth} for t in self.forest]
        tables = [_tree_tables(t, n) for t in self.forest]
        self.anc = np.stack([a for a, _ in tables])
        self.dist = np.stack([d for _, d in tables])
        # plain lists are much faster than numpy scalars in the hot loops
        self._anc_any = self.anc.any(axis=0).tolist()
        self._dist0 = self.dist[designated_tree].tolist()
        self._phi = self.dist.min(axis=0).tolist()
        if self.manhattan:
            xy = np.array(topo.coords)
            self._mdist = np.abs(xy[:, None, :] - xy[None, :, :]).sum(axis=2).tolist()
        self._outs = [tuple(m for m in topo.out_neighbors[v] if m in self.covered) for v in range(n)]
        self._greedy: dict = {}

    @classmethod
    def build(
        cls,
        topo: Topology,
        k: int = 2,
        root: Union[str, int] = "central",
        preferences: Optional[Sequence] = None,
        **kwargs,
    ) -> "RoutingState":
        """Choose a root, grow ``k`` preferential trees and index them."""
        r = choose_root(topo, root)
        if preferences is None:
            preferences = default_preferences(k) if topo.is_grid else [None] * k
        return cls(topo, build_forest(topo, r, preferences), **kwargs)

    @property
    def k(self) -> int:
        return len(self.forest)

    def phi(self, n: int, dest: int) -> int:
        """Smallest tree distance from ``n`` to ``dest`` over all trees."""
        return self._phi[n][dest]

    def resolve(self, name: Union[str, int]) -> int:
        """Node id from an integer or a tree-0 address string such as ``WWNN``."""
        if isinstance(name, int):
            return name
        text = str(name).strip()
        if text.lstrip("-").isdigit():
            return int(text)
        addr = parse_address(text)
        for v, a in self.addr[0].items():
            if a == addr:
                return v
        raise InvalidArgument(f"no node has address {text!r} in tree 0")

    def name(self, n: int) -> str:
        return format_address(self.addr[0][n]) if n in self.covered else str(n)

    def without_leaf(self, n: int) -> "RoutingState":
        """Same trees minus the leaf ``n``, with ``n`` powered off."""
        return RoutingState(
            self.topo.without_node(n),
            [t.without_leaf(n) for t in self.forest],
            self.designated_tree,
            self.manhattan,
            self.restricted,
        )

    def _check(self, *nodes: int) -> None:
        for v in nodes:
            if v not in self.covered:
                raise Unreachable(f"node {v} is outside the component spanned by the forest")


def classify_arc(state: RoutingState, arc: Sequence[int]) -> ArcClass:
    tail, head = arc
    dt, dh = state.depth[tail], state.depth[head]
    if dt < 0 or dh < 0:
        raise NotCovered(f"arc {tail}->{head} leaves the spanned component")
    if dh < dt:
        return UP
    if dh == dt:
        return SIDE
    return DOWN


def legal_next_hops(
    state: RoutingState, current: int, dest: int, phase: Phase = ASC
) -> tuple[tuple[int, ArcClass, Phase], ...]:
    """All hops the forwarding rules allow, sorted by node id."""
    state._check(current, dest)
    if current == dest:
        raise InvalidArgument("packet already at its destination")
    depth = state.depth
    dc = depth[current]
    out = []
    if not state.restricted:
        dist0 = state._dist0
        for m in state._outs[current]:
            dm = depth[m]
            if dm == dc:
                if dist0[m][dest] < dist0[current][dest]:
                    out.append((m, SIDE, ASC))
            else:
                out.append((m, UP if dm < dc else DOWN, ASC))
        return tuple(out)
    anc = state._anc_any
    for m in state._outs[current]:
        dm = depth[m]
        if dm > dc:
            if anc[m][dest]:
                out.append((m, DOWN, DESC))
        elif phase == DESC:
            continue
        elif dm < dc:
            out.append((m, UP, ASC))
        elif state._dist0[m][dest] < state._dist0[current][dest]:
            out.append((m, SIDE, ASC))
    return tuple(out)


def greedy_candidates(
    state: RoutingState, current: int, dest: int, phase: Phase = ASC
) -> tuple[tuple[int, Phase], ...]:
    """Legal hops at minimal multi-tree distance, then minimal Manhattan distance."""
    key = (current, dest, phase)
    hit = state._greedy.get(key)
    if hit is not None:
        return hit
    hops = legal_next_hops(state, current, dest, phase)
    phi = state._phi
    best = min(phi[m][dest] for m, _, _ in hops)
    cands = [(m, p) for m, _, p in hops if phi[m][dest] == best]
    if state.manhattan and len(cands) > 1:
        md = state._mdist
        near = min(md[m][dest] for m, _ in cands)
        cands = [(m, p) for m, p in cands if md[m][dest] == near]
    result = tuple(cands)
    state._greedy[key] = result
    return result


def next_hop(
    state: RoutingState,
    current: int,
    dest: int,
    phase: Phase = ASC,
    rng: Optional[random.Random] = None,
) -> tuple[int, Phase]:
    """Pick one greedy candidate: lowest id, or uniformly at random with ``rng``."""
    cands = greedy_candidates(state, current, dest, phase)
    if rng is None:
        return cands[0]
    return cands[rng.randrange(len(cands))]


@dataclass(frozen=True)
class RouteTrace:
    nodes: tuple[int, ...]
    classes: tuple[ArcClass, ...]

    @property
    def length(self) -> int:
        return len(self.classes)

    @property
    def shape(self) -> str:
        """Class string such as ``UUSDD``."""
        return "".join(c.symbol for c in self.classes)


def route(
    state: RoutingState,
    src: int,
    dest: int,
    mode: str = "deterministic",
    rng: Union[random.Random, int, None] = None,
) -> RouteTrace:
    """Walk a packet from ``src`` to ``dest``.

    ``mode='adaptive'`` draws among candidates with ``rng`` (a
    :class:`random.Random` or a seed); ``'deterministic'`` always takes the
    lowest node id.
    """
    state._check(src, dest)
    if mode == "adaptive":
        if not isinstance(rng, random.Random):
            rng = random.Random(rng)
    elif mode == "deterministic":
        rng = None
    else:
        raise InvalidArgument(f"unknown routing mode {mode!r}")
    nodes, classes = [src], []
    current, phase = src, ASC
    limit = 2 * state.topo.node_count
    while current != dest:
        nxt, phase = next_hop(state, current, dest, phase, rng)
        classes.append(classify_arc(state, (current, nxt)))
        nodes.append(nxt)
        current = nxt
        if len(classes) > limit:
            raise RuntimeError(f"route {src}->{dest} exceeded {limit} hops")
    return RouteTrace(tuple(nodes), tuple(classes))


def format_trace(state: RoutingState, trace: RouteTrace) -> str:
    """One ``FROM -> TO class=... phi=...`` line per hop."""
    dest = trace.nodes[-1]
    lines = []
    for a, b, cls in zip(trace.nodes, trace.nodes[1:], trace.classes):
        lines.append(
            f"{state.name(a)} -> {state.name(b)} class={cls.value} phi={state.phi(b, dest)}"
        )
    return "\n".join(lines)
