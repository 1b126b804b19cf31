"""Channel dependency graphs induced by the forwarding rules.

An edge ``a1 -> a2`` means some packet may hold channel ``a1`` while
requesting ``a2``.  Dependencies are collected per destination and phase
and unioned; an acyclic union is the classical sufficient condition for
freedom from deadlock.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .router import ASC, DOWN, RoutingState, classify_arc, greedy_candidates, legal_next_hops
from .topology import Arc


@dataclass(frozen=True)
class ChannelDependencyGraph:
    vertices: frozenset[Arc]
    edges: frozenset[tuple[Arc, Arc]]

    def successors(self) -> dict[Arc, list[Arc]]:
        succ: dict[Arc, list[Arc]] = {v: [] for v in self.vertices}
        for a, b in sorted(self.edges):
            succ[a].append(b)
        return succ


def _hops(state: RoutingState, v: int, t: int, phase, source: str):
    if source == "legal":
        return [(m, p) for m, _, p in legal_next_hops(state, v, t, phase)]
    return list(greedy_candidates(state, v, t, phase))


def _enumerate(state: RoutingState, source: str) -> set[tuple[Arc, Arc]]:
    """Walk every reachable ``(node, phase)`` state for every destination."""
    edges: set[tuple[Arc, Arc]] = set()
    covered = sorted(state.covered)
    for t in covered:
        incoming: dict = {}
        seen = {(u, ASC) for u in covered if u != t}
        stack = list(seen)
        while stack:
            s = stack.pop()
            v, phase = s
            outs = _hops(state, v, t, phase, source)
            for m, p in outs:
                nxt = (m, p)
                incoming.setdefault(nxt, set()).add(Arc(v, m))
                if m != t and nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        for s, arcs_in in incoming.items():
            v, phase = s
            if v == t:
                continue
            outs = [Arc(v, m) for m, _ in _hops(state, v, t, phase, source)]
            edges.update((a1, a2) for a1 in arcs_in for a2 in outs)
    return edges


def _legal_bitsets(state: RoutingState) -> set[tuple[Arc, Arc]]:
    """Same edge set as ``_enumerate(state, 'legal')``, via per-arc destination masks.

    Bit ``t`` of ``mask[a]`` is set when arc ``a`` is a legal first hop
    toward ``t``.  Down arcs have the same condition in either phase, and
    any arc leaving a node toward ``t`` is usable because every node injects.
    """
    covered = sorted(state.covered)
    everyone = sum(1 << t for t in covered)
    dist0 = state._dist0
    anc = state._anc_any
    masks: dict[Arc, int] = {}
    down: set[Arc] = set()
    for u in covered:
        for v in state._outs[u]:
            a = Arc(u, v)
            cls = classify_arc(state, a)
            if cls is DOWN:
                down.add(a)
                masks[a] = sum(1 << t for t in covered if anc[v][t])
            elif state.depth[v] < state.depth[u]:
                masks[a] = everyone & ~(1 << u)
            else:
                masks[a] = sum(1 << t for t in covered if dist0[v][t] < dist0[u][t])
    by_tail: dict[int, list[Arc]] = {}
    for a in masks:
        by_tail.setdefault(a.tail, []).append(a)
    edges = set()
    for a1, m1 in masks.items():
        if not m1:
            continue
        for a2 in by_tail.get(a1.head, ()):
            if a1 in down and a2 not in down:
                continue
            if m1 & masks[a2]:
                edges.add((a1, a2))
    return edges


def build_cdg(state: RoutingState, source: str = "legal") -> ChannelDependencyGraph:
    """Dependency graph over healthy arcs inside the spanned component.

    ``source='legal'`` uses every hop the rules permit (a superset of what
    any selection policy does); ``'greedy'`` only the greedy candidates.
    """
    if source not in ("legal", "greedy"):
        raise ValueError(f"unknown dependency source {source!r}")
    if source == "legal" and state.restricted:
        edges = _legal_bitsets(state)
    else:
        edges = _enumerate(state, source)
    vertices = frozenset(
        Arc(u, v) for u in state.covered for v in state._outs[u]
    )
    return ChannelDependencyGraph(vertices, frozenset(edges))


def find_cycle(cdg: ChannelDependencyGraph) -> Optional[list[Arc]]:
    """A witness cycle as a list of arcs, or ``None`` if the graph is acyclic."""
    succ = cdg.successors()
    WHITE, GREY, BLACK = 0, 1, 2
    colour = dict.fromkeys(succ, WHITE)
    for start in sorted(succ):
        if colour[start] != WHITE:
            continue
        path = [start]
        iters = [iter(succ[start])]
        colour[start] = GREY
        while iters:
            for nxt in iters[-1]:
                if colour[nxt] == GREY:
                    return path[path.index(nxt):]
                if colour[nxt] == WHITE:
                    colour[nxt] = GREY
                    path.append(nxt)
                    iters.append(iter(succ[nxt]))
                    break
            else:
                colour[path.pop()] = BLACK
                iters.pop()
    return None


def format_cycle(cycle: list[Arc]) -> str:
    return " ".join(f"{a.tail}->{a.head}" for a in cycle)
