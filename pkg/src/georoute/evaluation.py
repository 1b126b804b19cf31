"""Route-quality metrics: stretch, minimality and degree of adaptiveness.

Per-pair statistics are computed exactly.  For a fixed destination the
walk states ``(node, phase)`` form a DAG under the greedy candidate
relation, so expected route length (uniform choice at every hop), longest
route and the number of distinct routes all come out of one memoised pass
that serves every source at once.
"""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence, TextIO, Union

from .errors import InvalidArgument, Unreachable
from .forest import DEFAULT_PREFERENCES
from .router import ASC, RoutingState, greedy_candidates
from .topology import Topology, build_mesh, inject_link_faults, link_components

DEFAULT_FAIL_PROBS = (0.0, 0.01, 0.02, 0.05, 0.10)
CSV_COLUMNS = (
    "mesh", "k_trees", "fail_prob", "pairs", "mean_stretch", "frac_nonminimal",
    "mean_adaptiveness", "patterns_used", "patterns_skipped", "seed",
)


# -- shortest paths ----------------------------------------------------------


def shortest_to(topo: Topology, dst: int) -> tuple[dict[int, int], dict[int, int]]:
    """Hop distance to ``dst`` and number of shortest paths, for every source."""
    dist = {dst: 0}
    count = {dst: 1}
    order = [dst]
    queue = deque([dst])
    while queue:
        v = queue.popleft()
        for u in topo.in_neighbors[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                count[u] = 0
                order.append(u)
                queue.append(u)
    for u in order[1:]:
        count[u] = sum(count[w] for w in topo.out_neighbors[u] if dist.get(w) == dist[u] - 1)
    return dist, count


def shortest_len(topo: Topology, src: int, dst: int) -> int:
    dist, _ = shortest_to(topo, dst)
    if src not in dist:
        raise Unreachable(f"no healthy path {src} -> {dst}")
    return dist[src]


def shortest_count(topo: Topology, src: int, dst: int) -> int:
    dist, count = shortest_to(topo, dst)
    if src not in dist:
        raise Unreachable(f"no healthy path {src} -> {dst}")
    return count[src]


# -- route ensembles ---------------------------------------------------------


@dataclass(frozen=True)
class Ensemble:
    """All routes a walk state can still produce."""

    expected_len: Union[int, Fraction]  # under uniform choice among candidates
    max_len: int
    routes: int  # distinct node sequences
    total_len: int  # summed over the distinct routes

    @property
    def mean_len(self) -> Union[int, Fraction]:
        if self.total_len % self.routes == 0:
            return self.total_len // self.routes
        return Fraction(self.total_len, self.routes)


_DONE = Ensemble(0, 0, 1, 0)


def ensembles_to(
    state: RoutingState, dest: int, mode: str = "adaptive"
) -> dict[tuple[int, int], Ensemble]:
    """Ensemble of every walk state reachable from an injection toward ``dest``.

    ``mode='deterministic'`` restricts each step to the lowest-id candidate.
    Raises ``RuntimeError`` if a walk could revisit a state.
    """
    state._check(dest)
    first_only = mode == "deterministic"
    memo: dict = {}
    pending: set = set()
    for src in sorted(state.covered):
        stack = [((src, ASC), False)]
        while stack:
            s, expanded = stack.pop()
            if s in memo:
                continue
            if s[0] == dest:
                memo[s] = _DONE
                continue
            cands = greedy_candidates(state, s[0], dest, s[1])
            if first_only:
                cands = cands[:1]
            if not expanded:
                if s in pending:
                    raise RuntimeError(f"walk state {s} toward {dest} repeats")
                pending.add(s)
                stack.append((s, True))
                stack.extend((c, False) for c in cands if c not in memo)
                continue
            subs = [memo[c] for c in cands]
            if len(subs) == 1:
                e = subs[0]
                res = Ensemble(e.expected_len + 1, e.max_len + 1, e.routes, e.total_len + e.routes)
            else:
                total = sum(e.expected_len for e in subs)
                n = len(subs)
                if isinstance(total, int) and total % n == 0:
                    avg = total // n
                else:
                    avg = Fraction(total) / n
                res = Ensemble(
                    1 + avg,
                    1 + max(e.max_len for e in subs),
                    sum(e.routes for e in subs),
                    sum(e.total_len + e.routes for e in subs),
                )
            memo[s] = res
            pending.discard(s)
    return memo


def route_ensemble(state: RoutingState, src: int, dst: int, mode: str = "adaptive") -> Ensemble:
    state._check(src, dst)
    if src == dst:
        return _DONE
    return ensembles_to(state, dst, mode)[(src, ASC)]


@dataclass(frozen=True)
class PairStats:
    src: int
    dst: int
    shortest_len: int
    expected_len: Union[int, Fraction]
    max_len: int
    distinct_routes: int
    shortest_count: int
    mean_route_len: Union[int, Fraction] = 0

    @property
    def always_minimal(self) -> bool:
        return self.max_len == self.shortest_len


def pair_stats(state: RoutingState, src: int, dst: int, mode: str = "adaptive") -> PairStats:
    if src == dst:
        raise InvalidArgument("pair statistics need distinct endpoints")
    dist, count = shortest_to(state.topo, dst)
    e = route_ensemble(state, src, dst, mode)
    return PairStats(src, dst, dist[src], e.expected_len, e.max_len, e.routes, count[src], e.mean_len)


def stretch(pair: PairStats, average: str = "expected") -> Fraction:
    """Average route length over shortest length.

    ``average='routes'`` weights every distinct route equally instead of
    using the expectation under uniform random forwarding.
    """
    if pair.shortest_len < 1:
        raise InvalidArgument("stretch is undefined for src == dst")
    num = pair.expected_len if average == "expected" else pair.mean_route_len
    return Fraction(num) / pair.shortest_len


def adaptiveness(pair: PairStats) -> Optional[Fraction]:
    """Distinct routes over minimal paths, only for always-minimal pairs."""
    if not pair.always_minimal:
        return None
    return Fraction(pair.distinct_routes, pair.shortest_count)


def iter_pair_stats(state: RoutingState, mode: str = "adaptive") -> Iterator[PairStats]:
    """Every ordered pair of distinct nodes in the spanned component."""
    for dst in sorted(state.covered):
        dist, count = shortest_to(state.topo, dst)
        ens = ensembles_to(state, dst, mode)
        for src in sorted(state.covered):
            if src == dst:
                continue
            e = ens[(src, ASC)]
            yield PairStats(src, dst, dist[src], e.expected_len, e.max_len, e.routes, count[src], e.mean_len)


# -- aggregation -------------------------------------------------------------


@dataclass
class Totals:
    """Order-independent exact sums over evaluated pairs.

    Numerators are bucketed by their denominator (shortest length, or
    minimal-path count) so the hot loop stays in integer arithmetic.
    """

    pairs: int = 0
    nonminimal: int = 0
    adapt_pairs: int = 0
    expected_by_len: dict = field(default_factory=dict)
    route_mean_by_len: dict = field(default_factory=dict)
    routes_by_count: dict = field(default_factory=dict)

    def add_pair(self, p: PairStats) -> None:
        self.pairs += 1
        L = p.shortest_len
        self.expected_by_len[L] = self.expected_by_len.get(L, 0) + p.expected_len
        self.route_mean_by_len[L] = self.route_mean_by_len.get(L, 0) + p.mean_route_len
        if p.always_minimal:
            self.adapt_pairs += 1
            c = p.shortest_count
            self.routes_by_count[c] = self.routes_by_count.get(c, 0) + p.distinct_routes
        else:
            self.nonminimal += 1

    def merge(self, other: "Totals") -> None:
        self.pairs += other.pairs
        self.nonminimal += other.nonminimal
        self.adapt_pairs += other.adapt_pairs
        for mine, theirs in (
            (self.expected_by_len, other.expected_by_len),
            (self.route_mean_by_len, other.route_mean_by_len),
            (self.routes_by_count, other.routes_by_count),
        ):
            for key, val in theirs.items():
                mine[key] = mine.get(key, 0) + val

    @staticmethod
    def _ratio_sum(buckets: dict) -> Fraction:
        return sum((Fraction(v) / k for k, v in sorted(buckets.items())), Fraction(0))

    @property
    def stretch_sum(self) -> Fraction:
        return self._ratio_sum(self.expected_by_len)

    @property
    def route_stretch_sum(self) -> Fraction:
        return self._ratio_sum(self.route_mean_by_len)

    @property
    def adapt_sum(self) -> Fraction:
        return self._ratio_sum(self.routes_by_count)


def evaluate_state(state: RoutingState, mode: str = "adaptive") -> Totals:
    t = Totals()
    for p in iter_pair_stats(state, mode):
        t.add_pair(p)
    return t


@dataclass(frozen=True)
class ExperimentConfig:
    mesh_sizes: tuple[tuple[int, int], ...] = ((4, 4), (8, 8))
    tree_counts: tuple[int, ...] = (1, 2)
    fail_probs: tuple[float, ...] = DEFAULT_FAIL_PROBS
    master_seed: int = 1
    min_pairs: int = 250_000
    root_policy: object = "central"
    preferences: Optional[tuple] = None  # per-tree orders; None -> defaults
    mode: str = "adaptive"
    dependency_source: str = "legal"
    granularity: str = "link"
    manhattan: bool = True
    max_patterns: int = 100_000
    output: Optional[str] = None

    def __post_init__(self) -> None:
        for name in ("mesh_sizes", "tree_counts", "fail_probs"):
            if not getattr(self, name):
                raise InvalidArgument(f"{name} must not be empty")
        if any(not 0.0 <= p <= 1.0 for p in self.fail_probs):
            raise InvalidArgument("fail_probs must lie in [0, 1]")
        if any(w < 1 or h < 1 for w, h in self.mesh_sizes):
            raise InvalidArgument("mesh sizes must be positive")
        if self.mode not in ("adaptive", "deterministic"):
            raise InvalidArgument(f"unknown mode {self.mode!r}")
        if self.min_pairs < 1 or self.max_patterns < 1:
            raise InvalidArgument("min_pairs and max_patterns must be positive")


@dataclass(frozen=True)
class MetricsReport:
    mesh: tuple[int, int]
    k_trees: int
    fail_prob: float
    seed: int
    pairs: int
    mean_stretch: Fraction
    mean_route_stretch: Fraction  # every distinct route weighted equally
    fraction_nonminimal: Fraction
    mean_adaptiveness: Optional[Fraction]
    patterns_used: int
    patterns_skipped: int

    @classmethod
    def from_totals(cls, t: Totals, mesh, k, p, seed, used, skipped) -> "MetricsReport":
        if t.pairs == 0:
            zero = Fraction(0)
            return cls(mesh, k, p, seed, 0, zero, zero, zero, None, used, skipped)
        return cls(
            mesh, k, p, seed, t.pairs,
            t.stretch_sum / t.pairs,
            t.route_stretch_sum / t.pairs,
            Fraction(t.nonminimal, t.pairs),
            t.adapt_sum / t.adapt_pairs if t.adapt_pairs else None,
            used, skipped,
        )


def build_state(topo: Topology, k: int, config: ExperimentConfig) -> Optional[RoutingState]:
    """Routing state on the largest component, or None if it has < 2 nodes."""
    if len(link_components(topo)[0]) < 2:
        return None
    prefs = config.preferences
    if prefs is None:
        prefs = DEFAULT_PREFERENCES[:k]
    elif len(prefs) < k:
        raise InvalidArgument(f"{k} trees need {k} preference orders")
    return RoutingState.build(
        topo, k=k, root=config.root_policy, preferences=list(prefs[:k]), manhattan=config.manhattan
    )


def evaluate_pattern(args) -> Optional[Totals]:
    """Worker entry point: one fault pattern of one sweep point."""
    config, (w, h), k, p, index = args
    topo = inject_link_faults(build_mesh(w, h), p, (config.master_seed, index), config.granularity)
    state = build_state(topo, k, config)
    if state is None:
        return None
    return evaluate_state(state, config.mode)


def run_point(
    config: ExperimentConfig, mesh: tuple[int, int], k: int, p: float, pool=None, batch: int = 1
) -> MetricsReport:
    """Accumulate fault patterns ``0, 1, 2...`` until ``min_pairs`` is reached.

    The pattern prefix used depends only on the config, never on the pool.
    """
    totals = Totals()
    used = skipped = 0
    index = 0
    # a zero-probability point has exactly one possible pattern
    limit = 1 if p == 0 else config.max_patterns
    while totals.pairs < config.min_pairs and index < limit:
        jobs = [(config, mesh, k, p, i) for i in range(index, min(index + batch, limit))]
        results = map(evaluate_pattern, jobs) if pool is None else pool.map(evaluate_pattern, jobs)
        for res in results:
            index += 1
            if totals.pairs >= config.min_pairs:
                continue
            if res is None:
                skipped += 1
                continue
            used += 1
            totals.merge(res)
    return MetricsReport.from_totals(totals, mesh, k, p, config.master_seed, used, skipped)


def run_sweep(config: ExperimentConfig, workers: Optional[int] = 1) -> list[MetricsReport]:
    """One report per ``(mesh, k, p)``, in config order."""
    workers = workers or os.cpu_count() or 1
    points = [(m, k, p) for m in config.mesh_sizes for k in config.tree_counts for p in config.fail_probs]
    if workers == 1:
        return [run_point(config, *pt) for pt in points]
    with ProcessPoolExecutor(workers) as pool:
        return [run_point(config, *pt, pool=pool, batch=4 * workers) for pt in points]


# -- output ------------------------------------------------------------------


def format_decimal(x: Fraction, digits: int = 6) -> str:
    """Exact round-half-even rendering of a rational."""
    x = Fraction(x)
    scale = 10 ** digits
    q, r = divmod(x.numerator * scale, x.denominator)
    if 2 * r > x.denominator or (2 * r == x.denominator and q % 2):
        q += 1
    sign = "-" if q < 0 else ""
    q = abs(q)
    return f"{sign}{q // scale}.{q % scale:0{digits}d}"


def report_row(r: MetricsReport) -> list[str]:
    return [
        f"{r.mesh[0]}x{r.mesh[1]}",
        str(r.k_trees),
        f"{r.fail_prob:g}",
        str(r.pairs),
        format_decimal(r.mean_stretch),
        format_decimal(r.fraction_nonminimal),
        "" if r.mean_adaptiveness is None else format_decimal(r.mean_adaptiveness),
        str(r.patterns_used),
        str(r.patterns_skipped),
        str(r.seed),
    ]


def write_reports(reports: Sequence[MetricsReport], fp: TextIO, fmt: str = "csv") -> None:
    sep = {"csv": ",", "tsv": "\t"}[fmt]
    fp.write(sep.join(CSV_COLUMNS) + "\n")
    for r in reports:
        fp.write(sep.join(report_row(r)) + "\n")
