"""Inject random link faults and check every surviving pair still routes."""

import random

from georoute import RoutingState, build_mesh, inject_link_faults, route
from georoute.evaluation import evaluate_state

mesh = build_mesh(8, 8)
for p in (0.0, 0.05, 0.1, 0.2):
    topo = inject_link_faults(mesh, p, seed=11)
    state = RoutingState.build(topo, k=2)
    broken = sum(not topo.is_healthy(a, b) for a, b in topo.links)
    totals = evaluate_state(state)
    stretch = float(totals.stretch_sum / totals.pairs)
    print(f"p={p:<4} failed links={broken:3d}  spanned nodes={len(state.covered):2d}  "
          f"pairs={totals.pairs:4d}  mean stretch={stretch:.4f}  non-minimal={totals.nonminimal}")

topo = inject_link_faults(mesh, 0.2, seed=11)
state = RoutingState.build(topo, k=2)
rng = random.Random(0)
src, dst = rng.sample(sorted(state.covered), 2)
trace = route(state, src, dst, "adaptive", rng)
print(f"\nadaptive route {src} -> {dst}: {trace.nodes} shape {trace.shape}")
