"""A second tree with a horizontal preference shortens the same route.

Greedy forwarding minimises the smallest tree distance over all trees,
so the packet from NN to WWNN now takes the two-hop mesh path.
"""

from georoute import RoutingState, build_mesh, format_trace, route
from georoute.evaluation import pair_stats, route_ensemble

mesh = build_mesh(4, 4)
one = RoutingState.build(mesh, k=1, root="corner_se")
two = RoutingState.build(mesh, k=2, root="corner_se")

src, dst = one.resolve("NN"), one.resolve("WWNN")
for label, state in (("one tree", one), ("two trees", two)):
    e = route_ensemble(state, src, dst)
    print(f"{label}: expected {e.expected_len} hops, worst {e.max_len}, {e.routes} distinct route(s)")
    print(format_trace(state, route(state, src, dst)))
    print()

central = RoutingState.build(mesh, k=2)
p = pair_stats(central, 0, 15)
print(f"Central root, corner to corner: {p.distinct_routes} of {p.shortest_count} minimal paths usable")
