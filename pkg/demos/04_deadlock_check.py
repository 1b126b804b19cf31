"""Build channel dependency graphs and look for cycles.

With the ancestor rule in force the graph stays acyclic even under heavy
faults. Dropping the rule on a four-node ring lets a cycle form.
"""

from georoute import RoutingState, build_mesh, inject_link_faults
from georoute.deadlock import build_cdg, find_cycle, format_cycle
from georoute.topology import from_links

for p in (0.0, 0.1, 0.3):
    acyclic = 0
    for i in range(20):
        state = RoutingState.build(inject_link_faults(build_mesh(8, 8), p, (3, i)), k=2)
        acyclic += find_cycle(build_cdg(state)) is None
    print(f"8x8, K=2, p={p}: {acyclic}/20 fault patterns acyclic")

ring = from_links(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
safe = RoutingState.build(ring, k=1, root=3)
unsafe = RoutingState.build(ring, k=1, root=3, restricted=False)
print(f"\nring with restrictions: cycle = {find_cycle(build_cdg(safe))}")
print(f"ring without restrictions: {format_cycle(find_cycle(build_cdg(unsafe)))}")
