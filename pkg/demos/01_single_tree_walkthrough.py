"""Walk one packet through a single spanning tree on a 4x4 mesh.

The tree is rooted in the south-east corner and grown with a vertical
preference. Addresses are the compass labels on the path from the root.
"""

from georoute import RoutingState, build_mesh, format_trace, route
from georoute.addressing import format_address, format_runs, rle_encode, tree_distance

mesh = build_mesh(4, 4)
state = RoutingState.build(mesh, k=1, root="corner_se")
tree = state.forest[0]

print("Tree addresses (row by row, north first):")
for y in range(mesh.height):
    row = [format_address(tree.address(mesh.node_at(x, y))) for x in range(mesh.width)]
    print("  " + "  ".join(f"{a:>7}" for a in row))

src, dst = state.resolve("NN"), state.resolve("WWNN")
print(f"\nTree distance NN -> WWNN: {tree_distance(tree.address(src), tree.address(dst))}")
print(f"Mesh distance NN -> WWNN: {mesh.manhattan(src, dst)}")

trace = route(state, src, dst)
print(f"\nRoute ({trace.length} hops, shape {trace.shape}):")
print(format_trace(state, trace))

deepest = max(tree.nodes, key=lambda v: tree.depth[v])
addr = tree.address(deepest)
print(f"\nDeepest address {format_address(addr)} compresses to {format_runs(rle_encode(addr))}")
