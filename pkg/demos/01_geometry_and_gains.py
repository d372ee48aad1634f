"""Service area, base-station coverage, and the path-loss model.

The service area is a 2x2 km square of 50 m cells. Four BSs sit at the
quadrant centres, each covering the 400 nearest cells, and two BSs are
neighbours (may not reuse a channel) iff they are 1 km apart.
"""

import numpy as np

from slicesim import GainModel, SimConfig, build_default_topology, channel_gain

cfg = SimConfig()
topo = build_default_topology(cfg)
model = GainModel.from_config(cfg)

print("locations:", topo.grid.num_locations)
print("BS positions (m):", topo.bs_xy.tolist())
print("cells per BS:", [len(topo.area_locations(b)) for b in range(topo.num_bs)])
print("neighbour pairs:", topo.edges(), "(the two diagonals are not neighbours)")

print("\npath loss: gain = h0 * (ref / distance)^4, clamped at ref =",
      model.ref_dist_m, "m")
cell = topo.grid.cell_to_loc(0, 0)
cx, cy = topo.grid.cell_center(cell)
for d in (1, 2, 10, 50, 200, 1000):
    g = channel_gain(cell, (cx + d, cy), topo.grid, model)
    print(f"  distance {d:5d} m -> gain {g:.3e} ({10 * np.log10(g):7.2f} dB)")

print("\nserialized geometry:\n")
print(topo.to_text(model))
