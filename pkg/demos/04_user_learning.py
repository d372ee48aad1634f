"""One user's double-DQN: masked Q values, channel preference, replay training.

Runs a short training loop on a single-provider world and shows how the
channel-preference bit and the greedy action react to the learned values.
"""

import dataclasses

import numpy as np

from slicesim import MuState, SimConfig, Simulation, make_spec

cfg = dataclasses.replace(SimConfig(), num_sps=1, mus_per_sp=1)
spec = make_spec(cfg, "drl", horizon=15000, seed=3, window=3000)
sim = Simulation(spec)

agent = sim.agents[0]
probe_near = MuState(sim.topology.grid.cell_to_loc(10, 10), 1599, 3, 8)
probe_far = MuState(0, 1, 3, 8)   # eavesdropper in the next cell

print("before training:")
for name, state in (("eve far ", probe_near), ("eve near", probe_far)):
    z, value = agent.channel_preference(state)
    print(f"  {name}: wants channel={z}, best value={value:.3f}")

for k in range(15000):
    sim.step()
    if (k + 1) % 3000 == 0:
        z, value = agent.channel_preference(probe_near)
        action = agent.act(probe_near, 1, 0.0, np.random.default_rng(0))
        print(f"slot {k + 1}: wants={z} value={value:.3f} "
              f"greedy action=(offload {action.offload}, send {action.send}) "
              f"replay={len(agent.replay)}")

print("\nafter training:")
for name, state in (("eve far ", probe_near), ("eve near", probe_far)):
    z, value = agent.channel_preference(state)
    mask = agent.mask(state)
    print(f"  {name}: wants channel={z}, best value={value:.3f}, "
          f"{int(mask.sum())}/{len(mask)} actions feasible")
