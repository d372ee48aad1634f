"""Winner determination under interference constraints, and VCG pricing.

Three providers bid for channels on the 4-cycle BS graph. A channel can be
reused only by non-neighbouring BSs, winners are all-or-nothing, and each
winner pays the welfare its presence costs the others (losers pay nothing).
"""

import numpy as np

from slicesim import AuctionSolver, Bid, MuRequest
from slicesim.oracle import brute_force_welfare

adjacency = np.zeros((4, 4), dtype=bool)
for a, b in ((0, 1), (0, 2), (1, 3), (2, 3)):
    adjacency[a, b] = adjacency[b, a] = True

bids = [Bid(9.0, (2, 1, 0, 0)),   # provider 0 wants 2 channels at BS0, 1 at BS1
        Bid(6.0, (1, 1, 0, 0)),
        Bid(5.0, (0, 0, 1, 2))]
num_channels = 4

requests = []
mu = 0
for sp, bid in enumerate(bids):
    for bs, count in enumerate(bid.demand):
        for _ in range(count):
            requests.append(MuRequest(mu=mu, sp=sp, bs=bs, wants=True))
            mu += 1

solver = AuctionSolver(adjacency, num_channels)
outcome = solver.run(bids, requests)

print("bids:")
for i, bid in enumerate(bids):
    print(f"  sp{i}: valuation {bid.valuation}, demand {bid.demand}")
print("winners:", outcome.winners.tolist())
print("payments:", [round(p, 3) for p in outcome.payments.tolist()])
print("channel assignment (user -> channel):", dict(sorted(outcome.assignment.items())))
print("per-channel BS sets:", [sorted(s) for s in outcome.witness])

welfare = sum(b.valuation for b, w in zip(bids, outcome.winners) if w)
print("welfare:", welfare, "| brute force:",
      brute_force_welfare(bids, num_channels, adjacency))
