"""Provider-side learning: payment intervals, transition counts, bid values.

A provider summarizes its competitors by the interval its last payment fell
into (interval 1 = paid nothing). Feeding a synthetic payment stream shows the
estimated transition kernel converging and how the learned payment value
shapes the bid's valuation.
"""

import numpy as np

from slicesim import SimConfig, build_default_topology
from slicesim.sp_agent import (MuReport, SpLearner, abstract_state,
                               estimate_transition)

cfg = SimConfig()
topology = build_default_topology(cfg)
learner = SpLearner(cfg)

rng = np.random.default_rng(11)
payments = rng.choice([0.0, 0.0, 1.5, 4.0, 9.0], size=6000,
                      p=[0.5, 0.1, 0.2, 0.15, 0.05])
for slot, payment in enumerate(payments, start=1):
    learner.observe_auction(float(payment), won=1, slot=slot)

print("payment cap (auto-calibrated):", learner.spec.max_payment)
print("interval edges:", [round(b, 2) for b in learner.spec.boundaries])
print("interval of a 3.2 payment:", abstract_state(3.2, learner.spec))

print("\ntransition estimates from state 1 (won=1):",
      np.round(estimate_transition(learner.table, 1, 1), 3))
print("learned payment value per interval:", np.round(learner.pv.values, 3))

reports = [MuReport(value=5.8, wants=1, loc=10, price=1.0),
           MuReport(value=6.1, wants=0, loc=900, price=1.0)]
bid = learner.bid(reports, topology)
print("\nbid built from user reports:")
print("  demand per BS:", bid.demand)
print("  valuation:", round(bid.valuation, 3),
      "(discounted user values minus expected discounted payments)")
