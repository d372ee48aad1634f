"""slicesim: multi-tenant RAN-slicing resource orchestration, slot by slot.

Service providers bid in per-slot VCG channel auctions for their mobile
users, who offload computation tasks and schedule packets at a secrecy rate
against a mobile eavesdropper. Providers learn bidding, offloading, and
scheduling policies with per-user double-DQN learners plus a per-provider
payment-value learner over an abstract payment-interval state.
"""

from .auction import (AuctionOutcome, AuctionSolver, Bid, MuRequest,
                      allocate_channels, check_outcome, feasible,
                      vcg_payment, winner_determination)
from .baselines import BaselineKind, baseline_act, baseline_bid
from .config import SimConfig
from .env import (Action, MobilityKernel, MuState, TaskKernel, cpu_energy,
                  queue_update, sample_arrivals, sp_payoff, step_mobility,
                  tx_energy, utility)
from .harness import (POLICIES, ExperimentSpec, SimInvariantError, Simulation,
                      evaluate_policy, make_spec, run, run_grid, sweep)
from .mu_learner import (ActionSpace, Experience, MuAgent, QNet, ReplayMemory,
                         TabularQ, encode, feasibility_mask, td_targets)
from .sp_agent import (AbstractStateSpec, MuReport, PaymentValue, SpLearner,
                       TransitionTable, abstract_state, abstract_state_value,
                       build_bid, estimate_transition, record_transition,
                       update_payment_value)
from .topology import (GainModel, GainTables, Grid, TopologyGraph,
                       build_default_topology, build_topology, channel_gain)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
