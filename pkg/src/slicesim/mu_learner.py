"""Per-user double-DQN: tiny tanh MLP, replay memory, feasibility-masked control.

The joint action is (channel flag, tasks offloaded, packets sent); the channel
flag is ultimately decided by the auction, but the learner scores both slices
so it can report whether a channel is worth requesting (the preference bit)
and the value of its best action. Actions that cannot be executed (more
offloads than arrivals, more sends than queued, or an infeasible secrecy-rate
transmission) are masked out of every argmax, target, and report.

A tabular variant with visit-count step sizes shares the same learning target
and reduces to classical Q-learning; it exists to validate the update rule
against dynamic-programming solutions on tiny MDPs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .env import Action, MuState
from .topology import GainTables, Grid


class ActionSpace:
    """Enumeration of (channel, offload, send) triples with precomputed payloads."""

    def __init__(self, config: SimConfig):
        t, w = config.task_cap + 1, config.queue_cap + 1
        self.size = 2 * t * w
        self._t, self._w = t, w
        idx = np.arange(self.size)
        self.channel = (idx // (t * w)).astype(np.int64)
        self.offload = (idx // w % t).astype(np.int64)
        self.send = (idx % w).astype(np.int64)
        self.payload = self.channel * (config.task_bits * self.offload
                                       + config.packet_bits * self.send)
        # python pow keeps these bit-identical with the scalar energy formula
        self.pow2 = np.array([2.0 ** (float(p) / config.bits_per_slot)
                              for p in self.payload])
        self.payload_zero = self.payload == 0
        # numerator of the energy formula; the denominator depends on the gains
        self.energy_num = config.noise_energy_j * (self.pow2 - 1.0)
        self.channel_one = np.flatnonzero(self.channel == 1)
        self.channel_zero = np.flatnonzero(self.channel == 0)
        # without a channel nothing is transmitted, so all channel-0 encodings
        # collapse to the no-op; keeping the duplicates selectable would let
        # never-trained entries leak into maxima
        self.redundant = (self.channel == 0) & ((self.offload > 0) | (self.send > 0))
        self.count_ok = np.zeros((t, w, self.size), dtype=bool)
        for tasks in range(t):
            for queue in range(w):
                self.count_ok[tasks, queue] = ((self.offload <= tasks)
                                               & (self.send <= queue)
                                               & ~self.redundant)

    def index(self, action: Action) -> int:
        return (action.channel * self._t + action.offload) * self._w + action.send

    def action(self, idx: int) -> Action:
        return Action(int(self.channel[idx]), int(self.offload[idx]), int(self.send[idx]))


def feasibility_mask(space: ActionSpace, tasks, queue, h_up, h_eve,
                     config: SimConfig) -> np.ndarray:
    """Boolean mask over the action space; accepts scalars or batch arrays.

    Admissible actions respect the arrival/queue counts, collapse channel-0
    encodings to the single no-op, and mirror the scalar energy feasibility
    exactly: zero payloads always pass, otherwise the secrecy denominator must
    be positive and the energy within the power cap.
    """
    cap = config.max_tx_energy_j
    if np.ndim(tasks) == 0:
        ok = space.count_ok[tasks, queue]
        denom = h_up - h_eve * space.pow2
        with np.errstate(divide="ignore", invalid="ignore"):
            energy = space.energy_num / denom
        return ok & (space.payload_zero | ((denom > 0.0) & (energy <= cap)))
    tasks = np.asarray(tasks)[:, None]
    queue = np.asarray(queue)[:, None]
    h_up = np.asarray(h_up)[:, None]
    h_eve = np.asarray(h_eve)[:, None]
    ok = (space.offload <= tasks) & (space.send <= queue) & ~space.redundant
    denom = h_up - h_eve * space.pow2
    with np.errstate(divide="ignore", invalid="ignore"):
        energy = space.energy_num / denom
    ok &= space.payload_zero | ((denom > 0.0) & (energy <= cap))
    return ok


class StateEncoder:
    """States to network inputs: coordinates in [-1, 1], counts in [0, 1]."""

    def __init__(self, grid: Grid, config: SimConfig):
        self.grid = grid
        self.config = config
        cols = np.arange(grid.num_locations) % grid.width_cells
        rows = np.arange(grid.num_locations) // grid.width_cells
        self._x = _axis_scale(cols, grid.width_cells)
        self._y = _axis_scale(rows, grid.height_cells)

    def encode(self, state: MuState) -> np.ndarray:
        return np.array([
            self._x[state.loc], self._y[state.loc],
            self._x[state.eve_loc], self._y[state.eve_loc],
            state.tasks / self.config.task_cap,
            state.queue / self.config.queue_cap,
        ])

    def encode_raw(self, raw: np.ndarray) -> np.ndarray:
        """Batch encode from integer rows (loc, eve_loc, tasks, queue)."""
        return np.column_stack([
            self._x[raw[:, 0]], self._y[raw[:, 0]],
            self._x[raw[:, 1]], self._y[raw[:, 1]],
            raw[:, 2] / self.config.task_cap,
            raw[:, 3] / self.config.queue_cap,
        ])


def _axis_scale(index: np.ndarray, cells: int) -> np.ndarray:
    if cells == 1:
        return np.zeros_like(index, dtype=float)
    return 2.0 * index / (cells - 1) - 1.0


def encode(state: MuState, grid: Grid, config: SimConfig) -> np.ndarray:
    return StateEncoder(grid, config).encode(state)


def td_targets(utilities: np.ndarray, q_next_online: np.ndarray,
               q_next_target: np.ndarray, next_mask: np.ndarray,
               discount: float) -> np.ndarray:
    """Double-estimator targets: (1-g)*u + g*Q_target(s', argmax masked Q_online(s'))."""
    masked = np.where(next_mask, q_next_online, -np.inf)
    a_star = np.argmax(masked, axis=1)
    boot = q_next_target[np.arange(len(a_star)), a_star]
    return (1.0 - discount) * utilities + discount * boot


@dataclass
class TrainBatch:
    states: np.ndarray        # (B, in_dim)
    action_idx: np.ndarray    # (B,)
    utilities: np.ndarray     # (B,)
    next_states: np.ndarray   # (B, in_dim)
    cur_masks: np.ndarray     # (B, A) feasibility at the recorded state
    next_masks: np.ndarray    # (B, A) feasibility at the next state


class QNet:
    """Feed-forward Q network (tanh hidden, linear out) with a frozen target copy."""

    def __init__(self, sizes, rng: np.random.Generator, lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, adam_eps: float = 1e-8,
                 dtype=np.float64):
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) < 2:
            raise ValueError("need at least input and output layers")
        self.lr, self.beta1, self.beta2, self.adam_eps = lr, beta1, beta2, adam_eps
        self.dtype = np.dtype(dtype)
        self.weights, self.biases = [], []
        for fan_in, fan_out in zip(self.sizes, self.sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out))
                                .astype(self.dtype))
            self.biases.append(rng.uniform(-bound, bound, size=fan_out)
                               .astype(self.dtype))
        self.t_weights = [w.copy() for w in self.weights]
        self.t_biases = [b.copy() for b in self.biases]
        self.m_w = [np.zeros_like(w) for w in self.weights]
        self.v_w = [np.zeros_like(w) for w in self.weights]
        self.m_b = [np.zeros_like(b) for b in self.biases]
        self.v_b = [np.zeros_like(b) for b in self.biases]
        self.adam_t = 0
        self.train_steps = 0

    @property
    def num_actions(self) -> int:
        return self.sizes[-1]

    def forward(self, x: np.ndarray, target: bool = False) -> np.ndarray:
        w = self.t_weights if target else self.weights
        b = self.t_biases if target else self.biases
        h = np.atleast_2d(np.asarray(x, dtype=self.dtype))
        for i in range(len(w) - 1):
            h = np.tanh(h @ w[i] + b[i])
        return h @ w[-1] + b[-1]

    def q_single(self, x: np.ndarray, target: bool = False) -> np.ndarray:
        return self.forward(x[None, :], target=target)[0]

    def loss_and_grads(self, batch: TrainBatch, discount: float):
        """Loss of the double-estimator regression and its parameter gradients.

        Current and next states share one stacked forward pass; the target is
        (1-g)*u + g*Q_target(s', argmax masked Q_online(s')), held constant
        for the gradient.
        """
        B = len(batch.action_idx)
        rows = np.arange(B)
        if not batch.cur_masks[rows, batch.action_idx].all():
            raise ValueError("batch contains an infeasible recorded action")

        stacked = np.concatenate([np.atleast_2d(batch.states),
                                  np.atleast_2d(batch.next_states)], axis=0)
        stacked = np.asarray(stacked, dtype=self.dtype)
        acts = [stacked]
        h = stacked
        for i in range(len(self.weights) - 1):
            h = np.tanh(h @ self.weights[i] + self.biases[i])
            acts.append(h)
        out = h @ self.weights[-1] + self.biases[-1]
        out_cur = out[:B]
        q_next_online = out[B:]

        nm = batch.next_masks
        mask_add = nm if nm.dtype != bool else np.where(nm, 0.0, -np.inf)
        a_star = np.argmax(q_next_online + mask_add, axis=1)
        q_next_target = self.forward(batch.next_states, target=True)
        target = ((1.0 - discount) * np.asarray(batch.utilities, dtype=self.dtype)
                  + discount * q_next_target[rows, a_star])

        predicted = out_cur[rows, batch.action_idx]
        resid = target - predicted
        loss = float(np.mean(resid * resid))

        grad_out = np.zeros((B, self.sizes[-1]), dtype=self.dtype)
        grad_out[rows, batch.action_idx] = resid * (-2.0 / B)
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        delta = grad_out
        for layer in range(len(self.weights) - 1, -1, -1):
            grads_w[layer] = acts[layer][:B].T @ delta
            grads_b[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.weights[layer].T) * (1.0 - acts[layer][:B] ** 2)
        return loss, grads_w, grads_b

    def train_step(self, batch: TrainBatch, discount: float) -> float:
        """One Adam step on the squared double-estimator error; target untouched."""
        loss, grads_w, grads_b = self.loss_and_grads(batch, discount)
        self.adam_t += 1
        c1 = 1.0 - self.beta1 ** self.adam_t
        c2 = 1.0 - self.beta2 ** self.adam_t
        for params, grads, m, v in ((self.weights, grads_w, self.m_w, self.v_w),
                                    (self.biases, grads_b, self.m_b, self.v_b)):
            for p, g, mi, vi in zip(params, grads, m, v):
                mi *= self.beta1
                mi += (1.0 - self.beta1) * g
                vi *= self.beta2
                vi += (1.0 - self.beta2) * g * g
                p -= self.lr * (mi / c1) / (np.sqrt(vi / c2) + self.adam_eps)
        self.train_steps += 1
        return loss

    def sync_target(self) -> None:
        """Copy online parameters into the target network (no aliasing)."""
        self.t_weights = [w.copy() for w in self.weights]
        self.t_biases = [b.copy() for b in self.biases]

    def state_dict(self) -> dict:
        out = {"sizes": np.array(self.sizes), "adam_t": np.array([self.adam_t]),
               "train_steps": np.array([self.train_steps])}
        for i in range(len(self.weights)):
            out[f"w{i}"] = self.weights[i]
            out[f"b{i}"] = self.biases[i]
            out[f"tw{i}"] = self.t_weights[i]
            out[f"tb{i}"] = self.t_biases[i]
            out[f"mw{i}"] = self.m_w[i]
            out[f"vw{i}"] = self.v_w[i]
            out[f"mb{i}"] = self.m_b[i]
            out[f"vb{i}"] = self.v_b[i]
        return out

    def load_state(self, data: dict) -> None:
        if tuple(int(s) for s in data["sizes"]) != self.sizes:
            raise ValueError("checkpoint layer sizes do not match")
        self.adam_t = int(data["adam_t"][0])
        self.train_steps = int(data["train_steps"][0])
        for i in range(len(self.weights)):
            self.weights[i] = np.array(data[f"w{i}"])
            self.biases[i] = np.array(data[f"b{i}"])
            self.t_weights[i] = np.array(data[f"tw{i}"])
            self.t_biases[i] = np.array(data[f"tb{i}"])
            self.m_w[i] = np.array(data[f"mw{i}"])
            self.v_w[i] = np.array(data[f"vw{i}"])
            self.m_b[i] = np.array(data[f"mb{i}"])
            self.v_b[i] = np.array(data[f"vb{i}"])


@dataclass(frozen=True)
class Experience:
    """One transition; the action must have been feasible where it was taken."""

    state: MuState
    action: Action
    utility: float
    next_state: MuState


class ReplayMemory:
    """Fixed-capacity ring buffer of encoded transitions; oldest evicted first.

    The next-state mask is stored additively (0 or -inf) so sampled batches
    feed the masked argmax without conversion.
    """

    def __init__(self, capacity: int, in_dim: int, num_actions: int,
                 dtype=np.float64):
        self.capacity = capacity
        self.states = np.zeros((capacity, in_dim), dtype=dtype)
        self.action_idx = np.zeros(capacity, dtype=np.int64)
        self.utilities = np.zeros(capacity, dtype=dtype)
        self.next_states = np.zeros((capacity, in_dim), dtype=dtype)
        self.cur_masks = np.zeros((capacity, num_actions), dtype=bool)
        self.next_masks = np.zeros((capacity, num_actions), dtype=dtype)
        self.size = 0
        self.pos = 0

    def __len__(self) -> int:
        return self.size

    def push(self, state, action_idx, utility, next_state, cur_mask, next_mask) -> None:
        i = self.pos
        self.states[i] = state
        self.action_idx[i] = action_idx
        self.utilities[i] = utility
        self.next_states[i] = next_state
        self.cur_masks[i] = cur_mask
        if next_mask.dtype == bool:
            self.next_masks[i] = np.where(next_mask, 0.0, -np.inf)
        else:
            self.next_masks[i] = next_mask
        self.pos = (self.pos + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def ordered_actions(self) -> list[int]:
        """Recorded action indices, oldest first (for eviction-order checks)."""
        if self.size < self.capacity:
            order = range(self.size)
        else:
            order = [(self.pos + i) % self.capacity for i in range(self.capacity)]
        return [int(self.action_idx[i]) for i in order]

    def sample(self, batch_size: int, rng: np.random.Generator) -> TrainBatch:
        if self.size < batch_size:
            raise ValueError("not enough experiences to sample")
        idx = rng.choice(self.size, size=batch_size, replace=False)
        return TrainBatch(self.states[idx], self.action_idx[idx], self.utilities[idx],
                          self.next_states[idx], self.cur_masks[idx], self.next_masks[idx])


@dataclass
class Decision:
    """One slot's cached view of a state: encoding, mask, masked Q vector."""

    enc: np.ndarray
    mask: np.ndarray
    q_masked: np.ndarray


class MuAgent:
    """Everything one user needs: net, replay, masks, and action selection."""

    def __init__(self, config: SimConfig, grid: Grid, tables: GainTables,
                 rng: np.random.Generator, net: QNet | None = None):
        self.config = config
        self.space = ActionSpace(config)
        self.encoder = StateEncoder(grid, config)
        self.tables = tables
        dtype = np.dtype(config.net_dtype)
        self.net = net if net is not None else QNet(
            (6, *config.hidden_sizes, self.space.size), rng, lr=config.adam_lr,
            dtype=dtype)
        self.replay = ReplayMemory(config.replay_capacity, 6, self.space.size,
                                   dtype=dtype)

    def gains(self, state: MuState) -> tuple[float, float]:
        return self.tables.uplink(state.loc), self.tables.eavesdrop(state.loc, state.eve_loc)

    def mask(self, state: MuState) -> np.ndarray:
        h_up, h_eve = self.gains(state)
        return feasibility_mask(self.space, state.tasks, state.queue,
                                h_up, h_eve, self.config)

    def decide(self, state: MuState) -> Decision:
        """Encode, mask, and score a state once for reuse within the slot."""
        enc = self.encoder.encode(state)
        mask = self.mask(state)
        q = self.net.q_single(enc)
        q[~mask] = -np.inf
        return Decision(enc, mask, q)

    def q_values(self, state: MuState, mask: np.ndarray | None = None) -> np.ndarray:
        """Online Q vector with -inf at infeasible actions."""
        if mask is None:
            mask = self.mask(state)
        q = self.net.q_single(self.encoder.encode(state))
        return np.where(mask, q, -np.inf)

    def channel_preference(self, state: MuState,
                           q_masked: np.ndarray | None = None) -> tuple[int, float]:
        """(want-a-channel bit, value of the best feasible action).

        The bit is 1 only when the best with-channel action strictly beats the
        best without-channel action; ties fall back to not requesting.
        """
        if q_masked is None:
            q_masked = self.q_values(state)
        best_on = float(np.max(q_masked[self.space.channel_one]))
        best_off = float(np.max(q_masked[self.space.channel_zero]))
        return (1 if best_on > best_off else 0), max(best_on, best_off)

    def act(self, state: MuState, realized_channel: int, eps: float,
            rng: np.random.Generator, q_masked: np.ndarray | None = None) -> Action:
        """Epsilon-greedy over feasible actions consistent with the auction outcome."""
        if realized_channel == 0:
            return Action(0, 0, 0)
        if q_masked is None:
            q_masked = self.q_values(state)
        slice_idx = self.space.channel_one
        if rng.random() < eps:
            feasible_idx = slice_idx[np.isfinite(q_masked[slice_idx])]
            choice = int(feasible_idx[rng.integers(len(feasible_idx))])
        else:
            choice = int(slice_idx[int(np.argmax(q_masked[slice_idx]))])
        return self.space.action(choice)

    def observe(self, exp: Experience) -> None:
        cur_mask = self.mask(exp.state)
        idx = self.space.index(exp.action)
        if not cur_mask[idx]:
            raise ValueError("recorded action was infeasible in its state")
        self.replay.push(self.encoder.encode(exp.state), idx, exp.utility,
                         self.encoder.encode(exp.next_state), cur_mask,
                         self.mask(exp.next_state))

    def push_transition(self, prev: Decision, action: Action, utility: float,
                        now: Decision) -> None:
        """Replay push from already-computed slot decisions (no re-encoding)."""
        idx = self.space.index(action)
        if not prev.mask[idx]:
            raise ValueError("recorded action was infeasible in its state")
        self.replay.push(prev.enc, idx, utility, now.enc, prev.mask, now.mask)

    def train(self, rng: np.random.Generator) -> float | None:
        """One replay step once the memory holds a full batch; loss or None."""
        if len(self.replay) < self.config.batch_size:
            return None
        batch = self.replay.sample(self.config.batch_size, rng)
        return self.net.train_step(batch, self.config.discount)

    def sync_target(self) -> None:
        self.net.sync_target()


class TabularQ:
    """Q table with visit-count step sizes; the tabular twin of QNet.

    Uses the same target rule (shared td_targets); with the target table
    synced every step this is classical Q-learning on the scaled reward.
    """

    def __init__(self, num_states: int, num_actions: int):
        self.q = np.zeros((num_states, num_actions))
        self.q_target = np.zeros((num_states, num_actions))
        self.visits = np.zeros((num_states, num_actions), dtype=np.int64)

    def update(self, state: int, action: int, reward: float, next_state: int,
               discount: float, next_mask: np.ndarray | None = None) -> float:
        if next_mask is None:
            next_mask = np.ones(self.q.shape[1], dtype=bool)
        target = td_targets(np.array([reward]), self.q[next_state][None, :],
                            self.q_target[next_state][None, :],
                            next_mask[None, :], discount)[0]
        self.visits[state, action] += 1
        td = target - self.q[state, action]
        self.q[state, action] += td / self.visits[state, action]
        return float(td)

    def sync_target(self) -> None:
        self.q_target = self.q.copy()

    def greedy(self, state: int, mask: np.ndarray | None = None) -> int:
        row = self.q[state]
        if mask is not None:
            row = np.where(mask, row, -np.inf)
        return int(np.argmax(row))
