"""Simulation configuration.

All quantities are stored in SI units; dB/dBm fields are converted to linear
once, at load time, and the rest of the library only ever sees linear values.
The defaults reproduce the reference experimental setup (3 tenants, 4 base
stations, 500 kHz channels, 10 ms slots, 6 users per tenant, ...).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class SimConfig:
    # Actors
    num_sps: int = 3                    # competing service providers (tenants)
    mus_per_sp: int = 6                 # mobile users subscribed to each SP
    num_bs: int = 4                     # base stations
    num_channels: int = 11              # orthogonal channels shared per slot

    # Radio / slot
    bandwidth_hz: float = 500e3         # per-channel bandwidth
    slot_s: float = 1e-2                # scheduling slot duration
    noise_dbm_per_hz: float = -174.0    # background noise PSD
    max_tx_power_w: float = 3.0         # transmit power cap per user

    # Geometry / path loss
    grid_width: int = 40
    grid_height: int = 40
    cell_m: float = 50.0
    h0_db: float = -40.0                # path-loss constant at the reference distance
    ref_dist_m: float = 2.0
    pathloss_exp: float = 4.0

    # Traffic
    task_cap: int = 5                   # max computation-task arrivals per slot
    queue_cap: int = 10                 # packet queue limit
    task_bits: float = 5000.0           # input size of one computation task
    packet_bits: float = 3000.0
    cycles_per_bit: float = 737.5
    cpu_hz: float = 2e9
    switched_cap: float = 2.5e-28       # effective switched capacitance
    arrival_rate: float = 8.0           # mean packet arrivals per slot
    poisson_cap_factor: float = 4.0     # packet arrivals truncated at factor*rate

    # Economics
    discount: float = 0.9
    unit_price: float = 1.0             # price an SP charges per unit of user utility
    energy_weight: float = 3.0          # weight of the energy terms in the utility

    # Mobility
    stay_prob: float = 0.6              # lazy-walk probability of not moving

    # Per-user Q learning
    hidden_sizes: tuple[int, ...] = (16, 16)
    replay_capacity: int = 5000
    batch_size: int = 200
    explore_eps: float = 0.001
    sync_period: int = 100              # slots between target-network refreshes
    adam_lr: float = 1e-3
    share_mu_nets: bool = False         # one shared net for all users of an SP
    net_dtype: str = "float32"          # network arithmetic width

    # Per-SP payment-value learning
    payment_bins: int = 6               # abstract payment intervals (zero bin included)
    payment_cap: float | None = None    # None: calibrate from observed payments
    payment_cap_warmup: int = 2000      # slots before the auto cap freezes
    pv_step0: float = 0.5               # initial payment-value step size
    pv_step_scale: float = 1000.0       # step decays as step0 / (1 + k/scale)

    # Baselines
    queue_threshold: int = 5            # queue-aware policy threshold
    random_bid_cap: float = 10.0        # random policy draws its valuation in [0, cap)

    def __post_init__(self):
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount must lie in [0, 1)")
        if not 0.0 <= self.explore_eps <= 1.0:
            raise ValueError("explore_eps must lie in [0, 1]")
        positive = (
            "num_sps", "mus_per_sp", "num_bs", "num_channels", "bandwidth_hz",
            "slot_s", "max_tx_power_w", "grid_width", "grid_height", "cell_m",
            "ref_dist_m", "pathloss_exp", "queue_cap", "task_cap", "task_bits",
            "packet_bits", "cycles_per_bit", "cpu_hz", "switched_cap",
            "unit_price", "energy_weight", "replay_capacity", "batch_size",
            "sync_period", "adam_lr", "payment_bins", "pv_step0", "pv_step_scale",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("arrival_rate", "queue_threshold", "random_bid_cap",
                     "poisson_cap_factor", "stay_prob"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.payment_cap is not None and self.payment_cap < 0:
            raise ValueError("payment_cap must be non-negative")
        if self.queue_threshold > self.queue_cap:
            raise ValueError("queue_threshold must not exceed queue_cap")
        if self.net_dtype not in ("float32", "float64"):
            raise ValueError("net_dtype must be float32 or float64")

    # Derived, linear-domain quantities -----------------------------------

    @property
    def noise_w_per_hz(self) -> float:
        return 10.0 ** ((self.noise_dbm_per_hz - 30.0) / 10.0)

    @property
    def h0(self) -> float:
        return 10.0 ** (self.h0_db / 10.0)

    @property
    def bits_per_slot(self) -> float:
        """Bits carried by one channel at unit spectral efficiency."""
        return self.bandwidth_hz * self.slot_s

    @property
    def noise_energy_j(self) -> float:
        """delta * eta * sigma^2, the energy scale of the secrecy-rate formula."""
        return self.slot_s * self.bandwidth_hz * self.noise_w_per_hz

    @property
    def max_tx_energy_j(self) -> float:
        return self.max_tx_power_w * self.slot_s

    @property
    def num_mus(self) -> int:
        return self.num_sps * self.mus_per_sp

    @property
    def num_locations(self) -> int:
        return self.grid_width * self.grid_height

    @property
    def action_count(self) -> int:
        return 2 * (self.task_cap + 1) * (self.queue_cap + 1)

    @property
    def poisson_cap(self) -> int:
        return int(math.ceil(self.poisson_cap_factor * self.arrival_rate))

    def desk_scale(self) -> "SimConfig":
        """Small configuration for laptop-scale experiments (2 users per SP)."""
        return dataclasses.replace(self, mus_per_sp=2)

    # Key-value config file ------------------------------------------------

    def to_text(self) -> str:
        lines = ["# slicesim configuration (units: SI; *_db/_dbm fields in dB)"]
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if field.name == "hidden_sizes":
                value = ",".join(str(v) for v in value)
            elif field.name == "payment_cap":
                value = "auto" if value is None else value
            elif isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{field.name} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SimConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        values: dict = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {raw!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in known:
                raise ValueError(f"unknown config key: {key}")
            values[key] = _parse_field(key, val, known[key].type)
        return cls(**values)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> "SimConfig":
        return cls.from_text(Path(path).read_text())


def _parse_field(key: str, val: str, typ: str):
    if key == "hidden_sizes":
        return tuple(int(v) for v in val.split(",") if v.strip())
    if key == "payment_cap":
        return None if val.lower() in ("auto", "none") else float(val)
    if typ == "bool":
        if val.lower() in ("true", "1", "yes"):
            return True
        if val.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"bad boolean for {key}: {val}")
    if typ == "int":
        return int(val)
    if typ == "str":
        return val
    return float(val)
