"""Named, independent RNG streams derived from one master seed.

Every source of randomness in a run (mobility, per-user arrivals, exploration,
baseline draws, ...) gets its own stream so that changing one policy never
perturbs the random draws seen by the environment or by other agents.
"""

from __future__ import annotations

import hashlib

import numpy as np


def named_stream(master_seed: int, name: str) -> np.random.Generator:
    """Return a generator keyed by (master_seed, name).

    The name is hashed into a SeedSequence spawn key, so streams are
    independent, reproducible, and stable across platforms and runs.
    """
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    words = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=words)
    return np.random.Generator(np.random.PCG64(seq))
