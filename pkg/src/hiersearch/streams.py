"""Independent, addressable random streams.

Every random decision in the package draws from a generator keyed by
``(seed, purpose, index)``, so a community's links or a trial's route never
depend on what was computed before it.
"""

import numpy as np

GRAPH = 0
TRIALS = 1
SWEEP = 2


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit seed derived from ``seed`` and ``key``; stable across runs."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


