"""Splittable seeding: one root seed, independent (stream, replica) generators.

Stream keys name what a generator is used for so that adding replicas or
workers never changes the numbers drawn by any other consumer.
"""
from typing import List

import numpy as np

SAMPLER = 0
REPLICA = 1
GNZ = 2
BALANCE = 3
DIFFUSION = 4
QUADRATURE = 5


def rng_for(seed: int, stream: int, replica: int = 0) -> np.random.Generator:
    """PCG64 generator keyed by (seed, stream, replica)."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(replica)))
    return np.random.Generator(np.random.PCG64(sequence))


def replica_seeds(seed: int, stream: int, count: int) -> List[int]:
    """Derived 64-bit integer seeds, one per replica, for passing to workers."""
    out = []
    for replica in range(count):
        sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), replica))
        out.append(int(sequence.generate_state(1, dtype=np.uint64)[0]))
    return out
