"""Counter-based random streams.

``stream(seed, index)`` is a pure function of its arguments, so Monte-Carlo
results do not depend on how trials are spread over workers.
"""

import os

import numpy as np

SEED_ENV = "MOTIFCODE_SEED"
DEFAULT_SEED = 20240101

# trials are grouped into fixed-size chunks, one substream per chunk
CHUNK = 4096


def stream(master_seed: int, index: int, *tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(master_seed), int(index), *tag])))


def chunks(total: int, size: int = CHUNK):
    """Yield (chunk_index, start, count) covering range(total)."""
    for idx, start in enumerate(range(0, total, size)):
        yield idx, start, min(size, total - start)


def resolve_seed(seed) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return DEFAULT_SEED
