"""Counter-based random streams: one independent stream per (seed, stream index)."""

import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """
    Philox generator keyed by ``(stream << 64) | seed``.

    Monte-Carlo trials and sweep cells take their own stream index so results do not depend on
    scheduling order.
    """
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    key = (int(stream) << 64) | (int(seed) & ((1 << 64) - 1))
    return np.random.Generator(np.random.Philox(key=key))
