"""
Seed Streams

Independent random substreams derived from a run's master seed, so that
turning one component on or off (gradient fits, Thompson draws) never
shifts the numbers another component sees.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    INIT = 0
    FIT = 1
    ACQ = 2
    TS = 3
    MC = 4
    FALLBACK = 5


def stream_seed(master: int, stream: Stream, *key: int) -> int:
    """
    128-bit integer seed for (stream, *key) under a master seed.

    The f-surrogate of iteration t uses key (t, 0); gradient coordinate i
    uses (t, i + 1).
    """
    ss = np.random.SeedSequence(master, spawn_key=(int(stream), *(int(k) for k in key)))
    words = ss.generate_state(2, dtype=np.uint64)
    return (int(words[0]) << 64) | int(words[1])


def stream_generator(master: int, stream: Stream, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(stream_seed(master, stream, *key)))
