"""Reproducible random streams.

Every consumer draws from a Philox (counter-based) generator keyed by the
user seed plus a fixed stream id, so two purposes never share a sequence and
parallel work can be split without changing results.

Stream ids
----------
==========================  ==
game_lab.monte_carlo         1
synth.panel                  2
synth.experts                3
synth.context                4
==========================  ==
"""

import numpy as np

STREAMS = {
    "game_lab.monte_carlo": 1,
    "synth.panel": 2,
    "synth.experts": 3,
    "synth.context": 4,
}


def stream(seed, purpose, *substream):
    """Return a ``numpy.random.Generator`` for ``(seed, purpose, *substream)``.

    ``substream`` lets callers carve out independent children, e.g. one per
    grid cell, without coordination.
    """
    if purpose not in STREAMS:
        raise KeyError(f"unknown stream {purpose!r}; known: {sorted(STREAMS)}")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    ss = np.random.SeedSequence(seed, spawn_key=(STREAMS[purpose], *map(int, substream)))
    return np.random.Generator(np.random.Philox(ss))
