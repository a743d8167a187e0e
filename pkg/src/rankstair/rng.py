"""Counter-based random streams: one independent generator per (seed, index)."""

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed, index=0):
    """Philox generator keyed by ``seed`` with ``index`` in the top counter word.

    Streams for distinct indices never overlap, so trial i draws the same
    numbers whichever worker runs it.
    """
    bg = np.random.Philox(key=int(seed) & _MASK64, counter=[0, 0, 0, int(index) & _MASK64])
    return np.random.Generator(bg)


def child_seed(seed, label):
    """Derive a sub-seed for a named purpose (encoder randomness, channel, ...)."""
    g = stream(seed, 0xC0FFEE ^ hash_label(label))
    return int(g.integers(0, 1 << 63))


def hash_label(label):
    # FNV-1a, stable across processes unlike hash()
    h = 0xCBF29CE484222325
    for b in label.encode():
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h
