"""Counter-based random streams keyed by (seed, trial, purpose)."""

import zlib

import numpy as np


def make_rng(seed, trial=0, purpose=""):
    """Independent Philox stream for one (seed, trial, purpose) triple.

    ``purpose`` may be a string (hashed with CRC32, stable across runs) or
    an integer.
    """
    tag = zlib.crc32(purpose.encode()) if isinstance(purpose, str) else int(purpose)
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(trial), tag])
    return np.random.Generator(np.random.Philox(ss))
