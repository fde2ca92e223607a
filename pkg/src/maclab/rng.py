"""Named, reproducible random streams."""

import os
import zlib

import numpy as np

DEFAULT_SEED = 20100607
SEED_ENV = "MACLAB_SEED"


def default_seed():
    """The seed from ``MACLAB_SEED`` if set, else the fixed default."""
    v = os.environ.get(SEED_ENV)
    return int(v) if v not in (None, "") else DEFAULT_SEED


def stream(seed, tag, *index):
    """Independent generator for ``(seed, tag, *index)``.

    The tag names the consumer (e.g. ``"noise"``) so that different
    estimators never share draws unless they ask for the same tag.
    """
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(str(tag).encode())]
    key.extend(int(i) for i in index)
    return np.random.default_rng(np.random.SeedSequence(key))
