"""Named sub-seeds derived from one root seed."""

import zlib

import numpy as np


def derive_seed(root: int, *names) -> int:
    """Deterministic 32-bit seed for the path ``names`` below ``root``."""
    words = [int(root) & 0xFFFFFFFF]
    for name in names:
        words.append(zlib.crc32(str(name).encode("utf-8")))
    return int(np.random.SeedSequence(words).generate_state(1)[0])
