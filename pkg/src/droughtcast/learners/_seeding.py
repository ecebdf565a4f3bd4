"""Counter-based seed derivation.

Every random stream in the learners is addressed by a path of small integers
below the master seed, e.g. ``(seed, 3)`` for the fourth tree of a forest or
``(seed, k)`` for the k-th one-vs-rest sub-model. ``numpy``'s
``SeedSequence(entropy=seed, spawn_key=path)`` turns that address into an
independent PCG64 stream, so the stream a tree sees does not depend on
which thread trains it or in which order.
"""

import numpy as np


def stream(seed, *path):
    """Generator for the stream addressed by ``(seed, *path)``."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(seq))


def child_seed(seed, *path):
    """A 63-bit integer seed for a sub-model addressed by ``(seed, *path)``."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
