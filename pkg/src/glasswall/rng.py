"""Named random sub-streams derived from a single master seed.

Every source of randomness in the package draws from a stream obtained
here, so a run is reproducible from one integer and the individual
components (splitting, bagging, inner validation...) are independently
reproducible as well.
"""

import numpy as np

# Stable stream identifiers. Never renumber: model reproducibility
# across versions depends on these values.
_STREAM_IDS = {
    "split": 1,
    "kfold": 2,
    "bag": 3,
    "inner_val": 4,
    "synth": 5,
    "eval": 6,
    "cv": 7,
    "subset": 8,
}


def substream(seed, name, *indices):
    """Return a Generator for the named sub-stream of ``seed``.

    ``indices`` distinguish repeated uses of the same stream (bag number,
    split number...). The same (seed, name, indices) always yields the
    same bit stream.
    """
    sid = _STREAM_IDS[name]
    ss = np.random.SeedSequence((int(seed) & 0xFFFFFFFFFFFFFFFF, sid) + tuple(int(i) for i in indices))
    return np.random.default_rng(ss)


def subseed(seed, name, *indices):
    """Derive a 63-bit integer seed for the named sub-stream."""
    return int(substream(seed, name, *indices).integers(0, 2**63 - 1))
