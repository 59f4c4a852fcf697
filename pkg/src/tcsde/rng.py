"""Seed derivation for reproducible Monte Carlo.

Every simulated path owns two independent random streams, one driving the
subordinator clock and one driving the Brownian motion.  Sub-seeds derive
from (master_seed, path_index, stream_tag) through numpy's SeedSequence
spawn-key mechanism, so a path's draws depend only on its index, never on
scheduling order or on how many worker processes participate.  Aggregation
in path-index order then makes whole campaigns bit-reproducible at any
concurrency level.
"""

import numpy as np

from .errors import DomainError

CLOCK_STREAM = 0
NOISE_STREAM = 1


def _check(master_seed, path_index, stream_tag):
    if not isinstance(master_seed, int) or isinstance(master_seed, bool) or master_seed < 0:
        raise DomainError(f"master_seed must be a nonnegative integer, got {master_seed!r}")
    if not isinstance(path_index, int) or isinstance(path_index, bool) or path_index < 0:
        raise DomainError(f"path_index must be a nonnegative integer, got {path_index!r}")
    if stream_tag not in (CLOCK_STREAM, NOISE_STREAM):
        raise DomainError(f"stream_tag must be CLOCK_STREAM or NOISE_STREAM, got {stream_tag!r}")


def substream(master_seed, path_index, stream_tag):
    """Fresh Generator for one (path, role) pair."""
    _check(master_seed, path_index, stream_tag)
    ss = np.random.SeedSequence(master_seed, spawn_key=(path_index, stream_tag))
    return np.random.Generator(np.random.PCG64(ss))


def seed_lineage(master_seed, path_index, stream_tag):
    """128-bit identifier of a sub-stream, recorded in report manifests."""
    _check(master_seed, path_index, stream_tag)
    ss = np.random.SeedSequence(master_seed, spawn_key=(path_index, stream_tag))
    return tuple(int(x) for x in ss.generate_state(4))
