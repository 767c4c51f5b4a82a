"""Deterministic, splittable random streams and multinomial arm sampling.

Every consumer of randomness derives its own stream from
(master seed, replication index, purpose tag) by hash-mixing the three
values through ``numpy.random.SeedSequence`` into a Philox counter-based
generator. Equal keys give bit-identical streams; replication results are
therefore independent of worker count and scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .trial import ArmCounts, OrdinalDistribution

#: recorded in results metadata so outputs are reproducible across builds
GENERATOR_ID = f"philox4x64 (numpy.random.Philox via SeedSequence, numpy {np.__version__})"

# purpose tags, one per randomness consumer
TAG_H1_SAMPLING = 0
TAG_H0_SAMPLING = 1
TAG_FISHER_MC = 2
TAG_ERROR_INJECTION = 3
TAG_SYNTH_DATA = 6

_TAG_STRIDE = 4  # error-injection tags advance in steps of 4 (3, 7, 11, ...), colliding with no other tag


def error_injection_tag(cell_index: int) -> int:
    """Purpose tag for error injection into measurement-error cell ``cell_index``."""
    if cell_index < 0:
        raise ValueError(f"cell index must be >= 0, got {cell_index}")
    return TAG_ERROR_INJECTION + _TAG_STRIDE * cell_index


@dataclass(frozen=True)
class StreamKey:
    master_seed: int
    replication_index: int
    purpose_tag: int


def derive_stream(key: StreamKey) -> Generator:
    """Derive an independent pseudo-random stream from a key.

    A pure function: equal keys give bit-identical streams. SeedSequence
    hash-mixes the master seed with the (replication, purpose) spawn key,
    and Philox streams with distinct keys are independent by construction.
    """
    if not 0 <= key.master_seed < 2**64:
        raise ValueError(f"master seed must be in [0, 2^64), got {key.master_seed}")
    if not 0 <= key.replication_index < 2**32:
        raise ValueError(f"replication index must be in [0, 2^32), got {key.replication_index}")
    if not 0 <= key.purpose_tag < 2**32:
        raise ValueError(f"purpose tag must be in [0, 2^32), got {key.purpose_tag}")
    ss = SeedSequence(entropy=key.master_seed, spawn_key=(key.replication_index, key.purpose_tag))
    return Generator(Philox(ss))


def sample_arm(dist: OrdinalDistribution, n: int, stream: Generator) -> ArmCounts:
    """Draw ``n`` independent patients from ``dist`` and tally per category.

    Inverse-CDF sampling over the cumulative probability vector; consumes
    exactly ``n`` uniforms from ``stream``.
    """
    if n < 0:
        raise ValueError(f"sample size must be >= 0, got {n}")
    cum = np.cumsum(np.asarray(dist.probs, dtype=np.float64))
    cum[-1] = 1.0  # guard the inverse CDF against round-off at the top end
    u = stream.random(n)
    categories = np.searchsorted(cum, u, side="right")
    counts = np.bincount(categories, minlength=dist.k)
    return ArmCounts(counts=counts.astype(np.int64), n=n)
