import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trialsim.sampling import (
    GENERATOR_ID,
    TAG_FISHER_MC,
    TAG_H0_SAMPLING,
    TAG_H1_SAMPLING,
    StreamKey,
    derive_stream,
    error_injection_tag,
    sample_arm,
)
from trialsim.special import chi_square_sf
from trialsim.trial import OrdinalDistribution

DOOR_CONTROL = OrdinalDistribution((0.265, 0.275, 0.247, 0.151, 0.020, 0.042))


class TestDeriveStream:
    def test_equal_keys_give_identical_streams(self):
        key = StreamKey(master_seed=987654321, replication_index=17, purpose_tag=TAG_H1_SAMPLING)
        first = derive_stream(key).random(1000)
        second = derive_stream(key).random(1000)
        assert (first == second).all()

    def test_replication_index_changes_stream(self):
        base = StreamKey(11, 0, TAG_H1_SAMPLING)
        other = StreamKey(11, 1, TAG_H1_SAMPLING)
        assert not (derive_stream(base).random(100) == derive_stream(other).random(100)).all()

    def test_purpose_tag_changes_stream(self):
        base = StreamKey(11, 0, TAG_H0_SAMPLING)
        other = StreamKey(11, 0, TAG_FISHER_MC)
        assert not (derive_stream(base).random(100) == derive_stream(other).random(100)).all()

    def test_master_seed_changes_stream(self):
        assert not (
            derive_stream(StreamKey(1, 0, 0)).random(100) == derive_stream(StreamKey(2, 0, 0)).random(100)
        ).all()

    def test_bounds_checked(self):
        with pytest.raises(ValueError):
            derive_stream(StreamKey(-1, 0, 0))
        with pytest.raises(ValueError):
            derive_stream(StreamKey(0, 2**32, 0))

    def test_error_injection_tags_never_collide_with_base_tags(self):
        tags = {error_injection_tag(c) for c in range(1000)}
        assert not tags & {TAG_H1_SAMPLING, TAG_H0_SAMPLING, TAG_FISHER_MC}
        assert len(tags) == 1000

    def test_generator_identity_recorded(self):
        assert "hilox" in GENERATOR_ID or "Philox" in GENERATOR_ID


class TestSampleArm:
    def test_empty_sample(self):
        counts = sample_arm(DOOR_CONTROL, 0, derive_stream(StreamKey(1, 0, 0)))
        assert counts.n == 0
        assert (counts.counts == 0).all()

    def test_degenerate_distribution(self):
        dist = OrdinalDistribution((1.0, 0.0, 0.0))
        counts = sample_arm(dist, 7, derive_stream(StreamKey(1, 0, 0)))
        assert counts.counts.tolist() == [7, 0, 0]

    def test_empirical_frequencies_within_binomial_bound(self):
        n = 100_000
        counts = sample_arm(DOOR_CONTROL, n, derive_stream(StreamKey(2024, 0, TAG_H1_SAMPLING)))
        assert counts.counts.sum() == n
        for p, c in zip(DOOR_CONTROL.probs, counts.counts):
            bound = 3.0 * math.sqrt(p * (1.0 - p) / n)
            assert abs(c / n - p) <= bound

    @given(
        probs=st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=8),
        n=st.integers(min_value=0, max_value=500),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    @settings(max_examples=60, deadline=None)
    def test_counts_sum_to_n(self, probs, n, seed):
        total = sum(probs)
        dist = OrdinalDistribution([p / total for p in probs])
        counts = sample_arm(dist, n, derive_stream(StreamKey(seed, 0, 0)))
        assert counts.counts.sum() == n
        assert (counts.counts >= 0).all()

    def test_goodness_of_fit_fixed_seed_suite(self):
        # chi-square GOF on 1e5 draws must not reject at alpha = 0.001
        n = 100_000
        for seed in (1, 7, 2024, 999983):
            counts = sample_arm(DOOR_CONTROL, n, derive_stream(StreamKey(seed, 0, TAG_H1_SAMPLING)))
            expected = np.array(DOOR_CONTROL.probs) * n
            stat = float(((counts.counts - expected) ** 2 / expected).sum())
            p = chi_square_sf(stat, DOOR_CONTROL.k - 1)
            assert p > 0.001, f"seed {seed}: GOF rejected (stat={stat:.2f}, p={p:.5f})"

    def test_zero_probability_category_never_sampled(self):
        dist = OrdinalDistribution((0.0, 0.5, 0.5))
        counts = sample_arm(dist, 10_000, derive_stream(StreamKey(5, 0, 0)))
        assert counts.counts[0] == 0
