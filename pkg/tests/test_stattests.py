import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trialsim.sampling import StreamKey, TAG_FISHER_MC, derive_stream, sample_arm
from trialsim.special import log_choose
from trialsim.stattests import (
    FISHER_MC_TABLES,
    PROB_SLACK,
    _fisher_mc,
    chi_square,
    dichotomized_chi_square,
    fisher_exact,
    mann_whitney,
)
from trialsim.trial import ArmCounts, OrdinalDistribution

arm = ArmCounts.from_counts


def stream(seed=1, rep=0):
    return derive_stream(StreamKey(seed, rep, TAG_FISHER_MC))


counts_tables = st.tuples(
    st.lists(st.integers(min_value=0, max_value=30), min_size=2, max_size=6),
    st.lists(st.integers(min_value=0, max_value=30), min_size=2, max_size=6),
).filter(lambda ab: len(ab[0]) == len(ab[1]) and sum(ab[0]) > 0 and sum(ab[1]) > 0)


def equal_length_tables(max_k=6, max_count=30):
    return st.integers(min_value=2, max_value=max_k).flatmap(
        lambda k: st.tuples(
            st.lists(st.integers(min_value=0, max_value=max_count), min_size=k, max_size=k),
            st.lists(st.integers(min_value=0, max_value=max_count), min_size=k, max_size=k),
        )
    ).filter(lambda ab: sum(ab[0]) > 0 and sum(ab[1]) > 0)


class TestMannWhitney:
    def test_identical_arms(self):
        result = mann_whitney(arm([5, 5, 5]), arm([5, 5, 5]))
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_hand_computed_two_by_two(self):
        # a = (2, 0), b = (0, 2): combined ties t = (2, 2), midranks (1.5, 3.5)
        # R_a = 2 * 1.5 = 3, U = R_a - n_a(n_a+1)/2 = 3 - 3 = 0
        # Var(U) = (2*2/12) * [(4+1) - ((2^3-2)+(2^3-2)) / (4*3)] = (1/3) * (5 - 1) = 4/3
        # z = (0 - 2) / sqrt(4/3) = -sqrt(3) = -1.7320508
        # p = 2 * Phi(-sqrt(3)) = erfc(sqrt(3/2)) = 0.0832645...
        result = mann_whitney(arm([2, 0]), arm([0, 2]))
        assert result.statistic == pytest.approx(-math.sqrt(3.0), abs=1e-12)
        expected_p = math.erfc(math.sqrt(1.5))
        assert result.p_value == pytest.approx(expected_p, abs=1e-12)
        assert result.p_value == pytest.approx(0.0833, abs=5e-5)

    def test_zero_variance_guard(self):
        result = mann_whitney(arm([4, 0, 0]), arm([6, 0, 0]))
        assert result.p_value == 1.0

    def test_empty_arm_not_estimable(self):
        result = mann_whitney(arm([0, 0]), arm([3, 3]))
        assert result.status == "not_estimable"
        assert result.p_value is None

    def test_matches_exact_permutation_enumeration_without_ties(self):
        # Exhaustive check against the exact permutation test for every
        # tie-free configuration with 2 <= n_a, n_b <= 6. The worst-case
        # approximation gap of the (continuity-uncorrected) normal p was
        # measured by this very enumeration: in the decision-relevant tail
        # (exact p <= 0.25) it is 0.052 once both arms have >= 4
        # observations and 0.117 for the tiniest arms; mid-range p values
        # are coarser (worst 0.237 at n_a=2, n_b=3).
        for n_a in range(2, 7):
            for n_b in range(n_a, 7):
                n = n_a + n_b
                mu = n_a * n_b / 2.0
                exact_tail = {}
                u_counts = {}
                n_perm = 0
                for chosen in itertools.combinations(range(n), n_a):
                    rest = set(range(n)) - set(chosen)
                    u = sum(1 for ra in chosen for rb in rest if ra > rb)
                    u_counts[u] = u_counts.get(u, 0) + 1
                    n_perm += 1
                for u_obs in u_counts:
                    exact_tail[u_obs] = (
                        sum(c for u, c in u_counts.items() if abs(u - mu) >= abs(u_obs - mu)) / n_perm
                    )
                for chosen in itertools.combinations(range(n), n_a):
                    ca = [1 if i in chosen else 0 for i in range(n)]
                    cb = [1 - c for c in ca]
                    rest = set(range(n)) - set(chosen)
                    u_obs = sum(1 for ra in chosen for rb in rest if ra > rb)
                    exact_p = exact_tail[u_obs]
                    approx = mann_whitney(arm(ca), arm(cb)).p_value
                    if exact_p <= 0.25:
                        bound = 0.052 if min(n_a, n_b) >= 4 else 0.12
                        assert abs(approx - exact_p) <= bound, (n_a, n_b, u_obs, exact_p, approx)
                    assert abs(approx - exact_p) <= 0.24, (n_a, n_b, u_obs, exact_p, approx)


class TestChiSquare:
    def test_hand_computed_two_by_two(self):
        # rows (30, 30), cols (30, 30), N = 60, all E = 15, stat = 4 * 25/15 = 20/3
        result = chi_square(arm([10, 20]), arm([20, 10]))
        assert result.statistic == pytest.approx(20.0 / 3.0, rel=1e-12)
        assert result.p_value == pytest.approx(math.erfc(math.sqrt(10.0 / 3.0)), rel=1e-10)
        assert result.p_value == pytest.approx(0.00982, abs=5e-6)

    def test_proportional_rows(self):
        result = chi_square(arm([30, 30]), arm([10, 10]))
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_empty_category_dropped(self):
        result = chi_square(arm([5, 0, 5]), arm([5, 0, 5]))
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_single_category_not_estimable(self):
        result = chi_square(arm([5, 0]), arm([7, 0]))
        assert result.status == "not_estimable"

    def test_low_expected_count_flag(self):
        assert chi_square(arm([2, 2]), arm([2, 2])).low_expected_count is True
        assert chi_square(arm([50, 50]), arm([50, 50])).low_expected_count is False


class TestFisherExact:
    def test_hand_computed_two_by_two(self):
        # margins (4, 4) x (4, 4): P(a1=k) = C(4,k) C(4,4-k) / C(8,4), C(8,4) = 70
        # table probs (1, 16, 36, 16, 1)/70; observed a1 = 3 -> P = 16/70
        # two-sided p = (1 + 16 + 16 + 1)/70 = 34/70
        result = fisher_exact(arm([3, 1]), arm([1, 3]))
        assert result.p_value == pytest.approx(34.0 / 70.0, abs=1e-12)

    def test_degenerate_margin_single_table(self):
        result = fisher_exact(arm([4, 0]), arm([4, 0]))
        assert result.p_value == 1.0

    def test_enumeration_sums_to_one(self):
        # full hypergeometric support must sum to 1 within 1e-12
        for n_a, n_b, c1 in [(4, 4, 4), (10, 15, 7), (30, 20, 22), (100, 100, 53)]:
            total = n_a + n_b
            lo = max(0, c1 - n_b)
            hi = min(c1, n_a)
            mass = math.fsum(
                math.exp(
                    log_choose(c1, x) + log_choose(total - c1, n_a - x) - log_choose(total, n_a)
                )
                for x in range(lo, hi + 1)
            )
            assert mass == pytest.approx(1.0, abs=1e-12)

    def test_monte_carlo_agrees_with_exact_2x2(self):
        a, b = arm([12, 8]), arm([5, 15])
        exact = fisher_exact(a, b).p_value
        mc = _fisher_mc(a.counts, b.counts, stream(seed=99))
        se = math.sqrt(exact * (1 - exact) / FISHER_MC_TABLES)
        assert abs(mc - exact) <= 3 * se + 2.0 / (FISHER_MC_TABLES + 1)

    def test_monte_carlo_agrees_with_full_enumeration_2x3(self):
        ca = np.array([2, 2, 1])
        cb = np.array([1, 0, 4])
        cols = ca + cb
        n_a = int(ca.sum())
        total = int(cols.sum())

        def log_p(row_a):
            lp = -log_choose(total, n_a)
            for c, x in zip(cols, row_a):
                lp += log_choose(int(c), int(x))
            return lp

        observed = log_p(ca) + math.log1p(PROB_SLACK)
        exact = 0.0
        for x1 in range(min(cols[0], n_a) + 1):
            for x2 in range(min(cols[1], n_a - x1) + 1):
                x3 = n_a - x1 - x2
                if 0 <= x3 <= cols[2]:
                    lp = log_p([x1, x2, x3])
                    if lp <= observed:
                        exact += math.exp(lp)
        mc = fisher_exact(ArmCounts.from_counts(ca), ArmCounts.from_counts(cb), stream(seed=7)).p_value
        se = math.sqrt(exact * (1 - exact) / FISHER_MC_TABLES)
        assert abs(mc - exact) <= 3 * se + 2.0 / (FISHER_MC_TABLES + 1)

    def test_requires_stream_beyond_2x2(self):
        with pytest.raises(ValueError, match="stream"):
            fisher_exact(arm([2, 2, 1]), arm([1, 2, 2]))

    def test_monte_carlo_deterministic_given_stream_key(self):
        a, b = arm([4, 3, 3]), arm([2, 5, 3])
        p1 = fisher_exact(a, b, stream(seed=5, rep=3)).p_value
        p2 = fisher_exact(a, b, stream(seed=5, rep=3)).p_value
        assert p1 == p2


class TestDichotomized:
    def test_collapse_definition(self):
        direct = dichotomized_chi_square(arm([10, 20, 30]), arm([30, 20, 10]), cut=1)
        collapsed = chi_square(arm([10, 50]), arm([30, 30]))
        assert direct.p_value == collapsed.p_value
        assert direct.statistic == collapsed.statistic
        assert direct.test_id == "dichotomized_chi_square"

    def test_identical_arms(self):
        for cut in (1, 2):
            assert dichotomized_chi_square(arm([5, 5, 5]), arm([5, 5, 5]), cut).p_value == 1.0

    def test_sampled_fixture_matches_manual_collapse(self):
        control = OrdinalDistribution((0.265, 0.275, 0.247, 0.151, 0.020, 0.042))
        intervention = OrdinalDistribution((0.475, 0.180, 0.150, 0.137, 0.018, 0.040))
        s = derive_stream(StreamKey(20260809, 0, 0))
        a = sample_arm(control, 200, s)
        b = sample_arm(intervention, 200, s)
        direct = dichotomized_chi_square(a, b, cut=1)
        manual = chi_square(
            arm([int(a.counts[0]), int(a.counts[1:].sum())]),
            arm([int(b.counts[0]), int(b.counts[1:].sum())]),
        )
        assert direct.p_value == manual.p_value

    def test_cut_bounds(self):
        with pytest.raises(ValueError):
            dichotomized_chi_square(arm([1, 2, 3]), arm([3, 2, 1]), cut=3)


class TestInvariants:
    @given(equal_length_tables())
    @settings(max_examples=80, deadline=None)
    def test_p_values_in_unit_interval_and_arm_swap_symmetry(self, table):
        ca, cb = table
        a, b = arm(ca), arm(cb)
        for test in (mann_whitney, chi_square):
            forward = test(a, b)
            backward = test(b, a)
            assert forward.status == backward.status
            if forward.ok:
                assert 0.0 <= forward.p_value <= 1.0
                assert forward.p_value == pytest.approx(backward.p_value, abs=1e-12)

    @given(equal_length_tables(max_k=2, max_count=25))
    @settings(max_examples=60, deadline=None)
    def test_fisher_2x2_arm_swap_symmetry(self, table):
        ca, cb = table
        forward = fisher_exact(arm(ca), arm(cb))
        backward = fisher_exact(arm(cb), arm(ca))
        assert forward.p_value == pytest.approx(backward.p_value, abs=1e-12)
        assert 0.0 <= forward.p_value <= 1.0

    @given(equal_length_tables())
    @settings(max_examples=80, deadline=None)
    def test_category_reversal_symmetry(self, table):
        ca, cb = table
        a, b = arm(ca), arm(cb)
        a_rev, b_rev = arm(ca[::-1]), arm(cb[::-1])
        for test in (mann_whitney, chi_square):
            forward = test(a, b)
            reversed_ = test(a_rev, b_rev)
            assert forward.status == reversed_.status
            if forward.ok:
                assert forward.p_value == pytest.approx(reversed_.p_value, abs=1e-12)

    @given(equal_length_tables(max_k=2, max_count=25))
    @settings(max_examples=40, deadline=None)
    def test_fisher_2x2_category_reversal(self, table):
        ca, cb = table
        forward = fisher_exact(arm(ca), arm(cb))
        reversed_ = fisher_exact(arm(ca[::-1]), arm(cb[::-1]))
        assert forward.p_value == pytest.approx(reversed_.p_value, abs=1e-12)
