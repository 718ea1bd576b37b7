import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wiretap.probcore import (
    Channel,
    DistributionError,
    FiniteDistribution,
    JointDistribution,
    SizeGuardError,
    binary_entropy,
    bsc_convolve,
    check_size,
    conditional_entropy,
    entropy,
    kl_divergence,
    mutual_information,
    size_guard,
    total_variation,
)

mp.mp.dps = 40


def mp_h(q):
    q = mp.mpf(q)
    if q in (0, 1):
        return mp.mpf(0)
    return -(q * mp.log(q, 2) + (1 - q) * mp.log(1 - q, 2))


def pmf(rng, k):
    return rng.dirichlet(np.ones(k))


class TestDistributions:
    def test_bernoulli_puts_p_on_one(self):
        assert FiniteDistribution.bernoulli(0.3).probs.tolist() == pytest.approx([0.7, 0.3])

    @pytest.mark.parametrize("bad", [[0.5, 0.6], [-0.1, 1.1], [np.nan, 1.0], []])
    def test_rejects_non_pmf(self, bad):
        with pytest.raises(DistributionError):
            FiniteDistribution(np.array(bad))

    def test_probs_are_read_only(self):
        d = FiniteDistribution.uniform(3)
        with pytest.raises(ValueError):
            d.probs[0] = 1.0

    def test_channel_rows_must_sum_to_one(self):
        with pytest.raises(DistributionError):
            Channel(np.array([[0.5, 0.4], [0.0, 1.0]]))

    def test_cascade_of_bscs(self):
        c = Channel.bsc(0.1).then(Channel.bsc(0.2))
        assert c.rows[0, 1] == pytest.approx(0.1 * 0.8 + 0.9 * 0.2)

    def test_power_is_row_major_first_symbol_most_significant(self):
        c = Channel(np.array([[1.0, 0.0], [0.25, 0.75]]))
        c2 = c.power(2)
        # input 10 -> output 00 has probability P(0|1) P(0|0)
        assert c2.rows[2, 0] == pytest.approx(0.25)
        assert c2.rows[1, 0] == pytest.approx(0.25)
        assert c2.rows[3, 3] == pytest.approx(0.75**2)

    def test_output_distribution(self):
        out = Channel.bsc(0.3).output_distribution(FiniteDistribution.bernoulli(0.5))
        assert out.probs.tolist() == pytest.approx([0.5, 0.5])


class TestEntropy:
    def test_binary_entropy_against_mpmath(self):
        for q in (0.3, 0.11, 0.5, 1e-6):
            assert binary_entropy(q) == pytest.approx(float(mp_h(q)), abs=1e-14)

    def test_binary_entropy_known_value(self):
        assert binary_entropy(0.3) == pytest.approx(0.881290899230693, abs=1e-13)

    def test_entropy_of_point_mass_is_zero(self):
        assert entropy(FiniteDistribution.point(4, 2)) == 0.0

    def test_entropy_uniform(self):
        assert entropy(FiniteDistribution.uniform(8)) == pytest.approx(3.0)

    def test_bsc_convolve(self):
        assert bsc_convolve(0.1, 0.2) == pytest.approx(0.26)
        assert bsc_convolve(0.5, 0.3) == pytest.approx(0.5)

    def test_mutual_information_through_bsc(self):
        j = JointDistribution.from_channel(FiniteDistribution.uniform(2), Channel.bsc(0.11))
        expected = 1 - float(mp_h(0.11))
        assert mutual_information(j, 0, 1) == pytest.approx(expected, abs=1e-13)

    def test_conditional_entropy_chain_rule(self):
        rng = np.random.default_rng(3)
        j = JointDistribution(rng.dirichlet(np.ones(12)).reshape(3, 4))
        lhs = entropy(j.probs.ravel())
        rhs = entropy(j.marginal([0]).probs) + conditional_entropy(j, 1, [0])
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_conditional_mutual_information_zero_on_markov_chain(self):
        j = JointDistribution.from_channel(FiniteDistribution.bernoulli(0.2), Channel.bsc(0.1))
        j = j.extend(1, Channel.bsc(0.25))
        assert mutual_information(j, 0, 2, [1]) == pytest.approx(0.0, abs=1e-13)

    def test_overlapping_groups_rejected(self):
        j = JointDistribution(np.full((2, 2), 0.25))
        with pytest.raises(ValueError):
            mutual_information(j, [0], [0, 1])


class TestDivergences:
    def test_kl_against_mpmath(self):
        p, q = [0.3, 0.7], [0.5, 0.5]
        expected = sum(mp.mpf(a) * mp.log(mp.mpf(a) / mp.mpf(b), 2) for a, b in zip(p, q))
        assert kl_divergence(p, q) == pytest.approx(float(expected), abs=1e-14)
        assert kl_divergence(p, q) == pytest.approx(0.118709100769307, abs=1e-13)

    def test_kl_infinite_without_absolute_continuity(self):
        assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_kl_natural_base(self):
        assert kl_divergence([0.3, 0.7], [0.5, 0.5], base=math.e) == pytest.approx(
            0.118709100769307 * math.log(2)
        )

    def test_total_variation_is_half_l1(self):
        assert total_variation([0.2, 0.8], [0.5, 0.5]) == pytest.approx(0.3)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            total_variation([0.5, 0.5], [1.0, 0.0, 0.0])


class TestSizeGuard:
    def test_default(self, monkeypatch):
        monkeypatch.delenv("WIRETAP_SIZE_GUARD", raising=False)
        assert size_guard() == 2**26

    def test_env_override_and_report(self, monkeypatch):
        monkeypatch.setenv("WIRETAP_SIZE_GUARD", "100")
        with pytest.raises(SizeGuardError) as exc:
            check_size(101, "test table")
        assert exc.value.required == 101 and exc.value.limit == 100

    def test_joint_respects_guard(self, monkeypatch):
        monkeypatch.setenv("WIRETAP_SIZE_GUARD", "10")
        with pytest.raises(SizeGuardError):
            JointDistribution(np.full((4, 4), 1 / 16))

    def test_bad_env_value(self, monkeypatch):
        monkeypatch.setenv("WIRETAP_SIZE_GUARD", "lots")
        with pytest.raises(ValueError):
            size_guard()


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_pinsker_property(k, seed):
    rng = np.random.default_rng(seed)
    p, q = pmf(rng, k), pmf(rng, k)
    assert total_variation(p, q) <= math.sqrt(kl_divergence(p, q, base=math.e) / 2) + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**31 - 1))
def test_data_processing_property(kx, ky, seed):
    rng = np.random.default_rng(seed)
    j = JointDistribution.from_channel(
        FiniteDistribution(pmf(rng, kx)), Channel(rng.dirichlet(np.ones(ky), size=kx))
    ).extend(1, Channel(rng.dirichlet(np.ones(3), size=ky)))
    assert mutual_information(j, 0, 2) <= mutual_information(j, 0, 1) + 1e-12
    assert mutual_information(j, 0, 2, [1]) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_entropy_bounds_property(k, seed):
    p = pmf(np.random.default_rng(seed), k)
    assert -1e-12 <= entropy(p) <= math.log2(k) + 1e-12
