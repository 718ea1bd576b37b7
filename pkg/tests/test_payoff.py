import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wiretap.payoff import (
    InfeasibleRateError,
    SourceAux,
    ValueMatrix,
    bayes_risk,
    erasure_aux,
    hamming_payoff_fn,
    optimize_secrecy_payoff,
    payoff_given_aux,
    secrecy_payoff_curve,
    secrecy_payoff_fn,
    unconditional_payoff,
)
from wiretap.probcore import Channel, DistributionError, FiniteDistribution, entropy

HAM2 = ValueMatrix.hamming(2)
SMALL = (8, 150)


def grid_optimum(source, v, rate, steps=81):
    # exhaustive search over binary-output P_{U|S} for a binary source
    best = 0.0
    ts = np.linspace(0, 1, steps)
    for a, b in itertools.product(ts, ts):
        aux = SourceAux(source, Channel(np.array([[a, 1 - a], [b, 1 - b]])))
        if aux.equivocation() <= rate:
            best = max(best, payoff_given_aux(aux, v))
    return best


class TestValueMatrix:
    def test_hamming(self):
        v = ValueMatrix.hamming(3)
        assert v.values.tolist() == [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
        assert v.is_hamming() and v.max_value == 1.0

    def test_negative_rejected(self):
        with pytest.raises(DistributionError):
            ValueMatrix(np.array([[0.0, -1.0], [1.0, 0.0]]))

    def test_non_square_is_not_hamming(self):
        assert not ValueMatrix(np.array([[0.0, 1.0, 0.5], [1.0, 0.0, 0.5]])).is_hamming()


class TestPayoffs:
    def test_unconditional(self):
        assert unconditional_payoff(FiniteDistribution.bernoulli(0.5), HAM2) == 0.5
        assert unconditional_payoff(FiniteDistribution.point(2, 0), HAM2) == 0.0
        assert unconditional_payoff(FiniteDistribution.bernoulli(0.3), HAM2) == pytest.approx(0.3)

    def test_aux_equal_to_source(self):
        aux = SourceAux(FiniteDistribution.bernoulli(0.4), Channel.identity(2))
        assert payoff_given_aux(aux, HAM2) == 0.0

    def test_independent_aux_is_useless(self):
        src = FiniteDistribution.bernoulli(0.3)
        aux = SourceAux(src, Channel.constant(2, FiniteDistribution.uniform(3)))
        assert payoff_given_aux(aux, HAM2) == pytest.approx(unconditional_payoff(src, HAM2))

    def test_aux_through_bsc(self):
        aux = SourceAux(FiniteDistribution.bernoulli(0.5), Channel.bsc(0.2))
        assert payoff_given_aux(aux, HAM2) == pytest.approx(0.2)

    def test_bayes_ties_go_to_lowest_action(self):
        _, actions = bayes_risk(np.array([[0.25, 0.25], [0.25, 0.25]]), HAM2.values)
        assert actions.tolist() == [0, 0]

    def test_size_mismatch(self):
        with pytest.raises(DistributionError):
            unconditional_payoff(FiniteDistribution.uniform(3), HAM2)

    def test_aux_input_size_checked(self):
        with pytest.raises(DistributionError):
            SourceAux(FiniteDistribution.uniform(3), Channel.bsc(0.1))


class TestHammingClosedForm:
    @pytest.mark.parametrize(
        "p, rate, expected",
        [(0.5, 0.0, 0.0), (0.5, 1.0, 0.5), (0.5, 0.5, 0.25), (0.1, 1.0, 0.1), (0.3, 0.2, 0.1)],
    )
    def test_binary_values(self, p, rate, expected):
        assert hamming_payoff_fn(FiniteDistribution.bernoulli(p), rate) == pytest.approx(expected)

    def test_ternary_segments(self):
        src = FiniteDistribution.uniform(3)
        assert hamming_payoff_fn(src, 1.0) == pytest.approx(0.5)
        assert hamming_payoff_fn(src, math.log2(3)) == pytest.approx(2 / 3)
        mid = 0.5 * (1 + math.log2(3))
        assert hamming_payoff_fn(src, mid) == pytest.approx(0.5 * (0.5 + 2 / 3))

    def test_negative_rate(self):
        with pytest.raises(ValueError):
            hamming_payoff_fn(FiniteDistribution.uniform(2), -0.1)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.01, 0.99), st.floats(0, 2), st.floats(0, 2))
    def test_concave(self, p, r1, r2):
        src = FiniteDistribution.bernoulli(p)
        mid = hamming_payoff_fn(src, 0.5 * (r1 + r2))
        avg = 0.5 * (hamming_payoff_fn(src, r1) + hamming_payoff_fn(src, r2))
        assert mid >= avg - 1e-12


class TestErasureAux:
    @pytest.mark.parametrize("p", [0.5, 0.3, 0.1, 0.8])
    @pytest.mark.parametrize("frac", [0.0, 0.2, 0.5, 0.9, 1.0])
    def test_attains_closed_form(self, p, frac):
        src = FiniteDistribution.bernoulli(p)
        rate = frac * entropy(src)
        aux = erasure_aux(src, rate)
        assert aux.equivocation() == pytest.approx(rate, abs=1e-9)
        assert payoff_given_aux(aux, HAM2) == pytest.approx(hamming_payoff_fn(src, rate), abs=1e-9)

    def test_rate_above_entropy(self):
        with pytest.raises(InfeasibleRateError):
            erasure_aux(FiniteDistribution.bernoulli(0.1), 0.9)


class TestSecrecySearch:
    def test_rate_zero(self):
        src = FiniteDistribution.bernoulli(0.3)
        assert secrecy_payoff_fn(src, HAM2, 0.0, search_budget=SMALL) == pytest.approx(0.0, abs=1e-9)

    def test_full_equivocation(self):
        src = FiniteDistribution.bernoulli(0.3)
        val = secrecy_payoff_fn(src, HAM2, entropy(src), search_budget=SMALL)
        assert val == pytest.approx(unconditional_payoff(src, HAM2), abs=1e-9)

    def test_feasibility_is_certified(self):
        src = FiniteDistribution.bernoulli(0.4)
        res = optimize_secrecy_payoff(src, HAM2, 0.6, restarts=4, iterations=50)
        assert res.equivocation <= 0.6 + 1e-12
        assert res.payoff == pytest.approx(payoff_given_aux(res.aux, HAM2))

    @pytest.mark.parametrize("rate", [0.2, 0.5, 0.8])
    def test_matches_hamming_closed_form(self, rate):
        src = FiniteDistribution.bernoulli(0.5)
        val = secrecy_payoff_fn(src, HAM2, rate, search_budget=SMALL)
        assert val == pytest.approx(hamming_payoff_fn(src, rate), abs=1e-3)

    def test_ternary_hamming(self):
        src = FiniteDistribution.uniform(3)
        val = secrecy_payoff_fn(src, ValueMatrix.hamming(3), 1.2, search_budget=(16, 300))
        assert val == pytest.approx(hamming_payoff_fn(src, 1.2), abs=1e-3)

    def test_general_value_matrix_against_grid(self):
        src = FiniteDistribution.bernoulli(0.35)
        v = ValueMatrix(np.array([[0.0, 2.0, 0.6], [1.0, 0.0, 0.5]]))
        for rate in (0.3, 0.7):
            val = secrecy_payoff_fn(src, v, rate, search_budget=(16, 300))
            assert val >= grid_optimum(src, v, rate) - 1e-3
            assert val <= unconditional_payoff(src, v) + 1e-12

    def test_curve_monotone_and_order_preserved(self):
        src = FiniteDistribution.bernoulli(0.2)
        rates = [0.6, 0.0, 0.3, 0.7]
        vals = secrecy_payoff_curve(src, HAM2, rates, search_budget=SMALL)
        by_rate = [v for _, v in sorted(zip(rates, vals))]
        assert all(b >= a for a, b in zip(by_rate, by_rate[1:]))
        assert vals[1] == pytest.approx(0.0, abs=1e-9)

    def test_deterministic(self):
        src = FiniteDistribution.bernoulli(0.3)
        a = secrecy_payoff_fn(src, HAM2, 0.4, search_budget=SMALL, seed=5)
        b = secrecy_payoff_fn(src, HAM2, 0.4, search_budget=SMALL, seed=5)
        assert a == b

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_conditioning_never_helps_the_system(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(2, 5))
        src = FiniteDistribution(rng.dirichlet(np.ones(k)))
        v = ValueMatrix(rng.random((k, 3)))
        aux = SourceAux(src, Channel(rng.dirichlet(np.ones(4), size=k)))
        assert payoff_given_aux(aux, v) <= unconditional_payoff(src, v) + 1e-12
