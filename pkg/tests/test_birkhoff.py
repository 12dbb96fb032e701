import math

import numpy as np
import pytest

import oracles
from rdsmc.birkhoff import (
    birkhoff_decompose,
    dual_measure,
    ep_upper_bound,
    require_doubly_stochastic,
)
from rdsmc.core import DeterministicMap, StochasticMatrix, ValidationError
from rdsmc.entropy import ep_rate, metric_entropy_mc
from rdsmc.rds import RDSMeasure, induce_markov, rds_metric_entropy

THREE_CYCLE = DeterministicMap((1, 2, 0))


def invertible_fixture(rng, n, pairs=2, symmetrize=False):
    support = oracles.random_invertible_measure(rng, n, pairs)
    q = RDSMeasure.from_pairs(
        (DeterministicMap(img), w) for img, w in support
    )
    if symmetrize:
        q = RDSMeasure.from_pairs(
            [(a, w / 2.0) for a, w in q.support()]
            + [(a.inverse(), w / 2.0) for a, w in q.support()]
        )
    return q


class TestDecompose:
    def test_permutation_vertex(self):
        m = np.zeros((3, 3))
        m[np.arange(3), [1, 2, 0]] = 1.0
        q = birkhoff_decompose(StochasticMatrix(m))
        assert list(q.support()) == [(THREE_CYCLE, 1.0)]

    def test_fair_coin(self, fair_matrix):
        q = birkhoff_decompose(fair_matrix)
        got = {a.image: w for a, w in q.support()}
        assert got == {(0, 1): pytest.approx(0.5), (1, 0): pytest.approx(0.5)}

    def test_sinkhorn_round_trip(self):
        rng = np.random.default_rng(81)
        for n in (2, 3, 4, 5):
            m = oracles.sinkhorn_doubly_stochastic(rng, n)
            q = birkhoff_decompose(StochasticMatrix(m))
            assert all(a.is_permutation for a in q.maps)
            assert sum(q.weights) == pytest.approx(1.0, abs=1e-12)
            assert len(q.maps) <= (n - 1) ** 2 + 1
            back = induce_markov(q)
            assert np.max(np.abs(back.m - m)) < 1e-10

    def test_not_doubly_stochastic_rejected(self, two_state):
        with pytest.raises(ValidationError):
            require_doubly_stochastic(two_state)
        with pytest.raises(ValidationError):
            birkhoff_decompose(two_state)


class TestDualMeasure:
    def test_involution_fixed(self, fair_matrix):
        q = birkhoff_decompose(fair_matrix)  # identity and swap: self-inverse
        dual = dual_measure(q)
        assert dict(dual.support()) == dict(q.support())

    def test_three_cycle_inverts(self):
        q = RDSMeasure.from_pairs([(THREE_CYCLE, 1.0)])
        dual = dual_measure(q)
        assert list(dual.support()) == [(DeterministicMap((2, 0, 1)), 1.0)]

    def test_transpose_identity(self):
        rng = np.random.default_rng(82)
        for _ in range(10):
            q = invertible_fixture(rng, 3)
            dual = dual_measure(q)
            lhs = induce_markov(dual).m
            rhs = induce_markov(q).m.T
            assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_dual_of_dual(self):
        rng = np.random.default_rng(83)
        q = invertible_fixture(rng, 4)
        twice = dual_measure(dual_measure(q))
        assert dict(twice.support()) == dict(q.support())

    def test_non_invertible_rejected(self):
        q = RDSMeasure.from_pairs([(DeterministicMap((0, 0)), 1.0)])
        with pytest.raises(ValidationError):
            dual_measure(q)


class TestEpUpperBound:
    def test_self_dual_zero_and_chain_balanced(self, fair_matrix):
        q = birkhoff_decompose(fair_matrix)
        assert ep_upper_bound(q) == 0.0
        assert ep_rate(induce_markov(q)).ep_rate == pytest.approx(0.0, abs=1e-12)

    def test_point_mass_infinite(self):
        q = RDSMeasure.from_pairs([(THREE_CYCLE, 1.0)])
        assert ep_upper_bound(q) == math.inf
        assert induce_markov(q).m[0, 1] == 1.0  # still a permutation chain

    def test_biased_three_cycle_value(self):
        q = RDSMeasure.from_pairs(
            [(THREE_CYCLE, 0.9), (THREE_CYCLE.inverse(), 0.1)]
        )
        bound = ep_upper_bound(q)
        assert bound == pytest.approx(0.8 * math.log(9.0), abs=1e-12)
        ep = ep_rate(induce_markov(q)).ep_rate
        assert ep <= bound + 1e-9

    def test_bound_dominates_ep(self):
        rng = np.random.default_rng(84)
        for _ in range(20):
            q = invertible_fixture(rng, int(rng.integers(2, 6)))
            m = induce_markov(q)
            assert m.is_doubly_stochastic
            ep = ep_rate(m).ep_rate
            assert ep <= ep_upper_bound(q) + 1e-9

    def test_equality_when_self_dual(self):
        rng = np.random.default_rng(85)
        for _ in range(10):
            q = invertible_fixture(rng, 4, symmetrize=True)
            assert ep_upper_bound(q) == pytest.approx(0.0, abs=1e-12)
            ep = ep_rate(induce_markov(q)).ep_rate
            assert ep == pytest.approx(0.0, abs=1e-9)

    def test_rds_entropy_dominates_chain(self):
        rng = np.random.default_rng(86)
        for _ in range(10):
            q = invertible_fixture(rng, 4)
            m = induce_markov(q)
            assert rds_metric_entropy(q) >= metric_entropy_mc(m) - 1e-10
