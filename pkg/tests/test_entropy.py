import math

import numpy as np
import pytest

import oracles
from rdsmc.core import (
    ReducibleChainError,
    StochasticMatrix,
    SupportAsymmetryError,
    ValidationError,
    point_mass,
    uniform_vector,
)
from rdsmc.entropy import (
    check_h_monotone,
    delta_s_decompose,
    ep_rate,
    ep_step,
    free_energy,
    hsk,
    linear_stationary,
    metric_entropy_mc,
    nonstationarity_gap,
    path_rel_entropy,
    rel_entropy,
    shannon,
    stationary,
    time_reversed,
)


def detailed_balanced_matrix(rng, n):
    """Row-normalize a symmetric positive flux matrix: always reversible."""
    f = rng.uniform(0.2, 1.0, size=(n, n))
    f = (f + f.T) / 2.0
    return f / f.sum(axis=1, keepdims=True)


BIRTH_DEATH = StochasticMatrix(
    [
        [0.5, 0.5, 0.0, 0.0],
        [0.3, 0.4, 0.3, 0.0],
        [0.0, 0.2, 0.5, 0.3],
        [0.0, 0.0, 0.6, 0.4],
    ]
)


class TestShannon:
    def test_point_mass(self):
        assert shannon(point_mass(5, 2)) == 0.0

    def test_uniform(self):
        assert shannon(uniform_vector(7)) == pytest.approx(math.log(7.0))

    def test_fair_coin(self):
        assert shannon([0.5, 0.5]) == pytest.approx(0.6931471805599453)

    def test_range(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            p = rng.dirichlet(np.ones(6))
            assert -1e-12 <= shannon(p) <= math.log(6.0) + 1e-12


class TestRelEntropy:
    def test_equal_is_zero(self):
        p = [0.3, 0.7]
        assert rel_entropy(p, p) == 0.0

    def test_point_vs_fair(self):
        assert rel_entropy([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2.0))

    def test_absolute_continuity_failure(self):
        assert rel_entropy([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_nonnegative(self):
        rng = np.random.default_rng(52)
        for _ in range(30):
            p = rng.dirichlet(np.ones(5))
            q = rng.dirichlet(np.ones(5))
            assert rel_entropy(p, q) >= -1e-12


class TestStationary:
    def test_two_routes_agree(self):
        rng = np.random.default_rng(53)
        for _ in range(20):
            m = oracles.random_ergodic_matrix(rng, int(rng.integers(2, 7)))
            pi = stationary(m)
            assert np.max(np.abs(pi - oracles.eig_stationary(m))) < 1e-9

    def test_reducible_rejected(self):
        with pytest.raises(ReducibleChainError):
            stationary([[1.0, 0.0], [0.5, 0.5]])

    def test_linear_route_alone(self, rotation3):
        pi = linear_stationary(rotation3)
        assert pi == pytest.approx(np.full(3, 1 / 3), abs=1e-12)


class TestHMonotone:
    def test_stationary_start_constant_zero(self, rotation3):
        seq = check_h_monotone(rotation3, uniform_vector(3), 10)
        assert np.max(np.abs(seq)) < 1e-12

    def test_fair_coin_one_step_mixing(self, fair_matrix):
        seq = check_h_monotone(fair_matrix, point_mass(2, 0), 4)
        assert seq[0] == pytest.approx(math.log(2.0), abs=1e-12)
        assert np.max(np.abs(seq[1:])) < 1e-12

    def test_non_increasing_random(self):
        rng = np.random.default_rng(54)
        for _ in range(20):
            m = oracles.random_ergodic_matrix(rng, 4)
            p0 = rng.dirichlet(np.ones(4))
            seq = check_h_monotone(m, p0, 50)
            assert np.all(np.diff(seq) <= 1e-12)
            assert seq[-1] < seq[0] + 1e-12

    def test_periodic_rejected(self):
        with pytest.raises(ReducibleChainError):
            check_h_monotone([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5], 3)


class TestDeltaS:
    def test_equilibrium_all_zero(self):
        rng = np.random.default_rng(55)
        m = detailed_balanced_matrix(rng, 4)
        pi = stationary(m)
        dec = delta_s_decompose(m, pi)
        assert abs(dec.delta_s) < 1e-12
        assert abs(dec.ep_term) < 1e-10
        assert abs(dec.heat_term) < 1e-10

    def test_ness_balance(self, rotation3):
        # stationary but irreversible: production exactly cancels heat
        pi = stationary(rotation3)
        dec = delta_s_decompose(rotation3, pi)
        assert abs(dec.delta_s) < 1e-12
        assert dec.ep_term > 0.1
        assert dec.ep_term == pytest.approx(-dec.heat_term, abs=1e-12)

    def test_identity_random(self):
        rng = np.random.default_rng(56)
        for _ in range(20):
            m = oracles.random_ergodic_matrix(rng, 3)
            p = rng.dirichlet(np.ones(3))
            dec = delta_s_decompose(m, p)
            assert dec.delta_s == pytest.approx(
                dec.ep_term + dec.heat_term, abs=1e-10
            )
            assert dec.ep_term >= -1e-10

    def test_support_asymmetry_rejected(self):
        with pytest.raises(SupportAsymmetryError):
            delta_s_decompose([[0.5, 0.5], [0.0, 1.0]], [0.5, 0.5])


class TestFreeEnergy:
    def test_zero_at_equilibrium(self, rotation3):
        assert free_energy(stationary(rotation3), rotation3) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_point_mass_uniform_pi(self, fair_matrix):
        assert free_energy(point_mass(2, 0), fair_matrix) == pytest.approx(
            math.log(2.0)
        )

    def test_equals_relative_entropy(self):
        rng = np.random.default_rng(57)
        for _ in range(15):
            m = oracles.random_ergodic_matrix(rng, 4)
            p = rng.dirichlet(np.ones(4))
            assert free_energy(p, m) == pytest.approx(
                rel_entropy(p, stationary(m)), abs=1e-10
            )


class TestHsk:
    def test_zero_horizon(self):
        p0 = [0.3, 0.7]
        assert hsk([[0.5, 0.5], [0.5, 0.5]], p0, 0) == pytest.approx(shannon(p0))

    def test_permutation_no_randomness(self):
        m = [[0.0, 1.0], [1.0, 0.0]]
        p0 = [0.3, 0.7]
        for t in range(4):
            assert hsk(m, p0, t) == pytest.approx(shannon(p0), abs=1e-12)

    def test_brute_force_16_paths(self, fair_matrix):
        p0 = np.array([0.6, 0.4])
        got = hsk(fair_matrix, p0, 3)
        want = oracles.hsk_brute(fair_matrix.m, p0, 3)
        assert got == pytest.approx(want, abs=1e-12)

    def test_brute_force_random(self):
        rng = np.random.default_rng(58)
        for _ in range(10):
            n = int(rng.integers(2, 4))
            m = oracles.random_ergodic_matrix(rng, n)
            p0 = rng.dirichlet(np.ones(n))
            t = int(rng.integers(0, 5))
            assert hsk(m, p0, t) == pytest.approx(
                oracles.hsk_brute(m, p0, t), abs=1e-9
            )


class TestMetricEntropy:
    def test_permutation_zero(self):
        assert metric_entropy_mc([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5]) == 0.0

    def test_fair_coin(self, fair_matrix):
        assert metric_entropy_mc(fair_matrix) == pytest.approx(math.log(2.0))

    def test_step_increment_converges(self):
        rng = np.random.default_rng(59)
        m = oracles.random_ergodic_matrix(rng, 3)
        p0 = rng.dirichlet(np.ones(3))
        inc = hsk(m, p0, 201) - hsk(m, p0, 200)
        assert abs(inc - metric_entropy_mc(m)) < 1e-6


class TestTimeReversed:
    def test_detailed_balance_self_adjoint(self):
        rng = np.random.default_rng(60)
        m = detailed_balanced_matrix(rng, 4)
        pi = stationary(m)
        rev = time_reversed(m, pi, pi)
        assert np.max(np.abs(rev.m - m)) < 1e-12

    def test_uniform_rotation_transpose(self, rotation3):
        pi = uniform_vector(3)
        rev = time_reversed(rotation3, pi, pi)
        assert np.max(np.abs(rev.m - rotation3.m.T)) < 1e-14

    def test_rows_sum_after_evolution(self):
        rng = np.random.default_rng(61)
        m = oracles.random_ergodic_matrix(rng, 4)
        p = np.asarray(uniform_vector(4))
        for _ in range(3):
            p_next = p @ m
            rev = time_reversed(m, p, p_next)  # constructor checks rows
            assert np.max(np.abs(rev.m.sum(axis=1) - 1.0)) < 1e-10
            p = p_next

    def test_zero_p_next_rejected(self, fair_matrix):
        with pytest.raises(ValidationError):
            time_reversed(fair_matrix, [0.5, 0.5], [1.0, 0.0])


class TestPathRelEntropy:
    def test_equilibrium_zero(self):
        rng = np.random.default_rng(62)
        m = detailed_balanced_matrix(rng, 3)
        pi = stationary(m)
        for t in (0, 1, 3, 7):
            assert path_rel_entropy(m, pi, t) == pytest.approx(0.0, abs=1e-10)

    def test_stationary_linear_in_t(self, rotation3):
        pi = stationary(rotation3)
        ep = ep_rate(rotation3).ep_rate
        for t in (1, 2, 5, 9):
            assert path_rel_entropy(rotation3, pi, t) == pytest.approx(
                t * ep, abs=t * 1e-10
            )

    def test_brute_force_27_paths(self, rotation3):
        p0 = uniform_vector(3)
        got = path_rel_entropy(rotation3, p0, 3)
        want = oracles.path_rel_entropy_brute(rotation3.m, np.asarray(p0), 3)
        assert got == pytest.approx(want, abs=1e-12)

    def test_brute_force_random(self):
        rng = np.random.default_rng(63)
        for _ in range(10):
            n = int(rng.integers(2, 4))
            m = oracles.random_ergodic_matrix(rng, n)
            p0 = rng.dirichlet(np.ones(n)) + 0.05
            p0 /= p0.sum()
            t = int(rng.integers(0, 5))
            assert path_rel_entropy(m, p0, t) == pytest.approx(
                oracles.path_rel_entropy_brute(m, p0, t), abs=1e-9
            )

    def test_nonnegative(self):
        rng = np.random.default_rng(64)
        m = oracles.random_ergodic_matrix(rng, 3)
        p0 = rng.dirichlet(np.ones(3)) + 0.1
        p0 /= p0.sum()
        assert path_rel_entropy(m, p0, 6) >= -1e-10


class TestEpRate:
    def test_reversible_zero(self):
        rep = ep_rate(BIRTH_DEATH)
        assert rep.ep_rate == pytest.approx(0.0, abs=1e-12)
        assert rep.detailed_balance

    def test_biased_rotation_closed_form(self, rotation3):
        rep = ep_rate(rotation3)
        assert rep.ep_rate == pytest.approx(math.log(2.0) / 3.0, abs=1e-12)
        assert not rep.detailed_balance
        assert rep.pi == pytest.approx(np.full(3, 1 / 3), abs=1e-12)

    def test_all_forms_agree(self):
        rng = np.random.default_rng(65)
        for _ in range(25):
            n = int(rng.integers(2, 7))
            m = oracles.random_ergodic_matrix(rng, n, sparsity=0.2)
            rep = ep_rate(m)
            forms = [
                rep.ep_rate,
                rep.flux_ratio_form,
                rep.reversal_form,
                rep.antisymmetric_form,
            ]
            assert max(forms) - min(forms) <= 1e-10
            assert rep.ep_rate >= -1e-10

    def test_zero_iff_detailed_balance(self):
        rng = np.random.default_rng(66)
        for _ in range(10):
            m = detailed_balanced_matrix(rng, 4)
            rep = ep_rate(m)
            assert rep.detailed_balance
            flux_gap = np.max(np.abs(rep.fluxes - rep.fluxes.T))
            assert flux_gap < 1e-10
        rep = ep_rate(oracles.random_ergodic_matrix(rng, 4))
        if not rep.detailed_balance:
            assert np.max(np.abs(rep.fluxes - rep.fluxes.T)) > 1e-10

    def test_support_asymmetry_rejected(self):
        with pytest.raises(SupportAsymmetryError):
            ep_rate([[0.5, 0.5], [0.0, 1.0]])


class TestEpStep:
    def test_stationary_start(self, rotation3):
        pi = stationary(rotation3)
        ep = ep_rate(rotation3).ep_rate
        for t in (0, 1, 5):
            assert ep_step(rotation3, pi, t) == pytest.approx(ep, abs=1e-12)

    def test_telescopes_path_entropy(self):
        rng = np.random.default_rng(67)
        m = oracles.random_ergodic_matrix(rng, 3)
        p0 = rng.dirichlet(np.ones(3)) + 0.1
        p0 /= p0.sum()
        for t in (0, 1, 3):
            diff = path_rel_entropy(m, p0, t + 1) - path_rel_entropy(m, p0, t)
            assert ep_step(m, p0, t) == pytest.approx(diff, abs=1e-10)

    def test_converges_to_ep(self):
        rng = np.random.default_rng(68)
        m = oracles.random_ergodic_matrix(rng, 4)
        p0 = np.asarray(uniform_vector(4))
        assert ep_step(m, p0, 200) == pytest.approx(
            ep_rate(m).ep_rate, abs=1e-6
        )


class TestNonstationarityGap:
    def test_zero_at_stationarity(self, rotation3):
        assert nonstationarity_gap(rotation3, stationary(rotation3)) == (
            pytest.approx(0.0, abs=1e-12)
        )

    def test_equals_h_drop(self):
        rng = np.random.default_rng(69)
        for _ in range(15):
            m = oracles.random_ergodic_matrix(rng, 4)
            p = rng.dirichlet(np.ones(4)) + 0.05
            p /= p.sum()
            pi = stationary(m)
            drop = rel_entropy(p, pi) - rel_entropy(p @ np.asarray(m), pi)
            assert nonstationarity_gap(m, p) == pytest.approx(drop, abs=1e-10)

    def test_monotone_decay(self):
        rng = np.random.default_rng(70)
        m = oracles.random_ergodic_matrix(rng, 3)
        p = np.array([0.9, 0.05, 0.05])
        gaps = []
        for _ in range(40):
            gaps.append(nonstationarity_gap(m, p))
            p = p @ np.asarray(m)
        assert all(g >= -1e-12 for g in gaps)
        assert gaps[-1] < 1e-8
