"""Tests for exact spin-glass thermodynamics and the disorder scaling."""

import math

import numpy as np
import pytest

from flucert.errors import DomainError, ShapeError, SizeError
from flucert.rng import seed_stream
from flucert.spin_glass import (
    SKDisorder,
    derivative_check,
    disorder_scale_eps,
    enumerate_energies,
    free_energy,
    hamiltonian,
    jensen_gap_check,
    result_from_energies,
    scale_disorder,
)


def random_disorder(n, seed):
    return SKDisorder(n, seed_stream(seed).standard_normal(n * (n - 1) // 2))


def naive_energies(dis):
    """Independent oracle: batch-matrix enumeration, no incremental updates."""
    n = dis.n
    mat = dis.coupling_matrix()
    configs = np.arange(1 << n)[:, None]
    spins = 1.0 - 2.0 * ((configs >> np.arange(n)) & 1)
    return 0.5 * np.einsum("ci,ij,cj->c", spins, mat, spins) / math.sqrt(n)


class TestDisorder:
    def test_shape_validation(self):
        with pytest.raises(ShapeError):
            SKDisorder(4, np.zeros(5))

    def test_matrix_symmetric_zero_diag(self):
        dis = random_disorder(5, 1)
        mat = dis.coupling_matrix()
        np.testing.assert_array_equal(mat, mat.T)
        np.testing.assert_array_equal(np.diag(mat), np.zeros(5))

    def test_csv_roundtrip(self, tmp_path):
        dis = random_disorder(6, 2)
        path = tmp_path / "disorder.csv"
        dis.to_csv(path)
        again = SKDisorder.from_csv(path, 6)
        np.testing.assert_allclose(again.couplings, dis.couplings)


class TestHamiltonian:
    def test_two_spins(self):
        dis = SKDisorder(2, np.array([1.0]))
        assert hamiltonian(dis, [1, 1]) == pytest.approx(1 / math.sqrt(2))

    def test_global_flip_invariance(self):
        dis = random_disorder(6, 3)
        sigma = np.sign(seed_stream(4).standard_normal(6))
        assert hamiltonian(dis, sigma) == pytest.approx(
            hamiltonian(dis, -sigma), abs=1e-12
        )

    def test_matches_direct_sum(self):
        dis = random_disorder(3, 5)
        sigma = np.array([1.0, -1.0, 1.0])
        g01, g02, g12 = dis.couplings
        direct = (
            g01 * sigma[0] * sigma[1]
            + g02 * sigma[0] * sigma[2]
            + g12 * sigma[1] * sigma[2]
        ) / math.sqrt(3)
        assert hamiltonian(dis, sigma) == pytest.approx(direct, abs=1e-12)

    def test_wrong_length(self):
        with pytest.raises(ShapeError):
            hamiltonian(random_disorder(4, 0), [1, -1, 1])


class TestEnumeration:
    @pytest.mark.parametrize("n", [2, 5, 8, 12])
    def test_gray_code_matches_naive(self, n):
        dis = random_disorder(n, 10 + n)
        np.testing.assert_allclose(
            enumerate_energies(dis), naive_energies(dis), atol=1e-10
        )

    def test_size_cap(self):
        with pytest.raises(SizeError):
            enumerate_energies(random_disorder(21, 0))


class TestFreeEnergy:
    def test_infinite_temperature(self):
        res = free_energy(random_disorder(7, 6), 0.0)
        assert res.free_energy == pytest.approx(7 * math.log(2), abs=1e-10)

    def test_two_spin_closed_form(self):
        dis = SKDisorder(2, np.array([1.0]))
        res = free_energy(dis, 1.0)
        assert res.free_energy == pytest.approx(
            math.log(4 * math.cosh(1 / math.sqrt(2))), abs=1e-12
        )

    def test_matches_naive_logsumexp(self):
        dis = random_disorder(10, 7)
        res = free_energy(dis, 1.3)
        energies = naive_energies(dis)
        shifted = 1.3 * energies
        expected = math.log(np.exp(shifted - shifted.max()).sum()) + shifted.max()
        assert res.free_energy == pytest.approx(expected, abs=1e-10)

    def test_free_energy_lower_bounds(self):
        dis = random_disorder(9, 8)
        for beta in (0.0, 0.7, 1.5):
            res = free_energy(dis, beta)
            energies = enumerate_energies(dis)
            assert res.free_energy >= 9 * math.log(2) + beta * energies.min() - 1e-9
            assert res.free_energy >= beta * res.ground_state - 1e-9

    def test_convex_in_beta(self):
        dis = random_disorder(10, 9)
        energies = enumerate_energies(dis)
        betas = [0.0, 0.5, 1.0, 1.5, 2.0]
        values = [result_from_energies(energies, b).free_energy for b in betas]
        second = np.diff(values, 2)
        assert np.all(second >= -1e-8)

    def test_gibbs_average_zero_at_infinite_temperature(self):
        dis = random_disorder(8, 11)
        res = free_energy(dis, 0.0)
        assert res.gibbs_energy == pytest.approx(0.0, abs=1e-10)

    def test_spin_relabeling_invariance(self):
        n = 7
        dis = random_disorder(n, 12)
        perm = seed_stream(13).permutation(n)
        mat = dis.coupling_matrix()[np.ix_(perm, perm)]
        relabeled = SKDisorder(n, mat[np.triu_indices(n, k=1)])
        a = free_energy(dis, 1.2)
        b = free_energy(relabeled, 1.2)
        assert a.free_energy == pytest.approx(b.free_energy, abs=1e-10)
        assert a.ground_state == pytest.approx(b.ground_state, abs=1e-10)


class TestScaling:
    def test_identity_at_zero(self):
        dis = random_disorder(6, 14)
        np.testing.assert_array_equal(scale_disorder(dis, 0.0).couplings, dis.couplings)

    def test_eps_value(self):
        assert disorder_scale_eps(8, 0.5) == pytest.approx(1 / 15, abs=1e-15)

    def test_range_validation(self):
        with pytest.raises(DomainError):
            scale_disorder(random_disorder(4, 0), 2.1)

    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_ground_state_scales_exactly(self, alpha):
        for seed in range(5):
            dis = random_disorder(10, 20 + seed)
            base = enumerate_energies(dis).max()
            scaled = enumerate_energies(scale_disorder(dis, alpha)).max()
            expected = base / (1 - alpha / 10)
            assert abs(scaled - expected) <= 1e-12 * abs(expected)


class TestJensenGap:
    def test_alpha_zero(self):
        lhs, rhs, holds = jensen_gap_check(random_disorder(6, 30), 0.0, 1.0)
        assert lhs == pytest.approx(0.0, abs=1e-12)
        assert rhs == pytest.approx(0.0, abs=1e-12)
        assert holds

    def test_beta_zero(self):
        lhs, rhs, holds = jensen_gap_check(random_disorder(6, 31), 0.8, 0.0)
        assert rhs == 0.0
        assert lhs >= -1e-12
        assert holds

    def test_holds_on_random_disorders(self):
        for seed in range(30):
            dis = random_disorder(8, 100 + seed)
            for beta in (0.5, 1.5):
                lhs, rhs, holds = jensen_gap_check(dis, 0.5, beta)
                assert holds, (seed, beta, lhs, rhs)


class TestDerivative:
    def test_two_spin_closed_form(self):
        # F(beta) = log(4 cosh(beta g / sqrt 2)) so F' = (g/sqrt 2) tanh(beta g / sqrt 2)
        dis = SKDisorder(2, np.array([1.0]))
        fd, gibbs, agree = derivative_check(dis, 1.0)
        expected = (1 / math.sqrt(2)) * math.tanh(1 / math.sqrt(2))
        assert gibbs == pytest.approx(expected, abs=1e-12)
        assert agree

    def test_agrees_on_random_disorders(self):
        for seed in range(10):
            fd, gibbs, agree = derivative_check(random_disorder(9, 200 + seed), 1.4)
            assert agree, (seed, fd, gibbs)
