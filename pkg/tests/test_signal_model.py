import numpy as np
import pytest
from pydantic import ValidationError

from sensing.errors import DomainError
from sensing.linalg import hermitian_eigenvalues
from sensing.rng import derive_seed, make_rng
from sensing.schemas import ArrayConfig, Scenario
from sensing.signal_model import (
    array_manifold, draw_angles, sample_covariance, signal_eigenvalues, synthesize,
)


class TestArrayManifold:
    def test_broadside(self):
        np.testing.assert_allclose(array_manifold(0.0, ArrayConfig(M=4)), np.ones(4))

    def test_thirty_degrees(self):
        np.testing.assert_allclose(array_manifold(30.0, ArrayConfig(M=2)), [1, -1j], atol=1e-12)
        np.testing.assert_allclose(array_manifold(-30.0, ArrayConfig(M=2)), [1, 1j], atol=1e-12)

    def test_unit_modulus(self):
        a = array_manifold(17.3, ArrayConfig(M=16))
        assert a[0] == 1
        np.testing.assert_allclose(np.abs(a), 1.0)

    @pytest.mark.parametrize("theta", [90.0, -90.0, 120.0])
    def test_out_of_range(self, theta):
        with pytest.raises(DomainError):
            array_manifold(theta, ArrayConfig(M=4))

    def test_config_needs_two_antennas(self):
        with pytest.raises(ValidationError):
            ArrayConfig(M=1)


class TestScenario:
    def test_angle_count(self):
        with pytest.raises(ValidationError):
            Scenario(K=2, angles=[10.0], N=10)

    def test_angle_separation(self):
        with pytest.raises(ValidationError):
            Scenario(K=2, angles=[10.0, 10.2], N=10)

    def test_angle_range(self):
        with pytest.raises(ValidationError):
            Scenario(K=1, angles=[95.0], N=10)


class TestSynthesize:
    def test_noise_only_variance(self):
        snap = synthesize(Scenario(K=0, N=500, seed=1), ArrayConfig(M=32))
        assert snap.truth == 0 and snap.signal_rho.size == 0
        assert 0.95 <= np.mean(np.abs(snap.Y) ** 2) <= 1.05

    def test_rank_one_signal_eigenvalue(self):
        snap = synthesize(Scenario(K=1, angles=[10.0], snr_db=0.0, N=20, seed=2), ArrayConfig(M=64))
        assert np.isclose(snap.signal_rho[0], 64.0)
        assert np.all(snap.signal_rho[1:] == 0.0)

    def test_three_emitters_three_positive(self):
        rho = signal_eigenvalues([-20.0, 5.0, 40.0], 1.0, ArrayConfig(M=16))
        assert np.sum(rho > 0) == 3
        assert np.isclose(np.sum(rho), 3 * 16)

    def test_deterministic(self):
        sc = Scenario(K=2, angles=[-10.0, 25.0], snr_db=-5.0, N=50, seed=99)
        a = synthesize(sc, ArrayConfig(M=8))
        b = synthesize(sc, ArrayConfig(M=8))
        np.testing.assert_array_equal(a.Y, b.Y)

    def test_eigen_gap_at_high_snr(self):
        snap = synthesize(Scenario(K=3, angles=[-30.0, 0.0, 30.0], snr_db=10.0, N=200, seed=3),
                          ArrayConfig(M=64))
        s = hermitian_eigenvalues(sample_covariance(snap.Y)).values
        assert s[2] / s[3] >= 10.0


class TestSampleCovariance:
    def test_zeros(self):
        np.testing.assert_array_equal(sample_covariance(np.zeros((3, 4), dtype=complex)), np.zeros((3, 3)))

    def test_ones_row(self):
        np.testing.assert_allclose(sample_covariance(np.ones((1, 7), dtype=complex)), [[1.0]])

    def test_wishart_edges(self):
        M, N, trials = 64, 200, 200
        lmax, lmin = [], []
        for t in range(trials):
            snap = synthesize(Scenario(K=0, N=N, seed=derive_seed(7, t)), ArrayConfig(M=M))
            s = hermitian_eigenvalues(N * sample_covariance(snap.Y))
            lmax.append(s.max)
            lmin.append(s.min)
        # finite-size centering puts the mean largest eigenvalue a few percent under the edge
        assert abs(np.mean(lmax) / (np.sqrt(N) + np.sqrt(M)) ** 2 - 1.0) <= 0.06
        assert abs(np.mean(lmin) / (np.sqrt(N) - np.sqrt(M)) ** 2 - 1.0) <= 0.15


class TestDrawAngles:
    def test_policy(self):
        rng = make_rng(5)
        for K in range(1, 6):
            angles = draw_angles(K, rng)
            assert len(angles) == K
            assert all(-60.0 < a < 60.0 for a in angles)
            assert K == 1 or np.min(np.diff(angles)) >= 2.0

    def test_impossible(self):
        with pytest.raises(DomainError):
            draw_angles(100, make_rng(0))

    def test_seeds(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
        assert make_rng(4).random() == make_rng(4).random()
