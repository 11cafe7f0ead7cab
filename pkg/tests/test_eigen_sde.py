import numpy as np
import pytest

from coupled_dyson.core_noise import CouplingModel, SeededRng
from coupled_dyson import eigen_sde as es
from coupled_dyson import matrix_sde as mx
from coupled_dyson.spectral import ks_distance, semicircle_cdf


class TestPhiR:
    def test_outer_branch(self):
        assert es.phi_R(0.5, 10.0) == pytest.approx(2.0)

    def test_linear_branch(self):
        assert es.phi_R(0.05, 10.0) == pytest.approx(5.0)

    def test_odd(self):
        assert es.phi_R(-0.05, 10.0) == pytest.approx(-5.0)
        xs = np.linspace(-3, 3, 101)
        np.testing.assert_allclose(es.phi_R(xs, 7.0) + es.phi_R(-xs, 7.0), 0.0, atol=0.0)

    def test_bounded_and_continuous(self):
        xs = np.linspace(-2, 2, 100001)
        vals = es.phi_R(xs, 25.0)
        assert np.abs(vals).max() <= 25.0 + 1e-12
        # continuity across the matching point |x| = 1/R
        eps = 1e-12
        assert es.phi_R(1 / 25 + eps, 25.0) == pytest.approx(es.phi_R(1 / 25 - eps, 25.0),
                                                             abs=1e-9)

    def test_zero(self):
        assert es.phi_R(0.0, 10.0) == 0.0

    def test_invalid_truncation(self):
        with pytest.raises(ValueError):
            es.phi_R(1.0, 0.0)


class TestRepulsionDrift:
    def test_two_particles(self):
        # gap 1: each feels 1/gap / N
        drift = es.repulsion_drift(np.array([[0.0, 1.0]]), 10.0)
        np.testing.assert_allclose(drift, [[-0.5, 0.5]])

    def test_matches_numpy_fallback(self):
        rng = np.random.default_rng(0)
        lam = np.sort(rng.normal(size=(3, 40)), axis=-1)
        np.testing.assert_allclose(es.repulsion_drift(lam, 100.0),
                                   es._repulsion_numpy(lam, 100.0), atol=1e-12)

    def test_net_repulsion_exactly_zero(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            lam = np.sort(rng.normal(size=(2, 30)), axis=-1)
            assert np.all(es.net_repulsion(lam, 300.0) == 0.0)


class TestStepEigenSystem:
    def test_scalar_ou_variance(self):
        # N=1: no repulsion; stationary variance 2 for damping 1/2
        m = CouplingModel.single(0.5, N=1)
        gen = SeededRng(2).generator()
        vals = []
        for _ in range(3000):
            s = es.initial_eigen_state(m)
            for _ in range(40):
                s = es.step_eigen_system(s, m, 0.25, gen)
            vals.append(s.lam[0, 0])
        var = np.var(vals)
        # Euler-Maruyama at dt = 0.25 biases the variance up by 1/(1 - dt/4)
        target = 2.0 / (1 - 0.25 / 4)
        assert abs(var - target) < 4 * target * np.sqrt(2 / 3000)

    def test_ordering_preserved(self):
        m = CouplingModel.symmetric_pair(0.2, 0.3, N=40)
        res = es.run_eigen_path(m, T=0.5, dt=1e-3, rng=SeededRng(3))
        assert np.all(np.diff(res.final_state.lam, axis=-1) > 0)

    def test_semicircle_recovery_short(self):
        m = CouplingModel.single(0.5, N=100)
        res = es.run_eigen_path(m, T=8.0, dt=1e-3, rng=SeededRng(4))
        assert ks_distance(res.final_state.lam[0], semicircle_cdf) < 0.1

    def test_net_repulsion_zero_along_path(self):
        m = CouplingModel.symmetric_pair(0.1, 0.0, N=20)
        res = es.run_eigen_path(m, T=0.2, dt=1e-3, rng=SeededRng(5), record_paths=True,
                                record_every=20)
        for lam in res.paths:
            assert np.all(es.net_repulsion(lam, res.final_state.R) == 0.0)

    def test_truncation_independence_when_inactive(self):
        # gaps never drop below 1/R: doubling R changes nothing at all
        m = CouplingModel.single(0.5, N=8)
        lam0 = np.linspace(-2.0, 2.0, 8)[None, :]
        a = es.run_eigen_path(m, T=0.1, dt=1e-3, rng=SeededRng(6), lam0=lam0, R=20.0)
        b = es.run_eigen_path(m, T=0.1, dt=1e-3, rng=SeededRng(6), lam0=lam0, R=40.0)
        assert a.final_state.min_gap > 1 / 20.0
        np.testing.assert_array_equal(a.final_state.lam, b.final_state.lam)

    def test_rejects_unordered_initial(self):
        with pytest.raises(ValueError):
            es.EigenEnsembleState(t=0.0, lam=np.array([[1.0, 0.0]]), R=10.0)

    def test_default_truncation(self):
        assert es.default_truncation(50) == 500.0


class TestLyapunovF:
    def test_single_particles(self):
        state = es.EigenEnsembleState(t=0.0, lam=np.array([[2.0], [3.0]]), R=10.0)
        assert es.lyapunov_f(state) == pytest.approx(13.0)  # a^2 + b^2, no log terms

    def test_two_particles(self):
        state = es.EigenEnsembleState(t=0.0, lam=np.array([[-1.0, 1.0]]), R=10.0)
        assert es.lyapunov_f(state) == pytest.approx(1.0 - np.log(2.0) / 2.0)

    def test_collision_sentinel(self):
        assert es.lyapunov_f(np.array([[0.0, 0.0, 1.0]])) == np.inf

    def test_bounded_below_along_path(self):
        m = CouplingModel.symmetric_pair(0.1, 0.2, N=30)
        res = es.run_eigen_path(m, T=1.0, dt=1e-3, rng=SeededRng(7),
                                record_lyapunov=True, record_every=50)
        assert np.all(np.array(res.lyapunov) >= -2.0)


class TestOracleEquivalence:
    # The eigenvalue-level model couples sorted eigenvalues by index; the
    # matrix model couples through tr(H1 H2). The two laws agree exactly for
    # perfectly correlated noise (both reduce to one matrix with damping
    # 1/2 - gamma) and drift apart at O(gamma) otherwise: at gamma = 0.1,
    # rho = 0 the second spectral moment differs by ~20%, so the statistical
    # equivalence check lives at genuinely weak coupling.

    def _moments(self, m, n_reps, seed_eig, seed_mat, lam0=None, h0=None):
        mom_eig = np.empty((n_reps, 2))
        mom_mat = np.empty((n_reps, 2))
        for r in range(n_reps):
            res_e = es.run_eigen_path(m, T=5.0, dt=2e-3, rng=SeededRng(seed_eig, r),
                                      lam0=lam0)
            lam_e = res_e.final_state.lam[0]
            res_m = mx.run_matrix_path(m, T=5.0, dt=0.25, rng=SeededRng(seed_mat, r),
                                       H0=h0, exact=True)
            lam_m = mx.eigenvalues_of(res_m.final_state)[0]
            mom_eig[r] = [lam_e.mean(), (lam_e ** 2).mean()]
            mom_mat[r] = [lam_m.mean(), (lam_m ** 2).mean()]
        return mom_eig, mom_mat

    @pytest.mark.parametrize("n_dim", [2, 5])
    def test_weak_coupling_moments_match_matrix_model(self, n_dim):
        m = CouplingModel.symmetric_pair(0.02, 0.0, N=n_dim)
        reps = 200
        mom_eig, mom_mat = self._moments(m, reps, 100, 200)
        for j in range(2):
            diff = mom_eig[:, j].mean() - mom_mat[:, j].mean()
            se = np.sqrt(mom_eig[:, j].var() / reps + mom_mat[:, j].var() / reps)
            assert abs(diff) < 4 * se, f"moment {j + 1}: diff {diff:.4f}, se {se:.4f}"

    def test_perfect_noise_correlation_reduction(self):
        # rho = 1, identical initial data: both models are one OU matrix with
        # damping 1/2 - gamma, so the laws coincide at any coupling
        m = CouplingModel.symmetric_pair(0.1, 1.0, N=5)
        reps = 200
        mom_eig, mom_mat = self._moments(m, reps, 300, 400)
        for j in range(2):
            diff = mom_eig[:, j].mean() - mom_mat[:, j].mean()
            se = np.sqrt(mom_eig[:, j].var() / reps + mom_mat[:, j].var() / reps)
            assert abs(diff) < 4 * se, f"moment {j + 1}: diff {diff:.4f}, se {se:.4f}"

    def test_coupling_discrepancy_shrinks_with_gamma(self):
        # the second-moment gap between the two models scales with gamma
        gaps = {}
        for gamma in (0.1, 0.02):
            m = CouplingModel.symmetric_pair(gamma, 0.0, N=5)
            mom_eig, mom_mat = self._moments(m, 120, 500, 600)
            gaps[gamma] = abs(mom_eig[:, 1].mean() - mom_mat[:, 1].mean())
        assert gaps[0.02] < 0.5 * gaps[0.1]
