import numpy as np
import pytest

from coupled_dyson.core_noise import CollisionError, CouplingModel, SeededRng, UnstableModelError
from coupled_dyson import trace_flow as tf


class TestSimulateTraceFlow:
    def test_deterministic_limit(self):
        # noise off (beta = inf): tau(2) = exp(-1) * tau(0)
        path = tf.simulate_trace_flow(1.0, np.inf, 2.0, 1e-4, SeededRng(0))
        assert path.values[0, -1, 0] == pytest.approx(np.exp(-1.0), rel=1e-3)

    @pytest.mark.parametrize("beta,var", [(1.0, 2.0), (2.0, 1.0)])
    def test_stationary_variance(self, beta, var):
        path = tf.simulate_trace_flow(0.0, beta, 20.0, 1e-2, SeededRng(1), n_paths=10 ** 4)
        assert path.values[:, -1, 0].var() == pytest.approx(var, rel=0.05)


class TestExactTraceMoments:
    def test_stationary_variance(self):
        gm = tf.exact_trace_moments(0.0, 1.0)
        assert gm.covariance(60.0, 60.0) == pytest.approx(2.0, abs=1e-10)
        assert gm.stationary_covariance[0, 0] == pytest.approx(2.0)

    def test_zero_at_time_zero(self):
        gm = tf.exact_trace_moments(3.0, 1.0)
        for s in (0.0, 0.5, 4.0):
            assert gm.covariance(0.0, s) == pytest.approx(0.0, abs=1e-15)

    def test_cov_one_one(self):
        gm = tf.exact_trace_moments(0.0, 1.0)
        assert gm.covariance(1.0, 1.0) == pytest.approx(2 * (1 - np.exp(-1.0)))

    def test_mean_decay(self):
        gm = tf.exact_trace_moments(5.0, 2.0)
        assert gm.mean(2.0) == pytest.approx(5.0 * np.exp(-1.0))

    def test_simulation_matches_moments(self):
        # Monte-Carlo cross-check of cov(1, 1)
        path = tf.simulate_trace_flow(0.0, 1.0, 1.0, 1e-3, SeededRng(2), n_paths=8000)
        gm = tf.exact_trace_moments(0.0, 1.0)
        target = gm.covariance(1.0, 1.0)
        est = path.values[:, -1, 0].var()
        se = target * np.sqrt(2 / 8000)
        assert abs(est - target) < 4 * se


class TestCoupledTraces:
    def test_decoupled_matches_single(self):
        m = CouplingModel.symmetric_pair(0.0, 0.0)
        path = tf.simulate_coupled_traces(m, 20.0, 1e-2, SeededRng(3), n_paths=5000)
        term = path.values[:, -1, :]
        assert term[:, 0].var() == pytest.approx(2.0, rel=0.1)
        assert term[:, 1].var() == pytest.approx(2.0, rel=0.1)
        cross = np.mean(term[:, 0] * term[:, 1])
        assert abs(cross) < 4 * 2.0 / np.sqrt(5000)

    def test_unstable_warns_but_runs(self):
        m = CouplingModel.symmetric_pair(0.6, 0.0)
        with pytest.warns(UserWarning):
            path = tf.simulate_coupled_traces(m, 0.5, 1e-2, SeededRng(4))
        assert np.all(np.isfinite(path.values))

    def test_long_run_covariance_matches_closed_form(self):
        m = CouplingModel.symmetric_pair(0.25, 0.3)
        closed = tf.stationary_covariance(m).sigma
        samples = tf.sample_stationary_traces(m, 10 ** 5, SeededRng(5))
        emp = samples.T @ samples / len(samples)
        assert np.abs(emp - closed).max() / closed.max() < 0.05

    def test_stationary_correlation_amplification(self):
        # Corr(tau1, tau2) -> (rho + 2 gamma) / (1 + 2 gamma rho)
        gamma, rho = 0.25, 0.3
        m = CouplingModel.symmetric_pair(gamma, rho)
        samples = tf.sample_stationary_traces(m, 2 * 10 ** 5, SeededRng(6))
        corr = np.corrcoef(samples.T)[0, 1]
        target = (rho + 2 * gamma) / (1 + 2 * gamma * rho)
        assert corr == pytest.approx(target, abs=4 * 1.5 / np.sqrt(2e5))

    def test_euler_path_covariance_matches_closed_form(self):
        # terminal covariance of the Euler-Maruyama paths within 4 SE
        m = CouplingModel.symmetric_pair(0.2, 0.4)
        closed = tf.stationary_covariance(m).sigma
        path = tf.simulate_coupled_traces(m, 25.0, 1e-3, SeededRng(8), n_paths=3000)
        term = path.values[:, -1, :]
        emp = term.T @ term / len(term)
        se = np.abs(closed).max() * np.sqrt(2 / 3000)
        assert np.abs(emp - closed).max() < 4 * se

    def test_variance_ratio_near_critical(self):
        # Var(gamma=0.45) / Var(gamma=0.40) = (1/4 - 0.16) / (1/4 - 0.2025)
        rng = SeededRng(7)
        est = {}
        for g in (0.45, 0.40):
            m = CouplingModel.symmetric_pair(g, 0.0)
            s = tf.sample_stationary_traces(m, 10 ** 5, rng, spacing=5.0,
                                            n_chains=200, burn_in=60)
            est[g] = s[:, 0].var()
        ratio = est[0.45] / est[0.40]
        assert ratio == pytest.approx((0.25 - 0.16) / (0.25 - 0.2025), rel=0.10)


class TestStationaryCovariance:
    def test_decoupled(self):
        m = CouplingModel.symmetric_pair(0.0, 0.0)
        sc = tf.stationary_covariance(m)
        np.testing.assert_allclose(sc.sigma, 2 * np.eye(2), atol=1e-12)

    def test_quarter_coupling(self):
        m = CouplingModel.symmetric_pair(0.25, 0.0)
        sc = tf.stationary_covariance(m)
        np.testing.assert_allclose(sc.sigma, [[8 / 3, 4 / 3], [4 / 3, 8 / 3]], atol=1e-12)
        assert sc.det == pytest.approx(1.0 / (0.25 - 1 / 16))
        assert sc.det == pytest.approx(16 / 3)

    def test_determinant_formula(self):
        m = CouplingModel.symmetric_pair(0.2, 0.5)
        sc = tf.stationary_covariance(m)
        assert sc.det == pytest.approx((1 - 0.25) / (0.25 - 0.04))
        assert sc.det == pytest.approx(25 / 7)

    def test_closed_form_agrees_with_numerical_solve(self):
        # closed form vs general Lyapunov solve across the stable sheet
        for gamma in np.arange(-0.4, 0.41, 0.1):
            for rho in np.arange(-0.9, 0.91, 0.3):
                closed = tf.symmetric_pair_covariance(gamma, rho).sigma
                # general solver path: perturb damping so the closed-form branch is not taken
                m = CouplingModel(k=2, N=1,
                                  gamma=np.array([[0.5, gamma], [gamma, 0.5 + 1e-14]]),
                                  rho=np.array([[1.0, rho], [rho, 1.0]]))
                numeric = tf.stationary_covariance(m).sigma
                assert np.abs(closed - numeric).max() < 1e-10

    def test_lyapunov_residual(self):
        for gamma, rho in [(0.25, 0.3), (-0.3, -0.5), (0.45, 0.9)]:
            m = CouplingModel.symmetric_pair(gamma, rho)
            sigma = tf.stationary_covariance(m).sigma
            assert tf.lyapunov_residual(m, sigma) < 1e-10

    def test_general_model(self):
        m = CouplingModel(k=3, N=1,
                          gamma=np.array([[0.6, 0.1, 0.05],
                                          [0.2, 0.7, 0.1],
                                          [0.0, 0.1, 0.5]]),
                          rho=np.array([[1.0, 0.2, 0.0],
                                        [0.2, 1.0, 0.1],
                                        [0.0, 0.1, 1.0]]))
        sigma = tf.stationary_covariance(m).sigma
        assert tf.lyapunov_residual(m, sigma) < 1e-10

    def test_unstable_rejected(self):
        with pytest.raises(UnstableModelError):
            tf.stationary_covariance(CouplingModel.symmetric_pair(0.55, 0.0))

    def test_exact_discretization_fixed_point(self):
        # stationary covariance is invariant under the exact one-step kernel
        m = CouplingModel.symmetric_pair(0.25, 0.3)
        sigma = tf.stationary_covariance(m).sigma
        f, c = tf.exact_discretization(m.drift_matrix, tf.trace_noise_covariance(m), 2.0)
        np.testing.assert_allclose(sigma, f @ sigma @ f.T + c, atol=1e-12)


class TestDivergence:
    def test_single_particle(self):
        assert tf.divergence_of_drift(np.array([0.0])) == pytest.approx(-0.5)

    def test_two_particles(self):
        assert tf.divergence_of_drift(np.array([-1.0, 1.0])) == pytest.approx(-1.25)

    def test_upper_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = rng.integers(2, 12)
            lam = np.sort(rng.normal(size=n))
            if np.diff(lam).min() < 1e-6:
                continue
            assert tf.divergence_of_drift(lam) <= -0.5 * n

    def test_collision_error(self):
        with pytest.raises(CollisionError):
            tf.divergence_of_drift(np.array([0.0, 1e-15]))


class TestVolumeLedger:
    def test_single_particle_exact(self):
        times = np.linspace(0.0, 2.0, 101)
        path = np.zeros((101, 1))
        led = tf.integrate_volume(times, path, J0=1.0)
        np.testing.assert_allclose(led.log_jacobian, -0.5 * times, atol=1e-14)
        np.testing.assert_allclose(led.repulsion_term, 0.0, atol=0.0)

    def test_frozen_configuration_linear(self):
        # constant integrand: repulsion term is exactly linear in t
        times = np.linspace(0.0, 2.0, 201)
        lam = np.array([-1.0, 0.0, 1.0])
        path = np.tile(lam, (201, 1))
        led = tf.integrate_volume(times, path)
        rate = (2 * 1.0 + 2 * 1.0 + 2 * 0.25) / 3.0
        np.testing.assert_allclose(led.repulsion_term, -rate * times, atol=1e-12)

    def test_ledger_decomposition_and_sign(self):
        rng = np.random.default_rng(1)
        times = np.linspace(0.0, 1.0, 51)
        path = np.sort(rng.normal(size=(51, 6)) * 2, axis=1)
        led = tf.integrate_volume(times, path, J0=2.0)
        np.testing.assert_allclose(
            led.log_jacobian, led.log_j0 + led.base_rate_term + led.repulsion_term,
            atol=0.0)
        assert np.all(led.repulsion_term <= 0.0)
        assert np.all(led.log_jacobian <= led.log_j0 + led.base_rate_term)
