import numpy as np
import pytest

from coupled_dyson import spectral as sp
from coupled_dyson.core_noise import SeededRng


class TestStieltjesOfSample:
    def test_point_mass(self):
        assert sp.stieltjes_of_sample([0.0], 1j) == pytest.approx(-1j)

    def test_two_points(self):
        val = sp.stieltjes_of_sample([-1.0, 1.0], 2 + 1e-6j)
        assert val.real == pytest.approx(2 / 3, abs=1e-5)

    def test_rejects_real_z(self):
        with pytest.raises(ValueError):
            sp.stieltjes_of_sample([-1.0, 1.0], 2.0 + 0.0j)

    def test_herglotz_sign(self):
        rng = np.random.default_rng(0)
        lam = rng.normal(size=50)
        zs = rng.normal(size=20) + 1j * np.abs(rng.normal(size=20))
        g = sp.stieltjes_of_sample(lam, zs)
        assert np.all(g.imag < 0)

    def test_empty_sample(self):
        with pytest.raises(ValueError, match="empty sample"):
            sp.stieltjes_of_sample([], 1j)


class TestSemicircle:
    def test_density_at_zero(self):
        assert sp.semicircle_density(0.0) == pytest.approx(1 / np.pi)

    def test_density_edges(self):
        assert sp.semicircle_density(2.0) == 0.0
        assert sp.semicircle_density(-2.0) == 0.0
        assert sp.semicircle_density(3.0) == 0.0

    def test_density_normalized(self):
        xs = np.linspace(-2, 2, 20001)
        assert np.trapezoid(sp.semicircle_density(xs), xs) == pytest.approx(1.0, abs=1e-6)

    def test_cdf_limits(self):
        assert sp.semicircle_cdf(-2.0) == pytest.approx(0.0, abs=1e-14)
        assert sp.semicircle_cdf(0.0) == pytest.approx(0.5)
        assert sp.semicircle_cdf(2.0) == pytest.approx(1.0)

    def test_transform_at_i(self):
        expected = 1j * (1 - np.sqrt(5)) / 2
        assert sp.semicircle_stieltjes(1j) == pytest.approx(expected, abs=1e-14)

    def test_functional_equation(self):
        rng = np.random.default_rng(1)
        zs = rng.uniform(-3, 3, 20) + 1j * np.sign(rng.normal(size=20)) * rng.uniform(0.1, 3, 20)
        g = sp.semicircle_stieltjes(zs)
        assert np.abs(g * g - zs * g + 1).max() < 1e-12

    def test_asymptotics(self):
        # |z G - 1| = |E[lambda / (z - lambda)]| <= max|lambda| / Im z; the
        # leading term for the (symmetric) semicircle is m2 / y^2 = 1 / y^2
        errors = {}
        for y in (10.0, 100.0):
            z = 1j * y
            g = sp.semicircle_stieltjes(z)
            err = abs(z * g - 1)
            assert err <= 2.0 / y
            errors[y] = err
        assert errors[100.0] < 0.02 * 2.0 / 100.0
        assert errors[100.0] < errors[10.0] / 50

    def test_herglotz_both_half_planes(self):
        z = 0.7 + 0.4j
        assert sp.semicircle_stieltjes(z).imag < 0
        assert sp.semicircle_stieltjes(np.conj(z)).imag > 0


class TestInversion:
    def test_semicircle_center(self):
        eps = 1e-3
        g = sp.semicircle_stieltjes(0.0 + 1j * eps)
        assert sp.invert_stieltjes(g) == pytest.approx(1 / np.pi, abs=1e-3)

    def test_point_mass_peak(self):
        eps = 0.1
        g = sp.stieltjes_of_sample([0.0], 1j * eps)
        assert sp.invert_stieltjes(g) == pytest.approx(1 / (np.pi * eps), rel=1e-12)

    def test_normalization(self):
        eps = 0.05
        xs = np.linspace(-30, 30, 40001)
        g = sp.semicircle_stieltjes(xs + 1j * eps)
        rho = sp.invert_stieltjes(g)
        assert np.trapezoid(rho, xs) == pytest.approx(1.0, abs=1e-2)

    def test_round_trip_wasserstein(self):
        # sample -> transform on Im z = eps -> inversion: W1 to the sample < 2 eps
        rng = np.random.default_rng(2)
        lam = np.sort(rng.uniform(-1.5, 1.5, 400))
        eps = 0.05
        xs = np.linspace(-6, 6, 8001)
        rho = sp.invert_stieltjes(sp.stieltjes_of_sample(lam, xs + 1j * eps))
        cdf_smooth = np.cumsum(rho) * (xs[1] - xs[0])
        emp = np.searchsorted(lam, xs, side="right") / lam.size
        w1 = np.trapezoid(np.abs(cdf_smooth - emp), xs)
        assert w1 < 2 * eps


class TestSpectralFormFactor:
    def test_at_zero(self):
        rng = np.random.default_rng(3)
        lam = rng.normal(size=64)
        assert sp.spectral_form_factor(lam, 0.0) == 1.0

    def test_single_eigenvalue(self):
        ts = np.linspace(0, 50, 7)
        np.testing.assert_allclose(sp.spectral_form_factor([1.3], ts), 1.0)

    def test_iid_sample_plateau(self):
        # independent draws from the semicircle: the late-time average is the
        # diagonal level 1/N (no level repulsion to suppress it)
        rng = SeededRng(4).generator()
        n = 200
        u = rng.uniform(size=n)
        grid = np.linspace(-2, 2, 100001)
        lam = np.interp(u, sp.semicircle_cdf(grid), grid)
        ts = np.linspace(40, 60, 201)
        late = sp.spectral_form_factor(lam, ts).mean()
        assert 0.5 / n < late < 2.0 / n

    def test_goe_sample_sits_on_ramp_below_plateau(self):
        # a GOE-correlated spectrum is rigid: in the window t in [40, 60] the
        # form factor sits on the ramp, a known factor below the 1/N plateau
        # (the plateau is only reached near the Heisenberg time ~ 2N)
        rng = SeededRng(5).generator()
        n = 200
        a = rng.standard_normal((n, n))
        lam = np.linalg.eigvalsh((a + a.T) / np.sqrt(2 * n))
        ts = np.linspace(40, 60, 201)
        late = sp.spectral_form_factor(lam, ts).mean()
        assert 0.05 / n < late < 0.6 / n

    def test_empty(self):
        with pytest.raises(ValueError):
            sp.spectral_form_factor([], 1.0)


class TestDistances:
    def test_quantile_construction(self):
        n = 500
        grid = np.linspace(-2, 2, 200001)
        qs = (np.arange(1, n + 1) - 0.5) / n
        lam = np.interp(qs, sp.semicircle_cdf(grid), grid)
        ks = sp.ks_distance(lam, sp.semicircle_cdf)
        assert ks <= 1 / (2 * n) + 5e-4

    def test_wasserstein_shift(self):
        # uniform sample against its shifted CDF: W1 equals the shift
        n = 2000
        lam = (np.arange(1, n + 1) - 0.5) / n

        def shifted_cdf(x):
            return np.clip(np.asarray(x, dtype=float) - 0.1, 0.0, 1.0)

        w1 = sp.wasserstein1(lam, shifted_cdf)
        assert w1 == pytest.approx(0.1, abs=3e-3)

    def test_empty_sample(self):
        with pytest.raises(ValueError, match="empty sample"):
            sp.ks_distance([], sp.semicircle_cdf)
        with pytest.raises(ValueError, match="empty sample"):
            sp.wasserstein1([], sp.semicircle_cdf)
