"""Empirical spectral measures: Stieltjes transforms, semicircle closed forms,
inversion, spectral form factor, and distribution distances."""

from __future__ import annotations

import numpy as np

#: Number of grid points used by the CDF-distance metrics.
DISTANCE_GRID_POINTS = 2048


def _require_off_axis(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag == 0):
        raise ValueError("z must have nonzero imaginary part")
    return z


def stieltjes_of_sample(sample, z):
    """(1/N) sum_i 1/(z - lambda_i) for complex z off the real axis."""
    lam = np.asarray(sample, dtype=float)
    if lam.size == 0:
        raise ValueError("empty sample")
    z = _require_off_axis(z)
    scalar = z.ndim == 0
    zz = np.atleast_1d(z)
    g = np.mean(1.0 / (zz[..., None] - lam), axis=-1)
    return complex(g[0]) if scalar else g


def semicircle_density(x):
    """Semicircle density (1/2pi) sqrt(4 - x^2) on [-2, 2], zero outside."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 2.0
    out[inside] = np.sqrt(4.0 - x[inside] ** 2) / (2.0 * np.pi)
    return out if out.ndim else float(out)


def semicircle_cdf(x):
    """CDF of the semicircle law."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    return 0.5 + x * np.sqrt(4.0 - x ** 2) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi


def semicircle_stieltjes(z):
    """Stieltjes transform (z - sqrt(z^2 - 4)) / 2 of the semicircle law.

    The square root is evaluated as sqrt(z - 2) * sqrt(z + 2) with principal
    branches, which places the cut on [-2, 2] and gives the 1/z behaviour at
    infinity without case analysis. Satisfies G^2 - z G + 1 = 0.
    """
    z = _require_off_axis(z)
    root = np.sqrt(z - 2.0) * np.sqrt(z + 2.0)
    g = 0.5 * (z - root)
    return complex(g) if g.ndim == 0 else g


def invert_stieltjes(g_values):
    """Smoothed density from Stieltjes values sampled on a line Im z = eps.

    rho_hat(x) = -(1/pi) Im G(x + i eps); this is the Poisson-kernel
    smoothing of the underlying measure at scale eps, not a limit.
    """
    g = np.asarray(g_values, dtype=complex)
    return -g.imag / np.pi


def spectral_form_factor(sample, t):
    """SFF(t) = (1/N^2) |sum_i exp(i t lambda_i)|^2."""
    lam = np.asarray(sample, dtype=float)
    if lam.size == 0:
        raise ValueError("empty sample")
    t = np.asarray(t, dtype=float)
    phases = np.exp(1j * np.multiply.outer(t, lam))
    sff = np.abs(phases.sum(axis=-1)) ** 2 / lam.size ** 2
    return float(sff) if sff.ndim == 0 else sff


def _distance_grid(sample):
    lam = np.asarray(sample, dtype=float)
    if lam.size == 0:
        raise ValueError("empty sample")
    lo, hi = lam.min() - 1.0, lam.max() + 1.0
    return np.sort(lam), np.linspace(lo, hi, DISTANCE_GRID_POINTS)


def ks_distance(sample, reference_cdf):
    """Sup-norm CDF distance on a 2048-point grid spanning [min-1, max+1]."""
    lam, grid = _distance_grid(sample)
    emp = np.searchsorted(lam, grid, side="right") / lam.size
    return float(np.abs(emp - reference_cdf(grid)).max())


def wasserstein1(sample, reference_cdf):
    """Integrated CDF distance on the same 2048-point grid (trapezoid)."""
    lam, grid = _distance_grid(sample)
    emp = np.searchsorted(lam, grid, side="right") / lam.size
    return float(np.trapezoid(np.abs(emp - reference_cdf(grid)), grid))
