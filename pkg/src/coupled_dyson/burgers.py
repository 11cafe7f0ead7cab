"""Deterministic evolution of the coupled Stieltjes transforms.

The limiting spectral measures of the k coupled processes have Stieltjes
transforms solving a coupled inviscid-Burgers-type system with linear
dilation terms. In the convention used here (the one consistent with the
eigenvalue drift -gamma_pp lam_i^p + sum_q gamma_pq lam_i^q),

    dG_p/dt = -G_p dG_p/dz + gamma_pp (G_p + z dG_p/dz)
              - sum_{q != p} gamma_pq (G_q + z dG_q/dz),

so a damped single process relaxes onto a semicircle and the far-field
moments obey closed linear ODEs (d m1/dt = A m1, d m2/dt = 1 + 2 A m2).

The solver works on a single horizontal contour Im z = y0 > 0. G restricted
to such a line is the boundary value of a function analytic in the upper
half plane, so its spatial Fourier content lives on one half of the spectrum
only; the other half is amplified by the linearized dynamics at rate
|Im G| * |omega| and must be kept empty. The scheme therefore evolves the
residual r = G - (1/z + m1/z^2 + m2/z^3) with a spectral derivative and a
one-sided Fourier projection (applied inside every stage evaluation), the
closure moments being advanced by their exact ODEs. A cosine taper near the
contour ends blends the residual into the closure, which bounds the
truncation error by the neglected third-moment tail.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .spectral import semicircle_stieltjes, stieltjes_of_sample


class BlowUpError(RuntimeError):
    """The field left the Herglotz regime; the numerical solution is invalid."""


class ConvergenceError(RuntimeError):
    """Fixed-point iteration failed to converge."""


#: Fraction of the positive-frequency band kept unattenuated.
FILTER_PASS = 0.65
#: Fraction of the positive-frequency band at which the roll-off hits zero.
FILTER_STOP = 0.80
#: Width (in x units) of the cosine taper joining the residual to the closure.
TAPER_BAND = 1.5


@dataclass
class StieltjesField:
    """k Stieltjes transforms sampled on the contour x + i y0."""

    x: np.ndarray        # (M,) real parts, uniform spacing
    y0: float
    G: np.ndarray        # (k, M) complex
    t: float
    m1: np.ndarray       # (k,) first moments feeding the far-field closure
    m2: np.ndarray       # (k,) second moments feeding the far-field closure

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.G = np.atleast_2d(np.asarray(self.G, dtype=complex))
        self.m1 = np.asarray(self.m1, dtype=float)
        self.m2 = np.asarray(self.m2, dtype=float)
        if self.y0 <= 0:
            raise ValueError("contour must sit at Im z = y0 > 0")
        steps = np.diff(self.x)
        if not np.allclose(steps, steps[0], rtol=1e-10, atol=0.0):
            raise ValueError("contour spacing must be uniform")

    @property
    def z(self):
        return self.x + 1j * self.y0

    @property
    def h(self):
        return float(self.x[1] - self.x[0])

    @property
    def k(self):
        return self.G.shape[0]


def make_contour(L=8.0, h=0.01, y0=0.5):
    """Uniform contour real parts on [-L, L] with spacing h."""
    m = int(round(2 * L / h))
    return np.linspace(-L, L, m + 1)


def init_field_from_measure(measures, x=None, y0=0.5):
    """Initial field from per-process measure specifications.

    Each entry of ``measures`` is one of
      ("point_mass", a)   -- Dirac mass at a, G = 1/(z - a)
      ("sample", array)   -- empirical measure of an eigenvalue sample
      ("semicircle",)     -- standard semicircle on [-2, 2]
    """
    if x is None:
        x = make_contour()
    z = np.asarray(x, dtype=float) + 1j * y0
    g = np.empty((len(measures), z.size), dtype=complex)
    m1 = np.zeros(len(measures))
    m2 = np.zeros(len(measures))
    for p, spec in enumerate(measures):
        kind = spec[0]
        if kind == "point_mass":
            a = float(spec[1])
            g[p] = 1.0 / (z - a)
            m1[p] = a
            m2[p] = a * a
        elif kind == "sample":
            sample = np.asarray(spec[1], dtype=float)
            g[p] = stieltjes_of_sample(sample, z)
            m1[p] = float(sample.mean())
            m2[p] = float((sample ** 2).mean())
        elif kind == "semicircle":
            g[p] = semicircle_stieltjes(z)
            m1[p] = 0.0
            m2[p] = 1.0
        else:
            raise ValueError(f"unknown measure spec {spec!r}")
    return StieltjesField(x=np.asarray(x, float), y0=y0, G=g, t=0.0, m1=m1, m2=m2)


def _closure(z, m1, m2):
    """Far-field law 1/z + m1/z^2 + m2/z^3 per process."""
    zi = 1.0 / z
    return zi + m1[:, None] * zi ** 2 + m2[:, None] * zi ** 3


def _closure_deriv(z, m1, m2):
    zi = 1.0 / z
    return -(zi ** 2) - 2.0 * m1[:, None] * zi ** 3 - 3.0 * m2[:, None] * zi ** 4


class _SpectralWorkspace:
    """Precomputed taper, frequencies, and projection masks for one contour."""

    def __init__(self, x, h):
        self.n = x.size - 1  # periodic view drops the duplicated right endpoint
        self.x = x
        span = x[-1] - x[0]
        edge = np.minimum(x - x[0], x[-1] - x)
        ramp = np.clip(edge / TAPER_BAND, 0.0, 1.0)
        self.window = 0.5 - 0.5 * np.cos(np.pi * ramp)  # 1 in the interior
        omega = 2.0 * np.pi * np.fft.fftfreq(self.n, d=h)
        self.i_omega = 1j * omega
        w_max = np.abs(omega).max()
        keep = np.zeros(self.n)
        pos = omega >= 0.0
        mag = np.abs(omega) / w_max
        keep[pos] = np.clip((FILTER_STOP - mag[pos]) / (FILTER_STOP - FILTER_PASS), 0.0, 1.0)
        keep[pos & (mag <= FILTER_PASS)] = 1.0
        self.mask = keep

    def clean(self, residual):
        """One-sided projection of the tapered residual; returns (r, dr/dx).

        Input and output live on the full (n + 1)-point grid; the tapered
        residual vanishes at both ends so the periodic transform is exact.
        """
        r = (residual * self.window)[..., : self.n]
        spec = np.fft.fft(r, axis=-1) * self.mask
        val = np.fft.ifft(spec, axis=-1)
        der = np.fft.ifft(spec * self.i_omega, axis=-1)
        pad = ((0, 0),) * (residual.ndim - 1) + ((0, 1),)
        return np.pad(val, pad, mode="wrap"), np.pad(der, pad, mode="wrap")


def _rhs(g, z, ws, a, m1_now, m2_now):
    """PDE right-hand side on the analytic submanifold."""
    close = _closure(z, m1_now, m2_now)
    r_val, r_der = ws.clean(g - close)
    g_clean = close + r_val
    dg = _closure_deriv(z, m1_now, m2_now) + r_der
    dilation = g_clean + z[None, :] * dg
    return -g_clean * dg - np.einsum("pq,qm->pm", a, dilation), g_clean


def _moment_propagators(a, tau):
    """Exact stage maps of d m1/dt = A m1 and d m2/dt = 1 + 2 A m2 over tau."""
    k = a.shape[0]
    e1 = expm(a * tau)
    aug = np.zeros((k + 1, k + 1))
    aug[:k, :k] = 2.0 * a
    aug[:k, k] = 1.0
    e = expm(aug * tau)
    return e1, e[:k, :k], e[:k, k]


def evolve_field(field, model, T, dt=None):
    """Advance the field by time T (classical RK4 in time).

    Default dt = min(1e-3, h * y0 / 8), inside the stability limit of the
    filtered spectral operator. Raises BlowUpError when |G| exceeds 10 / y0
    or the Herglotz sign Im G < 0 fails after a step.
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    a = model.drift_matrix
    if a.shape[0] != field.k:
        raise ValueError("model process count does not match field")
    h = field.h
    y0 = field.y0
    if dt is None:
        dt = min(1e-3, h * y0 / 8.0)
    if dt > h * y0 / 4.0:
        warnings.warn(f"dt={dt:g} exceeds the CFL guideline h*y0/4={h * y0 / 4:g}",
                      stacklevel=2)
    if T == 0:
        return field
    n_steps = max(1, int(np.ceil(T / dt)))
    dt = T / n_steps
    z = field.z
    ws = _SpectralWorkspace(field.x, h)
    g = field.G.copy()
    m1 = field.m1.astype(float).copy()
    m2 = field.m2.astype(float).copy()
    e1_half, e2_half, j2_half = _moment_propagators(a, dt / 2.0)
    for _ in range(n_steps):
        m1_h = e1_half @ m1
        m2_h = e2_half @ m2 + j2_half
        m1_f = e1_half @ m1_h
        m2_f = e2_half @ m2_h + j2_half
        k1, g0 = _rhs(g, z, ws, a, m1, m2)
        k2, _ = _rhs(g0 + 0.5 * dt * k1, z, ws, a, m1_h, m2_h)
        k3, _ = _rhs(g0 + 0.5 * dt * k2, z, ws, a, m1_h, m2_h)
        k4, _ = _rhs(g0 + dt * k3, z, ws, a, m1_f, m2_f)
        g = g0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        m1, m2 = m1_f, m2_f
        if np.abs(g).max() > 10.0 / y0:
            raise BlowUpError("blow-up: |G| exceeded 10 / y0")
        if np.any(g.imag >= 0.0):
            raise BlowUpError("blow-up: Herglotz sign Im G < 0 violated")
    # commit on the analytic submanifold
    close = _closure(z, m1, m2)
    r_val, _ = ws.clean(g - close)
    return StieltjesField(x=field.x, y0=y0, G=close + r_val, t=field.t + T,
                          m1=m1, m2=m2)


def decoupled_fixed_point(z, t, damping=0.5, tol=1e-13, max_iter=1000):
    """Solve G = 1 / (z - t G) by damped fixed-point iteration from G = 1/z.

    This is the free (all couplings zero) solution started from a point mass
    at the origin; at t = 1 it is the semicircle transform. Exact 1/z at
    t = 0. Accepts scalar or array z with Im z > 0.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("z must have positive imaginary part")
    if t < 0:
        raise ValueError("t must be >= 0")
    g = 1.0 / z
    if t == 0:
        return complex(g) if g.ndim == 0 else g
    for _ in range(max_iter):
        nxt = (1.0 - damping) * g + damping / (z - t * g)
        delta = np.abs(nxt - g).max()
        g = nxt
        if delta < tol:
            break
    else:
        raise ConvergenceError("fixed point did not converge")
    return complex(g) if g.ndim == 0 else g


def damped_free_time(damping, t):
    """Effective free time of a single damped process started from a point mass.

    A lone process with damping c and no coupling reaches, at time t, the
    free (c = 0) solution evaluated at s(t) = (1 - exp(-2 c t)) / (2 c); for
    c -> 0 this degenerates to s = t. Used as an oracle for the dilation flow.
    """
    c = float(damping)
    if c == 0.0:
        return float(t)
    return float((1.0 - np.exp(-2.0 * c * t)) / (2.0 * c))


def fit_first_moment(field, band=2.0, n_terms=8):
    """First moments recovered from a far-field fit of the evolved field.

    Least-squares fit of G - 1/z to sum_{j=1..n_terms} c_j z^-(j+1) over the
    outer ``band`` of the contour on both sides; returns Re c_1 per process.
    """
    z = field.z
    mask = np.abs(field.x) >= field.x.max() - band
    zz = z[mask]
    powers = np.arange(2, n_terms + 2)
    design = zz[:, None] ** (-powers[None, :])
    rhs = (field.G[:, mask] - 1.0 / zz).T
    coef, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    return coef[0].real.copy()
