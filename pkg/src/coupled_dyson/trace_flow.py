"""Trace dynamics of coupled matrix OU processes.

The trace of each matrix process is a linear OU coordinate: the pairwise
eigenvalue repulsion cancels under summation, leaving

    d tau_p = sqrt(2) dW_p - gamma_pp tau_p dt + sum_q gamma_pq tau_q dt

with E[dW_p dW_q] = rho_pq dt (the sqrt(2/beta) single-process form for k=1).
Because the system is linear and Gaussian, exact moments, exact transition
sampling, and the stationary covariance are all available in closed form and
serve as oracles for the stochastic simulators.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from .core_noise import (
    CollisionError,
    UnstableModelError,
    CouplingModel,
    _as_generator,
    correlation_factor,
    validate_model,
)


@dataclass
class TracePath:
    """Time series of trace values, one row per time, one column per process."""

    times: np.ndarray          # (n_times,), strictly increasing
    values: np.ndarray         # (n_times, k) or (n_paths, n_times, k)
    meta: dict

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("trace values must be finite")


@dataclass
class GaussianMoments:
    """Mean/covariance functions of a Gaussian trace process."""

    mean: callable                    # mean(t) -> (k,) array
    covariance: callable              # covariance(t, s) -> (k, k) array
    stationary_covariance: np.ndarray # (k, k)


def simulate_trace_flow(tau0, beta, T, dt, rng, n_paths=1):
    """Euler-Maruyama paths of d tau = sqrt(2/beta) dB - tau/2 dt.

    With ``beta=np.inf`` the noise coefficient is zero (deterministic ODE
    limit). Returns a TracePath with values of shape (n_paths, n_times, 1).
    """
    if dt <= 0 or T <= 0:
        raise ValueError("T and dt must be > 0")
    gen = _as_generator(rng)
    n_steps = int(round(T / dt))
    sigma = 0.0 if np.isinf(beta) else np.sqrt(2.0 / beta)
    tau = np.full(n_paths, float(tau0))
    out = np.empty((n_paths, n_steps + 1))
    out[:, 0] = tau
    for m in range(n_steps):
        noise = sigma * np.sqrt(dt) * gen.standard_normal(n_paths) if sigma else 0.0
        tau = tau + noise - 0.5 * tau * dt
        out[:, m + 1] = tau
    times = dt * np.arange(n_steps + 1)
    return TracePath(times, out[:, :, None], meta={"beta": beta, "dt": dt, "tau0": tau0})


def exact_trace_moments(tau0, beta):
    """Closed-form Gaussian moments of the single trace flow.

    mean(t) = exp(-t/2) tau0,
    cov(t, s) = (2/beta) (exp(-|t-s|/2) - exp(-(t+s)/2)).
    """
    if beta < 1:
        raise ValueError("beta must be >= 1")

    def mean(t):
        return np.exp(-0.5 * np.asarray(t, dtype=float)) * tau0

    def covariance(t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        return (2.0 / beta) * (np.exp(-0.5 * np.abs(t - s)) - np.exp(-0.5 * (t + s)))

    return GaussianMoments(mean=mean, covariance=covariance,
                           stationary_covariance=np.array([[2.0 / beta]]))


def simulate_coupled_traces(model, T, dt, rng, tau0=None, n_paths=1):
    """Euler-Maruyama paths of the coupled trace system.

    d tau_p = sqrt(2) dW_p + (A tau)_p dt with E[dW_p dW_q] = rho_pq dt.
    Unstable models are allowed (transient studies) but draw a warning.
    """
    if dt <= 0 or T <= 0:
        raise ValueError("T and dt must be > 0")
    if not model.is_stable:
        warnings.warn("drift matrix is not stable; stationary-regime results are meaningless",
                      stacklevel=2)
    gen = _as_generator(rng)
    a = model.drift_matrix
    s = correlation_factor(model.rho)
    k = model.k
    n_steps = int(round(T / dt))
    tau = np.zeros((n_paths, k)) if tau0 is None else np.tile(np.asarray(tau0, float), (n_paths, 1))
    out = np.empty((n_paths, n_steps + 1, k))
    out[:, 0] = tau
    amp = np.sqrt(2.0 * dt)
    for m in range(n_steps):
        dw = amp * gen.standard_normal((n_paths, k)) @ s.T
        tau = tau + dw + dt * (tau @ a.T)
        out[:, m + 1] = tau
    times = dt * np.arange(n_steps + 1)
    return TracePath(times, out, meta={"dt": dt, "T": T})


def exact_discretization(a, q, h):
    """Exact one-step law of dx = A x dt + noise with covariance rate Q.

    Returns (F, C): x(t+h) = F x(t) + eta, eta ~ N(0, C), with
    F = exp(A h) and C = int_0^h exp(A s) Q exp(A^T s) ds computed by the
    Van Loan augmented-exponential construction (no Lyapunov solve involved).
    """
    a = np.asarray(a, dtype=float)
    q = np.asarray(q, dtype=float)
    n = a.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -a
    block[:n, n:] = q
    block[n:, n:] = a.T
    e = expm(block * h)
    f = e[n:, n:].T
    c = f @ e[:n, n:]
    return f, 0.5 * (c + c.T)


def trace_noise_covariance(model):
    """Covariance rate Q of the trace-level noise: Q_pq = 2 rho_pq."""
    return 2.0 * model.rho


def sample_stationary_traces(model, n_samples, rng, spacing=2.0, n_chains=100,
                             burn_in=30):
    """Stationary trace samples from the exact exponential-integrator kernel.

    Runs ``n_chains`` independent chains from the origin with the exact
    transition (F, C) at step ``spacing``, discards ``burn_in`` steps, and
    collects ceil(n_samples / n_chains) samples per chain. Only (A, Q) enter;
    the closed-form stationary covariance is never used, so the output is an
    independent check of it.

    Returns an array of shape (>= n_samples, k).
    """
    if not model.is_stable:
        raise UnstableModelError("unstable model")
    gen = _as_generator(rng)
    a = model.drift_matrix
    q = trace_noise_covariance(model)
    f, c = exact_discretization(a, q, spacing)
    l = np.linalg.cholesky(c)
    k = model.k
    per_chain = -(-int(n_samples) // n_chains)
    x = np.zeros((n_chains, k))
    for _ in range(burn_in):
        x = x @ f.T + gen.standard_normal((n_chains, k)) @ l.T
    out = np.empty((per_chain, n_chains, k))
    for m in range(per_chain):
        x = x @ f.T + gen.standard_normal((n_chains, k)) @ l.T
        out[m] = x
    return out.reshape(-1, k)


@dataclass(frozen=True)
class StationaryCovariance:
    sigma: np.ndarray
    det: float


def symmetric_pair_covariance(gamma, rho):
    """Closed-form stationary covariance of the symmetric two-process traces.

    Sigma = [[1 + 2 g r, r + 2 g], [r + 2 g, 1 + 2 g r]] / (2 (1/4 - g^2)),
    det Sigma = (1 - r^2) / (1/4 - g^2); valid for |gamma| < 1/2.
    """
    if abs(gamma) >= 0.5:
        raise UnstableModelError("unstable model: |gamma| >= 1/2")
    denom = 2.0 * (0.25 - gamma * gamma)
    sigma = np.array([[1.0 + 2.0 * gamma * rho, rho + 2.0 * gamma],
                      [rho + 2.0 * gamma, 1.0 + 2.0 * gamma * rho]]) / denom
    det = (1.0 - rho * rho) / (0.25 - gamma * gamma)
    return StationaryCovariance(sigma=sigma, det=det)


def _is_symmetric_pair(model):
    if model.k != 2:
        return False
    g = model.gamma
    return (g[0, 0] == 0.5 and g[1, 1] == 0.5 and g[0, 1] == g[1, 0])


def stationary_covariance(model):
    """Stationary covariance of the coupled traces.

    Solves A Sigma + Sigma A^T + Q = 0 numerically (Q_pq = 2 rho_pq); for the
    symmetric two-process specialization the closed form is returned instead
    (the two agree to 1e-10, which the test suite pins).
    """
    report = validate_model(model)
    if not report.stable:
        raise UnstableModelError("unstable model")
    if _is_symmetric_pair(model):
        return symmetric_pair_covariance(model.gamma[0, 1], model.rho[0, 1])
    a = model.drift_matrix
    q = trace_noise_covariance(model)
    sigma = solve_continuous_lyapunov(a, -q)
    sigma = 0.5 * (sigma + sigma.T)
    return StationaryCovariance(sigma=sigma, det=float(np.linalg.det(sigma)))


def lyapunov_residual(model, sigma):
    """max-norm residual of A Sigma + Sigma A^T + Q."""
    a = model.drift_matrix
    q = trace_noise_covariance(model)
    return float(np.abs(a @ sigma + sigma @ a.T + q).max())


def divergence_of_drift(lambdas):
    """Divergence of the Dyson drift field at an ordered eigenvalue vector.

    -N/2 - (1/N) sum_i sum_{j != i} 1/(lambda_i - lambda_j)^2. Always
    <= -N/2; raises CollisionError when any gap is below 1e-14.
    """
    lam = np.asarray(lambdas, dtype=float)
    n = lam.size
    if n == 1:
        return -0.5
    if np.min(np.diff(np.sort(lam))) < 1e-14:
        raise CollisionError("collision: eigenvalue gap below 1e-14")
    diff = lam[:, None] - lam[None, :]
    np.fill_diagonal(diff, np.inf)
    return -0.5 * n - float(np.sum(diff ** -2)) / n


@dataclass
class VolumeLedger:
    """Liouville ledger along an eigenvalue path.

    log_jacobian = log(J0) + base_rate_term + repulsion_term holds exactly by
    construction at every grid time; the repulsion term is nonpositive.
    """

    times: np.ndarray
    log_jacobian: np.ndarray
    base_rate_term: np.ndarray
    repulsion_term: np.ndarray
    log_j0: float


def integrate_volume(times, eigen_path, J0=1.0):
    """Integrate the drift divergence along an eigenvalue path (trapezoid).

    ``eigen_path`` has one ordered eigenvalue vector per grid time, shape
    (n_times, N). The ledger splits log J_t into the exact base rate
    -N (t - t0) / 2 and the accumulated (nonpositive) repulsion integral.
    """
    times = np.asarray(times, dtype=float)
    path = np.asarray(eigen_path, dtype=float)
    n_times, n = path.shape
    if times.shape != (n_times,):
        raise ValueError("times and eigen_path disagree")
    # repulsion integrand: divergence + N/2 (zero for N=1)
    integrand = np.empty(n_times)
    for m in range(n_times):
        integrand[m] = divergence_of_drift(path[m]) + 0.5 * n
    rep = np.zeros(n_times)
    dt = np.diff(times)
    rep[1:] = np.cumsum(0.5 * dt * (integrand[1:] + integrand[:-1]))
    base = -0.5 * n * (times - times[0])
    log_j0 = float(np.log(J0))
    return VolumeLedger(times=times, log_jacobian=log_j0 + base + rep,
                        base_rate_term=base, repulsion_term=rep, log_j0=log_j0)
