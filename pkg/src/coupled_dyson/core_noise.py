"""Model parameters and correlated Brownian increments.

The coupled system is parameterized by a damping/coupling matrix ``gamma``
(diagonal entries damp, off-diagonal entries couple) and a noise-correlation
matrix ``rho``. Everything downstream (trace simulators, matrix/eigenvalue
integrators, PDE solvers) consumes a validated :class:`CouplingModel` plus a
reproducible noise stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Margin below zero required of drift-eigenvalue real parts to call a model stable.
STABILITY_MARGIN = 1e-12

#: Most negative eigenvalue tolerated in the noise-correlation matrix.
CORRELATION_PSD_TOL = 1e-10


class NoiseCorrelationError(ValueError):
    """The noise-correlation matrix is not a valid correlation matrix."""


class UnstableModelError(RuntimeError):
    """Operation requires a stable drift matrix but the model is unstable."""


class CollisionError(RuntimeError):
    """Eigenvalues collided (or came within machine tolerance of colliding)."""


def _check_correlation(rho):
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NoiseCorrelationError("invalid noise correlation: rho must be square")
    if not np.allclose(rho, rho.T, rtol=0.0, atol=1e-12):
        raise NoiseCorrelationError("invalid noise correlation: rho not symmetric")
    if not np.allclose(np.diag(rho), 1.0, rtol=0.0, atol=1e-12):
        raise NoiseCorrelationError("invalid noise correlation: diagonal != 1")
    smallest = np.linalg.eigvalsh(rho).min()
    if smallest < -CORRELATION_PSD_TOL:
        raise NoiseCorrelationError(
            f"invalid noise correlation: smallest eigenvalue {smallest:.3e} < -{CORRELATION_PSD_TOL:g}"
        )
    return rho


@dataclass(frozen=True)
class CouplingModel:
    """Parameters of k coupled N x N matrix OU processes.

    gamma[p][p] are damping coefficients, gamma[p][q] (p != q) coupling
    coefficients; the drift matrix acting on the stacked processes is
    A[p][p] = -gamma[p][p], A[p][q] = +gamma[p][q]. rho is the
    noise-correlation matrix (symmetric, unit diagonal, PSD).
    """

    k: int
    N: int
    gamma: np.ndarray
    rho: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        if self.k < 1 or self.N < 1:
            raise ValueError("k and N must be >= 1")
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        gamma = np.asarray(self.gamma, dtype=float)
        if gamma.shape != (self.k, self.k):
            raise ValueError(f"gamma must be {self.k}x{self.k}")
        rho = _check_correlation(self.rho)
        if rho.shape != (self.k, self.k):
            raise NoiseCorrelationError(f"rho must be {self.k}x{self.k}")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "rho", rho)

    @property
    def drift_matrix(self):
        """k x k drift matrix A with A_pp = -gamma_pp, A_pq = +gamma_pq."""
        a = self.gamma.copy()
        np.fill_diagonal(a, -np.diag(self.gamma))
        return a

    @property
    def drift_eigenvalues(self):
        return np.linalg.eigvals(self.drift_matrix)

    @property
    def is_stable(self):
        return bool(np.all(self.drift_eigenvalues.real < -STABILITY_MARGIN))

    @classmethod
    def symmetric_pair(cls, gamma, rho, N=1, beta=1.0):
        """Two-process specialization: damping 1/2 each, coupling gamma, correlation rho."""
        g = np.array([[0.5, gamma], [gamma, 0.5]])
        r = np.array([[1.0, rho], [rho, 1.0]])
        return cls(k=2, N=N, gamma=g, rho=r, beta=beta)

    @classmethod
    def single(cls, damping=0.5, N=1, beta=1.0):
        """One-process model (plain matrix OU / Dyson trace flow)."""
        return cls(k=1, N=N, gamma=np.array([[damping]]), rho=np.eye(1), beta=beta)


@dataclass(frozen=True)
class ValidationReport:
    stable: bool
    drift_eigenvalues: np.ndarray


def validate_model(model):
    """Check the noise correlation and report drift eigenvalues and stability.

    The stability flag is true iff every drift eigenvalue has real part below
    -STABILITY_MARGIN; marginally stable models are reported unstable.
    """
    _check_correlation(model.rho)
    eigs = model.drift_eigenvalues
    stable = bool(np.all(eigs.real < -STABILITY_MARGIN))
    return ValidationReport(stable=stable, drift_eigenvalues=eigs)


@dataclass(frozen=True)
class SeededRng:
    """Counter-based noise stream keyed by (master_seed, stream_id).

    Streams with distinct ids are statistically independent (SeedSequence
    spawn-key construction over the Philox counter generator), and a given
    (seed, stream) pair reproduces the identical sequence regardless of what
    other streams were consumed -- replicas may run in any order or in
    parallel.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self):
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seq))

    def stream(self, stream_id):
        return SeededRng(self.master_seed, stream_id)


def _as_generator(rng):
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be a SeededRng or numpy Generator")


def correlation_factor(rho):
    """Square-root factor S with S @ S.T = rho.

    Cholesky when rho is strictly positive definite; otherwise the symmetric
    PSD square root with small negative eigenvalues clipped to zero, so that
    degenerate correlations (rho_pq = +-1) are accepted.
    """
    rho = _check_correlation(rho)
    try:
        return np.linalg.cholesky(rho)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(rho)
        w = np.clip(w, 0.0, None)
        return v * np.sqrt(w)


def correlated_scalar_increments(rho, dt, rng, shape=()):
    """Brownian increments dW with covariance rho * dt.

    Returns an array of shape ``shape + (k,)`` (a bare k-vector for the
    default empty shape).
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    gen = _as_generator(rng)
    s = correlation_factor(rho)
    k = s.shape[0]
    if isinstance(shape, int):
        shape = (shape,)
    z = gen.standard_normal(tuple(shape) + (k,))
    return np.sqrt(dt) * (z @ s.T)


def symmetric_matrix_increment(N, beta, dt, rng):
    """Symmetric Brownian increment: off-diagonal variance dt, diagonal 2*dt.

    Entries above the diagonal are independent. The 1/sqrt(beta*N) prefactor
    of the matrix OU equation is NOT applied here; consumers scale.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if beta not in (1, 2):
        raise ValueError("beta must be 1 or 2 for matrix increments")
    gen = _as_generator(rng)
    g = gen.standard_normal((N, N))
    # (g + g.T)/sqrt(2): off-diagonal variance 1, diagonal variance 2, exact symmetry
    return np.sqrt(dt) * (g + g.T) / np.sqrt(2.0)


def correlated_matrix_increments(model, dt, rng):
    """k symmetric increments with entrywise cross-correlation rho_pq.

    E[dB_p_ij dB_q_ij] = rho_pq * dt above the diagonal and 2 * rho_pq * dt
    on it, matching the marginals of :func:`symmetric_matrix_increment`.
    Returns an array of shape (k, N, N).
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    gen = _as_generator(rng)
    s = correlation_factor(model.rho)
    z = gen.standard_normal((model.k, model.N, model.N))
    mixed = np.einsum("pq,qij->pij", s, z)
    return np.sqrt(dt) * (mixed + np.transpose(mixed, (0, 2, 1))) / np.sqrt(2.0)
