"""Direct integration of the coupled eigenvalue SDEs.

Each process carries N ordered particles with logarithmic pairwise repulsion,
linear damping/coupling across processes, and per-index noise correlated
across processes:

    d lam_i^p = (1/sqrt(N)) dW_{p,i} + (A lam_i)_p dt
                + (1/N) sum_{j != i} phi_R(lam_i^p - lam_j^p) dt,
    E[dW_{p,i} dW_{q,j}] = 2 rho_pq delta_ij dt.

phi_R is the Lipschitz truncation of 1/x used to keep the drift bounded near
collisions; ordering violations of the discrete scheme are handled by step
halving with a sorted-commit fallback.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_noise import _as_generator, correlation_factor

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

#: Number of allowed step halvings before the sorted-commit fallback.
MAX_HALVINGS = 10


class StepCollapseError(RuntimeError):
    """Ordering could not be restored even at the minimum step size."""


_FACTOR_CACHE = {}


def _noise_factor(rho):
    key = rho.tobytes()
    if key not in _FACTOR_CACHE:
        _FACTOR_CACHE[key] = correlation_factor(rho)
    return _FACTOR_CACHE[key]


def default_truncation(N):
    """Default repulsion truncation level R = 10 N.

    The bulk eigenvalue gap scales like 1/N, so the truncation is inactive
    except within a tenth of a typical gap of a collision.
    """
    return 10.0 * N


def phi_R(x, R):
    """Truncated repulsion kernel: 1/x for |x| >= 1/R, R^2 x otherwise.

    Continuous, odd, and bounded by R in absolute value.
    """
    if R <= 0:
        raise ValueError("R must be > 0")
    x = np.asarray(x, dtype=float)
    big = np.abs(x) >= 1.0 / R
    inv = np.divide(1.0, x, out=np.zeros_like(x), where=big)
    out = np.where(big, inv, R * R * x)
    return float(out) if out.ndim == 0 else out


def _repulsion_numpy(lam, R):
    n = lam.shape[-1]
    diff = lam[..., :, None] - lam[..., None, :]
    return phi_R(diff, R).sum(axis=-1) / n


if njit is not None:

    @njit(fastmath=True, cache=True)
    def _repulsion_pairs(lam, R):  # pragma: no cover - exercised via repulsion_drift
        k, n = lam.shape
        out = np.zeros((k, n))
        thr = 1.0 / R
        r2 = R * R
        for p in range(k):
            for i in range(n):
                acc = 0.0
                li = lam[p, i]
                for j in range(n):
                    if j == i:
                        continue
                    d = li - lam[p, j]
                    if d >= thr or d <= -thr:
                        acc += 1.0 / d
                    else:
                        acc += r2 * d
                out[p, i] = acc / n
        return out

else:
    _repulsion_pairs = None


def repulsion_drift(lam, R):
    """(1/N) sum_{j != i} phi_R(lam_i - lam_j) for each particle.

    ``lam`` may carry leading batch axes; the particle axis is last. The
    two-axis case dispatches to a compiled pair loop (this is the hot path
    of the integrator); other shapes fall back to broadcasting.
    """
    lam = np.asarray(lam, dtype=float)
    if _repulsion_pairs is not None and lam.ndim == 2:
        return _repulsion_pairs(lam, float(R))
    return _repulsion_numpy(lam, R)


def net_repulsion(lam, R):
    """Sum over particles of the repulsion drift, accumulated pairwise.

    phi_R is odd exactly in floating point, so each (i, j), (j, i) pair
    cancels to exactly zero; the returned value is exact 0.0 for any valid
    configuration, which is the discrete form of the pairwise-cancellation
    property that makes the trace repulsion-free.
    """
    lam = np.asarray(lam, dtype=float)
    diff = lam[..., :, None] - lam[..., None, :]
    pairs = phi_R(diff, R) + phi_R(-diff, R)
    return 0.5 * pairs.sum(axis=(-2, -1))


def perturbed_zero(N, eps=1e-4):
    """Default initial condition: distinct near-zero ordered eigenvalues."""
    return eps * (np.arange(1, N + 1) - 0.5 * (N + 1)) / N


@dataclass
class EigenEnsembleState:
    """Ordered eigenvalue vectors of the k processes at one time."""

    t: float
    lam: np.ndarray  # (k, N), each row nondecreasing
    R: float
    resorts: int = 0
    rejections: int = 0

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        if np.any(np.diff(self.lam, axis=-1) < 0):
            raise ValueError("eigenvalues must be ordered")

    @property
    def min_gap(self):
        if self.lam.shape[-1] < 2:
            return np.inf
        return float(np.diff(self.lam, axis=-1).min())


def initial_eigen_state(model, lam0=None, R=None, eps=1e-4):
    if lam0 is None:
        lam0 = np.tile(perturbed_zero(model.N, eps), (model.k, 1))
    if R is None:
        R = default_truncation(model.N)
    return EigenEnsembleState(t=0.0, lam=np.array(lam0, dtype=float), R=float(R))


def _drift(lam, a, R):
    lin = np.einsum("pq,qi->pi", a, lam)
    return lin + repulsion_drift(lam, R)


def step_eigen_system(state, model, dt, rng):
    """Advance the eigenvalue system by exactly dt.

    Euler-Maruyama proposals; a proposal that breaks the ordering within any
    process is rejected and retried at half the step (fresh noise), down to
    dt / 2^10. If the minimal step still violates ordering the proposal is
    committed sorted and the resort counter incremented; exact ties after
    sorting raise StepCollapseError.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    gen = _as_generator(rng)
    model_a = model.drift_matrix
    s = _noise_factor(model.rho)
    k, n = state.lam.shape
    noise_scale = np.sqrt(2.0 / n)  # sqrt(2 dt) per index, then 1/sqrt(N)

    lam = state.lam
    resorts = state.resorts
    rejections = state.rejections
    dt_min = dt / 2 ** MAX_HALVINGS
    remaining = dt
    h = dt
    drift = None  # cached per configuration: halving retries reuse it
    while remaining > 1e-15 * dt:
        h = min(h, remaining)
        if drift is None:
            drift = _drift(lam, model_a, state.R)
        dw = noise_scale * np.sqrt(h) * (s @ gen.standard_normal((k, n)))
        proposal = lam + h * drift + dw
        ordered = bool(np.all(np.diff(proposal, axis=-1) > 0))
        if ordered:
            lam = proposal
            drift = None
            remaining -= h
            h = min(2 * h, dt)
        elif h > dt_min:
            rejections += 1
            h *= 0.5
        else:
            proposal = np.sort(proposal, axis=-1)
            if np.any(np.diff(proposal, axis=-1) <= 0):
                raise StepCollapseError(
                    f"step collapse at t={state.t + dt - remaining:.6g}: "
                    "ordering violated at minimum step")
            resorts += 1
            lam = proposal
            drift = None
            remaining -= h
    return EigenEnsembleState(t=state.t + dt, lam=lam, R=state.R,
                              resorts=resorts, rejections=rejections)


def lyapunov_f(state):
    """Confinement-plus-entropy Lyapunov functional of the configuration.

    f = (1/N) sum_p sum_i (lam_i^p)^2 - (1/N^2) sum_p sum_{i != j}
    log|lam_i^p - lam_j^p|; returns +inf on a collision.
    """
    lam = np.asarray(state.lam if hasattr(state, "lam") else state, dtype=float)
    n = lam.shape[-1]
    quad = float((lam ** 2).sum()) / n
    if n == 1:
        return quad
    log_term = 0.0
    for row in np.atleast_2d(lam.reshape(-1, n)):
        gaps = row[:, None] - row[None, :]
        mask = ~np.eye(n, dtype=bool)
        g = np.abs(gaps[mask])
        if np.any(g == 0.0):
            return np.inf
        log_term += float(np.log(g).sum())
    return quad - log_term / n ** 2


@dataclass
class EigenRunResult:
    times: np.ndarray
    paths: np.ndarray | None      # (n_rec, k, N) when recorded
    lyapunov: np.ndarray | None   # (n_rec,) when recorded
    final_state: EigenEnsembleState


def run_eigen_path(model, T, dt, rng, lam0=None, R=None, record_every=None,
                   record_paths=False, record_lyapunov=False):
    """Simulate one replica over [0, T], optionally recording the grid path."""
    state = initial_eigen_state(model, lam0=lam0, R=R)
    gen = _as_generator(rng)  # materialize once: steps must consume one stream
    n_steps = int(round(T / dt))
    times = [0.0]
    paths = [state.lam.copy()] if record_paths else None
    lyap = [lyapunov_f(state)] if record_lyapunov else None
    stride = record_every or 1
    for m in range(1, n_steps + 1):
        state = step_eigen_system(state, model, dt, gen)
        if m % stride == 0 or m == n_steps:
            times.append(state.t)
            if record_paths:
                paths.append(state.lam.copy())
            if record_lyapunov:
                lyap.append(lyapunov_f(state))
    return EigenRunResult(
        times=np.array(times),
        paths=np.array(paths) if record_paths else None,
        lyapunov=np.array(lyap) if record_lyapunov else None,
        final_state=state,
    )
