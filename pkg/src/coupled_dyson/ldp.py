"""Closed-form large-deviation objects for the symmetric coupled trace pair.

Scaled traces (x, y) = (tau_1, tau_2)/N of the two-process system with
damping 1/2, coupling gamma and noise correlation rho satisfy a large
deviation principle whose rate function is the stationary Gaussian quadratic
form I(x, y) = (1/2) v^T Sigma^-1 v. Rare-event paths (instantons) solve a
linear Hamiltonian system that is integrable by matrix exponentials, and the
minimal action converges to I as the horizon grows.

Normalization note: the Freidlin-Wentzell Lagrangian
L = (1/2)(xdot - A x)^T Q^-1 (xdot - A x) with Q = 2[[1, rho], [rho, 1]] is
used throughout, giving H = (1/2) p^T Q p + p^T A x. This is the unique
normalization under which the quasipotential reproduces I; the zero-energy
identity H(Sigma^-1 v, v) = 0 holds exactly and the tests pin it at 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm


class DegenerateModelError(ValueError):
    """Parameters outside |gamma| < 1/2, |rho| < 1: Sigma is not positive definite."""


@dataclass(frozen=True)
class LdpModel:
    """Symmetric two-process trace model: coupling gamma, noise correlation rho."""

    gamma: float
    rho: float

    def require_nondegenerate(self):
        if abs(self.gamma) >= 0.5 or abs(self.rho) >= 1.0:
            raise DegenerateModelError(
                f"degenerate: need |gamma| < 1/2 and |rho| < 1, got {self.gamma}, {self.rho}")

    @property
    def drift(self):
        return np.array([[-0.5, self.gamma], [self.gamma, -0.5]])

    @property
    def noise(self):
        return 2.0 * np.array([[1.0, self.rho], [self.rho, 1.0]])

    @property
    def sigma(self):
        self.require_nondegenerate()
        g, r = self.gamma, self.rho
        return np.array([[1 + 2 * g * r, r + 2 * g],
                         [r + 2 * g, 1 + 2 * g * r]]) / (2 * (0.25 - g * g))

    @property
    def sigma_inv(self):
        self.require_nondegenerate()
        g, r = self.gamma, self.rho
        return np.array([[1 + 2 * g * r, -(r + 2 * g)],
                         [-(r + 2 * g), 1 + 2 * g * r]]) / (2 * (1 - r * r))


def rate_function(x, y, model):
    """I(x, y) = [(1+2 g r)(x^2+y^2) - 2(r+2 g) x y] / (4 (1-r^2)).

    Equals (1/2) v^T Sigma^-1 v; accepts scalars or broadcastable arrays.
    """
    model.require_nondegenerate()
    g, r = model.gamma, model.rho
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    val = ((1 + 2 * g * r) * (x * x + y * y) - 2 * (r + 2 * g) * x * y) / (4 * (1 - r * r))
    return float(val) if val.ndim == 0 else val


def hamiltonian(p, x, model):
    """H = (1/2) p^T Q p + p^T A x.

    = p_x^2 + p_y^2 + 2 rho p_x p_y - (x p_x + y p_y)/2 + gamma (y p_x + x p_y).
    """
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    q = model.noise
    a = model.drift
    return float(0.5 * p @ q @ p + p @ a @ x)


def hamiltonian_matrix(model):
    """Extended linear system matrix [[A, Q], [0, -A^T]] of Hamilton's equations."""
    a = model.drift
    q = model.noise
    top = np.hstack([a, q])
    bottom = np.hstack([np.zeros((2, 2)), -a.T])
    return np.vstack([top, bottom])


@dataclass
class InstantonSolution:
    """Optimal fluctuation path from the origin to a target point."""

    times: np.ndarray
    x_path: np.ndarray     # (n, 2)
    p_path: np.ndarray     # (n, 2)
    p0: np.ndarray
    action: float          # endpoint estimate (1/2) p(T) . x(T)
    terminal_error: float
    hamiltonian_drift: float  # max |H(t) - H(0)| along the path


def solve_instanton(target, T, model, steps=2000):
    """Shoot the linear Hamiltonian flow onto the target at time T.

    p(0) solves M12 p(0) = target where M12 is the upper-right block of
    exp(HT); the path is reconstructed on ``steps`` uniform intervals by
    repeated application of the exact one-step propagator.
    """
    model.require_nondegenerate()
    if T <= 0:
        raise ValueError("T must be > 0")
    target = np.asarray(target, dtype=float)
    hmat = hamiltonian_matrix(model)
    m = expm(hmat * T)
    m12 = m[:2, 2:]
    # M12 = Sigma_T e^{-A^T T} degenerates only in the T -> 0 limit
    svals = np.linalg.svd(m12, compute_uv=False)
    if svals[-1] < 1e-12 or svals[0] > 1e14 * svals[-1]:
        raise np.linalg.LinAlgError("singular transition block (T too small)")
    p0 = np.linalg.solve(m12, target)
    prop = expm(hmat * (T / steps))
    state = np.concatenate([np.zeros(2), p0])
    states = np.empty((steps + 1, 4))
    states[0] = state
    for n in range(steps):
        state = prop @ state
        states[n + 1] = state
    x_path = states[:, :2]
    p_path = states[:, 2:]
    h_vals = np.array([hamiltonian(p, x, model) for p, x in zip(p_path, x_path)])
    action_end = 0.5 * float(p_path[-1] @ x_path[-1])
    return InstantonSolution(
        times=np.linspace(0.0, T, steps + 1),
        x_path=x_path,
        p_path=p_path,
        p0=p0,
        action=action_end,
        terminal_error=float(np.linalg.norm(x_path[-1] - target)),
        hamiltonian_drift=float(np.abs(h_vals - h_vals[0]).max()),
    )


@dataclass(frozen=True)
class ActionEstimates:
    quadrature: float
    endpoint: float
    consistent: bool


def evaluate_action(solution, model, rel_tol=1e-3):
    """Action along the path, by quadrature and by the endpoint formula.

    Quadrature: trapezoid of p . xdot - H with xdot = A x + Q p from
    Hamilton's equations; endpoint: (1/2) p(T) . x(T) (integration by parts,
    valid for paths leaving the fixed point). The two are flagged
    inconsistent when they differ by more than rel_tol * (1 + |action|).
    """
    a = model.drift
    q = model.noise
    x = solution.x_path
    p = solution.p_path
    xdot = x @ a.T + p @ q.T
    integrand = np.einsum("ij,ij->i", p, xdot)
    h_vals = 0.5 * np.einsum("ij,ij->i", p @ q, p) + np.einsum("ij,ij->i", p @ a, x)
    quad = float(np.trapezoid(integrand - h_vals, solution.times))
    end = 0.5 * float(p[-1] @ x[-1])
    consistent = abs(quad - end) <= rel_tol * (1.0 + abs(end))
    return ActionEstimates(quadrature=quad, endpoint=end, consistent=consistent)


@dataclass
class PhaseDiagnostics:
    gammas: np.ndarray
    det_sigma_inv: np.ndarray
    null_directions: np.ndarray   # (n, 2) minimal-eigenvalue eigenvectors of Sigma^-1
    null_eigenvalues: np.ndarray


def phase_diagnostics(gammas, rho):
    """det Sigma^-1 and the softest fluctuation direction across a gamma sweep.

    det Sigma^-1 = (1/4 - gamma^2) / (1 - rho^2); as gamma -> 1/2 the
    minimal-eigenvalue eigenvector aligns with (1, 1)/sqrt(2), and with
    (1, -1)/sqrt(2) as gamma -> -1/2.
    """
    if abs(rho) >= 1.0:
        raise DegenerateModelError("degenerate: |rho| >= 1")
    gammas = np.asarray(gammas, dtype=float)
    dets = (0.25 - gammas ** 2) / (1.0 - rho ** 2)
    dirs = np.empty((gammas.size, 2))
    vals = np.empty(gammas.size)
    for i, g in enumerate(gammas):
        si = LdpModel(gamma=float(g), rho=rho).sigma_inv
        w, v = np.linalg.eigh(si)
        vals[i] = w[0]
        d = v[:, 0]
        dirs[i] = d if d[0] >= 0 else -d
    return PhaseDiagnostics(gammas=gammas, det_sigma_inv=dets,
                            null_directions=dirs, null_eigenvalues=vals)


def neural_stability_shift(gamma):
    """Stability-boundary shift ratio (1 + gamma^2 / (1 - 4 gamma^2))^(1/2).

    Ratio of the critical coupling strength at coupling gamma to its
    uncoupled value; diverges as |gamma| -> 1/2.
    """
    gamma = float(gamma)
    if abs(gamma) >= 0.5:
        raise ValueError("stability shift requires |gamma| < 1/2")
    return float(np.sqrt(1.0 + gamma * gamma / (1.0 - 4.0 * gamma * gamma)))
