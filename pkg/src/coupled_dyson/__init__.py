"""Coupled matrix Ornstein-Uhlenbeck processes and their spectral dynamics.

Submodules:
  core_noise  -- model parameters, validation, correlated Brownian increments
  trace_flow  -- trace SDEs, exact Gaussian moments, Lyapunov covariance,
                 phase-space volume ledger
  matrix_sde  -- full matrix-level simulation (ground-truth oracle)
  eigen_sde   -- coupled eigenvalue SDEs with truncated repulsion
  spectral    -- Stieltjes transforms, semicircle closed forms, SFF, distances
  burgers     -- coupled Burgers-type PDE for the limiting transforms
  ldp         -- rate function, Hamiltonian, instantons, phase diagnostics
  cli         -- configuration-driven experiment runner (coupled-dyson)
"""

from .core_noise import CouplingModel, SeededRng, validate_model

__all__ = ["CouplingModel", "SeededRng", "validate_model"]
__version__ = "0.1.0"
