"""Dimensionless unit system and momentum-space quadrature over one momentum class.

Conventions used throughout the package:

- momenta are measured in units of the two-photon recoil hbar*k, so the
  class coordinate q lives on the interval I = [-1/2, 1/2];
- frequencies are measured in units of the recoil frequency omega_k and
  times as lam = omega_k * t;
- the resonant momentum is p0 = 0, which fixes the laser detuning to
  Delta_omega / omega_k = 1 and the Doppler detuning to nu_k/omega_k = 2q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, NumericError

CLASS_HALF_WIDTH = 0.5
DETUNING_RATIO = 1.0  # Delta_omega / omega_k at p0 = 0

# window beyond which a Gaussian carries < 1e-31 of its mass; nodes are
# placed on [-support, support] so that narrow distributions stay resolved
SUPPORT_SIGMAS = 12.0

DEFAULT_NODES = 200
MIN_NODES = 32
MAX_SIGMA_Q = 0.25


@dataclass(frozen=True)
class UnitConvention:
    """Record of the fixed dimensionless conventions (informational)."""

    momentum_unit: str = "hbar*k"
    frequency_unit: str = "omega_k"
    time_variable: str = "lam = omega_k * t"
    resonant_momentum: float = 0.0
    detuning_ratio: float = DETUNING_RATIO


DEFAULT_UNITS = UnitConvention()


def doppler_ratio(q):
    """Doppler detuning nu_k / omega_k = 2 q for class coordinate q."""
    return 2.0 * np.asarray(q, dtype=float)


@dataclass(frozen=True)
class MomentumDistribution:
    """Quadrature-ready momentum-mode weight |phi_0(q)|^2 on the class interval.

    Attributes
    ----------
    sigma_q : float
        Standard deviation of the underlying Gaussian, in units of hbar*k.
    nodes : np.ndarray
        Gauss-Legendre nodes, contained in I = [-1/2, 1/2].
    weights : np.ndarray
        Plain quadrature weights belonging to ``nodes``.
    density : np.ndarray
        Normalized density values |phi_0(q_i)|^2 with
        sum(weights * density) == 1 after truncation to I.
    """

    sigma_q: float
    nodes: np.ndarray
    weights: np.ndarray
    density: np.ndarray

    @property
    def measure(self) -> np.ndarray:
        """Combined integration measure w_i * |phi_0(q_i)|^2 (sums to 1)."""
        return self.weights * self.density

    def moment(self, k: int) -> float:
        """k-th moment of q under the truncated, renormalized density."""
        return float(np.sum(self.measure * self.nodes ** k))


def make_gaussian_mode(sigma_q: float, n_nodes: int = DEFAULT_NODES) -> MomentumDistribution:
    """Truncated Gaussian momentum distribution with Gauss-Legendre nodes.

    The Gaussian is truncated to the class interval I and renormalized there.
    Nodes are restricted to [-min(1/2, 12*sigma_q), ...]; outside that window
    the density is below 1e-31 of its peak, so integrals over I are unchanged
    at double precision while narrow distributions remain fully resolved.
    """
    if not (0.0 < sigma_q <= MAX_SIGMA_Q):
        raise DomainError(
            f"sigma_q must lie in (0, {MAX_SIGMA_Q}], got {sigma_q!r}"
        )
    if n_nodes < MIN_NODES:
        raise ConfigurationError(f"n_nodes must be >= {MIN_NODES}, got {n_nodes}")

    half_width = min(CLASS_HALF_WIDTH, SUPPORT_SIGMAS * sigma_q)
    x, w = np.polynomial.legendre.leggauss(int(n_nodes))
    nodes = half_width * x
    weights = half_width * w
    density = np.exp(-nodes ** 2 / (2.0 * sigma_q ** 2))
    density /= np.sum(weights * density)
    return MomentumDistribution(float(sigma_q), nodes, weights, density)


def integrate(f, dist: MomentumDistribution):
    """Weighted integral int_I dq |phi_0|^2 f(q) over the distribution.

    ``f`` may be a callable of the node array or an array of per-node values.
    """
    vals = f(dist.nodes) if callable(f) else np.asarray(f)
    if vals.shape[-1] != dist.nodes.shape[0]:
        raise ConfigurationError(
            f"integrand has {vals.shape[-1]} values for {dist.nodes.shape[0]} nodes"
        )
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = int(np.argwhere(bad)[0][-1])
        raise NumericError(f"non-finite integrand value at node index {idx}")
    return np.sum(dist.measure * vals, axis=-1)
