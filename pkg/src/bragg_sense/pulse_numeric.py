"""Adaptive Runge-Kutta evolution of the truncated multi-class Hamiltonian.

Ground truth for validating the closed-form pulse transfer and the only
route for non-box envelopes (Blackman pulses).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import ConfigurationError, DomainError, IntegrationError
from .units_grid import DETUNING_RATIO

DEFAULT_CLASSES = (-2, 3)
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12

BLACKMAN_A0 = 0.42


@dataclass(frozen=True)
class EnvelopeSpec:
    """Pulse envelope: shape in {"box", "blackman"}, peak eps, area tau."""

    shape: str
    eps: float
    tau: float

    def __post_init__(self):
        if self.shape not in ("box", "blackman"):
            raise ConfigurationError(f"unknown envelope shape {self.shape!r}")
        if self.eps <= 0.0:
            raise DomainError(f"eps must be positive, got {self.eps!r}")
        if self.tau < 0.0:
            raise DomainError(f"tau must be non-negative, got {self.tau!r}")

    @property
    def duration(self) -> float:
        """Dimensionless pulse length lam_j; the envelope area equals tau."""
        if self.shape == "box":
            return self.tau / self.eps
        return self.tau / (BLACKMAN_A0 * self.eps)

    def coupling(self, lam):
        """Time-dependent coupling eps_td(lam) for 0 <= lam <= duration."""
        if self.shape == "box":
            return self.eps * np.ones_like(np.asarray(lam, dtype=float))
        x = 2.0 * np.pi * np.asarray(lam, dtype=float) / self.duration
        return self.eps * (0.42 - 0.5 * np.cos(x) + 0.08 * np.cos(2.0 * x))

    def area(self) -> float:
        """Numerical pulse area; equals tau to quadrature accuracy."""
        if self.shape == "box":
            return self.eps * self.duration
        val, _ = quad(lambda l: float(self.coupling(l)), 0.0, self.duration, limit=200)
        return val


def class_indices(classes=DEFAULT_CLASSES) -> np.ndarray:
    n_min, n_max = classes
    if n_max < n_min + 1 or n_min > 0 or n_max < 1:
        raise ConfigurationError(f"class range {classes!r} must contain classes 0 and 1")
    return np.arange(n_min, n_max + 1)


def class_detunings(q: float, classes=DEFAULT_CLASSES) -> np.ndarray:
    """Diagonal detunings delta_n = (2n - 1) q + n (n - 1)."""
    ns = class_indices(classes)
    return (2 * ns - 1) * q + ns * (ns - 1)


def evolve_pulse(q: float, env: EnvelopeSpec, theta: float = 0.0,
                 classes=DEFAULT_CLASSES, rtol: float = DEFAULT_RTOL,
                 atol: float = DEFAULT_ATOL, lam_grid=None):
    """Propagator of the truncated class Hamiltonian over one pulse.

    Returns the full n x n complex transfer matrix at the end of the pulse,
    or an array of matrices at the requested ``lam_grid`` times.  Columns are
    evolved unit basis states; the generator is Hermitian, so the result is
    unitary to integrator accuracy.
    """
    ns = class_indices(classes)
    k = len(ns)
    delta = class_detunings(q, classes)
    Hd = np.diag(delta).astype(complex)
    C = np.zeros((k, k), complex)
    for i in range(k - 1):
        C[i + 1, i] = 0.5 * np.exp(1j * theta)
        C[i, i + 1] = 0.5 * np.exp(-1j * theta)

    lam_end = env.duration if lam_grid is None else float(np.max(lam_grid))
    if lam_end == 0.0:
        eye = np.eye(k, dtype=complex)
        return eye if lam_grid is None else np.broadcast_to(eye, (len(lam_grid), k, k)).copy()

    def rhs(lam, y):
        H = Hd + env.coupling(lam) * C
        return (-1j * (H @ y.reshape(k, k))).ravel()

    sol = solve_ivp(
        rhs, (0.0, lam_end), np.eye(k, dtype=complex).ravel(),
        method="DOP853", rtol=rtol, atol=atol,
        dense_output=lam_grid is not None,
    )
    if not sol.success:
        raise IntegrationError(
            f"pulse integration failed: {sol.message}", lam_reached=float(sol.t[-1])
        )
    if lam_grid is None:
        return sol.y[:, -1].reshape(k, k)
    return np.array([sol.sol(l).reshape(k, k) for l in np.asarray(lam_grid, dtype=float)])


def main_block(U: np.ndarray, env: EnvelopeSpec, classes=DEFAULT_CLASSES) -> np.ndarray:
    """Dressed 2x2 main-class block matching the analytic transfer gauge.

    The laser-frame phases exp(+-i Delta_omega t/2) are applied to the two
    main classes; a residual global phase of order eps^2 remains and cancels
    from every bilinear observable.
    """
    ns = class_indices(classes)
    i0 = int(np.searchsorted(ns, 0))
    lam = env.duration
    half = DETUNING_RATIO * lam / 2.0
    D = np.diag([np.exp(1j * half), np.exp(-1j * half)])
    return D @ U[i0:i0 + 2, i0:i0 + 2]


def numeric_transfer(q: float, env: EnvelopeSpec, theta: float = 0.0,
                     classes=DEFAULT_CLASSES, rtol: float = DEFAULT_RTOL,
                     atol: float = DEFAULT_ATOL) -> np.ndarray:
    """Dressed main-class 2x2 transfer (T, R; Rt, Tt) from the integrator."""
    U = evolve_pulse(q, env, theta, classes, rtol, atol)
    return main_block(U, env, classes)


def evolve_pulse_batch(q_values, env: EnvelopeSpec, theta: float = 0.0,
                       classes=DEFAULT_CLASSES, rtol: float = DEFAULT_RTOL,
                       atol: float = DEFAULT_ATOL) -> np.ndarray:
    """Propagators for many momenta in one adaptive solve.

    The per-momentum Hamiltonians are independent, so the stacked system is
    block diagonal; a single solver call removes most of the per-node
    overhead.  Returns an array of shape (len(q_values), n, n).
    """
    q_values = np.atleast_1d(np.asarray(q_values, dtype=float))
    ns = class_indices(classes)
    k = len(ns)
    nq = q_values.size
    delta = (2 * ns - 1)[None, :] * q_values[:, None] + (ns * (ns - 1))[None, :]
    C = np.zeros((k, k), complex)
    for i in range(k - 1):
        C[i + 1, i] = 0.5 * np.exp(1j * theta)
        C[i, i + 1] = 0.5 * np.exp(-1j * theta)

    lam_end = env.duration
    if lam_end == 0.0:
        return np.broadcast_to(np.eye(k, dtype=complex), (nq, k, k)).copy()

    def rhs(lam, y):
        Y = y.reshape(nq, k, k)
        out = np.einsum("ij,qjm->qim", C, Y) * env.coupling(lam)
        out += delta[:, :, None] * Y
        return (-1j * out).ravel()

    y0 = np.broadcast_to(np.eye(k, dtype=complex), (nq, k, k)).ravel()
    sol = solve_ivp(rhs, (0.0, lam_end), y0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(
            f"batched pulse integration failed: {sol.message}",
            lam_reached=float(sol.t[-1]),
        )
    return sol.y[:, -1].reshape(nq, k, k)


def numeric_transfer_batch(q_values, env: EnvelopeSpec, theta: float = 0.0,
                           classes=DEFAULT_CLASSES, rtol: float = DEFAULT_RTOL,
                           atol: float = DEFAULT_ATOL) -> np.ndarray:
    """Dressed main-class blocks, shape (len(q_values), 2, 2)."""
    Us = evolve_pulse_batch(q_values, env, theta, classes, rtol, atol)
    ns = class_indices(classes)
    i0 = int(np.searchsorted(ns, 0))
    half = DETUNING_RATIO * env.duration / 2.0
    D = np.diag([np.exp(1j * half), np.exp(-1j * half)])
    return np.einsum("ij,qjm->qim", D, Us[:, i0:i0 + 2, i0:i0 + 2])


def reflectivity_profile(env: EnvelopeSpec, q_grid, theta: float = 0.0,
                         classes=DEFAULT_CLASSES, rtol: float = DEFAULT_RTOL,
                         atol: float = DEFAULT_ATOL):
    """Momentum-resolved reflectivities |R(q)|^2 and |Rt(q)|^2.

    ``q_grid`` must lie inside the class interval.
    """
    q_grid = np.asarray(q_grid, dtype=float)
    if np.any(np.abs(q_grid) > 0.5):
        raise DomainError("q grid must lie inside the class interval [-1/2, 1/2]")
    R2 = np.empty_like(q_grid)
    Rt2 = np.empty_like(q_grid)
    for i, q in enumerate(q_grid):
        G = numeric_transfer(q, env, theta, classes, rtol, atol)
        R2[i] = abs(G[0, 1]) ** 2
        Rt2[i] = abs(G[1, 0]) ** 2
    return R2, Rt2
