"""Closed-form Bragg-pulse transfer matrices for box pulses.

Velocity-selective SU(2) coefficients of detuned Rabi oscillations, plus the
second-order perturbative corrections describing atom loss into the adjacent
momentum classes (parasitic diffraction).  All functions are vectorized over
the class coordinate q.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PerturbativeRangeWarning
from .units_grid import DETUNING_RATIO

# accuracy claims are only validated up to this coupling strength
EPS_VALIDATED = 0.5


@dataclass(frozen=True)
class PulseParams:
    """Box-pulse parameters: coupling eps = Omega_0/omega_k, area tau, phase theta."""

    eps: float
    tau: float
    theta: float = 0.0

    def __post_init__(self):
        if self.eps <= 0.0:
            raise DomainError(f"eps must be positive, got {self.eps!r}")
        if self.tau < 0.0:
            raise DomainError(f"tau must be non-negative, got {self.tau!r}")

    @property
    def duration(self) -> float:
        """Dimensionless pulse duration lam = tau / eps."""
        return self.tau / self.eps


@dataclass(frozen=True)
class PulseTransfer:
    """Complex 2x2 main-class transfer plus loss couplings to classes -1, 2.

    The main-class block is (T, R; Rt, Tt) = (tt, rr; -rr*, tt*) @ (gammas).
    Adjacent couplings are first/second-order amplitudes whose moduli are
    accurate to O(eps^3); their phases carry the prefactors exp(-i omega_m lam)
    but are not trustworthy (truncation artifact) and are not exposed in any
    derived result.
    """

    T: np.ndarray
    R: np.ndarray
    Rt: np.ndarray
    Tt: np.ndarray
    tt: np.ndarray
    rr: np.ndarray
    g00: np.ndarray
    g01: np.ndarray
    g10: np.ndarray
    g11: np.ndarray
    g20: np.ndarray
    g21: np.ndarray
    gm10: np.ndarray
    gm11: np.ndarray
    omega_m1: np.ndarray
    omega_2: np.ndarray
    v: np.ndarray
    f: np.ndarray
    beta: np.ndarray
    phi_dyn: float
    range_warning: bool = field(default=False)

    def matrix(self) -> np.ndarray:
        """Main-class block with shape (..., 2, 2)."""
        return np.stack(
            [np.stack([self.T, self.R], axis=-1),
             np.stack([self.Rt, self.Tt], axis=-1)],
            axis=-2,
        )


def doppler(q, eps: float):
    """Dimensionless Doppler detuning v = nu_k/Omega_0 = 2 q / eps."""
    return 2.0 * np.asarray(q, dtype=float) / eps


def effective_rabi(v):
    """f = sqrt(1 + v^2)."""
    return np.sqrt(1.0 + np.asarray(v) ** 2)


def _sinc(x):
    """sin(x)/x with a series branch near zero."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)
    return out


def vs_coefficients(q, pulse: PulseParams):
    """Velocity-selective coefficients (tt, rr) of the unitary pulse block.

    tt = e^{i phi}[cos(f tau/2) + i (v/f) sin(f tau/2)],
    rr = -i e^{i(phi - theta)} (tau/2) sinc(f tau/2),
    with phi = tau/(2 eps) the dynamic laser phase and |tt|^2 + |rr|^2 = 1.
    """
    v = doppler(q, pulse.eps)
    f = effective_rabi(v)
    half = f * pulse.tau / 2.0
    phi = DETUNING_RATIO * pulse.tau / (2.0 * pulse.eps)
    tt = np.exp(1j * phi) * (np.cos(half) + 1j * (v / f) * np.sin(half))
    rr = -1j * np.exp(1j * (phi - pulse.theta)) * (pulse.tau / 2.0) * _sinc(half)
    return tt, rr


def _corrected_su2(q, pulse: PulseParams):
    """Unitary block with the second-order Rabi-frequency correction.

    Composition of the bare rotation at angle f*tau/2 with the correction
    rotation at angle beta*f*eps^2*tau/16 about the same axis.
    """
    eps = pulse.eps
    v = doppler(q, eps)
    f = effective_rabi(v)
    beta = (v / f) ** 2 - 1.0 / (2.0 * f * f)
    phi = DETUNING_RATIO * pulse.tau / (2.0 * eps)
    eth = np.exp(-1j * pulse.theta)

    def tfun(arg):
        return np.cos(arg) + 1j * (v / f) * np.sin(arg)

    def rfun(arg):
        return -1j * eth * np.sin(arg) / f

    a1 = f * pulse.tau / 2.0
    a2 = beta * f * eps ** 2 * pulse.tau / 16.0
    tt = np.exp(1j * phi) * (tfun(a1) * tfun(a2) - rfun(a1) * np.conj(rfun(a2)))
    rr = np.exp(1j * phi) * (tfun(a1) * rfun(a2) + rfun(a1) * np.conj(tfun(a2)))
    return tt, rr, v, f, beta, phi


def _gamma_d(q, eps: float, tau: float):
    """Diagonal loss factor gamma_d(q, tau)."""
    v = doppler(q, eps)
    f = effective_rabi(v)
    fast = np.exp(-1j * (2.0 / eps + 1.5 * v) * tau)
    return (
        -1.0 / 16.0
        - 3j * v / (32.0 * f ** 3) * np.sin(f * tau)
        + fast / 16.0 * (np.cos(f * tau / 2.0) + 1j * (v / f) * np.sin(f * tau / 2.0))
    )


def _gamma_od(q, eps: float, tau: float):
    """Off-diagonal loss factor gamma_od(q, tau).

    First-term coefficient is -3v/(16 f^2) and the fast phase carries
    -3v/2; both fixed against the multi-class integrator (see ledger).
    """
    v = doppler(q, eps)
    f = effective_rabi(v)
    fast = np.exp(-1j * (2.0 / eps - 1.5 * v) * tau)
    return (
        -3.0 * v / (16.0 * f ** 2) * np.sin(f * tau / 2.0) ** 2
        + 1j * fast / (16.0 * f) * np.sin(f * tau / 2.0)
        + 3j * v ** 2 / (32.0 * f ** 3) * np.sin(f * tau)
    )


def loss_factors(q, pulse: PulseParams):
    """Main-class loss block (g00, g01; g10, g11) to second order in eps."""
    q = np.asarray(q, dtype=float)
    eps, tau = pulse.eps, pulse.tau
    ep, em = np.exp(1j * pulse.theta), np.exp(-1j * pulse.theta)
    g00 = 1.0 + eps ** 2 * _gamma_d(-q, eps, tau)
    g11 = 1.0 + eps ** 2 * _gamma_d(q, eps, tau)
    g01 = em * eps ** 2 * _gamma_od(-q, eps, tau)
    g10 = ep * eps ** 2 * _gamma_od(q, eps, tau)
    return g00, g01, g10, g11


def adjacent_couplings(q, pulse: PulseParams):
    """Couplings (g20, g21, gm10, gm11) into classes 2 and -1, with the
    interaction-picture frequencies (omega_m1, omega_2) of their phase
    prefactors exp(-i omega_m lam).  Only the moduli are reliable.
    """
    q = np.asarray(q, dtype=float)
    eps, tau, theta = pulse.eps, pulse.tau, pulse.theta
    v = doppler(q, eps)
    f = effective_rabi(v)
    e = np.exp

    g20 = eps * e(-2j * theta) / 16.0 * (
        eps
        - e(1j * (2.0 / eps + 1.5 * v + eps / 4.0) * tau)
        * (eps * np.cos(f * tau / 2.0) - 1j * (4.0 - 3.0 * eps * v) / f * np.sin(f * tau / 2.0))
    )
    gm11 = eps * e(2j * theta) / 16.0 * (
        eps
        - e(1j * (2.0 / eps - 1.5 * v + eps / 8.0) * tau)
        * (eps * np.cos((4.0 * f - eps) * tau / 8.0)
           - 1j * (4.0 + 3.0 * v * eps) / f * np.sin((4.0 * f - eps) * tau / 8.0))
    )
    g21 = eps * e(-1j * theta) / 16.0 * (
        e(1j * (2.0 / eps + 1.5 * v + eps / 4.0) * tau)
        * (1j * f * eps / (f * (f + v)) * np.sin(f * tau / 2.0)
           - (4.0 - 3.0 * v * eps) / (f * (f + v)) * np.cos(f * tau / 2.0)
           - e(-0.5j * f * tau) * v * (eps + (4.0 - 3.0 * v * eps) / f))
        + 4.0 - 2.0 * v * eps
    )
    gm10 = eps * e(1j * theta) / 16.0 * (
        e(1j * (2.0 / eps - 1.5 * v + eps / 8.0) * tau)
        * (1j * f * eps / (f * (f + v)) * np.sin((4.0 * f - eps) * tau / 8.0)
           - (4.0 + 3.0 * v * eps) / (f * (f + v)) * np.cos((4.0 * f - eps) * tau / 8.0)
           + e(1j * (4.0 * f - eps) / 8.0 * tau) * v * (eps - (4.0 + 3.0 * v * eps) / f))
        + 4.0 + 2.0 * v * eps
    )

    eps_v = eps * v
    omega_2 = 2.0 + 1.5 * eps_v + eps ** 2 * (2.0 - eps_v) / 8.0 + 2.0 * DETUNING_RATIO
    omega_m1 = 2.0 - 1.5 * eps_v + eps ** 2 * (2.0 + eps_v) / 8.0 - DETUNING_RATIO
    return g20, g21, gm10, gm11, omega_m1, omega_2


def pert_transfer(q, pulse: PulseParams) -> PulseTransfer:
    """Full second-order pulse transfer, including loss to adjacent classes.

    Trigonometric factors keep their eps-dependent frequencies exactly;
    only amplitude prefactors are truncated (anti-secular bookkeeping).
    """
    warn = False
    if pulse.eps > EPS_VALIDATED:
        warn = True
        warnings.warn(
            f"eps = {pulse.eps} exceeds the validated perturbative range "
            f"(<= {EPS_VALIDATED}); results carry no accuracy guarantee",
            PerturbativeRangeWarning,
            stacklevel=2,
        )
    q = np.asarray(q, dtype=float)
    tt, rr, v, f, beta, phi = _corrected_su2(q, pulse)
    g00, g01, g10, g11 = loss_factors(q, pulse)
    T = tt * g00 + rr * g10
    R = tt * g01 + rr * g11
    Rt = -np.conj(rr) * g00 + np.conj(tt) * g10
    Tt = -np.conj(rr) * g01 + np.conj(tt) * g11
    g20, g21, gm10, gm11, om1, om2 = adjacent_couplings(q, pulse)
    return PulseTransfer(
        T=T, R=R, Rt=Rt, Tt=Tt, tt=tt, rr=rr,
        g00=g00, g01=g01, g10=g10, g11=g11,
        g20=g20, g21=g21, gm10=gm10, gm11=gm11,
        omega_m1=om1, omega_2=om2,
        v=v, f=f, beta=beta, phi_dyn=float(phi),
        range_warning=warn,
    )
