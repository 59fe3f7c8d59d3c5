"""Mach-Zehnder assembly: transfer matrix, path decomposition, signals,
script quantities and position-space exit distributions.

The interferometer phase phi is reported in the convention in which the
ideal (delta-pulse, resonant) sequence gives a population-difference
contribution of exactly cos(phi); the constant dynamic laser phase
(lam_1 - lam_0) is absorbed into phi and the scan knob is theta_2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, NumericError, OverlapRegimeWarning
from .pulse_analytic import PulseParams, pert_transfer, vs_coefficients
from .pulse_numeric import (
    DEFAULT_ATOL,
    DEFAULT_CLASSES,
    DEFAULT_RTOL,
    EnvelopeSpec,
    numeric_transfer_batch,
)
from .units_grid import MomentumDistribution, integrate

BACKENDS = ("analytic_vs_only", "perturbative", "numeric")

# exit clusters are treated as separated when lam_T * sigma_q exceeds this
OVERLAP_THRESHOLD = 2.0

# path index -> Doppler displacement (units of delta_z = hbar k T / m)
PATH_DISPLACEMENT = {"p1": 0, "p2": 1, "p3": 1, "p4": 2}

_FD_STEP = 1e-5
_RICHARDSON_TOL = 1e-8


@dataclass(frozen=True)
class SequenceParams:
    """Pulse-sequence configuration of the three-pulse interferometer.

    Defaults give the equal-intensity beam splitter / mirror / beam splitter
    sequence (pi/2, pi, pi/2) with the mirror realized by doubling the pulse
    duration, and an interrogation time lam_T = 1e3 / eps.
    """

    eps: float
    tau0: float = np.pi / 2
    tau1: float = np.pi
    tau2: float = np.pi / 2
    theta0: float = 0.0
    theta1: float = 0.0
    lam_T: float | None = None
    backend: str = "perturbative"
    shape: str = "box"
    classes: tuple = DEFAULT_CLASSES
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ConfigurationError(f"unknown backend {self.backend!r}")
        if self.shape != "box" and self.backend != "numeric":
            raise ConfigurationError(
                f"{self.shape!r} envelopes require the numeric backend"
            )
        if self.lam_T is not None and self.lam_T <= 0.0:
            raise ConfigurationError(f"lam_T must be positive, got {self.lam_T!r}")

    @property
    def interrogation_time(self) -> float:
        return self.lam_T if self.lam_T is not None else 1e3 / self.eps

    def pulse_duration(self, tau: float) -> float:
        return EnvelopeSpec(self.shape, self.eps, tau).duration

    @property
    def dynamic_phase(self) -> float:
        """Constant laser phase (lam_1 - lam_0) absorbed into phi."""
        return self.pulse_duration(self.tau1) - self.pulse_duration(self.tau0)

    def theta2_for(self, phi: float) -> float:
        """Final-pulse phase realizing the requested interferometer phase."""
        return phi - self.theta0 + 2.0 * self.theta1 - self.dynamic_phase


@dataclass(frozen=True)
class MziTransfer:
    """2x2 interferometer matrix with its path decomposition.

    ``matrix`` holds M ordered ((M00, M01), (M10, M11)); paths maps
    "p1".."p4" to per-exit amplitude pairs (exit 0, exit 1).  When cropped,
    the mirror transmissions are zeroed, which removes paths p1 and p4.
    """

    matrix: np.ndarray
    paths: dict
    cropped: bool
    displacements: dict = field(default_factory=lambda: dict(PATH_DISPLACEMENT))


def _coeffs_theta0(q, seq: SequenceParams, tau: float):
    """Pulse coefficients (T, R, Rt, Tt) at theta = 0, vectorized over q."""
    if seq.backend == "analytic_vs_only":
        tt, rr = vs_coefficients(q, PulseParams(seq.eps, tau, 0.0))
        return tt, rr, -np.conj(rr), np.conj(tt)
    if seq.backend == "perturbative":
        tr = pert_transfer(q, PulseParams(seq.eps, tau, 0.0))
        return tr.T, tr.R, tr.Rt, tr.Tt
    env = EnvelopeSpec(seq.shape, seq.eps, tau)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    G = numeric_transfer_batch(q, env, 0.0, seq.classes, seq.rtol, seq.atol)
    return G[:, 0, 0], G[:, 0, 1], G[:, 1, 0], G[:, 1, 1]


def _dress(coeffs, theta: float):
    """Apply the laser phase: R -> R e^{-i theta}, Rt -> Rt e^{+i theta}."""
    T, R, Rt, Tt = coeffs
    return T, R * np.exp(-1j * theta), Rt * np.exp(1j * theta), Tt


class _PulseSet:
    """Per-node pulse coefficients at theta = 0, reusable across phi values."""

    def __init__(self, q, seq: SequenceParams):
        self.seq = seq
        self.g0 = _coeffs_theta0(q, seq, seq.tau0)
        self.g1 = _coeffs_theta0(q, seq, seq.tau1)
        self.g2 = self.g0 if seq.tau2 == seq.tau0 else _coeffs_theta0(q, seq, seq.tau2)

    def at_phi(self, phi: float):
        seq = self.seq
        return (
            _dress(self.g0, seq.theta0),
            _dress(self.g1, seq.theta1),
            _dress(self.g2, seq.theta2_for(phi)),
        )


def _path_amplitudes(g0, g1, g2, crop: bool):
    """Path amplitudes for both exits; mirror transmissions zeroed if cropped."""
    T0, R0, Rt0, Tt0 = g0
    T1, R1, Rt1, Tt1 = g1
    T2, R2, Rt2, Tt2 = g2
    if crop:
        T1 = np.zeros_like(T1)
        Tt1 = np.zeros_like(Tt1)
    paths = {
        "p1": (T2 * T1 * T0, Rt2 * T1 * T0),
        "p2": (R2 * Rt1 * T0, Tt2 * Rt1 * T0),
        "p3": (T2 * R1 * Rt0, Rt2 * R1 * Rt0),
        "p4": (R2 * Tt1 * Rt0, Tt2 * Tt1 * Rt0),
    }
    return paths


def _cropped_elements(g0, g1, g2):
    """Table elements (M00, M01, M10, M11) with outer exits excluded."""
    T0, R0, Rt0, Tt0 = g0
    _, R1, Rt1, _ = g1
    T2, R2, Rt2, Tt2 = g2
    M00 = R2 * Rt1 * T0 + T2 * R1 * Rt0
    M01 = R2 * Rt1 * R0 + T2 * R1 * Tt0
    M11 = Tt2 * Rt1 * R0 + Rt2 * R1 * Tt0
    M10 = Tt2 * Rt1 * T0 + Rt2 * R1 * Rt0
    return M00, M01, M10, M11


def mzi_transfer(q, seq: SequenceParams, phi: float = 0.0, crop: bool = False) -> MziTransfer:
    """Interferometer matrix M = G2 U_free G1 U_free G0 at phase phi.

    The free propagation imprints Delta_phi_free = (2 q + 1) lam_T between
    the classes.  With crop=True the mirror transmissions are zeroed, which
    removes the displaced exits; the surviving elements carry a common free
    phase that is dropped as a global factor.
    """
    q = np.asarray(q, dtype=float)
    ps = _PulseSet(q, seq)
    g0, g1, g2 = ps.at_phi(phi)
    paths = _path_amplitudes(g0, g1, g2, crop)
    if crop:
        M00, M01, M10, M11 = _cropped_elements(g0, g1, g2)
    else:
        dphi = (2.0 * q + 1.0) * seq.interrogation_time
        u = np.exp(1j * dphi / 2.0)

        def seqprod(ga, gb, gc):
            A = np.stack([np.stack([ga[0], ga[1]], -1), np.stack([ga[2], ga[3]], -1)], -2)
            B = np.stack([np.stack([gb[0], gb[1]], -1), np.stack([gb[2], gb[3]], -1)], -2)
            C = np.stack([np.stack([gc[0], gc[1]], -1), np.stack([gc[2], gc[3]], -1)], -2)
            U = np.zeros_like(A)
            U[..., 0, 0] = u
            U[..., 1, 1] = np.conj(u)
            return C @ U @ B @ U @ A

        M = seqprod(g0, g1, g2)
        return MziTransfer(matrix=M, paths=paths, cropped=False)

    M = np.stack([np.stack([M00, M01], -1), np.stack([M10, M11], -1)], -2)
    return MziTransfer(matrix=M, paths=paths, cropped=True)


def _check_overlap(dist: MomentumDistribution, seq: SequenceParams):
    if seq.interrogation_time * dist.sigma_q < OVERLAP_THRESHOLD:
        warnings.warn(
            f"lam_T * sigma_q = {seq.interrogation_time * dist.sigma_q:.3g} < "
            f"{OVERLAP_THRESHOLD}: exit clusters may overlap and cropped "
            "signals lose their meaning",
            OverlapRegimeWarning,
            stacklevel=3,
        )


def _vs_closed_forms(dist: MomentumDistribution, seq: SequenceParams):
    """Velocity-selective closed-form offsets, amplitude and mirror fraction.

    Valid for the default (pi/2, pi, pi/2) box sequence without adjacent-class
    coupling.
    """
    v = 2.0 * dist.nodes / seq.eps
    f = np.sqrt(1.0 + v * v)
    c2, s2 = np.cos(np.pi * f / 2.0), np.sin(np.pi * f / 2.0)
    off_h = -integrate((v ** 2 + c2) ** 2 * (v ** 2 + np.cos(np.pi * f)) / f ** 6, dist)
    amp = integrate((1.0 + v ** 2 / np.cos(np.pi * f / 4.0) ** 2) * s2 ** 4 / f ** 6, dist)
    off_s = integrate((v ** 2 + c2) ** 2 * s2 ** 2 / f ** 6, dist)
    eta_s = integrate(s2 ** 2 / f ** 2, dist)
    return off_h, off_s, amp, eta_s


def _default_areas(seq: SequenceParams) -> bool:
    return (seq.tau0, seq.tau1, seq.tau2) == (np.pi / 2, np.pi, np.pi / 2)


def _signal_generic(dist, seq, phi, crop):
    """Per-atom signal <J3>/N for all atoms entering class 0, built from path
    populations; cross terms carrying a Doppler factor exp(+-i n nu_k T) with
    n != 0 are dropped (non-overlapping exit clusters)."""
    ps = _PulseSet(dist.nodes, seq)

    def a0_of(ph):
        g0, g1, g2 = ps.at_phi(ph)
        paths = _path_amplitudes(g0, g1, g2, crop=False)
        s = []
        for exit_idx in (0, 1):
            central = paths["p2"][exit_idx] + paths["p3"][exit_idx]
            pop = np.abs(central) ** 2
            if not crop:
                pop = pop + np.abs(paths["p1"][exit_idx]) ** 2 + np.abs(paths["p4"][exit_idx]) ** 2
            s.append(integrate(pop, dist))
        return s[0] - s[1]

    sig = -0.5 * a0_of(phi)
    # offset / amplitude from the phi = 0, pi extremes: s = (O - J cos phi)/2
    s0, spi = -0.5 * a0_of(0.0), -0.5 * a0_of(np.pi)
    offset = s0 + spi
    amp = spi - s0
    return sig, offset, amp, ps


def signal_full(dist: MomentumDistribution, seq: SequenceParams, phi: float):
    """Full interference signal per atom: (<J3,H>/N, offset O_H, amplitude J).

    All atoms enter in class 0.  <J3,H> = (N/2)(O_H - J cos phi).
    """
    _check_overlap(dist, seq)
    if seq.backend == "analytic_vs_only" and _default_areas(seq):
        off_h, _, amp, _ = _vs_closed_forms(dist, seq)
        return 0.5 * (off_h - amp * np.cos(phi)), off_h, amp
    sig, offset, amp, _ = _signal_generic(dist, seq, phi, crop=False)
    return sig, offset, amp


def signal_cropped(dist: MomentumDistribution, seq: SequenceParams, phi: float):
    """Cropped signal per atom: (<J3,S>/N, offset O_S, amplitude J, eta_S).

    Detection restricted to the central exit window; the quasi-incoherent
    background of the displaced exits is removed and eta_S is the detected
    fraction (the weighted mirror reflectivity).
    """
    _check_overlap(dist, seq)
    if seq.backend == "analytic_vs_only" and _default_areas(seq):
        _, off_s, amp, eta_s = _vs_closed_forms(dist, seq)
        return 0.5 * (off_s - amp * np.cos(phi)), off_s, amp, eta_s
    sig, offset, amp, ps = _signal_generic(dist, seq, phi, crop=True)
    g0, g1, g2 = ps.at_phi(0.0)
    M00, M01, M10, M11 = _cropped_elements(g0, g1, g2)
    eta = integrate(np.abs(M00) ** 2 + np.abs(M10) ** 2, dist)
    return sig, offset, amp, eta


@dataclass(frozen=True)
class ScriptQuantities:
    """Momentum-integrated interferometric contributions at phi = 0 = theta0.

    A0 and A10 are the population-difference and first-order-coherence
    contributions, primed quantities their phi-derivatives, R0 the detected
    fraction of class-0 entrants and R10 the coherence shot-noise term.
    V_M = R0 - A0^2 - |A10|^2 is the vacuum contribution of the open mirror
    ports.  Outer exits are always excluded (cropped detection).
    """

    A0: float
    A10: complex
    A0p: float
    A10p: complex
    R0: float
    R10: complex
    V_M: float
    eta: float

    @property
    def phi10(self) -> float:
        return float(np.angle(self.A10))

    @property
    def phi10p(self) -> float:
        return float(np.angle(self.A10p))


def ideal_scripts() -> ScriptQuantities:
    """Script quantities of the lossless delta-pulse interferometer."""
    return ScriptQuantities(A0=1.0, A10=0.0 + 0.0j, A0p=0.0, A10p=1.0 + 0.0j,
                            R0=1.0, R10=0.0 + 0.0j, V_M=0.0, eta=1.0)


def script_quantities(dist: MomentumDistribution, seq: SequenceParams,
                      fd_step: float = _FD_STEP) -> ScriptQuantities:
    """Integrate the script quantities at the working point phi = 0 = theta0.

    Derivatives with respect to phi are central finite differences obtained
    by scanning theta2, Richardson-validated with half step size.
    """
    if seq.theta0 != 0.0 or seq.theta1 != 0.0:
        raise ConfigurationError("script quantities are defined at theta0 = theta1 = 0")
    _check_overlap(dist, seq)
    ps = _PulseSet(dist.nodes, seq)

    def raw(ph):
        g0, g1, g2 = ps.at_phi(ph)
        M00, M01, M10, M11 = _cropped_elements(g0, g1, g2)
        a0 = integrate(np.abs(M00) ** 2 - np.abs(M10) ** 2, dist)
        a10 = integrate(np.conj(M11) * M10 - np.conj(M01) * M00, dist)
        r0 = integrate(np.abs(M00) ** 2 + np.abs(M10) ** 2, dist)
        r10 = integrate(np.conj(M11) * M10 + np.conj(M01) * M00, dist)
        return a0, a10, r0, r10

    A0, A10, R0, R10 = raw(0.0)

    def derivative(h):
        ap, a10p, _, _ = raw(h)
        am, a10m, _, _ = raw(-h)
        return (ap - am) / (2.0 * h), (a10p - a10m) / (2.0 * h)

    d_full = derivative(fd_step)
    d_half = derivative(fd_step / 2.0)
    for df, dh in zip(d_full, d_half):
        if abs(df - dh) >= _RICHARDSON_TOL:
            raise NumericError(
                f"phi-derivative not converged: |D(h) - D(h/2)| = {abs(df - dh):.2e}"
            )
    A0p = (4.0 * d_half[0] - d_full[0]) / 3.0
    A10p = (4.0 * d_half[1] - d_full[1]) / 3.0

    V_M = float(R0.real - A0.real ** 2 - abs(A10) ** 2)
    return ScriptQuantities(
        A0=float(A0.real), A10=complex(A10), A0p=float(A0p.real),
        A10p=complex(A10p), R0=float(R0.real), R10=complex(R10),
        V_M=V_M, eta=float(R0.real),
    )


def position_distribution(dist: MomentumDistribution, seq: SequenceParams,
                          phi: float, exit_class: int, z_grid):
    """Exit-port position density |psi_i(z, phi)|^2 on a grid of z / delta_z.

    The three clusters sit at z = 0, 1, 2 in units of the Doppler
    displacement delta_z = hbar k T / m; each path contribution is Fourier
    transformed around its own cluster center.
    """
    if exit_class not in (0, 1):
        raise ConfigurationError("exit_class must be 0 or 1")
    z_grid = np.asarray(z_grid, dtype=float)
    lam_T = seq.interrogation_time
    sigma_z = 1.0 / (4.0 * lam_T * dist.sigma_q)
    dz = np.max(np.diff(z_grid)) if z_grid.size > 1 else np.inf
    if dz > sigma_z / 2.0:
        raise ConfigurationError(
            f"z grid spacing {dz:.3g} cannot resolve cluster width {sigma_z:.3g}"
        )
    ps = _PulseSet(dist.nodes, seq)
    g0, g1, g2 = ps.at_phi(phi)
    paths = _path_amplitudes(g0, g1, g2, crop=False)
    amp_by_shift = {
        0: paths["p1"][exit_class],
        1: paths["p2"][exit_class] + paths["p3"][exit_class],
        2: paths["p4"][exit_class],
    }
    phi0 = np.sqrt(dist.density)
    norm = np.sqrt(lam_T / np.pi)
    # quadrature supports the oscillatory kernel only out to u_valid
    dq = np.max(np.diff(dist.nodes))
    u_valid = np.pi / (4.0 * lam_T * dq)
    psi = np.zeros_like(z_grid, dtype=complex)
    for n, amp in amp_by_shift.items():
        u = z_grid - n
        mask = np.abs(u) <= u_valid
        if not np.any(mask):
            continue
        kernel = np.exp(2j * lam_T * np.outer(u[mask], dist.nodes))
        psi[mask] += np.exp(-1j * n * lam_T) * norm * (
            kernel @ (dist.weights * phi0 * amp)
        )
    return np.abs(psi) ** 2
