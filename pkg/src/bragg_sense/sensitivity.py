"""Phase-uncertainty evaluation via Gaussian error propagation.

Three routes: the closed-form velocity-selective expression for full and
cropped detection, the general script-quantity formula at the working point
phi = 0 = theta0, and its one-axis-twisting specialization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WorkingPointError
from .mzi_core import ScriptQuantities, SequenceParams, signal_cropped, signal_full
from .spin_states import OatParams, SpinMoments, inclination, oat_AB, oat_moments
from .units_grid import MomentumDistribution


@dataclass(frozen=True)
class UncertaintyResult:
    """Phase variance with its shot-noise normalization and components."""

    dphi2: float
    N: int
    numerator: float
    denominator: float

    @property
    def n_dphi2(self) -> float:
        """N * dphi^2; equals 1 at the shot-noise limit."""
        return self.N * self.dphi2

    @property
    def sub_snl(self) -> bool:
        return self.n_dphi2 < 1.0


def uncertainty_vs_only(dist: MomentumDistribution, seq: SequenceParams,
                        mode: str, N: int, phi: float) -> UncertaintyResult:
    """Velocity-selective phase uncertainty for full or cropped detection.

    Delta phi^2 = (1/N)[(eta - O^2)/(J^2 sin^2 phi) + 2 O cos phi/(J sin^2 phi)
    - cot^2 phi], with the detected fraction eta, offset O and amplitude J of
    the respective signal.
    """
    if mode not in ("full", "cropped"):
        raise WorkingPointError(f"mode must be 'full' or 'cropped', got {mode!r}")
    s = np.sin(phi)
    if abs(s) < 1e-12:
        raise WorkingPointError("sin(phi) = 0: slope of the fringe vanishes")
    if mode == "full":
        _, offset, amp = signal_full(dist, seq, phi)
        eta = 1.0
    else:
        _, offset, amp, eta = signal_cropped(dist, seq, phi)
    c = np.cos(phi)
    dphi2 = ((eta - offset ** 2) / (amp ** 2 * s ** 2)
             + 2.0 * offset * c / (amp * s ** 2) - (c / s) ** 2) / N
    var = N / 4.0 * (eta - (offset - amp * c) ** 2)
    slope = N / 2.0 * amp * s
    return UncertaintyResult(dphi2=float(dphi2), N=N,
                             numerator=float(var), denominator=float(slope ** 2))


def uncertainty_general(scripts: ScriptQuantities, moments: SpinMoments,
                        N: int) -> UncertaintyResult:
    """General phase uncertainty at phi = 0 = theta0.

    numerator  = Var[|A10| S_(phi10) + A0 S3] + (V_M/4) N + (Re R10 / 2) <S1>
    denominator = (|A10'| <S_(phi10')> - (A0'/2) N)^2

    with S_phi = cos(phi) S1 - sin(phi) S2, expanded through the covariance
    matrix.  The shot-noise term uses Re R10 (variances are real).
    """
    c = np.array([scripts.A10.real, -scripts.A10.imag, scripts.A0])
    var = float(c @ moments.cov @ c)
    numerator = var + scripts.V_M / 4.0 * N + scripts.R10.real / 2.0 * moments.mean[0]
    slope = (scripts.A10p.real * moments.mean[0]
             - scripts.A10p.imag * moments.mean[1]
             - scripts.A0p / 2.0 * N)
    if slope == 0.0:
        raise WorkingPointError("signal slope vanishes at the working point")
    denominator = slope ** 2
    return UncertaintyResult(dphi2=numerator / denominator, N=N,
                             numerator=numerator, denominator=denominator)


def uncertainty_oat(scripts: ScriptQuantities, p: OatParams, N: int) -> UncertaintyResult:
    """Closed-form phase uncertainty for the rotated OAT input state.

    Specialization of the general formula using <S2> = <S3> = 0 and the
    vanishing Cov[S1, .] of the twisted state:

    numerator = (Re A10)^2 DS1^2 + (Im A10)^2 DS2^2 + A0^2 DS3^2
                - 2 A0 Im A10 Cov[S2,S3] + (V_M/4) N + (Re R10/2) <S1>.
    """
    m = oat_moments(p, N)
    re, im = scripts.A10.real, scripts.A10.imag
    numerator = (re ** 2 * m.var(0) + im ** 2 * m.var(1) + scripts.A0 ** 2 * m.var(2)
                 - 2.0 * scripts.A0 * im * m.cov[1, 2]
                 + scripts.V_M / 4.0 * N + scripts.R10.real / 2.0 * m.mean[0])
    slope = scripts.A10p.real * m.mean[0] - scripts.A0p / 2.0 * N
    if slope == 0.0:
        raise WorkingPointError("signal slope vanishes at the working point")
    return UncertaintyResult(dphi2=numerator / slope ** 2, N=N,
                             numerator=float(numerator), denominator=float(slope ** 2))
