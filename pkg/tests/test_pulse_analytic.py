import numpy as np
import pytest

from bragg_sense.errors import DomainError, PerturbativeRangeWarning
from bragg_sense.pulse_analytic import (
    PulseParams,
    adjacent_couplings,
    pert_transfer,
    vs_coefficients,
)
from bragg_sense.pulse_numeric import EnvelopeSpec, evolve_pulse, main_block


def rk_reference(q, eps, tau, theta=0.0):
    """Dressed main-class block from the six-class integrator, in the gauge
    of the analytic transfer (includes the eps^2 lam/8 global phase)."""
    env = EnvelopeSpec("box", eps, tau)
    U = evolve_pulse(q, env, theta, rtol=1e-11, atol=1e-13)
    lam = tau / eps
    return np.exp(-1j * eps ** 2 * lam / 8.0) * main_block(U, env)


def test_identity_pulse():
    tt, rr = vs_coefficients(0.1, PulseParams(0.2, 0.0))
    assert abs(tt - 1.0) < 1e-15 and abs(rr) < 1e-15


def test_resonant_pi_pulse():
    tt, rr = vs_coefficients(0.0, PulseParams(0.1, np.pi))
    assert abs(tt) < 1e-15
    assert abs(abs(rr) - 1.0) < 1e-15


def test_detuned_reflectivity_value():
    # v = 1, f = sqrt(2): |rr|^2 = sin^2(pi f/2)/f^2 ~ 0.317, checked against
    # direct integration of the two-level problem
    from scipy.linalg import expm

    eps, q, tau = 0.1, 0.05, np.pi
    tt, rr = vs_coefficients(q, PulseParams(eps, tau))
    v = 2 * q / eps
    H = 0.5 * eps * np.array([[-v, 1.0], [1.0, v]], dtype=complex)
    U = expm(-1j * H * tau / eps)
    assert abs(abs(rr) ** 2 - abs(U[1, 0]) ** 2) < 1e-12
    assert abs(abs(rr) ** 2 - 0.317) < 5e-4


def test_su2_identity_random(rng):
    # exact |tt|^2 + |rr|^2 = 1 over 10^4 random parameter triples
    q = rng.uniform(-0.5, 0.5, 10_000)
    eps = rng.uniform(0.01, 2.0, 10_000)
    tau = rng.uniform(0.0, 2.0 * np.pi, 10_000)
    worst = 0.0
    for qi, ei, ti in zip(q, eps, tau):
        tt, rr = vs_coefficients(qi, PulseParams(ei, ti))
        worst = max(worst, abs(abs(tt) ** 2 + abs(rr) ** 2 - 1.0))
    assert worst < 1e-12


def test_pert_reduces_to_vs_at_tiny_eps():
    # loss factors collapse to the identity as eps -> 0
    p = PulseParams(1e-6, 2.0)
    tr = pert_transfer(0.1, p)
    for g, d in ((tr.g00, 1.0), (tr.g11, 1.0), (tr.g01, 0.0), (tr.g10, 0.0)):
        assert abs(g - d) < 1e-12
    # full matrix agrees once the residual Rabi correction ~ q eps tau / 8
    # is itself below tolerance
    q = 1e-4
    tr = pert_transfer(q, p)
    tt, rr = vs_coefficients(q, p)
    G_vs = np.array([[tt, rr], [-np.conj(rr), np.conj(tt)]])
    assert np.max(np.abs(tr.matrix() - G_vs)) < 1e-10


def test_loss_never_gain():
    for q in (0.0, 0.02, -0.04):
        for tau in (np.pi / 2, np.pi, 2.0):
            tr = pert_transfer(q, PulseParams(0.2, tau))
            det = tr.T * tr.Tt - tr.R * tr.Rt
            assert abs(det) <= 1.0 + 5 * 0.2 ** 3


def test_determinant_shows_loss():
    tr = pert_transfer(0.0, PulseParams(0.2, np.pi))
    det = tr.T * tr.Tt - tr.R * tr.Rt
    assert abs(det) < 1.0
    # matches total main-class survival of the reference integrator
    G = rk_reference(0.0, 0.2, np.pi)
    surv = abs(G[0, 0]) ** 2 + abs(G[1, 0]) ** 2
    assert surv < 1.0
    assert abs((abs(tr.T) ** 2 + abs(tr.Rt) ** 2) - surv) < 1e-4


def test_phase_symmetry():
    p0 = pert_transfer(0.03, PulseParams(0.2, np.pi / 2, 0.0))
    p1 = pert_transfer(0.03, PulseParams(0.2, np.pi / 2, 0.7))
    assert abs(p1.R - p0.R * np.exp(-1j * 0.7)) < 1e-12
    assert abs(p1.Rt - p0.Rt * np.exp(1j * 0.7)) < 1e-12
    assert abs(abs(p1.T) - abs(p0.T)) < 1e-14
    assert abs(abs(p1.Tt) - abs(p0.Tt)) < 1e-14


def test_modulus_agreement_tau_sweep():
    # q = 0.02, eps = 0.2: main-class moduli match the six-class integrator
    # to fourth order over a full pulse-area sweep
    eps, q = 0.2, 0.02
    worst = 0.0
    for tau in np.linspace(0.3, 2 * np.pi, 15):
        Gp = pert_transfer(q, PulseParams(eps, float(tau))).matrix()
        Gn = rk_reference(q, eps, float(tau))
        worst = max(worst, np.max(np.abs(np.abs(Gp) - np.abs(Gn))))
    assert worst < eps ** 4


def test_residual_slope_resonant():
    # fourth-order scaling of the modulus residual at q = 0
    eps_grid = np.geomspace(0.05, 0.2, 6)
    res = []
    for eps in eps_grid:
        w = 0.0
        for tau in (np.pi / 2, np.pi):
            Gp = pert_transfer(0.0, PulseParams(float(eps), tau)).matrix()
            Gn = rk_reference(0.0, float(eps), tau)
            w = max(w, np.max(np.abs(np.abs(Gp) - np.abs(Gn))))
        res.append(w)
    slope = np.polyfit(np.log(eps_grid), np.log(res), 1)[0]
    assert slope >= 3.5


def test_residual_slope_off_resonant():
    # at fixed q = 0.02 the comparison floor is the four-vs-six-class
    # truncation difference, which scales ~eps^3; see decisions ledger
    eps_grid = np.geomspace(0.05, 0.2, 6)
    res = []
    for eps in eps_grid:
        w = 0.0
        for tau in (np.pi / 2, np.pi):
            Gp = pert_transfer(0.02, PulseParams(float(eps), tau)).matrix()
            Gn = rk_reference(0.02, float(eps), tau)
            w = max(w, np.max(np.abs(np.abs(Gp) - np.abs(Gn))))
        res.append(w)
    slope = np.polyfit(np.log(eps_grid), np.log(res), 1)[0]
    assert slope >= 2.5
    assert res[-1] < 0.2 ** 4


def test_gamma_deviation_second_order():
    # sup_tau |gamma_ij - delta_ij| <= C' eps^2 with C' stable under halving
    taus = np.linspace(0.1, 2 * np.pi, 40)

    def cprime(eps):
        worst = 0.0
        for tau in taus:
            tr = pert_transfer(0.02, PulseParams(eps, float(tau)))
            dev = max(abs(tr.g00 - 1.0), abs(tr.g11 - 1.0), abs(tr.g01), abs(tr.g10))
            worst = max(worst, dev)
        return worst / eps ** 2

    c1, c2 = cprime(0.2), cprime(0.1)
    assert c1 < 0.5 and c2 < 0.5
    assert abs(c1 - c2) / c1 < 0.25


def test_adjacent_couplings_zero_at_tau0():
    g20, g21, gm10, gm11, *_ = adjacent_couplings(0.02, PulseParams(0.2, 0.0))
    for g in (g20, g21, gm10, gm11):
        assert abs(g) < 1e-14


def test_adjacent_coupling_modulus_vs_rk():
    # |g20| matches the six-class integrator within O(eps^4)
    eps, q, tau = 0.2, 0.02, np.pi / 2
    env = EnvelopeSpec("box", eps, tau)
    U = evolve_pulse(q, env, rtol=1e-11, atol=1e-13)
    g20, g21, gm10, gm11, *_ = adjacent_couplings(q, PulseParams(eps, tau))
    assert abs(abs(g20) - abs(U[4, 2])) < eps ** 4
    assert abs(abs(gm10) - abs(U[1, 2])) < 2 * eps ** 3


def test_adjacent_symmetric_pair_at_resonance():
    # |g20| = |g-11| at v = 0 up to the O(eps^3) difference of the closed forms
    eps = 0.1
    for tau in (np.pi / 2, np.pi, 3 * np.pi / 2):
        g20, g21, gm10, gm11, *_ = adjacent_couplings(0.0, PulseParams(eps, tau))
        assert abs(abs(g20) - abs(gm11)) < 2 * eps ** 3


def test_range_warning():
    with pytest.warns(PerturbativeRangeWarning):
        tr = pert_transfer(0.0, PulseParams(0.8, np.pi))
    assert tr.range_warning


def test_param_validation():
    with pytest.raises(DomainError):
        PulseParams(-0.1, np.pi)
    with pytest.raises(DomainError):
        PulseParams(0.1, -1.0)
