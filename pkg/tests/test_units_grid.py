import numpy as np
import pytest
from scipy.special import erf

from bragg_sense.errors import ConfigurationError, DomainError, NumericError
from bragg_sense.units_grid import integrate, make_gaussian_mode


def test_normalization_and_symmetry():
    d = make_gaussian_mode(0.05, 200)
    assert abs(np.sum(d.measure) - 1.0) < 1e-12
    assert abs(d.moment(1)) < 1e-14
    np.testing.assert_allclose(d.density, d.density[::-1], rtol=1e-12)


def test_second_moment_narrow():
    # truncation negligible at 100 sigma: quadrature matches sigma^2
    d = make_gaussian_mode(0.005, 200)
    assert abs(d.moment(2) - 0.005 ** 2) / 0.005 ** 2 < 1e-6


def test_second_moment_truncation_bites():
    d = make_gaussian_mode(0.1, 200)
    assert d.moment(2) < 0.1 ** 2
    # against the closed-form truncated-Gaussian moment
    a = 0.5 / (0.1 * np.sqrt(2.0))
    exact = 0.1 ** 2 * (1.0 - 2.0 * a * np.exp(-a * a) / (np.sqrt(np.pi) * erf(a)))
    assert abs(d.moment(2) - exact) < 1e-12


def test_domain_and_configuration_errors():
    with pytest.raises(DomainError):
        make_gaussian_mode(0.0)
    with pytest.raises(DomainError):
        make_gaussian_mode(0.3)
    with pytest.raises(ConfigurationError):
        make_gaussian_mode(0.05, 16)


def test_integrate_basics():
    d = make_gaussian_mode(0.01, 200)
    assert abs(integrate(lambda q: np.ones_like(q), d) - 1.0) < 1e-12
    assert abs(integrate(lambda q: q, d)) < 1e-14
    assert abs(integrate(lambda q: q ** 2, d) - 1e-4) < 1e-9


def test_integrate_rejects_nonfinite():
    d = make_gaussian_mode(0.05, 64)
    vals = np.ones_like(d.nodes)
    vals[7] = np.nan
    with pytest.raises(NumericError, match="node index 7"):
        integrate(vals, d)


@pytest.mark.parametrize("sigma,eps", [(0.005, 0.02), (0.005, 0.1), (0.05, 0.1), (0.1, 0.3)])
def test_node_doubling_convergence(sigma, eps):
    # doubling the rule changes smooth weighted integrals by < 1e-9 relative
    def script_like(d):
        v = 2.0 * d.nodes / eps
        f = np.sqrt(1.0 + v * v)
        return integrate(np.sin(np.pi * f / 2.0) ** 4 / f ** 6, d)

    v1 = script_like(make_gaussian_mode(sigma, 200))
    v2 = script_like(make_gaussian_mode(sigma, 400))
    assert abs(v1 - v2) / abs(v2) < 1e-9


def test_odd_integrand_vanishes():
    d = make_gaussian_mode(0.05, 200)
    v = 2.0 * d.nodes / 0.1
    f = np.sqrt(1.0 + v * v)
    assert abs(integrate(v * np.sin(np.pi * f / 2.0) ** 2, d)) < 1e-12
