import math

import numpy as np
import pytest
from scipy.special import roots_hermitenorm

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def oracle_expectation(fn, n=120):
    """E[fn(Z)] with scipy's Gauss-Hermite(e) nodes; independent of hermgen."""
    x, w = roots_hermitenorm(n)
    return float(np.sum(w * fn(x)) / math.sqrt(2 * math.pi))


def oracle_central_cumulants(coeffs, n=120):
    """kappa_1..kappa_4 from central moments, not the raw-moment recursion."""
    he = np.polynomial.hermite_e.HermiteE(coeffs)
    mean = oracle_expectation(he, n)
    mu = [oracle_expectation(lambda x, r=r: (he(x) - mean) ** r, n) for r in (2, 3, 4)]
    return [mean, mu[0], mu[1], mu[2] - 3 * mu[0] ** 2]


def kstat_std_errors(kappa, n):
    """Asymptotic standard errors of k1..k4 from population cumulants 1..8."""
    k = dict(enumerate(kappa, start=1))
    var = [
        k[2] / n,
        (k[4] + 2 * k[2] ** 2) / n,
        (k[6] + 9 * k[2] * k[4] + 9 * k[3] ** 2 + 6 * k[2] ** 3) / n,
        (
            k[8] + 16 * k[2] * k[6] + 48 * k[3] * k[5] + 34 * k[4] ** 2
            + 72 * k[2] ** 2 * k[4] + 144 * k[2] * k[3] ** 2 + 24 * k[2] ** 4
        ) / n,
    ]
    return [math.sqrt(max(v, 0.0)) for v in var]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
