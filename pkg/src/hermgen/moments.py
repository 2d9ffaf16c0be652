"""Exact and empirical moments/cumulants of Hermite-series pushforwards."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import InsufficientSampleError, ParameterError
from .hermite import HermiteSeries, gauss_hermite, series_eval

if TYPE_CHECKING:
    from .genmodel import GenModelParams

PSD_TOL = 1e-8
SYM_TOL = 1e-10


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants ``kappa_1 .. kappa_m`` (mean, variance, third, fourth, ...)."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def order(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)

    def to_dict(self) -> dict:
        return {"order": self.order, "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: dict) -> "CumulantVector":
        cv = cls(tuple(data["values"]))
        if "order" in data and int(data["order"]) != cv.order:
            raise ParameterError("order does not match the number of values")
        return cv


@dataclass(frozen=True)
class MomentSummary:
    mean: np.ndarray
    cov: np.ndarray

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "cov": self.cov.tolist()}


def series_moment(s: HermiteSeries, r: int, mean_shift: float = 0.0, scale: float = 1.0) -> float:
    """Raw moment ``E[sigma(mean_shift + scale * Z)^r]`` for standard normal Z.

    The integrand is a polynomial of degree ``r * degree``; the rule is sized
    so the result is exact up to rounding.
    """
    if r < 1:
        raise ParameterError(f"moment order must be >= 1, got {r}")
    n = max(1, math.ceil((r * s.degree + 1) / 2))
    rule = gauss_hermite(n)
    vals = series_eval(s, mean_shift + scale * rule.nodes)
    return rule.expect(vals**r)


def moments_to_cumulants(raw) -> list:
    """Convert raw moments ``m_1..m_n`` to cumulants ``kappa_1..kappa_n``."""
    m = [1.0] + [float(v) for v in raw]
    kappa = [0.0]
    for n in range(1, len(m)):
        k = m[n] - sum(math.comb(n - 1, j - 1) * kappa[j] * m[n - j] for j in range(1, n))
        kappa.append(k)
    return kappa[1:]


def series_cumulants(s: HermiteSeries, m: int) -> CumulantVector:
    """Cumulants ``kappa_1..kappa_m`` of ``sigma(Z)`` with ``Z ~ N(0, 1)``."""
    if m < 1:
        raise ParameterError(f"cumulant order must be >= 1, got {m}")
    raw = [series_moment(s, r) for r in range(1, m + 1)]
    return CumulantVector(tuple(moments_to_cumulants(raw)))


def sample_cumulants(data, m: int = 4) -> CumulantVector:
    """Unbiased k-statistics ``k_1..k_m`` (``m`` in 1..4) of a 1-D sample."""
    x = np.asarray(data, dtype=float).ravel()
    n = x.size
    if not 1 <= m <= 4:
        raise ParameterError(f"k-statistics are available for orders 1..4, got {m}")
    if n <= m:
        raise InsufficientSampleError(f"need more than {m} observations, got {n}")
    mean = float(np.mean(x))
    d = x - mean
    m2 = float(np.mean(d * d))
    out = [mean]
    if m >= 2:
        out.append(n * m2 / (n - 1))
    if m >= 3:
        m3 = float(np.mean(d**3))
        out.append(n * n * m3 / ((n - 1) * (n - 2)))
    if m >= 4:
        m4 = float(np.mean(d**4))
        out.append(
            n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3))
        )
    return CumulantVector(tuple(out))


def check_psd(mat: np.ndarray, name: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ParameterError(f"{name} must be square, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ParameterError(f"{name} has non-finite entries")
    if np.max(np.abs(mat - mat.T), initial=0.0) > SYM_TOL:
        raise ParameterError(f"{name} is not symmetric")
    if mat.size and np.linalg.eigvalsh(mat).min() < -PSD_TOL:
        raise ParameterError(f"{name} is not positive semidefinite")
    return mat


def model_mean_cov(params: "GenModelParams") -> MomentSummary:
    """Exact mean and covariance of ``x = W sigma(F z + b)``.

    Each pre-activation ``u = F z + b`` is Gaussian with mean ``F mu + b`` and
    covariance ``F Sigma F^T``. Means use a 1-D rule, pairwise covariances a
    tensor rule after a 2x2 Cholesky factorisation; with ``degree + 1`` nodes
    per axis every integrand is integrated exactly.
    """
    s = params.series
    sigma = check_psd(params.Sigma, "Sigma")
    loc = params.F @ params.mu + params.b
    cu = params.F @ sigma @ params.F.T
    cu = 0.5 * (cu + cu.T)
    sd = np.sqrt(np.clip(np.diag(cu), 0.0, None))

    rule = gauss_hermite(s.degree + 1)
    t, w = rule.nodes, rule.weights
    # (k, n) values of sigma on each coordinate's 1-D nodes
    vals = series_eval(s, loc[:, None] + sd[:, None] * t[None, :])
    theta_mean = vals @ w

    k = loc.size
    cov_theta = np.empty((k, k))
    t1 = t[:, None]
    t2 = t[None, :]
    w2 = w[:, None] * w[None, :]
    for i in range(k):
        j = np.arange(i, k)
        if sd[i] > 0:
            l21 = cu[i, j] / sd[i]
        else:
            l21 = np.zeros(j.size)
        l22 = np.sqrt(np.clip(sd[j] ** 2 - l21**2, 0.0, None))
        ui = loc[i] + sd[i] * t1  # (n, 1)
        uj = loc[j, None, None] + l21[:, None, None] * t1 + l22[:, None, None] * t2
        fi = series_eval(s, ui)
        fj = series_eval(s, uj)
        second = np.einsum("ab,jab->j", w2 * fi, fj)
        row = second - theta_mean[i] * theta_mean[j]
        cov_theta[i, j] = row
        cov_theta[j, i] = row

    mean = params.W @ theta_mean
    cov = params.W @ cov_theta @ params.W.T
    cov = 0.5 * (cov + cov.T)
    return MomentSummary(mean=mean, cov=cov)
