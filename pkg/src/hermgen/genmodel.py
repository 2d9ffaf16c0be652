"""Finite-order generative model ``x = W sigma(F z + b)`` and dataset builders.

Randomness
----------
Every random draw comes from a named substream. ``substream(seed, role, index)``
builds a PCG64 generator from ``SeedSequence(seed, spawn_key=(crc32(role), index))``,
so streams for different roles (negatives, positives, shuffle, training, ...)
never share state, and results depend only on the integer seed.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .hermite import HermiteSeries, series_eval
from .moments import PSD_TOL, MomentSummary, check_psd, model_mean_cov

# equivalent-Gaussian eigenvalue clipping must not discard more than this
# fraction of the covariance trace
CLIP_MASS_TOL = 1e-6
# eigenvalues below this fraction of the largest are round-off and set to 0
RANK_RTOL = 1e-12


def substream(seed: int, role: str, index: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, role, index)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(role.encode()), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True, eq=False)
class GenModelParams:
    """Parameters of ``x = W sigma(F z + b)`` with ``z ~ N(mu, Sigma)``."""

    W: np.ndarray
    F: np.ndarray
    series: HermiteSeries
    b: np.ndarray = None
    mu: np.ndarray = None
    Sigma: np.ndarray = None

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        F = np.atleast_2d(np.asarray(self.F, dtype=float))
        k, p = F.shape
        b = np.zeros(k) if self.b is None else np.asarray(self.b, dtype=float).ravel()
        mu = np.zeros(p) if self.mu is None else np.asarray(self.mu, dtype=float).ravel()
        Sigma = np.eye(p) if self.Sigma is None else np.atleast_2d(np.asarray(self.Sigma, dtype=float))
        if W.shape[1] != k:
            raise ParameterError(f"W has {W.shape[1]} columns but F has {k} rows")
        if b.size != k:
            raise ParameterError(f"b has length {b.size}, expected {k}")
        if mu.size != p:
            raise ParameterError(f"mu has length {mu.size}, expected {p}")
        if Sigma.shape != (p, p):
            raise ParameterError(f"Sigma has shape {Sigma.shape}, expected {(p, p)}")
        for name, arr in (("W", W), ("F", F), ("b", b), ("mu", mu)):
            if not np.all(np.isfinite(arr)):
                raise ParameterError(f"{name} has non-finite entries")
        check_psd(Sigma, "Sigma")
        if not isinstance(self.series, HermiteSeries):
            object.__setattr__(self, "series", HermiteSeries(tuple(self.series)))
        for name, arr in (("W", W), ("F", F), ("b", b), ("mu", mu), ("Sigma", Sigma)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def d(self) -> int:
        return self.W.shape[0]

    @property
    def k(self) -> int:
        return self.F.shape[0]

    @property
    def p(self) -> int:
        return self.F.shape[1]

    @classmethod
    def identity(cls, dim: int, series: HermiteSeries) -> "GenModelParams":
        """``W = F = I``, ``mu = 0``, ``Sigma = I`` as in the synthetic experiments."""
        eye = np.eye(dim)
        return cls(W=eye, F=eye, series=series)

    def with_series(self, series: HermiteSeries) -> "GenModelParams":
        return GenModelParams(
            W=self.W, F=self.F, series=series, b=self.b, mu=self.mu, Sigma=self.Sigma
        )

    def to_dict(self, compact: bool = True) -> dict:
        def mat(a):
            if compact and a.shape[0] == a.shape[1] and np.array_equal(a, np.eye(a.shape[0])):
                return "identity"
            return a.tolist()

        return {
            "d": self.d,
            "k": self.k,
            "p": self.p,
            "W": mat(self.W),
            "F": mat(self.F),
            "b": self.b.tolist(),
            "mu": self.mu.tolist(),
            "Sigma": mat(self.Sigma),
            "series": self.series.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenModelParams":
        series = HermiteSeries.from_dict(data["series"])
        F_raw, W_raw, S_raw = data.get("F", "identity"), data.get("W", "identity"), data.get("Sigma", "identity")
        k = data.get("k")
        p = data.get("p")
        d = data.get("d")
        if not isinstance(F_raw, str):
            F = np.asarray(F_raw, dtype=float)
            k, p = F.shape if F.ndim == 2 else (None, None)
        if not isinstance(W_raw, str):
            W = np.asarray(W_raw, dtype=float)
            d = W.shape[0]
            k = k if k is not None else W.shape[1]
        if isinstance(F_raw, str):
            if F_raw != "identity":
                raise ParameterError(f"unknown matrix token {F_raw!r}")
            k = k if k is not None else p if p is not None else d
            p = p if p is not None else k
            if k is None or k != p:
                raise ParameterError("'identity' F needs k == p and at least one of them given")
            F = np.eye(k)
        if isinstance(W_raw, str):
            if W_raw != "identity":
                raise ParameterError(f"unknown matrix token {W_raw!r}")
            d = d if d is not None else k
            if d != k:
                raise ParameterError("'identity' W needs d == k")
            W = np.eye(k)
        if isinstance(S_raw, str):
            if S_raw != "identity":
                raise ParameterError(f"unknown matrix token {S_raw!r}")
            Sigma = np.eye(p)
        else:
            Sigma = np.asarray(S_raw, dtype=float)
        params = cls(W=W, F=F, series=series, b=data.get("b"), mu=data.get("mu"), Sigma=Sigma)
        for key, actual in (("d", params.d), ("k", params.k), ("p", params.p)):
            if data.get(key) is not None and int(data[key]) != actual:
                raise ParameterError(f"declared {key}={data[key]} but matrices imply {actual}")
        return params


def random_generator_params(
    k: int = 32, p: int = 100, row_scale: float = 1.4, bias_scale: float = 1.0, seed: int = 0
) -> GenModelParams:
    """Stand-in for pretrained generator weights: ``W = I``, ``F`` with orthogonal
    rows of norm ``row_scale``, ``b ~ N(0, bias_scale^2)``, identity series.

    Only ``W, F, b`` matter to the tanh template, which replaces the series.
    """
    if p < k:
        raise ParameterError(f"need p >= k for orthogonal rows, got k={k}, p={p}")
    rng = substream(seed, "generator-params")
    q, _ = np.linalg.qr(rng.standard_normal((p, k)))
    F = row_scale * q.T
    b = bias_scale * rng.standard_normal(k)
    return GenModelParams(W=np.eye(k), F=F, b=b, series=HermiteSeries((0.0, 1.0)))


def load_params(path) -> GenModelParams:
    with open(path) as fh:
        return GenModelParams.from_dict(json.load(fh))


def save_params(params: GenModelParams, path) -> None:
    Path(path).write_text(json.dumps(params.to_dict(), indent=1) + "\n")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix with +/-1 labels."""

    features: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return self.labels.size

    def to_csv(self, path) -> None:
        d = self.features.shape[1]
        header = ",".join([f"x{i}" for i in range(d)] + ["label"])
        with open(path, "w", newline="") as fh:
            fh.write(header + "\n")
            for row, y in zip(self.features, self.labels):
                fh.write(",".join(repr(float(v)) for v in row) + f",{int(y)}\n")


def write_samples_csv(samples: np.ndarray, path) -> None:
    d = samples.shape[1]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(f"x{i}" for i in range(d)) + "\n")
        for row in samples:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _clip_small(evals: np.ndarray) -> np.ndarray:
    floor = RANK_RTOL * max(float(evals.max(initial=0.0)), 0.0)
    return np.where(evals > floor, evals, 0.0)


def _lower_sqrt(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with ``L L^T = cov``; handles singular PSD input."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    evals, evecs = np.linalg.eigh(cov)
    if evals.min(initial=0.0) < -PSD_TOL:
        raise ParameterError("latent covariance is not positive semidefinite")
    root = evecs * np.sqrt(_clip_small(evals))
    # root root^T = cov; QR of root^T gives root = R^T Q^T, so R^T R = cov
    r = np.linalg.qr(root.T, mode="r")
    L = r.T
    signs = np.where(np.diag(L) < 0, -1.0, 1.0)
    return L * signs


class ModelSampler:
    """Reusable sampler for the non-Gaussian model (factorises Sigma once)."""

    def __init__(self, params: GenModelParams):
        self.params = params
        self.L = _lower_sqrt(params.Sigma)

    def latent(self, rng: np.random.Generator, n: int) -> np.ndarray:
        eps = rng.standard_normal((n, self.params.p))
        return self.params.mu + eps @ self.L.T

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        p = self.params
        z = self.latent(rng, n)
        return series_eval(p.series, z @ p.F.T + p.b) @ p.W.T


class EquivalentSampler:
    """Sampler for the Gaussian sharing the model's exact mean and covariance."""

    def __init__(self, params: GenModelParams, summary: MomentSummary | None = None):
        summary = model_mean_cov(params) if summary is None else summary
        evals, evecs = np.linalg.eigh(summary.cov)
        neg = float(-evals[evals < 0].sum())
        trace = float(np.trace(summary.cov))
        if neg > CLIP_MASS_TOL * max(trace, 1e-12):
            raise ParameterError(
                f"model covariance has negative eigenvalue mass {neg:.3g} (trace {trace:.3g})"
            )
        self.mean = summary.mean
        self.root = evecs * np.sqrt(_clip_small(evals))
        self.summary = summary

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        eps = rng.standard_normal((n, self.root.shape[1]))
        return self.mean + eps @ self.root.T


def sample_latent(params: GenModelParams, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. latent draws ``z = mu + L eps``."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    return ModelSampler(params).latent(substream(seed, "latent"), n)


def generate(params: GenModelParams, n: int, seed: int) -> np.ndarray:
    """``n`` rows ``x = W sigma(F z + b)``; the latent draws match ``sample_latent``."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    return ModelSampler(params).draw(substream(seed, "latent"), n)


def gaussian_equivalent(params: GenModelParams, n: int, seed: int) -> np.ndarray:
    """``n`` draws from ``N(mean, cov)`` with the model's exact first two moments."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    return EquivalentSampler(params).draw(substream(seed, "equivalent"), n)


def _assemble(neg: np.ndarray, pos: np.ndarray, perm: np.ndarray) -> Dataset:
    X = np.vstack([neg, pos])
    y = np.concatenate([-np.ones(len(neg)), np.ones(len(pos))])
    return Dataset(features=X[perm], labels=y[perm])


def build_train_dataset(params: GenModelParams, N: int, seed: int) -> Dataset:
    """Balanced set: ``N`` standard-normal rows (label -1), ``N`` model rows (+1)."""
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    neg = substream(seed, "train-negatives").standard_normal((N, params.d))
    pos = ModelSampler(params).draw(substream(seed, "train-positives"), N)
    perm = substream(seed, "train-shuffle").permutation(2 * N)
    return _assemble(neg, pos, perm)


def build_eval_pair(
    params: GenModelParams, N_test: int, seed: int, summary: MomentSummary | None = None
) -> tuple:
    """Non-Gaussian and Gaussian-equivalent evaluation sets.

    Both share the same label -1 rows and the same row order; only the +1
    rows differ (model samples vs. moment-matched Gaussian samples).
    """
    if N_test < 1:
        raise ParameterError(f"N_test must be >= 1, got {N_test}")
    neg = substream(seed, "eval-negatives").standard_normal((N_test, params.d))
    pos = ModelSampler(params).draw(substream(seed, "eval-positives"), N_test)
    equiv = EquivalentSampler(params, summary).draw(substream(seed, "eval-equivalent"), N_test)
    perm = substream(seed, "eval-shuffle").permutation(2 * N_test)
    return _assemble(neg, pos, perm), _assemble(neg, equiv, perm)
