"""Probabilist's Hermite polynomials, Gauss-Hermite rules and activation expansions.

All expectations are taken under the standard Gaussian measure, so
``E[He_m(Z) He_n(Z)] = n! * delta_mn`` and quadrature weights sum to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ActivationError, ParameterError, QuadratureError

DEFAULT_QUAD_ORDER = 200
_NEWTON_TOL = 1e-14
_NEWTON_MAXITER = 100
_RESCALE = 1e150


def he_eval(n: int, z):
    """Evaluate the probabilist's Hermite polynomial ``He_n`` at ``z``.

    Uses the three-term recurrence ``He_{k+1} = z He_k - k He_{k-1}``.
    Scalars return a float, arrays return an array of the same shape.
    """
    if n < 0:
        raise ParameterError(f"Hermite degree must be non-negative, got {n}")
    z = np.asarray(z, dtype=float)
    prev = np.ones_like(z)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = z.copy()
    for k in range(1, n):
        prev, cur = cur, z * cur - k * prev
    return cur if cur.ndim else float(cur)


def he_table(degree: int, z) -> np.ndarray:
    """Return ``He_0(z), ..., He_degree(z)`` stacked along a new leading axis."""
    z = np.asarray(z, dtype=float)
    out = np.empty((degree + 1,) + z.shape)
    out[0] = 1.0
    if degree >= 1:
        out[1] = z
    for k in range(1, degree):
        out[k + 1] = z * out[k] - k * out[k - 1]
    return out


@dataclass(frozen=True)
class HermiteSeries:
    """Truncated expansion ``sigma(z) = sum_i coeffs[i] * He_i(z)``."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in np.ravel(np.asarray(self.coeffs, dtype=float)))
        if not coeffs:
            raise ParameterError("a Hermite series needs at least one coefficient")
        if not all(math.isfinite(c) for c in coeffs):
            raise ParameterError(f"non-finite Hermite coefficient in {coeffs}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return series_eval(self, z)

    def to_dict(self) -> dict:
        return {"degree": self.degree, "coeffs": list(self.coeffs)}

    @classmethod
    def from_dict(cls, data: dict) -> "HermiteSeries":
        s = cls(tuple(data["coeffs"]))
        if "degree" in data and int(data["degree"]) != s.degree:
            raise ParameterError(
                f"degree {data['degree']} does not match {len(s.coeffs)} coefficients"
            )
        return s


def series_eval(s: HermiteSeries, z):
    """Evaluate a Hermite series elementwise (Clenshaw-free, plain recurrence)."""
    z = np.asarray(z, dtype=float)
    c = s.coeffs
    acc = np.full_like(z, c[0])
    if s.degree >= 1:
        prev = np.ones_like(z)
        cur = z.copy()
        acc = acc + c[1] * cur
        for k in range(1, s.degree):
            prev, cur = cur, z * cur - k * prev
            acc = acc + c[k + 1] * cur
    return acc if acc.ndim else float(acc)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite nodes and probability weights for the standard normal."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.nodes.size

    def expect(self, values) -> float:
        """Weighted sum of ``values`` sampled at the nodes."""
        return float(np.dot(self.weights, values))


def _orthonormal_pair(n: int, x: np.ndarray):
    """Return ``(h_n, h_{n-1}, log_scale)`` for the orthonormal polynomials
    ``h_k = He_k / sqrt(k!)``, rescaled so nothing overflows.

    The true values are ``h * exp(log_scale)``.
    """
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    log_scale = np.zeros_like(x)
    for k in range(n):
        prev, cur = cur, (x * cur - math.sqrt(k) * prev) / math.sqrt(k + 1)
        big = np.abs(cur) > _RESCALE
        if big.any():
            prev = np.where(big, prev / _RESCALE, prev)
            cur = np.where(big, cur / _RESCALE, cur)
            log_scale = log_scale + np.where(big, math.log(_RESCALE), 0.0)
    return cur, prev, log_scale


def _initial_guesses(n: int) -> np.ndarray:
    # Positive roots, largest first, from the cosine asymptotic
    # theta - sin(theta) cos(theta) = pi (4k + 3) / (4n + 2).
    m = n // 2
    k = np.arange(m)
    target = np.pi * (4 * k + 3) / (4 * n + 2)
    theta = np.cbrt(1.5 * target)
    for _ in range(50):
        f = theta - np.sin(theta) * np.cos(theta) - target
        theta = theta - f / np.maximum(2.0 * np.sin(theta) ** 2, 1e-300)
    return np.sqrt(2.0 * (2 * n + 1)) * np.cos(theta)


@lru_cache(maxsize=64)
def _gauss_hermite_cached(n: int):
    m = n // 2
    x = _initial_guesses(n)
    done = np.zeros(m, dtype=bool)
    for _ in range(_NEWTON_MAXITER):
        if done.all():
            break
        hn, hm1, _ = _orthonormal_pair(n, x)
        # d/dx h_n = sqrt(n) h_{n-1}; the common rescaling cancels in the ratio
        step = hn / (math.sqrt(n) * hm1)
        step[done] = 0.0
        x = x - step
        done |= np.abs(step) <= _NEWTON_TOL * np.maximum(1.0, np.abs(x))
    if not done.all():
        bad = int(np.flatnonzero(~done)[0])
        raise QuadratureError(
            f"Newton iteration for node {bad} of the {n}-point rule did not converge",
            node_index=bad,
        )
    pos = np.sort(x)
    if m > 1 and np.any(np.diff(pos) <= 0):
        raise QuadratureError(f"duplicate roots while building the {n}-point rule")
    if n % 2:
        nodes = np.concatenate([-pos[::-1], [0.0], pos])
    else:
        nodes = np.concatenate([-pos[::-1], pos])
    # w_i = n! / (n^2 He_{n-1}(x_i)^2) = 1 / (n h_{n-1}(x_i)^2)
    _, hm1, log_scale = _orthonormal_pair(n, nodes)
    log_w = -math.log(n) - 2.0 * (np.log(np.abs(hm1)) + log_scale)
    weights = np.exp(log_w - log_w.max())
    weights = 0.5 * (weights + weights[::-1])
    weights /= weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_hermite(n: int) -> QuadratureRule:
    """Build the ``n``-point Gauss-Hermite rule for the standard normal.

    The rule integrates polynomials of degree ``<= 2n - 1`` exactly.
    Nodes are the roots of ``He_n``, found by Newton iteration started from
    asymptotic estimates. The rule is exactly symmetric about zero.

    Raises
    ------
    QuadratureError
        If a root fails to converge within 100 iterations.
    """
    n = int(n)
    if n < 1:
        raise ParameterError(f"quadrature order must be >= 1, got {n}")
    if n == 1:
        nodes, weights = np.zeros(1), np.ones(1)
        nodes.setflags(write=False)
        weights.setflags(write=False)
        return QuadratureRule(nodes, weights)
    return QuadratureRule(*_gauss_hermite_cached(n))


def expand_activation(
    sigma: Callable, degree: int, quad_order: int = DEFAULT_QUAD_ORDER
) -> HermiteSeries:
    """Project ``sigma`` onto ``He_0 .. He_degree``.

    Coefficients are ``c_i = E[sigma(Z) He_i(Z)] / i!`` so that the series
    converges to ``sigma`` in L2 of the Gaussian measure. ``sigma`` is called
    once on the array of nodes.
    """
    if degree < 0:
        raise ParameterError(f"degree must be non-negative, got {degree}")
    if quad_order < degree + 1:
        raise ParameterError(
            f"quad_order={quad_order} is too small for degree {degree}; need >= {degree + 1}"
        )
    rule = gauss_hermite(quad_order)
    values = np.asarray(sigma(rule.nodes), dtype=float)
    if values.shape != rule.nodes.shape:
        values = np.broadcast_to(values, rule.nodes.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        node = float(rule.nodes[np.flatnonzero(bad)[0]])
        raise ActivationError(f"activation is not finite at node {node!r}", node=node)
    table = he_table(degree, rule.nodes)
    # Pair symmetric nodes so odd activations give exact zeros for even degrees.
    wv = rule.weights * values
    half = rule.size // 2
    coeffs = []
    for i in range(degree + 1):
        terms = wv * table[i]
        total = float(np.sum(terms[:half] + terms[::-1][:half]))
        if rule.size % 2:
            total += float(terms[half])
        coeffs.append(total / math.factorial(i))
    return HermiteSeries(tuple(coeffs))


ACTIVATIONS: dict[str, Callable] = {
    "tanh": np.tanh,
    "identity": lambda z: np.asarray(z, dtype=float),
    "relu": lambda z: np.maximum(z, 0.0),
    "sigmoid": lambda z: 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z))),
    "sin": np.sin,
}
