"""Find Hermite coefficients that realise prescribed cumulants.

With ``degree + 1`` unknowns ``c_0..c_degree`` and targets ``kappa_1..kappa_{degree+1}``
the system ``series_cumulants(c) = kappa`` is square. It is solved by damped
Newton iteration with a central-difference Jacobian, restarted from seeded
perturbations when a start stalls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SolverError
from .hermite import HermiteSeries
from .moments import CumulantVector, series_cumulants

DEFAULT_TOL = 1e-8
DEFAULT_MAX_RESTARTS = 20
_MAX_ITER = 100
_MAX_HALVINGS = 30
_RESTART_SCALE = 0.3


@dataclass(frozen=True)
class SolveReport:
    series: HermiteSeries
    residual_norm: float
    iterations: int
    restarts_used: int


def _cumulants(c: np.ndarray, m: int) -> np.ndarray:
    return np.array(series_cumulants(HermiteSeries(tuple(c)), m).values)


def _jacobian(c: np.ndarray, m: int) -> np.ndarray:
    J = np.empty((m, c.size))
    for i in range(c.size):
        h = 1e-6 * max(1.0, abs(c[i]))
        up, down = c.copy(), c.copy()
        up[i] += h
        down[i] -= h
        J[:, i] = (_cumulants(up, m) - _cumulants(down, m)) / (2 * h)
    return J


def _newton(c: np.ndarray, target: np.ndarray, tol: float):
    """Damped Newton from ``c``; returns (c, max-abs residual, iterations)."""
    m = target.size
    r = _cumulants(c, m) - target
    norm = float(np.max(np.abs(r)))
    it = 0
    while norm > tol and it < _MAX_ITER:
        it += 1
        J = _jacobian(c, m)
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        for _ in range(_MAX_HALVINGS + 1):
            trial = c + lam * step
            r_trial = _cumulants(trial, m) - target
            n_trial = float(np.max(np.abs(r_trial)))
            if np.isfinite(n_trial) and n_trial < norm:
                break
            lam *= 0.5
        else:
            break
        c, r, norm = trial, r_trial, n_trial
    return c, norm, it


def _canonical(c: np.ndarray) -> np.ndarray:
    # sigma(-z) has coefficients (-1)^i c_i and the same law, so flip to c_1 >= 0
    if c.size > 1 and c[1] < 0:
        c = c * np.where(np.arange(c.size) % 2, -1.0, 1.0)
    return c


def solve_coefficients(
    targets,
    degree: int,
    tol: float = DEFAULT_TOL,
    max_restarts: int = DEFAULT_MAX_RESTARTS,
    seed: int = 0,
) -> SolveReport:
    """Coefficients ``c_0..c_degree`` whose series has cumulants ``targets``.

    Parameters
    ----------
    targets : CumulantVector or sequence of float
        ``kappa_1 .. kappa_{degree+1}``.
    degree : int
        Truncation degree of the Hermite series.
    tol : float
        Maximum absolute cumulant error accepted.
    max_restarts : int
        Perturbed restarts tried after the moment-matched Gaussian start.
    seed : int
        Seed for the restart perturbations.

    Returns
    -------
    SolveReport
        The first certified solution with ``c_1 >= 0``. Every candidate is
        re-checked with ``series_cumulants`` before it is accepted.

    Raises
    ------
    SolverError
        If no start reaches ``tol``; carries the best residual seen.
    """
    kappa = np.asarray(targets.values if isinstance(targets, CumulantVector) else targets, dtype=float)
    if degree < 0:
        raise ParameterError(f"degree must be non-negative, got {degree}")
    if kappa.size != degree + 1:
        raise ParameterError(f"need {degree + 1} target cumulants for degree {degree}, got {kappa.size}")
    if not np.all(np.isfinite(kappa)):
        raise ParameterError("targets must be finite")
    if kappa.size >= 2 and kappa[1] < 0:
        raise ParameterError(f"target variance must be non-negative, got {kappa[1]}")

    m = kappa.size
    start = np.zeros(m)
    start[0] = kappa[0]
    if m > 1:
        start[1] = math.sqrt(kappa[1])
    rng = np.random.default_rng(seed)

    best_norm, best_c = math.inf, start
    total_iter = 0
    for attempt in range(max_restarts + 1):
        c0 = start if attempt == 0 else start + _RESTART_SCALE * rng.standard_normal(m)
        c, _, it = _newton(c0, kappa, tol)
        total_iter += it
        c = _canonical(c)
        # certify independently of what Newton reported
        norm = float(np.max(np.abs(_cumulants(c, m) - kappa)))
        if norm < best_norm:
            best_norm, best_c = norm, c
        if norm <= tol:
            return SolveReport(HermiteSeries(tuple(c)), norm, total_iter, attempt)
    raise SolverError(
        f"no certified solution after {max_restarts} restarts; best residual {best_norm:.3e}",
        best_residual=best_norm,
        best_coeffs=tuple(best_c),
    )
