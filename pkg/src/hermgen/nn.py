"""Two-layer ReLU network trained by online SGD on Gaussian vs. model samples."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import ParameterError, TrainingDiverged
from .genmodel import GenModelParams, ModelSampler, build_eval_pair, substream
from .moments import model_mean_cov

# samples are drawn in fixed-size blocks so the trajectory does not depend
# on where checkpoints fall
DRAW_BLOCK = 1024


@dataclass
class TwoLayerNet:
    """``f(x) = sum_j a_j relu(V_j . x + u_j)``."""

    V: np.ndarray
    u: np.ndarray
    a: np.ndarray

    @property
    def hidden(self) -> int:
        return self.a.size

    @property
    def n_params(self) -> int:
        return self.V.size + self.u.size + self.a.size

    def copy(self) -> "TwoLayerNet":
        return TwoLayerNet(self.V.copy(), self.u.copy(), self.a.copy())

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.maximum(X @ self.V.T + self.u, 0.0) @ self.a

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.V).all() and np.isfinite(self.u).all() and np.isfinite(self.a).all())


def init_net(d: int, h: int, init_scale: float = 1.0, seed: int = 0) -> TwoLayerNet:
    """Gaussian init: ``V ~ N(0, s^2/d)``, ``a ~ N(0, s^2/h)``, ``u = 0``."""
    if d < 1 or h < 1:
        raise ParameterError(f"d and h must be >= 1, got d={d}, h={h}")
    rng = substream(seed, "init")
    V = rng.standard_normal((h, d)) * (init_scale / np.sqrt(d))
    a = rng.standard_normal(h) * (init_scale / np.sqrt(h))
    return TwoLayerNet(V=V, u=np.zeros(h), a=a)


def forward(net: TwoLayerNet, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.maximum(net.V @ x + net.u, 0.0) @ net.a)


def grad_mse(net: TwoLayerNet, x, y: float) -> TwoLayerNet:
    """Gradient of ``(f(x) - y)^2`` in ``(V, u, a)``; relu'(0) is taken as 0."""
    x = np.asarray(x, dtype=float)
    pre = net.V @ x + net.u
    act = np.maximum(pre, 0.0)
    g = 2.0 * (float(act @ net.a) - y)
    gp = g * net.a * (pre > 0)
    return TwoLayerNet(V=np.outer(gp, x), u=gp, a=g * act)


def mse(net: TwoLayerNet, X: np.ndarray, Y: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.mean((net.predict(X) - Y) ** 2))


def log_checkpoints(steps: int, count: int = 25) -> tuple:
    """Up to ``count`` distinct integer steps, log-spaced from 1 to ``steps``."""
    if steps < 1:
        return ()
    pts = np.unique(np.rint(np.logspace(0.0, np.log10(steps), count)).astype(int))
    return tuple(int(p) for p in pts)


@dataclass(frozen=True)
class TrainConfig:
    """Online SGD settings.

    ``lr_normalization="fan_in"`` divides ``learning_rate`` by the input
    dimension; the rate actually applied is recorded in each trace.
    """

    learning_rate: float = 0.1
    steps: int = 100_000
    checkpoints: tuple = ()
    n_test: int = 2000
    seeds: tuple = (0, 1, 2, 3, 4)
    hidden: int = 512
    init_scale: float = 1.0
    lr_normalization: str = "none"

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ParameterError("learning_rate must be non-negative")
        if self.steps < 1:
            raise ParameterError("steps must be >= 1")
        cps = tuple(int(c) for c in self.checkpoints) or log_checkpoints(self.steps)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ParameterError("checkpoints must be strictly increasing")
        if cps[0] < 0 or cps[-1] > self.steps:
            raise ParameterError("checkpoints must lie in [0, steps]")
        if not self.seeds:
            raise ParameterError("at least one seed is required")
        if self.lr_normalization not in ("none", "fan_in"):
            raise ParameterError(f"unknown lr_normalization {self.lr_normalization!r}")
        object.__setattr__(self, "checkpoints", cps)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def effective_lr(self, d: int) -> float:
        return self.learning_rate / d if self.lr_normalization == "fan_in" else self.learning_rate

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "steps": self.steps,
            "checkpoints": list(self.checkpoints),
            "n_test": self.n_test,
            "seeds": list(self.seeds),
            "hidden": self.hidden,
            "init_scale": self.init_scale,
            "lr_normalization": self.lr_normalization,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        data = dict(data)
        data["checkpoints"] = tuple(data.get("checkpoints", ()))
        data["seeds"] = tuple(data.get("seeds", (0,)))
        return cls(**data)


@dataclass
class TrainTrace:
    seed: int
    steps: list = field(default_factory=list)
    loss_non_gaussian: list = field(default_factory=list)
    loss_gauss_equiv: list = field(default_factory=list)
    effective_lr: float = 0.0
    n_positive: int = 0
    backend: str = ""

    def rows(self):
        for t, ng, ge in zip(self.steps, self.loss_non_gaussian, self.loss_gauss_equiv):
            yield t, ng, ge, self.seed


TRACE_HEADER = "step,loss_non_gaussian,loss_gauss_equiv,seed"


def format_trace_rows(traces) -> str:
    lines = [TRACE_HEADER]
    for tr in traces:
        lines.extend(f"{t},{ng!r},{ge!r},{s}" for t, ng, ge, s in tr.rows())
    return "\n".join(lines) + "\n"


def train_online(
    params: GenModelParams,
    cfg: TrainConfig,
    run_seed: int,
    backend: str | None = None,
) -> TrainTrace:
    """Train a fresh network by online SGD and record both test losses.

    Each step draws a fair label; ``y = -1`` rows are standard normal and
    ``y = +1`` rows come from the generative model. Samples are never reused.
    The two evaluation sets are fixed for the run and share their ``-1`` rows.

    Raises
    ------
    TrainingDiverged
        When a loss or parameter becomes non-finite; ``.step`` is the
        1-based step at which it happened.
    """
    kernel = _backend.KERNELS[backend] if backend else _backend.sgd_steps
    backend_name = backend or _backend.BACKEND
    d = params.d
    eta = cfg.effective_lr(d)
    summary = model_mean_cov(params)
    ng_set, ge_set = build_eval_pair(params, cfg.n_test, run_seed, summary=summary)
    net = init_net(d, cfg.hidden, cfg.init_scale, run_seed)
    sampler = ModelSampler(params)
    label_rng = substream(run_seed, "train-labels")
    neg_rng = substream(run_seed, "train-negatives")
    pos_rng = substream(run_seed, "train-positives")

    trace = TrainTrace(seed=run_seed, effective_lr=eta, backend=backend_name)
    pending = list(cfg.checkpoints)

    def record(step):
        ng = mse(net, ng_set.features, ng_set.labels)
        ge = mse(net, ge_set.features, ge_set.labels)
        if not (np.isfinite(ng) and np.isfinite(ge) and net.is_finite()):
            raise TrainingDiverged(f"non-finite test loss or parameters by step {step}", step=step)
        trace.steps.append(step)
        trace.loss_non_gaussian.append(ng)
        trace.loss_gauss_equiv.append(ge)

    if pending and pending[0] == 0:
        record(pending.pop(0))
    done = 0
    while done < cfg.steps:
        n = min(DRAW_BLOCK, cfg.steps - done)
        Y = np.where(label_rng.random(n) < 0.5, -1.0, 1.0)
        pos = Y > 0
        n_pos = int(pos.sum())
        X = np.empty((n, d))
        X[~pos] = neg_rng.standard_normal((n - n_pos, d))
        if n_pos:
            X[pos] = sampler.draw(pos_rng, n_pos)
        trace.n_positive += n_pos
        X = np.ascontiguousarray(X)
        i = 0
        while i < n:
            stop = n
            if pending and pending[0] - done <= n:
                stop = pending[0] - done
            bad = kernel(net.V, net.u, net.a, X, Y, eta, i, stop)
            if bad >= 0:
                raise TrainingDiverged(
                    f"non-finite loss at step {done + bad + 1}; learning rate {eta:g} is too high",
                    step=done + bad + 1,
                )
            i = stop
            if pending and pending[0] == done + stop:
                record(pending.pop(0))
        done += n
    return trace
