"""Cumulant-controllable non-Gaussian data from Hermite-expanded two-layer generators."""

from ._backend import BACKEND
from .errors import (
    ActivationError,
    HermgenError,
    InsufficientSampleError,
    ParameterError,
    QuadratureError,
    SolverError,
    TrainingDiverged,
)
from .experiment import ExperimentConfig, ExperimentResult, emit_plot, preset, run_experiment
from .genmodel import (
    Dataset,
    GenModelParams,
    build_eval_pair,
    build_train_dataset,
    gaussian_equivalent,
    generate,
    load_params,
    sample_latent,
    save_params,
)
from .hermite import HermiteSeries, QuadratureRule, expand_activation, gauss_hermite, he_eval, series_eval
from .moments import (
    CumulantVector,
    MomentSummary,
    model_mean_cov,
    sample_cumulants,
    series_cumulants,
    series_moment,
)
from .nn import TrainConfig, TrainTrace, TwoLayerNet, forward, grad_mse, init_net, train_online
from .solver import SolveReport, solve_coefficients

__version__ = "0.1.0"
