"""Compressed sensing with a learned per-datum compression ratio.

The codec compresses a signal through random Gaussian measurements and
recovers it by L1 minimization; an online agent (continuous actor-critic
or a discrete Q-grid baseline, both built on sequential extreme learning
machines) learns which compression ratio maximizes the compression score
of each datum.
"""

from .agents import AcOselmAgent, OsQNetAgent, ReplayBuffer, exp_schedule
from .checkpoint import load_checkpoint, save_checkpoint
from .codec import (
    CompressedVector,
    CsCodec,
    ScoreParams,
    compression_score,
    dct_basis,
    derive_phi,
    ratio_to_m,
    rmse,
)
from .data import Dataset, downscale, load_csv, load_idx, save_csv, synth_sparse
from .elm import ACTIVATIONS, ElmRegressor, OselmRegressor
from .env import CompressionEnv, StepResult
from .exceptions import (
    ConfigError,
    DataFormatError,
    RecoveryError,
    SingularMatrixError,
)
from .experiment import (
    ExperimentConfig,
    bench_timing,
    resolve_dataset,
    run_experiment,
    sweep_scores,
)
from .numerics import gaussian, make_rng, seeded_rng, sigmoid, sigmoid_grad, solve

__version__ = "0.1.0"

__all__ = [
    "ACTIVATIONS",
    "AcOselmAgent",
    "CompressedVector",
    "CompressionEnv",
    "ConfigError",
    "CsCodec",
    "DataFormatError",
    "Dataset",
    "ElmRegressor",
    "ExperimentConfig",
    "OsQNetAgent",
    "OselmRegressor",
    "RecoveryError",
    "ReplayBuffer",
    "ScoreParams",
    "SingularMatrixError",
    "StepResult",
    "bench_timing",
    "compression_score",
    "dct_basis",
    "derive_phi",
    "downscale",
    "exp_schedule",
    "gaussian",
    "load_checkpoint",
    "load_csv",
    "load_idx",
    "make_rng",
    "ratio_to_m",
    "resolve_dataset",
    "rmse",
    "run_experiment",
    "save_checkpoint",
    "save_csv",
    "seeded_rng",
    "sigmoid",
    "sigmoid_grad",
    "solve",
    "synth_sparse",
]
