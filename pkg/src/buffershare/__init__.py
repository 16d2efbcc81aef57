"""Packet-level DCTCP/Cubic shared-buffer simulator and sweep harness."""

from .config import ExperimentConfig, GridSpec, generate_grid
from .core import EventLoop, RandomSource
from .experiment import build_dumbbell, run_experiment
from .network import DumbbellSpec, NetworkConditions
from .qdisc import SharedBufferConfig
from .telemetry import ExperimentSummary

__version__ = "0.1.0"

__all__ = [
    "EventLoop",
    "RandomSource",
    "NetworkConditions",
    "DumbbellSpec",
    "SharedBufferConfig",
    "ExperimentConfig",
    "GridSpec",
    "generate_grid",
    "build_dumbbell",
    "run_experiment",
    "ExperimentSummary",
    "__version__",
]
