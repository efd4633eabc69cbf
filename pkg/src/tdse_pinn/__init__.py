"""Physics-informed neural network solver for the 1D time-dependent
Schroedinger equation of a quantum harmonic oscillator."""
from ._backend import BACKEND
from .autodiff import DerivativeBundle, eval_with_input_derivatives, loss_parameter_gradient
from .config import ExperimentConfig, load_config, preset
from .errors import CheckpointError, ConfigError, NumericalError, TrainingDiverged
from .evaluator import evaluate_grid, omega_sweep, per_time_mse
from .network import NetworkConfig, NetworkParams, forward, init
from .physics import Domain, OscillatorState, WaveField, superposition
from .trainer import OptimizerConfig, train

__version__ = "0.1.0"
