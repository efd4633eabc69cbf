"""Adam with exponential learning-rate decay and the PINN training loop."""
from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from . import network
from .errors import ConfigError, NumericalError, TrainingDiverged
from .evaluator import EvaluationReport, evaluate_grid
from .loss import PinnLoss
from .sampler import sample_boundary, sample_initial, sample_interior

if TYPE_CHECKING:
    from .config import ExperimentConfig

log = logging.getLogger(__name__)

LOG_FIELDS = ["step", "lr", "L_f", "L_BC", "L_IC", "total", "min_causal_weight"]


@dataclass(frozen=True)
class OptimizerConfig:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr: float = 1e-3
    decay_rate: float = 0.9
    decay_steps: int = 2000
    max_steps: int = 10000
    convergence_mse: Optional[float] = None

    def __post_init__(self):
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("Adam betas must lie in [0, 1)")
        if not self.lr > 0 or not self.eps > 0:
            raise ConfigError("learning rate and Adam eps must be positive")
        if not (0 < self.decay_rate <= 1) or self.decay_steps < 1:
            raise ConfigError("decay_rate must be in (0, 1] and decay_steps >= 1")
        if self.max_steps < 0:
            raise ConfigError("max_steps must be >= 0")


def lr_at(config: OptimizerConfig, step: float) -> float:
    """alpha0 * gamma ** (step / decay_steps), continuous exponent."""
    if step < 0:
        raise ConfigError("step must be non-negative")
    return config.lr * config.decay_rate ** (step / config.decay_steps)


@dataclass
class AdamState:
    m: np.ndarray
    s: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0)


def adam_step(theta: np.ndarray, grad: np.ndarray, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """One bias-corrected Adam update. Returns ``(new_theta, new_state)``; inputs untouched."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != theta.shape or state.m.shape != theta.shape:
        raise ConfigError("parameter, gradient and Adam state sizes differ")
    if not np.all(np.isfinite(grad)):
        bad = int(np.flatnonzero(~np.isfinite(grad))[0])
        raise NumericalError(f"non-finite gradient entry {bad}; step aborted", index=bad)
    k = state.step + 1
    m = beta1 * state.m + (1.0 - beta1) * grad
    s = beta2 * state.s + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**k)
    s_hat = s / (1.0 - beta2**k)
    new = theta - lr * m_hat / (np.sqrt(s_hat) + eps)
    return new, AdamState(m, s, k)


@dataclass
class TrainResult:
    params: network.NetworkParams
    log: list[dict] = field(default_factory=list)
    report: Optional[EvaluationReport] = None
    steps: int = 0
    converged: bool = False


def coarse_mse(params, config: "ExperimentConfig") -> float:
    n = config.coarse_points
    dom = config.domain
    return evaluate_grid(params, config.state, dom, dom.length / n, dom.duration / n).global_mse


def train(config: "ExperimentConfig", out_dir=None,
          callback: Optional[Callable[[int, dict], None]] = None,
          final_eval: bool = True) -> TrainResult:
    """Run the training loop described by ``config``.

    Checkpoints go to ``out_dir/checkpoints`` every ``checkpoint_every`` steps
    and as ``final.ckpt``; the loss log to ``out_dir/train_log.csv``. Raises
    :class:`TrainingDiverged` on a non-finite loss or gradient.
    """
    opt = config.optimizer
    # Adam works on ``theta``; with input scaling these are the parameters of
    # the network seen in normalised coordinates and ``raw`` folds them back.
    scaling = network.InputScaling.for_domain(config.domain) if config.input_scaling else None
    net_cfg = config.network
    theta = network.init(net_cfg).flat

    def raw(flat):
        p = network.NetworkParams(net_cfg, flat)
        return scaling.fold(p) if scaling is not None else p

    params = raw(theta)
    state = AdamState.zeros(theta.size)
    objective = PinnLoss(config.state, config.domain, config.weights, config.causal)
    ckpt_dir = None
    if out_dir is not None:
        ckpt_dir = Path(out_dir) / "checkpoints"
        ckpt_dir.mkdir(parents=True, exist_ok=True)

    rows: list[dict] = []
    converged = False
    step = 0
    for step in range(opt.max_steps):
        lr = lr_at(opt, step)
        interior = sample_interior(config.sampler, config.domain, step)
        boundary = sample_boundary(config.sampler, config.domain, step)
        initial = sample_initial(config.sampler, config.domain, step)
        breakdown = None
        try:
            breakdown, grad = objective.value_and_grad(params, interior, boundary, initial)
            if not math.isfinite(breakdown.total):
                raise NumericalError("non-finite loss")
            if scaling is not None:
                grad = scaling.pull_back(net_cfg, grad)
            theta, state = adam_step(theta, grad, state, lr, opt.beta1, opt.beta2, opt.eps)
        except NumericalError as exc:
            comps = breakdown.as_dict() if breakdown is not None else {"error": str(exc)}
            raise TrainingDiverged(step, lr, comps) from None
        params = raw(theta)
        done = step + 1
        if step % config.log_every == 0 or done == opt.max_steps:
            row = {"step": step, "lr": lr, **breakdown.as_dict()}
            rows.append(row)
            if callback is not None:
                callback(step, row)
        if ckpt_dir is not None and done % config.checkpoint_every == 0:
            network.save_checkpoint(params, ckpt_dir / f"step_{done:07d}.ckpt")
        if opt.convergence_mse is not None and done % config.eval_every == 0:
            mse = coarse_mse(params, config)
            log.info("step %d coarse MSE %.3e", done, mse)
            if mse <= opt.convergence_mse:
                converged = True
                break
    steps = (step + 1) if opt.max_steps else 0

    report = None
    if final_eval:
        report = evaluate_grid(params, config.state, config.domain, config.eval_dx, config.eval_dt)
    if out_dir is not None:
        network.save_checkpoint(params, ckpt_dir / "final.ckpt")
        write_log(Path(out_dir) / "train_log.csv", rows)
    return TrainResult(params, rows, report, steps, converged)


def write_log(path, rows) -> None:
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=LOG_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(float(r[k])) if k != "step" else r[k] for k in LOG_FIELDS})
    os.replace(tmp, path)
