"""Grid evaluation of a trained surrogate against the analytical density."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ConfigError
from .network import NetworkParams, forward
from .physics import Domain, OscillatorState, WaveField, grid_count, superposition

DEFAULT_MAX_POINTS = 50_000_000
TRAINING_OMEGA_RANGE = (0.75, 2.0)

Model = Union[NetworkParams, Callable[[np.ndarray], tuple]]


@dataclass
class EvaluationReport:
    nx: int
    nt: int
    dx: float
    dt: float
    global_mse: float
    per_time_mse: np.ndarray = field(repr=False)
    wall_time_inference: float = 0.0
    omega: float = 1.0

    def as_dict(self) -> dict:
        return {
            "grid_nt": self.nt,
            "grid_nx": self.nx,
            "dx": self.dx,
            "dt": self.dt,
            "omega": self.omega,
            "global_mse": self.global_mse,
            "wall_time_inference": self.wall_time_inference,
        }


def _predict(model: Model, points: np.ndarray):
    if isinstance(model, NetworkParams):
        if points.shape[1] != model.config.input_width:
            points = points[:, : model.config.input_width]
        return forward(model, points)
    return model(points)


def predict_field(model: Model, domain: Domain, dx: float, dt: float, omega: float = 1.0,
                  max_points: int = DEFAULT_MAX_POINTS, chunk: int = 65536) -> WaveField:
    """Surrogate (u, v) on the uniform grid ``x_min + i dx``, ``t_min + k dt``.

    Points carry ``omega`` as a third column; plain networks ignore it.
    """
    nx = grid_count(domain.length, dx)
    nt = grid_count(domain.duration, dt)
    if nx * nt > max_points:
        raise ConfigError(f"evaluation grid {nt}x{nx} exceeds the cap of {max_points} points")
    x = domain.x_min + dx * np.arange(nx)
    t = domain.t_min + dt * np.arange(nt)
    tt, xx = np.meshgrid(t, x, indexing="ij")
    pts = np.column_stack([xx.ravel(), tt.ravel(), np.full(nx * nt, omega)])
    u = np.empty(nx * nt)
    v = np.empty(nx * nt)
    for start in range(0, pts.shape[0], chunk):
        sl = slice(start, start + chunk)
        u[sl], v[sl] = _predict(model, pts[sl])
    return WaveField(domain.x_min, domain.t_min, dx, dt, u.reshape(nt, nx), v.reshape(nt, nx))


def evaluate_grid(model: Model, state: OscillatorState, domain: Domain, dx: float = 0.01,
                  dt: float = 0.01, max_points: int = DEFAULT_MAX_POINTS) -> EvaluationReport:
    """MSE of |phi_net|^2 against the analytical density over the full grid."""
    if dx <= 0 or dt <= 0:
        raise ConfigError("dx and dt must be positive")
    start = time.perf_counter()
    pred = predict_field(model, domain, dx, dt, state.omega, max_points=max_points)
    elapsed = time.perf_counter() - start
    u, v = superposition(state, pred.x[None, :], pred.t[:, None])
    err = (u * u + v * v - pred.density) ** 2
    rows = err.mean(axis=1)
    return EvaluationReport(pred.nx, pred.nt, dx, dt, float(rows.mean()), rows, elapsed, state.omega)


def per_time_mse(model: Model, state: OscillatorState, domain: Domain, dx: float = 0.01,
                 dt: float = 0.01) -> np.ndarray:
    return evaluate_grid(model, state, domain, dx, dt).per_time_mse


@dataclass
class SweepRow:
    omega: float
    mse: float
    in_training_range: bool


def omega_sweep(model: Model, m: int, n: int, omegas: Sequence[float], domain: Domain,
                dx: float = 0.01, dt: float = 0.01,
                training_range: tuple[float, float] = TRAINING_OMEGA_RANGE) -> list[SweepRow]:
    if isinstance(model, NetworkParams) and model.config.input_width != 3:
        raise ConfigError("omega sweep needs an omega-conditioned network (input_width 3)")
    lo, hi = training_range
    rows = []
    for w in omegas:
        rep = evaluate_grid(model, OscillatorState(m, n, float(w)), domain, dx, dt)
        rows.append(SweepRow(float(w), rep.global_mse, bool(lo <= w <= hi)))
    return rows


def default_sweep_omegas() -> np.ndarray:
    return np.round(np.arange(21) * 0.1 + 0.5, 10)


def write_per_time_csv(path, report: EvaluationReport, t_min: float = 0.0) -> None:
    t = t_min + report.dt * np.arange(report.nt)
    np.savetxt(path, np.column_stack([t, report.per_time_mse]), delimiter=",",
               header="t,mse", comments="", fmt="%.17g")


def write_sweep_csv(path, rows: Sequence[SweepRow]) -> None:
    with open(path, "w") as fh:
        fh.write("omega,mse,in_range\n")
        for r in rows:
            fh.write(f"{r.omega!r},{r.mse!r},{int(r.in_training_range)}\n")
