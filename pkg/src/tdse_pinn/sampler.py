"""Collocation, boundary and initial-condition batches.

Every batch is a pure function of ``(seed, stream, step)``: a fresh PCG64
generator is built from ``SeedSequence([seed, stream, step])``, so the three
streams never share random draws and any step can be regenerated in
isolation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError
from .physics import Domain

INTERIOR, BOUNDARY, INITIAL = 0, 1, 2


@dataclass(frozen=True)
class SamplerConfig:
    n_interior: int = 3140
    n_boundary: int = 200
    n_initial: int = 314
    seed: int = 0
    omega_range: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if min(self.n_interior, self.n_boundary, self.n_initial) < 1:
            raise ConfigError("sample counts must be >= 1")
        if self.omega_range is not None:
            lo, hi = self.omega_range
            if not (0 < lo < hi):
                raise ConfigError(f"omega_range must satisfy 0 < low < high, got {self.omega_range}")

    @property
    def arity(self) -> int:
        return 2 if self.omega_range is None else 3


def rng_for(seed: int, stream: int, step: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream, step])))


def _assemble(config, rng, x, t):
    cols = [x, t]
    if config.omega_range is not None:
        lo, hi = config.omega_range
        cols.append(rng.uniform(lo, hi, size=x.shape[0]))
    return np.column_stack(cols)


def sample_interior(config: SamplerConfig, domain: Domain, step: int = 0) -> np.ndarray:
    rng = rng_for(config.seed, INTERIOR, step)
    n = config.n_interior
    x = rng.uniform(domain.x_min, domain.x_max, size=n)
    t = rng.uniform(domain.t_min, domain.t_max, size=n)
    return _assemble(config, rng, x, t)


def sample_boundary(config: SamplerConfig, domain: Domain, step: int = 0) -> np.ndarray:
    """Points on the two walls, alternating x_min / x_max."""
    rng = rng_for(config.seed, BOUNDARY, step)
    n = config.n_boundary
    x = np.where(np.arange(n) % 2 == 0, domain.x_min, domain.x_max)
    t = rng.uniform(domain.t_min, domain.t_max, size=n)
    return _assemble(config, rng, x, t)


def sample_initial(config: SamplerConfig, domain: Domain, step: int = 0) -> np.ndarray:
    rng = rng_for(config.seed, INITIAL, step)
    n = config.n_initial
    x = rng.uniform(domain.x_min, domain.x_max, size=n)
    t = np.full(n, domain.t_min)
    return _assemble(config, rng, x, t)
