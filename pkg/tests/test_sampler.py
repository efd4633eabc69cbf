import math

import numpy as np
import pytest

from tdse_pinn.errors import ConfigError
from tdse_pinn.physics import Domain
from tdse_pinn.sampler import SamplerConfig, sample_boundary, sample_initial, sample_interior

DOMAIN = Domain()


def test_interior_inside_domain():
    pts = sample_interior(SamplerConfig(), DOMAIN)
    assert pts.shape == (3140, 2)
    assert np.all((pts[:, 0] > -math.pi) & (pts[:, 0] < math.pi))
    assert np.all((pts[:, 1] > 0) & (pts[:, 1] < 2 * math.pi))


def test_interior_deterministic_per_step():
    cfg = SamplerConfig(seed=3)
    a = sample_interior(cfg, DOMAIN, step=7)
    assert np.array_equal(a, sample_interior(cfg, DOMAIN, step=7))
    assert not np.array_equal(a, sample_interior(cfg, DOMAIN, step=8))
    assert not np.array_equal(a, sample_interior(SamplerConfig(seed=4), DOMAIN, step=7))


def test_interior_mean_x():
    pts = sample_interior(SamplerConfig(n_interior=1_000_000, seed=1), DOMAIN)
    assert abs(pts[:, 0].mean()) < 0.01


def test_boundary_walls_and_balance():
    for n in (1, 7, 200):
        pts = sample_boundary(SamplerConfig(n_boundary=n), DOMAIN)
        x = pts[:, 0]
        assert np.all((x == DOMAIN.x_min) | (x == DOMAIN.x_max))
        assert abs(int(np.sum(x == DOMAIN.x_min)) - int(np.sum(x == DOMAIN.x_max))) <= 1


def test_boundary_time_coverage_over_seeds():
    # For 200 uniform draws, P(max gap > 10/200 of the span) is about 1%.
    n = 200
    bound = 10 * DOMAIN.duration / n
    ok = 0
    for seed in range(100):
        t = np.sort(sample_boundary(SamplerConfig(n_boundary=n, seed=seed), DOMAIN)[:, 1])
        ok += np.diff(t).max() < bound
    assert ok >= 95


def test_initial_batch():
    cfg = SamplerConfig(seed=2)
    pts = sample_initial(cfg, DOMAIN)
    assert pts.shape == (314, 2)
    assert np.all(pts[:, 1] == DOMAIN.t_min)
    assert np.array_equal(pts, sample_initial(cfg, DOMAIN))


def test_streams_independent_of_other_counts():
    a = sample_interior(SamplerConfig(n_boundary=10, n_initial=5), DOMAIN, step=2)
    b = sample_interior(SamplerConfig(n_boundary=999, n_initial=77), DOMAIN, step=2)
    assert np.array_equal(a, b)
    c = sample_initial(SamplerConfig(n_interior=1), DOMAIN)
    d = sample_initial(SamplerConfig(n_interior=5000), DOMAIN)
    assert np.array_equal(c, d)


def test_omega_column():
    cfg = SamplerConfig(omega_range=(0.75, 2.0))
    for fn in (sample_interior, sample_boundary, sample_initial):
        pts = fn(cfg, DOMAIN)
        assert pts.shape[1] == 3
        assert np.all((pts[:, 2] >= 0.75) & (pts[:, 2] <= 2.0))


def test_other_domain():
    d = Domain(-1.0, 2.0, 1.0, 6 * math.pi)
    pts = sample_interior(SamplerConfig(n_interior=5000), d)
    assert pts[:, 0].min() >= -1.0 and pts[:, 0].max() <= 2.0
    assert pts[:, 1].min() >= 1.0 and pts[:, 1].max() <= 6 * math.pi


@pytest.mark.parametrize("kw", [dict(n_interior=0), dict(n_boundary=0), dict(n_initial=0),
                                dict(omega_range=(2.0, 1.0)), dict(omega_range=(0.0, 1.0))])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        SamplerConfig(**kw)
