import math

import pytest

from tdse_pinn.config import (
    KINDS,
    ExperimentConfig,
    format_config,
    load_config,
    parse_config_text,
    parse_number,
    preset,
    preset_path,
)
from tdse_pinn.errors import ConfigError


def test_parse_number_pi_forms():
    assert parse_number("pi") == math.pi
    assert parse_number("-pi") == -math.pi
    assert parse_number("6pi") == 6 * math.pi
    assert parse_number("6*pi") == 6 * math.pi
    assert parse_number(" 2 * pi ") == 2 * math.pi
    assert parse_number("1e-3") == 1e-3
    with pytest.raises(ValueError):
        parse_number("tau")


def test_baseline_defaults_paper_scale():
    c = preset("baseline")
    assert (c.network.hidden_layers, c.network.hidden_width, c.network.activation) == (6, 512, "tanh")
    assert (c.sampler.n_interior, c.sampler.n_boundary, c.sampler.n_initial) == (3140, 200, 314)
    assert (c.state.m, c.state.n, c.state.omega) == (0, 1, 1.0)
    assert c.optimizer.lr == 1e-3 and c.optimizer.decay_rate == 0.9
    assert c.optimizer.decay_steps == 2000 and c.optimizer.beta1 == 0.9


def test_kind_defaults():
    g = preset("generalisability")
    assert g.omega_range == (0.75, 2.0) and g.network.input_width == 3
    assert preset("large_time").domain.t_max == 6 * math.pi
    h = preset("high_energy")
    assert (h.state.m, h.state.n) == (0, 3)
    hc = preset("high_energy", causal=True)
    assert hc.causal.enabled and hc.network.activation == "silu"
    assert (hc.optimizer.decay_rate, hc.optimizer.decay_steps) == (0.95, 100)


def test_desk_scale_overrides():
    d = preset("baseline", desk=True)
    assert (d.network.hidden_layers, d.network.hidden_width) == (4, 64)
    assert (d.sampler.n_interior, d.sampler.n_boundary, d.sampler.n_initial) == (1024, 128, 128)
    assert d.optimizer.max_steps == 5000
    assert d.input_scaling and not preset("baseline").input_scaling
    o = d.optimizer
    assert (o.lr, o.decay_rate, o.decay_steps, o.beta2) == (5e-3, 0.7, 1000, 0.99)
    assert d.network.activation == "tanh"


def test_kind_consistency():
    flat = preset("baseline").to_flat()
    with pytest.raises(ConfigError):
        parse_config_text("experiment = generalisability\nomega_low = 2.0\nomega_high = 1.0\n")
    with pytest.raises(ConfigError):
        parse_config_text("experiment = baseline\nomega_low = 0.5\nomega_high = 1.0\n")
    with pytest.raises(ConfigError):
        parse_config_text("experiment = baseline\nm = 0\nn = 0\n")
    assert flat["experiment"] == "baseline"


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("causal", [False, True])
@pytest.mark.parametrize("desk", [False, True])
def test_format_parse_round_trip(kind, causal, desk):
    c = preset(kind, causal, desk).with_overrides(seed=12, convergence_mse=1e-4)
    assert parse_config_text(format_config(c)) == c
    assert format_config(parse_config_text(format_config(c))) == format_config(c)


def test_comments_and_defaults():
    text = """# a comment
experiment = large_time   # trailing
t_max = 4*pi
seed = 3
"""
    c = parse_config_text(text)
    assert c.domain.t_max == 4 * math.pi and c.seed == 3 and c.network.seed == 3
    assert c.network.hidden_width == 512


@pytest.mark.parametrize("text, line, fragment", [
    ("experiment = baseline\nbogus = 1\n", 2, "unknown key"),
    ("experiment = baseline\nseed = 1\nseed = 2\n", 3, "duplicate"),
    ("experiment = baseline\n\nhidden_width = wide\n", 3, "bad value"),
    ("experiment = baseline\ncausal = maybe\n", 2, "bad value"),
    ("experiment = baseline\njust words\n", 2, "expected 'key = value'"),
    ("experiment = nonsense\n", 1, "unknown experiment"),
])
def test_line_precise_errors(text, line, fragment):
    with pytest.raises(ConfigError, match=rf"^cfg:{line}: .*{fragment}"):
        parse_config_text(text, source="cfg")


def test_missing_experiment():
    with pytest.raises(ConfigError, match="missing required key 'experiment'"):
        parse_config_text("seed = 1\n", source="cfg")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="nope.cfg"):
        load_config(tmp_path / "nope.cfg")


def test_shipped_presets_parse():
    names = sorted(p.stem for p in preset_path("x").parent.glob("*.cfg"))
    for kind in ("baseline", "generalisability", "large_time", "high_energy"):
        assert kind in names and f"{kind}_desk" in names
    for name in names:
        c = load_config(preset_path(name))
        assert isinstance(c, ExperimentConfig)
    base = load_config(preset_path("baseline"))
    assert (base.network.hidden_layers, base.network.hidden_width) == (6, 512)
    assert (base.sampler.n_interior, base.sampler.n_boundary, base.sampler.n_initial) == (3140, 200, 314)
