import numpy as np
import pytest

from tdse_pinn import _kernels_py
from tdse_pinn.network import NetworkConfig, init

try:
    from tdse_pinn import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on build
    _compiled = None

BACKENDS = [pytest.param(_kernels_py, id="python")]
if _compiled is not None:
    BACKENDS.append(pytest.param(_compiled, id="compiled"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def random_params(seed, layers=2, width=8, activation="tanh", input_width=2, scale=1.0):
    """Small network with every entry (biases included) uniform in [-scale, scale]."""
    cfg = NetworkConfig(input_width, layers, width, activation, seed)
    p = init(cfg)
    rng = np.random.default_rng(seed + 1000)
    p.flat[:] = rng.uniform(-scale, scale, p.flat.size)
    return p


def random_points(seed, n, input_width=2):
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(-np.pi, np.pi, n), rng.uniform(0, 2 * np.pi, n)])
    if input_width == 3:
        pts = np.column_stack([pts, rng.uniform(0.75, 2.0, n)])
    return pts


# -- acceptance summary ------------------------------------------------------

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((name, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
