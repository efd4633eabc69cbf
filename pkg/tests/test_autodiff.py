import numpy as np
import pytest

from tdse_pinn.autodiff import (
    DerivativeBundle,
    LossTerm,
    eval_with_input_derivatives,
    forward_jets,
    loss_parameter_gradient,
)
from tdse_pinn.errors import ConfigError, NumericalError
from tdse_pinn.loss import LossWeights, PinnLoss
from tdse_pinn.network import NetworkConfig, NetworkParams, forward, init
from tdse_pinn.physics import Domain, OscillatorState

from .conftest import random_params, random_points

FIELDS = ("u", "v", "u_t", "v_t", "u_xx", "v_xx")


def fd_bundle(params, pts, h=1e-4):
    """Central finite differences of the network outputs in x and t."""
    ex = np.zeros(pts.shape[1])
    ex[0] = h
    et = np.zeros(pts.shape[1])
    et[1] = h
    u0, v0 = forward(params, pts)
    up, vp = forward(params, pts + ex)
    um, vm = forward(params, pts - ex)
    utp, vtp = forward(params, pts + et)
    utm, vtm = forward(params, pts - et)
    return dict(
        u=u0, v=v0,
        u_t=(utp - utm) / (2 * h), v_t=(vtp - vtm) / (2 * h),
        u_xx=(up - 2 * u0 + um) / h**2, v_xx=(vp - 2 * v0 + vm) / h**2,
    )


def rel_err(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def l_f_loss(params, pts):
    """16-point residual loss with the plain (non-causal) weighting."""
    loss = PinnLoss(OscillatorState(0, 1, 1.0), Domain(), LossWeights(1.0, 0.0, 0.0))
    empty = pts[:1]
    return loss.value_and_grad(params, pts, empty, empty)


def fd_gradient(params, f, h=1e-4):
    g = np.empty_like(params.flat)
    for k in range(params.flat.size):
        p = params.flat.copy()
        p[k] += h
        fp = f(params.with_flat(p))
        p[k] -= 2 * h
        fm = f(params.with_flat(p))
        g[k] = (fp - fm) / (2 * h)
    return g


@pytest.mark.parametrize("seed", range(4))
def test_two_layer_tanh_input_derivatives(seed):
    params = random_params(seed, layers=2, width=8)
    pts = random_points(seed, 25)
    got = eval_with_input_derivatives(params, pts)
    ref = fd_bundle(params, pts)
    for name in FIELDS:
        assert rel_err(getattr(got, name), ref[name]) < 1e-5, name


@pytest.mark.parametrize("activation", ["tanh", "silu"])
def test_omega_conditioned_derivatives(activation):
    params = random_params(3, layers=3, width=6, activation=activation, input_width=3)
    pts = random_points(3, 10, input_width=3)
    got = eval_with_input_derivatives(params, pts)
    ref = fd_bundle(params, pts)
    for name in FIELDS:
        assert rel_err(getattr(got, name), ref[name]) < 1e-5, name


def test_zero_output_weights_give_zero_bundle():
    params = random_params(1, layers=3, width=5)
    params.weights[-1][...] = 0.0
    params.biases[-1][...] = 0.0
    b = eval_with_input_derivatives(params, random_points(0, 7))
    assert np.all(b.as_array() == 0.0)


def test_linear_network_has_zero_second_derivative():
    # u = w . (x, t) with a single linear hidden unit feeding only u
    cfg = NetworkConfig(2, 1, 1, "linear")
    w = 1.7
    flat = np.array([w, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    b = eval_with_input_derivatives(NetworkParams(cfg, flat), random_points(2, 9))
    assert np.all(b.u_t == 0.0) and np.all(b.u_xx == 0.0)


def test_one_parameter_chain_rule():
    # u = theta * x via linear unit h = x, u = theta * h; loss = u(2, 0)^2
    cfg = NetworkConfig(2, 1, 1, "linear")
    theta = 3.0
    params = NetworkParams(cfg, np.array([1.0, 0.0, 0.0, theta, 0.0, 0.0, 0.0]))

    def fn(bundle):
        z = np.zeros(1)
        return float(bundle.u[0] ** 2), DerivativeBundle(2 * bundle.u, z, z, z, z, z)

    value, grad = loss_parameter_gradient(params, [LossTerm(np.array([[2.0, 0.0]]), fn, False)])
    assert value == 36.0
    assert grad[3] == 24.0  # d/d theta = 2 (theta x) x


def test_v_bias_untouched_by_u_loss():
    params = random_params(4, layers=2, width=6)
    params.weights[-1][...] = 0.0

    def fn(bundle):
        z = np.zeros(len(bundle))
        return float(np.sum(bundle.u**2)), DerivativeBundle(2 * bundle.u, z, z, z, z, z)

    _, grad = loss_parameter_gradient(params, [LossTerm(random_points(4, 12), fn)])
    gv = grad[-1:]  # last flat entry is the v output bias
    assert gv[0] == 0.0


@pytest.mark.parametrize("activation", ["tanh", "silu"])
def test_residual_loss_gradient_vs_finite_differences(activation):
    params = random_params(6, layers=2, width=5, activation=activation)
    pts = random_points(6, 16)
    _, grad = l_f_loss(params, pts)
    fd = fd_gradient(params, lambda p: l_f_loss(p, pts)[0].total)
    assert rel_err(grad, fd) < 1e-4


def test_gradient_independent_of_batch_order():
    params = random_params(7, layers=3, width=8)
    pts = random_points(7, 40)
    perm = np.random.default_rng(0).permutation(40)
    _, g1 = l_f_loss(params, pts)
    _, g2 = l_f_loss(params, pts[perm])
    np.testing.assert_allclose(g1, g2, rtol=1e-12, atol=1e-14)


def _block_network(p1, p2, a, b):
    """One network computing a*net1 + b*net2 via block-diagonal hidden layers."""
    c1, c2 = p1.config, p2.config
    cfg = NetworkConfig(2, c1.hidden_layers, c1.hidden_width + c2.hidden_width, c1.activation)
    out = init(cfg)
    out.flat[:] = 0.0
    w1, w2 = c1.hidden_width, c2.hidden_width
    for k in range(cfg.hidden_layers + 1):
        W, B = out.weights[k], out.biases[k]
        if k == 0:
            W[:, :w1] = p1.weights[0]
            W[:, w1:] = p2.weights[0]
            B[:w1], B[w1:] = p1.biases[0], p2.biases[0]
        elif k < cfg.hidden_layers:
            W[:w1, :w1] = p1.weights[k]
            W[w1:, w1:] = p2.weights[k]
            B[:w1], B[w1:] = p1.biases[k], p2.biases[k]
        else:
            W[:w1] = a * p1.weights[k]
            W[w1:] = b * p2.weights[k]
            B[:] = a * p1.biases[k] + b * p2.biases[k]
    return out


def test_linearity_of_block_network():
    p1 = random_params(8, layers=2, width=4)
    p2 = random_params(9, layers=2, width=6)
    a, b = 0.7, -1.3
    pts = random_points(8, 30)
    combined = eval_with_input_derivatives(_block_network(p1, p2, a, b), pts).as_array()
    ref = (a * eval_with_input_derivatives(p1, pts).as_array()
           + b * eval_with_input_derivatives(p2, pts).as_array())
    np.testing.assert_allclose(combined, ref, rtol=1e-12, atol=1e-12)


def test_non_finite_point_reports_index():
    params = random_params(10)
    pts = random_points(10, 6)
    pts[3, 0] = np.nan
    with pytest.raises(NumericalError) as info:
        forward_jets(params, pts)
    assert info.value.index == 3


def test_arity_mismatch_is_config_error():
    params = random_params(11, input_width=3)
    with pytest.raises(ConfigError):
        eval_with_input_derivatives(params, random_points(0, 4))


def test_bundle_slicing():
    b = DerivativeBundle.zeros(5)
    assert len(b) == 5 and len(b[1:3]) == 2
    assert b.as_array().shape == (6, 5)
