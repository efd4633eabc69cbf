"""Input derivatives of the network and parameter gradients of losses built on them.

The forward pass propagates a second-order jet through the network: for every
layer activation we carry the value and its derivatives d/dx, d2/dx2 and d/dt
with respect to the network inputs, stacked as channels of one array so each
affine layer is a single matrix product. The reverse pass is written by hand
for that jet arithmetic, which gives exact gradients of losses that contain
u_xx (third-order mixed derivatives: twice in x, once in the parameters).
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable, Sequence

import numpy as np

from ._backend import kernels
from .errors import NumericalError
from .network import NetworkParams, check_points

VALUE, DX, DXX, DT = range(4)


@dataclass
class DerivativeBundle:
    """Per-point u, v and the input derivatives entering the TDSE residual."""

    u: np.ndarray
    v: np.ndarray
    u_t: np.ndarray
    v_t: np.ndarray
    u_xx: np.ndarray
    v_xx: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "DerivativeBundle":
        return cls(*(np.zeros(n) for _ in range(6)))

    def __len__(self):
        return len(self.u)

    def __getitem__(self, idx) -> "DerivativeBundle":
        return DerivativeBundle(*(getattr(self, f.name)[idx] for f in fields(self)))

    def as_array(self) -> np.ndarray:
        return np.stack([getattr(self, f.name) for f in fields(self)])


@dataclass
class JetTape:
    """Forward record of one batch; ``backward`` turns output cotangents into a gradient."""

    params: NetworkParams
    channels: int
    inputs: list  # jet entering each layer
    pre: list  # pre-activation jets of hidden layers
    d1: list
    d2: list
    d3: list
    out: np.ndarray  # (channels, N, 2)

    @property
    def values(self) -> tuple[np.ndarray, np.ndarray]:
        return self.out[VALUE, :, 0], self.out[VALUE, :, 1]

    def bundle(self) -> DerivativeBundle:
        if self.channels != 4:
            raise ValueError("tape was recorded without input derivatives")
        o = self.out
        return DerivativeBundle(
            u=o[VALUE, :, 0], v=o[VALUE, :, 1],
            u_t=o[DT, :, 0], v_t=o[DT, :, 1],
            u_xx=o[DXX, :, 0], v_xx=o[DXX, :, 1],
        )

    def backward(self, cot: DerivativeBundle) -> np.ndarray:
        """Vector-Jacobian product of the recorded outputs with ``cot``.

        For value-only tapes just ``cot.u`` and ``cot.v`` are read.
        """
        n = self.out.shape[1]
        g = np.zeros((self.channels, n, 2))
        g[VALUE, :, 0] = cot.u
        g[VALUE, :, 1] = cot.v
        if self.channels == 4:
            g[DT, :, 0] = cot.u_t
            g[DT, :, 1] = cot.v_t
            g[DXX, :, 0] = cot.u_xx
            g[DXX, :, 1] = cot.v_xx
        return self._backprop(g)

    def _backprop(self, g: np.ndarray) -> np.ndarray:
        p = self.params
        grad = np.zeros_like(p.flat)
        gw, gb = _grad_views(p, grad)
        for layer in range(p.n_layers - 1, -1, -1):
            a = self.inputs[layer]
            fan_in = a.shape[-1]
            fan_out = g.shape[-1]
            gw[layer][...] = a.reshape(-1, fan_in).T @ g.reshape(-1, fan_out)
            gb[layer][...] = g[VALUE].sum(axis=0)
            if layer == 0:
                break
            ga = g @ p.weights[layer].T
            k = layer - 1
            g = kernels.jet_activation_backward(ga, self.pre[k], self.d1[k], self.d2[k], self.d3[k])
        return grad


def _grad_views(params, grad):
    ws, bs = [], []
    off = 0
    for w in params.weights:
        fan_in, fan_out = w.shape
        ws.append(grad[off : off + fan_in * fan_out].reshape(fan_in, fan_out))
        off += fan_in * fan_out
        bs.append(grad[off : off + fan_out])
        off += fan_out
    return ws, bs


def input_jet(points: np.ndarray, derivatives: bool = True) -> np.ndarray:
    """Seed jet for raw inputs: column 0 is x, column 1 is t, column 2 (if any) is omega."""
    n, d = points.shape
    if not derivatives:
        return points[None].copy()
    jet = np.zeros((4, n, d))
    jet[VALUE] = points
    jet[DX, :, 0] = 1.0
    jet[DT, :, 1] = 1.0
    return jet


def forward_jets(params: NetworkParams, points, derivatives: bool = True) -> JetTape:
    """Run the network on ``points`` recording everything ``backward`` needs."""
    pts = check_points(params, points)
    kind = params.config.activation_kind
    h = input_jet(pts, derivatives)
    c = h.shape[0]
    inputs, pre, d1s, d2s, d3s = [], [], [], [], []
    last = params.n_layers - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(h)
        z = h @ w
        z[VALUE] += b
        if i == last:
            h = z
            break
        a, d1, d2, d3 = kernels.jet_activation_forward(kind, z)
        pre.append(z)
        d1s.append(d1)
        d2s.append(d2)
        d3s.append(d3)
        h = a
    finite = np.isfinite(h).all(axis=(0, 2))
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise NumericalError(f"non-finite network output at point index {bad}", index=bad)
    return JetTape(params, c, inputs, pre, d1s, d2s, d3s, h)


def eval_with_input_derivatives(params: NetworkParams, points) -> DerivativeBundle:
    """u, v, u_t, v_t, u_xx, v_xx of the network at each point, parameters held fixed."""
    return forward_jets(params, points, derivatives=True).bundle()


@dataclass
class LossTerm:
    """One batch contribution to a scalar loss.

    ``fn`` receives the recorded outputs (a :class:`DerivativeBundle`; for
    value-only terms the derivative fields are zero) and returns the term's
    value together with d(value)/d(bundle) as a bundle of cotangents.
    """

    points: np.ndarray
    fn: Callable[[DerivativeBundle], tuple[float, DerivativeBundle]]
    derivatives: bool = True


def loss_parameter_gradient(
    params: NetworkParams, terms: Sequence[LossTerm]
) -> tuple[float, np.ndarray]:
    """Value and parameter gradient of ``sum(term.fn(...) for term in terms)``.

    Raises :class:`NumericalError` (with the offending point index) on
    non-finite intermediates.
    """
    total = 0.0
    grad = np.zeros_like(params.flat)
    for term in terms:
        tape = forward_jets(params, term.points, term.derivatives)
        if term.derivatives:
            bundle = tape.bundle()
        else:
            u, v = tape.values
            zero = np.zeros_like(u)
            bundle = DerivativeBundle(u, v, zero, zero, zero, zero)
        value, cot = term.fn(bundle)
        total += float(value)
        grad += tape.backward(cot)
    if not np.isfinite(total) or not np.all(np.isfinite(grad)):
        raise NumericalError("non-finite loss or gradient")
    return total, grad
