"""Fully-connected surrogate mapping (x, t[, omega]) to (u, v).

Parameters live in one flat float64 vector; per-layer weight matrices and
bias vectors are views into it. The flat order is layer by layer, weights
row-major (fan_in x fan_out) followed by the bias, which is also the
checkpoint order and the order of gradient vectors.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import CheckpointError, ConfigError

# "linear" exists for exactness checks of the derivative engine.
ACTIVATIONS = {"tanh": 0, "silu": 1, "linear": 2}
CHECKPOINT_MAGIC = b"TDSEPINN"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<8sIIIIIQ")


@dataclass(frozen=True)
class NetworkConfig:
    input_width: int = 2
    hidden_layers: int = 6
    hidden_width: int = 512
    activation: str = "tanh"
    seed: int = 0

    def __post_init__(self):
        if self.input_width not in (2, 3):
            raise ConfigError(f"input_width must be 2 or 3, got {self.input_width}")
        if self.hidden_layers < 1 or self.hidden_width < 1:
            raise ConfigError("hidden_layers and hidden_width must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(
                f"activation must be one of {sorted(ACTIVATIONS)}, got {self.activation!r}"
            )
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_width] + [self.hidden_width] * self.hidden_layers + [2]

    @property
    def activation_kind(self) -> int:
        return ACTIVATIONS[self.activation]

    @property
    def n_params(self) -> int:
        sizes = self.layer_sizes
        return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


@dataclass
class NetworkParams:
    config: NetworkConfig
    flat: np.ndarray
    weights: list[np.ndarray] = field(init=False, repr=False)
    biases: list[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        self.flat = np.ascontiguousarray(self.flat, dtype=np.float64)
        if self.flat.shape != (self.config.n_params,):
            raise ConfigError(
                f"expected {self.config.n_params} parameters, got {self.flat.shape}"
            )
        self.weights, self.biases = _views(self.config, self.flat)

    def with_flat(self, flat: np.ndarray) -> "NetworkParams":
        return NetworkParams(self.config, np.array(flat, dtype=np.float64))

    def copy(self) -> "NetworkParams":
        return self.with_flat(self.flat)

    @property
    def n_layers(self) -> int:
        return len(self.weights)


def _views(config, flat):
    weights, biases = [], []
    off = 0
    sizes = config.layer_sizes
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(flat[off : off + fan_in * fan_out].reshape(fan_in, fan_out))
        off += fan_in * fan_out
        biases.append(flat[off : off + fan_out])
        off += fan_out
    return weights, biases


def init(config: NetworkConfig) -> NetworkParams:
    """Glorot-uniform weights and zero biases, deterministic in ``config.seed``."""
    rng = np.random.default_rng(config.seed)
    params = NetworkParams(config, np.zeros(config.n_params))
    for w in params.weights:
        fan_in, fan_out = w.shape
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        w[...] = rng.uniform(-bound, bound, size=w.shape)
    return params


def check_points(params: NetworkParams, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.ndim != 2 or pts.shape[1] != params.config.input_width:
        raise ConfigError(
            f"network expects points of arity {params.config.input_width}, "
            f"got shape {np.shape(points)}"
        )
    if pts.shape[0] == 0:
        raise ConfigError("empty batch")
    return pts


def forward(params: NetworkParams, points) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``(u, v)`` for a batch of points of shape ``(N, input_width)``.

    A single point may be passed as a flat sequence; outputs are then
    length-1 arrays.
    """
    h = check_points(params, points)
    kind = params.config.activation_kind
    last = params.n_layers - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        if i == last:
            h = z
        else:
            h = kernels.activation_derivs(kind, z)[0]
    return h[:, 0].copy(), h[:, 1].copy()


def activation_value_and_derivatives(kind: str, z):
    """Return ``(sigma(z), sigma'(z), sigma''(z))`` for ``tanh``, ``silu`` or ``linear``."""
    if kind not in ACTIVATIONS:
        raise ConfigError(f"unknown activation {kind!r}")
    s, d1, d2, _ = kernels.activation_derivs(ACTIVATIONS[kind], np.asarray(z, dtype=np.float64))
    if np.ndim(z) == 0:
        return tuple(float(np.ravel(a)[0]) for a in (s, d1, d2))
    return s, d1, d2


@dataclass(frozen=True)
class InputScaling:
    """Affine map of raw ``(x, t)`` onto ``[-1, 1]`` used as a reparameterisation.

    Training can run on parameters ``theta'`` of a network that sees
    normalised inputs ``(x - c) / s``. :meth:`fold` turns them into the
    equivalent raw-input network (first-layer rows divided by ``s``, bias
    shifted), so checkpoints and evaluation never need to know about it.
    An omega column, if present, is left as is.
    """

    center: tuple[float, float]
    scale: tuple[float, float]

    @classmethod
    def for_domain(cls, domain) -> "InputScaling":
        return cls(
            (0.5 * (domain.x_min + domain.x_max), 0.5 * (domain.t_min + domain.t_max)),
            (0.5 * domain.length, 0.5 * domain.duration),
        )

    def fold(self, scaled: NetworkParams) -> NetworkParams:
        raw = scaled.copy()
        w, b = raw.weights[0], raw.biases[0]
        for i, (c, s) in enumerate(zip(self.center, self.scale)):
            b -= (c / s) * w[i]
            w[i] /= s
        return raw

    def unfold(self, raw: NetworkParams) -> NetworkParams:
        scaled = raw.copy()
        w, b = scaled.weights[0], scaled.biases[0]
        for i, (c, s) in enumerate(zip(self.center, self.scale)):
            b += c * w[i]
            w[i] *= s
        return scaled

    def pull_back(self, config: NetworkConfig, grad_raw: np.ndarray) -> np.ndarray:
        """Gradient with respect to the normalised-input parameters."""
        grad = np.array(grad_raw, dtype=np.float64)
        gw, gb = _views(config, grad)
        for i, (c, s) in enumerate(zip(self.center, self.scale)):
            gw[0][i] = gw[0][i] / s - (c / s) * gb[0]
        return grad


# -- checkpoints -------------------------------------------------------------

def checkpoint_bytes(params: NetworkParams) -> bytes:
    c = params.config
    header = _HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        c.input_width,
        c.hidden_layers,
        c.hidden_width,
        c.activation_kind,
        c.seed,
    )
    return (
        header
        + struct.pack("<Q", c.n_params)
        + params.flat.astype("<f8", copy=False).tobytes()
    )


def save_checkpoint(params: NetworkParams, path) -> None:
    """Write a checkpoint atomically (temp file, then rename)."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(checkpoint_bytes(params))
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_checkpoint(path) -> NetworkParams:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_checkpoint(data, source=os.fspath(path))


def parse_checkpoint(data: bytes, source: str = "<bytes>") -> NetworkParams:
    if len(data) < _HEADER.size + 8:
        raise CheckpointError(f"bad checkpoint {source}: truncated header")
    magic, version, iw, hl, hw, act, seed = _HEADER.unpack_from(data, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"bad checkpoint {source}: magic bytes {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"bad checkpoint {source}: unsupported version {version}")
    names = {v: k for k, v in ACTIVATIONS.items()}
    if act not in names:
        raise CheckpointError(f"bad checkpoint {source}: activation code {act}")
    try:
        config = NetworkConfig(iw, hl, hw, names[act], seed)
    except ConfigError as exc:
        raise CheckpointError(f"bad checkpoint {source}: {exc}") from None
    (count,) = struct.unpack_from("<Q", data, _HEADER.size)
    start = _HEADER.size + 8
    if count != config.n_params or len(data) != start + 8 * count:
        raise CheckpointError(
            f"bad checkpoint {source}: parameter count {count} does not match config"
        )
    flat = np.frombuffer(data, dtype="<f8", count=count, offset=start).astype(np.float64)
    if not np.all(np.isfinite(flat)):
        raise CheckpointError(f"bad checkpoint {source}: non-finite parameters")
    return NetworkParams(config, flat)
