"""Harmonic-oscillator physics: analytical states, the TDSE residual and a
Crank-Nicolson reference solver.

Hartree atomic units throughout (hbar = m = 1). The Hamiltonian is
H = -1/2 d2/dx2 + omega^2 x^2 / 2.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from ._backend import kernels
from .errors import ConfigError, NumericalError

HERMITE_MAX_ORDER = 30


@dataclass(frozen=True)
class OscillatorState:
    """Equal-weight superposition of eigenstates ``m`` and ``n`` at frequency ``omega``."""

    m: int = 0
    n: int = 1
    omega: float = 1.0

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ConfigError("state indices must be non-negative")
        if self.m == self.n:
            raise ConfigError(f"superposition needs two distinct states, got m = n = {self.m}")
        if not self.omega > 0:
            raise ConfigError(f"omega must be positive, got {self.omega}")

    def with_omega(self, omega: float) -> "OscillatorState":
        return OscillatorState(self.m, self.n, omega)


@dataclass(frozen=True)
class Domain:
    x_min: float = -math.pi
    x_max: float = math.pi
    t_min: float = 0.0
    t_max: float = 2 * math.pi

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.t_min < self.t_max):
            raise ConfigError(f"degenerate domain {self}")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def duration(self) -> float:
        return self.t_max - self.t_min


def grid_count(extent: float, step: float) -> int:
    """Number of grid nodes ``x0 + i*step`` with ``i*step < extent`` (truncating)."""
    if step <= 0:
        raise ConfigError("grid spacing must be positive")
    return int(math.floor(extent / step + 1e-9))


def hermite(n: int, y):
    """Physicists' Hermite polynomial H_n(y) by the three-term recurrence."""
    if n < 0 or n > HERMITE_MAX_ORDER:
        raise ConfigError(f"Hermite order must be in [0, {HERMITE_MAX_ORDER}], got {n}")
    y = np.asarray(y, dtype=np.float64)
    h_prev = np.ones_like(y)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * y
    for k in range(1, n):
        h_prev, h = h, 2.0 * y * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def _norm(n, omega):
    return (omega / math.pi) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))


def eigenstate(n: int, omega: float, x):
    """Normalised eigenfunction phi_n(x)."""
    if not omega > 0:
        raise ConfigError("omega must be positive")
    x = np.asarray(x, dtype=np.float64)
    y = math.sqrt(omega) * x
    return _norm(n, omega) * np.exp(-0.5 * y * y) * hermite(n, y)


def eigenstate_d2(n: int, omega: float, x):
    """Second x-derivative of phi_n, from Hermite derivative identities.

    Uses H_n' = 2n H_{n-1}, so it does not rely on the eigenvalue equation.
    """
    x = np.asarray(x, dtype=np.float64)
    y = math.sqrt(omega) * x
    h = hermite(n, y)
    h1 = 2 * n * hermite(n - 1, y) if n >= 1 else 0.0
    h2 = 4 * n * (n - 1) * hermite(n - 2, y) if n >= 2 else 0.0
    return omega * _norm(n, omega) * np.exp(-0.5 * y * y) * (h2 - 2 * y * h1 + (y * y - 1) * h)


def eigenvalue(n: int, omega: float) -> float:
    if not omega > 0:
        raise ConfigError("omega must be positive")
    return omega * (n + 0.5)


def superposition(state: OscillatorState, x, t):
    """Real and imaginary parts of [e^{-i e_m t} phi_m + e^{-i e_n t} phi_n] / sqrt(2)."""
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    u = np.zeros(np.broadcast(x, t).shape)
    v = np.zeros_like(u)
    for k in (state.m, state.n):
        e = eigenvalue(k, state.omega)
        phi = eigenstate(k, state.omega, x)
        u = u + np.cos(e * t) * phi
        v = v - np.sin(e * t) * phi
    return u / math.sqrt(2.0), v / math.sqrt(2.0)


def superposition_omega(m: int, n: int, x, t, omega):
    """Vectorised over per-point ``omega`` (used for omega-conditioned batches)."""
    x, t, omega = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in (x, t, omega)))
    u = np.empty(x.shape)
    v = np.empty(x.shape)
    for w in np.unique(omega):
        sel = omega == w
        u[sel], v[sel] = superposition(OscillatorState(m, n, float(w)), x[sel], t[sel])
    return u, v


def exact_bundle(state: OscillatorState, x, t):
    """Closed-form (u, v, u_t, v_t, u_xx, v_xx) of the superposition."""
    from .autodiff import DerivativeBundle

    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    fields = {k: np.zeros(np.broadcast(x, t).shape) for k in ("u", "v", "u_t", "v_t", "u_xx", "v_xx")}
    s = 1.0 / math.sqrt(2.0)
    for k in (state.m, state.n):
        e = eigenvalue(k, state.omega)
        phi = eigenstate(k, state.omega, x)
        phi2 = eigenstate_d2(k, state.omega, x)
        c, sn = np.cos(e * t), np.sin(e * t)
        fields["u"] += s * c * phi
        fields["v"] -= s * sn * phi
        fields["u_t"] -= s * e * sn * phi
        fields["v_t"] -= s * e * c * phi
        fields["u_xx"] += s * c * phi2
        fields["v_xx"] -= s * sn * phi2
    return DerivativeBundle(**fields)


def tdse_residual(bundle, omega, x):
    """Real and imaginary parts of i phi_t - H phi for phi = u + i v.

    The potential term multiplies u in the real part and v in the imaginary part.
    """
    x = np.asarray(x, dtype=np.float64)
    pot = 0.5 * np.asarray(omega, dtype=np.float64) ** 2 * x * x
    f_r = -bundle.v_t + 0.5 * bundle.u_xx - pot * bundle.u
    f_i = bundle.u_t + 0.5 * bundle.v_xx - pot * bundle.v
    return f_r, f_i


# -- wave fields ---------------------------------------------------------------

WAVEFIELD_MAGIC = b"TDSEWAVE"
WAVEFIELD_VERSION = 1
_WF_HEADER = struct.Struct("<8sIQQdddd")


@dataclass
class WaveField:
    """Complex field samples on a uniform grid; arrays are ``(nt, nx)``."""

    x0: float
    t0: float
    dx: float
    dt: float
    u: np.ndarray
    v: np.ndarray

    @property
    def nt(self) -> int:
        return self.u.shape[0]

    @property
    def nx(self) -> int:
        return self.u.shape[1]

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.nt)

    @property
    def density(self) -> np.ndarray:
        return self.u * self.u + self.v * self.v

    def norms(self) -> np.ndarray:
        """Trapezoid integral of the density over x, one value per time row."""
        return trapezoid(self.density, dx=self.dx, axis=1)

    def to_csv(self, path) -> None:
        """Write ``x,t,u,v,density`` rows, time-major."""
        tt, xx = np.meshgrid(self.t, self.x, indexing="ij")
        rows = np.column_stack(
            [xx.ravel(), tt.ravel(), self.u.ravel(), self.v.ravel(), self.density.ravel()]
        )
        np.savetxt(path, rows, delimiter=",", header="x,t,u,v,density", comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path) -> "WaveField":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        t_vals = np.unique(data[:, 1])
        nt = len(t_vals)
        nx = data.shape[0] // nt
        x = data[:nx, 0]
        dx = float(x[1] - x[0]) if nx > 1 else 0.0
        dt = float(t_vals[1] - t_vals[0]) if nt > 1 else 0.0
        return cls(float(x[0]), float(t_vals[0]), dx, dt,
                   data[:, 2].reshape(nt, nx), data[:, 3].reshape(nt, nx))

    def to_bytes(self) -> bytes:
        header = _WF_HEADER.pack(WAVEFIELD_MAGIC, WAVEFIELD_VERSION, self.nx, self.nt,
                                 self.x0, self.t0, self.dx, self.dt)
        return (header + self.u.astype("<f8").tobytes() + self.v.astype("<f8").tobytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "WaveField":
        magic, version, nx, nt, x0, t0, dx, dt = _WF_HEADER.unpack_from(data, 0)
        if magic != WAVEFIELD_MAGIC or version != WAVEFIELD_VERSION:
            raise ValueError("not a wave-field file")
        size = nx * nt
        if len(data) != _WF_HEADER.size + 16 * size:
            raise ValueError("wave-field payload size mismatch")
        arr = np.frombuffer(data, dtype="<f8", offset=_WF_HEADER.size).astype(np.float64)
        return cls(x0, t0, dx, dt, arr[:size].reshape(nt, nx), arr[size:].reshape(nt, nx))


def analytical_field(state: OscillatorState, domain: Domain, dx: float, dt: float) -> WaveField:
    nx = grid_count(domain.length, dx)
    nt = grid_count(domain.duration, dt)
    x = domain.x_min + dx * np.arange(nx)
    t = domain.t_min + dt * np.arange(nt)
    u, v = superposition(state, x[None, :], t[:, None])
    return WaveField(domain.x_min, domain.t_min, dx, dt, u, v)


def crank_nicolson_evolve(u0, v0, omega: float, domain: Domain, dx: float, dt: float) -> WaveField:
    """Evolve ``u0 + i v0`` (sampled at ``x_min + i*dx``) with Crank-Nicolson.

    Zero Dirichlet walls sit at ``x_min`` and at ``x_min + nx*dx``, the first
    grid line at or beyond the end of the sampled grid (equal to ``x_max``
    when ``dx`` divides the domain). Returns ``nt`` rows at ``t_min + k*dt``.
    """
    if dx <= 0 or dt <= 0:
        raise ConfigError("dx and dt must be positive")
    psi0 = np.asarray(u0, dtype=np.float64) + 1j * np.asarray(v0, dtype=np.float64)
    if psi0.ndim != 1 or psi0.shape[0] < 3:
        raise ConfigError("need a 1D initial state with at least three nodes")
    return _cn_padded(psi0, 0, 0, omega, domain, dx, dt)


def _cn_padded(psi0, left, right, omega, domain, dx, dt):
    # psi0 covers the grid x_min - left*dx ... (x_min + nx*dx) + right*dx, exclusive
    # of the right wall; index ``left`` is x_min.
    nt = grid_count(domain.duration, dt)
    nx_full = psi0.shape[0]
    x = domain.x_min + dx * (np.arange(nx_full) - left)
    hdiag = 1.0 / dx**2 + 0.5 * omega**2 * x[1:] ** 2
    hoff = -0.5 / dx**2
    out = kernels.cn_propagate(psi0[1:], hdiag, hoff, dt, nt - 1)
    if not np.all(np.isfinite(out)):
        raise NumericalError("Crank-Nicolson solve produced non-finite values")
    psi = np.zeros((nt, nx_full), dtype=np.complex128)
    psi[:, 1:] = out
    nx = nx_full - left - right
    psi = psi[:, left : left + nx]
    return WaveField(domain.x_min, domain.t_min, dx, dt, psi.real.copy(), psi.imag.copy())


def crank_nicolson_state(
    state: OscillatorState, domain: Domain, dx: float, dt: float, margin: float = 0.0
) -> WaveField:
    """Crank-Nicolson evolution of the analytical initial superposition.

    With ``margin > 0`` the initial state is sampled on the widened box too,
    so the walls cut the Gaussian tail further out.
    """
    pad = int(round(margin / dx))
    nx = grid_count(domain.length, dx)
    x = domain.x_min + dx * (np.arange(nx + 2 * pad) - pad)
    u0, v0 = superposition(state, x, domain.t_min)
    psi0 = u0 + 1j * v0
    psi0[0] = 0.0
    return _cn_padded(psi0, pad, pad, state.omega, domain, dx, dt)


def discrete_norm(psi_u, psi_v, dx: float) -> float:
    """Discrete L2 norm sqrt(dx * sum |psi|^2) conserved by the Crank-Nicolson step."""
    return math.sqrt(dx * float(np.sum(np.asarray(psi_u) ** 2 + np.asarray(psi_v) ** 2)))
