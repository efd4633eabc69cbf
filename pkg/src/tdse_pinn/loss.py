"""PINN loss terms: PDE residual, boundary, initial condition, and the causal
time-weighted variant of the residual loss.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import DerivativeBundle, LossTerm, loss_parameter_gradient
from .errors import ConfigError
from .physics import Domain, OscillatorState, superposition_omega, tdse_residual


@dataclass(frozen=True)
class LossWeights:
    f: float = 1.0
    bc: float = 1.0
    ic: float = 1.0

    def __post_init__(self):
        w = (self.f, self.bc, self.ic)
        if min(w) < 0 or max(w) <= 0:
            raise ConfigError(f"loss weights must be >= 0 with at least one > 0, got {w}")


@dataclass(frozen=True)
class CausalConfig:
    enabled: bool = False
    n_slices: int = 20
    eps: float = 1.0

    def __post_init__(self):
        if self.n_slices < 1 or (self.enabled and self.n_slices < 2):
            raise ConfigError("causal training needs n_slices >= 2")
        if not self.eps > 0:
            raise ConfigError("causal eps must be positive")


@dataclass
class LossBreakdown:
    L_f: float
    L_BC: float
    L_IC: float
    per_slice_Lf: np.ndarray
    causal_weights: np.ndarray
    total: float

    @property
    def min_causal_weight(self) -> float:
        return float(self.causal_weights.min()) if self.causal_weights.size else 1.0

    def as_dict(self) -> dict:
        return {
            "L_f": self.L_f,
            "L_BC": self.L_BC,
            "L_IC": self.L_IC,
            "total": self.total,
            "min_causal_weight": self.min_causal_weight,
        }


def point_omega(points: np.ndarray, omega: float) -> np.ndarray | float:
    """Per-point omega from the third input column, else the fixed value."""
    return points[:, 2] if points.shape[1] == 3 else omega


def pde_loss(bundle: DerivativeBundle, x, omega) -> float:
    """Mean squared modulus of the TDSE residual."""
    if len(bundle) == 0:
        raise ConfigError("empty batch")
    f_r, f_i = tdse_residual(bundle, omega, x)
    return float(np.mean(f_r * f_r + f_i * f_i))


def bc_loss(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return float(np.mean(u * u + v * v))


def ic_target(points: np.ndarray, state: OscillatorState):
    omega = point_omega(points, state.omega)
    return superposition_omega(state.m, state.n, points[:, 0], points[:, 1], omega)


def ic_loss(u, v, points: np.ndarray, state: OscillatorState) -> float:
    """Mean of (u - Re phi)^2 + (v - Im phi)^2 against the initial superposition."""
    ut, vt = ic_target(points, state)
    du = np.asarray(u) - ut
    dv = np.asarray(v) - vt
    return float(np.mean(du * du + dv * dv))


def slice_index(t, domain: Domain, n_slices: int) -> np.ndarray:
    """Slice of each time: half-open ``[t_i, t_{i+1})``, the last slice closed."""
    frac = (np.asarray(t, dtype=np.float64) - domain.t_min) / domain.duration
    return np.clip(np.floor(frac * n_slices).astype(np.int64), 0, n_slices - 1)


def per_slice_losses(sq_residual, slices, n_slices: int) -> np.ndarray:
    """Per-slice residual losses whose average equals the plain batch mean.

    Each slice's sum is scaled by ``n_slices / N``; an empty slice yields 0.
    """
    sq = np.asarray(sq_residual, dtype=np.float64)
    sums = np.bincount(slices, weights=sq, minlength=n_slices)
    return sums * (n_slices / sq.shape[0])


def causal_weights(per_slice, eps: float) -> np.ndarray:
    """w_0 = 1, w_i = exp(-eps * sum_{j<i} L_j)."""
    per_slice = np.asarray(per_slice, dtype=np.float64)
    cum = np.concatenate([[0.0], np.cumsum(per_slice)[:-1]])
    return np.exp(-eps * cum)


def composite(L_f: float, L_BC: float, L_IC: float, weights: LossWeights) -> LossBreakdown:
    total = weights.f * L_f + weights.bc * L_BC + weights.ic * L_IC
    return LossBreakdown(L_f, L_BC, L_IC, np.array([L_f]), np.ones(1), total)


def causal_composite(per_slice_Lf, L_BC: float, L_IC: float, weights: LossWeights,
                     causal: CausalConfig) -> LossBreakdown:
    per_slice_Lf = np.asarray(per_slice_Lf, dtype=np.float64)
    if per_slice_Lf.shape != (causal.n_slices,):
        raise ConfigError(
            f"expected {causal.n_slices} slice losses, got {per_slice_Lf.shape[0]}"
        )
    w = causal_weights(per_slice_Lf, causal.eps)
    L_f = float(np.mean(w * per_slice_Lf))
    total = weights.f * L_f + weights.bc * L_BC + weights.ic * L_IC
    return LossBreakdown(L_f, L_BC, L_IC, per_slice_Lf, w, total)


def _residual_cotangent(bundle, f_r, f_i, pot, coef):
    gr = 2.0 * coef * f_r
    gi = 2.0 * coef * f_i
    return DerivativeBundle(
        u=-pot * gr, v=-pot * gi,
        u_t=gi, v_t=-gr,
        u_xx=0.5 * gr, v_xx=0.5 * gi,
    )


@dataclass
class PinnLoss:
    """The composite training loss for one oscillator problem.

    ``value_and_grad`` evaluates all three terms on the given batches and
    returns the :class:`LossBreakdown` plus the flat parameter gradient of
    ``breakdown.total``. Causal weights are treated as constants.
    """

    state: OscillatorState
    domain: Domain
    weights: LossWeights = LossWeights()
    causal: CausalConfig = CausalConfig()

    def value_and_grad(self, params, interior, boundary, initial):
        parts = {}
        lam = self.weights
        causal = self.causal

        def residual_term(bundle):
            x = interior[:, 0]
            omega = point_omega(interior, self.state.omega)
            pot = 0.5 * np.asarray(omega) ** 2 * x * x
            f_r, f_i = tdse_residual(bundle, omega, x)
            sq = f_r * f_r + f_i * f_i
            n = sq.shape[0]
            if causal.enabled:
                idx = slice_index(interior[:, 1], self.domain, causal.n_slices)
                slices = per_slice_losses(sq, idx, causal.n_slices)
                w = causal_weights(slices, causal.eps)
                coef = lam.f * w[idx] / n
                parts["slices"] = slices
            else:
                coef = np.full(n, lam.f / n)
                parts["L_f"] = float(np.mean(sq))
            return float(np.sum(coef * sq)), _residual_cotangent(bundle, f_r, f_i, pot, coef)

        def boundary_term(bundle):
            n = len(bundle)
            parts["L_BC"] = bc_loss(bundle.u, bundle.v)
            c = 2.0 * lam.bc / n
            z = np.zeros(n)
            return lam.bc * parts["L_BC"], DerivativeBundle(c * bundle.u, c * bundle.v, z, z, z, z)

        def initial_term(bundle):
            n = len(bundle)
            ut, vt = ic_target(initial, self.state)
            du, dv = bundle.u - ut, bundle.v - vt
            parts["L_IC"] = float(np.mean(du * du + dv * dv))
            c = 2.0 * lam.ic / n
            z = np.zeros(n)
            return lam.ic * parts["L_IC"], DerivativeBundle(c * du, c * dv, z, z, z, z)

        terms = [
            LossTerm(interior, residual_term, derivatives=True),
            LossTerm(boundary, boundary_term, derivatives=False),
            LossTerm(initial, initial_term, derivatives=False),
        ]
        _, grad = loss_parameter_gradient(params, terms)
        if causal.enabled:
            breakdown = causal_composite(parts["slices"], parts["L_BC"], parts["L_IC"], lam, causal)
        else:
            breakdown = composite(parts["L_f"], parts["L_BC"], parts["L_IC"], lam)
        return breakdown, grad
