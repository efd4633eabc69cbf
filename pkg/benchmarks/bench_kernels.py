"""Compare the compiled kernels with the NumPy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat N]

Times the fused activation jet (forward and backward) at training-batch size,
one Crank-Nicolson sweep of the baseline grid, and one full training step
with each backend swapped in.
"""
import argparse
import importlib
import time

import numpy as np

from tdse_pinn import _kernels_py
from tdse_pinn.config import preset
from tdse_pinn.loss import PinnLoss
from tdse_pinn.network import init
from tdse_pinn.physics import Domain, OscillatorState, grid_count, superposition
from tdse_pinn.sampler import sample_boundary, sample_initial, sample_interior


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def jet_case(k):
    rng = np.random.default_rng(0)
    z = rng.normal(size=(4, 1024, 64))
    ga = rng.normal(size=z.shape)

    def run():
        _, d1, d2, d3 = k.jet_activation_forward(0, z)
        k.jet_activation_backward(ga, z, d1, d2, d3)

    return run


def cn_case(k, nsteps):
    dx = 0.01
    nx = grid_count(2 * np.pi, dx)
    x = -np.pi + dx * np.arange(nx)
    u, v = superposition(OscillatorState(), x, 0.0)
    psi = (u + 1j * v)[1:]
    hdiag = 1 / dx**2 + 0.5 * x[1:] ** 2
    return lambda: k.cn_propagate(psi, hdiag, -0.5 / dx**2, 0.01, nsteps)


def step_case(k):
    import tdse_pinn.autodiff as ad

    cfg = preset("baseline", desk=True)
    params = init(cfg.network)
    loss = PinnLoss(cfg.state, cfg.domain, cfg.weights, cfg.causal)
    batches = (sample_interior(cfg.sampler, cfg.domain), sample_boundary(cfg.sampler, cfg.domain),
               sample_initial(cfg.sampler, cfg.domain))

    def run():
        saved = ad.kernels
        ad.kernels = k
        try:
            loss.value_and_grad(params, *batches)
        finally:
            ad.kernels = saved

    return run


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--cn-steps", type=int, default=50,
                        help="time steps for the Crank-Nicolson case (pure Python is slow)")
    args = parser.parse_args()
    try:
        compiled = importlib.import_module("tdse_pinn._kernels")
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return
    cases = [
        ("activation jet fwd+bwd (4x1024x64)", jet_case),
        (f"Crank-Nicolson {args.cn_steps} steps x 627 nodes", lambda k: cn_case(k, args.cn_steps)),
        ("desk-scale loss + gradient step", step_case),
    ]
    print(f"{'case':44s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speed-up':>9s}")
    for name, make in cases:
        tp = best_of(make(_kernels_py), args.repeat) * 1e3
        tc = best_of(make(compiled), args.repeat) * 1e3
        print(f"{name:44s} {tp:12.2f} {tc:14.2f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
