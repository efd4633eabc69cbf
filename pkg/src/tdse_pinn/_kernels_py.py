"""Pure-Python/NumPy versions of the hot kernels.

Same signatures and semantics as the compiled ``_kernels`` extension; used
when the extension is unavailable or ``TDSE_PINN_PURE_PYTHON=1`` is set.

Jet arrays are laid out as ``(C, M)`` where ``C`` is 1 (value only) or 4
(value, d/dx, d2/dx2, d/dt) and ``M`` is the flattened batch*width axis.
"""
import numpy as np

TANH = 0
SILU = 1
LINEAR = 2


def activation_derivs(kind, z):
    """Return sigma(z) and its first three derivatives, elementwise."""
    z = np.asarray(z, dtype=np.float64)
    if kind == TANH:
        s = np.tanh(z)
        d1 = 1.0 - s * s
        d2 = -2.0 * s * d1
        d3 = -2.0 * (d1 * d1 + s * d2)
        return s, d1, d2, d3
    if kind == SILU:
        sig = 0.5 * (1.0 + np.tanh(0.5 * z))
        q = sig * (1.0 - sig)
        r = 1.0 - 2.0 * sig
        s = z * sig
        d1 = sig + z * q
        d2 = q * (2.0 + z * r)
        d3 = q * (r * (2.0 + z * r) + r - 2.0 * z * q)
        return s, d1, d2, d3
    if kind == LINEAR:
        one = np.ones_like(z)
        return z.copy(), one, np.zeros_like(z), np.zeros_like(z)
    raise ValueError(f"unknown activation kind {kind}")


def jet_activation_forward(kind, z):
    """Push a stacked jet through the activation.

    Returns ``(a, d1, d2, d3)``; the derivative arrays are cached for
    :func:`jet_activation_backward`.
    """
    s, d1, d2, d3 = activation_derivs(kind, z[0])
    a = np.empty_like(z)
    a[0] = s
    if z.shape[0] == 4:
        zx = z[1]
        a[1] = d1 * zx
        a[2] = d2 * zx * zx + d1 * z[2]
        a[3] = d1 * z[3]
    return a, d1, d2, d3


def jet_activation_backward(ga, z, d1, d2, d3):
    gz = np.empty_like(ga)
    if ga.shape[0] == 1:
        gz[0] = ga[0] * d1
        return gz
    zx = z[1]
    gax, gaxx, gat = ga[1], ga[2], ga[3]
    gz[0] = ga[0] * d1 + d2 * (gax * zx + gat * z[3]) + gaxx * (d3 * zx * zx + d2 * z[2])
    gz[1] = gax * d1 + 2.0 * gaxx * d2 * zx
    gz[2] = gaxx * d1
    gz[3] = gat * d1
    return gz


def cn_propagate(psi0, hdiag, hoff, dt, nsteps):
    """Crank-Nicolson propagation of a tridiagonal Hamiltonian.

    ``hdiag`` is the Hamiltonian diagonal on the interior nodes and ``hoff``
    the (constant, real) off-diagonal. Zero Dirichlet values are implied
    outside the interior. Returns an ``(nsteps + 1, M)`` complex array.
    """
    psi = [complex(p) for p in np.asarray(psi0, dtype=np.complex128)]
    m = len(psi)
    out = np.empty((nsteps + 1, m), dtype=np.complex128)
    out[0] = psi
    if nsteps == 0:
        return out
    half = 0.5j * dt
    lo = half * hoff  # off-diagonal of (I + i dt/2 H)
    diag_l = [1.0 + half * h for h in np.asarray(hdiag, dtype=np.float64)]
    diag_r = [1.0 - half * h for h in np.asarray(hdiag, dtype=np.float64)]
    # Thomas factorisation of the constant left-hand matrix.
    cp = [0j] * m
    inv = [0j] * m
    inv[0] = 1.0 / diag_l[0]
    cp[0] = lo * inv[0]
    for j in range(1, m):
        inv[j] = 1.0 / (diag_l[j] - lo * cp[j - 1])
        cp[j] = lo * inv[j]
    rhs = [0j] * m
    for k in range(1, nsteps + 1):
        prev = 0j
        for j in range(m):
            nxt = psi[j + 1] if j + 1 < m else 0j
            r = diag_r[j] * psi[j] - lo * (prev + nxt)
            prev = psi[j]
            rhs[j] = r
        y = (rhs[0]) * inv[0]
        rhs[0] = y
        for j in range(1, m):
            y = (rhs[j] - lo * y) * inv[j]
            rhs[j] = y
        psi[m - 1] = rhs[m - 1]
        for j in range(m - 2, -1, -1):
            psi[j] = rhs[j] - cp[j] * psi[j + 1]
        out[k] = psi
    return out
