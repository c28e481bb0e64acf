"""Brute-force truncated-Fock references.

These share no code with the covariance and mode-sum routines they are used
to check: states come from sparse diagonalization of the chain Hamiltonian
and amplitudes from direct time integration.
"""
import numpy as np
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .fock import chain_hamiltonian


def fock_ground_state(G, d):
    H, xs = chain_hamiltonian(G, d)
    if H.shape[0] <= 2000:
        w, v = np.linalg.eigh(H.toarray())
        return w[0], v[:, 0], H, xs
    w, v = spla.eigsh(H, k=1, which="SA", tol=1e-14, v0=np.ones(H.shape[0]))
    return w[0], v[:, 0], H, xs


def fock_entropy(G, d, n_left):
    """Von Neumann entropy (bits) of the first ``n_left`` sites of the ground state."""
    n = G.shape[0]
    _, g, _, _ = fock_ground_state(G, d)
    s = np.linalg.svd(g.reshape(d**n_left, d ** (n - n_left)), compute_uv=False)
    p = s**2
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log2(p)))


def dyson_amplitudes(G_vac, G_evol, probes, delta, T, d=12):
    """Lowest-order probe amplitudes by time integration in Fock space.

    Integrates, for the vacuum of ``G_vac`` evolving under ``G_evol``,
    ``y_k(t) = e^{-iHt} int_0^t e^{i delta s} x_k(s) |vac> ds`` together with
    the second-order time-ordered up-up vacuum amplitude. Returns
    ``(x_ab, norm_a, norm_b, overlap_ab, dyson_upup)`` with ``Omega = 1``.
    """
    _, vac, _, xs = fock_ground_state(G_vac, d)
    H, _ = chain_hamiltonian(G_evol, d, freqs=np.sqrt(np.diag(G_vac)))
    xa, xb = xs[probes[0] - 1], xs[probes[1] - 1]
    dim = vac.size

    def rhs(t, y):
        v, ya, yb, ya_c = (y[i * dim:(i + 1) * dim] for i in range(4))
        ph = np.exp(1j * delta * t)
        out = np.empty_like(y)
        out[:dim] = -1j * (H @ v)
        out[dim:2 * dim] = -1j * (H @ ya) + ph * (xa @ v)
        out[2 * dim:3 * dim] = -1j * (H @ yb) + ph * (xb @ v)
        out[3 * dim:4 * dim] = -1j * (H @ ya_c) + np.conj(ph) * (xa @ v)
        out[-1] = -ph * (np.vdot(v, xa @ yb) + np.vdot(v, xb @ ya))
        return out

    y0 = np.zeros(4 * dim + 1, dtype=complex)
    y0[:dim] = vac
    sol = solve_ivp(rhs, (0.0, T), y0, method="DOP853", rtol=1e-12, atol=1e-14)
    y = sol.y[:, -1]
    ya, yb, ya_c = (y[i * dim:(i + 1) * dim] for i in range(1, 4))
    return (
        complex(np.vdot(ya_c, yb)),
        float(np.linalg.norm(ya)),
        float(np.linalg.norm(yb)),
        complex(np.vdot(ya, yb)),
        complex(y[-1]),
    )
