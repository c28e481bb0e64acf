"""Truncated Fock-space operators for a few coupled oscillators."""
from __future__ import annotations

from functools import reduce as _fold

import numpy as np
import scipy.sparse as sp


def annihilation(d):
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)


def quadratures(d, freq):
    """Position and momentum of a unit-mass oscillator with local frequency ``freq``.

    ``x = (a + a^dag)/sqrt(2 freq)``, ``p = i sqrt(freq/2) (a^dag - a)``.
    """
    a = annihilation(d)
    x = (a + a.T) / np.sqrt(2.0 * freq)
    p = 1j * np.sqrt(freq / 2.0) * (a.T - a)
    return x, p


def _embed(op, site, dims):
    factors = [sp.identity(n, format="csr") for n in dims]
    factors[site] = sp.csr_matrix(op)
    return _fold(lambda A, B: sp.kron(A, B, format="csr"), factors)


def chain_hamiltonian(G, d, freqs=None):
    """Sparse ``sum_k p_k^2/2 + x.G.x/2`` on ``d`` levels per site.

    Each site uses its own local frequency (default ``sqrt(G_kk)``, which
    makes the on-site part diagonal). ``p_k^2`` and ``x_k^2`` are built from
    the ladder operators directly rather than squaring truncated matrices, so
    the top level is not distorted.
    """
    G = np.asarray(G, dtype=float)
    n = G.shape[0]
    if freqs is None:
        freqs = np.sqrt(np.diag(G))
    freqs = np.broadcast_to(np.asarray(freqs, dtype=float), (n,))
    dims = [d] * n
    a = annihilation(d)
    num = a.T @ a
    # exact truncations of (a + a^dag)^2 and -(a^dag - a)^2
    aa = a @ a
    sq_x = aa + aa.T + 2 * num + np.eye(d)
    sq_p = -(aa + aa.T) + 2 * num + np.eye(d)
    H = sp.csr_matrix((d**n, d**n))
    xs = []
    for k, w in enumerate(freqs):
        H = H + _embed(0.25 * w * sq_p + 0.5 * G[k, k] * sq_x / (2 * w), k, dims)
        xs.append(_embed((a + a.T) / np.sqrt(2 * w), k, dims))
    for j in range(n):
        for k in range(j + 1, n):
            if G[j, k] != 0.0:
                H = H + G[j, k] * (xs[j] @ xs[k])
    return H.tocsr(), xs
