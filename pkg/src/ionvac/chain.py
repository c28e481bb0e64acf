"""Equilibrium and normal modes of a linear ion chain.

Everything is dimensionless: axial trap frequency, ion mass and hbar are 1,
and lengths are measured in the Coulomb length (e^2 / 4 pi eps0 m nu^2)^(1/3).
In these units the potential is

    V(u) = 1/2 sum_m u_m^2 + sum_{n<m} 1 / |u_m - u_n|

and its Hessian at equilibrium is the coupling matrix ``G``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChainError",
    "NormalModes",
    "Chain",
    "solve_equilibrium",
    "force_residual",
    "coupling_matrix",
    "normal_modes",
    "truncated_coupling",
]


class ChainError(ValueError):
    """Invalid chain input or failed equilibrium solve."""


def force_residual(u):
    """Net dimensionless force on each ion at positions ``u``."""
    u = np.asarray(u, dtype=float)
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    return -u + np.sum(np.sign(diff) / diff**2, axis=1)


def solve_equilibrium(n_ions, *, tol=1e-12, max_iter=200):
    """Equilibrium positions of ``n_ions`` ions, ascending.

    Damped Newton iteration on the force balance, started from a uniformly
    spaced seed. The Jacobian of the force is ``-G``, so each step solves
    with the coupling matrix of the current iterate. Raises ChainError if the
    residual does not drop below ``tol``. For long chains ``tol`` is scaled
    up with ``N / d_min^2`` since summing the Coulomb forces hits a round-off
    floor there; up to N = 30 it is applied as given.
    """
    if int(n_ions) != n_ions or n_ions < 1:
        raise ChainError(f"n_ions must be a positive integer, got {n_ions!r}")
    n_ions = int(n_ions)
    if n_ions == 1:
        return np.zeros(1)

    # chain half-length grows roughly as N^0.56 in Coulomb units
    half = 0.75 * n_ions**0.56
    u = np.linspace(-half, half, n_ions)
    res = force_residual(u)
    norm = np.max(np.abs(res))
    for _ in range(max_iter):
        # keep polishing past tol until round-off stalls progress
        step = np.linalg.solve(coupling_matrix(u), res)
        t = 1.0
        while t > 1e-8:
            trial = u + t * step
            if np.all(np.diff(trial) > 0):
                trial_res = force_residual(trial)
                trial_norm = np.max(np.abs(trial_res))
                if trial_norm < norm:
                    break
            t *= 0.5
        else:
            break
        u, res, norm = trial, trial_res, trial_norm
    # symmetrize away round-off so reflection antisymmetry is exact
    u = 0.5 * (u - u[::-1])
    norm = np.max(np.abs(force_residual(u)))
    scale = max(1.0, 1e-3 * n_ions * np.min(np.diff(u)) ** -2)
    if norm >= tol * scale:
        raise ChainError(
            f"equilibrium did not converge for N={n_ions}: residual {norm:.3e}"
        )
    return u


def coupling_matrix(u):
    """Hessian of the trap + Coulomb potential at positions ``u``.

    Diagonal ``1 + 2 sum_n |u_m - u_n|^-3``, off-diagonal ``-2 |u_m - u_n|^-3``.
    """
    u = np.asarray(u, dtype=float)
    dist = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(dist, np.inf)
    if np.any(dist == 0):
        raise ChainError("coincident ion positions")
    c = 2.0 / dist**3
    G = -c
    G[np.diag_indices_from(G)] = 1.0 + c.sum(axis=1)
    return G


@dataclass(frozen=True)
class NormalModes:
    """Mode frequencies (ascending) and orthonormal mode vectors (columns)."""

    frequencies: np.ndarray
    vectors: np.ndarray

    @property
    def n_modes(self):
        return len(self.frequencies)

    def reconstruct(self):
        """Coupling matrix ``M diag(nu^2) M^T``."""
        M = self.vectors
        return (M * self.frequencies**2) @ M.T


def normal_modes(G):
    """Diagonalize ``G``; each column's largest-magnitude entry is made positive."""
    G = np.asarray(G, dtype=float)
    if not np.allclose(G, G.T, atol=1e-12, rtol=0):
        raise ChainError("coupling matrix is not symmetric")
    w, M = np.linalg.eigh(G)
    if w[0] <= 0:
        raise ChainError(f"unstable configuration: eigenvalue {w[0]:.3e} <= 0")
    idx = np.argmax(np.abs(M), axis=0)
    signs = np.sign(M[idx, np.arange(M.shape[1])])
    M = M * signs
    M.setflags(write=False)
    nu = np.sqrt(w)
    nu.setflags(write=False)
    return NormalModes(nu, M)


def truncated_coupling(G, cut):
    """Remove all couplings between sites ``1..cut`` and ``cut+1..N``.

    Diagonal entries are left untouched, so the result is ``G_A (+) G_B``
    with each block equal to the corresponding block of ``G``.
    """
    G = np.asarray(G, dtype=float)
    n = G.shape[0]
    if int(cut) != cut or not 1 <= cut < n:
        raise ChainError(f"cut must satisfy 1 <= cut < N={n}, got {cut!r}")
    out = G.copy()
    out[:cut, cut:] = 0.0
    out[cut:, :cut] = 0.0
    return out


@dataclass(frozen=True)
class Chain:
    """Positions, coupling matrix and modes for an ``n_ions`` chain."""

    positions: np.ndarray
    coupling: np.ndarray
    modes: NormalModes

    @classmethod
    def build(cls, n_ions):
        u = solve_equilibrium(n_ions)
        G = coupling_matrix(u)
        return cls(u, G, normal_modes(G))

    @property
    def n_ions(self):
        return len(self.positions)

    def truncated(self, cut=None):
        """Same chain with the halves decoupled at ``cut`` (default N // 2)."""
        cut = self.n_ions // 2 if cut is None else cut
        GT = truncated_coupling(self.coupling, cut)
        return Chain(self.positions, GT, normal_modes(GT))
