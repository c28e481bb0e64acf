import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionvac.chain import (
    Chain,
    ChainError,
    coupling_matrix,
    force_residual,
    normal_modes,
    solve_equilibrium,
    truncated_coupling,
)


def test_single_ion_sits_at_origin():
    assert solve_equilibrium(1).tolist() == [0.0]
    np.testing.assert_array_equal(coupling_matrix([0.0]), [[1.0]])
    modes = normal_modes([[1.0]])
    np.testing.assert_array_equal(modes.frequencies, [1.0])
    np.testing.assert_array_equal(modes.vectors, [[1.0]])


def test_two_ions_closed_form():
    # u = 1/(4u^2)
    u0 = 2 ** (-2 / 3)
    np.testing.assert_allclose(solve_equilibrium(2), [-u0, u0], atol=1e-14)
    np.testing.assert_allclose(solve_equilibrium(2), [-0.62996, 0.62996], atol=1e-5)


def test_three_ions_closed_form():
    # outer ion: u = 1/u^2 + 1/(2u)^2 = 5/(4u^2)
    u0 = (5 / 4) ** (1 / 3)
    np.testing.assert_allclose(solve_equilibrium(3), [-u0, 0.0, u0], atol=1e-14)


def test_two_ion_coupling_and_modes():
    G = coupling_matrix(solve_equilibrium(2))
    np.testing.assert_allclose(G, [[2, -1], [-1, 2]], atol=1e-13)
    modes = normal_modes(G)
    np.testing.assert_allclose(modes.frequencies, [1.0, np.sqrt(3.0)], atol=1e-12)


def test_three_ion_coupling_and_modes():
    G = coupling_matrix(solve_equilibrium(3))
    d = (5 / 4) ** (1 / 3)
    assert G[0, 0] == pytest.approx(G[2, 2], abs=1e-13)
    assert G[1, 1] == pytest.approx(1 + 4 / d**3, abs=1e-12)
    np.testing.assert_allclose(
        normal_modes(G).frequencies, [1.0, np.sqrt(3.0), np.sqrt(29 / 5)], atol=1e-12
    )


@pytest.mark.parametrize("n", [0, -3, 2.5])
def test_bad_ion_count(n):
    with pytest.raises(ChainError):
        solve_equilibrium(n)


def test_coincident_positions_rejected():
    with pytest.raises(ChainError):
        coupling_matrix([0.0, 0.0])


def test_unstable_matrix_rejected():
    with pytest.raises(ChainError):
        normal_modes([[1.0, 2.0], [2.0, 1.0]])


@pytest.mark.parametrize("n", range(1, 31))
def test_chain_invariants(n):
    chain = Chain.build(n)
    u, G, modes = chain.positions, chain.coupling, chain.modes
    assert np.all(np.diff(u) > 0)
    assert np.max(np.abs(force_residual(u))) < 1e-12
    np.testing.assert_allclose(u, -u[::-1], atol=1e-12)
    M = modes.vectors
    assert np.max(np.abs(M.T @ M - np.eye(n))) < 1e-12
    assert np.max(np.abs(G - modes.reconstruct())) < 1e-10
    # centre-of-mass mode is the lowest one
    assert abs(modes.frequencies[0] - 1) < 1e-10
    np.testing.assert_allclose(M[:, 0], np.full(n, 1 / np.sqrt(n)), atol=1e-10)
    assert np.all(np.diff(modes.frequencies) > 0)
    # sign convention
    idx = np.argmax(np.abs(M), axis=0)
    assert np.all(M[idx, np.arange(n)] > 0)


def test_truncation_two_ions():
    G = Chain.build(2).coupling
    np.testing.assert_allclose(truncated_coupling(G, 1), [[2, 0], [0, 2]], atol=1e-13)


def test_truncation_four_ions_keeps_blocks():
    G = Chain.build(4).coupling
    GT = truncated_coupling(G, 2)
    np.testing.assert_array_equal(GT[:2, 2:], 0)
    np.testing.assert_array_equal(GT[2:, :2], 0)
    np.testing.assert_array_equal(GT[:2, :2], G[:2, :2])
    np.testing.assert_array_equal(GT[2:, 2:], G[2:, 2:])


@pytest.mark.parametrize("n, cut", [(1, 1), (4, 0), (4, 4), (4, 1.5)])
def test_truncation_bad_cut(n, cut):
    G = np.eye(n)
    with pytest.raises(ChainError):
        truncated_coupling(G, cut)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 20), data=st.data())
def test_truncation_properties(n, data):
    cut = data.draw(st.integers(1, n - 1))
    GT = truncated_coupling(Chain.build(n).coupling, cut)
    np.testing.assert_array_equal(truncated_coupling(GT, cut), GT)
    np.testing.assert_array_equal(GT, GT.T)
    assert np.linalg.eigvalsh(GT)[0] > 0


def test_modes_are_immutable():
    modes = Chain.build(3).modes
    with pytest.raises(ValueError):
        modes.vectors[0, 0] = 2.0
