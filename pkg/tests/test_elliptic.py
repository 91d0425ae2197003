import numpy as np
import pytest

from sgnpy import elliptic
from sgnpy.exceptions import StateInvalid
from sgnpy.sbp import make_grid, make_operators


def _use_upwind(ops):
    return ops.upwind


@pytest.mark.parametrize('variant', ['flat', 'mild', 'full'])
def test_spd_with_respect_to_mass(ops, random_state, variant):
    h, u, b = random_state(ops)
    A = elliptic.assemble(ops, variant, h, b, use_upwind=_use_upwind(ops))
    K = A.symmetrized.toarray()
    res = elliptic.verify_spd(A)
    assert res['symmetry_residual'] <= 1e-12 * np.abs(K).max()
    assert res['min_rayleigh'] >= h.min() * (1 - 1e-10)
    assert res['min_excess'] >= -1e-10 * np.abs(K).max()
    assert np.linalg.eigvalsh(0.5 * (K + K.T)).min() > 0


def test_constant_height_first_order_pair():
    grid = make_grid(0., 1., 8)
    ops = make_operators(grid, 1, upwind=True)
    A = elliptic.assemble_flat(ops, np.ones(8), use_upwind=True).matrix.toarray()
    second = (np.roll(np.eye(8), 1, axis=1) - 2 * np.eye(8) + np.roll(np.eye(8), -1, axis=1)) / grid.dx ** 2
    assert np.allclose(A, np.eye(8) - second / 3)


def test_constant_height_central_wide_stencil():
    grid = make_grid(0., 1., 16)
    ops = make_operators(grid, 2)
    A = elliptic.assemble_flat(ops, np.ones(16)).matrix.toarray()
    D = ops.D.to_dense()
    assert np.allclose(A, np.eye(16) - D @ D / 3)
    row = (A[5] - np.eye(16)[5]) * grid.dx ** 2
    assert np.allclose(row[3:8], -np.array([1, 0, -2, 0, 1]) / 12)


@pytest.mark.parametrize('variant', ['mild', 'full'])
def test_constant_bathymetry_reduces_to_flat(ops, random_state, variant):
    h, _, _ = random_state(ops)
    flat = elliptic.assemble_flat(ops, h, use_upwind=ops.upwind).matrix
    varied = elliptic.assemble(ops, variant, h, np.full_like(h, -3.), use_upwind=ops.upwind).matrix
    assert abs(flat - varied).max() <= 1e-12 * abs(flat).max()


def test_full_minus_mild(ops, random_state):
    h, _, b = random_state(ops)
    mild = elliptic.assemble_mild(ops, h, b, use_upwind=ops.upwind).matrix
    full = elliptic.assemble_full(ops, h, b, use_upwind=ops.upwind).matrix
    db = ops.D.apply(b)
    assert np.allclose((full - mild).toarray(), np.diag(0.25 * h * db ** 2), atol=1e-12)


def test_solve_recovers_field(ops, random_state):
    h, u, b = random_state(ops)
    A = elliptic.assemble(ops, 'full', h, b, use_upwind=ops.upwind)
    rhs = A.dot(u)
    assert np.allclose(elliptic.solve(A, rhs), u, atol=1e-10)
    assert np.allclose(A.solve(rhs, method='cg'), u, atol=1e-8)
    assert not elliptic.solve(A, np.zeros_like(u)).any()


def test_operator_records_height(ops, random_state):
    h, _, _ = random_state(ops)
    A = elliptic.assemble_flat(ops, h, use_upwind=ops.upwind)
    assert A.source_h_hash == elliptic.fingerprint(h)
    assert A.source_h_hash != elliptic.fingerprint(h + 1e-3)


def test_non_positive_height_is_rejected(grid):
    ops = make_operators(grid, 2)
    h = np.ones(grid.n)
    h[7] = 0.
    with pytest.raises(StateInvalid) as err:
        elliptic.assemble_flat(ops, h)
    assert err.value.node == 7
