import numpy as np
import pytest

from sgnpy.sbp import make_grid, make_operators


def smooth_field(x, length, rng, mean, amplitude, modes=4):
    '''mean plus a few random Fourier modes of total amplitude <= amplitude'''
    f = np.full_like(x, mean)
    weights = rng.uniform(0, 1, modes)
    weights *= amplitude / weights.sum()
    for k, a in enumerate(weights, start=1):
        f += a * np.cos(2 * np.pi * k * x / length + rng.uniform(0, 2 * np.pi))
    return f


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def grid():
    return make_grid(-1., 1., 32)


@pytest.fixture(params=[(2, False), (4, False), (6, False), (2, True), (3, True), (4, True)],
                ids=lambda p: '{}-{}'.format('upwind' if p[1] else 'central', p[0]))
def ops(request, grid):
    order, upwind = request.param
    return make_operators(grid, order, upwind=upwind)


@pytest.fixture
def random_state(rng):
    '''Factory for smooth positive states (h, u, b) on an operator set.'''

    def make(ops):
        x, length = ops.grid.nodes, ops.grid.length
        h = smooth_field(x, length, rng, 2., 0.5)
        u = smooth_field(x, length, rng, 0.3, 0.4)
        b = smooth_field(x, length, rng, 0., 0.2)
        return h, u, b
    return make


@pytest.fixture
def random_states(random_state):
    '''Batches of independent smooth states, fifty unless asked otherwise.'''

    def make(ops, count=50):
        return [random_state(ops) for _ in range(count)]
    return make
