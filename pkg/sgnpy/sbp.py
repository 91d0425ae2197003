'''
Periodic summation-by-parts (SBP) derivative operators.

A periodic first-derivative SBP operator D with diagonal norm M satisfies

    M D + D^T M = 0,

which mimics integration by parts on a periodic domain. Upwind operators come
as a pair D+, D- with

    M D+ + D-^T M = 0,   M (D+ - D-) negative semidefinite,

and their average (D+ + D-) / 2 is a central SBP operator.

The operators are stored as circulant stencils and applied matrix-free with
numpy.roll. Sparse exports exist for the elliptic assembly and for debugging.
'''

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import comb

from .exceptions import InvalidArgument

logger = logging.getLogger(__name__)

CENTRAL = 'central'
UPWIND_PLUS = 'upwind_plus'
UPWIND_MINUS = 'upwind_minus'

# Interior stencils of the central operators, unscaled (multiply by 1/dx)
_CENTRAL_STENCILS = {
    2: {-1: -1. / 2, 1: 1. / 2},
    4: {-2: 1. / 12, -1: -2. / 3, 1: 2. / 3, 2: -1. / 12},
    6: {-3: -1. / 60, -2: 3. / 20, -1: -3. / 4,
        1: 3. / 4, 2: -3. / 20, 3: 1. / 60},
}

# Upwind pairs D+- = D_c +- s * delta^(2k), with s * delta^(2k) symmetric
# negative semidefinite. Entries: order -> (central order, s, 2k)
_UPWIND_SPLITTING = {
    1: (2, 1. / 2, 2),
    2: (2, -1. / 12, 4),
    3: (4, -1. / 12, 4),
    4: (4, 1. / 60, 6),
}

CENTRAL_ORDERS = tuple(sorted(_CENTRAL_STENCILS))
UPWIND_ORDERS = tuple(sorted(_UPWIND_SPLITTING))


@dataclass(frozen=True)
class PeriodicGrid:
    x_min: float
    x_max: float
    n: int

    @property
    def length(self):
        return self.x_max - self.x_min

    @property
    def dx(self):
        return self.length / self.n

    @property
    def nodes(self):
        # node n would coincide with x_min + length
        return self.x_min + self.dx * np.arange(self.n)


def make_grid(x_min, x_max, n):
    if not x_max > x_min:
        raise InvalidArgument(
            'empty domain [{}, {}]: x_max must exceed x_min'.format(x_min, x_max))
    if int(n) != n or n < 4:
        raise InvalidArgument('need an integer number of nodes >= 4, got {}'.format(n))
    return PeriodicGrid(float(x_min), float(x_max), int(n))


def centred_difference(k):
    '''Offsets -> coefficients of the centred difference delta^(2k).'''
    return {j: float((-1) ** (k + j) * comb(2 * k, k + j, exact=True))
            for j in range(-k, k + 1)}


class DerivativeOperator(object):
    '''
    Circulant first-derivative operator on a periodic grid.

    Parameters:
    kind: one of 'central', 'upwind_plus', 'upwind_minus'
    order: the interior accuracy order
    stencil: dict offset -> coefficient, already scaled by 1/dx
    grid: the PeriodicGrid the operator lives on
    '''

    def __init__(self, kind, order, stencil, grid):
        self.kind = kind
        self.order = order
        self.grid = grid
        offsets = sorted(k for k, c in stencil.items() if c != 0)
        self._offsets = np.asarray(offsets, dtype=int)
        self._coeffs = np.asarray([stencil[k] for k in offsets], dtype=float)

    @property
    def stencil(self):
        return dict(zip(self._offsets.tolist(), self._coeffs.tolist()))

    @property
    def width(self):
        if len(self._offsets) == 0:
            return 1
        return int(self._offsets.max() - self._offsets.min()) + 1

    def apply(self, f):
        f = np.asarray(f)
        if f.shape[-1] != self.grid.n:
            raise InvalidArgument('field of length {} does not match grid with {} nodes'.format(
                f.shape[-1], self.grid.n))
        out = np.zeros_like(f, dtype=np.result_type(f, self._coeffs))
        for k, c in zip(self._offsets, self._coeffs):
            # (D f)_i = sum_k c_k f_{i+k}
            out += c * np.roll(f, -k, axis=-1)
        return out

    __call__ = apply

    def to_triplets(self):
        '''Coordinate format (rows, cols, values) of the periodic matrix.'''
        n = self.grid.n
        rows = np.repeat(np.arange(n), len(self._offsets))
        cols = (rows + np.tile(self._offsets, n)) % n
        vals = np.tile(self._coeffs, n)
        return rows, cols, vals

    def to_sparse(self):
        n = self.grid.n
        rows, cols, vals = self.to_triplets()
        # duplicates are summed, which handles stencils wrapping onto themselves
        return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()

    def to_dense(self):
        return self.to_sparse().toarray()

    def __repr__(self):
        return 'DerivativeOperator({}, order={}, n={})'.format(
            self.kind, self.order, self.grid.n)


class MassMatrix(object):

    def __init__(self, weights, grid):
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (grid.n,):
            raise InvalidArgument('mass weights must have one entry per node')
        if not (weights > 0).all():
            raise InvalidArgument('mass weights must be strictly positive')
        self.weights = weights
        self.grid = grid

    def quadrature(self, f):
        f = np.asarray(f)
        if f.shape[-1] != self.grid.n:
            raise InvalidArgument('field of length {} does not match grid with {} nodes'.format(
                f.shape[-1], self.grid.n))
        return np.sum(self.weights * f, axis=-1)

    def inner(self, f, g):
        return self.quadrature(f * g)

    def to_sparse(self):
        return sp.diags(self.weights, format='csr')


class OperatorSet(object):
    '''
    The operators used by every scheme: grid, mass matrix, central derivative
    and, for upwind sets, the pair D+ / D-. The central operator of an upwind
    set is the average of the pair.
    '''

    def __init__(self, grid, M, d_central, d_plus=None, d_minus=None):
        assert (d_plus is None) == (d_minus is None)
        self.grid = grid
        self.M = M
        self.d_central = d_central
        self.d_plus = d_plus
        self.d_minus = d_minus

    @property
    def upwind(self):
        return self.d_plus is not None

    @property
    def order(self):
        return self.d_plus.order if self.upwind else self.d_central.order

    @property
    def D(self):
        return self.d_central

    @property
    def Dp(self):
        return self.d_plus if self.upwind else self.d_central

    @property
    def Dm(self):
        return self.d_minus if self.upwind else self.d_central

    def __repr__(self):
        return 'OperatorSet({}, order={}, n={})'.format(
            'upwind' if self.upwind else 'central', self.order, self.grid.n)


def _check_width(grid, stencil):
    width = max(stencil) - min(stencil) + 1
    if grid.n < width:
        raise InvalidArgument('{} nodes are too few for a stencil of width {}'.format(
            grid.n, width))


def build_central(grid, order):
    if order not in _CENTRAL_STENCILS:
        raise InvalidArgument('central operators exist for orders {}, got {}'.format(
            CENTRAL_ORDERS, order))
    stencil = _CENTRAL_STENCILS[order]
    _check_width(grid, stencil)
    scaled = {k: c / grid.dx for k, c in stencil.items()}
    D = DerivativeOperator(CENTRAL, order, scaled, grid)
    M = MassMatrix(np.full(grid.n, grid.dx), grid)
    return D, M


def upwind_stencils(order):
    '''Unscaled stencils (D+, D-) of the periodic upwind pair of given order.'''
    central_order, s, two_k = _UPWIND_SPLITTING[order]
    central = _CENTRAL_STENCILS[central_order]
    diss = centred_difference(two_k // 2)
    offsets = set(central) | set(diss)
    plus = {k: central.get(k, 0.) + s * diss.get(k, 0.) for k in offsets}
    minus = {k: central.get(k, 0.) - s * diss.get(k, 0.) for k in offsets}
    return plus, minus


def build_upwind_pair(grid, order):
    if order not in _UPWIND_SPLITTING:
        raise InvalidArgument('upwind operators exist for orders {}, got {}'.format(
            UPWIND_ORDERS, order))
    plus, minus = upwind_stencils(order)
    _check_width(grid, plus)
    Dp = DerivativeOperator(UPWIND_PLUS, order, {k: c / grid.dx for k, c in plus.items()}, grid)
    Dm = DerivativeOperator(UPWIND_MINUS, order, {k: c / grid.dx for k, c in minus.items()}, grid)
    M = MassMatrix(np.full(grid.n, grid.dx), grid)
    return Dp, Dm, M


def make_operators(grid, order, upwind=False):
    '''
    Build the OperatorSet of given accuracy order. For upwind sets the
    central operator is (D+ + D-) / 2 so that the composite schemes see a
    consistent triple.
    '''
    if not upwind:
        D, M = build_central(grid, order)
        return OperatorSet(grid, M, D)
    Dp, Dm, M = build_upwind_pair(grid, order)
    average = {k: 0.5 * (Dp.stencil.get(k, 0.) + Dm.stencil.get(k, 0.))
               for k in set(Dp.stencil) | set(Dm.stencil)}
    D = DerivativeOperator(CENTRAL, order, average, grid)
    return OperatorSet(grid, M, D, Dp, Dm)


def apply(op, f):
    return op.apply(f)


def quadrature(M, f):
    return M.quadrature(f)


def sbp_residuals(ops, dense_limit=128):
    '''
    Check the SBP identities of an operator set.

    Returns a dict with
    central_residual: max |M D + D^T M|
    upwind_adjoint_residual: max |M D+ + D-^T M| (0 for central sets)
    dissipativity_max_eig: largest eigenvalue of the symmetric part of
        M (D+ - D-) (0 for central sets)
    '''
    M = ops.M.to_sparse()
    D = ops.d_central.to_sparse()
    central = abs(M @ D + D.T @ M).max()
    result = {'central_residual': float(central),
              'upwind_adjoint_residual': 0.,
              'dissipativity_max_eig': 0.}
    if ops.upwind:
        Dp = ops.d_plus.to_sparse()
        Dm = ops.d_minus.to_sparse()
        result['upwind_adjoint_residual'] = float(abs(M @ Dp + Dm.T @ M).max())
        diss = M @ (Dp - Dm)
        sym = 0.5 * (diss + diss.T)
        if ops.grid.n <= dense_limit:
            eigs = np.linalg.eigvalsh(sym.toarray())
        else:
            # circulant and symmetric: the spectrum is the DFT of the first column
            eigs = np.fft.fft(sym[:, 0].toarray().ravel()).real
        result['dissipativity_max_eig'] = float(eigs.max())
    return result
