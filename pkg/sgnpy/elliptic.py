'''
Elliptic operators of the classical Serre-Green-Naghdi schemes.

The classical schemes need one linear solve per right-hand side evaluation,

    A(h, b) u_t = y,

where A is symmetric and positive definite with respect to the diagonal mass
matrix M whenever h > 0. The M-symmetrized system (M A) u_t = M y is
factorized with a sparse LU (SuperLU via scipy); conjugate gradients on M A
with a Jacobi preconditioner serve as fallback.
'''

import hashlib
import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg, splu

from .exceptions import InvalidArgument, NumericalFailure, check_positive_height

logger = logging.getLogger(__name__)

FLAT, MILD, FULL = 'flat', 'mild', 'full'

# coefficient of h (Db)^2 in the operator
_BATHYMETRY_COEFFICIENT = {MILD: 3. / 4, FULL: 1.}

SOLVE_RTOL = 1e-10
CG_RTOL = 1e-12


def _cg(K, rhs, rtol, precond):
    # scipy renamed tol -> rtol in 1.12
    try:
        return cg(K, rhs, rtol=rtol, atol=0., M=precond, maxiter=10 * K.shape[0])
    except TypeError:
        return cg(K, rhs, tol=rtol, atol=0., M=precond, maxiter=10 * K.shape[0])


def fingerprint(h):
    return hashlib.sha1(np.ascontiguousarray(h, dtype=float).tobytes()).hexdigest()


class SpdOperator(object):
    '''
    Assembled elliptic operator A (CSR) together with the mass matrix it is
    symmetric with respect to. Immutable after assembly; the factorization is
    computed lazily on the first solve.
    '''

    def __init__(self, variant, matrix, mass, h, use_upwind=False):
        self.variant = variant
        self.use_upwind = use_upwind
        self.matrix = matrix.tocsr()
        self.mass = mass
        self.h = np.array(h, dtype=float)
        self.source_h_hash = fingerprint(h)
        self._lu = None

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def symmetrized(self):
        return (self.mass.to_sparse() @ self.matrix).tocsc()

    def dot(self, v):
        return self.matrix @ v

    def factorize(self):
        if self._lu is None:
            try:
                self._lu = splu(self.symmetrized)
            except RuntimeError as e:
                logger.warning('sparse factorization failed (%s); using conjugate gradients', e)
                self._lu = False
        return self._lu

    def _residual(self, x, rhs):
        r = self.dot(x) - rhs
        return np.sqrt(self.mass.inner(r, r)), np.sqrt(self.mass.inner(rhs, rhs))

    def solve(self, rhs, method='direct'):
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape != (self.n,):
            raise InvalidArgument('right-hand side of length {} for an operator of size {}'.format(
                rhs.shape[-1], self.n))
        if not rhs.any():
            return np.zeros_like(rhs)
        weighted = self.mass.weights * rhs
        lu = self.factorize() if method == 'direct' else False
        if lu is not False:
            x = lu.solve(weighted)
            res, scale = self._residual(x, rhs)
            if res <= SOLVE_RTOL * scale:
                return x
            logger.warning('direct solve residual %.3e above tolerance; refining with CG', res / scale)
        return self._solve_cg(weighted, rhs)

    def _solve_cg(self, weighted, rhs):
        K = self.symmetrized.tocsr()
        diag = K.diagonal()
        if not (diag > 0).all():
            raise NumericalFailure('elliptic operator has a non-positive diagonal')
        precond = LinearOperator(K.shape, matvec=lambda v: v / diag)
        x, info = _cg(K, weighted, CG_RTOL, precond)
        if info != 0:
            raise NumericalFailure('conjugate gradients did not converge (info={})'.format(info))
        res, scale = self._residual(x, rhs)
        if not res <= SOLVE_RTOL * scale:
            raise NumericalFailure('elliptic solve residual {:.3e} above tolerance'.format(res / scale))
        return x


def _assemble(ops, h, b, variant, use_upwind):
    check_positive_height(h)
    if use_upwind and not ops.upwind:
        raise InvalidArgument('upwind assembly requested for a central operator set')
    D = ops.d_central.to_sparse()
    if use_upwind:
        Dp, Dm = ops.d_plus.to_sparse(), ops.d_minus.to_sparse()
    else:
        Dp = Dm = D
    A = sp.diags(h) - (1. / 3) * (Dp @ sp.diags(h ** 3) @ Dm)
    if variant != FLAT:
        db = ops.d_central.apply(b)
        hhdb = sp.diags(h ** 2 * db)
        A = (A + 0.5 * (Dp @ hhdb) - 0.5 * (hhdb @ Dm)
             + sp.diags(_BATHYMETRY_COEFFICIENT[variant] * h * db ** 2))
    return SpdOperator(variant, A, ops.M, h, use_upwind)


def assemble_flat(ops, h, use_upwind=False):
    '''A = h - 1/3 D+ h^3 D- (D+ = D- = D for central operators).'''
    return _assemble(ops, h, None, FLAT, use_upwind)


def assemble_mild(ops, h, b, use_upwind=False):
    '''A = h - 1/3 D+ h^3 D- + 1/2 D+ h^2 (Db) - 1/2 h^2 (Db) D- + 3/4 h (Db)^2'''
    return _assemble(ops, h, b, MILD, use_upwind)


def assemble_full(ops, h, b, use_upwind=False):
    return _assemble(ops, h, b, FULL, use_upwind)


def assemble(ops, variant, h, b=None, use_upwind=False):
    if variant == FLAT:
        return assemble_flat(ops, h, use_upwind)
    if variant == MILD:
        return assemble_mild(ops, h, b, use_upwind)
    if variant == FULL:
        return assemble_full(ops, h, b, use_upwind)
    raise InvalidArgument('unknown elliptic variant {!r}'.format(variant))


def solve(A, rhs):
    return A.solve(rhs)


def verify_spd(A, nsamples=100, seed=0):
    '''
    Witnesses of the SPD property of A with respect to M.

    symmetry_residual: max |M A - (M A)^T|
    min_rayleigh: min over random vectors v of v^T M A v / v^T M v
    min_excess: min over the same vectors of (v^T M A v - v^T h M v) / v^T M v,
        non-negative up to round-off since h (Db)^2 terms complete a square
    '''
    K = A.mass.to_sparse() @ A.matrix
    asym = K - K.T
    symmetry_residual = float(abs(asym).max()) if asym.nnz else 0.
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((nsamples, A.n))
    KV = (K @ V.T).T
    w = A.mass.weights
    vmv = np.sum(V * V * w, axis=1)
    vkv = np.sum(V * KV, axis=1)
    vhv = np.sum(V * V * w * A.h, axis=1)
    return {'symmetry_residual': symmetry_residual,
            'min_rayleigh': float(np.min(vkv / vmv)),
            'min_excess': float(np.min((vkv - vhv) / vmv))}
