'''
Structure-preserving semidiscretizations of the classical Serre-Green-Naghdi
equations in primitive variables.

Variants
--------
flat: constant bathymetry
mild: mild-slope approximation of variable bathymetry
full: variable bathymetry without the mild-slope approximation

Each variant comes with central (D+ = D- = D) and upwind operators. The
momentum equation is elliptic in time,

    A(h, b) u_t = y,

    A = h - 1/3 D+ h^3 D- + 1/2 D+ h^2 (Db) - 1/2 h^2 (Db) D- + c h (Db)^2,

with c = 3/4 (mild) or 1 (full), and

    y = -[ g D(h (h + b)) - g (h + b) D h
           + 1/2 h D u^2 - 1/2 u^2 D h + 1/2 u D(h u) - 1/2 h u D u
           + D+ p+ + D p0 + 3/2 (p+ + p0) / h Db + psi Db ].

The split of the non-hydrostatic pressure into p+ and p0 avoids the
wide-stencil second derivative in the upwind case. The energy density is

    1/2 g (h + b)^2 + 1/2 h u^2 + 1/6 h^3 (D- u)^2
    - 1/2 h^2 (Db) (D- u) u + e h (Db)^2 u^2

with e = 3/8 (mild) or 1/2 (full).
'''

import logging
from dataclasses import dataclass

import numpy as np

from . import elliptic
from .exceptions import InvalidArgument, check_positive_height
from .model import GRAVITY, Model
from .swe import advective_terms, hydrostatic_terms, mass_tendency

logger = logging.getLogger(__name__)

FLAT, MILD, FULL = elliptic.FLAT, elliptic.MILD, elliptic.FULL
VARIANTS = (FLAT, MILD, FULL)
CENTRAL, UPWIND = 'central', 'upwind'

_ENERGY_COEFFICIENT = {FLAT: 0., MILD: 3. / 8, FULL: 1. / 2}


@dataclass
class SgnState:
    h: np.ndarray
    u: np.ndarray
    g: float = GRAVITY
    b: np.ndarray = None
    variant: str = FLAT
    operator_mode: str = CENTRAL


def _operators(ops, operator_mode):
    if operator_mode == UPWIND:
        if not ops.upwind:
            raise InvalidArgument('upwind mode needs an upwind operator set')
        return ops.d_central, ops.d_plus, ops.d_minus
    return ops.d_central, ops.d_central, ops.d_central


def _bathymetry_slope(state, ops):
    if state.variant == FLAT or state.b is None:
        return None
    return ops.d_central.apply(state.b)


def _pressures(state, ops):
    '''(p+, p0); for central operators p = p+ + p0.'''
    h, u = state.h, state.u
    D, Dp, Dm = _operators(ops, state.operator_mode)
    Dh, Du, Dmu = D.apply(h), D.apply(u), Dm.apply(u)
    p_plus = 0.5 * h ** 3 * Du * Dmu + 0.5 * h ** 2 * Dh * u * Dmu
    p_zero = -h * D.apply(h ** 2 * u * Du) / 6 - h ** 2 * u * D.apply(h * Du) / 6
    Db = _bathymetry_slope(state, ops)
    if Db is not None:
        p_plus -= 0.25 * h ** 2 * Db * u * Du + 0.25 * h * Dh * Db * u ** 2
        p_zero += 0.25 * h * D.apply(h * Db * u ** 2) + 0.25 * h ** 2 * u * D.apply(Db * u)
    return p_plus, p_zero


def pressure_flat(state, ops):
    '''
    Non-hydrostatic pressure of the flat bathymetry schemes: p for central
    operators, the pair (p+, p0) for upwind operators.
    '''
    check_positive_height(state.h)
    flat = SgnState(state.h, state.u, state.g, None, FLAT, state.operator_mode)
    p_plus, p_zero = _pressures(flat, ops)
    if state.operator_mode == UPWIND:
        return p_plus, p_zero
    return p_plus + p_zero


def pressure(state, ops):
    check_positive_height(state.h)
    return _pressures(state, ops)


def psi_term(state, ops):
    '''Extra pressure of the full system, central D throughout.'''
    h, u = state.h, state.u
    D = ops.d_central
    Db = D.apply(state.b)
    return (D.apply(h * Db * u ** 2) + h * u * D.apply(Db * u)
            - h * Db * u * D.apply(u) - D.apply(h) * Db * u ** 2) / 8


def momentum_rhs(state, ops):
    '''The right-hand side y of A(h, b) u_t = y, without viscosity.'''
    h, u = state.h, state.u
    D, Dp, Dm = _operators(ops, state.operator_mode)
    b = None if state.variant == FLAT else state.b
    p_plus, p_zero = _pressures(state, ops)
    terms = (hydrostatic_terms(D, state.g, h, b) + advective_terms(D, h, u)
             + Dp.apply(p_plus) + D.apply(p_zero))
    Db = _bathymetry_slope(state, ops)
    if Db is not None:
        terms += 1.5 * (p_plus + p_zero) / h * Db
        if state.variant == FULL:
            terms += psi_term(state, ops) * Db
    return -terms


def elliptic_operator(state, ops):
    return elliptic.assemble(ops, state.variant, state.h, state.b,
                             use_upwind=state.operator_mode == UPWIND)


def rhs_original(state, ops, elliptic_solver=elliptic, forcing=None, operator=None):
    '''
    Tendencies (h_t, u_t). `forcing` is added to y before the elliptic solve
    (artificial viscosity); `operator` may carry a previously assembled
    elliptic operator.
    '''
    if state.variant not in VARIANTS:
        raise InvalidArgument('unknown variant {!r}'.format(state.variant))
    h, u = state.h, state.u
    check_positive_height(h)
    h_t = mass_tendency(ops.d_central, h, u)
    y = momentum_rhs(state, ops)
    if forcing is not None:
        y = y + forcing
    A = operator if operator is not None else elliptic_operator(state, ops)
    u_t = elliptic_solver.solve(A, y)
    return h_t, u_t


def energy_density_original(state, ops):
    h, u = state.h, state.u
    _, _, Dm = _operators(ops, state.operator_mode)
    Dmu = Dm.apply(u)
    b = 0. if state.variant == FLAT or state.b is None else state.b
    E = 0.5 * state.g * (h + b) ** 2 + 0.5 * h * u ** 2 + h ** 3 * Dmu ** 2 / 6
    Db = _bathymetry_slope(state, ops)
    if Db is not None:
        E += -0.5 * h ** 2 * Db * Dmu * u + _ENERGY_COEFFICIENT[state.variant] * h * Db ** 2 * u ** 2
    return E


def energy_original(state, ops):
    return ops.M.quadrature(energy_density_original(state, ops))


def momentum(state, ops):
    return ops.M.quadrature(state.h * state.u)


def energy_gradient_original(state, ops):
    '''
    Gradient of the total energy in the M inner product. The velocity part is
    A(h, b) u, obtained from the adjoint relation M^{-1} D-^T M = -D+.
    '''
    h, u = state.h, state.u
    _, Dp, Dm = _operators(ops, state.operator_mode)
    Dmu = Dm.apply(u)
    b = 0. if state.variant == FLAT or state.b is None else state.b
    grad_h = state.g * (h + b) + 0.5 * u ** 2 + 0.5 * h ** 2 * Dmu ** 2
    grad_u = h * u - Dp.apply(h ** 3 * Dmu) / 3
    Db = _bathymetry_slope(state, ops)
    if Db is not None:
        e = _ENERGY_COEFFICIENT[state.variant]
        grad_h += -h * Db * Dmu * u + e * Db ** 2 * u ** 2
        grad_u += (0.5 * Dp.apply(h ** 2 * Db * u) - 0.5 * h ** 2 * Db * Dmu
                   + 2 * e * h * Db ** 2 * u)
    return grad_h, grad_u


class OriginalModel(Model):
    '''
    Classical Serre-Green-Naghdi equations.

    Parameters:
    variant: 'flat', 'mild' or 'full'
    operator_mode: 'central' or 'upwind' (needs an upwind OperatorSet)
    frozen: reuse the elliptic factorization assembled at the start of each
            time step for all stages. Faster, but the solves are no longer
            exact and the energy conservation results do not apply.
    '''

    name = 'sgn-original'
    variables = ('h', 'u')

    def __init__(self, ops, g=GRAVITY, b=None, variant=FLAT, operator_mode=None,
                 viscosity=None, source=None, frozen=False):
        super().__init__(ops, g=g, b=b, viscosity=viscosity, source=source)
        if variant not in VARIANTS:
            raise InvalidArgument('unknown variant {!r}, expected one of {}'.format(variant, VARIANTS))
        self.variant = variant
        self.operator_mode = operator_mode or (UPWIND if ops.upwind else CENTRAL)
        if self.operator_mode == UPWIND and not ops.upwind:
            raise InvalidArgument('upwind mode needs an upwind operator set')
        if variant == FLAT:
            self.b = np.zeros(ops.grid.n)
        self.frozen = frozen
        self._frozen_operator = None

    def state(self, q):
        return SgnState(q[0], q[1], self.g, self.b, self.variant, self.operator_mode)

    def on_step_start(self, t, q):
        if self.frozen:
            self._frozen_operator = elliptic_operator(self.state(q), self.ops)

    def tendencies(self, h, u):
        state = SgnState(h, u, self.g, self.b, self.variant, self.operator_mode)
        return rhs_original(state, self.ops, forcing=self._momentum_forcing(h, u),
                            operator=self._frozen_operator if self.frozen else None)

    def pressure(self, q):
        return pressure(self.state(q), self.ops)

    def energy_density(self, q):
        return energy_density_original(self.state(q), self.ops)

    def energy_gradient(self, q):
        return np.vstack(energy_gradient_original(self.state(q), self.ops))
