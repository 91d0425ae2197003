'''
Hyperbolic (augmented Lagrangian) approximation of the Serre-Green-Naghdi
equations with auxiliary variables w and eta and relaxation parameter lambda.

The semidiscretization is fully explicit. With b = 0 it reduces to the flat
bathymetry scheme; with variable bathymetry the hydrostatic pressure is split
as g D(h (h + b)) - g (h + b) D h and the bathymetry enters through

    + lambda/2 D b - lambda/2 (eta / h) D b     (momentum)
    + 3/2 u D b                                 (eta equation).

Both variants conserve the total water mass and the total energy

    E = 1/2 g (h + b)^2 + 1/2 h u^2 + 1/6 h w^2
        + lambda/6 h - lambda/3 eta + lambda/6 eta^2 / h.
'''

from dataclasses import dataclass

import numpy as np

from .exceptions import check_positive_height
from .model import GRAVITY, Model
from .swe import advective_terms, hydrostatic_terms, mass_tendency

DEFAULT_LAMBDA = 500.


@dataclass
class HypState:
    h: np.ndarray
    u: np.ndarray
    w: np.ndarray
    eta: np.ndarray
    g: float = GRAVITY
    lam: float = DEFAULT_LAMBDA
    b: np.ndarray = None


def init_auxiliary(h, u, ops):
    '''eta = h, w = -h D u'''
    h = np.asarray(h, dtype=float)
    u = np.asarray(u, dtype=float)
    if h.shape != u.shape:
        raise ValueError('h and u must have the same length')
    return h.copy(), -h * ops.d_central.apply(u)


def celerity(state):
    '''Characteristic speed scale c with c^2 = g h + lambda eta^2 / h^2.'''
    return np.sqrt(state.g * state.h + state.lam * state.eta ** 2 / state.h ** 2)


def _rhs(state, ops, bathymetry):
    h, u, w, eta, lam = state.h, state.u, state.w, state.eta, state.lam
    check_positive_height(h)
    D = ops.d_central
    Dh, Du, Dw, Deta = D.apply(h), D.apply(u), D.apply(w), D.apply(eta)
    b = state.b if bathymetry else None

    h_t = mass_tendency(D, h, u)

    # written with r = eta / h, which is exactly 1 in a lake at rest
    r = eta / h
    momentum = (hydrostatic_terms(D, state.g, h, b) + advective_terms(D, h, u)
                + lam / 6 * r ** 2 * Dh
                + lam / 3 * (1 - r) * Deta
                - lam / 6 * D.apply(r * eta))
    if bathymetry:
        Db = D.apply(state.b)
        momentum += lam / 2 * (1 - r) * Db
    u_t = -momentum / h

    w_flux = 0.5 * (D.apply(h * u * w) + h * u * Dw - u * w * Dh - h * w * Du)
    w_t = (-w_flux + lam * (1 - r)) / h

    eta_t = -u * Deta + w
    if bathymetry:
        eta_t -= 1.5 * u * Db
    return h_t, u_t, w_t, eta_t


def rhs_hyperbolic_flat(state, ops):
    return _rhs(state, ops, bathymetry=False)


def rhs_hyperbolic_variable(state, ops):
    return _rhs(state, ops, bathymetry=True)


def energy_density_hyperbolic(state):
    h, u, w, eta, lam = state.h, state.u, state.w, state.eta, state.lam
    b = 0. if state.b is None else state.b
    return (0.5 * state.g * (h + b) ** 2 + 0.5 * h * u ** 2 + h * w ** 2 / 6
            + lam / 6 * h - lam / 3 * eta + lam / 6 * eta ** 2 / h)


def energy_hyperbolic(state, ops):
    return ops.M.quadrature(energy_density_hyperbolic(state))


class HyperbolicModel(Model):
    '''
    Parameters:
    lam: relaxation parameter lambda, large values approach the classical
         equations at the price of stiffness
    bathymetry: 'flat' ignores b, 'variable' uses the well-balanced form
    '''

    name = 'sgn-hyperbolic'
    variables = ('h', 'u', 'w', 'eta')

    def __init__(self, ops, g=GRAVITY, b=None, lam=DEFAULT_LAMBDA, bathymetry='variable',
                 viscosity=None, source=None):
        super().__init__(ops, g=g, b=b, viscosity=viscosity, source=source)
        if bathymetry not in ('flat', 'variable'):
            raise ValueError('bathymetry must be flat or variable, got {!r}'.format(bathymetry))
        self.lam = float(lam)
        self.bathymetry = bathymetry
        if bathymetry == 'flat':
            self.b = np.zeros(ops.grid.n)

    def state(self, q):
        h, u, w, eta = q
        return HypState(h, u, w, eta, self.g, self.lam, self.b)

    def initial_state(self, h, u):
        eta, w = init_auxiliary(h, u, self.ops)
        return self.pack(h, u, w, eta)

    def tendencies(self, h, u, w, eta):
        state = HypState(h, u, w, eta, self.g, self.lam, self.b)
        if self.bathymetry == 'flat':
            h_t, u_t, w_t, eta_t = rhs_hyperbolic_flat(state, self.ops)
        else:
            h_t, u_t, w_t, eta_t = rhs_hyperbolic_variable(state, self.ops)
        forcing = self._momentum_forcing(h, u)
        if forcing is not None:
            u_t = u_t + forcing / h
        return h_t, u_t, w_t, eta_t

    def energy_density(self, q):
        return energy_density_hyperbolic(self.state(q))

    def energy_gradient(self, q):
        h, u, w, eta = q
        lam = self.lam
        return np.vstack((
            self.g * (h + self.b) + 0.5 * u ** 2 + w ** 2 / 6 + lam / 6 - lam / 6 * eta ** 2 / h ** 2,
            h * u,
            h * w / 3,
            -lam / 3 + lam / 3 * eta / h,
        ))
