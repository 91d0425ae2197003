'''
Energy-conservative split form of the shallow water equations in primitive
variables (flat and variable bathymetry):

    h_t + u D h + h D u = 0,
    h u_t + g D(h (h + b)) - g (h + b) D h
          + 1/2 h D u^2 - 1/2 u^2 D h + 1/2 u D(h u) - 1/2 h u D u = 0.

It shares the advective split terms with the Serre-Green-Naghdi schemes and
serves as their regression baseline.
'''

from dataclasses import dataclass

import numpy as np

from .exceptions import check_positive_height
from .model import GRAVITY, Model


@dataclass
class SweState:
    h: np.ndarray
    u: np.ndarray
    g: float = GRAVITY
    b: np.ndarray = None


def advective_terms(D, h, u):
    '''1/2 h D u^2 - 1/2 u^2 D h + 1/2 u D(h u) - 1/2 h u D u'''
    Dh, Du = D.apply(h), D.apply(u)
    return 0.5 * (h * D.apply(u * u) - u * u * Dh + u * D.apply(h * u) - h * u * Du)


def hydrostatic_terms(D, g, h, b):
    '''g D(h (h + b)) - g (h + b) D h'''
    eta = h if b is None else h + b
    return g * (D.apply(h * eta) - eta * D.apply(h))


def mass_tendency(D, h, u):
    return -(u * D.apply(h) + h * D.apply(u))


def rhs_swe(state, ops):
    h, u = state.h, state.u
    check_positive_height(h)
    D = ops.d_central
    h_t = mass_tendency(D, h, u)
    u_t = -(hydrostatic_terms(D, state.g, h, state.b) + advective_terms(D, h, u)) / h
    return h_t, u_t


def energy_swe(state, ops):
    h, u = state.h, state.u
    b = 0. if state.b is None else state.b
    return ops.M.quadrature(0.5 * state.g * h ** 2 + state.g * h * b + 0.5 * h * u ** 2)


class SWEModel(Model):

    name = 'swe'
    variables = ('h', 'u')

    def state(self, q):
        return SweState(q[0], q[1], self.g, self.b)

    def tendencies(self, h, u):
        h_t, u_t = rhs_swe(SweState(h, u, self.g, self.b), self.ops)
        forcing = self._momentum_forcing(h, u)
        if forcing is not None:
            u_t = u_t + forcing / h
        return h_t, u_t

    def energy_density(self, q):
        h, u = q
        return 0.5 * self.g * h ** 2 + self.g * h * self.b + 0.5 * h * u ** 2

    def energy(self, q):
        return energy_swe(self.state(q), self.ops)

    def energy_gradient(self, q):
        h, u = q
        return np.vstack((self.g * (h + self.b) + 0.5 * u ** 2, h * u))
