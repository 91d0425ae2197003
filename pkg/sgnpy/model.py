'''
Common interface of the semidiscretizations.

A model owns an OperatorSet, the gravitational constant, a fixed bathymetry
and the optional artificial viscosity. States are stacked arrays of shape
(number of variables, n) so that the Runge-Kutta integrator can treat every
model alike.
'''

import logging

import numpy as np

from .exceptions import InvalidArgument
from .viscosity import ArtificialViscosity, AvConfig

logger = logging.getLogger(__name__)

GRAVITY = 9.81


class Model(object):

    name = None
    variables = ('h', 'u')

    def __init__(self, ops, g=GRAVITY, b=None, viscosity=None, source=None):
        self.ops = ops
        self.g = float(g)
        n = ops.grid.n
        self.b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
        if self.b.shape != (n,):
            raise InvalidArgument('bathymetry must have one value per node')
        self.viscosity = ArtificialViscosity(ops, viscosity or AvConfig())
        # callable (t, x) -> array of shape (nvars, n) added to the tendencies
        self.source = source
        self.nrhs = 0

    @property
    def grid(self):
        return self.ops.grid

    @property
    def x(self):
        return self.ops.grid.nodes

    @property
    def nvars(self):
        return len(self.variables)

    def pack(self, *fields):
        if len(fields) != self.nvars:
            raise InvalidArgument('{} expects fields {}'.format(self.name, self.variables))
        return np.vstack([np.asarray(f, dtype=float) for f in fields])

    def unpack(self, q):
        assert q.shape[0] == self.nvars
        return tuple(q[i] for i in range(self.nvars))

    def initial_state(self, h, u):
        return self.pack(h, u)

    def tendencies(self, *fields):
        raise NotImplementedError

    def rhs(self, t, q):
        dq = np.vstack(self.tendencies(*self.unpack(q)))
        if self.source is not None:
            dq = dq + self.source(t, self.x)
        self.nrhs += 1
        return dq

    def on_step_start(self, t, q):
        pass

    def _momentum_forcing(self, h, u):
        if self.viscosity.active:
            return self.viscosity(h, u)
        return None

    # invariants

    def mass(self, q):
        return self.ops.M.quadrature(q[0])

    def momentum(self, q):
        return self.ops.M.quadrature(q[0] * q[1])

    def energy_density(self, q):
        raise NotImplementedError

    def energy(self, q):
        return self.ops.M.quadrature(self.energy_density(q))

    def energy_gradient(self, q):
        '''
        Discrete gradient G of the total energy with respect to the mass
        matrix inner product, i.e. d/dt 1^T M E = sum_k G_k^T M dq_k/dt.
        '''
        raise NotImplementedError

    def energy_rate(self, q, dq=None, t=0.):
        dq = self.rhs(t, q) if dq is None else dq
        G = self.energy_gradient(q)
        return float(np.sum(self.ops.M.quadrature(G * dq)))

    def mass_rate(self, q, dq=None, t=0.):
        dq = self.rhs(t, q) if dq is None else dq
        return float(self.ops.M.quadrature(dq[0]))

    def momentum_rate(self, q, dq=None, t=0.):
        dq = self.rhs(t, q) if dq is None else dq
        return float(self.ops.M.quadrature(q[1] * dq[0] + q[0] * dq[1]))

    def invariants(self, q):
        return {'mass': self.mass(q), 'momentum': self.momentum(q), 'energy': self.energy(q)}

    def __repr__(self):
        return '{}({!r})'.format(type(self).__name__, self.ops)
