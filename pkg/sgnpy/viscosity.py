'''
High-order artificial viscosity for the momentum equation.

The term F = D(mu h D u) (central) or F = D+(mu h D- u) (upwind) is added on
the right-hand side of h u_t. It leaves the total momentum untouched,
1^T M F = 0, and can only remove energy, u^T M F <= 0.
'''

from dataclasses import dataclass
from typing import Optional

from .exceptions import InvalidArgument

CENTRAL, UPWIND = 'central', 'upwind'


@dataclass
class AvConfig:
    enabled: bool = False
    c: float = 1.0
    # None means: take the accuracy order of the spatial operator
    order: Optional[int] = None
    # None means: upwind when the operator set has an upwind pair
    mode: Optional[str] = None

    def __post_init__(self):
        if self.c < 0:
            raise InvalidArgument('artificial viscosity constant must be non-negative')
        if self.mode not in (None, CENTRAL, UPWIND):
            raise InvalidArgument('unknown artificial viscosity mode {!r}'.format(self.mode))


def av_coefficient(dx, p, c=1.0):
    '''mu = c dx^p / p for a method of accuracy order p.'''
    if not dx > 0:
        raise InvalidArgument('grid spacing must be positive, got {}'.format(dx))
    if p < 1:
        raise InvalidArgument('accuracy order must be at least 1, got {}'.format(p))
    return c * dx ** p / p


def av_term(ops, mu, h, u, mode=CENTRAL):
    if mode == UPWIND:
        if not ops.upwind:
            raise InvalidArgument('upwind artificial viscosity needs an upwind operator set')
        return ops.d_plus.apply(mu * h * ops.d_minus.apply(u))
    return ops.d_central.apply(mu * h * ops.d_central.apply(u))


class ArtificialViscosity(object):
    '''Binds an AvConfig to an operator set: fixes mu and the mode once.'''

    def __init__(self, ops, config):
        self.config = config
        order = config.order or ops.order
        self.mu = av_coefficient(ops.grid.dx, order, config.c) if config.enabled else 0.
        self.mode = config.mode or (UPWIND if ops.upwind else CENTRAL)
        if self.mode == UPWIND and not ops.upwind:
            raise InvalidArgument('upwind artificial viscosity needs an upwind operator set')
        self._ops = ops

    @property
    def active(self):
        return self.mu > 0

    def __call__(self, h, u):
        return av_term(self._ops, self.mu, h, u, self.mode)
