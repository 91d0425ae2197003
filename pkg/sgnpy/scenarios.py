'''
Initial conditions, bathymetries, analytic references and manufactured
sources of the numerical experiments.

All domains are periodic. Step-like data (Riemann problem, Favre bore) are
closed by a second smoothed step half a period behind the front so that the
profile is smooth across the periodic boundary.
'''

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .exceptions import InvalidArgument
from .model import GRAVITY
from .utils.io import load_reference_csv

logger = logging.getLogger(__name__)


@dataclass
class SolitonParams:
    h_inf: float = 1.
    amplitude: float = 0.2
    g: float = GRAVITY
    x0: float = 0.

    def __post_init__(self):
        if not (self.h_inf > 0 and self.amplitude > 0):
            raise InvalidArgument('soliton needs h_inf > 0 and amplitude > 0')

    @property
    def eps(self):
        return self.amplitude / self.h_inf

    @property
    def kappa(self):
        return np.sqrt(3 * self.eps / (4 * self.h_inf ** 2 * (1 + self.eps)))

    @property
    def speed(self):
        return np.sqrt(self.g * self.h_inf * (1 + self.eps))


@dataclass
class RiemannParams:
    h_left: float = 1.8
    h_right: float = 1.
    alpha: float = 2.
    x0: float = 0.
    g: float = GRAVITY

    def __post_init__(self):
        if not (self.h_left > 0 and self.h_right > 0):
            raise InvalidArgument('Riemann states need positive heights')


@dataclass
class FavreParams:
    h0: float = 1.
    eps: float = 0.2
    alpha: float = 2.
    x0: float = 0.
    g: float = GRAVITY

    def __post_init__(self):
        if not 0 < self.eps <= 0.5:
            raise InvalidArgument('Favre nonlinearity eps must lie in (0, 0.5], got {}'.format(self.eps))

    @property
    def jump_h(self):
        return self.eps * self.h0

    @property
    def h1(self):
        return (1 + self.eps) * self.h0

    @property
    def jump_u(self):
        '''Rankine-Hugoniot velocity jump of a bore moving into still water.'''
        return np.sqrt(self.g * (self.h1 + self.h0) / (2 * self.h0 * self.h1)) * self.jump_h

    @property
    def froude(self):
        return np.sqrt((1 + self.eps) * (1 + self.eps / 2))

    @property
    def speed(self):
        return self.froude * np.sqrt(self.g * self.h0)


@dataclass
class Scenario:
    '''
    initial(x) and exact(x, t) return dicts of fields ('h', 'u' and
    optionally 'w', 'eta'); source(t, x) returns a dict of source terms keyed
    the same way. `models` restricts the models a scenario makes sense for.
    '''
    name: str
    domain: tuple
    n: int
    t_end: float
    bathymetry: Callable
    initial: Callable
    exact: Optional[Callable] = None
    source: Optional[Callable] = None
    params: dict = field(default_factory=dict)
    gauges: tuple = ()
    window: Optional[tuple] = None
    threshold: Optional[float] = None
    models: Optional[tuple] = None
    description: str = ''

    def fields(self, x):
        out = self.initial(x)
        h = out['h']
        if not np.all(h > 0):
            raise InvalidArgument('scenario {} has a non-positive initial height'.format(self.name))
        return out

    def source_for(self, variables):
        '''Source hook (t, x) -> array for a model with the given variables.'''
        if self.source is None:
            return None
        source = self.source

        def hook(t, x):
            terms = source(t, x)
            return np.vstack([terms.get(v, np.zeros_like(x)) for v in variables])
        return hook


def periodic_step(x, x0, alpha, length):
    '''
    Smoothed step that is 1 behind (left of) x0 and 0 ahead of it, with the
    reverse step at x0 + length / 2. Smooth across the periodic boundary.
    '''
    y = np.mod(x - x0, length)
    return 0.5 * (np.tanh((y - length / 2) / alpha) - np.tanh((y - length) / alpha)
                  - np.tanh(y / alpha)) + 0.5


# solitary wave

def soliton_exact(x, t, params, length=None):
    '''
    h = h_inf (1 + eps sech^2(kappa (x - C t - x0))), u = C (1 - h_inf / h).
    With `length` the solution is wrapped onto a periodic domain.
    '''
    xi = np.asarray(x, dtype=float) - params.x0 - params.speed * t
    if length is not None:
        xi = np.mod(xi + length / 2, length) - length / 2
    h = params.h_inf * (1 + params.eps / np.cosh(params.kappa * xi) ** 2)
    u = params.speed * (1 - params.h_inf / h)
    return h, u


def soliton(h_inf=1., amplitude=0.2, x0=0., domain=(-50., 50.), n=512, transits=1., g=GRAVITY):
    params = SolitonParams(h_inf, amplitude, g, x0)
    length = domain[1] - domain[0]

    def initial(x):
        h, u = soliton_exact(x, 0., params, length)
        return {'h': h, 'u': u}

    def exact(x, t):
        h, u = soliton_exact(x, t, params, length)
        return {'h': h, 'u': u}

    return Scenario('soliton', tuple(domain), n, transits * length / params.speed,
                    bathymetry=_flat, initial=initial, exact=exact,
                    params={'soliton': params, 'transits': transits},
                    models=('sgn-original', 'sgn-hyperbolic'),
                    description='solitary wave travelling over a periodic domain')


def _flat(x):
    return np.zeros_like(x)


def _cosine_bathymetry(x):
    return 0.25 * np.cos(np.pi * x / 75)


# Gaussian hump and lake at rest

def gaussian_ic(kind='flat', domain=(-150., 150.), n=1000, t_end=35.):
    if kind not in ('flat', 'variable'):
        raise InvalidArgument('Gaussian bathymetry must be flat or variable, got {!r}'.format(kind))
    bathymetry = _flat if kind == 'flat' else _cosine_bathymetry

    def initial(x):
        return {'h': 1 + np.exp(-x ** 2) - bathymetry(x), 'u': np.full_like(x, 1e-2)}

    return Scenario('gaussian-' + kind, tuple(domain), n, t_end, bathymetry=bathymetry,
                    initial=initial, params={'kind': kind},
                    description='Gaussian hump of the total water height, {} bottom'.format(kind))


def lake_at_rest(domain=(-150., 150.), n=1000, t_end=10.):

    def initial(x):
        return {'h': 1 - _cosine_bathymetry(x), 'u': np.zeros_like(x)}

    def exact(x, t):
        return initial(x)

    return Scenario('lake-at-rest', tuple(domain), n, t_end, bathymetry=_cosine_bathymetry,
                    initial=initial, exact=exact,
                    description='still water over a cosine bottom')


# Riemann problem and soliton fission

def riemann_predictions(params):
    '''Intermediate state of the rarefaction and amplitude of the leading wave.'''
    hl, hr, g = params.h_left, params.h_right, params.g
    h_star = (np.sqrt(hl) + np.sqrt(hr)) ** 2 / 4
    u_star = 2 * (np.sqrt(g * h_star) - np.sqrt(g * hr))
    delta0 = abs(hr - hl)
    return {'h_star': h_star, 'u_star': u_star, 'delta0': delta0,
            'a_plus': delta0 - delta0 ** 2 / 12}


def riemann_ic(params=None, domain=(-600., 600.), n=4000, t_end=47.434):
    params = params or RiemannParams()
    length = domain[1] - domain[0]

    def initial(x):
        s = periodic_step(x, params.x0, params.alpha, length)
        return {'h': params.h_right + (params.h_left - params.h_right) * s, 'u': np.zeros_like(x)}

    predictions = riemann_predictions(params)
    # inside the tail of the rarefaction (speed u* - c*) and behind the fluid
    # that started at x0 (speed u*); the dispersive shock lies further ahead
    tail = predictions['u_star'] - np.sqrt(params.g * predictions['h_star'])
    plateau = (params.x0 + 0.75 * tail * t_end, params.x0 + 0.5 * predictions['u_star'] * t_end)
    return Scenario('riemann', tuple(domain), n, t_end, bathymetry=_flat, initial=initial,
                    params={'riemann': params, 'predictions': predictions, 'plateau': plateau},
                    window=(params.x0, domain[1] - length / 4),
                    threshold=params.h_right * 1.001,
                    models=('sgn-original', 'sgn-hyperbolic'),
                    description='smoothed dam break producing a dispersive shock')


def fission_ic(domain=(-500., 500.), n=1000, t_end=118., height=1.8, half_width=1.):

    def initial(x):
        return {'h': np.where(np.abs(x) < half_width, height, 1.), 'u': np.zeros_like(x)}

    return Scenario('fission', tuple(domain), n, t_end, bathymetry=_flat, initial=initial,
                    params={'height': height, 'half_width': half_width},
                    window=(390., 500.), threshold=1.001,
                    models=('sgn-original', 'sgn-hyperbolic'),
                    description='box of water decaying into a train of solitary waves')


# Favre waves

def dimensionless_time(t, h0=1., g=GRAVITY):
    return t * np.sqrt(g / h0)


def favre_ic(params=None, domain=(-300., 300.), n=3000, distance=63.5, t_end=None):
    '''
    Smoothed bore running into still water. Without t_end the run stops once
    the front has travelled `distance`.
    '''
    params = params or FavreParams(x0=domain[0] + (domain[1] - domain[0]) / 4)
    length = domain[1] - domain[0]
    if t_end is None:
        t_end = distance / params.speed

    def initial(x):
        s = periodic_step(x, params.x0, params.alpha, length)
        return {'h': params.h0 + params.jump_h * s, 'u': params.jump_u * s}

    front = params.x0 + params.speed * t_end
    return Scenario('favre', tuple(domain), n, t_end, bathymetry=_flat, initial=initial,
                    params={'favre': params, 'distance': distance, 'froude': params.froude},
                    window=(front - 40 * params.h0, front + 20 * params.h0),
                    threshold=params.h1 * 1.001,
                    models=('sgn-original', 'sgn-hyperbolic'),
                    description='undular bore, Froude number {:.4f}'.format(params.froude))


def favre_long(eps=0.2, h0=1., t_end=None, n=30000):
    params = FavreParams(h0=h0, eps=eps, x0=-1000.)
    return favre_ic(params, domain=(-3000., 3000.), n=n, distance=1500., t_end=t_end)


# Dingemans experiment

DINGEMANS_GAUGES = (3.04, 9.44, 20.04, 26.04, 30.44, 37.04)
DINGEMANS_PERIOD = 2.02 * np.sqrt(2)
# shifts the wave packet so that the first crest passes the first gauge near t = 25 s
DINGEMANS_OFFSET = 2.4


def dingemans_bathymetry(x):
    return np.interp(x, (11.01, 23.04, 27.04, 33.07), (0., 0.6, 0.6, 0.), left=0., right=0.)


def dispersion_wavenumber(period, h0, g=GRAVITY):
    '''Solve omega^2 = g k tanh(k h0) for k.'''
    omega = 2 * np.pi / period

    def residual(k):
        return g * k * np.tanh(k * h0) - omega ** 2
    k_shallow = omega / np.sqrt(g * h0)
    return brentq(residual, 0.1 * k_shallow, 10 * k_shallow + omega ** 2 / g, xtol=1e-14)


def dingemans_setup(h0=0.8, amplitude=0.02, domain=(-140., 100.), n=2000, t_end=70.,
                    velocity='long-wave', offset=DINGEMANS_OFFSET, reference=None, g=GRAVITY):
    '''
    Sinusoidal wave packet over a trapezoidal bar. `velocity` selects the
    initial velocity: 'long-wave' uses u = sqrt(g / h0) eta', 'euler' the
    phase speed of the Euler dispersion relation. `reference` names an
    optional CSV with measured gauge series (t, gauge1, ..., gauge6).
    '''
    if velocity not in ('long-wave', 'euler'):
        raise InvalidArgument('velocity relation must be long-wave or euler, got {!r}'.format(velocity))
    k = dispersion_wavenumber(DINGEMANS_PERIOD, h0, g)
    omega = 2 * np.pi / DINGEMANS_PERIOD
    support = (-34.5 * np.pi / k - offset, -4.5 * np.pi / k - offset)
    factor = np.sqrt(g / h0) if velocity == 'long-wave' else omega / k / h0

    def initial(x):
        inside = (x >= support[0]) & (x <= support[1])
        perturbation = np.where(inside, amplitude * np.cos(k * (x + offset)), 0.)
        return {'h': h0 - dingemans_bathymetry(x) + perturbation, 'u': factor * perturbation}

    measured = load_reference_csv(reference) if reference else None
    return Scenario('dingemans', tuple(domain), n, t_end, bathymetry=dingemans_bathymetry,
                    initial=initial,
                    params={'h0': h0, 'amplitude': amplitude, 'wavenumber': k,
                            'support': support, 'velocity': velocity, 'reference': measured},
                    gauges=DINGEMANS_GAUGES,
                    description='wave packet propagating over a submerged bar')


# manufactured solution

def manufactured_fields(x, t):
    '''Fields of the manufactured solution and their partial derivatives.'''
    th1 = 2 * np.pi * x
    th2 = 2 * np.pi * x - 4 * np.pi * t
    th3 = 2 * np.pi * x - np.pi * t
    f = {
        'h': 7 + 2 * np.cos(th1) + np.cos(th2),
        'h_x': -4 * np.pi * np.sin(th1) - 2 * np.pi * np.sin(th2),
        'h_t': 4 * np.pi * np.sin(th2),
        'u': np.sin(th3),
        'u_x': 2 * np.pi * np.cos(th3),
        'u_t': -np.pi * np.cos(th3),
        'u_xx': -4 * np.pi ** 2 * np.sin(th3),
        'u_xt': 2 * np.pi ** 2 * np.sin(th3),
        'b': -5 - 2 * np.cos(th1),
        'b_x': 4 * np.pi * np.sin(th1),
    }
    f['w'] = -f['h'] * f['u_x']
    f['w_x'] = -f['h_x'] * f['u_x'] - f['h'] * f['u_xx']
    f['w_t'] = -f['h_t'] * f['u_x'] - f['h'] * f['u_xt']
    f['eta'] = f['h']
    return f


def manufactured_sources(t, x, g=GRAVITY):
    '''
    Sources making the manufactured fields an exact solution of the
    hyperbolic system with bathymetry. With eta = h and w = -h u_x all
    relaxation terms vanish, so the h and u sources also serve the shallow
    water equations.
    '''
    f = manufactured_fields(x, t)
    h, u = f['h'], f['u']
    return {
        'h': f['h_t'] + f['h_x'] * u + h * f['u_x'],
        'u': f['u_t'] + g * (f['h_x'] + f['b_x']) + u * f['u_x'],
        'w': f['w_t'] + u * f['w_x'],
        'eta': f['h_t'] + u * f['h_x'] + h * f['u_x'] + 1.5 * u * f['b_x'],
    }


def manufactured(n=64, t_end=1., g=GRAVITY):

    def exact(x, t):
        f = manufactured_fields(x, t)
        return {k: f[k] for k in ('h', 'u', 'w', 'eta')}

    return Scenario('manufactured', (0., 1.), n, t_end,
                    bathymetry=lambda x: manufactured_fields(x, 0.)['b'],
                    initial=lambda x: exact(x, 0.), exact=exact,
                    source=lambda t, x: manufactured_sources(t, x, g),
                    models=('swe', 'sgn-hyperbolic'),
                    description='manufactured solution with variable bathymetry')


def _pop(kw, cls):
    names = cls.__dataclass_fields__
    return {k: kw.pop(k) for k in list(kw) if k in names}


def _riemann(**kw):
    return riemann_ic(RiemannParams(**_pop(kw, RiemannParams)), **kw)


def _favre(**kw):
    params = _pop(kw, FavreParams)
    domain = kw.get('domain', (-300., 300.))
    params.setdefault('x0', domain[0] + (domain[1] - domain[0]) / 4)
    return favre_ic(FavreParams(**params), **kw)


SCENARIOS = {
    'soliton': soliton,
    'gaussian-flat': lambda **kw: gaussian_ic('flat', **kw),
    'gaussian-variable': lambda **kw: gaussian_ic('variable', **kw),
    'lake-at-rest': lake_at_rest,
    'riemann': _riemann,
    'fission': fission_ic,
    'favre': _favre,
    'favre-long': favre_long,
    'dingemans': dingemans_setup,
    'manufactured': manufactured,
}


def list_scenarios():
    return sorted(SCENARIOS)


def get_scenario(name, **params):
    '''Build a scenario by name; keyword arguments override its defaults.'''
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise InvalidArgument('unknown scenario {!r}, valid names: {}'.format(
            name, ', '.join(list_scenarios())))
    if 'domain' in params:
        params['domain'] = tuple(params['domain'])
    try:
        return factory(**params)
    except TypeError as e:
        raise InvalidArgument('bad parameters for scenario {}: {}'.format(name, e))
