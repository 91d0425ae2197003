'''
Run configuration.

A run is described by a RunConfig, read from and written to TOML with the
sections [model], [grid], [time], [viscosity], [scenario] and [output]. The
[scenario] section is free-form: its keys besides `name` are handed to the
scenario factory.
'''

import os
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from .exceptions import ConfigError
from .hyperbolic import DEFAULT_LAMBDA
from .model import GRAVITY
from .sbp import CENTRAL_ORDERS, UPWIND_ORDERS
from .scenarios import list_scenarios
from .timestep import TABLEAUS

OUTPUT_DIR_ENV = 'SGNPY_OUTPUT_DIR'

MODELS = ('swe', 'sgn-hyperbolic', 'sgn-original')
VARIANTS = ('flat', 'mild', 'full', 'variable')


@dataclass
class ModelConfig:
    name: str = 'sgn-original'
    variant: str = 'flat'
    operator_mode: str = 'central'
    order: int = 4
    lam: float = DEFAULT_LAMBDA
    g: float = GRAVITY
    frozen: bool = False


@dataclass
class GridConfig:
    # None takes the scenario's defaults
    n: Optional[int] = None
    domain: Optional[List[float]] = None


@dataclass
class TimeConfig:
    t_end: Optional[float] = None
    method: str = 'tsit5'
    abs_tol: float = 1e-5
    rel_tol: float = 1e-5
    dt: Optional[float] = None
    relax: bool = False


@dataclass
class ViscosityConfig:
    enabled: bool = False
    c: float = 1.
    order: Optional[int] = None


@dataclass
class OutputConfig:
    directory: str = 'output'
    snapshot_times: List[float] = field(default_factory=list)
    gauges: List[float] = field(default_factory=list)
    store_states: bool = False


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    viscosity: ViscosityConfig = field(default_factory=ViscosityConfig)
    scenario: dict = field(default_factory=lambda: {'name': 'soliton'})
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    @property
    def scenario_name(self):
        return self.scenario.get('name', 'soliton')

    @property
    def scenario_params(self):
        return {k: v for k, v in self.scenario.items() if k != 'name'}

    def validate(self):
        m = self.model
        if m.name not in MODELS:
            raise ConfigError('unknown model {!r}, expected one of {}'.format(m.name, MODELS))
        if m.variant not in VARIANTS:
            raise ConfigError('unknown variant {!r}, expected one of {}'.format(m.variant, VARIANTS))
        if m.variant in ('mild', 'full') and m.name != 'sgn-original':
            raise ConfigError('variant {} is only available for sgn-original'.format(m.variant))
        if m.variant == 'variable' and m.name == 'sgn-original':
            raise ConfigError('sgn-original takes variant flat, mild or full, not variable')
        if m.lam != DEFAULT_LAMBDA and m.name != 'sgn-hyperbolic':
            raise ConfigError('lambda only applies to sgn-hyperbolic')
        if not m.lam > 0:
            raise ConfigError('lambda must be positive')
        if m.frozen and m.name != 'sgn-original':
            raise ConfigError('frozen elliptic operators only apply to sgn-original')
        if m.operator_mode not in ('central', 'upwind'):
            raise ConfigError('operator_mode must be central or upwind, got {!r}'.format(m.operator_mode))
        orders = UPWIND_ORDERS if m.operator_mode == 'upwind' else CENTRAL_ORDERS
        if m.order not in orders:
            raise ConfigError('{} operators come in orders {}, not {}'.format(
                m.operator_mode, orders, m.order))
        if self.grid.n is not None and self.grid.n < 4:
            raise ConfigError('grid needs at least four nodes')
        if self.grid.domain is not None and (
                len(self.grid.domain) != 2 or not self.grid.domain[1] > self.grid.domain[0]):
            raise ConfigError('domain must be [x_min, x_max] with x_max > x_min')
        t = self.time
        if t.t_end is not None and not t.t_end > 0:
            raise ConfigError('t_end must be positive')
        if t.method not in TABLEAUS:
            raise ConfigError('unknown method {!r}, expected one of {}'.format(t.method, sorted(TABLEAUS)))
        if not (t.abs_tol > 0 and t.rel_tol > 0):
            raise ConfigError('tolerances must be positive')
        if t.dt is not None and not t.dt > 0:
            raise ConfigError('fixed time step must be positive')
        if self.viscosity.c < 0:
            raise ConfigError('viscosity constant must be non-negative')
        if self.scenario_name not in list_scenarios():
            raise ConfigError('unknown scenario {!r}, valid names: {}'.format(
                self.scenario_name, ', '.join(list_scenarios())))
        return self


_SECTIONS = {'model': ModelConfig, 'grid': GridConfig, 'time': TimeConfig,
             'viscosity': ViscosityConfig, 'output': OutputConfig}


def _section(cls, values, name):
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError('unknown keys in [{}]: {}'.format(name, ', '.join(sorted(unknown))))
    return cls(**values)


def from_dict(data):
    data = dict(data)
    kwargs = {}
    for name, cls in _SECTIONS.items():
        kwargs[name] = _section(cls, data.pop(name, {}), name)
    kwargs['scenario'] = dict(data.pop('scenario', {'name': 'soliton'}))
    kwargs['scenario'].setdefault('name', 'soliton')
    if 'seed' in data:
        kwargs['seed'] = int(data.pop('seed'))
    if data:
        raise ConfigError('unknown sections: {}'.format(', '.join(sorted(data))))
    return RunConfig(**kwargs)


def _strip_none(d):
    # TOML has no null
    if isinstance(d, dict):
        return {k: _strip_none(v) for k, v in d.items() if v is not None}
    return d


def to_dict(cfg):
    return _strip_none(asdict(cfg))


def loads_config(text):
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError('malformed configuration: {}'.format(e))
    return from_dict(data)


def load_config(path):
    try:
        with open(path, 'rb') as f:
            data = tomllib.load(f)
    except OSError as e:
        raise ConfigError('cannot read configuration {}: {}'.format(path, e))
    except tomllib.TOMLDecodeError as e:
        raise ConfigError('malformed configuration {}: {}'.format(path, e))
    return from_dict(data)


def dumps_config(cfg):
    return tomli_w.dumps(to_dict(cfg))


def dump_config(cfg, path):
    with open(path, 'wb') as f:
        tomli_w.dump(to_dict(cfg), f)


def output_directory(cfg):
    '''The output directory, overridden by the SGNPY_OUTPUT_DIR environment variable.'''
    return os.environ.get(OUTPUT_DIR_ENV) or cfg.output.directory
