'''
Single simulations and parameter studies built from a RunConfig.
'''

import copy
import logging
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import elliptic
from .exceptions import ConfigError, InvalidArgument, NotFound, NumericalFailure, SGNError
from .hyperbolic import HyperbolicModel
from .original import OriginalModel, elliptic_operator
from .sbp import make_grid, make_operators
from .scenarios import get_scenario
from .swe import SWEModel
from .timestep import StepControl, get_tableau, integrate
from .utils import io
from .utils.metrics import (GaugeRecorder, eoc, growth_exponent, l2_error, leading_wave,
                            plateau_mean)
from .viscosity import AvConfig
from .config import output_directory

logger = logging.getLogger(__name__)

STUDY_KINDS = ('grid-convergence', 'lambda-convergence', 'dt-conservation', 'froude-sweep',
               'error-growth', 'manufactured')


def build_model(cfg, ops, b):
    m = cfg.model
    viscosity = AvConfig(enabled=cfg.viscosity.enabled, c=cfg.viscosity.c, order=cfg.viscosity.order)
    if m.name == 'swe':
        return SWEModel(ops, g=m.g, b=None if m.variant == 'flat' else b, viscosity=viscosity)
    if m.name == 'sgn-hyperbolic':
        return HyperbolicModel(ops, g=m.g, b=b, lam=m.lam,
                               bathymetry='variable' if m.variant == 'variable' else 'flat',
                               viscosity=viscosity)
    return OriginalModel(ops, g=m.g, b=b, variant=m.variant, operator_mode=m.operator_mode,
                         viscosity=viscosity, frozen=m.frozen)


class Simulation(object):
    '''
    A configured run: scenario, grid, operators, model and initial state.
    Set silent=False for a progress bar.
    '''

    def __init__(self, cfg, silent=True):
        self.cfg = cfg.validate()
        self.silent = silent
        try:
            self.scenario = get_scenario(cfg.scenario_name, **cfg.scenario_params)
        except InvalidArgument as e:
            raise ConfigError(str(e))
        sc = self.scenario
        if sc.models is not None and cfg.model.name not in sc.models:
            raise ConfigError('scenario {} does not apply to model {}, use one of {}'.format(
                sc.name, cfg.model.name, sc.models))
        domain = cfg.grid.domain or sc.domain
        n = cfg.grid.n or sc.n
        self.grid = make_grid(domain[0], domain[1], n)
        self.ops = make_operators(self.grid, cfg.model.order, upwind=cfg.model.operator_mode == 'upwind')
        x = self.grid.nodes
        b = sc.bathymetry(x)
        if cfg.model.variant == 'flat' and np.any(b != 0):
            logger.warning('scenario %s has a variable bottom but the %s variant ignores it',
                           sc.name, cfg.model.variant)
        self.model = build_model(cfg, self.ops, b)
        self.model.source = sc.source_for(self.model.variables)
        fields = sc.fields(x)
        if all(v in fields for v in self.model.variables):
            self.q0 = self.model.pack(*[fields[v] for v in self.model.variables])
        else:
            self.q0 = self.model.initial_state(fields['h'], fields['u'])
        self.t_end = cfg.time.t_end or sc.t_end

    @property
    def gauges(self):
        return tuple(self.cfg.output.gauges) or tuple(self.scenario.gauges)

    def rhs_norm(self):
        '''L2 norm of the initial tendencies; zero for a lake at rest.'''
        return l2_error(self.model.rhs(0., self.q0), np.zeros_like(self.q0), self.ops.M)

    def check_elliptic(self, q=None):
        '''
        Symmetry and positivity witnesses of the elliptic operator at q
        (default the initial state). The random test vectors are drawn with the
        configured seed.
        '''
        if not isinstance(self.model, OriginalModel):
            raise InvalidArgument('model {} has no elliptic operator'.format(self.model.name))
        q = self.q0 if q is None else q
        A = elliptic_operator(self.model.state(q), self.ops)
        witnesses = elliptic.verify_spd(A, seed=self.cfg.seed)
        if not witnesses['min_rayleigh'] > 0:
            raise NumericalFailure('elliptic operator is not positive definite '
                                   '(min Rayleigh quotient {:.3e})'.format(witnesses['min_rayleigh']))
        logger.debug('elliptic operator: symmetry residual %.3e, min Rayleigh quotient %.6g',
                     witnesses['symmetry_residual'], witnesses['min_rayleigh'])
        return witnesses

    def run(self, callbacks=(), store_states=None):
        if isinstance(self.model, OriginalModel):
            self.check_elliptic()
        t = self.cfg.time
        control = StepControl(abs_tol=t.abs_tol, rel_tol=t.rel_tol)
        callbacks = list(callbacks)
        recorder = None
        if self.gauges:
            recorder = GaugeRecorder(self.grid, self.model.b, self.gauges)
            recorder.record(0., self.q0)
            callbacks.append(recorder)
        store = self.cfg.output.store_states if store_states is None else store_states
        logger.info('running %s on %s with %s', self.scenario.name, self.grid, self.model.name)
        traj = integrate(self.model, self.q0, (0., self.t_end), get_tableau(t.method), control,
                         relax=t.relax, dt=t.dt, callbacks=callbacks,
                         save_times=self.cfg.output.snapshot_times, store_states=store,
                         silent=self.silent)
        traj.gauges = recorder
        return traj

    def errors(self, traj, t=None):
        '''Discrete L2 errors per variable against the scenario's exact solution.'''
        if self.scenario.exact is None:
            raise InvalidArgument('scenario {} has no exact solution'.format(self.scenario.name))
        t = traj.t_final if t is None else t
        exact = self.scenario.exact(self.grid.nodes, t)
        q = traj.final
        return {v: l2_error(q[i], exact[v], self.ops.M)
                for i, v in enumerate(self.model.variables) if v in exact}

    def summary(self, traj):
        inv = traj.invariants
        out = {'t_end': traj.t_final, 'steps': len(traj.times) - 1, 'rejected': traj.nreject,
               'rhs_evaluations': traj.nrhs, 'wall_time': traj.wall_time,
               'mass_drift': inv.relative_drift('mass'),
               'momentum_drift': inv.relative_drift('momentum'),
               'energy_drift': inv.relative_drift('energy'),
               'flagged_steps': len(traj.flagged)}
        if self.scenario.exact is not None:
            for v, e in self.errors(traj).items():
                out['error_' + v] = e
        out.update(self._riemann_measurements(traj))
        return out

    def _riemann_measurements(self, traj):
        '''Plateau height and leading crest, at the scenario's own final time only.'''
        sc = self.scenario
        if 'plateau' not in sc.params or not np.isclose(traj.t_final, sc.t_end):
            return {}
        x, h = self.grid.nodes, traj.final[0]
        out = {'plateau_mean': plateau_mean(x, h, sc.params['plateau'])['mean']}
        try:
            wave = leading_wave(x, h, sc.window, sc.threshold, baseline=sc.params['riemann'].h_right)
        except NotFound as e:
            logger.warning('no leading wave: %s', e)
        else:
            out['leading_crest'] = wave['crest']
        return out

    def write(self, traj, directory=None):
        directory = directory or output_directory(self.cfg)
        os.makedirs(directory, exist_ok=True)
        written = []

        def path(name):
            written.append(os.path.join(directory, name))
            return written[-1]

        x, b = self.grid.nodes, self.model.b
        io.save_invariants(path('invariants.csv'), traj)
        for i, (t, q) in enumerate(traj.snapshots):
            io.save_snapshot(path('snapshot_{:04d}.csv'.format(i)), x, b, q, self.model.variables)
        io.save_snapshot(path('final.csv'), x, b, traj.final, self.model.variables)
        if traj.gauges is not None:
            io.save_gauges(path('gauges.csv'), traj.gauges.times, traj.gauges.series)
        reference = self.scenario.params.get('reference')
        if reference is not None:
            np.savetxt(path('gauges_reference.csv'), reference, fmt=io.FMT, delimiter=',')
        logger.info('wrote %d files to %s', len(written), directory)
        return written


# studies

def _with(cfg, **changes):
    '''Copy of cfg with section__field keys set; bare keys go to the scenario.'''
    cfg = copy.deepcopy(cfg)
    for key, value in changes.items():
        section, _, name = key.partition('__')
        if name:
            setattr(getattr(cfg, section), name, value)
        else:
            cfg.scenario[section] = value
    return cfg


def _study_config(kind, base, value):
    if kind in ('grid-convergence', 'manufactured'):
        return _with(base, grid__n=int(value))
    if kind == 'lambda-convergence':
        return _with(base, model__lam=float(value))
    if kind == 'dt-conservation':
        return _with(base, time__dt=float(value))
    if kind == 'froude-sweep':
        return _with(base, eps=float(value))
    if kind == 'error-growth':
        return _with(base, time__relax=bool(value))
    raise InvalidArgument('unknown study kind {!r}, expected one of {}'.format(kind, STUDY_KINDS))


def _error_tracker(sim, samples):

    def track(t, q, traj):
        exact = sim.scenario.exact(sim.grid.nodes, t)
        samples.append((t, l2_error(q[0], exact['h'], sim.ops.M)))
    return track


def study_row(kind, cfg, value):
    '''Run one entry of a sweep. Failures are reported in the row.'''
    row = {'value': value}
    try:
        sim = Simulation(cfg)
        if kind == 'error-growth':
            samples = []
            traj = sim.run(callbacks=[_error_tracker(sim, samples)])
            t, e = np.array(samples).T
            row['exponent'] = growth_exponent(t, e)
        else:
            traj = sim.run()
        inv = traj.invariants
        row.update({'mass_error': inv.change('mass'), 'momentum_error': inv.change('momentum'),
                    'energy_error': inv.change('energy'), 'steps': len(traj.times) - 1})
        if sim.scenario.exact is not None:
            for v, err in sim.errors(traj).items():
                row['error_' + v] = err
        if kind == 'froude-sweep':
            params = sim.scenario.params['favre']
            wave = leading_wave(sim.grid.nodes, traj.final[0], sim.scenario.window,
                                sim.scenario.threshold, baseline=params.h1)
            row.update({'froude': params.froude, 'a_max': wave['a_max'] / params.h0})
        row['status'] = 'ok'
    except (SGNError, NotFound) as e:
        logger.warning('%s run with %s failed: %s', kind, value, e)
        row['status'] = 'failed: {}'.format(e)
    return row


def _eoc_column(rows, key, sizes):
    good = [i for i, r in enumerate(rows) if r.get(key, 0) > 0]
    for a, b in zip(good[:-1], good[1:]):
        rows[b]['eoc_' + key] = eoc([rows[a][key], rows[b][key]], [sizes[a], sizes[b]])[0]


def run_study(kind, base, sweep, workers=1, output=None):
    '''
    Run `base` once per sweep value and aggregate errors, orders and
    amplitudes. Rows follow the order of `sweep`; with workers > 1 the runs
    are spread over processes.
    '''
    if kind not in STUDY_KINDS:
        raise InvalidArgument('unknown study kind {!r}, expected one of {}'.format(kind, STUDY_KINDS))
    if not sweep:
        raise InvalidArgument('empty sweep')
    if kind == 'manufactured':
        base = copy.deepcopy(base)
        base.scenario = {'name': 'manufactured'}
    configs = [_study_config(kind, base, v) for v in sweep]
    for c in configs:
        c.validate()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(study_row, [kind] * len(sweep), configs, sweep))
    else:
        rows = [study_row(kind, c, v) for c, v in zip(configs, sweep)]

    if kind in ('grid-convergence', 'manufactured', 'lambda-convergence'):
        for key in ('error_h', 'error_u'):
            _eoc_column(rows, key, [float(v) for v in sweep])
    elif kind == 'dt-conservation':
        _eoc_column(rows, 'energy_error', [1. / float(v) for v in sweep])
    columns = _study_columns(kind, rows)
    if output is not None:
        io.save_study(output, rows, columns)
    return rows, columns


_KEY = {'grid-convergence': 'n', 'manufactured': 'n', 'lambda-convergence': 'lambda',
        'dt-conservation': 'dt', 'froude-sweep': 'eps', 'error-growth': 'relax'}


def _study_columns(kind, rows):
    preferred = ['value', 'froude', 'a_max', 'exponent', 'error_h', 'eoc_error_h', 'error_u',
                 'eoc_error_u', 'error_w', 'error_eta', 'mass_error', 'momentum_error',
                 'energy_error', 'eoc_energy_error', 'steps', 'status']
    present = set().union(*rows)
    columns = [c for c in preferred if c in present]
    for r in rows:
        r[_KEY[kind]] = r['value']
    return [_KEY[kind]] + columns[1:]


def favre_reference_overlay(path, directory):
    '''Copy measured (Fr, a_max) data next to a Froude sweep; a missing file disables it.'''
    data = io.load_reference_csv(path)
    if data is None:
        return None
    out = os.path.join(directory, 'froude_reference.csv')
    np.savetxt(out, data, fmt=io.FMT, delimiter=',', header='Fr,a_max', comments='')
    return out
