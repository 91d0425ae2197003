import copy

import numpy as np
import pytest

from sgnpy.config import RunConfig
from sgnpy.exceptions import InvalidArgument
from sgnpy.runner import Simulation, build_model, run_study
from sgnpy.scenarios import riemann_predictions
from sgnpy.utils.metrics import eoc, leading_wave, plateau_mean


def _config(model='sgn-original', scenario='soliton', n=None, t_end=None, **model_options):
    cfg = RunConfig()
    cfg.model.name = model
    for key, value in model_options.items():
        setattr(cfg.model, key, value)
    cfg.scenario = scenario if isinstance(scenario, dict) else {'name': scenario}
    cfg.grid.n = n
    cfg.time.t_end = t_end
    return cfg.validate()


WELL_BALANCED = [
    ('swe', 'variable', 'central', 2),
    ('swe', 'variable', 'central', 6),
    ('sgn-hyperbolic', 'variable', 'central', 4),
    ('sgn-original', 'mild', 'central', 4),
    ('sgn-original', 'full', 'central', 6),
    ('sgn-original', 'mild', 'upwind', 3),
    ('sgn-original', 'full', 'upwind', 4),
]


@pytest.mark.parametrize('av', [False, True], ids=['plain', 'av'])
@pytest.mark.parametrize('model,variant,mode,order', WELL_BALANCED,
                         ids=['-'.join(map(str, c)) for c in WELL_BALANCED])
def test_well_balanced(model, variant, mode, order, av):
    cfg = _config(model, 'lake-at-rest', n=200, variant=variant, operator_mode=mode, order=order)
    cfg.viscosity.enabled = av
    sim = Simulation(cfg)
    assert sim.rhs_norm() <= 1e-13


def test_lake_at_rest_stays_at_rest():
    cfg = _config('sgn-original', 'lake-at-rest', n=100, t_end=1., variant='full')
    sim = Simulation(cfg)
    traj = sim.run()
    summary = sim.summary(traj)
    assert summary['error_h'] <= 1e-12 and summary['error_u'] <= 1e-12
    assert summary['energy_drift'] <= 1e-14


@pytest.mark.parametrize('mode', ['central', 'upwind'])
@pytest.mark.parametrize('order', [2, 4])
def test_soliton_grid_convergence(order, mode):
    # one transit of the periodic domain
    base = _config('sgn-original', 'soliton', order=order, operator_mode=mode)
    base.time.abs_tol = base.time.rel_tol = 1e-9
    rows, columns = run_study('grid-convergence', base, [128, 256, 512])
    assert all(r['status'] == 'ok' for r in rows)
    assert 'eoc_error_h' in columns
    errors = [r['error_h'] for r in rows]
    assert errors[0] > errors[1] > errors[2]
    assert abs(rows[-1]['eoc_error_h'] - order) <= 0.3
    assert abs(rows[-1]['eoc_error_u'] - order) <= 0.3


def test_upwind_soliton_is_accurate():
    cfg = _config('sgn-original', 'soliton', n=256, t_end=1., operator_mode='upwind', order=3)
    sim = Simulation(cfg)
    summary = sim.summary(sim.run())
    assert summary['error_h'] < 5e-3


def test_relaxation_conserves_energy():
    cfg = _config('sgn-original', 'soliton', n=128, t_end=1.)
    cfg.time.relax = True
    sim = Simulation(cfg)
    traj = sim.run()
    inv = traj.invariants
    assert inv.relative_drift('energy') <= 1e-12
    assert inv.relative_drift('mass') <= 1e-13
    assert not traj.flagged
    plain = Simulation(_config('sgn-original', 'soliton', n=128, t_end=1.)).run()
    assert plain.invariants.relative_drift('energy') > inv.relative_drift('energy')


def test_hyperbolic_relaxation_and_auxiliary_variables():
    cfg = _config('sgn-hyperbolic', 'soliton', n=128, t_end=0.5, variant='flat', lam=200.)
    cfg.time.relax = True
    sim = Simulation(cfg)
    assert sim.q0.shape == (4, 128)
    assert np.array_equal(sim.q0[3], sim.q0[0])
    traj = sim.run()
    assert traj.invariants.relative_drift('energy') <= 1e-12
    assert set(sim.errors(traj)) == {'h', 'u'}


def test_frozen_elliptic_operator():
    cfg = _config('sgn-original', 'soliton', n=128, t_end=0.5, frozen=True)
    sim = Simulation(cfg)
    summary = sim.summary(sim.run())
    exact = Simulation(_config('sgn-original', 'soliton', n=128, t_end=0.5))
    reference = exact.summary(exact.run())
    assert summary['error_h'] < max(1e-2, 10 * reference['error_h'])


def test_manufactured_convergence():
    base = _config('sgn-hyperbolic', 'manufactured', t_end=0.1, variant='variable', order=4, lam=50.)
    base.time.abs_tol = base.time.rel_tol = 1e-10
    rows, _ = run_study('manufactured', base, [32, 64])
    assert all(r['status'] == 'ok' for r in rows)
    assert rows[-1]['eoc_error_h'] == pytest.approx(4, abs=0.6)


def test_dt_conservation_with_relaxation():
    base = _config('sgn-original', 'soliton', n=64, t_end=0.2)
    base.time.relax = True
    rows, columns = run_study('dt-conservation', base, [0.05, 0.025])
    assert columns[0] == 'dt'
    for row in rows:
        assert row['status'] == 'ok'
        assert row['energy_error'] <= 1e-9
        assert row['mass_error'] <= 1e-10


def test_viscosity_never_adds_energy():
    cfg = _config('sgn-original', 'gaussian-flat', n=200, t_end=1., order=2)
    cfg.viscosity.enabled = True
    cfg.time.abs_tol = cfg.time.rel_tol = 1e-9
    traj = Simulation(cfg).run()
    energy = np.asarray(traj.energy)
    assert np.all(np.diff(energy) <= 1e-8 * abs(energy[0]))


def _viscous_energy_loss(order, dt):
    cfg = _config('sgn-original', 'gaussian-flat', n=1000, t_end=5., order=order,
                  operator_mode='upwind')
    cfg.viscosity.enabled = True
    cfg.time.dt = dt
    energy = Simulation(cfg).run().energy
    return energy[0] - energy[-1]


def test_viscous_energy_loss_is_spatial():
    second = [_viscous_energy_loss(2, dt) for dt in (0.05, 0.025)]
    fourth = [_viscous_energy_loss(4, dt) for dt in (0.05, 0.025)]
    assert min(second + fourth) > 0
    # a property of the semidiscretization, not of the time step
    assert second[0] == pytest.approx(second[1], rel=1e-3)
    assert fourth[0] == pytest.approx(fourth[1], rel=1e-3)
    assert second[1] >= 10 * fourth[1]


@pytest.mark.parametrize('relax', [False, True], ids=['plain', 'relaxed'])
def test_gaussian_conservation_in_time(relax):
    cfg = _config('sgn-original', 'gaussian-variable', n=1000, t_end=1., variant='full', order=2)
    cfg.time.dt = 0.05
    cfg.time.relax = relax
    inv = Simulation(cfg).run().invariants
    assert inv.relative_drift('mass') <= 1e-12
    if relax:
        assert inv.relative_drift('energy') <= 1e-13
    else:
        assert inv.relative_drift('energy') > 1e-13


def test_failed_runs_are_reported():
    base = _config('sgn-original', {'name': 'manufactured'})
    rows, _ = run_study('grid-convergence', base, [16])
    assert rows[0]['status'].startswith('failed')


def test_study_arguments():
    base = _config()
    with pytest.raises(InvalidArgument):
        run_study('bifurcation', base, [1])
    with pytest.raises(InvalidArgument):
        run_study('grid-convergence', base, [])


def test_errors_need_an_exact_solution():
    sim = Simulation(_config('swe', 'gaussian-flat', n=100, t_end=0.05))
    traj = sim.run()
    with pytest.raises(InvalidArgument):
        sim.errors(traj)
    assert 'error_h' not in sim.summary(traj)


def test_dingemans_gauges(tmp_path):
    cfg = _config('swe', 'dingemans', n=400, t_end=0.5, variant='variable')
    sim = Simulation(cfg)
    traj = sim.run()
    assert len(traj.gauges.series) == 6
    assert traj.gauges.times[0] == 0.
    written = sim.write(traj, str(tmp_path))
    assert str(tmp_path / 'gauges.csv') in written


def test_build_model_respects_variant():
    cfg = _config('sgn-hyperbolic', 'lake-at-rest', variant='flat')
    sim = Simulation(cfg)
    assert not sim.model.b.any()
    cfg = copy.deepcopy(cfg)
    cfg.model.variant = 'variable'
    model = build_model(cfg, sim.ops, np.ones(sim.grid.n))
    assert model.b.all()


@pytest.mark.slow
@pytest.mark.parametrize('model,variant', [('sgn-original', 'flat'), ('sgn-hyperbolic', 'flat')])
def test_riemann_plateau_and_leading_wave(model, variant):
    sim = Simulation(_config(model, 'riemann', variant=variant))
    traj = sim.run()
    sc = sim.scenario
    predicted = riemann_predictions(sc.params['riemann'])
    summary = sim.summary(traj)
    assert summary['plateau_mean'] == pytest.approx(predicted['h_star'], abs=0.01)
    assert summary['leading_crest'] == pytest.approx(1 + predicted['a_plus'], abs=0.03)
    plateau = plateau_mean(sim.grid.nodes, traj.final[0], sc.params['plateau'])
    assert plateau['spread'] < 0.05
    wave = leading_wave(sim.grid.nodes, traj.final[0], sc.window, sc.threshold, baseline=1.)
    assert wave['position'] > sc.params['plateau'][1]


@pytest.mark.slow
def test_lambda_convergence():
    base = _config('sgn-hyperbolic', 'soliton', n=500, t_end=1., variant='flat', order=6)
    base.time.abs_tol = base.time.rel_tol = 1e-9
    rows, _ = run_study('lambda-convergence', base, [100., 1000.], workers=2)
    assert rows[1]['eoc_error_h'] == pytest.approx(1., abs=0.1)


@pytest.mark.slow
def test_error_growth_with_relaxation():
    base = _config('sgn-original', 'soliton', n=128, order=6)
    base.scenario['transits'] = 20
    rows, _ = run_study('error-growth', base, [0, 1], workers=2)
    plain, relaxed = rows
    assert plain['exponent'] == pytest.approx(2., abs=0.4)
    assert relaxed['exponent'] == pytest.approx(1., abs=0.3)
    assert relaxed['energy_error'] < plain['energy_error']


@pytest.mark.slow
def test_froude_sweep():
    base = _config('sgn-original', 'favre')
    rows, columns = run_study('froude-sweep', base, [0.1, 0.2])
    assert columns[:3] == ['eps', 'froude', 'a_max']
    assert 0 < rows[0]['a_max'] < rows[1]['a_max']


def test_elliptic_check_uses_seed():
    cfg = _config('sgn-original', 'gaussian-variable', n=64, variant='full')
    first = Simulation(cfg).check_elliptic()
    again = Simulation(copy.deepcopy(cfg)).check_elliptic()
    assert first == again
    assert first['symmetry_residual'] <= 1e-10
    assert first['min_rayleigh'] > 0
    cfg.seed = 7
    other = Simulation(cfg).check_elliptic()
    assert other['min_rayleigh'] != first['min_rayleigh']
    with pytest.raises(InvalidArgument):
        Simulation(_config('swe', 'gaussian-flat', n=64)).check_elliptic()


def test_riemann_summary_measures_plateau_and_crest():
    scenario = {'name': 'riemann', 't_end': 2., 'n': 800}
    sim = Simulation(_config('sgn-original', scenario))
    summary = sim.summary(sim.run())
    assert 1. < summary['plateau_mean'] < 1.8
    assert summary['leading_crest'] > 1.001
    cut = Simulation(_config('sgn-original', scenario, t_end=1.))
    assert 'plateau_mean' not in cut.summary(cut.run())
