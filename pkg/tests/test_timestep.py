import numpy as np
import pytest

from sgnpy.exceptions import InvalidArgument, RelaxationFailure
from sgnpy.sbp import make_grid, make_operators
from sgnpy.swe import SWEModel
from sgnpy.timestep import (BS3, TABLEAUS, TSIT5, StepControl, controller_update, erk_step,
                            get_tableau, integrate, order_conditions, relaxation_gamma)
from sgnpy.utils.metrics import eoc


class Riccati(object):
    '''q' = -q^2 with q(0) = 1.'''

    def rhs(self, t, q):
        return -q ** 2

    def energy(self, q):
        return 0.5 * float(np.sum(q ** 2))

    @staticmethod
    def exact(t):
        return 1. / (1. + t)


class Rotation(object):
    '''Harmonic oscillator, conserving 1/2 |q|^2.'''

    def rhs(self, t, q):
        return np.array([-q[1], q[0]])

    def energy(self, q):
        return 0.5 * float(q @ q)


class Silent(object):

    def rhs(self, t, q):
        return np.zeros_like(q)

    def energy(self, q):
        return 0.


@pytest.mark.parametrize('tableau', list(TABLEAUS.values()), ids=list(TABLEAUS))
def test_tableau_order_conditions(tableau):
    assert np.allclose(tableau.a.sum(axis=1), tableau.c, atol=1e-13, rtol=0)
    for p in range(1, tableau.order + 1):
        assert max(order_conditions(tableau, p)) <= 1e-12
    for p in range(1, tableau.embedded_order + 1):
        assert max(order_conditions(tableau, p, tableau.b_hat)) <= 1e-12
    # the embedded solution is of lower order only
    assert max(order_conditions(tableau, tableau.embedded_order + 1, tableau.b_hat)) > 1e-6


def test_fsal_last_row():
    for tableau in (TSIT5, BS3):
        assert np.allclose(tableau.a[-1], tableau.b)


def test_get_tableau():
    assert get_tableau('bs3') is BS3
    with pytest.raises(InvalidArgument):
        get_tableau('rk4')


@pytest.mark.parametrize('tableau', [TSIT5, BS3], ids=['tsit5', 'bs3'])
def test_fixed_step_convergence(tableau):
    problem = Riccati()
    errors, steps = [], [10, 20, 40]
    for n in steps:
        traj = integrate(problem, np.array([1.]), (0., 1.), tableau, dt=1. / n)
        assert len(traj.times) == n + 1
        errors.append(abs(traj.final[0] - problem.exact(1.)))
    assert eoc(errors, steps)[-1] == pytest.approx(tableau.order, abs=0.3)


def test_adaptive_exponential():
    class Growth(Silent):
        def rhs(self, t, q):
            return q

    control = StepControl(abs_tol=1e-10, rel_tol=1e-10)
    traj = integrate(Growth(), np.array([1.]), (0., 1.), control=control)
    assert traj.t_final == pytest.approx(1., abs=1e-12)
    assert traj.final[0] == pytest.approx(np.e, rel=1e-8)
    assert all(dt > 0 for dt in traj.dt[1:])


def test_erk_step_of_zero_field():
    q = np.array([[1., 2.], [3., 4.]])
    q_new, err = erk_step(lambda t, q: np.zeros_like(q), q, 0., 0.1, TSIT5)
    assert np.array_equal(q_new, q) and err == 0
    with pytest.raises(InvalidArgument):
        erk_step(lambda t, q: q, q, 0., 0., TSIT5)


def test_zero_rhs_takes_one_step():
    traj = integrate(Silent(), np.ones(3), (0., 2.))
    assert traj.times == [0., 2.]
    assert np.array_equal(traj.final, np.ones(3))


def test_controller():
    control = StepControl()
    history = []
    accept, dt = controller_update(0., 0.1, history, control)
    assert accept and dt == pytest.approx(0.1 * control.max_factor)
    accept, dt = controller_update(1., 0.1, history, control)
    assert accept and len(history) == 2
    accept, dt = controller_update(2., 0.1, history, control)
    assert not accept and dt <= 0.1 * control.safety
    assert len(history) == 2
    accept, dt = controller_update(1e10, 0.1, history, control)
    assert dt == pytest.approx(0.1 * control.min_factor)
    with pytest.raises(InvalidArgument):
        controller_update(-1., 0.1, history, control)


def test_step_control_validation():
    with pytest.raises(InvalidArgument):
        StepControl(abs_tol=0.)
    k = TSIT5.embedded_order + 1
    assert StepControl().gains(TSIT5) == pytest.approx((0.7 / k, 0.4 / k))


def test_relaxation_gamma():
    energy = Rotation().energy
    result = relaxation_gamma(np.array([1., 0.]), np.array([-0.1, 0.5]), energy)
    assert result.gamma == pytest.approx(0.2 / 0.26, rel=1e-13)
    assert result.residual <= 1e-15
    assert relaxation_gamma(np.array([1., 0.]), np.zeros(2), energy).gamma == 1.


def test_relaxation_failure():
    # roots at gamma = 0 and 4 only
    with pytest.raises(RelaxationFailure):
        relaxation_gamma(np.array([1., 0.]), np.array([-0.1, 0.2]), Rotation().energy)


def test_relaxation_conserves_quadratic_energy():
    problem = Rotation()
    q0 = np.array([1., 0.])
    plain = integrate(problem, q0, (0., 20.), BS3, dt=0.1)
    relaxed = integrate(problem, q0, (0., 20.), BS3, dt=0.1, relax=True)
    assert plain.drift('energy') > 1e-6
    assert relaxed.drift('energy') <= 1e-13
    assert relaxed.t_final == pytest.approx(20., abs=1e-6)
    assert not relaxed.flagged
    assert all(abs(g - 1) < 0.05 for g in relaxed.gamma)


@pytest.mark.parametrize('dt', [0.1, 0.05])
def test_relaxation_parameter_of_rotation(dt):
    # closed form for the three-stage third-order stability polynomial
    q_new, _ = erk_step(Rotation().rhs, np.array([1., 0.]), 0., dt, BS3)
    result = relaxation_gamma(np.array([1., 0.]), q_new - np.array([1., 0.]), Rotation().energy)
    assert result.gamma == pytest.approx(1. / (1 - dt ** 2 / 12 + dt ** 4 / 36), rel=1e-12)


def test_relaxation_parameter_scales_with_method_order():
    problem = Rotation()
    deviations = []
    for dt in (0.1, 0.05):
        traj = integrate(problem, np.array([1., 0.]), (0., 2.), BS3, dt=dt, relax=True)
        deviations.append(max(abs(g - 1) for g in traj.gamma[1:]))
    # gamma - 1 = O(dt^(p - 1))
    assert np.log2(deviations[0] / deviations[1]) == pytest.approx(BS3.order - 1, abs=0.05)


def _swe_problem(n=64):
    ops = make_operators(make_grid(-5., 5., n), 4)
    x = ops.grid.nodes
    model = SWEModel(ops)
    q0 = model.pack(1 + 0.1 * np.exp(-x ** 2), 0.05 * np.sin(2 * np.pi * x / 10))
    return model, q0


def test_relaxed_swe_conserves_energy_and_mass():
    model, q0 = _swe_problem()
    traj = integrate(model, q0, (0., 1.), TSIT5, StepControl(abs_tol=1e-6, rel_tol=1e-6), relax=True)
    inv = traj.invariants
    assert inv.relative_drift('energy') <= 1e-12
    assert inv.relative_drift('mass') <= 1e-13


def test_snapshots_callbacks_and_states():
    model, q0 = _swe_problem(32)
    seen = []
    traj = integrate(model, q0, (0., 0.5), save_times=[0., 0.2, 0.35], store_states=True,
                     callbacks=[lambda t, q, tr: seen.append(t)])
    assert [t for t, _ in traj.snapshots] == pytest.approx([0., 0.2, 0.35], abs=1e-12)
    assert seen == traj.times[1:]
    assert len(traj.states) == len(traj.times)
    assert traj.nrhs > 0


def test_invalid_interval():
    with pytest.raises(InvalidArgument):
        integrate(Silent(), np.ones(2), (1., 1.))
    with pytest.raises(InvalidArgument):
        integrate(Silent(), np.ones(2), (0., 1.), dt=-0.1)
