'''
Explicit Runge-Kutta time integration with embedded error estimates,
proportional-integral step size control and optional relaxation.

Relaxation scales each accepted update q^{n+1} - q^n by a factor gamma
chosen such that the discrete total energy is exactly conserved,

    E(q^n + gamma (q^{n+1} - q^n)) = E(q^n),

and advances the time by gamma dt. gamma = 1 + O(dt^{p-1}) for a method of
order p, so the accuracy of the base method is kept.
'''

import logging
import time as _time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from tqdm import tqdm

from .exceptions import InvalidArgument, NumericalFailure, RelaxationFailure, StateInvalid

logger = logging.getLogger(__name__)


class ButcherTableau(object):

    def __init__(self, name, a, b, b_hat, c, order, embedded_order, fsal=False):
        self.name = name
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.b_hat = np.asarray(b_hat, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.order = order
        self.embedded_order = embedded_order
        self.fsal = fsal
        s = len(self.b)
        assert self.a.shape == (s, s) and self.c.shape == (s,) and self.b_hat.shape == (s,)
        assert not np.triu(self.a).any(), 'explicit methods need a strictly lower triangular a'

    @property
    def stages(self):
        return len(self.b)

    @property
    def error_weights(self):
        return self.b - self.b_hat

    def __repr__(self):
        return 'ButcherTableau({}, {}({}))'.format(self.name, self.order, self.embedded_order)


# b - b_hat of the embedded fourth order solution
_TSIT5_BTILDE = np.array([-0.00178001105222577714, -0.0008164344596567469, 0.007880878010261995,
                          -0.1447110071732629, 0.5823571654525552, -0.45808210592918697,
                          1. / 66])

# Tsitouras 5(4), seven stages, first same as last
TSIT5 = ButcherTableau(
    'tsit5',
    a=[[0, 0, 0, 0, 0, 0, 0],
       [0.161, 0, 0, 0, 0, 0, 0],
       [-0.008480655492356989, 0.335480655492357, 0, 0, 0, 0, 0],
       [2.897153057105493, -6.359448489975075, 4.3622954328695815, 0, 0, 0, 0],
       [5.325864828439257, -11.748883564062828, 7.4955393428898365, -0.09249506636175525,
        0, 0, 0],
       [5.86145544294642, -12.92096931784711, 8.159367898576159, -0.071584973281401,
        -0.028269050394068383, 0, 0],
       [0.09646076681806523, 0.01, 0.4798896504144996, 1.379008574103742,
        -3.290069515436081, 2.324710524099774, 0]],
    b=[0.09646076681806523, 0.01, 0.4798896504144996, 1.379008574103742,
       -3.290069515436081, 2.324710524099774, 0],
    b_hat=np.array([0.09646076681806523, 0.01, 0.4798896504144996, 1.379008574103742,
                    -3.290069515436081, 2.324710524099774, 0]) - _TSIT5_BTILDE,
    c=[0, 0.161, 0.327, 0.9, 0.9800255409045097, 1, 1],
    order=5, embedded_order=4, fsal=True)

# Bogacki-Shampine 3(2), four stages, first same as last
BS3 = ButcherTableau(
    'bs3',
    a=[[0, 0, 0, 0],
       [1. / 2, 0, 0, 0],
       [0, 3. / 4, 0, 0],
       [2. / 9, 1. / 3, 4. / 9, 0]],
    b=[2. / 9, 1. / 3, 4. / 9, 0],
    b_hat=[7. / 24, 1. / 4, 1. / 3, 1. / 8],
    c=[0, 1. / 2, 3. / 4, 1],
    order=3, embedded_order=2, fsal=True)

TABLEAUS = {t.name: t for t in (TSIT5, BS3)}


def get_tableau(name):
    try:
        return TABLEAUS[name]
    except KeyError:
        raise InvalidArgument('unknown Runge-Kutta method {!r}, expected one of {}'.format(
            name, sorted(TABLEAUS)))


def order_conditions(tableau, order, weights=None):
    '''
    Residuals of the order conditions of the given order for the weights b
    (default) or any other weight vector, e.g. tableau.b_hat.
    '''
    A, c = tableau.a, tableau.c
    b = tableau.b if weights is None else np.asarray(weights)
    Ac = A @ c
    conditions = {
        1: [(b.sum(), 1.)],
        2: [(b @ c, 1. / 2)],
        3: [(b @ c ** 2, 1. / 3), (b @ Ac, 1. / 6)],
        4: [(b @ c ** 3, 1. / 4), (b @ (c * Ac), 1. / 8),
            (b @ (A @ c ** 2), 1. / 12), (b @ (A @ Ac), 1. / 24)],
        5: [(b @ c ** 4, 1. / 5), (b @ (c ** 2 * Ac), 1. / 10), (b @ Ac ** 2, 1. / 20),
            (b @ (c * (A @ c ** 2)), 1. / 15), (b @ (c * (A @ Ac)), 1. / 30),
            (b @ (A @ c ** 3), 1. / 20), (b @ (A @ (c * Ac)), 1. / 40),
            (b @ (A @ A @ c ** 2), 1. / 60), (b @ (A @ A @ Ac), 1. / 120)],
    }
    return [abs(value - target) for value, target in conditions[order]]


@dataclass
class StepControl:
    abs_tol: float = 1e-5
    rel_tol: float = 1e-5
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 5.0
    # PI gains; None selects 0.7 / k and 0.4 / k with k = embedded order + 1
    beta1: Optional[float] = None
    beta2: Optional[float] = None
    max_rejects: int = 50

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InvalidArgument('tolerances must be positive')

    def gains(self, tableau):
        k = tableau.embedded_order + 1
        beta1 = self.beta1 if self.beta1 is not None else 0.7 / k
        beta2 = self.beta2 if self.beta2 is not None else 0.4 / k
        return beta1, beta2


@dataclass
class RelaxationResult:
    gamma: float
    residual: float
    iterations: int


def error_norm(err, q, q_new, control):
    scale = control.abs_tol + control.rel_tol * np.maximum(np.abs(q), np.abs(q_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def erk_step(f, q, t, dt, tableau, control=None, k1=None, return_stages=False):
    '''
    One explicit Runge-Kutta step. Returns (q_new, error_norm), where the
    error norm is the weighted RMS norm of the embedded error estimate; with
    return_stages=True the stage derivatives are returned as well.
    '''
    if not dt > 0:
        raise InvalidArgument('time step must be positive, got {}'.format(dt))
    control = control or StepControl()
    A, c = tableau.a, tableau.c
    k = []
    for i in range(tableau.stages):
        if i == 0 and k1 is not None:
            k.append(k1)
            continue
        qi = q
        for j in range(i):
            if A[i, j] != 0:
                qi = qi + dt * A[i, j] * k[j]
        k.append(f(t + c[i] * dt, qi))
    q_new = q + dt * sum(bi * ki for bi, ki in zip(tableau.b, k) if bi != 0)
    err = dt * sum(ei * ki for ei, ki in zip(tableau.error_weights, k) if ei != 0)
    norm = error_norm(err, q, q_new, control)
    if return_stages:
        return q_new, norm, k
    return q_new, norm


def controller_update(error_norm, dt, history, control=None, tableau=TSIT5):
    '''
    PI step size controller. `history` is a list of the error norms of the
    previously accepted steps; it is appended to on acceptance.
    '''
    if error_norm < 0:
        raise InvalidArgument('error norm must be non-negative')
    control = control or StepControl()
    beta1, beta2 = control.gains(tableau)
    err_prev = history[-1] if history else 1.
    accept = error_norm <= 1.
    if error_norm == 0:
        factor = control.max_factor
    else:
        factor = control.safety * error_norm ** (-beta1) * max(err_prev, 1e-10) ** beta2
        factor = min(control.max_factor, max(control.min_factor, factor))
    if accept:
        history.append(error_norm)
    else:
        factor = min(factor, control.safety)
    return accept, dt * factor


def relaxation_gamma(state, increment, energy_fn, bracket=(0.5, 1.5), widened=(0.25, 2.0),
                     rtol=1e-14):
    '''
    Solve energy_fn(state + gamma * increment) = energy_fn(state) for gamma
    by bracketed root finding. The bracket is widened once before giving up
    with RelaxationFailure.
    '''
    if not np.any(increment):
        return RelaxationResult(1., 0., 0)
    e0 = energy_fn(state)

    def defect(gamma):
        return energy_fn(state + gamma * increment) - e0

    r1 = defect(1.)
    if r1 == 0:
        return RelaxationResult(1., 0., 0)
    for lo, hi in (bracket, widened):
        flo, fhi = defect(lo), defect(hi)
        if np.sign(flo) * np.sign(fhi) <= 0:
            break
    else:
        raise RelaxationFailure('no energy-conserving relaxation parameter in {}'.format(widened))
    if flo == 0:
        return RelaxationResult(lo, 0., 0)
    if fhi == 0:
        return RelaxationResult(hi, 0., 0)
    gamma, info = brentq(defect, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                         maxiter=200, full_output=True)
    residual = abs(defect(gamma))
    if residual > rtol * max(abs(e0), 1.) * 1e2:
        logger.debug('relaxation residual %.3e at gamma = %.16f', residual, gamma)
    return RelaxationResult(float(gamma), float(residual), int(info.iterations))


class Trajectory(object):
    '''
    Result of an integration: accepted times, invariant series, relaxation
    parameters and, on request, the states.
    '''

    def __init__(self, grid=None, b=None):
        self.grid = grid
        self.b = b
        self.times = []
        self.states = []
        self.mass = []
        self.momentum = []
        self.energy = []
        self.gamma = []
        self.dt = []
        self.snapshots = []
        self.flagged = []
        self.gauges = None
        self.nreject = 0
        self.nrhs = 0
        self.wall_time = 0.

    def record(self, t, q, invariants, gamma, dt, store):
        self.times.append(t)
        self.mass.append(invariants['mass'])
        self.momentum.append(invariants['momentum'])
        self.energy.append(invariants['energy'])
        self.gamma.append(gamma)
        self.dt.append(dt)
        if store:
            self.states.append(q.copy())

    @property
    def t_final(self):
        return self.times[-1]

    @property
    def final(self):
        return self._final

    def drift(self, which='energy'):
        series = np.asarray(getattr(self, which))
        scale = abs(series[0]) if series[0] != 0 else 1.
        return float(np.max(np.abs(series - series[0])) / scale)

    @property
    def invariants(self):
        from .utils.metrics import InvariantSeries
        return InvariantSeries(np.asarray(self.times), np.asarray(self.mass),
                               np.asarray(self.momentum), np.asarray(self.energy),
                               np.asarray(self.gamma), np.asarray(self.dt))


def initial_step(f, q, t, tableau, control, span):
    '''Starting step size heuristic of Hairer, Norsett and Wanner.'''
    f0 = f(t, q)
    scale = control.abs_tol + control.rel_tol * np.abs(q)
    d0 = np.sqrt(np.mean((q / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    if d1 <= 1e-15:
        return span, f0
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = f(t + h0, q + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, 1e-3 * h0)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1. / (tableau.order + 1))
    return min(100 * h0, h1, span), f0


def integrate(problem, q0, t_span, tableau=TSIT5, control=None, relax=False, dt=None,
              callbacks=(), save_times=(), store_states=False, silent=True):
    '''
    Integrate dq/dt = problem.rhs(t, q) over t_span.

    problem must provide rhs(t, q) and energy(q); mass(q) and momentum(q)
    are recorded when present. With dt given the step size is fixed (the
    final step is clipped), otherwise the PI controller adapts it. With
    relax=True each accepted step is relaxed to conserve the energy and the
    time advances by gamma * dt. Callbacks are called as cb(t, q, trajectory)
    on every accepted step.
    '''
    t0, t_end = map(float, t_span)
    if not t_end > t0:
        raise InvalidArgument('empty time interval {}'.format(t_span))
    control = control or StepControl()
    span = t_end - t0
    eps_t = 1e-12 * max(span, abs(t_end))
    save_times = sorted(s for s in save_times if t0 <= s <= t_end)
    traj = Trajectory(getattr(problem, 'grid', None), getattr(problem, 'b', None))

    def invariants(q):
        out = {'mass': problem.mass(q) if hasattr(problem, 'mass') else np.nan,
               'momentum': problem.momentum(q) if hasattr(problem, 'momentum') else np.nan,
               'energy': problem.energy(q)}
        return out

    nrhs = [0]

    def f(t, q):
        nrhs[0] += 1
        return problem.rhs(t, q)

    start = _time.perf_counter()
    q = np.array(q0, dtype=float)
    t = t0
    traj.record(t, q, invariants(q), 1., 0., store_states)
    while save_times and save_times[0] <= t0 + eps_t:
        traj.snapshots.append((t, q.copy()))
        save_times.pop(0)

    adaptive = dt is None
    history = []
    if adaptive:
        dt_next, k1 = initial_step(f, q, t, tableau, control, span)
    else:
        if not dt > 0:
            raise InvalidArgument('fixed time step must be positive')
        dt_next, k1 = float(dt), None
    on_step_start = getattr(problem, 'on_step_start', None)
    rejects = 0
    bar = tqdm(total=span, disable=silent, unit='s', unit_scale=True, leave=False)
    try:
        while t_end - t > eps_t:
            dt_try = min(dt_next, t_end - t)
            if save_times:
                dt_try = min(dt_try, save_times[0] - t)
            if on_step_start is not None:
                on_step_start(t, q)
            try:
                q_new, err, k = erk_step(f, q, t, dt_try, tableau, control, k1=k1,
                                         return_stages=True)
                if not np.all(np.isfinite(q_new)):
                    raise NumericalFailure('non-finite state', time=t)
            except (StateInvalid, NumericalFailure) as e:
                rejects += 1
                traj.nreject += 1
                logger.debug('step at t = %.6g with dt = %.3e failed: %s', t, dt_try, e)
                if rejects > control.max_rejects:
                    raise NumericalFailure('step size control failed at t = {:.6g}: {}'.format(t, e),
                                           time=t)
                dt_next = 0.5 * dt_try
                continue

            if adaptive:
                accept, dt_next = controller_update(err, dt_try, history, control, tableau)
                if not accept:
                    rejects += 1
                    traj.nreject += 1
                    logger.debug('rejected step at t = %.6g, dt = %.3e, error = %.3e', t, dt_try, err)
                    if rejects > control.max_rejects:
                        raise NumericalFailure('too many rejected steps at t = {:.6g}'.format(t), time=t)
                    continue
            else:
                dt_next = float(dt)
            rejects = 0

            gamma = 1.
            if relax:
                try:
                    gamma = relaxation_gamma(q, q_new - q, problem.energy).gamma
                except RelaxationFailure as e:
                    logger.warning('relaxation failed at t = %.6g (%s); using gamma = 1', t, e)
                    traj.flagged.append(t)
                    gamma = 1.
            if gamma == 1.:
                q = q_new
                k1 = k[-1] if tableau.fsal else None
            else:
                q = q + gamma * (q_new - q)
                k1 = None
            t_old = t
            t = t + gamma * dt_try
            bar.update(t - t_old)
            traj.record(t, q, invariants(q), gamma, dt_try, store_states)
            if save_times and t >= save_times[0] - eps_t:
                traj.snapshots.append((t, q.copy()))
                save_times.pop(0)
            for cb in callbacks:
                cb(t, q, traj)
            # relaxation may stop marginally short of the end
            if relax and t_end - t < 1e-10 * span:
                break
    finally:
        bar.close()
    traj._final = q
    traj.nrhs = nrhs[0]
    traj.wall_time = _time.perf_counter() - start
    logger.info('integrated to t = %.6g in %d steps (%d rejected, %d rhs evaluations)',
                t, len(traj.times) - 1, traj.nreject, traj.nrhs)
    return traj
