import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..exceptions import FitFailed, InvalidArgument, NotFound
from ..model import GRAVITY

logger = logging.getLogger(__name__)


@dataclass
class InvariantSeries:
    times: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray
    energy: np.ndarray
    gamma: np.ndarray
    dt: np.ndarray

    def __post_init__(self):
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise InvalidArgument('invariant series needs strictly increasing times')

    def change(self, which):
        '''|I(t_end) - I(0)|'''
        series = getattr(self, which)
        return float(abs(series[-1] - series[0]))

    def relative_drift(self, which):
        '''max_t |I(t) - I(0)| / |I(0)|, absolute when I(0) = 0'''
        series = getattr(self, which)
        scale = abs(series[0]) or 1.
        return float(np.max(np.abs(series - series[0])) / scale)


@dataclass
class SolitonFit:
    amplitude: float
    x0: float
    baseline: float
    residual: float


def l2_error(f, ref, M):
    '''sqrt(sum_i w_i (f_i - ref_i)^2), summed over all variables for stacked fields'''
    f, ref = np.asarray(f), np.asarray(ref)
    if f.shape != ref.shape:
        raise InvalidArgument('length mismatch {} vs {}'.format(f.shape, ref.shape))
    return float(np.sqrt(np.sum(M.quadrature((f - ref) ** 2))))


def eoc(errors, sizes):
    '''Experimental orders of convergence -log(e2 / e1) / log(N2 / N1) of successive pairs.'''
    errors = np.asarray(errors, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    if errors.shape != sizes.shape or len(errors) < 2:
        raise InvalidArgument('eoc needs at least two matching errors and sizes')
    if np.any(errors <= 0) or np.any(sizes <= 0):
        raise InvalidArgument('eoc needs positive errors and sizes')
    return list(-np.log(errors[1:] / errors[:-1]) / np.log(sizes[1:] / sizes[:-1]))


def interpolate_periodic(grid, f, xq):
    '''Linear interpolation of nodal values f at the points xq of a periodic grid.'''
    xq = np.atleast_1d(np.asarray(xq, dtype=float))
    if np.any(xq < grid.x_min) or np.any(xq > grid.x_max):
        raise InvalidArgument('interpolation point outside [{}, {}]'.format(grid.x_min, grid.x_max))
    s = (xq - grid.x_min) / grid.dx
    left = np.floor(s).astype(int)
    theta = s - left
    left = left % grid.n
    right = (left + 1) % grid.n
    return (1 - theta) * f[..., left] + theta * f[..., right]


def gauge_series(traj, x_gauge):
    '''
    Total water height h + b at x_gauge for each stored state of the
    trajectory. Needs an integration with store_states=True.
    '''
    if not traj.states:
        raise InvalidArgument('trajectory holds no states, integrate with store_states=True')
    b = np.zeros(traj.grid.n) if traj.b is None else traj.b
    surface = np.array([q[0] + b for q in traj.states])
    values = interpolate_periodic(traj.grid, surface, x_gauge)[:, 0]
    return np.asarray(traj.times), values


class GaugeRecorder(object):
    '''
    Integration callback recording h + b at fixed positions on every
    accepted step, without keeping the states.
    '''

    def __init__(self, grid, b, positions):
        self.grid = grid
        self.b = np.asarray(b, dtype=float)
        self.positions = np.asarray(positions, dtype=float)
        interpolate_periodic(grid, self.b, self.positions)  # validates the positions
        self.times = []
        self.values = []

    def record(self, t, q):
        self.times.append(t)
        self.values.append(interpolate_periodic(self.grid, q[0] + self.b, self.positions))

    def __call__(self, t, q, traj=None):
        self.record(t, q)

    @property
    def series(self):
        '''One array per gauge.'''
        return list(np.array(self.values).T)


def _window(x, window):
    lo, hi = window
    if not hi > lo:
        raise InvalidArgument('empty window {}'.format(window))
    mask = (x >= lo) & (x <= hi)
    if not mask.any():
        raise InvalidArgument('window {} contains no nodes'.format(window))
    return mask


def leading_wave(x, h, window, threshold, baseline=None):
    '''
    Largest crest of h inside the window, refined by a parabola through the
    maximal node and its neighbours. a_max is measured from `baseline`,
    by default the median of the window values not above the threshold.
    '''
    mask = _window(x, window)
    idx = np.flatnonzero(mask)
    hw = h[idx]
    if not np.any(hw > threshold):
        raise NotFound('no point above {} in {}'.format(threshold, window))
    if baseline is None:
        calm = hw[hw <= threshold]
        baseline = float(np.median(calm)) if calm.size else float(threshold)
    k = idx[np.argmax(hw)]
    n = len(h)
    fm, f0, fp = h[(k - 1) % n], h[k], h[(k + 1) % n]
    curvature = fm - 2 * f0 + fp
    delta = 0.5 * (fm - fp) / curvature if curvature < 0 else 0.
    crest = f0 - 0.25 * (fm - fp) * delta
    dx = x[1] - x[0]
    return {'a_max': float(crest - baseline), 'crest': float(crest),
            'position': float(x[k] + delta * dx), 'baseline': baseline}


def plateau_mean(x, h, window):
    '''Mean of h over the nodes of the window and its spread max - min.'''
    hw = h[_window(x, window)]
    return {'mean': float(np.mean(hw)), 'spread': float(np.ptp(hw))}


def soliton_profile(x, amplitude, x0, baseline, g=GRAVITY):
    eps = amplitude / baseline
    kappa = np.sqrt(3 * eps / (4 * baseline ** 2 * (1 + eps)))
    return baseline * (1 + eps / np.cosh(kappa * (x - x0)) ** 2)


def soliton_fit(x, h, window, threshold=None, g=GRAVITY, maxiter=500, tol=1e-10):
    '''
    Least-squares fit of a solitary wave h_b (1 + eps sech^2(kappa (x - x0)))
    to the points of the window above the threshold. The baseline h_b is the
    median of the remaining points; amplitude and centre are found by a
    Nelder-Mead search with kappa tied to the amplitude.
    '''
    mask = _window(x, window)
    xw, hw = x[mask], h[mask]
    if threshold is None:
        threshold = 1.001 * hw.min()
    crest = hw > threshold
    if crest.sum() < 3:
        raise NotFound('no crest above {} in {}'.format(threshold, window))
    calm = hw[~crest]
    baseline = float(np.median(calm)) if calm.size else float(threshold)
    xs, hs = xw[crest], hw[crest]

    def objective(p):
        amplitude, x0 = p
        if amplitude <= 0:
            return np.inf
        return np.sum((soliton_profile(xs, amplitude, x0, baseline, g) - hs) ** 2)

    start = (hs.max() - baseline, xs[np.argmax(hs)])
    res = minimize(objective, start, method='Nelder-Mead',
                   options={'xatol': tol, 'fatol': 1e-14, 'maxiter': maxiter})
    amplitude, x0 = res.x
    fit = SolitonFit(float(amplitude), float(x0), baseline, float(np.sqrt(res.fun / len(xs))))
    if not res.success:
        raise FitFailed('soliton fit did not converge: {}'.format(res.message), best=fit)
    logger.debug('soliton fit A = %.6g at x0 = %.6g, residual %.3e', fit.amplitude, fit.x0, fit.residual)
    return fit


def growth_exponent(times, errors, discard=0.1):
    '''
    Slope of the least-squares line through log(error) over log(t),
    ignoring the first `discard` fraction of the samples.
    '''
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if times.shape != errors.shape or len(times) < 5:
        raise InvalidArgument('growth exponent needs at least five samples')
    start = int(np.ceil(discard * len(times)))
    t, e = times[start:], errors[start:]
    if np.any(t <= 0) or np.any(e <= 0):
        raise InvalidArgument('growth exponent needs positive times and errors')
    if np.ptp(np.log(t)) == 0:
        raise InvalidArgument('degenerate time series')
    slope, _ = np.polyfit(np.log(t), np.log(e), 1)
    return float(slope)


def zero_crossing_wavelength(x, h, window, level):
    '''
    Mean distance between successive up-crossings of h through `level`
    within the window. Experimental estimate for undular bores.
    '''
    mask = _window(x, window)
    xw, f = x[mask], h[mask] - level
    up = np.flatnonzero((f[:-1] < 0) & (f[1:] >= 0))
    if len(up) < 2:
        raise NotFound('fewer than two up-crossings of {} in {}'.format(level, window))
    crossings = xw[up] - f[up] * (xw[up + 1] - xw[up]) / (f[up + 1] - f[up])
    return float(np.mean(np.diff(crossings)))
