'''
Plain-text CSV output of trajectories and studies, and ingestion of
measured reference series.
'''

import csv
import logging
import os

import numpy as np

logger = logging.getLogger(__name__)

FMT = '%.17g'


def _header(columns):
    return ','.join(columns)


def save_invariants(filepath, traj):
    '''Columns t, mass, momentum, energy, gamma, dt over the accepted steps.'''
    table = np.column_stack((traj.times, traj.mass, traj.momentum, traj.energy,
                             traj.gamma, traj.dt))
    np.savetxt(filepath, table, fmt=FMT, delimiter=',',
               header=_header(('t', 'mass', 'momentum', 'energy', 'gamma', 'dt')), comments='')


def save_snapshot(filepath, x, b, q, variables):
    '''Columns x, b followed by one column per model variable.'''
    table = np.column_stack([x, b] + [q[i] for i in range(len(variables))])
    np.savetxt(filepath, table, fmt=FMT, delimiter=',',
               header=_header(('x', 'b') + tuple(variables)), comments='')


def save_gauges(filepath, times, series):
    table = np.column_stack([times] + list(series))
    columns = ('t',) + tuple('gauge{}'.format(i + 1) for i in range(len(series)))
    np.savetxt(filepath, table, fmt=FMT, delimiter=',', header=_header(columns), comments='')


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, (float, np.floating)):
        return FMT % value
    return str(value)


def save_study(filepath, rows, columns):
    '''
    One row per sweep entry in sweep order; missing values (failed runs,
    the EOC of the first row) are left empty.
    '''
    with open(filepath, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        writer.writerows([_cell(row.get(c)) for c in columns] for row in rows)


def load_reference_csv(filepath):
    '''
    Load a measured series such as gauge records (t, value, ...) or Froude
    sweeps (Fr, a_max). Lines starting with '#' and a non-numeric header are
    skipped. A missing file only disables the comparison: a warning is
    logged and None returned.
    '''
    if filepath is None or not os.path.exists(filepath):
        logger.warning('reference data %s not found, comparison disabled', filepath)
        return None
    skip = 0
    with open(filepath) as f:
        for i, line in enumerate(f):
            if not line.strip() or line.lstrip().startswith('#'):
                continue
            # skiprows counts comment lines too
            skip = 0 if _is_numeric(line) else i + 1
            break
    return np.atleast_2d(np.loadtxt(filepath, delimiter=',', comments='#', skiprows=skip))


def _is_numeric(line):
    try:
        [float(c) for c in line.strip().split(',') if c]
        return bool(line.strip())
    except ValueError:
        return False
