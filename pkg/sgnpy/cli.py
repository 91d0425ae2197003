'''
Command line interface: sgnrun run | study | check-operators | list-scenarios.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
'''

import argparse
import logging
import os
import sys
import time

from . import __version__
from .config import RunConfig, load_config, output_directory
from .exceptions import ConfigError, InvalidArgument, NumericalFailure, StateInvalid
from .runner import STUDY_KINDS, Simulation, favre_reference_overlay, run_study
from .sbp import CENTRAL_ORDERS, UPWIND_ORDERS, make_grid, make_operators, sbp_residuals
from .scenarios import get_scenario, list_scenarios

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def _add_run_options(parser):
    parser.add_argument('-c', '--config', type=str, default=None,
                        help='TOML configuration file. Command line options override it.')
    parser.add_argument('--scenario', type=str, default=None,
                        help='Scenario name, see list-scenarios.')
    parser.add_argument('--model', type=str, default=None,
                        choices=('swe', 'sgn-hyperbolic', 'sgn-original'))
    parser.add_argument('--variant', type=str, default=None,
                        choices=('flat', 'mild', 'full', 'variable'))
    parser.add_argument('--mode', type=str, default=None, choices=('central', 'upwind'),
                        help='Central or upwind SBP operators.')
    parser.add_argument('--order', type=int, default=None, help='Accuracy order of the operators.')
    parser.add_argument('-n', '--nodes', type=int, default=None, help='Number of grid nodes.')
    parser.add_argument('--domain', type=float, nargs=2, default=None, metavar=('XMIN', 'XMAX'))
    parser.add_argument('--lambda', dest='lam', type=float, default=None,
                        help='Relaxation parameter of the hyperbolic model.')
    parser.add_argument('--t-end', type=float, default=None)
    parser.add_argument('--method', type=str, default=None, choices=('tsit5', 'bs3'))
    parser.add_argument('--tol', type=float, default=None,
                        help='Absolute and relative tolerance of the step size control.')
    parser.add_argument('--dt', type=float, default=None, help='Fixed time step.')
    parser.add_argument('--relax', dest='relax', action='store_true',
                        help='Relax every step to conserve the total energy.')
    parser.add_argument('--no-relax', dest='relax', action='store_false')
    parser.set_defaults(relax=None)
    parser.add_argument('--frozen', action='store_true', default=None,
                        help='Reuse the elliptic factorization within each time step.')
    parser.add_argument('--av', action='store_true', default=None,
                        help='Add artificial viscosity.')
    parser.add_argument('--av-constant', type=float, default=None)
    parser.add_argument('-o', '--output', type=str, default=None, help='Output directory.')
    parser.add_argument('--snapshot', type=float, action='append', default=None,
                        help='Save the state at this time (repeatable).')
    parser.add_argument('--gauge', type=float, action='append', default=None,
                        help='Record h + b at this position (repeatable).')
    parser.add_argument('--param', type=str, action='append', default=[], metavar='KEY=VALUE',
                        help='Scenario parameter (repeatable).')


def _add_common_options(parser):
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for progress messages, -vv for debugging output.')
    parser.add_argument('--silent', dest='silent', action='store_true',
                        help='Omit the progress bar.')
    parser.add_argument('--no-silent', dest='silent', action='store_false',
                        help='Show the progress bar (default).')
    parser.set_defaults(silent=False)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='sgnrun', description='Structure-preserving Serre-Green-Naghdi simulations.')
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    sub = parser.add_subparsers(dest='command')

    run = sub.add_parser('run', help='Run a single simulation.')
    _add_run_options(run)
    _add_common_options(run)
    run.add_argument('--timing', action='store_true', help='Report wall time and RHS evaluations.')

    study = sub.add_parser('study', help='Run a parameter study.')
    _add_run_options(study)
    _add_common_options(study)
    study.add_argument('--kind', type=str, required=True, choices=STUDY_KINDS)
    study.add_argument('--sweep', type=float, nargs='+', required=True,
                       help='Sweep values: n, lambda, dt, eps or 0/1 for relaxation.')
    study.add_argument('--workers', type=int, default=1)
    study.add_argument('--summary', type=str, default=None, help='Study CSV file.')
    study.add_argument('--reference', type=str, default=None,
                       help='Measured (Fr, a_max) data for a Froude sweep.')

    check = sub.add_parser('check-operators', help='Print the SBP residuals of all operators.')
    check.add_argument('-n', '--nodes', type=int, nargs='+', default=[8, 64, 512])
    _add_common_options(check)

    lst = sub.add_parser('list-scenarios', help='List the available scenarios.')
    _add_common_options(lst)
    return parser


def _parse_value(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return {'true': True, 'false': False}.get(text.lower(), text)


def config_from_args(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = (
        (cfg.model, 'name', args.model), (cfg.model, 'variant', args.variant),
        (cfg.model, 'operator_mode', args.mode), (cfg.model, 'order', args.order),
        (cfg.model, 'lam', args.lam), (cfg.model, 'frozen', args.frozen),
        (cfg.grid, 'n', args.nodes), (cfg.grid, 'domain', args.domain),
        (cfg.time, 't_end', args.t_end), (cfg.time, 'method', args.method),
        (cfg.time, 'abs_tol', args.tol), (cfg.time, 'rel_tol', args.tol),
        (cfg.time, 'dt', args.dt), (cfg.time, 'relax', args.relax),
        (cfg.viscosity, 'enabled', args.av), (cfg.viscosity, 'c', args.av_constant),
        (cfg.output, 'directory', args.output), (cfg.output, 'snapshot_times', args.snapshot),
        (cfg.output, 'gauges', args.gauge),
    )
    for section, name, value in overrides:
        if value is not None:
            setattr(section, name, value)
    if args.scenario is not None:
        cfg.scenario = {'name': args.scenario}
    for item in args.param:
        key, sep, value = item.partition('=')
        if not sep:
            raise ConfigError('scenario parameters take the form KEY=VALUE, got {!r}'.format(item))
        cfg.scenario[key.strip()] = _parse_value(value.strip())
    return cfg.validate()


def _format(summary):
    return ' '.join('{}={:.6g}'.format(k, v) if isinstance(v, float) else '{}={}'.format(k, v)
                    for k, v in summary.items())


def cmd_run(args):
    cfg = config_from_args(args)
    start = time.perf_counter()
    sim = Simulation(cfg, silent=args.silent)
    rhs_norm = sim.rhs_norm()
    traj = sim.run()
    sim.write(traj)
    summary = sim.summary(traj)
    summary['rhs_norm'] = rhs_norm
    timing = {k: summary.pop(k) for k in ('wall_time', 'rhs_evaluations')}
    print(_format(summary))
    if args.timing:
        print('wall_time={:.3f}s total={:.3f}s rhs_evaluations={}'.format(
            timing['wall_time'], time.perf_counter() - start, timing['rhs_evaluations']))
    return EXIT_OK


def cmd_study(args):
    cfg = config_from_args(args)
    directory = output_directory(cfg)
    os.makedirs(directory, exist_ok=True)
    summary = args.summary or os.path.join(directory, 'study_{}.csv'.format(args.kind))
    rows, columns = run_study(args.kind, cfg, args.sweep, workers=args.workers, output=summary)
    if args.kind == 'froude-sweep' and args.reference:
        favre_reference_overlay(args.reference, directory)
    failed = [r for r in rows if r['status'] != 'ok']
    print('{} runs, {} failed, summary in {}'.format(len(rows), len(failed), summary))
    if failed and len(failed) == len(rows):
        print('study failed: no run of the sweep completed', file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_check_operators(args):
    for mode, orders in (('central', CENTRAL_ORDERS), ('upwind', UPWIND_ORDERS)):
        for order in orders:
            for n in args.nodes:
                try:
                    ops = make_operators(make_grid(0., 1., n), order, upwind=mode == 'upwind')
                except InvalidArgument as e:
                    print('{} order {} n={}: skipped ({})'.format(mode, order, n, e))
                    continue
                print('{} order {} n={}: {}'.format(mode, order, n, _format(sbp_residuals(ops))))
    return EXIT_OK


def cmd_list_scenarios(args):
    for name in list_scenarios():
        print('{:<20s}{}'.format(name, get_scenario(name).description))
    return EXIT_OK


COMMANDS = {'run': cmd_run, 'study': cmd_study, 'check-operators': cmd_check_operators,
            'list-scenarios': cmd_list_scenarios}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InvalidArgument) as e:
        print('error: {}'.format(e), file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, StateInvalid) as e:
        where = '' if getattr(e, 'time', None) is None else ' at t = {:.6g}'.format(e.time)
        print('simulation failed{}: {}'.format(where, e), file=sys.stderr)
        return EXIT_NUMERICAL
