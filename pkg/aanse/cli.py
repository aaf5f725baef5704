# This file is part of aanse:
# Anderson-Accelerated Newton Solvers for Steady Navier-Stokes
# Copyright (C) 2026  The aanse developers
#
# aanse is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# aanse is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with aanse. If not, see <http://www.gnu.org/licenses/>.

import argparse
import logging
import os
import sys
import numpy as np

from .config import ConfigError, RunManifest, read_manifest
from .driver import CONVERGED, DIVERGED, estimate_order, run
from .export import (write_history, write_order_table, write_summary,
                     write_vtk)
from .mesh import Pattern, dump_mesh
from .verify import (StudyAbortedError, linear_case, mms_convergence_study,
                     stream_function_case)
from .version import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_MAX_ITERS = 3


class _ArgumentParser(argparse.ArgumentParser):
    # usage errors share the exit code of configuration errors, 2 being
    # reserved for diverged runs
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, '{}: error: {}\n'.format(self.prog, message))


def _depth_list(text):
    try:
        depths = tuple(int(v) for v in text.split(',') if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            'invalid depth list {!r}'.format(text))
    return depths


def _add_run_options(parser):
    parser.add_argument('manifest', nargs='?',
                        help='run manifest (key = value sections)')
    parser.add_argument('--re', type=float, help='Reynolds number (1/nu)')
    parser.add_argument('--nu', type=float, help='kinematic viscosity')
    parser.add_argument('--mesh-n', dest='n', type=int,
                        help='mesh subdivisions per side')
    parser.add_argument('--pattern', choices=[p.value for p in Pattern],
                        help='mesh pattern')
    parser.add_argument('--method', help='nonlinear method')
    parser.add_argument('--depth', type=int, help='Anderson depth')
    parser.add_argument('--depths', type=_depth_list,
                        help='comma-separated Anderson depths (sweep)')
    parser.add_argument('--tol', dest='tolerance', type=float,
                        help='residual tolerance (H1-seminorm)')
    parser.add_argument('--max-iters', dest='max_iters', type=int,
                        help='iteration budget')
    parser.add_argument('--warm-start', dest='warm_start', type=int,
                        help='number of Picard warm-start iterations')
    parser.add_argument('--out-dir', dest='out_dir',
                        help='output directory')
    parser.add_argument('--vtk', action='store_const', const=True,
                        help='export the solution as legacy VTK')
    parser.add_argument('--dump-mesh', dest='mesh_dump',
                        action='store_const', const=True,
                        help='write the mesh as .node/.ele files')
    parser.add_argument('--no-timings', dest='timings',
                        action='store_const', const=False,
                        help='write zero wall times (reproducible files)')


def build_parser():
    parser = _ArgumentParser(
        prog='aanse',
        description='Anderson-accelerated Newton solvers for the steady '
                    'Navier-Stokes equations.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s {}'.format(__version__))
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='count', default=0)
    verbosity.add_argument('-q', '--quiet', action='store_true')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    _add_run_options(commands.add_parser(
        'run', help='solve the lid-driven cavity with one method'))
    _add_run_options(commands.add_parser(
        'sweep', help='compare Newton with Anderson depths'))

    mms = commands.add_parser('mms', help='manufactured-solution study')
    mms.add_argument('--case', choices=('stream-function', 'linear'),
                     default='stream-function')
    mms.add_argument('--nu', type=float, default=1.0)
    mms.add_argument('--sizes', type=_depth_list, default=(8, 16, 32),
                     help='comma-separated mesh sizes')
    mms.add_argument('--pattern', choices=[p.value for p in Pattern],
                     default=Pattern.CROSSED.value)
    mms.add_argument('--stokes', action='store_true',
                     help='drop the convection term')
    mms.add_argument('--out-dir', dest='out_dir', default='results')
    return parser


_OVERRIDES = ('re', 'nu', 'n', 'pattern', 'method', 'depth', 'depths',
              'tolerance', 'max_iters', 'warm_start', 'out_dir', 'vtk',
              'mesh_dump', 'timings')


def load_manifest(args):
    """Manifest of the command line: file values, then flag overrides."""
    overrides = dict((key, getattr(args, key)) for key in _OVERRIDES)
    if args.manifest is not None:
        try:
            manifest = read_manifest(args.manifest)
        except OSError as err:
            raise ConfigError('cannot read manifest ({})'.format(err),
                              field='manifest')
        return manifest.updated(**overrides)
    return RunManifest(**dict((k, v) for k, v in overrides.items()
                              if v is not None))


def _median_order(log):
    try:
        return estimate_order(log)
    except ValueError:
        return np.nan


def _solve(manifest, setup, config, out_dir):
    state, log = run(setup, config)
    order = _median_order(log)
    write_history(log, os.path.join(out_dir, 'history.csv'))
    write_summary(os.path.join(out_dir, 'summary.txt'), log, order,
                  extra={'seed': manifest.seed})
    return state, log, order


def cmd_run(manifest):
    """Run one solve and write its history, summary and fields.

    :Returns:

        `int`
            0 if the run converged, 2 if it diverged, 3 if it ran out
            of iterations.

    """
    out_dir = manifest.prepare_output()
    config = manifest.solver_config()
    setup = config.build_setup()
    if manifest.mesh_dump:
        dump_mesh(setup.mesh, os.path.join(out_dir, 'mesh'))

    state, log, order = _solve(manifest, setup, config, out_dir)
    if manifest.vtk:
        write_vtk(os.path.join(out_dir, 'solution.vtk'), setup.mesh, state,
                  setup.dofmap)

    logger.info('%s: %s after %d iterations, median order %.4g',
                config.label, log.status, len(log), order)
    if log.status == CONVERGED:
        return EXIT_OK
    if log.status == DIVERGED:
        return EXIT_DIVERGED
    return EXIT_MAX_ITERS


def cmd_sweep(manifest):
    """Run Newton and Anderson-accelerated Newton for every depth.

    Each member writes its history and summary to its own
    subdirectory; the combined table goes to orders.csv. Diverged
    members are reported as Fail and do not stop the sweep.
    """
    out_dir = manifest.prepare_output()
    members = [('newton', 0)]
    members += [('anderson', depth) for depth in manifest.depths]
    setup = manifest.solver_config().build_setup()
    rows = []
    for method, depth in members:
        config = manifest.solver_config(method=method, depth=depth or 1)
        name = 'newton' if method == 'newton' else 'anderson_m{}'.format(
            depth)
        member_dir = os.path.join(out_dir, name)
        os.makedirs(member_dir, exist_ok=True)
        logger.info('sweep member %s', config.label)
        _, log, order = _solve(manifest, setup, config, member_dir)
        rows.append((config.label, log, order))

    write_order_table(rows, os.path.join(out_dir, 'orders.csv'))
    return EXIT_OK


def cmd_mms(args):
    """Run a manufactured-solution study and write mms.csv."""
    if args.case == 'linear':
        case = linear_case(nu=args.nu)
    else:
        case = stream_function_case(nu=args.nu,
                                    convection=not args.stokes)
    os.makedirs(args.out_dir, exist_ok=True)
    try:
        table = mms_convergence_study(case, sizes=args.sizes,
                                      pattern=args.pattern)
    except StudyAbortedError as err:
        logger.error('%s', err)
        return EXIT_DIVERGED
    table.to_csv(os.path.join(args.out_dir, 'mms.csv'), index=False,
                 float_format='%.17g')
    return EXIT_OK


def main(argv=None):
    """Entry point of the ``aanse`` command."""
    args = build_parser().parse_args(argv)
    if args.quiet:
        level = logging.ERROR
    else:
        level = (logging.WARNING, logging.INFO,
                 logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level,
                        format='%(asctime)s %(name)s %(levelname)s: '
                               '%(message)s')

    if args.command == 'mms':
        return cmd_mms(args)

    try:
        manifest = load_manifest(args)
        if args.command == 'sweep':
            return cmd_sweep(manifest)
        return cmd_run(manifest)
    except ConfigError as err:
        logger.error('configuration error: %s', err)
        sys.stderr.write('aanse: configuration error in {}: {}\n'.format(
            err.field, err))
        return EXIT_CONFIG
