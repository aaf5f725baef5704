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

import numpy as np
import pandas as pd

from .driver import DIVERGED

#: Table entry of a diverged run.
FAIL = 'Fail'


def _format_float(value):
    return 'nan' if not np.isfinite(value) else '%.17g' % value


def write_history(log, path):
    """Write the main iterations of a run as CSV.

    Floats are written with 17 significant digits so that orders
    estimated from the file agree with the in-memory log.
    """
    log.to_frame().to_csv(path, index=False, float_format='%.17g')
    return path


def write_summary(path, log, median_order, extra=None):
    """Write the ``key=value`` summary of a run.

    :Parameters:

        path: `str`
            The file to write.

        log: `IterationLog`
            The log of the run.

        median_order: `float`
            The estimated convergence order, NaN if it could not be
            estimated.

        extra: `dict`, optional
            Additional entries appended after the standard ones.

    """
    final = log.residuals[-1] if len(log) else np.nan
    entries = [
        ('status', log.status),
        ('iters', len(log)),
        ('median_order', _format_float(median_order)),
        ('method', log.method),
        ('depth', log.depth),
        ('warm_start_iters', len(log.prelude)),
        ('final_residual', _format_float(final)),
    ]
    entries += sorted((extra or {}).items())
    with open(path, 'w') as f:
        for key, value in entries:
            f.write('{}={}\n'.format(key, value))
    return path


def read_summary(path):
    """Read a summary file back into a `dict` of strings."""
    summary = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                key, _, value = line.partition('=')
                summary[key] = value
    return summary


def order_table(rows):
    """Combine sweep results into a table.

    :Parameters:

        rows: sequence of `tuple`
            One (label, `IterationLog`, median order) triple per run.

    :Returns:

        `pandas.DataFrame`
            Columns *method*, *status* (Fail for diverged runs),
            *iters* and *median_order*.

    """
    records = []
    for label, log, order in rows:
        status = FAIL if log.status == DIVERGED else log.status
        records.append([label, status, len(log), order])
    return pd.DataFrame(records,
                        columns=['method', 'status', 'iters', 'median_order'])


def write_order_table(rows, path):
    order_table(rows).to_csv(path, index=False, float_format='%.17g')
    return path


def write_vtk(path, mesh, state, dofmap, title='aanse solution'):
    """Write a solution as a legacy ASCII VTK unstructured grid.

    The velocity and the pressure are sampled at the mesh vertices (P2
    edge dofs are not exported) and written as point data, the
    triangles as cells.

    :Parameters:

        path: `str`
            The file to write.

        mesh: `Mesh`
            The triangulation.

        state: `State`
            The solution.

        dofmap: `MixedDofMap`
            The degrees of freedom of *state*.

        title: `str`, optional
            The header line of the file.

    """
    nv, nt = mesh.n_vertices, mesh.n_triangles
    ns = dofmap.n_velocity_scalar
    ux = state.velocity[:nv]
    uy = state.velocity[ns:ns + nv]
    points = np.column_stack((mesh.vertices, np.zeros(nv)))
    vectors = np.column_stack((ux, uy, np.zeros(nv)))
    cells = np.column_stack((np.full(nt, 3), mesh.triangles))

    with open(path, 'w') as f:
        f.write('# vtk DataFile Version 3.0\n')
        f.write('{}\n'.format(title))
        f.write('ASCII\n')
        f.write('DATASET UNSTRUCTURED_GRID\n')
        f.write('POINTS {} double\n'.format(nv))
        np.savetxt(f, points, fmt='%.9g')
        f.write('CELLS {} {}\n'.format(nt, 4 * nt))
        np.savetxt(f, cells, fmt='%d')
        f.write('CELL_TYPES {}\n'.format(nt))
        np.savetxt(f, np.full(nt, 5), fmt='%d')
        f.write('POINT_DATA {}\n'.format(nv))
        f.write('VECTORS velocity double\n')
        np.savetxt(f, vectors, fmt='%.9g')
        f.write('SCALARS pressure double 1\n')
        f.write('LOOKUP_TABLE default\n')
        np.savetxt(f, state.pressure, fmt='%.9g')
    return path


def read_vtk_point_data(path):
    """Read the points, velocity and pressure of a file written by
    `write_vtk`.

    :Returns:

        `tuple` of `numpy.ndarray`
            The (V, 3) points, the (V, 3) velocity vectors and the V
            pressure values.

    """
    with open(path) as f:
        lines = f.read().splitlines()

    def block(header, rows):
        start = next(i for i, line in enumerate(lines)
                     if line.startswith(header)) + 1
        if header.startswith('SCALARS'):
            start += 1
        return np.array([[float(v) for v in line.split()]
                         for line in lines[start:start + rows]])

    nv = int(next(line for line in lines
                  if line.startswith('POINTS')).split()[1])
    points = block('POINTS', nv)
    velocity = block('VECTORS', nv)
    pressure = block('SCALARS', nv)[:, 0]
    return points, velocity, pressure
