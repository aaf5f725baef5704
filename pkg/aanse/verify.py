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

import logging
import numpy as np
from numpy.polynomial import Polynomial
import pandas as pd

from .driver import CONVERGED, SolverConfig, run
from .fem import (MixedDofMap, element_data, evaluate_pressure,
                  evaluate_velocity)
from .linalg import sparse_solve
from .mesh import Pattern, build_unit_square_mesh
from .nse import (ProblemSetup, State, frechet_operator, newton_operator,
                  newton_system)
from .tools import seminorm

logger = logging.getLogger(__name__)

#: Quadrature degree used to measure errors against closed forms.
ERROR_DEGREE = 7


class StudyAbortedError(RuntimeError):
    """Raised when a run of a convergence study does not converge.

    The *log* attribute holds the `IterationLog` of the failed run.
    """

    def __init__(self, message, log=None):
        super(StudyAbortedError, self).__init__(message)
        self.log = log


class ManufacturedCase(object):
    """Closed-form solution of the steady Navier-Stokes equations.

    :Parameters:

        name: `str`
            A short label for the case.

        velocity: callable
            *f(x, y) -> (u1, u2)*, divergence-free.

        velocity_gradient: callable
            *f(x, y) -> ((du1/dx, du1/dy), (du2/dx, du2/dy))*.

        pressure: callable
            *f(x, y) -> p*, with zero mean over the unit square.

        forcing: callable
            *f(x, y) -> (f1, f2)*, the body force
            ``-nu lap u + u.grad u + grad p`` the closed forms satisfy.

        nu: `float`
            The viscosity the forcing was derived with.

        convection: `bool`, optional
            Whether the forcing includes the convection term. If not
            provided, set to default value True.

    """

    def __init__(self, name, velocity, velocity_gradient, pressure,
                 forcing, nu, convection=True):
        self.name = name
        self.velocity = velocity
        self.velocity_gradient = velocity_gradient
        self.pressure = pressure
        self.forcing = forcing
        self.nu = nu
        self.convection = convection

    def __repr__(self):
        return 'ManufacturedCase({!r}, nu={:g})'.format(self.name, self.nu)

    def setup(self, n, pattern=Pattern.CROSSED):
        """Discrete problem on an *n* x *n* mesh with the exact boundary
        values of the case."""
        mesh = build_unit_square_mesh(n, pattern)
        dofmap = MixedDofMap(mesh, boundary_velocity=self.velocity)
        return ProblemSetup(mesh, dofmap, self.nu, forcing=self.forcing,
                            convection=self.convection)


def stream_function_case(nu=1.0, convection=True):
    """Case derived from the stream function x^2 (1-x)^2 y^2 (1-y)^2.

    The velocity ``(dpsi/dy, -dpsi/dx)`` is divergence-free and vanishes
    on the boundary of the unit square; the pressure is
    ``sin(pi x) cos(pi y)``, whose mean is zero.

    :Parameters:

        nu: `float`, optional
            The viscosity. If not provided, set to default value 1.0.

        convection: `bool`, optional
            Whether the convection term is part of the problem. If not
            provided, set to default value True.

    :Returns:

        `ManufacturedCase`

    """
    g = [Polynomial([0.0, 0.0, 1.0, -2.0, 1.0])]
    for _ in range(3):
        g.append(g[-1].deriv())
    pi = np.pi

    def velocity(x, y):
        return g[0](x) * g[1](y), -g[1](x) * g[0](y)

    def velocity_gradient(x, y):
        return ((g[1](x) * g[1](y), g[0](x) * g[2](y)),
                (-g[2](x) * g[0](y), -g[1](x) * g[1](y)))

    def pressure(x, y):
        return np.sin(pi * x) * np.cos(pi * y)

    def forcing(x, y):
        lap1 = g[2](x) * g[1](y) + g[0](x) * g[3](y)
        lap2 = -(g[3](x) * g[0](y) + g[1](x) * g[2](y))
        f1 = -nu * lap1 + pi * np.cos(pi * x) * np.cos(pi * y)
        f2 = -nu * lap2 - pi * np.sin(pi * x) * np.sin(pi * y)
        if convection:
            (u1, u2) = velocity(x, y)
            (d11, d12), (d21, d22) = velocity_gradient(x, y)
            f1 = f1 + u1 * d11 + u2 * d12
            f2 = f2 + u1 * d21 + u2 * d22
        return f1, f2

    return ManufacturedCase('stream-function', velocity, velocity_gradient,
                            pressure, forcing, nu, convection)


def linear_case(nu=1.0):
    """Case u = (x, -y), p = 0, reproduced exactly by P2/P1 elements.

    **Examples**

    >>> case = linear_case()
    >>> case.forcing(2.0, 3.0)
    (2.0, 3.0)

    """
    def velocity(x, y):
        return x + 0.0 * y, -y + 0.0 * x

    def velocity_gradient(x, y):
        one, zero = np.ones_like(x + y), np.zeros_like(x + y)
        return (one, zero), (zero, -one)

    def pressure(x, y):
        return np.zeros_like(x + y)

    def forcing(x, y):
        # -nu lap u vanishes; u.grad u = (x, y)
        return x + 0.0 * y, y + 0.0 * x

    return ManufacturedCase('linear', velocity, velocity_gradient, pressure,
                            forcing, nu)


def velocity_h1_error(case, state, dofmap):
    """H1-seminorm of the velocity error, by degree-7 quadrature."""
    el = element_data(dofmap.mesh, ERROR_DEGREE, 2)
    _, grads = evaluate_velocity(state, dofmap, quad_degree=ERROR_DEGREE)
    x, y = el.points[..., 0], el.points[..., 1]
    exact = case.velocity_gradient(x, y)
    total = 0.0
    for c in range(2):
        for d in range(2):
            total += np.sum(el.wdet * (grads[..., c, d] - exact[c][d]) ** 2)
    return float(np.sqrt(total))


def pressure_l2_error(case, state, mesh):
    """L2-norm of the pressure error, by degree-7 quadrature."""
    el = element_data(mesh, ERROR_DEGREE, 1)
    values = evaluate_pressure(state.pressure, mesh,
                               quad_degree=ERROR_DEGREE)
    x, y = el.points[..., 0], el.points[..., 1]
    return float(np.sqrt(np.sum(el.wdet * (values - case.pressure(x, y))
                                ** 2)))


def _rates(errors, sizes):
    errors = np.asarray(errors, dtype=np.float64)
    sizes = np.asarray(sizes, dtype=np.float64)
    rates = np.full(errors.shape, np.nan)
    with np.errstate(divide='ignore', invalid='ignore'):
        rates[1:] = (np.log(errors[:-1] / errors[1:])
                     / np.log(sizes[:-1] / sizes[1:]))
    return rates


def mms_convergence_study(case, sizes=(8, 16, 32), pattern=Pattern.CROSSED,
                          tolerance=1e-12, max_iters=20):
    """Measure discretization errors of a manufactured case.

    The discrete problem is solved by Newton iterations (from the zero
    interior state carrying the exact boundary values) on each mesh,
    and the errors against the closed forms are measured with a
    degree-7 quadrature. Rates compare successive meshes.

    :Parameters:

        case: `ManufacturedCase`
            The closed-form solution.

        sizes: sequence of `int`, optional
            The mesh subdivisions per side. If not provided, set to
            default value (8, 16, 32).

        pattern: `Pattern` or `str`, optional
            The mesh pattern. If not provided, set to default value
            `Pattern.CROSSED`.

        tolerance: `float`, optional
            The Newton tolerance. If not provided, set to default value
            1e-12.

        max_iters: `int`, optional
            The Newton iteration budget per mesh. If not provided, set
            to default value 20.

    :Returns:

        `pandas.DataFrame`
            Columns *n*, *h*, *err_u_H1*, *rate_u*, *err_p_L2* and
            *rate_p*, one row per mesh.

    """
    config = SolverConfig(method='newton', tolerance=tolerance,
                          max_iters=max_iters, warm_start=0, timings=False)
    rows = []
    for n in sizes:
        setup = case.setup(n, pattern)
        state, log = run(setup, config)
        if log.status != CONVERGED:
            raise StudyAbortedError(
                'manufactured case {!r} did not converge on the n={} mesh '
                '({})'.format(case.name, n, log.status), log=log)
        err_u = velocity_h1_error(case, state, setup.dofmap)
        err_p = pressure_l2_error(case, state, setup.mesh)
        logger.info('%s n=%d: velocity H1 error %.6e, pressure L2 error '
                    '%.6e', case.name, n, err_u, err_p)
        rows.append([n, setup.mesh.h, err_u, err_p])

    table = pd.DataFrame(rows, columns=['n', 'h', 'err_u_H1', 'err_p_L2'])
    table['rate_u'] = _rates(table['err_u_H1'], table['h'])
    table['rate_p'] = _rates(table['err_p_L2'], table['h'])
    return table[['n', 'h', 'err_u_H1', 'rate_u', 'err_p_L2', 'rate_p']]


def frechet_harness(setup, u, h, epsilons=(1e-2, 1e-3, 1e-4)):
    """Finite-difference check of the derivative of the Newton operator.

    For each epsilon, the remainder
    ``||grad(G(u + eps h) - G(u) - G'(u; eps h))||`` is computed; for a
    Frechet derivative it decays like eps^2.

    :Parameters:

        setup: `ProblemSetup`
            The discrete problem.

        u: `State`
            The point of linearization.

        h: array-like object
            The velocity direction, vanishing on Dirichlet dofs.

        epsilons: sequence of `float`, optional
            The step sizes. If not provided, set to default value
            (1e-2, 1e-3, 1e-4).

    :Returns:

        `tuple`
            The log-log slope of the remainders against the step sizes
            (NaN if any remainder vanishes) and a `pandas.DataFrame`
            with columns *epsilon*, *remainder* and *ratio* (remainder
            over ``||grad(eps h)||``).

    """
    h = np.asarray(h, dtype=np.float64)
    g_u = newton_operator(setup, u)
    rows = []
    for eps in epsilons:
        shifted = State(u.velocity + eps * h, u.pressure)
        g_shifted = newton_operator(setup, shifted)
        derivative = frechet_operator(setup, u, eps * h, g_u=g_u)
        remainder = seminorm(g_shifted.velocity - g_u.velocity - derivative,
                             setup.laplacian)
        step = seminorm(eps * h, setup.laplacian)
        rows.append([eps, remainder, remainder / step if step > 0.0
                     else np.nan])
    table = pd.DataFrame(rows, columns=['epsilon', 'remainder', 'ratio'])

    if np.all(table['remainder'] > 0.0):
        slope = float(np.polyfit(np.log(table['epsilon']),
                                 np.log(table['remainder']), 1)[0])
    else:
        slope = np.nan
    return slope, table


def dense_cross_check(setup, state=None):
    """Compare the sparse solve of a Newton system with a dense solve.

    :Parameters:

        setup: `ProblemSetup`
            The discrete problem; intended for small meshes.

        state: `State`, optional
            The point the Newton system is assembled at. If not
            provided, the zero interior state is used.

    :Returns:

        `float`
            The largest absolute difference between both solutions.

    """
    if state is None:
        state = State(setup.dofmap.lift(),
                      np.zeros(setup.dofmap.n_pressure))
    matrix, rhs = newton_system(setup, state)
    sparse_x = sparse_solve(matrix, rhs)
    dense_x = np.linalg.solve(matrix.toarray(), rhs)
    return float(np.max(np.abs(sparse_x - dense_x)))
