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

from .fem import (MixedDofMap, assemble_convection_vector, assemble_divergence,
                  assemble_load, assemble_newton_linearization,
                  assemble_picard_linearization, assemble_vector_laplacian,
                  apply_dirichlet, saddle_matrix)
from .linalg import sparse_solve
from .mesh import Pattern, build_unit_square_mesh
from .tools import check_finite, seminorm


class DivergenceError(RuntimeError):
    """Raised when a solution operator returns non-finite values.

    The *iteration* attribute holds the index of the iterate being
    computed, or None outside of an iteration loop.
    """

    def __init__(self, message, iteration=None):
        super(DivergenceError, self).__init__(message)
        self.iteration = iteration


class State(object):
    """Discrete velocity and pressure coefficients.

    :Parameters:

        velocity: array-like object
            The P2 velocity coefficients, x block then y block.

        pressure: array-like object
            The P1 pressure coefficients.

    """

    def __init__(self, velocity, pressure):
        self.velocity = np.asarray(velocity, dtype=np.float64)
        self.pressure = np.asarray(pressure, dtype=np.float64)

    def __repr__(self):
        return 'State(velocity={}, pressure={})'.format(
            self.velocity.shape[0], self.pressure.shape[0])

    @classmethod
    def from_vector(cls, vector, dofmap):
        velocity, pressure = dofmap.split(vector)
        return cls(velocity.copy(), pressure.copy())

    @property
    def vector(self):
        return np.concatenate((self.velocity, self.pressure))

    def copy(self):
        return State(self.velocity.copy(), self.pressure.copy())

    def is_finite(self):
        return bool(np.all(np.isfinite(self.velocity))
                    and np.all(np.isfinite(self.pressure)))


class ProblemSetup(object):
    """Discrete steady Navier-Stokes problem on a fixed mesh.

    The operators that do not depend on the iterate (vector Laplacian,
    divergence, load) are assembled once here and are read-only.

    :Parameters:

        mesh: `Mesh`
            The triangulation.

        dofmap: `MixedDofMap`
            The degrees of freedom on *mesh*, carrying the boundary
            data.

        nu: `float`
            The kinematic viscosity. Must be positive.

        forcing: callable, optional
            The body force *f(x, y) -> (fx, fy)*. If not provided, the
            problem is unforced.

        convection: `bool`, optional
            Whether the convection term is present. Without it the
            problem is the (linear) Stokes problem. If not provided,
            set to default value True.

    """

    def __init__(self, mesh, dofmap, nu, forcing=None, convection=True):
        if not nu > 0.0 or not np.isfinite(nu):
            raise ValueError('viscosity must be positive and finite '
                             '(got {})'.format(nu))
        if dofmap.mesh is not mesh:
            raise ValueError('dofmap was not built on the given mesh')
        self.mesh = mesh
        self.dofmap = dofmap
        self.nu = float(nu)
        self.forcing = forcing
        self.convection = convection

        self.laplacian = assemble_vector_laplacian(mesh, dofmap)
        self.divergence = assemble_divergence(mesh, dofmap)
        if forcing is None:
            self.load = np.zeros(dofmap.n_velocity)
        else:
            self.load = check_finite(assemble_load(mesh, dofmap, forcing),
                                     'load vector')
        self.load.setflags(write=False)

    @property
    def re(self):
        return 1.0 / self.nu

    def __repr__(self):
        return 'ProblemSetup(nu={:.6g}, convection={}, {!r})'.format(
            self.nu, self.convection, self.dofmap)


def cavity_setup(n, pattern=Pattern.CROSSED, re=None, nu=None,
                 lid_velocity=1.0):
    """Build the lid-driven cavity problem on the unit square.

    The lid (y = 1, corners included) moves with velocity
    (*lid_velocity*, 0), the other walls are no-slip and there is no
    body force.

    :Parameters:

        n: `int`
            The number of mesh subdivisions per side.

        pattern: `Pattern` or `str`, optional
            The mesh pattern. If not provided, set to default value
            `Pattern.CROSSED`.

        re: `float`, optional
            The Reynolds number, taken as 1/nu. Exactly one of *re* and
            *nu* must be given.

        nu: `float`, optional
            The kinematic viscosity.

        lid_velocity: `float`, optional
            The lid speed. If not provided, set to default value 1.0.

    :Returns:

        `ProblemSetup`

    """
    if (re is None) == (nu is None):
        raise ValueError('exactly one of re and nu must be given')
    if nu is None:
        if not re > 0.0:
            raise ValueError('Reynolds number must be positive '
                             '(got {})'.format(re))
        nu = 1.0 / re
    mesh = build_unit_square_mesh(n, pattern)
    dofmap = MixedDofMap(mesh, lid_velocity=lid_velocity)
    return ProblemSetup(mesh, dofmap, nu)


def _velocity(u):
    return np.asarray(getattr(u, 'velocity', u), dtype=np.float64)


def _solve_mixed(setup, momentum, rhs_velocity, homogeneous=False,
                 iteration=None):
    dofmap = setup.dofmap
    matrix = saddle_matrix(momentum, setup.divergence)
    rhs = np.concatenate((rhs_velocity, np.zeros(dofmap.n_pressure)))
    matrix, rhs = apply_dirichlet(matrix, rhs, dofmap,
                                  homogeneous=homogeneous)
    solution = sparse_solve(matrix, rhs)
    if not np.all(np.isfinite(solution)):
        raise DivergenceError('linear solve returned non-finite values',
                              iteration=iteration)
    return State.from_vector(solution, dofmap)


def _newton_parts(setup, u):
    viscous = setup.nu * setup.laplacian
    if not setup.convection:
        return viscous, np.asarray(setup.load)
    linearization, convection = assemble_newton_linearization(
        u, setup.mesh, setup.dofmap)
    return viscous + linearization, setup.load + convection


def newton_system(setup, u_prev):
    """Constrained mixed Newton system at *u_prev*.

    :Returns:

        `tuple`
            The constrained CSR matrix and right-hand side whose
            solution is G(*u_prev*).

    """
    momentum, rhs_velocity = _newton_parts(setup, u_prev)
    matrix = saddle_matrix(momentum, setup.divergence)
    rhs = np.concatenate((rhs_velocity, np.zeros(setup.dofmap.n_pressure)))
    return apply_dirichlet(matrix, rhs, setup.dofmap)


def newton_operator(setup, u_prev, iteration=None):
    """Newton solution operator G.

    G(*u_prev*) is the velocity and pressure solving the Navier-Stokes
    equations linearized at *u_prev*::

        b(u, G(u), v) + b(G(u), u, v) - b(u, u, v)
            + nu (grad G(u), grad v) - (p, div v) = (f, v)
        (div G(u), q) = 0

    under the velocity boundary values and the zero-mean pressure gauge.
    Its fixed points are the solutions of the discrete steady
    Navier-Stokes equations.

    :Parameters:

        setup: `ProblemSetup`
            The discrete problem.

        u_prev: `State` or `numpy.ndarray`
            The iterate to linearize at (only its velocity is used).

        iteration: `int`, optional
            The iterate index reported if the result is not finite.

    :Returns:

        `State`

    """
    momentum, rhs_velocity = _newton_parts(setup, u_prev)
    return _solve_mixed(setup, momentum, rhs_velocity, iteration=iteration)


def picard_operator(setup, u_prev, iteration=None):
    """Picard solution operator, lagging the transporting velocity.

    Solves ``b(u_prev, u, v) + nu (grad u, grad v) - (p, div v) = (f, v)``
    with the continuity equation and the same constraints as
    `newton_operator`.

    :Parameters:

        setup: `ProblemSetup`
            The discrete problem.

        u_prev: `State` or `numpy.ndarray`
            The transporting velocity.

        iteration: `int`, optional
            The iterate index reported if the result is not finite.

    :Returns:

        `State`

    """
    momentum = setup.nu * setup.laplacian
    if setup.convection:
        momentum = momentum + assemble_picard_linearization(
            u_prev, setup.mesh, setup.dofmap)
    return _solve_mixed(setup, momentum, np.asarray(setup.load),
                        iteration=iteration)


def residual(setup, u_prev, u_new):
    """Velocity residual of one solution-operator step.

    :Parameters:

        setup: `ProblemSetup`
            The discrete problem, providing the H1-seminorm Gram
            matrix.

        u_prev: `State` or `numpy.ndarray`
            The iterate the operator was applied to.

        u_new: `State` or `numpy.ndarray`
            The operator output.

    :Returns:

        `tuple`
            The residual velocity vector ``u_new - u_prev`` and its
            H1-seminorm ``sqrt(y^T A y)``.

    """
    y = _velocity(u_new) - _velocity(u_prev)
    return y, seminorm(y, setup.laplacian)


def frechet_operator(setup, u, h, g_u=None):
    """Derivative G'(u; h) of the Newton solution operator.

    Solves the linear problem with the Newton matrix at *u* and the
    right-hand side ``-[b(h, G(u) - u, v) + b(G(u) - u - h, h, v)]``
    under homogeneous boundary values.

    :Parameters:

        setup: `ProblemSetup`
            The discrete problem.

        u: `State`
            The point of linearization.

        h: array-like object
            The velocity direction; expected to vanish on the
            Dirichlet dofs.

        g_u: `State`, optional
            G(*u*), if already computed. If not provided, it is
            recomputed.

    :Returns:

        `numpy.ndarray`
            The velocity coefficients of G'(*u*; *h*).

    """
    h = check_finite(h, 'direction')
    if h.shape != (setup.dofmap.n_velocity,):
        raise ValueError('direction of shape {} does not match {} velocity '
                         'dofs'.format(h.shape, setup.dofmap.n_velocity))
    if g_u is None:
        g_u = newton_operator(setup, u)
    momentum, _ = _newton_parts(setup, u)

    rhs = np.zeros(setup.dofmap.n_velocity)
    if setup.convection:
        step = _velocity(g_u) - _velocity(u)
        mesh, dofmap = setup.mesh, setup.dofmap
        rhs -= assemble_convection_vector(h, step, mesh, dofmap)
        rhs -= assemble_convection_vector(step - h, h, mesh, dofmap)
    return _solve_mixed(setup, momentum, rhs, homogeneous=True).velocity


def discrete_residual(setup, state):
    """Algebraic residual of the discrete steady Navier-Stokes equations.

    Momentum entries hold
    ``nu A u + b(u, u, .) - B^T p - f`` on free velocity dofs and the
    boundary mismatch on Dirichlet dofs; continuity entries hold ``B u``
    except for the gauge row, which holds the pressure mean.

    :Parameters:

        setup: `ProblemSetup`
            The discrete problem.

        state: `State`
            The candidate solution.

    :Returns:

        `numpy.ndarray`
            The residual vector of length n_total.

    """
    dofmap = setup.dofmap
    u, p = state.velocity, state.pressure
    momentum = setup.nu * (setup.laplacian @ u) - setup.divergence.T @ p
    momentum = momentum - setup.load
    if setup.convection:
        momentum += assemble_convection_vector(u, u, setup.mesh, dofmap)
    momentum[dofmap.dirichlet_dofs] = (u[dofmap.dirichlet_dofs]
                                       - dofmap.dirichlet_values)
    continuity = setup.divergence @ u
    continuity[dofmap.gauge_dof] = dofmap.pressure_weights @ p
    return np.concatenate((momentum, continuity))
