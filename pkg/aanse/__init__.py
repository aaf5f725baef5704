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

from .mesh import (
    Mesh, Pattern, LID, WALL, build_unit_square_mesh, validate, dump_mesh
)
from .fem import (
    QuadratureRule, MixedDofMap, quadrature_rule, assemble_scalar_laplacian,
    assemble_mass, assemble_vector_laplacian, assemble_divergence,
    assemble_load, trilinear_b, assemble_convection_vector,
    assemble_newton_linearization, assemble_picard_linearization,
    saddle_matrix, apply_dirichlet, interpolate_velocity,
    interpolate_pressure, evaluate_velocity, evaluate_pressure
)
from .linalg import (
    SingularMatrixError, DenseLsProblem, LsSolution, finalize, factorize,
    sparse_solve, solve_anderson_ls, independent_columns
)
from .nse import (
    State, ProblemSetup, DivergenceError, cavity_setup, newton_operator,
    picard_operator, residual, frechet_operator, discrete_residual,
    newton_system
)
from .anderson import AndersonHistory, MixResult
from .driver import (
    SolverConfig, IterationLog, IterationRecord, CONVERGED, MAX_ITERS,
    DIVERGED, initial_state, iterate, run, estimate_order
)
from .verify import (
    ManufacturedCase, StudyAbortedError, stream_function_case, linear_case,
    mms_convergence_study, frechet_harness, dense_cross_check
)

from .version import __version__

#: Tuple containing the solution operators a fixed-point iteration can
#: be built on.
operators = (
    newton_operator, picard_operator
)

#: Tuple containing the assembly routines of the discrete problem.
assembly = (
    assemble_vector_laplacian, assemble_divergence, assemble_load,
    assemble_newton_linearization, assemble_picard_linearization,
    assemble_convection_vector
)

#: Tuple containing the verification oracles.
oracles = (
    mms_convergence_study, frechet_harness, dense_cross_check
)
