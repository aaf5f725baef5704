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
from scipy import sparse
from scipy.sparse import linalg as spla

logger = logging.getLogger(__name__)

#: Relative residual contract of `sparse_solve`.
SOLVE_RTOL = 1e-10


class SingularMatrixError(RuntimeError):
    """Raised when a factorization is singular to working precision.

    The *pivot* attribute holds the offending column index in the
    original (unpermuted) ordering, or None if the factorization
    routine did not report it.
    """

    def __init__(self, message, pivot=None):
        super(SingularMatrixError, self).__init__(message)
        self.pivot = pivot


def finalize(matrix):
    """Return *matrix* as a canonical CSR matrix.

    Duplicates are summed, column indices are sorted within each row
    and explicitly stored zeros are removed.
    """
    csr = sparse.csr_matrix(matrix, dtype=np.float64)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    return csr


class Factorization(object):
    """Sparse LU factorization of a square matrix (immutable).

    :Parameters:

        matrix: `scipy.sparse` matrix
            The square matrix to factorize.

    """

    def __init__(self, matrix):
        matrix = sparse.csc_matrix(matrix, dtype=np.float64)
        if matrix.shape[0] != matrix.shape[1]:
            raise ValueError('matrix must be square (got shape {})'.format(
                matrix.shape))
        if not np.all(np.isfinite(matrix.data)):
            raise ValueError('matrix contains non-finite entries')
        n = matrix.shape[0]

        # structurally empty rows or columns cannot be pivoted on
        for axis, label in ((0, 'column'), (1, 'row')):
            counts = np.diff(
                (matrix if axis == 0 else matrix.tocsr()).indptr
            )
            empty = np.flatnonzero(counts == 0)
            if empty.size:
                raise SingularMatrixError(
                    'matrix is structurally singular: {} {} is '
                    'empty'.format(label, empty[0]), pivot=int(empty[0])
                )

        try:
            self._lu = spla.splu(matrix, permc_spec='COLAMD')
        except RuntimeError as err:
            raise SingularMatrixError(
                'sparse LU factorization failed: {}'.format(err)
            )

        pivots = np.abs(self._lu.U.diagonal())
        scale = np.max(pivots) if pivots.size else 0.0
        small = np.flatnonzero(pivots <= n * np.finfo(np.float64).eps
                               * scale)
        if small.size:
            k = int(small[0])
            column = int(np.argsort(self._lu.perm_c)[k])
            raise SingularMatrixError(
                'matrix is singular to working precision: pivot {} '
                '(column {}) is {:.3g}'.format(k, column, pivots[k]),
                pivot=column
            )

        self.shape = matrix.shape
        self.matrix = matrix
        logger.debug('factorized %d x %d matrix (nnz=%d, fill=%d)',
                     n, n, matrix.nnz, self._lu.L.nnz + self._lu.U.nnz)

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=np.float64)
        if rhs.shape != (self.shape[0],):
            raise ValueError('right-hand side of length {} does not match '
                             'matrix of shape {}'.format(rhs.shape,
                                                         self.shape))
        if not np.all(np.isfinite(rhs)):
            raise ValueError('right-hand side contains non-finite values')
        return self._lu.solve(rhs)


def factorize(matrix):
    """Factorize a square sparse matrix with a fill-reducing LU.

    :Parameters:

        matrix: `scipy.sparse` matrix
            The square matrix to factorize.

    :Returns:

        `Factorization`

    """
    return Factorization(matrix)


def sparse_solve(matrix, rhs, refine=2):
    """Solve a sparse linear system with a direct LU factorization.

    The factorization uses a COLAMD fill-reducing column ordering. If
    the residual misses the contract
    ``||Ax - b|| <= 1e-10 max(1, ||b||)``, up to *refine* steps of
    iterative refinement are carried out with the same factors.

    :Parameters:

        matrix: `scipy.sparse` matrix
            The square system matrix.

        rhs: array-like object
            The right-hand side vector.

        refine: `int`, optional
            The maximum number of iterative refinement steps. If not
            provided, set to default value 2.

    :Returns:

        `numpy.ndarray`

    **Examples**

    >>> from scipy import sparse
    >>> a = sparse.csr_matrix([[2., 1.], [1., 3.]])
    >>> print(sparse_solve(a, [3., 5.]))
    [0.8 1.4]

    """
    lu = factorize(matrix)
    rhs = np.asarray(rhs, dtype=np.float64)
    x = lu.solve(rhs)

    target = SOLVE_RTOL * max(1.0, np.linalg.norm(rhs))
    res = rhs - lu.matrix @ x
    for step in range(refine):
        if np.linalg.norm(res) <= target:
            break
        logger.warning('sparse solve residual %.3e above %.3e, '
                       'refinement step %d', np.linalg.norm(res), target,
                       step + 1)
        x = x + lu.solve(res)
        res = rhs - lu.matrix @ x

    return x


# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
# ANDERSON LEAST SQUARES
# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

class DenseLsProblem(object):
    """Normal equations of an Anderson least-squares problem.

    The quadratic ``q(xi) = c - 2 xi.r + xi.G.xi`` is minimized, where
    ``G_ij = (grad d_i, grad d_j)`` and ``r_i = (grad y_k, grad d_i)`` for
    the residual differences ``d_i = y_k - y_{k-i}``, and
    ``c = ||grad y_k||^2``.

    :Parameters:

        gram: array-like object
            The symmetric (m_k, m_k) Gram matrix *G*.

        rhs: array-like object
            The right-hand side *r* of length m_k.

        constant: `float`, optional
            The constant *c*, needed to report the minimized value.

        condition_limit: `float`, optional
            The condition number above which the normal equations are
            regularized. If not provided, set to default value 1e12.

        shift: `float`, optional
            The relative Tikhonov shift; the absolute shift is
            ``shift * trace(G) / m_k``. If not provided, set to default
            value 1e-10.

        dependence_tolerance: `float`, optional
            The relative Schur complement at or below which a residual
            difference counts as linearly dependent on the more recent
            ones and is dropped. If not provided, set to default value
            1e-12.

    """

    def __init__(self, gram, rhs, constant=None, condition_limit=1e12,
                 shift=1e-10, dependence_tolerance=1e-12):
        self.gram = np.atleast_2d(np.asarray(gram, dtype=np.float64))
        self.rhs = np.atleast_1d(np.asarray(rhs, dtype=np.float64))
        m = self.rhs.shape[0]
        if self.gram.shape != (m, m):
            raise ValueError('Gram matrix of shape {} does not match '
                             'right-hand side of length {}'.format(
                                 self.gram.shape, m))
        if not np.allclose(self.gram, self.gram.T, rtol=1e-12, atol=0.0):
            raise ValueError('Gram matrix must be symmetric')
        self.constant = constant
        self.condition_limit = condition_limit
        self.shift = shift
        self.dependence_tolerance = dependence_tolerance

    @property
    def size(self):
        return self.rhs.shape[0]

    def objective(self, coefficients):
        if self.constant is None:
            raise ValueError('objective requires the constant term')
        xi = np.asarray(coefficients, dtype=np.float64)
        value = (self.constant - 2.0 * xi @ self.rhs
                 + xi @ self.gram @ xi)
        return max(float(value), 0.0)


class LsSolution(object):

    def __init__(self, coefficients, regularized, degenerate,
                 objective=None, dropped=()):
        self.coefficients = coefficients
        self.regularized = regularized
        self.degenerate = degenerate
        self.objective = objective
        self.dropped = tuple(dropped)

    def __repr__(self):
        return ('LsSolution(coefficients={}, regularized={}, '
                'degenerate={}, dropped={})'.format(
                    self.coefficients, self.regularized, self.degenerate,
                    self.dropped))


def independent_columns(gram, tolerance=1e-12):
    """Indices of a linearly independent subset of Gram columns.

    Columns are taken in order, so that earlier ones (the most recent
    residual differences) are kept. A column is dropped when its Schur
    complement against the kept columns is at most *tolerance* times its
    diagonal entry, or when its diagonal entry vanishes.

    **Examples**

    >>> independent_columns([[1., 1.], [1., 1.]])
    [0]
    >>> independent_columns([[0., 0.], [0., 2.]])
    [1]

    """
    gram = np.asarray(gram, dtype=np.float64)
    kept = []
    for j in range(gram.shape[0]):
        diagonal = gram[j, j]
        if not diagonal > 0.0:
            continue
        schur = diagonal
        if kept:
            cross = gram[kept, j]
            schur = diagonal - cross @ np.linalg.solve(
                gram[np.ix_(kept, kept)], cross)
        if schur > tolerance * diagonal:
            kept.append(j)
    return kept


def solve_anderson_ls(problem):
    """Solve the Anderson least-squares problem by normal equations.

    Linearly dependent residual differences are dropped first (see
    `independent_columns`) and receive zero coefficients, so a window
    whose differences are collinear reduces to the shorter window. If
    the condition number of the remaining Gram matrix exceeds the
    problem's *condition_limit*, a Tikhonov shift is applied and the
    solution is flagged as regularized. If no difference survives (all
    residual differences vanish) the coefficients are zero and flagged
    as degenerate.

    :Parameters:

        problem: `DenseLsProblem`
            The least-squares problem.

    :Returns:

        `LsSolution`

    **Examples**

    >>> solve_anderson_ls(DenseLsProblem([[2.]], [1.])).coefficients
    array([0.5])
    >>> solve_anderson_ls(DenseLsProblem([[0.]], [0.])).degenerate
    True
    >>> solve_anderson_ls(DenseLsProblem([[2., 2.], [2., 2.]],
    ...                                  [1., 1.])).coefficients
    array([0.5, 0. ])

    """
    m = problem.size
    xi = np.zeros(m)
    regularized = False
    kept = independent_columns(problem.gram, problem.dependence_tolerance)
    dropped = [j for j in range(m) if j not in kept]
    degenerate = m > 0 and not kept

    if kept:
        if dropped:
            logger.debug('Anderson window: dropping dependent differences '
                         '%s', dropped)
        gram = problem.gram[np.ix_(kept, kept)]
        size = len(kept)
        if np.linalg.cond(gram) > problem.condition_limit:
            shift = problem.shift * np.trace(gram) / size
            logger.warning('Anderson Gram matrix ill-conditioned, '
                           'applying Tikhonov shift %.3e', shift)
            gram = gram + shift * np.eye(size)
            regularized = True
        xi[kept] = np.linalg.solve(gram, problem.rhs[kept])

    objective = None
    if problem.constant is not None:
        objective = problem.objective(xi)

    return LsSolution(xi, regularized, degenerate, objective, dropped)
