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

from collections import deque
import numpy as np

from .linalg import DenseLsProblem, solve_anderson_ls
from .tools import seminorm


class MixResult(object):
    """Outcome of one Anderson mixing step.

    :Parameters:

        state: `State`
            The mixed iterate u_k.

        gamma: `numpy.ndarray`
            The m_k mixing coefficients, gamma_i weighting the output
            i steps back.

        gain: `float`
            The Anderson gain, the ratio of the minimized combined
            residual seminorm to the seminorm of the newest residual.

        degenerate: `bool`
            Whether the window was degenerate (all residual differences
            vanish), in which case u_k is the newest output itself.

        regularized: `bool`
            Whether the least-squares problem was regularized.

        residual_norm: `float`
            The H1-seminorm of the newest residual.

        difference_norms: `numpy.ndarray`
            The H1-seminorms of the residual differences y_k - y_{k-i}.

    """

    def __init__(self, state, gamma, gain, degenerate=False,
                 regularized=False, residual_norm=np.nan,
                 difference_norms=None):
        self.state = state
        self.gamma = gamma
        self.gain = gain
        self.degenerate = degenerate
        self.regularized = regularized
        self.residual_norm = residual_norm
        self.difference_norms = (np.zeros(0) if difference_norms is None
                                 else difference_norms)

    def __repr__(self):
        return 'MixResult(gamma={}, gain={:.6g}, degenerate={})'.format(
            self.gamma, self.gain, self.degenerate)


class AndersonHistory(object):
    """Sliding window of solution-operator outputs and residuals.

    Up to *depth* + 1 pairs (output, residual) are kept, the oldest
    being evicted first. The residual inner products in the seminorm
    induced by *gram* are cached and updated one row at a time.

    :Parameters:

        depth: `int`
            The Anderson depth m. Zero gives back the unaccelerated
            iteration.

        gram: `scipy.sparse` matrix
            The Gram matrix of the seminorm the residuals are combined
            in (the vector Laplacian for the H1-seminorm).

        debug: `bool`, optional
            Whether to re-evaluate each combined residual and check it
            against the gain derived from the least-squares value. If
            not provided, set to default value False.

    """

    def __init__(self, depth, gram, debug=False):
        if isinstance(depth, bool) or not isinstance(depth, (int,
                                                              np.integer)):
            raise TypeError('depth must be an integer')
        if depth < 0:
            raise ValueError('depth must be non-negative '
                             '(got {})'.format(depth))
        self.depth = int(depth)
        self.gram = gram
        self.debug = debug
        self._outputs = deque(maxlen=self.depth + 1)
        self._residuals = deque(maxlen=self.depth + 1)
        self._inner = np.zeros((0, 0))

    def __len__(self):
        return len(self._outputs)

    def __repr__(self):
        return 'AndersonHistory(depth={}, entries={})'.format(self.depth,
                                                               len(self))

    @property
    def window(self):
        """Number of older entries the next mix combines with."""
        return max(len(self) - 1, 0)

    @property
    def inner_products(self):
        return self._inner.copy()

    def push(self, output, y):
        """Append a solution-operator output and its residual.

        :Parameters:

            output: `State`
                The output u~_k of the solution operator.

            y: array-like object
                The residual y_k = u~_k - u_{k-1} (velocity only).

        """
        y = np.asarray(y, dtype=np.float64)
        n = self.gram.shape[0]
        if y.shape != (n,):
            raise ValueError('residual of shape {} does not match Gram '
                             'matrix of size {}'.format(y.shape, n))
        if output.velocity.shape != (n,):
            raise ValueError('output velocity of shape {} does not match '
                             'Gram matrix of size {}'.format(
                                 output.velocity.shape, n))

        inner = self._inner
        if len(self) == self._outputs.maxlen:
            inner = inner[1:, 1:]
            residuals = list(self._residuals)[1:]
        else:
            residuals = list(self._residuals)

        ay = self.gram @ y
        row = np.array([r @ ay for r in residuals] + [y @ ay])
        size = row.shape[0]
        updated = np.empty((size, size))
        updated[:-1, :-1] = inner
        updated[-1, :] = row
        updated[:, -1] = row

        self._outputs.append(output)
        self._residuals.append(y)
        self._inner = updated

    def mix(self):
        """Combine the newest output with the older ones in the window.

        The coefficients minimize the seminorm of
        ``y_k - sum_i gamma_i (y_k - y_{k-i})`` and the mixed iterate is
        ``u~_k - sum_i gamma_i (u~_k - u~_{k-i})``, an affine combination
        of the stored outputs.

        :Returns:

            `MixResult`

        """
        if not len(self):
            raise ValueError('cannot mix an empty history')
        newest = self._outputs[-1]
        k = len(self) - 1
        m = self.window
        yy = self._inner
        c = yy[k, k]
        norm = np.sqrt(max(c, 0.0))

        if m == 0:
            return MixResult(newest, np.zeros(0), 1.0, residual_norm=norm)

        back = k - np.arange(1, m + 1)
        r = c - yy[k, back]
        gram = c - yy[k, back][:, None] - yy[k, back][None, :] \
            + yy[np.ix_(back, back)]
        gram = 0.5 * (gram + gram.T)
        differences = np.sqrt(np.maximum(np.diag(gram), 0.0))

        solution = solve_anderson_ls(DenseLsProblem(gram, r, constant=c))
        gamma = solution.coefficients
        gain = np.sqrt(solution.objective) / norm if norm > 0.0 else 1.0

        if solution.degenerate:
            return MixResult(newest, gamma, gain, degenerate=True,
                             regularized=solution.regularized,
                             residual_norm=norm,
                             difference_norms=differences)

        velocity = newest.velocity.copy()
        pressure = newest.pressure.copy()
        for g, i in zip(gamma, back):
            older = self._outputs[i]
            velocity -= g * (newest.velocity - older.velocity)
            pressure -= g * (newest.pressure - older.pressure)
        state = type(newest)(velocity, pressure)

        if self.debug:
            combined = self._residuals[k].copy()
            for g, i in zip(gamma, back):
                combined -= g * (self._residuals[k] - self._residuals[i])
            direct = seminorm(combined, self.gram) / norm
            if abs(direct - gain) > 1e-8:
                raise RuntimeError('Anderson gain {:.12g} disagrees with the '
                                   'combined residual ({:.12g})'.format(
                                       gain, direct))

        return MixResult(state, gamma, gain, degenerate=False,
                         regularized=solution.regularized,
                         residual_norm=norm, difference_norms=differences)
