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
import time
import numpy as np
import pandas as pd

from .anderson import AndersonHistory
from .linalg import SingularMatrixError
from .mesh import Pattern
from .nse import (DivergenceError, State, cavity_setup, newton_operator,
                  picard_operator, residual)
from .tools import seminorm

logger = logging.getLogger(__name__)

CONVERGED = 'Converged'
MAX_ITERS = 'MaxIters'
DIVERGED = 'Diverged'

#: Round-off level of a solution-operator output, in units of machine
#: epsilon times its H1-seminorm. Residuals below it measure noise.
NOISE_FACTOR = 4000.0

#: Nonlinear methods: (solution operator, Anderson-accelerated).
METHODS = {
    'newton': (newton_operator, False),
    'picard': (picard_operator, False),
    'anderson': (newton_operator, True),
    'anderson-picard': (picard_operator, True),
}


class SolverConfig(object):
    """Settings of one nonlinear solve.

    :Parameters:

        method: `str`, optional
            One of 'newton', 'picard', 'anderson' (Anderson-accelerated
            Newton) and 'anderson-picard'. If not provided, set to
            default value 'newton'.

        depth: `int`, optional
            The Anderson depth m, at least 1 for the Anderson methods.
            If not provided, set to default value 1.

        tolerance: `float`, optional
            The absolute tolerance on the H1-seminorm of the residual.
            If not provided, set to default value 1e-12.

        max_iters: `int`, optional
            The maximum number of main iterations. If not provided, set
            to default value 50.

        warm_start: `int`, optional
            The number of Picard iterations run from the zero interior
            state before the main iterations; 0 starts the main
            iterations from that state. If not provided, set to default
            value 3.

        blowup_factor: `float`, optional
            The run is declared diverged once a residual exceeds this
            factor times the first one. If not provided, set to default
            value 1e6.

        re: `float`, optional
            The Reynolds number of the cavity problem (1/nu).

        nu: `float`, optional
            The viscosity of the cavity problem, in place of *re*.

        n: `int`, optional
            The mesh subdivisions per side. If not provided, set to
            default value 16.

        pattern: `Pattern` or `str`, optional
            The mesh pattern. If not provided, set to default value
            `Pattern.CROSSED`.

        lid_velocity: `float`, optional
            The lid speed. If not provided, set to default value 1.0.

        timings: `bool`, optional
            Whether to record wall-clock times; without them times are
            reported as zero. If not provided, set to default value
            True.

    """

    def __init__(self, method='newton', depth=1, tolerance=1e-12,
                 max_iters=50, warm_start=3, blowup_factor=1e6, re=None,
                 nu=None, n=16, pattern=Pattern.CROSSED, lid_velocity=1.0,
                 timings=True):
        if method not in METHODS:
            raise ValueError('method must be one of {} (got {!r})'.format(
                ', '.join(sorted(METHODS)), method))
        if METHODS[method][1] and depth < 1:
            raise ValueError('depth must be at least 1 for Anderson '
                             'methods (got {})'.format(depth))
        if depth < 0:
            raise ValueError('depth must be non-negative')
        if not tolerance > 0.0:
            raise ValueError('tolerance must be positive '
                             '(got {})'.format(tolerance))
        if max_iters < 1:
            raise ValueError('max_iters must be at least 1 '
                             '(got {})'.format(max_iters))
        if warm_start < 0:
            raise ValueError('warm_start must be non-negative '
                             '(got {})'.format(warm_start))
        if not blowup_factor > 1.0:
            raise ValueError('blowup_factor must be greater than 1 '
                             '(got {})'.format(blowup_factor))
        if re is not None and nu is not None:
            raise ValueError('re and nu are mutually exclusive')
        if n < 1:
            raise ValueError('n must be at least 1 (got {})'.format(n))

        self.method = method
        self.depth = int(depth)
        self.tolerance = float(tolerance)
        self.max_iters = int(max_iters)
        self.warm_start = int(warm_start)
        self.blowup_factor = float(blowup_factor)
        self.re = re
        self.nu = nu
        self.n = int(n)
        self.pattern = Pattern(pattern)
        self.lid_velocity = float(lid_velocity)
        self.timings = timings

    @property
    def accelerated(self):
        return METHODS[self.method][1]

    @property
    def label(self):
        if self.accelerated:
            return '{} m={}'.format(self.method, self.depth)
        return self.method

    def __repr__(self):
        return ('SolverConfig(method={!r}, depth={}, tolerance={:g}, '
                'max_iters={}, warm_start={})'.format(
                    self.method, self.depth, self.tolerance, self.max_iters,
                    self.warm_start))

    def build_setup(self):
        """Assemble the cavity problem described by this configuration."""
        if self.re is None and self.nu is None:
            raise ValueError('one of re and nu must be given')
        return cavity_setup(self.n, self.pattern, re=self.re, nu=self.nu,
                            lid_velocity=self.lid_velocity)


class IterationRecord(object):

    def __init__(self, iteration, residual, gain=np.nan, gamma=(),
                 wall_ms=0.0, degenerate=False, regularized=False,
                 difference_norms=(), solution_norm=np.nan):
        self.iteration = iteration
        self.residual = residual
        self.solution_norm = solution_norm
        self.gain = gain
        self.gamma = tuple(gamma)
        self.wall_ms = wall_ms
        self.degenerate = degenerate
        self.regularized = regularized
        self.difference_norms = tuple(difference_norms)

    def __repr__(self):
        return 'IterationRecord(iteration={}, residual={:.6e})'.format(
            self.iteration, self.residual)


class IterationLog(object):
    """History of a nonlinear solve.

    :Parameters:

        method: `str`
            The nonlinear method of the main iterations.

        depth: `int`
            The Anderson depth, or 0 without acceleration.

    """

    def __init__(self, method, depth=0):
        self.method = method
        self.depth = depth
        self.records = []
        self.prelude = []
        self.status = None
        self.state = None

    def __len__(self):
        return len(self.records)

    def __repr__(self):
        return 'IterationLog(method={!r}, iterations={}, status={})'.format(
            self.method, len(self), self.status)

    @property
    def residuals(self):
        return np.array([r.residual for r in self.records])

    @property
    def solution_norms(self):
        return np.array([r.solution_norm for r in self.records])

    @property
    def iterations(self):
        return len(self.records)

    @property
    def converged(self):
        return self.status == CONVERGED

    def to_frame(self):
        """Tabulate the main iterations.

        :Returns:

            `pandas.DataFrame`
                Columns *iter*, *residual_h1*, *theta*, *gamma_1* to
                *gamma_m* (Anderson methods only), *wall_ms* and
                *solution_h1* (the H1-seminorm of the operator output).
                Entries without a value (gains of unaccelerated steps,
                gammas beyond the current window) are NaN.

        """
        columns = ['iter', 'residual_h1', 'theta']
        columns += ['gamma_{}'.format(i + 1) for i in range(self.depth)]
        columns += ['wall_ms', 'solution_h1']
        rows = []
        for rec in self.records:
            gamma = list(rec.gamma) + [np.nan] * (self.depth
                                                  - len(rec.gamma))
            rows.append([rec.iteration, rec.residual, rec.gain]
                        + gamma[:self.depth]
                        + [rec.wall_ms, rec.solution_norm])
        frame = pd.DataFrame(rows, columns=columns)
        frame['iter'] = frame['iter'].astype(np.int64)
        return frame


def initial_state(setup):
    """Zero interior state carrying the Dirichlet boundary values."""
    dofmap = setup.dofmap
    return State(dofmap.lift(), np.zeros(dofmap.n_pressure))


def _elapsed_ms(start, timings):
    if not timings:
        return 0.0
    return 1000.0 * (time.perf_counter() - start)


def iterate(setup, operator, state, config, history=None):
    """Fixed-point iteration of a solution operator, optionally mixed.

    :Parameters:

        setup: `ProblemSetup`
            The discrete problem.

        operator: callable
            The solution operator, e.g. `newton_operator`.

        state: `State`
            The initial iterate.

        config: `SolverConfig`
            The stopping settings.

        history: `AndersonHistory`, optional
            The Anderson window; without it the operator outputs are
            used as iterates.

    :Returns:

        `IterationLog`

    """
    log = IterationLog(config.method,
                       history.depth if history is not None else 0)
    first = None
    status = MAX_ITERS

    for k in range(1, config.max_iters + 1):
        start = time.perf_counter()
        try:
            output = operator(setup, state, iteration=k)
        except (SingularMatrixError, DivergenceError) as err:
            logger.warning('iteration %d: linear solve failed (%s)', k, err)
            status = DIVERGED
            break

        y, norm = residual(setup, state, output)
        if not np.isfinite(norm):
            logger.warning('iteration %d: non-finite residual', k)
            status = DIVERGED
            break
        if first is None:
            first = norm

        record = IterationRecord(
            k, norm, solution_norm=seminorm(output.velocity, setup.laplacian))
        if norm <= config.tolerance:
            state = output
            status = CONVERGED
        elif norm > config.blowup_factor * first:
            logger.warning('iteration %d: residual %.3e exceeds %g times '
                           'the first one', k, norm, config.blowup_factor)
            status = DIVERGED
        elif history is not None:
            history.push(output, y)
            mixed = history.mix()
            state = mixed.state
            record.gain = mixed.gain
            record.gamma = tuple(mixed.gamma)
            record.degenerate = mixed.degenerate
            record.regularized = mixed.regularized
            record.difference_norms = tuple(mixed.difference_norms)
        else:
            state = output

        record.wall_ms = _elapsed_ms(start, config.timings)
        log.records.append(record)
        logger.debug('iteration %d: residual %.6e gain %.6g gamma %s', k,
                     norm, record.gain, record.gamma)
        if status != MAX_ITERS:
            break

    log.status = status
    log.state = state
    return log


def run(setup, config):
    """Solve the discrete steady Navier-Stokes problem.

    A Picard warm start of *config.warm_start* iterations is run first
    from the zero interior state; its residuals are kept in the log's
    prelude. The main iterations then apply the configured method until
    the residual H1-seminorm reaches the tolerance, the iteration budget
    is spent, or the run diverges. A diverged run is reported through
    the log status and does not raise.

    :Parameters:

        setup: `ProblemSetup`
            The discrete problem.

        config: `SolverConfig`
            The nonlinear method and stopping settings.

    :Returns:

        `tuple`
            The last iterate (`State`) and the `IterationLog`.

    """
    operator, accelerated = METHODS[config.method]
    logger.info('%s run: %r, %d Picard warm-start iterations',
                config.label, setup, config.warm_start)

    state = initial_state(setup)
    prelude = []
    for k in range(1, config.warm_start + 1):
        start = time.perf_counter()
        try:
            output = picard_operator(setup, state, iteration=k)
        except (SingularMatrixError, DivergenceError) as err:
            logger.warning('warm start %d: linear solve failed (%s)', k,
                           err)
            log = IterationLog(config.method,
                               config.depth if accelerated else 0)
            log.prelude = prelude
            log.status = DIVERGED
            log.state = state
            return state, log
        _, norm = residual(setup, state, output)
        prelude.append(IterationRecord(k, norm, wall_ms=_elapsed_ms(
            start, config.timings)))
        state = output

    history = None
    if accelerated:
        history = AndersonHistory(config.depth, setup.laplacian)
    log = iterate(setup, operator, state, config, history=history)
    log.prelude = prelude
    if accelerated:
        log.depth = config.depth

    if log.status == DIVERGED:
        logger.warning('%s run diverged after %d iterations', config.label,
                       len(log))
    else:
        logger.info('%s run finished: %s after %d iterations, residual '
                    '%.3e', config.label, log.status, len(log),
                    log.residuals[-1] if len(log) else np.nan)
    return log.state, log


def estimate_order(log, floor_factor=100.0, noise_factor=NOISE_FACTOR,
                   solution_norms=None):
    """Estimate the convergence order of a residual history.

    For every interior step with strictly decreasing residuals
    r_{k-1} > r_k > r_{k+1}, all above the stagnation floor, the order
    ``ln(r_{k+1}/r_k) / ln(r_k/r_{k-1})`` is computed; the median of
    these orders is returned.

    The floor is *floor_factor* times machine epsilon times r_1. When
    the H1-seminorms of the operator outputs are known, it is raised to
    *noise_factor* times machine epsilon times the largest of them, the
    level at which residuals of a converged run only carry round-off.

    :Parameters:

        log: `IterationLog` or array-like object
            The log of a run, or its residual sequence.

        floor_factor: `float`, optional
            The floor relative to machine epsilon times the first
            residual. If not provided, set to default value 100.

        noise_factor: `float`, optional
            The floor relative to machine epsilon times the seminorm of
            the outputs. If not provided, set to default value
            `NOISE_FACTOR`.

        solution_norms: array-like object, optional
            The H1-seminorms of the operator outputs, e.g. the
            *solution_h1* column of a history file. If not provided,
            they are taken from *log* when it is an `IterationLog`;
            NaN entries are ignored.

    :Returns:

        `float`

    **Examples**

    >>> print(round(estimate_order([1e-1, 1e-2, 1e-4, 1e-8]), 12))
    2.0
    >>> print(round(estimate_order([1e-1, 1e-2, 1e-3, 1e-4]), 12))
    1.0
    >>> r = [1e-1, 1e-2, 1e-4, 1e-8, 1e-13]
    >>> print(round(estimate_order(r, solution_norms=[1.] * 5), 12))
    2.0

    """
    residuals = np.asarray(getattr(log, 'residuals', log), dtype=np.float64)
    if residuals.ndim != 1:
        raise ValueError('residuals must be a sequence')
    if residuals.size < 3:
        raise ValueError('insufficient data: {} residuals'.format(
            residuals.size))

    eps = np.finfo(np.float64).eps
    floor = floor_factor * eps * residuals[0]
    if solution_norms is None:
        solution_norms = getattr(log, 'solution_norms', ())
    norms = np.asarray(solution_norms, dtype=np.float64).ravel()
    norms = norms[np.isfinite(norms)]
    if norms.size:
        floor = max(floor, noise_factor * eps * np.max(norms))

    prev, curr, nxt = residuals[:-2], residuals[1:-1], residuals[2:]
    valid = ((prev > curr) & (curr > nxt) & (nxt > floor)
             & np.isfinite(prev) & np.isfinite(nxt))
    orders = (np.log(nxt[valid] / curr[valid])
              / np.log(curr[valid] / prev[valid]))
    if orders.size < 2:
        raise ValueError('insufficient data: {} valid order '
                         'estimates'.format(orders.size))
    return float(np.median(orders))
