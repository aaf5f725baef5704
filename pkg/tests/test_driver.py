import unittest
import numpy

import aanse
from aanse.tools import seminorm


class TestSolverConfig(unittest.TestCase):

    def test_defaults(self):
        config = aanse.SolverConfig(re=100.0)
        self.assertEqual(config.method, 'newton')
        self.assertEqual(config.tolerance, 1e-12)
        self.assertEqual(config.max_iters, 50)
        self.assertEqual(config.warm_start, 3)
        self.assertEqual(config.pattern, aanse.Pattern.CROSSED)
        self.assertFalse(config.accelerated)
        self.assertEqual(config.label, 'newton')

    def test_label(self):
        config = aanse.SolverConfig(method='anderson', depth=2)
        self.assertTrue(config.accelerated)
        self.assertEqual(config.label, 'anderson m=2')
        self.assertEqual(
            aanse.SolverConfig(method='anderson-picard').label,
            'anderson-picard m=1')

    def test_invalid(self):
        invalid = [
            dict(method='broyden'),
            dict(method='anderson', depth=0),
            dict(depth=-1),
            dict(tolerance=0.0),
            dict(max_iters=0),
            dict(warm_start=-1),
            dict(blowup_factor=1.0),
            dict(re=1.0, nu=1.0),
            dict(n=0),
            dict(pattern='hexagonal'),
        ]
        for kwargs in invalid:
            with self.subTest(**kwargs):
                with self.assertRaises(ValueError):
                    aanse.SolverConfig(**kwargs)

    def test_build_setup(self):
        setup = aanse.SolverConfig(nu=0.5, n=2).build_setup()
        self.assertEqual(setup.nu, 0.5)
        self.assertEqual(setup.mesh.n_triangles, 16)
        with self.assertRaises(ValueError):
            aanse.SolverConfig(n=2).build_setup()


class TestStatus(unittest.TestCase):

    def test_statuses(self):
        self.assertEqual(aanse.CONVERGED, 'Converged')
        self.assertEqual(aanse.MAX_ITERS, 'MaxIters')
        self.assertEqual(aanse.DIVERGED, 'Diverged')
        self.assertEqual(len({aanse.CONVERGED, aanse.MAX_ITERS,
                              aanse.DIVERGED}), 3)


class TestEstimateOrder(unittest.TestCase):

    def test_known_orders(self):
        cases = {
            1.0: [0.5 ** k for k in range(1, 12)],
            2.0: [1e-1, 1e-2, 1e-4, 1e-8],
            1.5: [10.0 ** (-(1.5 ** k)) for k in range(6)],
        }
        for order, residuals in cases.items():
            with self.subTest(order=order):
                self.assertAlmostEqual(aanse.estimate_order(residuals),
                                       order, places=10)

    def test_floor_is_excluded(self):
        # the last residual sits at the round-off floor
        residuals = [1e-1, 1e-2, 1e-4, 1e-8, 1e-17]
        self.assertAlmostEqual(aanse.estimate_order(residuals), 2.0,
                               places=10)

    def test_non_monotone_triples_are_skipped(self):
        residuals = [1.0, 2.0, 1e-1, 1e-2, 1e-3, 1e-4]
        self.assertAlmostEqual(aanse.estimate_order(residuals), 1.0,
                               places=10)

    def test_median(self):
        residuals = [1.0, 1e-1, 1e-2, 1e-4, 1e-8]
        self.assertAlmostEqual(aanse.estimate_order(residuals), 2.0,
                               places=10)

    def test_insufficient_data(self):
        for residuals in ([], [1.0, 0.1], [1.0, 0.1, 0.01],
                          [1.0, 1.0, 1.0, 1.0], [1.0, 1e-1, 1e-17, 0.0]):
            with self.subTest(residuals=residuals):
                with self.assertRaises(ValueError) as ctx:
                    aanse.estimate_order(residuals)
                self.assertIn('insufficient data', str(ctx.exception))

    def test_noise_floor(self):
        # a quadratically converging history ending on the round-off
        # plateau of outputs with seminorm 5
        residuals = numpy.array([7.1e-1, 8.2e-2, 6.4e-3, 6.3e-6, 2.7e-11,
                                 5.8e-13])
        logs = numpy.log(residuals)
        orders = (logs[2:] - logs[1:-1]) / (logs[1:-1] - logs[:-2])
        self.assertLess(aanse.estimate_order(residuals), 1.7)
        order = aanse.estimate_order(residuals,
                                     solution_norms=[5.0] * 6)
        self.assertAlmostEqual(order, numpy.median(orders[:3]), places=12)
        self.assertGreaterEqual(order, 1.7)

    def test_noise_floor_ignores_missing_norms(self):
        residuals = [1e-1, 1e-2, 1e-4, 1e-8, 1e-13]
        self.assertEqual(
            aanse.estimate_order(residuals,
                                 solution_norms=[numpy.nan] * 5),
            aanse.estimate_order(residuals))

    def test_log_argument(self):
        log = aanse.IterationLog('newton')
        for k, r in enumerate([1e-1, 1e-2, 1e-4, 1e-8]):
            log.records.append(aanse.IterationRecord(k + 1, r))
        self.assertAlmostEqual(aanse.estimate_order(log), 2.0, places=10)


class TestIterationLog(unittest.TestCase):

    def test_frame(self):
        log = aanse.IterationLog('anderson', depth=2)
        log.records.append(aanse.IterationRecord(1, 1e-1, gain=1.0))
        log.records.append(aanse.IterationRecord(2, 1e-2, gain=0.5,
                                                 gamma=[0.25],
                                                 wall_ms=3.0))
        frame = log.to_frame()
        self.assertListEqual(list(frame.columns),
                             ['iter', 'residual_h1', 'theta', 'gamma_1',
                              'gamma_2', 'wall_ms', 'solution_h1'])
        self.assertListEqual(frame['iter'].tolist(), [1, 2])
        self.assertTrue(numpy.isnan(frame['gamma_1'][0]))
        self.assertEqual(frame['gamma_1'][1], 0.25)
        self.assertTrue(numpy.isnan(frame['gamma_2'][1]))
        numpy.testing.assert_array_equal(log.residuals, [1e-1, 1e-2])

    def test_unaccelerated_frame(self):
        log = aanse.IterationLog('newton')
        log.records.append(aanse.IterationRecord(1, 1.0))
        frame = log.to_frame()
        self.assertListEqual(list(frame.columns),
                             ['iter', 'residual_h1', 'theta', 'wall_ms',
                              'solution_h1'])
        self.assertTrue(numpy.isnan(frame['theta'][0]))


class TestIterate(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.setup = aanse.cavity_setup(2, 'crossed', re=1.0)
        rng = numpy.random.default_rng(3)
        cls.target = rng.standard_normal(cls.setup.dofmap.n_velocity)
        cls.start = aanse.initial_state(cls.setup)

    def contract(self, setup, state, iteration=None):
        return aanse.State(0.5 * (state.velocity + self.target),
                           state.pressure)

    def config(self, **kwargs):
        kwargs.setdefault('max_iters', 100)
        kwargs.setdefault('timings', False)
        return aanse.SolverConfig(**kwargs)

    def test_converged(self):
        log = aanse.iterate(self.setup, self.contract, self.start,
                            self.config())
        self.assertEqual(log.status, aanse.CONVERGED)
        self.assertTrue(log.converged)
        self.assertLessEqual(log.residuals[-1], 1e-12)
        self.assertTrue(numpy.all(numpy.diff(log.residuals) < 0.0))
        self.assertAlmostEqual(aanse.estimate_order(log), 1.0, places=6)
        numpy.testing.assert_allclose(log.state.velocity, self.target,
                                      atol=1e-10)
        self.assertTrue(all(r.wall_ms == 0.0 for r in log.records))
        self.assertListEqual([r.iteration for r in log.records],
                             list(range(1, len(log) + 1)))
        self.assertAlmostEqual(
            log.records[-1].solution_norm,
            seminorm(log.state.velocity, self.setup.laplacian), places=12)
        self.assertTrue(numpy.all(numpy.isfinite(log.solution_norms)))

    def test_max_iters(self):
        log = aanse.iterate(self.setup, self.contract, self.start,
                            self.config(max_iters=3))
        self.assertEqual(log.status, aanse.MAX_ITERS)
        self.assertEqual(len(log), 3)

    def test_blowup(self):
        h = self.target

        def explode(setup, state, iteration=None):
            return aanse.State(state.velocity + 10.0 ** iteration * h,
                               state.pressure)

        log = aanse.iterate(self.setup, explode, self.start, self.config())
        self.assertEqual(log.status, aanse.DIVERGED)
        self.assertGreater(log.residuals[-1], 1e6 * log.residuals[0])
        self.assertLess(len(log), 10)

    def test_non_finite(self):
        def nan(setup, state, iteration=None):
            return aanse.State(numpy.full_like(state.velocity, numpy.nan),
                               state.pressure)

        log = aanse.iterate(self.setup, nan, self.start, self.config())
        self.assertEqual(log.status, aanse.DIVERGED)
        self.assertEqual(len(log), 0)

    def test_linear_solve_failure(self):
        def singular(setup, state, iteration=None):
            raise aanse.SingularMatrixError('singular', pivot=0)

        log = aanse.iterate(self.setup, singular, self.start, self.config())
        self.assertEqual(log.status, aanse.DIVERGED)
        self.assertIs(log.state, self.start)

    def test_depth_zero_history(self):
        setup = aanse.cavity_setup(4, 'crossed', re=50.0)
        start = aanse.initial_state(setup)
        config = self.config(max_iters=6)
        plain = aanse.iterate(setup, aanse.newton_operator, start, config)
        mixed = aanse.iterate(setup, aanse.newton_operator, start, config,
                              history=aanse.AndersonHistory(
                                  0, setup.laplacian))
        numpy.testing.assert_array_equal(plain.residuals, mixed.residuals)
        numpy.testing.assert_array_equal(plain.state.vector,
                                         mixed.state.vector)

    def test_affine_map_in_one_mixing_step(self):
        # residuals of a scalar contraction are collinear, so the first
        # mixing step lands on the fixed point
        history = aanse.AndersonHistory(2, self.setup.laplacian)
        log = aanse.iterate(self.setup, self.contract, self.start,
                            self.config(method='anderson', depth=2),
                            history=history)
        self.assertEqual(log.depth, 2)
        self.assertEqual(log.status, aanse.CONVERGED)
        self.assertEqual(len(log), 3)
        self.assertEqual(log.records[0].gain, 1.0)
        self.assertEqual(len(log.records[0].gamma), 0)
        self.assertAlmostEqual(log.records[1].gamma[0], -1.0, places=10)
        self.assertLessEqual(log.records[1].gain, 1e-6)
        numpy.testing.assert_allclose(log.state.velocity, self.target,
                                      atol=1e-12)


class TestRun(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.setup = aanse.cavity_setup(8, 'crossed', re=100.0)

    def solve(self, method, depth=1, **kwargs):
        kwargs.setdefault('max_iters', 100)
        kwargs.setdefault('tolerance', 1e-10)
        config = aanse.SolverConfig(method=method, depth=depth, re=100.0,
                                    n=8, timings=False, **kwargs)
        return aanse.run(self.setup, config)

    def test_initial_state(self):
        state = aanse.initial_state(self.setup)
        numpy.testing.assert_array_equal(state.velocity,
                                         self.setup.dofmap.lift())
        self.assertFalse(numpy.any(state.pressure))

    def test_methods_converge(self):
        members = [('newton', 1), ('picard', 1), ('anderson', 1),
                   ('anderson', 3), ('anderson-picard', 2)]
        solutions = {}
        for method, depth in members:
            state, log = self.solve(method, depth)
            with self.subTest(method=method, depth=depth):
                self.assertEqual(log.status, aanse.CONVERGED)
                self.assertEqual(len(log.prelude), 3)
                self.assertIs(state, log.state)
                self.assertEqual(log.depth,
                                 depth if method.startswith('anderson')
                                 else 0)
            solutions[(method, depth)] = state.velocity

        # all methods reach the same discrete solution
        reference = solutions[('newton', 1)]
        for key, velocity in solutions.items():
            with self.subTest(member=key):
                self.assertLessEqual(
                    seminorm(velocity - reference, self.setup.laplacian),
                    1e-9)

    def test_newton_beats_picard(self):
        _, newton = self.solve('newton')
        _, picard = self.solve('picard')
        self.assertLess(len(newton), len(picard))

    def test_no_warm_start(self):
        _, log = self.solve('newton', warm_start=0)
        self.assertEqual(log.prelude, [])
        self.assertEqual(log.status, aanse.CONVERGED)

    def test_max_iters(self):
        _, log = self.solve('picard', max_iters=2)
        self.assertEqual(log.status, aanse.MAX_ITERS)
        self.assertEqual(len(log), 2)

    def test_stokes_converges_in_two(self):
        mesh = aanse.build_unit_square_mesh(4, 'crossed')
        setup = aanse.ProblemSetup(mesh, aanse.MixedDofMap(mesh), 1.0,
                                   convection=False)
        config = aanse.SolverConfig(nu=1.0, n=4, warm_start=0,
                                    timings=False)
        _, log = aanse.run(setup, config)
        self.assertEqual(log.status, aanse.CONVERGED)
        self.assertEqual(len(log), 2)


if __name__ == '__main__':
    test_loader = unittest.TestLoader()
    test_suite = unittest.TestSuite()

    for case in (TestSolverConfig, TestStatus, TestEstimateOrder,
                 TestIterationLog, TestIterate, TestRun):
        test_suite.addTests(test_loader.loadTestsFromTestCase(case))

    runner = unittest.TextTestRunner(verbosity=2)
    runner.run(test_suite)
