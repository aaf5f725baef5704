import unittest
import numpy
from scipy import sparse

import aanse


def random_state(rng, n=6, k=2):
    return aanse.State(rng.standard_normal(n), rng.standard_normal(k))


class TestAndersonHistory(unittest.TestCase):

    def setUp(self):
        self.gram = sparse.identity(6, format='csr')
        self.rng = numpy.random.default_rng(42)

    def test_invalid_depth(self):
        for depth in (1.5, True, '2'):
            with self.subTest(depth=depth):
                with self.assertRaises(TypeError):
                    aanse.AndersonHistory(depth, self.gram)
        with self.assertRaises(ValueError):
            aanse.AndersonHistory(-1, self.gram)

    def test_empty(self):
        history = aanse.AndersonHistory(2, self.gram)
        self.assertEqual(len(history), 0)
        self.assertEqual(history.window, 0)
        with self.assertRaises(ValueError):
            history.mix()

    def test_shape_mismatch(self):
        history = aanse.AndersonHistory(1, self.gram)
        with self.assertRaises(ValueError):
            history.push(random_state(self.rng), numpy.ones(5))
        with self.assertRaises(ValueError):
            history.push(random_state(self.rng, n=5), numpy.ones(6))

    def test_first_step_is_unmixed(self):
        history = aanse.AndersonHistory(3, self.gram)
        output = random_state(self.rng)
        history.push(output, self.rng.standard_normal(6))
        mixed = history.mix()
        self.assertIs(mixed.state, output)
        self.assertEqual(mixed.gamma.shape, (0,))
        self.assertEqual(mixed.gain, 1.0)
        self.assertFalse(mixed.degenerate)

    def test_depth_zero(self):
        history = aanse.AndersonHistory(0, self.gram)
        for _ in range(3):
            output = random_state(self.rng)
            history.push(output, self.rng.standard_normal(6))
            self.assertEqual(len(history), 1)
            self.assertIs(history.mix().state, output)

    def test_sliding_window(self):
        history = aanse.AndersonHistory(2, self.gram)
        residuals = [self.rng.standard_normal(6) for _ in range(5)]
        for y in residuals:
            history.push(random_state(self.rng), y)
        self.assertEqual(len(history), 3)
        self.assertEqual(history.window, 2)
        kept = numpy.array(residuals[-3:])
        numpy.testing.assert_allclose(history.inner_products,
                                      kept @ kept.T, rtol=1e-13,
                                      atol=1e-12)

    def test_depth_one(self):
        history = aanse.AndersonHistory(1, self.gram)
        old, new = random_state(self.rng), random_state(self.rng)
        y_old = self.rng.standard_normal(6)
        y_new = self.rng.standard_normal(6)
        history.push(old, y_old)
        history.push(new, y_new)
        mixed = history.mix()

        d = y_new - y_old
        gamma = (y_new @ d) / (d @ d)
        numpy.testing.assert_allclose(mixed.gamma, [gamma], rtol=1e-12)
        numpy.testing.assert_allclose(
            mixed.state.velocity,
            new.velocity - gamma * (new.velocity - old.velocity),
            rtol=1e-12, atol=1e-14)
        numpy.testing.assert_allclose(
            mixed.state.pressure,
            new.pressure - gamma * (new.pressure - old.pressure),
            rtol=1e-12, atol=1e-14)
        # |gamma|^2 ||d||^2 = (1 - theta^2) ||y_k||^2
        self.assertAlmostEqual(gamma ** 2 * (d @ d),
                               (1.0 - mixed.gain ** 2) * (y_new @ y_new),
                               places=10)
        self.assertAlmostEqual(mixed.residual_norm,
                               numpy.sqrt(y_new @ y_new), places=12)
        numpy.testing.assert_allclose(mixed.difference_norms,
                                      [numpy.sqrt(d @ d)], rtol=1e-12)

    def test_gain_and_optimality(self):
        a = self.rng.standard_normal((6, 6))
        gram = sparse.csr_matrix(a @ a.T + numpy.eye(6))
        history = aanse.AndersonHistory(3, gram, debug=True)
        residuals = []
        for step in range(8):
            y = self.rng.standard_normal(6)
            residuals.append(y)
            history.push(random_state(self.rng), y)
            mixed = history.mix()
            with self.subTest(step=step):
                self.assertLessEqual(mixed.gain, 1.0 + 1e-12)
                self.assertGreaterEqual(mixed.gain, 0.0)
                window = residuals[-len(history):]
                y_k = window[-1]
                combined = y_k - sum(
                    g * (y_k - window[-2 - i])
                    for i, g in enumerate(mixed.gamma))
                norm = numpy.sqrt(combined @ (gram @ combined))
                self.assertAlmostEqual(norm / mixed.residual_norm,
                                       mixed.gain, places=8)
                for i in range(mixed.gamma.shape[0]):
                    shifted = combined - 1e-3 * (y_k - window[-2 - i])
                    self.assertGreaterEqual(
                        shifted @ (gram @ shifted),
                        combined @ (gram @ combined))

    def test_degenerate_window(self):
        history = aanse.AndersonHistory(2, self.gram)
        y = self.rng.standard_normal(6)
        history.push(random_state(self.rng), y)
        newest = random_state(self.rng)
        history.push(newest, y.copy())
        mixed = history.mix()
        self.assertTrue(mixed.degenerate)
        self.assertIs(mixed.state, newest)
        numpy.testing.assert_array_equal(mixed.gamma, [0.0])

    def test_collinear_differences(self):
        # y_k-2 = y_k-1 leaves the same mix as a window of depth one
        y_old = self.rng.standard_normal(6)
        y_new = self.rng.standard_normal(6)
        outputs = [random_state(self.rng) for _ in range(3)]
        deep = aanse.AndersonHistory(2, self.gram)
        for output, y in zip(outputs, (y_old, y_old.copy(), y_new)):
            deep.push(output, y)
        shallow = aanse.AndersonHistory(1, self.gram)
        for output, y in zip(outputs[1:], (y_old.copy(), y_new)):
            shallow.push(output, y)

        mixed, expected = deep.mix(), shallow.mix()
        self.assertFalse(mixed.regularized)
        self.assertFalse(mixed.degenerate)
        numpy.testing.assert_allclose(mixed.gamma,
                                      [expected.gamma[0], 0.0],
                                      rtol=1e-14, atol=0.0)
        numpy.testing.assert_allclose(mixed.state.vector,
                                      expected.state.vector,
                                      rtol=0.0, atol=1e-14)
        self.assertAlmostEqual(mixed.gain, expected.gain, places=14)

    def test_collinear_residual_differences(self):
        history = aanse.AndersonHistory(2, self.gram)
        y = self.rng.standard_normal(6)
        a = self.rng.standard_normal(6)
        for residual in (y - 2.0 * a, y - a, y):
            history.push(random_state(self.rng), residual)
        mixed = history.mix()
        self.assertFalse(mixed.regularized)
        self.assertEqual(mixed.gamma[1], 0.0)
        self.assertLessEqual(mixed.gain, 1.0 + 1e-12)

    def test_orthogonal_residual_is_not_degenerate(self):
        history = aanse.AndersonHistory(1, self.gram)
        history.push(random_state(self.rng), [1.0, 1.0, 0.0, 0.0, 0.0, 0.0])
        newest = random_state(self.rng)
        history.push(newest, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        mixed = history.mix()
        self.assertFalse(mixed.degenerate)
        numpy.testing.assert_array_equal(mixed.gamma, [0.0])
        self.assertEqual(mixed.gain, 1.0)
        numpy.testing.assert_array_equal(mixed.state.vector, newest.vector)


class TestMixResult(unittest.TestCase):

    def test_defaults(self):
        result = aanse.MixResult(None, numpy.zeros(0), 1.0)
        self.assertFalse(result.degenerate)
        self.assertFalse(result.regularized)
        self.assertEqual(result.difference_norms.shape, (0,))


if __name__ == '__main__':
    test_loader = unittest.TestLoader()
    test_suite = unittest.TestSuite()

    for case in (TestAndersonHistory, TestMixResult):
        test_suite.addTests(test_loader.loadTestsFromTestCase(case))

    runner = unittest.TextTestRunner(verbosity=2)
    runner.run(test_suite)
