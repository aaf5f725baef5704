import os
import tempfile
import unittest
import numpy

import aanse
from aanse.mesh import LID, WALL, Mesh, Pattern


class TestUnitSquareMesh(unittest.TestCase):

    sizes = (1, 2, 3, 8, 17)

    def test_entity_counts(self):
        for pattern in Pattern:
            for n in self.sizes:
                with self.subTest(pattern=pattern.value, n=n):
                    mesh = aanse.build_unit_square_mesh(n, pattern)
                    if pattern is Pattern.DIAGONAL:
                        nv, nt = (n + 1) ** 2, 2 * n ** 2
                    else:
                        nv, nt = (n + 1) ** 2 + n ** 2, 4 * n ** 2
                    self.assertEqual(mesh.n_vertices, nv)
                    self.assertEqual(mesh.n_triangles, nt)
                    self.assertEqual(mesh.n_edges, nv + nt - 1)

    def test_valid(self):
        for pattern in Pattern:
            for n in self.sizes:
                with self.subTest(pattern=pattern.value, n=n):
                    mesh = aanse.build_unit_square_mesh(n, pattern)
                    self.assertEqual(aanse.validate(mesh), [])
                    self.assertTrue(numpy.all(mesh.areas > 0.0))
                    numpy.testing.assert_allclose(numpy.sum(mesh.areas), 1.0,
                                                  rtol=1e-14)

    def test_single_cell(self):
        mesh = aanse.build_unit_square_mesh(1)
        numpy.testing.assert_array_equal(
            mesh.vertices, [[0., 0.], [1., 0.], [0., 1.], [1., 1.]])
        self.assertEqual(mesh.n_triangles, 2)
        self.assertEqual(mesh.n_edges, 5)

    def test_boundary_tags(self):
        for pattern in Pattern:
            n = 4
            with self.subTest(pattern=pattern.value):
                mesh = aanse.build_unit_square_mesh(n, pattern)
                self.assertEqual(len(mesh.boundary_vertices), 4 * n)
                self.assertEqual(len(mesh.boundary_edges), 4 * n)
                lid = mesh.boundary_vertices[mesh.boundary_vertex_tags == LID]
                # corners (0, 1) and (1, 1) belong to the lid
                self.assertEqual(len(lid), n + 1)
                numpy.testing.assert_array_equal(mesh.vertices[lid, 1], 1.0)
                self.assertEqual(
                    numpy.sum(mesh.boundary_edge_tags == LID), n)
                self.assertEqual(
                    numpy.sum(mesh.boundary_edge_tags == WALL), 3 * n)

    def test_h(self):
        self.assertAlmostEqual(
            aanse.build_unit_square_mesh(4, 'diagonal').h,
            numpy.sqrt(2.0) / 4)
        self.assertAlmostEqual(
            aanse.build_unit_square_mesh(4, 'crossed').h, 0.25)

    def test_read_only(self):
        mesh = aanse.build_unit_square_mesh(2)
        with self.assertRaises(ValueError):
            mesh.vertices[0, 0] = 0.5
        with self.assertRaises(ValueError):
            mesh.triangles[0, 0] = 1

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            aanse.build_unit_square_mesh(0)
        with self.assertRaises(TypeError):
            aanse.build_unit_square_mesh(2.0)
        with self.assertRaises(ValueError):
            aanse.build_unit_square_mesh(2, 'hexagonal')


class TestValidate(unittest.TestCase):

    mesh = aanse.build_unit_square_mesh(2)

    def test_clockwise_triangle(self):
        triangles = self.mesh.triangles.copy()
        triangles[3] = triangles[3, ::-1]
        violations = aanse.validate(Mesh(self.mesh.vertices, triangles))
        self.assertTrue(any(v.startswith('positive-area: triangle 3')
                            for v in violations))

    def test_dangling_vertex(self):
        vertices = numpy.vstack((self.mesh.vertices, self.mesh.vertices[4]))
        violations = aanse.validate(Mesh(vertices, self.mesh.triangles))
        self.assertEqual(len(violations), 1)
        self.assertTrue(violations[0].startswith('conformity: vertex 9'))

    def test_hole(self):
        # removing an interior triangle leaves single-incidence edges
        # away from the boundary
        violations = aanse.validate(
            Mesh(self.mesh.vertices, self.mesh.triangles[1:]))
        self.assertTrue(any('does not lie on the boundary' in v
                            for v in violations))


class TestDumpMesh(unittest.TestCase):

    def test_round_trip(self):
        mesh = aanse.build_unit_square_mesh(3, 'crossed')
        with tempfile.TemporaryDirectory() as tmp:
            node, ele = aanse.dump_mesh(mesh, os.path.join(tmp, 'cavity'))
            numpy.testing.assert_array_equal(numpy.loadtxt(node),
                                             mesh.vertices)
            numpy.testing.assert_array_equal(
                numpy.loadtxt(ele, dtype=numpy.int64), mesh.triangles)


if __name__ == '__main__':
    test_loader = unittest.TestLoader()
    test_suite = unittest.TestSuite()

    for case in (TestUnitSquareMesh, TestValidate, TestDumpMesh):
        test_suite.addTests(test_loader.loadTestsFromTestCase(case))

    runner = unittest.TextTestRunner(verbosity=2)
    runner.run(test_suite)
