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

from enum import Enum
import numpy as np

from .tools import COORD_TOL, on_value, signed_areas

#: Boundary tag of the moving lid (y = 1), corners included.
LID = 1
#: Boundary tag of the no-slip walls.
WALL = 2


class Pattern(Enum):
    """Splitting of each square cell of the structured grid."""
    #: two triangles per cell, cut along the (0, 0)-(1, 1) diagonal
    DIAGONAL = 'diagonal'
    #: four triangles per cell, meeting at the added cell centre
    CROSSED = 'crossed'


class Mesh(object):
    """Conforming triangulation of the unit square.

    Edges, boundary entities and boundary tags are derived from the
    *vertices* and *triangles* arrays at construction and all arrays
    are read-only afterwards.

    :Parameters:

        vertices: array-like object
            The (V, 2) array of vertex coordinates.

        triangles: array-like object
            The (T, 3) array of vertex indices of each triangle,
            expected in counterclockwise order.

        pattern: `Pattern`, optional
            The structured pattern the mesh was generated with, if any.

    """

    def __init__(self, vertices, triangles, pattern=None):
        self.vertices = np.array(vertices, dtype=np.float64)
        self.triangles = np.array(triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise ValueError('vertices array must be of shape (V, 2)')
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError('triangles array must be of shape (T, 3)')
        self.pattern = pattern

        # local edge i is opposite local vertex i
        local = self.triangles[:, [[1, 2], [2, 0], [0, 1]]]
        pairs = np.sort(local.reshape(-1, 2), axis=1)
        # np.unique sorts rows lexicographically, which fixes the
        # edge numbering (and hence the P2 dof numbering)
        edges, inverse, counts = np.unique(
            pairs, axis=0, return_inverse=True, return_counts=True
        )
        self.edges = edges
        self.triangle_edges = np.reshape(inverse, (-1, 3))
        self.edge_incidence = counts

        self.boundary_edges = np.flatnonzero(counts == 1)
        self.boundary_vertices = np.unique(self.edges[self.boundary_edges])

        self.boundary_vertex_tags = np.where(
            on_value(self.vertices[self.boundary_vertices, 1], 1.0),
            LID, WALL
        )
        midpoints = self.edge_midpoints()[self.boundary_edges]
        self.boundary_edge_tags = np.where(
            on_value(midpoints[:, 1], 1.0), LID, WALL
        )

        for arr in (self.vertices, self.triangles, self.edges,
                    self.triangle_edges, self.edge_incidence,
                    self.boundary_edges, self.boundary_vertices,
                    self.boundary_vertex_tags, self.boundary_edge_tags):
            arr.setflags(write=False)

    def __repr__(self):
        return 'Mesh(vertices={}, triangles={}, edges={}, pattern={})'.format(
            self.n_vertices, self.n_triangles, self.n_edges,
            None if self.pattern is None else self.pattern.value
        )

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    @property
    def n_edges(self):
        return self.edges.shape[0]

    @property
    def areas(self):
        return signed_areas(self.vertices, self.triangles)

    @property
    def h(self):
        """Maximum element diameter (longest edge)."""
        vec = (self.vertices[self.edges[:, 1]]
               - self.vertices[self.edges[:, 0]])
        return float(np.max(np.hypot(vec[:, 0], vec[:, 1])))

    def edge_midpoints(self):
        return 0.5 * (self.vertices[self.edges[:, 0]]
                      + self.vertices[self.edges[:, 1]])


def build_unit_square_mesh(n, pattern=Pattern.DIAGONAL):
    """Build a structured triangulation of the unit square.

    :Parameters:

        n: `int`
            The number of subdivisions per side of the square. Must be
            greater than or equal to 1.

        pattern: `Pattern` or `str`, optional
            The splitting of each cell, either `Pattern.DIAGONAL`
            (2 triangles per cell) or `Pattern.CROSSED` (4 triangles per
            cell around its centre). If not provided, set to default
            value `Pattern.DIAGONAL`.

    :Returns:

        `Mesh`

    **Examples**

    >>> mesh = build_unit_square_mesh(1)
    >>> print(mesh.n_vertices, mesh.n_triangles, mesh.n_edges)
    4 2 5
    >>> mesh = build_unit_square_mesh(1, 'crossed')
    >>> print(mesh.n_vertices, mesh.n_triangles, mesh.n_edges)
    5 4 8

    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise TypeError('n must be an integer')
    if n < 1:
        raise ValueError('n must be greater than or equal to 1 '
                         '(got {})'.format(n))
    pattern = Pattern(pattern)

    xs = np.linspace(0.0, 1.0, n + 1)
    gx, gy = np.meshgrid(xs, xs)
    vertices = np.column_stack((gx.ravel(), gy.ravel()))

    # corner vertices of every cell, cells numbered row by row
    ci, cj = np.meshgrid(np.arange(n), np.arange(n))
    ci, cj = ci.ravel(), cj.ravel()
    v00 = cj * (n + 1) + ci
    v10 = v00 + 1
    v01 = v00 + n + 1
    v11 = v01 + 1

    if pattern is Pattern.DIAGONAL:
        triangles = np.stack(
            (np.column_stack((v00, v10, v11)),
             np.column_stack((v00, v11, v01))),
            axis=1
        ).reshape(-1, 3)
    else:
        centres = np.column_stack(((ci + 0.5) / n, (cj + 0.5) / n))
        vertices = np.vstack((vertices, centres))
        c = (n + 1) ** 2 + cj * n + ci
        triangles = np.stack(
            (np.column_stack((v00, v10, c)),
             np.column_stack((v10, v11, c)),
             np.column_stack((v11, v01, c)),
             np.column_stack((v01, v00, c))),
            axis=1
        ).reshape(-1, 3)

    return Mesh(vertices, triangles, pattern)


def _on_same_side(p, q, tol=COORD_TOL):
    same = np.zeros(p.shape[0], dtype=bool)
    for axis in (0, 1):
        for value in (0.0, 1.0):
            same |= (on_value(p[:, axis], value, tol)
                     & on_value(q[:, axis], value, tol))
    return same


def validate(mesh):
    """Check the invariants of a triangulation of the unit square.

    :Parameters:

        mesh: `Mesh`
            The mesh to diagnose.

    :Returns:

        `list` of `str`
            One message per violation, naming the invariant and the
            offending entity. The list is empty if all invariants hold.

    **Examples**

    >>> validate(build_unit_square_mesh(4))
    []

    """
    violations = []

    # orientation
    areas = mesh.areas
    for t in np.flatnonzero(~(areas > 0.0)):
        violations.append(
            'positive-area: triangle {} has signed area {:.3g}'.format(
                t, areas[t])
        )

    # conformity
    for e in np.flatnonzero(mesh.edge_incidence > 2):
        violations.append(
            'conformity: edge {} {} is shared by {} triangles'.format(
                e, tuple(mesh.edges[e]), mesh.edge_incidence[e])
        )
    single = mesh.boundary_edges
    on_side = _on_same_side(mesh.vertices[mesh.edges[single, 0]],
                            mesh.vertices[mesh.edges[single, 1]])
    for e in single[~on_side]:
        violations.append(
            'conformity: edge {} {} has a single incident triangle but '
            'does not lie on the boundary'.format(e, tuple(mesh.edges[e]))
        )
    referenced = np.zeros(mesh.n_vertices, dtype=bool)
    referenced[mesh.triangles.ravel()] = True
    for v in np.flatnonzero(~referenced):
        violations.append(
            'conformity: vertex {} is not referenced by any '
            'triangle'.format(v)
        )

    # Euler relation over the vertices actually in use
    euler = np.sum(referenced) - mesh.n_edges + mesh.n_triangles
    if euler != 1:
        violations.append(
            'euler: V - E + T = {} instead of 1'.format(euler)
        )

    # boundary tags
    expected = np.where(
        on_value(mesh.vertices[mesh.boundary_vertices, 1], 1.0), LID, WALL
    )
    for v, tag, exp in zip(mesh.boundary_vertices,
                           mesh.boundary_vertex_tags, expected):
        if tag != exp:
            violations.append(
                'boundary-tag: vertex {} tagged {} instead of {}'.format(
                    v, 'Lid' if tag == LID else 'Wall',
                    'Lid' if exp == LID else 'Wall')
            )

    return violations


def dump_mesh(mesh, stem):
    """Write the mesh in a plain-text node/element format.

    Two files are written: *stem*.node with one vertex per line
    ("x y") and *stem*.ele with one triangle per line ("i j k",
    0-based vertex indices).

    :Parameters:

        mesh: `Mesh`
            The mesh to write.

        stem: `str`
            The path of the files without extension.

    :Returns:

        `tuple` of `str`
            The paths of the node and element files.

    """
    node_path = '{}.node'.format(stem)
    ele_path = '{}.ele'.format(stem)
    np.savetxt(node_path, mesh.vertices, fmt='%.17g')
    np.savetxt(ele_path, mesh.triangles, fmt='%d')
    return node_path, ele_path
