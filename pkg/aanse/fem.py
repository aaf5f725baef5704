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

from functools import lru_cache
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse

from .linalg import finalize
from .mesh import LID
from .tools import check_finite

#: Degree of the quadrature used for every form of the discrete NSE;
#: the trilinear integrand P2 . grad P2 . P2 is of degree 5.
ASSEMBLY_DEGREE = 5


# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
# QUADRATURE
# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

class QuadratureRule(object):
    """Quadrature rule on the reference triangle (0,0), (1,0), (0,1).

    :Parameters:

        points: array-like object
            The (nq, 3) barycentric coordinates of the points.

        weights: array-like object
            The nq weights, summing to the reference area 1/2.

        degree: `int`
            The polynomial degree integrated exactly.

    """

    def __init__(self, points, weights, degree):
        self.points = np.asarray(points, dtype=np.float64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.degree = degree
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return self.weights.shape[0]

    def __repr__(self):
        return 'QuadratureRule(points={}, degree={})'.format(len(self),
                                                             self.degree)

    def integrate(self, func):
        """Integrate *func(x, y)* over the reference triangle."""
        x, y = self.points[:, 1], self.points[:, 2]
        return float(np.sum(self.weights * func(x, y)))


def _seven_point_rule():
    # degree 5, closed form of the classical Radon rule
    s15 = np.sqrt(15.0)
    a1, w1 = (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0
    a2, w2 = (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0
    points = [[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]]
    weights = [9.0 / 40.0]
    for a, w in ((a1, w1), (a2, w2)):
        b = 1.0 - 2.0 * a
        points += [[b, a, a], [a, b, a], [a, a, b]]
        weights += [w, w, w]
    return QuadratureRule(points, 0.5 * np.asarray(weights), 5)


def _collapsed_gauss_rule(degree):
    # Gauss-Legendre tensor rule pulled back through the collapsed map
    # (a, b) -> (a, (1 - a) b), whose Jacobian adds one degree in a
    n = int(np.ceil((degree + 2) / 2.0))
    t, w = leggauss(n)
    s, ws = 0.5 * (t + 1.0), 0.5 * w
    a, b = np.meshgrid(s, s, indexing='ij')
    wa, wb = np.meshgrid(ws, ws, indexing='ij')
    x = a.ravel()
    y = ((1.0 - a) * b).ravel()
    weights = (wa * wb * (1.0 - a)).ravel()
    points = np.column_stack((1.0 - x - y, x, y))
    return QuadratureRule(points, weights, 2 * n - 2)


@lru_cache(maxsize=None)
def quadrature_rule(degree):
    """Get a quadrature rule exact up to a given polynomial degree.

    Degrees up to 5 use the 7-point degree-5 rule; higher degrees use
    a collapsed Gauss-Legendre rule.

    :Parameters:

        degree: `int`
            The polynomial degree to integrate exactly.

    :Returns:

        `QuadratureRule`

    **Examples**

    >>> rule = quadrature_rule(5)
    >>> print(len(rule), rule.degree)
    7 5
    >>> print(round(rule.integrate(lambda x, y: x ** 2 * y ** 3), 12))
    0.002380952381

    """
    if degree < 0:
        raise ValueError('quadrature degree must be non-negative')
    if degree <= 5:
        return _seven_point_rule()
    return _collapsed_gauss_rule(degree)


# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
# LAGRANGE ELEMENTS
# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

def lagrange_basis(degree, lam):
    """Evaluate the P1 or P2 Lagrange basis at barycentric points.

    P2 functions are ordered vertices first, then edges, edge *i*
    being opposite vertex *i*.

    :Returns:

        `tuple` of `numpy.ndarray`
            The (nq, nb) values and the (nq, nb, 3) derivatives with
            respect to the three barycentric coordinates.

    """
    lam = np.atleast_2d(lam)
    nq = lam.shape[0]
    if degree == 1:
        return lam.copy(), np.broadcast_to(np.eye(3), (nq, 3, 3)).copy()
    if degree != 2:
        raise ValueError('only P1 and P2 elements are available')

    values = np.zeros((nq, 6))
    dlam = np.zeros((nq, 6, 3))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        values[:, i] = lam[:, i] * (2.0 * lam[:, i] - 1.0)
        dlam[:, i, i] = 4.0 * lam[:, i] - 1.0
        values[:, 3 + i] = 4.0 * lam[:, j] * lam[:, k]
        dlam[:, 3 + i, j] = 4.0 * lam[:, k]
        dlam[:, 3 + i, k] = 4.0 * lam[:, j]
    return values, dlam


class ElementData(object):
    """Basis values and physical gradients at quadrature points."""

    def __init__(self, mesh, rule, degree):
        p = mesh.vertices[mesh.triangles]
        jac = np.stack((p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=2)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        inv = np.linalg.inv(jac)
        grad_lam = np.empty((mesh.n_triangles, 3, 2))
        grad_lam[:, 1:, :] = inv
        grad_lam[:, 0, :] = -inv[:, 0, :] - inv[:, 1, :]

        self.rule = rule
        self.degree = degree
        self.phi, dlam = lagrange_basis(degree, rule.points)
        self.grad = np.einsum('qbm,tmd->tqbd', dlam, grad_lam)
        self.wdet = np.abs(det)[:, None] * rule.weights[None, :]
        self.points = np.einsum('qm,tmd->tqd', rule.points, p)
        for arr in (self.phi, self.grad, self.wdet, self.points):
            arr.setflags(write=False)


@lru_cache(maxsize=16)
def element_data(mesh, quad_degree=ASSEMBLY_DEGREE, degree=2):
    return ElementData(mesh, quadrature_rule(quad_degree), degree)


# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
# DEGREES OF FREEDOM
# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

class MixedDofMap(object):
    """Taylor-Hood (P2 velocity, P1 pressure) degrees of freedom.

    The global layout is the velocity-x block, the velocity-y block,
    then the pressure block. Scalar P2 dofs are the mesh vertices
    followed by the mesh edges (midpoints).

    :Parameters:

        mesh: `Mesh`
            The triangulation.

        lid_velocity: `float`, optional
            The horizontal velocity prescribed on the lid (y = 1, corners
            included); other boundary dofs are no-slip. If not provided,
            set to default value 1.0.

        boundary_velocity: callable, optional
            A function *f(x, y)* returning the pair of velocity
            components to prescribe on the whole boundary instead of
            the cavity data.

    """

    def __init__(self, mesh, lid_velocity=1.0, boundary_velocity=None):
        self.mesh = mesh
        nv = mesh.n_vertices
        self.n_velocity_scalar = nv + mesh.n_edges
        self.n_velocity = 2 * self.n_velocity_scalar
        self.n_pressure = nv
        self.n_total = self.n_velocity + self.n_pressure

        self.scalar_dofs = np.hstack((mesh.triangles,
                                      nv + mesh.triangle_edges))
        self.velocity_dofs = np.hstack(
            (self.scalar_dofs, self.scalar_dofs + self.n_velocity_scalar)
        )
        self.scalar_coordinates = np.vstack((mesh.vertices,
                                             mesh.edge_midpoints()))

        boundary = np.concatenate((mesh.boundary_vertices,
                                   nv + mesh.boundary_edges))
        tags = np.concatenate((mesh.boundary_vertex_tags,
                               mesh.boundary_edge_tags))
        if boundary_velocity is None:
            ux = np.where(tags == LID, float(lid_velocity), 0.0)
            uy = np.zeros(boundary.shape[0])
        else:
            xy = self.scalar_coordinates[boundary]
            ux, uy = boundary_velocity(xy[:, 0], xy[:, 1])
            ux = np.broadcast_to(np.asarray(ux, dtype=np.float64),
                                 boundary.shape)
            uy = np.broadcast_to(np.asarray(uy, dtype=np.float64),
                                 boundary.shape)

        dofs = np.concatenate((boundary, boundary + self.n_velocity_scalar))
        values = np.concatenate((ux, uy))
        order = np.argsort(dofs)
        self.dirichlet_dofs = dofs[order]
        self.dirichlet_values = check_finite(values[order],
                                             'boundary values')
        self.is_dirichlet = np.zeros(self.n_velocity, dtype=bool)
        self.is_dirichlet[self.dirichlet_dofs] = True

        # zero-mean gauge: the continuity row of pressure dof 0 is
        # replaced by sum_q w_q p_q = 0 with w_q the integral of q
        areas = np.abs(mesh.areas)
        self.pressure_weights = np.bincount(
            mesh.triangles.ravel(), weights=np.repeat(areas / 3.0, 3),
            minlength=nv
        )
        self.gauge_dof = 0
        self.gauge_row = self.n_velocity + self.gauge_dof

        for arr in (self.scalar_dofs, self.velocity_dofs,
                    self.scalar_coordinates, self.dirichlet_dofs,
                    self.dirichlet_values, self.is_dirichlet,
                    self.pressure_weights):
            arr.setflags(write=False)

    def __repr__(self):
        return ('MixedDofMap(velocity={}, pressure={}, '
                'dirichlet={})'.format(self.n_velocity, self.n_pressure,
                                       self.dirichlet_dofs.shape[0]))

    def dirichlet_pairs(self):
        """Prescribed dofs as a list of (global index, value) pairs."""
        return list(zip(self.dirichlet_dofs.tolist(),
                        self.dirichlet_values.tolist()))

    def lift(self):
        """Velocity vector carrying the boundary values, zero inside."""
        u = np.zeros(self.n_velocity)
        u[self.dirichlet_dofs] = self.dirichlet_values
        return u

    def split(self, vector):
        vector = np.asarray(vector)
        return vector[:self.n_velocity], vector[self.n_velocity:]


def _velocity_of(u):
    # accepts a State-like object or a bare coefficient vector
    return np.asarray(getattr(u, 'velocity', u), dtype=np.float64)


def interpolate_velocity(func, dofmap):
    """Nodal P2 interpolant of a vector field *func(x, y) -> (ux, uy)*.

    **Examples**

    >>> from aanse.mesh import build_unit_square_mesh
    >>> dofmap = MixedDofMap(build_unit_square_mesh(1))
    >>> interpolate_velocity(lambda x, y: (x, 0.0), dofmap)[:9]
    array([0. , 1. , 0. , 1. , 0.5, 0. , 0.5, 1. , 0.5])

    """
    xy = dofmap.scalar_coordinates
    ux, uy = func(xy[:, 0], xy[:, 1])
    shape = (xy.shape[0],)
    return np.concatenate((np.broadcast_to(ux, shape),
                           np.broadcast_to(uy, shape))).astype(np.float64)


def interpolate_pressure(func, mesh):
    """Nodal P1 interpolant of a scalar field *func(x, y)*."""
    values = func(mesh.vertices[:, 0], mesh.vertices[:, 1])
    return np.array(np.broadcast_to(values, (mesh.n_vertices,)),
                    dtype=np.float64)


def evaluate_velocity(u, dofmap, quad_degree=ASSEMBLY_DEGREE):
    """Values and gradients of a P2 velocity at quadrature points.

    :Returns:

        `tuple` of `numpy.ndarray`
            The (T, nq, 2) values and the (T, nq, 2, 2) gradients, where
            ``grads[t, q, c, d]`` is the derivative of component *c* with
            respect to coordinate *d*.

    """
    el = element_data(dofmap.mesh, quad_degree, 2)
    u = _velocity_of(u)
    if u.shape != (dofmap.n_velocity,):
        raise ValueError('velocity of shape {} does not match {} velocity '
                         'dofs'.format(u.shape, dofmap.n_velocity))
    ns = dofmap.n_velocity_scalar
    coef = np.stack((u[:ns][dofmap.scalar_dofs],
                     u[ns:][dofmap.scalar_dofs]), axis=1)
    values = np.einsum('qa,tca->tqc', el.phi, coef)
    grads = np.einsum('tqad,tca->tqcd', el.grad, coef)
    return values, grads


def evaluate_pressure(p, mesh, quad_degree=ASSEMBLY_DEGREE):
    """Values of a P1 pressure at quadrature points, shape (T, nq)."""
    el = element_data(mesh, quad_degree, 1)
    coef = np.asarray(p, dtype=np.float64)[mesh.triangles]
    return np.einsum('qa,ta->tq', el.phi, coef)


# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
# ASSEMBLY
# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

def _scatter_matrix(local, row_dofs, col_dofs, shape):
    rows = np.broadcast_to(row_dofs[:, :, None], local.shape)
    cols = np.broadcast_to(col_dofs[:, None, :], local.shape)
    return finalize(sparse.coo_matrix(
        (local.ravel(), (rows.ravel(), cols.ravel())), shape=shape
    ))


def _scatter_vector(local, dofs, size):
    return np.bincount(dofs.ravel(), weights=local.ravel(), minlength=size)


def _scalar_dofs(mesh, degree):
    if degree == 1:
        return mesh.triangles, mesh.n_vertices
    return (np.hstack((mesh.triangles, mesh.n_vertices + mesh.triangle_edges)),
            mesh.n_vertices + mesh.n_edges)


def assemble_scalar_laplacian(mesh, degree=2):
    """Stiffness matrix of the scalar P1 or P2 Lagrange space.

    **Examples**

    >>> from aanse.mesh import Mesh
    >>> ref = Mesh([[0., 0.], [1., 0.], [0., 1.]], [[0, 1, 2]])
    >>> assemble_scalar_laplacian(ref, degree=1).toarray()
    array([[ 1. , -0.5, -0.5],
           [-0.5,  0.5,  0. ],
           [-0.5,  0. ,  0.5]])

    """
    el = element_data(mesh, ASSEMBLY_DEGREE, degree)
    dofs, n = _scalar_dofs(mesh, degree)
    local = np.einsum('tq,tqad,tqbd->tab', el.wdet, el.grad, el.grad)
    return _scatter_matrix(local, dofs, dofs, (n, n))


def assemble_mass(mesh, degree=2):
    """Mass matrix of the scalar P1 or P2 Lagrange space."""
    el = element_data(mesh, ASSEMBLY_DEGREE, degree)
    dofs, n = _scalar_dofs(mesh, degree)
    local = np.einsum('tq,qa,qb->tab', el.wdet, el.phi, el.phi)
    return _scatter_matrix(local, dofs, dofs, (n, n))


def assemble_vector_laplacian(mesh, dofmap):
    """Vector Laplacian ``(grad u, grad v)`` on the P2 velocity space.

    The matrix is assembled without the viscosity and without boundary
    conditions; it is also the Gram matrix of the H1-seminorm in which
    residuals are measured.

    :Parameters:

        mesh: `Mesh`
            The triangulation.

        dofmap: `MixedDofMap`
            The degrees of freedom on *mesh*.

    :Returns:

        `scipy.sparse.csr_matrix`
            The (n_velocity, n_velocity) symmetric positive
            semi-definite matrix.

    """
    stiffness = assemble_scalar_laplacian(mesh, degree=2)
    return finalize(sparse.block_diag((stiffness, stiffness)))


def assemble_divergence(mesh, dofmap):
    """Divergence matrix *B* with ``(B u)_q = (div u, q)``.

    :Returns:

        `scipy.sparse.csr_matrix`
            The (n_pressure, n_velocity) matrix.

    """
    el2 = element_data(mesh, ASSEMBLY_DEGREE, 2)
    el1 = element_data(mesh, ASSEMBLY_DEGREE, 1)
    # local[t, a, c, b] = int psi_a d(phi_b)/dx_c
    local = np.einsum('tq,qa,tqbc->tacb', el2.wdet, el1.phi, el2.grad)
    local = local.reshape(mesh.n_triangles, 3, 12)
    return _scatter_matrix(local, mesh.triangles, dofmap.velocity_dofs,
                           (dofmap.n_pressure, dofmap.n_velocity))


def assemble_load(mesh, dofmap, forcing):
    """Load vector ``(f, v)`` for a forcing *f(x, y) -> (fx, fy)*."""
    el = element_data(mesh, ASSEMBLY_DEGREE, 2)
    x, y = el.points[..., 0], el.points[..., 1]
    fx, fy = forcing(x, y)
    f = np.stack((np.broadcast_to(fx, x.shape),
                  np.broadcast_to(fy, x.shape)), axis=2)
    local = np.einsum('tq,qa,tqc->tca', el.wdet, el.phi, f)
    return _scatter_vector(local.reshape(mesh.n_triangles, 12),
                           dofmap.velocity_dofs, dofmap.n_velocity)


def trilinear_b(u, v, w, mesh, dofmap):
    """Skew-symmetrized convection form.

    ``b(u, v, w) = 1/2 ((u.grad v, w) - (u.grad w, v))``, evaluated with
    a quadrature exact for the degree-5 integrand.

    :Parameters:

        u, v, w: `numpy.ndarray` or `State`
            The three P2 velocity coefficient vectors.

        mesh: `Mesh`
            The triangulation.

        dofmap: `MixedDofMap`
            The degrees of freedom on *mesh*.

    :Returns:

        `float`

    """
    uq, _ = evaluate_velocity(u, dofmap)
    vq, dv = evaluate_velocity(v, dofmap)
    wq, dw = evaluate_velocity(w, dofmap)
    u_grad_v = np.einsum('tqd,tqcd->tqc', uq, dv)
    u_grad_w = np.einsum('tqd,tqcd->tqc', uq, dw)
    el = element_data(mesh, ASSEMBLY_DEGREE, 2)
    integrand = (np.sum(u_grad_v * wq, axis=2)
                 - np.sum(u_grad_w * vq, axis=2))
    return 0.5 * float(np.sum(el.wdet * integrand))


def assemble_convection_vector(a, c, mesh, dofmap):
    """Vector representing ``v -> b(a, c, v)`` on the velocity space."""
    el = element_data(mesh, ASSEMBLY_DEGREE, 2)
    aq, _ = evaluate_velocity(a, dofmap)
    cq, dc = evaluate_velocity(c, dofmap)
    a_grad_c = np.einsum('tqd,tqcd->tqc', aq, dc)
    a_grad_phi = np.einsum('tqd,tqbd->tqb', aq, el.grad)
    local = 0.5 * (np.einsum('tq,tqc,qb->tcb', el.wdet, a_grad_c, el.phi)
                   - np.einsum('tq,tqb,tqc->tcb', el.wdet, a_grad_phi, cq))
    return _scatter_vector(local.reshape(mesh.n_triangles, 12),
                           dofmap.velocity_dofs, dofmap.n_velocity)


def _transport_blocks(uq, el):
    # C[t, a, b] = 1/2 int (u.grad phi_b) phi_a - (u.grad phi_a) phi_b
    adv = np.einsum('tqd,tqbd->tqb', uq, el.grad)
    weighted = el.wdet[:, :, None] * adv
    half = np.einsum('tqb,qa->tab', weighted, el.phi)
    return 0.5 * (half - np.swapaxes(half, 1, 2))


def assemble_picard_linearization(u_prev, mesh, dofmap):
    """Matrix representing ``v -> b(u_prev, ., v)`` (lagged transport).

    :Parameters:

        u_prev: `numpy.ndarray` or `State`
            The P2 velocity the transport is lagged at.

        mesh: `Mesh`
            The triangulation.

        dofmap: `MixedDofMap`
            The degrees of freedom on *mesh*.

    :Returns:

        `scipy.sparse.csr_matrix`
            The (n_velocity, n_velocity) skew-symmetric matrix.

    """
    check_finite(_velocity_of(u_prev), 'u_prev')
    el = element_data(mesh, ASSEMBLY_DEGREE, 2)
    uq, _ = evaluate_velocity(u_prev, dofmap)
    transport = _transport_blocks(uq, el)
    local = np.zeros((mesh.n_triangles, 12, 12))
    local[:, :6, :6] = transport
    local[:, 6:, 6:] = transport
    return _scatter_matrix(local, dofmap.velocity_dofs,
                           dofmap.velocity_dofs,
                           (dofmap.n_velocity, dofmap.n_velocity))


def assemble_newton_linearization(u_prev, mesh, dofmap):
    """Newton linearization of the convection term at *u_prev*.

    :Parameters:

        u_prev: `numpy.ndarray` or `State`
            The P2 velocity the convection is linearized at.

        mesh: `Mesh`
            The triangulation.

        dofmap: `MixedDofMap`
            The degrees of freedom on *mesh*.

    :Returns:

        `tuple`
            The (n_velocity, n_velocity) matrix representing
            ``v -> b(u_prev, ., v) + b(., u_prev, v)`` and the vector
            representing ``v -> b(u_prev, u_prev, v)``, which belongs to
            the right-hand side.

    """
    u = check_finite(_velocity_of(u_prev), 'u_prev')
    el = element_data(mesh, ASSEMBLY_DEGREE, 2)
    uq, du = evaluate_velocity(u, dofmap)
    transport = _transport_blocks(uq, el)

    # D[t, c, d, a, b] = 1/2 int phi_a phi_b d_d u_c - u_c phi_b d_d phi_a
    phiphi = np.einsum('qa,qb->qab', el.phi, el.phi)
    wdu = el.wdet[:, :, None, None] * du
    wu = el.wdet[:, :, None] * uq
    react = 0.5 * (np.einsum('qab,tqcd->tcdab', phiphi, wdu)
                   - np.einsum('tqc,qb,tqad->tcdab', wu, el.phi, el.grad,
                               optimize=True))

    local = np.zeros((mesh.n_triangles, 12, 12))
    for c in range(2):
        local[:, 6 * c:6 * c + 6, 6 * c:6 * c + 6] += transport
        for d in range(2):
            local[:, 6 * c:6 * c + 6, 6 * d:6 * d + 6] += react[:, c, d]
    matrix = _scatter_matrix(local, dofmap.velocity_dofs,
                             dofmap.velocity_dofs,
                             (dofmap.n_velocity, dofmap.n_velocity))
    rhs = assemble_convection_vector(u, u, mesh, dofmap)
    return matrix, rhs


# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
# SADDLE-POINT SYSTEM
# ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

def saddle_matrix(momentum, divergence):
    """Mixed matrix ``[[K, -B^T], [B, 0]]``."""
    return finalize(sparse.bmat([[momentum, -divergence.T],
                                 [divergence, None]]))


def apply_dirichlet(matrix, rhs, dofmap, homogeneous=False):
    """Impose the velocity boundary values and the pressure gauge.

    Dirichlet rows and columns are eliminated symmetrically: they are
    replaced by identity rows and columns, the prescribed values being
    moved to the right-hand side. The continuity row of the gauge
    pressure dof is then replaced by the discrete zero-mean constraint.

    :Parameters:

        matrix: `scipy.sparse` matrix
            The (n_total, n_total) mixed matrix.

        rhs: array-like object
            The right-hand side of length n_total.

        dofmap: `MixedDofMap`
            The degrees of freedom of the system.

        homogeneous: `bool`, optional
            Whether to prescribe zero instead of the boundary values
            (for corrections and derivatives). If not provided, set to
            default value False.

    :Returns:

        `tuple`
            The constrained CSR matrix and right-hand side.

    """
    n = dofmap.n_total
    if matrix.shape != (n, n):
        raise ValueError('matrix of shape {} does not match {} '
                         'dofs'.format(matrix.shape, n))
    rhs = np.array(rhs, dtype=np.float64)
    matrix = sparse.csr_matrix(matrix)

    values = (np.zeros_like(dofmap.dirichlet_values) if homogeneous
              else dofmap.dirichlet_values)
    lifted = np.zeros(n)
    lifted[dofmap.dirichlet_dofs] = values
    rhs -= matrix @ lifted
    rhs[dofmap.dirichlet_dofs] = values

    free = np.ones(n)
    free[dofmap.dirichlet_dofs] = 0.0
    keep = sparse.diags(free)
    constrained = keep @ matrix @ keep + sparse.diags(1.0 - free)

    rows = np.ones(n)
    rows[dofmap.gauge_row] = 0.0
    gauge = sparse.csr_matrix(
        (dofmap.pressure_weights,
         (np.full(dofmap.n_pressure, dofmap.gauge_row),
          dofmap.n_velocity + np.arange(dofmap.n_pressure))),
        shape=(n, n)
    )
    constrained = sparse.diags(rows) @ constrained + gauge
    rhs[dofmap.gauge_row] = 0.0

    return finalize(constrained), rhs
