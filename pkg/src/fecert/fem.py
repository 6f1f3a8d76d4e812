"""Piecewise-linear finite elements for the quasilinear problem and its linearization.

For two discrete functions u1, u2 the difference w = u1 - u2 satisfies a
linear convection-diffusion-reaction problem with

    b(x) = int_0^1 dkappa/deta(x, t u1 + (1-t) u2) dt
    c(x) = int_0^1 dg/deta(x, t u1 + (1-t) u2) dt

and the matrix entry for test function phi_i and trial function phi_j is

    a_ij = int kappa(x, u1) grad phi_j . grad phi_i
         + int b(x) (grad u2 . grad phi_i) phi_j
         + int c(x) phi_j phi_i.

Spatial integrals use a triangle rule (edge midpoints by default); the
t-averages use 8-point Gauss-Legendre.  Rows and columns of Dirichlet
vertices are eliminated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .mesh import Mesh, MeshTopologyError
from .problem import ProblemSpec
from .quadrature import T_ORDER, gauss_legendre_01, get_rule


# -- single-element formulas ---------------------------------------------------

def _area(coords) -> float:
    p = np.asarray(coords, dtype=float)
    e1, e2 = p[1] - p[0], p[2] - p[0]
    area = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
    if not area > 0:
        raise MeshTopologyError(f"degenerate or inverted triangle (area {area:.3e})")
    return area


def local_grad_dot(coords, i: int, j: int) -> float:
    """grad phi_i . grad phi_j on one triangle (local vertex indices 0..2).

    Off the diagonal this is -cot(theta_k) / (2|T|) with theta_k the angle
    opposite edge (i, j); on the diagonal it is |grad phi_i|^2.
    """
    p = np.asarray(coords, dtype=float)
    area = _area(p)
    if i != j:
        k = 3 - i - j
        a, b = p[i] - p[k], p[j] - p[k]
        cot = float(a @ b) / (2.0 * area)
        return -cot / (2.0 * area)
    e = p[(i + 2) % 3] - p[(i + 1) % 3]
    return float(e @ e) / (4.0 * area * area)


def local_mass(coords, i: int, j: int) -> float:
    """int_T phi_i phi_j: |T|/6 on the diagonal, |T|/12 off it."""
    area = _area(coords)
    return area / 6.0 if i == j else area / 12.0


def local_basis_integral(coords, i: int) -> float:
    """int_T phi_i = |T|/3."""
    return _area(coords) / 3.0


# -- t-averaged coefficients ---------------------------------------------------

def _t_average(fn, x, u1, u2, order):
    t, w = gauss_legendre_01(order)
    u1 = np.asarray(u1, dtype=float)[..., None]
    u2 = np.asarray(u2, dtype=float)[..., None]
    z = t * u1 + (1.0 - t) * u2
    x = np.asarray(x, dtype=float)[..., None, :]
    return fn(x, z) @ w


def averaged_b(spec: ProblemSpec, x, u1_val, u2_val, order: int = T_ORDER):
    """b(x) = int_0^1 dkappa/deta(x, t u1 + (1-t) u2) dt."""
    return _t_average(spec.dkappa_deta, x, u1_val, u2_val, order)


def averaged_c(spec: ProblemSpec, x, u1_val, u2_val, order: int = T_ORDER):
    """c(x) = int_0^1 dg/deta(x, t u1 + (1-t) u2) dt."""
    return _t_average(spec.dg_deta, x, u1_val, u2_val, order)


# -- data types ----------------------------------------------------------------

@dataclass
class AssembledSystem:
    """Matrix (and optionally load) on interior vertices.

    ``dofs[r]`` is the mesh vertex of row/column ``r``.
    """

    A: sparse.csr_matrix
    dofs: np.ndarray
    F: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.dofs)

    def restrict(self, u) -> np.ndarray:
        return np.asarray(u, dtype=float)[self.dofs]

    def extend(self, W, n_vertices: int) -> np.ndarray:
        u = np.zeros(n_vertices)
        u[self.dofs] = W
        return u


@dataclass
class NodalDifferences:
    """Nodal value differences of a field over edges and edge patches.

    ``patch_delta[e]`` is the largest difference between any two vertices of
    the patch of edge e; ``patch_delta_excl[e, s]`` is the same with vertex
    ``edges[e, s]`` left out.
    """

    edges: np.ndarray
    edge_delta: np.ndarray
    patch_delta: np.ndarray
    patch_delta_excl: np.ndarray


def _as_field(mesh: Mesh, u, name="field") -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_vertices,):
        raise ValueError(f"{name} has shape {u.shape}, expected ({mesh.n_vertices},)")
    return u


def dirichlet_field(mesh: Mesh, values) -> np.ndarray:
    """Copy of ``values`` with boundary vertices set to zero."""
    u = _as_field(mesh, values).copy()
    u[mesh.boundary_mask] = 0.0
    return u


def _check_conforming(mesh: Mesh, u, name):
    u = _as_field(mesh, u, name)
    if np.any(u[mesh.boundary_mask] != 0.0):
        raise ValueError(f"{name} must vanish on the Dirichlet boundary")
    return u


# -- assembly helpers ----------------------------------------------------------

def _to_interior_matrix(mesh: Mesh, local: np.ndarray) -> sparse.csr_matrix:
    """Scatter element matrices (M, 3, 3) [test, trial] into the interior block."""
    tri = mesh.triangles
    rows = np.repeat(tri[:, :, None], 3, axis=2)
    cols = np.repeat(tri[:, None, :], 3, axis=1)
    dof = mesh.dof_index
    r, c = dof[rows].ravel(), dof[cols].ravel()
    keep = (r >= 0) & (c >= 0)
    n = len(mesh.interior_vertices)
    A = sparse.coo_matrix((local.ravel()[keep], (r[keep], c[keep])), shape=(n, n))
    return A.tocsr()


def _to_interior_vector(mesh: Mesh, local: np.ndarray) -> np.ndarray:
    full = np.zeros(mesh.n_vertices)
    np.add.at(full, mesh.triangles.ravel(), local.ravel())
    return full[mesh.interior_vertices]


@dataclass
class _QuadData:
    rule: object
    xq: np.ndarray       # (M, Q, 2)
    wA: np.ndarray       # (M, Q) weights times area


def _quad(mesh: Mesh, rule) -> _QuadData:
    rule = get_rule(rule)
    xq = rule.points(mesh.coords)
    return _QuadData(rule, xq, mesh.areas[:, None] * rule.weights[None, :])


def _at_points(mesh: Mesh, rule, u) -> np.ndarray:
    return np.einsum("mk,qk->mq", u[mesh.triangles], rule.bary)


@dataclass
class ElementIntegrals:
    """Per-element integrals shared by the linearized matrix and the J terms.

    kappa_int[m]      int_T kappa(x, u1)
    b_phi[m, a]       int_T b(x) phi_a
    c_phiphi[m, a, b] int_T c(x) phi_a phi_b
    grad_u2[m]        constant gradient of u2 on T
    """

    kappa_int: np.ndarray
    b_phi: np.ndarray
    c_phiphi: np.ndarray
    grad_u2: np.ndarray


def element_integrals(mesh: Mesh, spec: ProblemSpec, u1, u2, rule=None) -> ElementIntegrals:
    q = _quad(mesh, rule)
    lam = q.rule.bary
    u1q = _at_points(mesh, q.rule, u1)
    u2q = _at_points(mesh, q.rule, u2)
    kq = spec.kappa(q.xq, u1q)
    bq = averaged_b(spec, q.xq, u1q, u2q)
    cq = averaged_c(spec, q.xq, u1q, u2q)
    G = mesh.basis_gradients
    return ElementIntegrals(
        kappa_int=np.sum(q.wA * kq, axis=1),
        b_phi=np.einsum("mq,qa->ma", q.wA * bq, lam),
        c_phiphi=np.einsum("mq,qa,qb->mab", q.wA * cq, lam, lam),
        grad_u2=np.einsum("mk,mkd->md", u2[mesh.triangles], G),
    )


def _local_linearized(mesh: Mesh, ei: ElementIntegrals):
    G = mesh.basis_gradients
    GG = np.einsum("mad,mbd->mab", G, G)
    diff = ei.kappa_int[:, None, None] * GG
    gu_dot = np.einsum("md,mad->ma", ei.grad_u2, G)         # grad u2 . grad phi_a
    conv = gu_dot[:, :, None] * ei.b_phi[:, None, :]          # [test a, trial b]
    return diff, conv, ei.c_phiphi


# -- public assembly -----------------------------------------------------------

def assemble_linearized(mesh: Mesh, spec: ProblemSpec, u1, u2, rule=None,
                        parts: bool = False):
    """Matrix A of the linear problem for w = u1 - u2 on interior vertices.

    With ``parts=True`` also return the diffusion, convection and reaction
    contributions as separate matrices (their sum is A).
    """
    u1 = _check_conforming(mesh, u1, "u1")
    u2 = _check_conforming(mesh, u2, "u2")
    ei = element_integrals(mesh, spec, u1, u2, rule)
    diff, conv, reac = _local_linearized(mesh, ei)
    A = _to_interior_matrix(mesh, diff + conv + reac)
    system = AssembledSystem(A=A, dofs=mesh.interior_vertices)
    if parts:
        return system, tuple(_to_interior_matrix(mesh, m) for m in (diff, conv, reac))
    return system


def assemble_load(mesh: Mesh, f1, f2=None, rule=None) -> np.ndarray:
    """F_i = int (f1 - f2) phi_i over interior vertices."""
    q = _quad(mesh, rule)
    vals = np.asarray(f1(q.xq), dtype=float)
    if f2 is not None:
        vals = vals - np.asarray(f2(q.xq), dtype=float)
    local = np.einsum("mq,qa->ma", q.wA * vals, q.rule.bary)
    return _to_interior_vector(mesh, local)


def assemble_residual(mesh: Mesh, spec: ProblemSpec, u, f=None, rule=None) -> np.ndarray:
    """R_i = int kappa(x, u) grad u . grad phi_i + g(x, u) phi_i - f phi_i.

    ``f`` defaults to ``spec.f``.
    """
    u = _check_conforming(mesh, u, "u")
    f = spec.f if f is None else f
    q = _quad(mesh, rule)
    lam = q.rule.bary
    uq = _at_points(mesh, q.rule, u)
    G = mesh.basis_gradients
    grad_u = np.einsum("mk,mkd->md", u[mesh.triangles], G)
    kint = np.sum(q.wA * spec.kappa(q.xq, uq), axis=1)
    diff = kint[:, None] * np.einsum("md,mad->ma", grad_u, G)
    src = spec.g(q.xq, uq) - np.asarray(f(q.xq), dtype=float)
    local = diff + np.einsum("mq,qa->ma", q.wA * src, lam)
    return _to_interior_vector(mesh, local)


def assemble_frozen(mesh: Mesh, kappa_q, c_q, rule=None) -> sparse.csr_matrix:
    """Stiffness with weight ``kappa_q`` plus mass with weight ``c_q``.

    Both weights are given at the quadrature points, shape (M, Q).
    """
    q = _quad(mesh, rule)
    lam = q.rule.bary
    G = mesh.basis_gradients
    kint = np.sum(q.wA * kappa_q, axis=1)
    local = kint[:, None, None] * np.einsum("mad,mbd->mab", G, G)
    local = local + np.einsum("mq,qa,qb->mab", q.wA * c_q, lam, lam)
    return _to_interior_matrix(mesh, local)


def laplacian_stiffness(mesh: Mesh) -> sparse.csr_matrix:
    """Standard P1 stiffness matrix on interior vertices."""
    G = mesh.basis_gradients
    local = mesh.areas[:, None, None] * np.einsum("mad,mbd->mab", G, G)
    return _to_interior_matrix(mesh, local)


def nodal_differences(mesh: Mesh, v) -> NodalDifferences:
    v = _as_field(mesh, v, "v")
    edges = mesh.edges
    opp = mesh.edge_opposite
    verts = np.concatenate([edges, opp], axis=1)           # (E, 4), -1 padded
    vals = np.where(verts >= 0, v[np.maximum(verts, 0)], np.nan)
    patch = np.nanmax(vals, axis=1) - np.nanmin(vals, axis=1)
    excl = np.empty((len(edges), 2))
    for s in (0, 1):
        keep = np.delete(vals, s, axis=1)
        excl[:, s] = np.nanmax(keep, axis=1) - np.nanmin(keep, axis=1)
    return NodalDifferences(
        edges=edges,
        edge_delta=np.abs(v[edges[:, 0]] - v[edges[:, 1]]),
        patch_delta=patch,
        patch_delta_excl=excl,
    )
