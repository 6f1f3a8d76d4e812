"""Mesh and field generators plus an independent assembly oracle for the tests."""
import numpy as np
from scipy import integrate, special
from scipy.spatial import Delaunay

from fecert.mesh import Mesh, gen_structured
from fecert.problem import ProblemSpec


def jittered(n, amp, rng):
    """three_direction mesh with interior vertices moved by up to amp * h."""
    m = gen_structured("three_direction", n)
    v = m.vertices.copy()
    free = ~m.boundary_mask
    v[free] += rng.uniform(-amp, amp, size=(free.sum(), 2)) / n
    return Mesh(v, m.triangles, m.boundary_mask)


def affine(mesh, M, shift=(0.0, 0.0)):
    M = np.asarray(M, dtype=float)
    tris = mesh.triangles
    if np.linalg.det(M) < 0:
        tris = tris[:, [0, 2, 1]]
    return Mesh(mesh.vertices @ M.T + np.asarray(shift), tris, mesh.boundary_mask)


def delaunay_mesh(n_pts, rng):
    """Delaunay triangulation of the unit square corners, edge points and random points."""
    edge = rng.uniform(0.15, 0.85, size=4)
    pts = [[0, 0], [1, 0], [1, 1], [0, 1],
           [edge[0], 0], [1, edge[1]], [edge[2], 1], [0, edge[3]]]
    pts = np.vstack([pts, rng.uniform(0.1, 0.9, size=(n_pts, 2))])
    tri = Delaunay(pts).simplices
    a = pts[tri]
    e1, e2 = a[:, 1] - a[:, 0], a[:, 2] - a[:, 0]
    area = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    tri = np.where((area < 0)[:, None], tri[:, [0, 2, 1]], tri)
    return Mesh(pts, tri)


def smooth_field(mesh, rng, amp):
    """Random smooth function, zeroed on the Dirichlet vertices."""
    x, y = mesh.vertices.T
    k = rng.integers(1, 3, size=2)
    ph = rng.uniform(0, 2 * np.pi, size=2)
    u = amp * (np.sin(k[0] * np.pi * x + ph[0]) * np.cos(k[1] * np.pi * y + ph[1])
               + 0.5 * np.sin(np.pi * (x + y)))
    u[mesh.boundary_mask] = 0.0
    return u


def spec_from(kappa, g, bounds, f=0.0):
    return ProblemSpec.from_config({"kappa": kappa, "g": g, "f": f, "bounds": bounds})


# families used by the assembly oracle test: (kappa, g, polynomial-exact?)
FAMILIES = [
    ({"family": "quadratic", "a": 2.0, "b": 0.3, "c": 0.5}, {"family": "linear", "a": 1.5}, True),
    ({"family": "tanh", "a": 2.0, "b": 0.8, "c": 1.5}, {"family": "arctan", "a": 0.5, "b": 1.0, "c": 2.0}, False),
    ({"family": "tanh_xy", "a": 2.0, "s": 0.5, "b": 0.7, "c": 1.2}, {"family": "cubic", "a": 0.7}, False),
]
LOOSE = {"k_alpha": 0.1, "k_beta": 10.0, "K_eta": 10.0, "G_eta": 10.0}


def conical_rule(n):
    """Gauss-Jacobi x Gauss-Legendre rule on the reference triangle {x, y >= 0, x + y <= 1}.

    Returns points (Q, 2) and weights summing to 1/2; exact to degree 2n - 1.
    """
    a, wa = special.roots_jacobi(n, 1.0, 0.0)
    b, wb = special.roots_legendre(n)
    A, B = np.meshgrid(a, b, indexing="ij")
    x = (1 + A) / 2
    y = (1 - x) * (1 + B) / 2
    w = np.outer(wa, wb) / 8.0
    return np.stack([x.ravel(), y.ravel()], axis=1), w.ravel()


def oracle_matrix(mesh, spec, u1, u2, n=10):
    """Dense linearized matrix on interior vertices, built entry by entry.

    Gradients come from inverting the 3x3 nodal interpolation matrix, the
    t-averages from adaptive quadrature; nothing is shared with fecert.fem
    apart from the coefficient functions.
    """
    ref, wref = conical_rule(n)
    xs, ws, grads, lams, tri_of = [], [], [], [], []
    for t, tri in enumerate(mesh.triangles):
        P = mesh.vertices[tri]
        V = np.column_stack([np.ones(3), P])
        C = np.linalg.inv(V)  # column k: coefficients (c0, cx, cy) of basis k
        jac = abs(np.linalg.det(np.column_stack([P[1] - P[0], P[2] - P[0]])))
        X = P[0] + np.outer(ref[:, 0], P[1] - P[0]) + np.outer(ref[:, 1], P[2] - P[0])
        lam = np.column_stack([np.ones(len(X)), X]) @ C
        xs.append(X)
        ws.append(wref * jac)
        lams.append(lam)
        grads.append(C[1:, :].T)
        tri_of.append(np.full(len(X), t))
    X = np.vstack(xs)
    W = np.concatenate(ws)
    L = np.vstack(lams)
    tri_of = np.concatenate(tri_of)
    U1 = np.einsum("qk,qk->q", L, u1[mesh.triangles[tri_of]])
    U2 = np.einsum("qk,qk->q", L, u2[mesh.triangles[tri_of]])
    kap = spec.kappa(X, U1)
    opts = dict(epsabs=1e-15, epsrel=1e-13)
    b = integrate.quad_vec(lambda t: spec.dkappa_deta(X, t * U1 + (1 - t) * U2), 0, 1, **opts)[0]
    c = integrate.quad_vec(lambda t: spec.dg_deta(X, t * U1 + (1 - t) * U2), 0, 1, **opts)[0]

    N = mesh.n_vertices
    A = np.zeros((N, N))
    start = 0
    for t, tri in enumerate(mesh.triangles):
        q = slice(start, start + len(ref))
        start += len(ref)
        G = grads[t]
        gu2 = G.T @ u2[tri]
        for i in range(3):
            for j in range(3):
                val = np.sum(W[q] * (kap[q] * (G[j] @ G[i])
                                     + b[q] * (gu2 @ G[i]) * L[q, j]
                                     + c[q] * L[q, i] * L[q, j]))
                A[tri[i], tri[j]] += val
    dofs = mesh.interior_vertices
    return A[np.ix_(dofs, dofs)]
