"""Triangle meshes: topology, geometry, Triangle-format I/O and structured generators.

A :class:`Mesh` stores vertex coordinates, counterclockwise triangles and a
boolean Dirichlet-boundary mask.  Everything else (edges, angles,
cotangents, adjacency) is derived lazily and cached.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse

RIGHT_ANGLE_TOL = 1e-12
COT_SUM_TOL = 1e-12


class MeshError(ValueError):
    """Base class for mesh problems."""


class MeshParseError(MeshError):
    """A .node/.ele file could not be read."""


class MeshTopologyError(MeshError):
    """The triangles do not form a valid conforming triangulation."""


class Mesh:
    """Conforming 2D triangulation with a Dirichlet boundary.

    Parameters
    ----------
    vertices : array_like, shape (N, 2)
    triangles : array_like of int, shape (M, 3)
        Counterclockwise vertex triples.
    boundary : array_like, optional
        Either a boolean mask of length N or a list of vertex indices.  When
        omitted the boundary is the vertex set of all edges that belong to a
        single triangle.
    check : bool
        Validate orientation and conformity on construction.
    """

    def __init__(self, vertices, triangles, boundary=None, *, check=True):
        self.vertices = np.ascontiguousarray(vertices, dtype=float).reshape(-1, 2)
        tri = np.asarray(triangles)
        if tri.size == 0:
            raise MeshTopologyError("mesh has no triangles")
        if not np.issubdtype(tri.dtype, np.integer):
            raise MeshTopologyError("triangle indices must be integers")
        self.triangles = np.ascontiguousarray(tri, dtype=np.int64).reshape(-1, 3)
        n = len(self.vertices)
        if self.triangles.min() < 0 or self.triangles.max() >= n:
            raise MeshTopologyError(
                f"triangle references vertex outside 0..{n - 1}")

        if boundary is None:
            mask = np.zeros(n, dtype=bool)
            mask[self.boundary_edges.ravel()] = True
        else:
            b = np.asarray(boundary)
            if b.dtype == bool:
                if b.shape != (n,):
                    raise MeshTopologyError("boundary mask has wrong length")
                mask = b.copy()
            else:
                mask = np.zeros(n, dtype=bool)
                mask[b.astype(np.int64)] = True
        self.boundary_mask = mask
        if check:
            self.validate()

    # -- basic sizes -------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.boundary_mask)

    @cached_property
    def interior_vertices(self) -> np.ndarray:
        """Degrees of freedom, in increasing vertex order."""
        return np.flatnonzero(~self.boundary_mask)

    @cached_property
    def dof_index(self) -> np.ndarray:
        """Vertex -> row index in assembled systems (-1 on the boundary)."""
        idx = np.full(self.n_vertices, -1, dtype=np.int64)
        idx[self.interior_vertices] = np.arange(len(self.interior_vertices))
        return idx

    # -- geometry ----------------------------------------------------------
    @cached_property
    def coords(self) -> np.ndarray:
        """Triangle vertex coordinates, shape (M, 3, 2)."""
        return self.vertices[self.triangles]

    @cached_property
    def signed_areas(self) -> np.ndarray:
        p = self.coords
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def areas(self) -> np.ndarray:
        return self.signed_areas

    @cached_property
    def max_area(self) -> float:
        return float(self.areas.max())

    @cached_property
    def _corner_vectors(self):
        p = self.coords
        # edges leaving local vertex k towards k+1 and k+2
        a = np.roll(p, -1, axis=1) - p
        b = np.roll(p, -2, axis=1) - p
        return a, b

    @cached_property
    def angles(self) -> np.ndarray:
        """Interior angle at each local vertex, shape (M, 3)."""
        a, b = self._corner_vectors
        cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
        dot = np.einsum("mkd,mkd->mk", a, b)
        return np.arctan2(np.abs(cross), dot)

    @cached_property
    def cotangents(self) -> np.ndarray:
        """cot of the angle at each local vertex, as dot / (2 |T|)."""
        a, b = self._corner_vectors
        dot = np.einsum("mkd,mkd->mk", a, b)
        return dot / (2.0 * self.areas[:, None])

    @cached_property
    def basis_gradients(self) -> np.ndarray:
        """Gradients of the three local hat functions, shape (M, 3, 2)."""
        p = self.coords
        e = np.roll(p, -2, axis=1) - np.roll(p, -1, axis=1)  # edge opposite k
        grad = np.stack([-e[..., 1], e[..., 0]], axis=-1)
        return grad / (2.0 * self.areas[:, None, None])

    # -- topology ----------------------------------------------------------
    @cached_property
    def _edge_table(self):
        tri = self.triangles
        # local edge k joins vertices k+1, k+2 (opposite vertex k)
        a = tri[:, [1, 2, 0]]
        b = tri[:, [2, 0, 1]]
        lo = np.minimum(a, b).ravel()
        hi = np.maximum(a, b).ravel()
        keys = np.stack([lo, hi], axis=1)
        edges, inverse, counts = np.unique(
            keys, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.ravel()
        if counts.max() > 2:
            bad = edges[np.argmax(counts)]
            raise MeshTopologyError(
                f"edge {tuple(bad)} is shared by {counts.max()} triangles")
        tri_of = np.repeat(np.arange(len(tri)), 3)
        edge_tris = np.full((len(edges), 2), -1, dtype=np.int64)
        order = np.argsort(inverse, kind="stable")
        sorted_e = inverse[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = sorted_e[1:] != sorted_e[:-1]
        edge_tris[sorted_e[first], 0] = tri_of[order[first]]
        edge_tris[sorted_e[~first], 1] = tri_of[order[~first]]
        return edges, inverse.reshape(-1, 3), edge_tris

    @property
    def edges(self) -> np.ndarray:
        """Unique edges (i < j), shape (E, 2)."""
        return self._edge_table[0]

    @property
    def triangle_edges(self) -> np.ndarray:
        """Edge index opposite each local vertex, shape (M, 3)."""
        return self._edge_table[1]

    @property
    def edge_triangles(self) -> np.ndarray:
        """The one or two triangles of each edge (-1 for a missing second)."""
        return self._edge_table[2]

    @cached_property
    def edge_opposite(self) -> np.ndarray:
        """Vertex opposite each edge in each of its triangles, shape (E, 2), -1 if absent."""
        te = self.triangle_edges
        et = self.edge_triangles
        out = np.full(et.shape, -1, dtype=np.int64)
        t = np.repeat(np.arange(self.n_triangles), 3)
        e = te.ravel()
        slot = (et[e, 0] != t).astype(np.int64)
        out[e, slot] = self.triangles.ravel()
        return out

    @cached_property
    def interior_edge_mask(self) -> np.ndarray:
        return self.edge_triangles[:, 1] >= 0

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        return self.edges[~self.interior_edge_mask]

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        e = self.edges
        n = self.n_vertices
        data = np.ones(2 * len(e), dtype=np.int8)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))

    def neighbors(self, i: int) -> np.ndarray:
        adj = self.adjacency
        return adj.indices[adj.indptr[i]:adj.indptr[i + 1]]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    def opposite_local(self, t: int, i: int, j: int) -> int:
        """Local index in triangle ``t`` of the vertex opposite edge (i, j)."""
        tri = self.triangles[t]
        for k in range(3):
            if tri[k] != i and tri[k] != j:
                return k
        raise MeshTopologyError(f"triangle {t} is degenerate")

    def local_index(self, t: int, v: int) -> int:
        hits = np.flatnonzero(self.triangles[t] == v)
        if len(hits) != 1:
            raise KeyError(f"vertex {v} not in triangle {t}")
        return int(hits[0])

    def edge_id(self, i: int, j: int) -> int:
        lo, hi = min(i, j), max(i, j)
        e = self.edges
        k = np.searchsorted(e[:, 0], lo, side="left")
        stop = np.searchsorted(e[:, 0], lo, side="right")
        hit = np.flatnonzero(e[k:stop, 1] == hi)
        if len(hit) == 0:
            raise KeyError(f"({i}, {j}) is not an edge")
        return int(k + hit[0])

    def patch(self, i: int, j: int) -> "EdgePatch":
        """Geometry of the patch of triangles sharing edge (i, j)."""
        e = self.edge_id(i, j)
        tris = tuple(int(t) for t in self.edge_triangles[e] if t >= 0)
        opp, th_opp, th_i, th_j = [], [], [], []
        for t in tris:
            k = self.opposite_local(t, i, j)
            opp.append(int(self.triangles[t, k]))
            th_opp.append(float(self.angles[t, k]))
            th_i.append(float(self.angles[t, self.local_index(t, i)]))
            th_j.append(float(self.angles[t, self.local_index(t, j)]))
        return EdgePatch(
            i=i, j=j, triangles=tris,
            theta_plus=th_opp[0],
            theta_minus=th_opp[1] if len(tris) == 2 else None,
            theta_i=tuple(th_i), theta_j=tuple(th_j), opposite=tuple(opp))

    # -- validation --------------------------------------------------------
    def validate(self) -> None:
        tri = self.triangles
        if np.any((tri[:, 0] == tri[:, 1]) | (tri[:, 1] == tri[:, 2])
                  | (tri[:, 0] == tri[:, 2])):
            raise MeshTopologyError("triangle with repeated vertex")
        bad = np.flatnonzero(self.signed_areas <= 0)
        if len(bad):
            raise MeshTopologyError(
                f"triangle {int(bad[0])} is inverted or degenerate "
                f"(signed area {self.signed_areas[bad[0]]:.3e})")
        self._check_edge_orientation()
        self._check_hanging_nodes()
        missing = ~self.boundary_mask[self.boundary_edges]
        if missing.any():
            e = self.boundary_edges[np.flatnonzero(missing.any(axis=1))[0]]
            raise MeshTopologyError(
                f"boundary edge {tuple(int(v) for v in e)} has an endpoint "
                "not marked as boundary")

    def _check_edge_orientation(self):
        # In a consistently oriented conforming mesh an interior edge is
        # traversed once in each direction.
        tri = self.triangles
        directed = np.stack([tri[:, [1, 2, 0]].ravel(),
                             tri[:, [2, 0, 1]].ravel()], axis=1)
        _, counts = np.unique(directed, axis=0, return_counts=True)
        if counts.max() > 1:
            raise MeshTopologyError(
                "overlapping triangles: an edge is traversed twice in the "
                "same direction")
        _ = self._edge_table  # raises on edges with more than two triangles

    def _check_hanging_nodes(self):
        be = self.boundary_edges
        if len(be) == 0:
            return
        v = self.vertices
        p, q = v[be[:, 0]], v[be[:, 1]]
        d = q - p
        length2 = np.einsum("ed,ed->e", d, d)
        scale = math.sqrt(float(length2.max()))
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.triangles.ravel()] = True
        cand = v[used]
        cand_ids = np.flatnonzero(used)
        for start in range(0, len(be), 256):
            sl = slice(start, start + 256)
            w = cand[None, :, :] - p[sl, None, :]
            t = np.einsum("end,ed->en", w, d[sl]) / length2[sl, None]
            cross = w[..., 0] * d[sl, None, 1] - w[..., 1] * d[sl, None, 0]
            dist = np.abs(cross) / np.sqrt(length2[sl, None])
            hit = (t > 1e-9) & (t < 1 - 1e-9) & (dist < 1e-10 * scale)
            if hit.any():
                e, c = np.argwhere(hit)[0]
                raise MeshTopologyError(
                    f"vertex {int(cand_ids[c])} lies inside boundary edge "
                    f"{tuple(int(x) for x in be[start + e])} (hanging node)")


@dataclass(frozen=True)
class EdgePatch:
    """Angles around one edge; ``theta_minus`` is None on the boundary."""

    i: int
    j: int
    triangles: tuple
    theta_plus: float
    theta_minus: float | None
    theta_i: tuple
    theta_j: tuple
    opposite: tuple

    @property
    def opposite_cot_sum(self) -> float:
        s = 1.0 / math.tan(self.theta_plus)
        if self.theta_minus is not None:
            s += 1.0 / math.tan(self.theta_minus)
        return s


@dataclass
class MeshAdmissibility:
    """Angle-condition summary of a mesh.

    ``min_opposite_cot_sum`` is the tight lower bound on
    cot(theta+) + cot(theta-) over interior edges; any beta_m strictly
    below it is admissible.  ``max_patch_cot_sum`` is a valid beta_M.
    Both are None when the mesh has no interior edge.
    """

    max_interior_angle: float
    min_opposite_cot_sum: float | None
    max_patch_cot_sum: float | None
    max_degree: int
    admissible: bool
    obtuse_triangles: list = field(default_factory=list)
    violating_edges: list = field(default_factory=list)

    @property
    def beta_m(self) -> float | None:
        """Largest usable beta_m (tight value less the strictness margin)."""
        if self.min_opposite_cot_sum is None:
            return None
        return self.min_opposite_cot_sum - COT_SUM_TOL

    @property
    def beta_M(self) -> float | None:
        return self.max_patch_cot_sum

    def to_dict(self) -> dict:
        return {
            "max_interior_angle": self.max_interior_angle,
            "min_opposite_cot_sum": self.min_opposite_cot_sum,
            "max_patch_cot_sum": self.max_patch_cot_sum,
            "beta_m": self.beta_m,
            "beta_M": self.beta_M,
            "max_degree": self.max_degree,
            "admissible": self.admissible,
            "obtuse_triangles": [int(t) for t in self.obtuse_triangles],
            "violating_edges": [[int(a), int(b)] for a, b in self.violating_edges],
        }


def opposite_cot_sums(mesh: Mesh) -> np.ndarray:
    """cot(theta+) + cot(theta-) for every edge (one term on boundary edges)."""
    cot = mesh.cotangents
    s = np.zeros(len(mesh.edges))
    te = mesh.triangle_edges
    np.add.at(s, te.ravel(), cot.ravel())
    return s


def patch_cot_sums(mesh: Mesh) -> np.ndarray:
    """Per-edge patch quantity for each endpoint, shape (E, 2).

    Column 0 uses the angles at ``edges[:, 0]``, column 1 at ``edges[:, 1]``.
    """
    edges = mesh.edges
    base = opposite_cot_sums(mesh)
    out = np.repeat(base[:, None], 2, axis=1)
    cot = mesh.cotangents
    tri = mesh.triangles
    te = mesh.triangle_edges
    for k in range(3):
        e = te[:, k]
        for end in (0, 1):
            v = edges[e, end]
            loc = np.argmax(tri == v[:, None], axis=1)
            np.add.at(out[:, end], e, cot[np.arange(len(tri)), loc])
    return out


def analyze(mesh: Mesh) -> MeshAdmissibility:
    """Check the angle conditions and compute beta_m, beta_M and m."""
    max_angle = float(mesh.angles.max())
    obtuse = np.flatnonzero(
        mesh.angles.max(axis=1) > math.pi / 2 + RIGHT_ANGLE_TOL)
    interior = mesh.interior_edge_mask
    if interior.any():
        cs = opposite_cot_sums(mesh)[interior]
        ps = patch_cot_sums(mesh)[interior]
        min_cs = float(cs.min())
        max_ps = float(ps.max())
        bad = mesh.edges[interior][cs <= COT_SUM_TOL]
    else:
        min_cs = max_ps = None
        bad = np.empty((0, 2), dtype=np.int64)
    admissible = (max_angle <= math.pi / 2 + RIGHT_ANGLE_TOL
                  and (min_cs is None or min_cs > COT_SUM_TOL))
    return MeshAdmissibility(
        max_interior_angle=max_angle,
        min_opposite_cot_sum=min_cs,
        max_patch_cot_sum=max_ps,
        max_degree=max_degree(mesh),
        admissible=bool(admissible),
        obtuse_triangles=[int(t) for t in obtuse],
        violating_edges=[(int(a), int(b)) for a, b in bad],
    )


def max_degree(mesh: Mesh) -> int:
    """Largest number of neighbours of any vertex."""
    return int(mesh.degrees.max())


def boundary_distance(mesh: Mesh) -> np.ndarray:
    """Graph distance p_i of each interior vertex to the Dirichlet layer.

    p_i = 0 when q_i has a neighbour on the boundary; otherwise it is the
    number of edges to the nearest such vertex, walking through interior
    vertices only.  The result is aligned with ``mesh.interior_vertices``.
    """
    if not mesh.boundary_mask.any():
        raise MeshError("a Dirichlet boundary vertex is required")
    interior = mesh.interior_vertices
    adj = mesh.adjacency
    dist = np.full(mesh.n_vertices, -1, dtype=np.int64)
    queue = deque()
    for v in interior:
        nb = adj.indices[adj.indptr[v]:adj.indptr[v + 1]]
        if mesh.boundary_mask[nb].any():
            dist[v] = 0
            queue.append(v)
    while queue:
        v = queue.popleft()
        for w in adj.indices[adj.indptr[v]:adj.indptr[v + 1]]:
            if not mesh.boundary_mask[w] and dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    p = dist[interior]
    if np.any(p < 0):
        v = int(interior[np.flatnonzero(p < 0)[0]])
        raise MeshError(f"interior vertex {v} cannot reach the boundary")
    return p


# -- structured generators ---------------------------------------------------

def gen_structured(kind: str, n: int) -> Mesh:
    """Structured mesh with ``n`` subdivisions per side.

    ``three_direction`` tiles the unit rhombus with 60 degrees at the origin
    by equilateral triangles; ``right_uniform`` splits each cell of the unit
    square along the same diagonal, giving right isosceles triangles whose
    diagonal edges see two right angles.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    ii, jj = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="xy")
    ii, jj = ii.ravel(), jj.ravel()
    if kind == "three_direction":
        x = (ii + 0.5 * jj) / n
        y = (math.sqrt(3) / 2) * jj / n
    elif kind == "right_uniform":
        x = ii / n
        y = jj / n
    else:
        raise ValueError(f"unknown mesh kind {kind!r}")
    verts = np.stack([x, y], axis=1)

    def vid(i, j):
        return j * (n + 1) + i

    ci, cj = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    ci, cj = ci.ravel(), cj.ravel()
    v00, v10 = vid(ci, cj), vid(ci + 1, cj)
    v01, v11 = vid(ci, cj + 1), vid(ci + 1, cj + 1)
    if kind == "three_direction":
        lower = np.stack([v00, v10, v01], axis=1)
        upper = np.stack([v10, v11, v01], axis=1)
    else:
        lower = np.stack([v00, v10, v11], axis=1)
        upper = np.stack([v00, v11, v01], axis=1)
    tris = np.stack([lower, upper], axis=1).reshape(-1, 3)
    boundary = (ii == 0) | (ii == n) | (jj == 0) | (jj == n)
    return Mesh(verts, tris, boundary)


# -- Triangle .node/.ele files -----------------------------------------------

def _data_lines(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise MeshParseError(f"cannot read {path}: {exc}") from exc
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line.split()


def _mesh_paths(path) -> tuple[Path, Path]:
    p = Path(path)
    if p.suffix in (".node", ".ele"):
        p = p.with_suffix("")
    return p.with_suffix(".node"), p.with_suffix(".ele")


def load_mesh(path) -> Mesh:
    """Read ``<stem>.node`` and ``<stem>.ele``.

    ``path`` may be the stem or either file.  Index base (0 or 1) is taken
    from the first vertex id.  Boundary markers, when present, define the
    Dirichlet set; otherwise it is inferred from single-triangle edges.
    """
    node_path, ele_path = _mesh_paths(path)
    rows = list(_data_lines(node_path))
    try:
        header = [int(t) for t in rows[0]]
        n_pts, dim = header[0], header[1]
        n_attr = header[2] if len(header) > 2 else 0
        n_mark = header[3] if len(header) > 3 else 0
        if dim != 2:
            raise MeshParseError(f"{node_path}: only 2D meshes are supported")
        body = rows[1:1 + n_pts]
        if len(body) != n_pts:
            raise MeshParseError(
                f"{node_path}: expected {n_pts} vertices, found {len(body)}")
        ids = np.array([int(r[0]) for r in body])
        xy = np.array([[float(r[1]), float(r[2])] for r in body])
        markers = None
        if n_mark:
            markers = np.array([int(r[3 + n_attr]) for r in body])
    except (IndexError, ValueError) as exc:
        if isinstance(exc, MeshParseError):
            raise
        raise MeshParseError(f"{node_path}: malformed ({exc})") from exc
    base = int(ids[0]) if len(ids) else 0
    if base not in (0, 1) or np.any(ids != np.arange(base, base + n_pts)):
        raise MeshParseError(f"{node_path}: vertex ids must be consecutive from 0 or 1")

    rows = list(_data_lines(ele_path))
    try:
        header = [int(t) for t in rows[0]]
        n_tri, per = header[0], header[1]
        if per != 3:
            raise MeshParseError(f"{ele_path}: only linear triangles are supported")
        body = rows[1:1 + n_tri]
        if len(body) != n_tri:
            raise MeshParseError(
                f"{ele_path}: expected {n_tri} triangles, found {len(body)}")
        tris = np.array([[int(r[1]), int(r[2]), int(r[3])] for r in body],
                        dtype=np.int64)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, MeshParseError):
            raise
        raise MeshParseError(f"{ele_path}: malformed ({exc})") from exc

    tris = tris - base
    boundary = None if markers is None else markers != 0
    return Mesh(xy, tris, boundary)


def write_mesh(mesh: Mesh, path) -> tuple[Path, Path]:
    """Write 1-based ``.node`` (with boundary markers) and ``.ele`` files."""
    node_path, ele_path = _mesh_paths(path)
    node_path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{mesh.n_vertices} 2 0 1"]
    for k, ((x, y), b) in enumerate(zip(mesh.vertices, mesh.boundary_mask)):
        lines.append(f"{k + 1} {float(x)!r} {float(y)!r} {int(b)}")
    node_path.write_text("\n".join(lines) + "\n")
    lines = [f"{mesh.n_triangles} 3 0"]
    for k, (a, b, c) in enumerate((mesh.triangles + 1).tolist()):
        lines.append(f"{k + 1} {a} {b} {c}")
    ele_path.write_text("\n".join(lines) + "\n")
    return node_path, ele_path
