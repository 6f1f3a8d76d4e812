"""Monotonicity certificates for the linearized matrix A.

Two independent routes decide whether A is monotone (A^{-1} >= 0):

* sufficient local conditions on the mesh angles and on nodal differences
  of u2 make A a Z-matrix with positive diagonal, and a diagonal scaling
  D graded by distance to the boundary makes A^T D strictly diagonally
  dominant; by the Fiedler-Ptak theorem A^T, hence A, is monotone;
* a dense inverse checked for nonnegative entries.

Monotonicity of A gives the discrete comparison principle: f1 <= f2
implies u1 <= u2, and f1 = f2 implies u1 = u2.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy import sparse

from .fem import (AssembledSystem, assemble_linearized, assemble_load,
                  element_integrals, nodal_differences)
from .mesh import Mesh, MeshAdmissibility, MeshError, analyze, boundary_distance, max_degree
from .problem import ProblemSpec
from .quadrature import get_rule
from .solver import SolveOptions, solve_picard

logger = logging.getLogger(__name__)

SIGN_TOL = 1e-13
ORACLE_TOL = 1e-10
DEFAULT_EPS0 = 0.5
MAX_HALVINGS = 8
ORACLE_CAP = 2000

CERTIFIED = "certified_monotone"
ORACLE_ONLY = "oracle_monotone_only"
NOT_CERTIFIED = "not_certified"
REFUTED = "refuted"
VERDICTS = (CERTIFIED, ORACLE_ONLY, NOT_CERTIFIED, REFUTED)


class ScalingError(ValueError):
    """The epsilon sequence of the scaling is not positive."""


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if hasattr(x, "to_dict"):
        return _jsonable(x.to_dict())
    return x


# -- local conditions ----------------------------------------------------------

def condition_edges(mesh: Mesh) -> np.ndarray:
    """Indices of interior edges with at least one non-Dirichlet endpoint."""
    e = mesh.edges
    free = ~mesh.boundary_mask
    return np.flatnonzero(mesh.interior_edge_mask & (free[e[:, 0]] | free[e[:, 1]]))


@dataclass
class ZCondition:
    """Per-patch margins k_alpha - (K_eta beta_M delta + G_eta |T|max) / (3 beta_m)."""

    edges: np.ndarray
    margins: np.ndarray
    beta_m: float
    beta_M: float
    max_area: float
    delta_threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.all(self.margins >= 0))

    @property
    def min_margin(self) -> float:
        return float(self.margins.min()) if len(self.margins) else math.inf

    @property
    def failing_edges(self) -> np.ndarray:
        return self.edges[self.margins < 0]

    def to_dict(self) -> dict:
        return {"beta_m": self.beta_m, "beta_M": self.beta_M,
                "max_area": self.max_area, "delta_threshold": self.delta_threshold,
                "passed": self.passed, "min_margin": self.min_margin,
                "edges": self.edges, "margins": self.margins,
                "failing_edges": self.failing_edges}


@dataclass
class LCondition:
    """Per-edge margins 3 k_alpha / K_eta - delta_e (unbounded when K_eta = 0)."""

    edges: np.ndarray
    margins: np.ndarray
    unbounded: bool

    @property
    def passed(self) -> bool:
        return bool(np.all(self.margins > 0))

    @property
    def min_margin(self) -> float:
        return float(self.margins.min()) if len(self.margins) else math.inf

    @property
    def failing_edges(self) -> np.ndarray:
        return self.edges[~(self.margins > 0)]

    def to_dict(self) -> dict:
        d = {"unbounded": self.unbounded, "passed": self.passed,
             "min_margin": self.min_margin, "edges": self.edges,
             "failing_edges": self.failing_edges}
        d["margins"] = None if self.unbounded else self.margins
        return d


def _betas(mesh, beta_m, beta_M, adm=None):
    if beta_m is None or beta_M is None:
        adm = adm or analyze(mesh)
        if not adm.admissible:
            raise MeshError("mesh violates the angle conditions")
        if adm.beta_m is None:
            raise MeshError("mesh has no interior edge")
        beta_m = adm.beta_m if beta_m is None else beta_m
        beta_M = adm.beta_M if beta_M is None else beta_M
    return float(beta_m), float(beta_M)


def z_threshold(spec: ProblemSpec, beta_m: float, beta_M: float, max_area: float) -> float:
    """Largest patch difference delta allowed by the Z-condition."""
    b = spec.bounds
    if b.K_eta == 0:
        return math.inf
    return (3.0 * beta_m * b.k_alpha - b.G_eta * max_area) / (b.K_eta * beta_M)


def check_z_condition(mesh: Mesh, spec: ProblemSpec, u2, beta_m=None, beta_M=None,
                      adm: MeshAdmissibility | None = None) -> ZCondition:
    """Sufficient condition for a_ij <= 0 (i != j), evaluated per patch.

    ``beta_m``/``beta_M`` default to the tight values from :func:`analyze`.
    """
    beta_m, beta_M = _betas(mesh, beta_m, beta_M, adm)
    b = spec.bounds
    idx = condition_edges(mesh)
    delta = nodal_differences(mesh, u2).patch_delta[idx]
    margins = b.k_alpha - (b.K_eta * beta_M * delta + b.G_eta * mesh.max_area) / (3.0 * beta_m)
    return ZCondition(mesh.edges[idx], margins, beta_m, beta_M, mesh.max_area,
                      z_threshold(spec, beta_m, beta_M, mesh.max_area))


def check_l_condition(mesh: Mesh, spec: ProblemSpec, u2) -> LCondition:
    """Sufficient condition for a_ii > 0: delta_e(u2) < 3 k_alpha / K_eta on every edge."""
    b = spec.bounds
    idx = condition_edges(mesh)
    if b.K_eta == 0:
        return LCondition(mesh.edges[idx], np.full(len(idx), math.inf), True)
    delta = nodal_differences(mesh, u2).edge_delta[idx]
    return LCondition(mesh.edges[idx], 3.0 * b.k_alpha / b.K_eta - delta, False)


def strengthened_margins(mesh: Mesh, spec: ProblemSpec, u2, beta_m: float,
                         beta_M: float) -> np.ndarray:
    """k_alpha - K_eta beta_M delta / (3 beta_m) per condition patch (no reaction term)."""
    b = spec.bounds
    delta = nodal_differences(mesh, u2).patch_delta[condition_edges(mesh)]
    return b.k_alpha - b.K_eta * beta_M * delta / (3.0 * beta_m)


# -- J terms -------------------------------------------------------------------

@dataclass
class JValues:
    """J_ij for ordered pairs (i interior, j a neighbour).

    ``interior`` marks pairs whose second vertex is also interior; J_L and
    J_U are the extreme magnitudes over those pairs.
    """

    pairs: np.ndarray
    values: np.ndarray
    interior: np.ndarray

    @property
    def _inner(self):
        return self.values[self.interior]

    @property
    def all_negative(self) -> bool:
        return bool(np.all(self._inner < 0))

    @property
    def J_L(self) -> float | None:
        v = self._inner
        return float(np.abs(v).min()) if len(v) else None

    @property
    def J_U(self) -> float | None:
        v = self._inner
        return float(np.abs(v).max()) if len(v) else None

    def to_dict(self) -> dict:
        bad = self.pairs[self.interior][self._inner >= 0]
        return {"J_L": self.J_L, "J_U": self.J_U, "all_negative": self.all_negative,
                "nonnegative_pairs": bad}


def compute_J(mesh: Mesh, spec: ProblemSpec, u1, u2, rule=None) -> JValues:
    """Per-pair J_ij from the same element integrals used by the assembly.

    J_ij = int (kappa(u1) + (u2_i - u2_j) b phi_i) grad phi_i . grad phi_j
         + sum_T (u2_k - u2_j) int_T grad phi_k . grad phi_j b phi_i,
    with k the vertex of T opposite edge (i, j).
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    ei = element_integrals(mesh, spec, u1, u2, get_rule(rule))
    G = mesh.basis_gradients
    GG = np.einsum("mad,mbd->mab", G, G)
    tri = mesh.triangles
    U = u2[tri]
    rows, cols, vals = [], [], []
    for a in range(3):
        for b in range(3):
            if a == b:
                continue
            k = 3 - a - b
            v = (ei.kappa_int * GG[:, a, b]
                 + (U[:, a] - U[:, b]) * ei.b_phi[:, a] * GG[:, a, b]
                 + (U[:, k] - U[:, b]) * GG[:, k, b] * ei.b_phi[:, a])
            rows.append(tri[:, a])
            cols.append(tri[:, b])
            vals.append(v)
    n = mesh.n_vertices
    J = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n)).tocsr()
    e = mesh.edges
    pairs = np.concatenate([e, e[:, ::-1]])
    free = ~mesh.boundary_mask
    pairs = pairs[free[pairs[:, 0]]]
    values = np.asarray(J[pairs[:, 0], pairs[:, 1]]).ravel()
    return JValues(pairs, values, free[pairs[:, 1]])


# -- scaling -------------------------------------------------------------------

@dataclass
class ScalingParams:
    eps_bar: float
    eps0: float
    delta0: float
    r: float
    J_L: float | None
    J_U: float | None
    m: int
    beta_m: float
    halvings: int = 0

    @property
    def eps_limit(self) -> float:
        """Limit of the epsilon sequence, eps0 - delta0 / (1 - r)."""
        return self.eps0 - self.delta0 / (1.0 - self.r)

    @classmethod
    def from_data(cls, eps_bar, beta_m, m, J_L, J_U, eps0=DEFAULT_EPS0, halvings=0):
        """delta0 = eps_bar beta_m (1 - eps0) / (2 m J_U),  r = J_L / (m J_U)."""
        if J_U is None or J_U == 0:
            delta0, r = 0.0, 0.0
        else:
            delta0 = eps_bar * beta_m * (1.0 - eps0) / (2.0 * m * J_U)
            r = J_L / (m * J_U)
        return cls(eps_bar, eps0, delta0, r, J_L, J_U, m, beta_m, halvings)

    def to_dict(self) -> dict:
        return {"eps_bar": self.eps_bar, "eps0": self.eps0, "delta0": self.delta0,
                "r": self.r, "J_L": self.J_L, "J_U": self.J_U, "m": self.m,
                "beta_m": self.beta_m, "halvings": self.halvings,
                "eps_limit": self.eps_limit}


def eps_sequence(eps0: float, delta0: float, r: float, length: int) -> np.ndarray:
    """eps_0 = eps0, eps_p = eps_{p-1} - r^(p-1) delta0."""
    # fsum keeps each partial sum correctly rounded
    terms = [float(eps0)]
    eps = np.empty(length)
    for p in range(length):
        if p:
            terms.append(-(r ** (p - 1)) * delta0)
        eps[p] = math.fsum(terms)
    return eps


def build_D_eps(p, params: ScalingParams) -> np.ndarray:
    """Diagonal d_i = 1 - eps_{p_i} for boundary distances ``p``."""
    p = np.asarray(p, dtype=np.int64)
    if not 0 < params.eps0 < 1:
        raise ScalingError("eps0 must lie in (0, 1)")
    length = int(p.max()) + 1 if len(p) else 1
    eps = eps_sequence(params.eps0, params.delta0, params.r, length)
    if np.any(eps <= 0):
        raise ScalingError(
            f"epsilon sequence not positive (eps0={params.eps0}, delta0={params.delta0}, "
            f"r={params.r}); decrease eps_bar")
    return 1.0 - eps[p]


def build_D_prime(mesh: Mesh, d_eps: float) -> np.ndarray:
    """Two-level scaling: d_eps next to the boundary, 1 elsewhere."""
    if not 0 < d_eps < 1:
        raise ScalingError("d_eps must lie in (0, 1)")
    p = boundary_distance(mesh)
    return np.where(p == 0, d_eps, 1.0)


@dataclass
class Dominance:
    """Row margins |m_ii| - sum_{j != i} |m_ij| of M = A^T D."""

    margins: np.ndarray
    scale: np.ndarray
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.all(self.margins > self.tol * self.scale))

    @property
    def min_margin(self) -> float:
        return float(self.margins.min()) if len(self.margins) else math.inf

    def to_dict(self) -> dict:
        worst = int(np.argmin(self.margins)) if len(self.margins) else None
        return {"passed": self.passed, "min_margin": self.min_margin,
                "worst_row": worst, "margins": self.margins}


def check_strict_dominance(A, d, tol: float = SIGN_TOL) -> Dominance:
    """Strict diagonal dominance of A^T diag(d), row by row."""
    A = sparse.csr_matrix(A)
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("scaling must be positive")
    M = (A.T @ sparse.diags(d)).tocsr()
    absM = abs(M)
    diag = np.abs(M.diagonal())
    off = np.asarray(absM.sum(axis=1)).ravel() - diag
    scale = np.asarray(absM.max(axis=1).todense()).ravel() if M.shape[0] else np.zeros(0)
    return Dominance(diag - off, scale, tol)


# -- dense oracle --------------------------------------------------------------

@dataclass
class OracleResult:
    monotone: bool
    singular: bool = False
    min_entry: float | None = None
    inverse_max: float | None = None
    witness: tuple | None = None

    def to_dict(self) -> dict:
        return {"monotone": self.monotone, "singular": self.singular,
                "min_entry": self.min_entry, "inverse_max": self.inverse_max,
                "witness": None if self.witness is None else
                {"row": self.witness[0], "col": self.witness[1], "value": self.witness[2]}}


def monotone_oracle(A, tol: float = ORACLE_TOL) -> OracleResult:
    """Dense check that A is invertible with A^{-1} >= -tol * max|A^{-1}|."""
    A = A.toarray() if sparse.issparse(A) else np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 0:
        return OracleResult(True, min_entry=0.0, inverse_max=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A)
    if np.any(np.abs(np.diag(lu)) <= np.finfo(float).eps * n * np.abs(A).max()):
        return OracleResult(False, singular=True)
    inv = sla.lu_solve((lu, piv), np.eye(n))
    if not np.all(np.isfinite(inv)):
        return OracleResult(False, singular=True)
    top = float(np.abs(inv).max())
    k = int(np.argmin(inv))
    i, j = divmod(k, n)
    low = float(inv[i, j])
    ok = low >= -tol * top
    return OracleResult(ok, False, low, top, None if ok else (i, j, low))


# -- certificate ---------------------------------------------------------------

@dataclass
class DirectChecks:
    """Entrywise sign pattern of the assembled matrix."""

    max_offdiag: float
    min_diag: float
    scale: float
    tol: float
    positive_offdiag: tuple | None

    @property
    def z_matrix(self) -> bool:
        return self.max_offdiag <= self.tol * self.scale

    @property
    def positive_diagonal(self) -> bool:
        return self.min_diag > self.tol * self.scale

    def to_dict(self) -> dict:
        w = self.positive_offdiag
        return {"max_offdiag": self.max_offdiag, "min_diag": self.min_diag,
                "scale": self.scale, "z_matrix": self.z_matrix,
                "positive_diagonal": self.positive_diagonal,
                "positive_offdiag": None if w is None else
                {"row": w[0], "col": w[1], "value": w[2]}}


def direct_checks(A, tol: float = SIGN_TOL) -> DirectChecks:
    A = sparse.csr_matrix(A)
    coo = A.tocoo()
    off = coo.row != coo.col
    scale = float(np.abs(coo.data).max()) if coo.nnz else 0.0
    if off.any():
        k = int(np.argmax(np.where(off, coo.data, -np.inf)))
        max_off = float(coo.data[k])
        witness = (int(coo.row[k]), int(coo.col[k]), max_off) if max_off > tol * scale else None
    else:
        max_off, witness = -math.inf, None
    diag = A.diagonal()
    return DirectChecks(max_off, float(diag.min()) if len(diag) else math.inf,
                        scale, tol, witness)


@dataclass
class Certificate:
    verdict: str
    n: int
    mesh: MeshAdmissibility
    direct: DirectChecks
    z_condition: ZCondition | None = None
    l_condition: LCondition | None = None
    J: JValues | None = None
    scaling: ScalingParams | None = None
    distances: np.ndarray | None = None
    d: np.ndarray | None = None
    dominance: Dominance | None = None
    oracle: OracleResult | None = None
    dofs: np.ndarray | None = None
    notes: list = field(default_factory=list)

    @property
    def witness(self):
        if self.verdict != REFUTED:
            return None
        out = {}
        if self.oracle is not None and self.oracle.witness is not None:
            out["negative_inverse_entry"] = self.oracle.to_dict()["witness"]
        if self.oracle is not None and self.oracle.singular:
            out["singular"] = True
        if self.direct.positive_offdiag is not None:
            out["positive_offdiag"] = self.direct.to_dict()["positive_offdiag"]
        return out

    def to_dict(self) -> dict:
        return _jsonable({
            "schema": 1,
            "verdict": self.verdict,
            "n": self.n,
            "mesh": self.mesh.to_dict(),
            "direct": self.direct,
            "z_condition": self.z_condition,
            "l_condition": self.l_condition,
            "J": self.J,
            "scaling": self.scaling,
            "distances": self.distances,
            "d": self.d,
            "dominance": self.dominance,
            "oracle": self.oracle,
            "dofs": self.dofs,
            "witness": self.witness,
            "notes": self.notes,
        })


def fiedler_ptak_certify(A, mesh: Mesh, spec: ProblemSpec, u1, u2, *,
                         eps0: float = DEFAULT_EPS0, sign_tol: float = SIGN_TOL,
                         max_halvings: int = MAX_HALVINGS, rule=None) -> Certificate:
    """Run the sufficient-condition pipeline; verdict is certified or not_certified.

    eps_bar starts at the smallest strengthened margin over the patches and
    is halved while A^T D_eps fails strict dominance.
    """
    if A is None:
        A = assemble_linearized(mesh, spec, u1, u2, rule).A
    if isinstance(A, AssembledSystem):
        A = A.A
    A = sparse.csr_matrix(A)
    adm = analyze(mesh)
    direct = direct_checks(A, sign_tol)
    cert = Certificate(NOT_CERTIFIED, A.shape[0], adm, direct, dofs=mesh.interior_vertices)
    if A.shape[0] == 0:
        cert.notes.append("no interior vertices")
        return cert
    if not adm.admissible:
        cert.notes.append("mesh violates the angle conditions")
        return cert

    z = check_z_condition(mesh, spec, u2, adm=adm)
    lc = check_l_condition(mesh, spec, u2)
    cert.z_condition, cert.l_condition = z, lc
    if not (np.all(z.margins > 0) and lc.passed):
        cert.notes.append("local Z/L conditions fail")
        return cert
    if not (direct.z_matrix and direct.positive_diagonal):
        cert.notes.append("assembled matrix is not an L-matrix despite the local conditions")
        return cert

    eps_bar = float(strengthened_margins(mesh, spec, u2, z.beta_m, z.beta_M).min())
    if not eps_bar > 0:
        cert.notes.append("strengthened condition leaves no margin (eps_bar <= 0)")
        return cert

    J = compute_J(mesh, spec, u1, u2, rule)
    cert.J = J
    if not J.all_negative:
        cert.notes.append("some J_ij >= 0")
        return cert

    p = boundary_distance(mesh)
    cert.distances = p
    m = max_degree(mesh)
    for h in range(max_halvings + 1):
        params = ScalingParams.from_data(eps_bar / 2 ** h, z.beta_m, m, J.J_L, J.J_U,
                                          eps0, halvings=h)
        cert.scaling = params
        try:
            d = build_D_eps(p, params)
        except ScalingError as exc:
            cert.notes.append(f"halving {h}: {exc}")
            continue
        dom = check_strict_dominance(A, d, sign_tol)
        cert.d, cert.dominance = d, dom
        if dom.passed:
            cert.verdict = CERTIFIED
            return cert
        logger.debug("dominance failed at eps_bar=%g (min margin %g)",
                     params.eps_bar, dom.min_margin)
    cert.notes.append(f"A^T D_eps not strictly dominant after {max_halvings} halvings")
    return cert


def certify(mesh: Mesh, spec: ProblemSpec, u1, u2, A=None, *, oracle: bool = True,
            oracle_cap: int = ORACLE_CAP, oracle_tol: float = ORACLE_TOL,
            eps0: float = DEFAULT_EPS0, sign_tol: float = SIGN_TOL,
            max_halvings: int = MAX_HALVINGS, rule=None) -> Certificate:
    """Full certificate: sufficient conditions plus (for n <= oracle_cap) the dense oracle."""
    cert = fiedler_ptak_certify(A, mesh, spec, u1, u2, eps0=eps0, sign_tol=sign_tol,
                                max_halvings=max_halvings, rule=rule)
    if A is None:
        A = assemble_linearized(mesh, spec, u1, u2, rule).A
    if isinstance(A, AssembledSystem):
        A = A.A
    if oracle and cert.n <= oracle_cap:
        res = monotone_oracle(A, oracle_tol)
        cert.oracle = res
        if not res.monotone:
            if cert.verdict == CERTIFIED:
                cert.notes.append("oracle contradicts the sufficient conditions")
            cert.verdict = REFUTED
        elif cert.verdict != CERTIFIED:
            cert.verdict = ORACLE_ONLY
    elif oracle:
        cert.notes.append(f"oracle skipped: n = {cert.n} > {oracle_cap}")
    return cert


# -- comparison experiment -------------------------------------------------------

def sampled_order(mesh: Mesh, f1, f2, rule=None) -> bool:
    """f1 <= f2 at the vertices and quadrature points."""
    pts = [mesh.vertices, get_rule(rule).points(mesh.coords).reshape(-1, 2)]
    return all(np.all(np.asarray(f1(x)) <= np.asarray(f2(x))) for x in pts)


@dataclass
class ComparisonReport:
    u1: np.ndarray
    u2: np.ndarray
    certificate: Certificate
    data_ordered: bool
    same_data: bool
    max_u1_minus_u2: float
    comparison_holds: bool
    identity_residual: float
    iterations: tuple

    @property
    def predicted(self) -> bool:
        return self.certificate.verdict in (CERTIFIED, ORACLE_ONLY)

    def to_dict(self) -> dict:
        d = {
            "data_ordered": self.data_ordered,
            "same_data": self.same_data,
            "max_u1_minus_u2": self.max_u1_minus_u2,
            "comparison_holds": self.comparison_holds,
            "predicted": self.predicted,
            "identity_residual": self.identity_residual,
            "iterations": list(self.iterations),
            "certificate": self.certificate.to_dict(),
        }
        if self.same_data:
            d["uniqueness_gap"] = float(np.max(np.abs(self.u1 - self.u2)))
        return _jsonable(d)


def comparison_experiment(mesh: Mesh, spec: ProblemSpec, f1, f2,
                          opts1: SolveOptions | None = None,
                          opts2: SolveOptions | None = None, *,
                          require_order: bool = True, tol: float = 1e-10,
                          rule=None, **certify_kw) -> ComparisonReport:
    """Solve with f1 and f2, certify A(u1, u2) and test u1 <= u2 nodally.

    ``identity_residual`` is max |A (u1 - u2) - F| on interior rows, which
    vanishes for exact discrete solutions.
    """
    ordered = sampled_order(mesh, f1, f2, rule)
    if require_order and not ordered:
        raise ValueError("f1 <= f2 fails at a sampled point")
    s1 = solve_picard(mesh, spec, f1, opts1, rule=rule)
    s2 = solve_picard(mesh, spec, f2, opts2, rule=rule)
    system = assemble_linearized(mesh, spec, s1.u, s2.u, rule)
    cert = certify(mesh, spec, s1.u, s2.u, system.A, rule=rule, **certify_kw)
    F = assemble_load(mesh, f1, f2, rule)
    W = system.restrict(s1.u - s2.u)
    ident = float(np.max(np.abs(system.A @ W - F))) if system.n else 0.0
    gap = float(np.max(s1.u - s2.u))
    same = f1 == f2 if not callable(getattr(f1, "__eq__", None)) else bool(f1 == f2)
    return ComparisonReport(s1.u, s2.u, cert, ordered, same, gap, gap <= tol, ident,
                            (s1.iterations, s2.iterations))
