"""Taylor-Hood discretization of the per-mode Stokes problems.

Velocity components live in the quadratic Lagrange space on the meridian
triangulation, pressure in the linear one.  For wavenumber k the discrete
saddle problem reads

    A u + B* p = F,    B u = G,

where A is the Hermitian energy matrix of the mode (r-weighted stiffness
plus 1/r-weighted mass coupling the radial and angular components) and B
collects the mode divergence against pressure test functions.

Essential conditions on the axis depend on the wavenumber: axisymmetric
modes pin the radial and angular components and leave the axial one free;
the |k| = 1 modes pin the axial component and tie the radial one to the
angular one through u_r = -i k u_t; all higher modes pin everything.  The
tie is expressed by a constraint matrix C mapping free unknowns to the
full component-major vector, so reduced operators are C* A C and B C.
After reduction every surviving 1/r**2 contribution either cancels
exactly (the tied |k| = 1 pairs) or involves only basis functions that
vanish on the axis, keeping the interior quadrature consistent.

Wall values win at corners where the wall meets the axis; data that
violates the axis conditions of the current mode there triggers a warning
instead of silently moving the problem.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fields import VectorModeFn, as_mode_function
from .meshing import GAMMA, GAMMA0, MeridianMesh, locate_points
from .quadrature import (
    DEFAULT_ASSEMBLY_DEGREE,
    QuadratureRule,
    edge_rule,
    triangle_rule,
)

__all__ = [
    "FemSpace",
    "FemScalarField",
    "ModeConstraints",
    "ModeOperators",
    "ModeSolution",
    "SaddleSystem",
    "assemble",
    "assemble_rhs",
    "boundary_flux",
    "export_matrix_coo",
    "mode_constraints",
    "read_matrix_coo",
]

COMP_R, COMP_T, COMP_Z = 0, 1, 2
_COMP_NAMES = ("r", "theta", "z")

_FREE, _FIXED, _SLAVE = 0, 1, 2


def _p2_values(lam: np.ndarray) -> np.ndarray:
    """Quadratic basis at barycentric points, local order v0 v1 v2 m12 m20 m01."""
    l0, l1, l2 = lam[:, 0], lam[:, 1], lam[:, 2]
    return np.stack(
        [
            l0 * (2 * l0 - 1),
            l1 * (2 * l1 - 1),
            l2 * (2 * l2 - 1),
            4 * l1 * l2,
            4 * l2 * l0,
            4 * l0 * l1,
        ],
        axis=1,
    )


def _p2_dvalues(lam: np.ndarray) -> np.ndarray:
    """Derivatives of the quadratic basis wrt the barycentric coordinates."""
    n = lam.shape[0]
    out = np.zeros((n, 6, 3))
    out[:, 0, 0] = 4 * lam[:, 0] - 1
    out[:, 1, 1] = 4 * lam[:, 1] - 1
    out[:, 2, 2] = 4 * lam[:, 2] - 1
    out[:, 3, 1] = 4 * lam[:, 2]
    out[:, 3, 2] = 4 * lam[:, 1]
    out[:, 4, 2] = 4 * lam[:, 0]
    out[:, 4, 0] = 4 * lam[:, 2]
    out[:, 5, 0] = 4 * lam[:, 1]
    out[:, 5, 1] = 4 * lam[:, 0]
    return out


class FemSpace:
    """Quadratic velocity / linear pressure pair on one meridian mesh.

    Velocity degrees of freedom are the mesh vertices followed by the edge
    midpoints; pressure degrees of freedom are the vertices, so pressure
    index m refers to the same node as velocity index m.
    """

    def __init__(self, mesh: MeridianMesh):
        self.mesh = mesh
        nv = mesh.n_vertices
        edge_ids = {}
        tris = mesh.triangles
        dof_map = np.empty((mesh.n_triangles, 6), dtype=np.int64)
        dof_map[:, :3] = tris
        local_edges = ((1, 2), (2, 0), (0, 1))
        for t in range(mesh.n_triangles):
            for slot, (a, b) in enumerate(local_edges):
                key = tuple(sorted((tris[t, a], tris[t, b])))
                eid = edge_ids.setdefault(key, len(edge_ids))
                dof_map[t, 3 + slot] = nv + eid
        self.edge_ids = edge_ids
        self.dof_map = dof_map
        self.n_p = nv
        self.n_vel = nv + len(edge_ids)
        mids = np.empty((len(edge_ids), 2))
        for (a, b), eid in edge_ids.items():
            mids[eid] = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
        self.dof_coords = np.vstack([mesh.vertices, mids])

        wall, axis = set(), set()
        for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
            eid = edge_ids[tuple(sorted((int(a), int(b))))]
            dofs = {int(a), int(b), nv + eid}
            (wall if tag == GAMMA else axis).update(dofs)
        self.wall_dofs = frozenset(wall)
        self.axis_dofs = frozenset(axis)
        self.corner_dofs = frozenset(wall & axis)

        # Per-triangle geometry for gradient pushforward.
        verts = mesh.vertices[tris]
        e1 = verts[:, 1] - verts[:, 0]
        e2 = verts[:, 2] - verts[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        grad = np.empty((mesh.n_triangles, 3, 2))
        grad[:, 1, 0] = e2[:, 1] / det
        grad[:, 1, 1] = -e2[:, 0] / det
        grad[:, 2, 0] = -e1[:, 1] / det
        grad[:, 2, 1] = e1[:, 0] / det
        grad[:, 0] = -grad[:, 1] - grad[:, 2]
        self.grad_lambda = grad
        self._tab_cache = {}
        self._op_cache = {}

    def tabulation(self, rule: QuadratureRule):
        """Basis values and physical gradients at the rule points.

        Returns (N, grads, R, Z, W): values (nq, 6), gradients
        (nt, nq, 6, 2), coordinates and weights (nt, nq).
        """
        key = (rule.degree, len(rule.weights))
        hit = self._tab_cache.get(key)
        if hit is not None:
            return hit
        lam = rule.points
        N = _p2_values(lam)
        dN = _p2_dvalues(lam)
        grads = np.einsum("qbi,tid->tqbd", dN, self.grad_lambda)
        verts = self.mesh.vertices[self.mesh.triangles]
        R = np.einsum("qi,ti->tq", lam, verts[:, :, 0])
        Z = np.einsum("qi,ti->tq", lam, verts[:, :, 1])
        W = self.mesh.triangle_areas()[:, None] * rule.weights[None, :]
        self._tab_cache[key] = (N, grads, R, Z, W)
        return self._tab_cache[key]

    def operators(self, rule: QuadratureRule = None) -> "ModeOperators":
        rule = rule or triangle_rule(DEFAULT_ASSEMBLY_DEGREE)
        key = (rule.degree, len(rule.weights))
        hit = self._op_cache.get(key)
        if hit is None:
            hit = _build_operators(self, rule)
            self._op_cache[key] = hit
        return hit


@dataclass(frozen=True)
class ModeOperators:
    """Wavenumber-independent ingredients of the per-mode matrices.

    K: r-weighted stiffness.  M1 / Mm1: mass with weight r and 1/r.
    D0: unweighted pressure-velocity mass.  Br, Bz: divergence parts for
    the radial and axial components.  Mp: r-weighted pressure mass, and
    m = Mp @ 1 represents the weighted mean functional.
    """

    K: sp.csr_matrix
    M1: sp.csr_matrix
    Mm1: sp.csr_matrix
    D0: sp.csr_matrix
    Br: sp.csr_matrix
    Bz: sp.csr_matrix
    Mp: sp.csr_matrix
    m: np.ndarray


def _scatter(nrows, ncols, rows, cols, data) -> sp.csr_matrix:
    mat = sp.coo_matrix(
        (data.ravel(), (rows.ravel(), cols.ravel())), shape=(nrows, ncols)
    )
    return mat.tocsr()


def _build_operators(space: FemSpace, rule: QuadratureRule) -> ModeOperators:
    N, grads, R, Z, W = space.tabulation(rule)
    P1 = rule.points
    WR = W * R
    K_loc = np.einsum("tq,tqad,tqbd->tab", WR, grads, grads, optimize=True)
    M1_loc = np.einsum("tq,qa,qb->tab", WR, N, N, optimize=True)
    Mm1_loc = np.einsum("tq,qa,qb->tab", W / R, N, N, optimize=True)
    div_r = N[None, :, :] + R[:, :, None] * grads[:, :, :, 0]
    Br_loc = -np.einsum("tq,qm,tqb->tmb", W, P1, div_r, optimize=True)
    Bz_loc = -np.einsum("tq,qm,tqb->tmb", WR, P1, grads[:, :, :, 1], optimize=True)
    D0_loc = np.einsum("tq,qm,qb->tmb", W, P1, N, optimize=True)
    Mp_loc = np.einsum("tq,qm,qn->tmn", WR, P1, P1, optimize=True)

    dm = space.dof_map
    tris = space.mesh.triangles
    nvel, np_ = space.n_vel, space.n_p
    rows66 = np.repeat(dm[:, :, None], 6, axis=2)
    cols66 = np.repeat(dm[:, None, :], 6, axis=1)
    K = _scatter(nvel, nvel, rows66, cols66, K_loc)
    M1 = _scatter(nvel, nvel, rows66, cols66, M1_loc)
    Mm1 = _scatter(nvel, nvel, rows66, cols66, Mm1_loc)
    rows36 = np.repeat(tris[:, :, None], 6, axis=2)
    cols36 = np.repeat(dm[:, None, :], 3, axis=1)
    Br = _scatter(np_, nvel, rows36, cols36, Br_loc)
    Bz = _scatter(np_, nvel, rows36, cols36, Bz_loc)
    D0 = _scatter(np_, nvel, rows36, cols36, D0_loc)
    rows33 = np.repeat(tris[:, :, None], 3, axis=2)
    cols33 = np.repeat(tris[:, None, :], 3, axis=1)
    Mp = _scatter(np_, np_, rows33, cols33, Mp_loc)
    m = np.asarray(Mp @ np.ones(np_))
    return ModeOperators(K=K, M1=M1, Mm1=Mm1, D0=D0, Br=Br, Bz=Bz, Mp=Mp, m=m)


def mode_matrices(space: FemSpace, k: int, rule: QuadratureRule = None):
    """Full (unconstrained) saddle blocks A (3n x 3n) and B (np x 3n)."""
    ops = space.operators(rule)
    K, Mm1 = ops.K, ops.Mm1
    if k == 0:
        A_rr = (K + Mm1).astype(complex)
        A_zz = K.astype(complex)
        A_rt = None
        A_tr = None
    else:
        A_rr = (K + (1 + k * k) * Mm1).astype(complex)
        A_zz = (K + (k * k) * Mm1).astype(complex)
        A_rt = (2j * k) * Mm1
        A_tr = (-2j * k) * Mm1
    A = sp.bmat(
        [[A_rr, A_rt, None], [A_tr, A_rr, None], [None, None, A_zz]], format="csr"
    )
    Bt = (-1j * k) * ops.D0 if k != 0 else sp.csr_matrix(ops.D0.shape, dtype=complex)
    B = sp.bmat([[ops.Br.astype(complex), Bt, ops.Bz.astype(complex)]], format="csr")
    return A, B


@dataclass
class ModeConstraints:
    """Essential conditions of one mode as a linear change of unknowns.

    ``C`` maps the free vector to the full component-major velocity vector
    and ``fix`` carries the pinned values, so u_full = C u_free + fix.
    """

    k: int
    C: sp.csr_matrix
    fix: np.ndarray
    free_dofs: list
    n_fixed: int
    n_slaved: int

    @property
    def n_free(self) -> int:
        return self.C.shape[1]


def _axis_violation(k: int, gr, gt, gz) -> float:
    if k == 0:
        return max(abs(gr), abs(gt))
    if abs(k) == 1:
        return max(abs(gz), abs(gr + 1j * k * gt))
    return max(abs(gr), abs(gt), abs(gz))


def mode_constraints(
    space: FemSpace, k: int, g=None, *, corner_tol: float = 1e-10
) -> ModeConstraints:
    """Dirichlet and axis conditions for wavenumber k.

    ``g`` is the wall velocity data (vector mode function or component
    triple); omitted means homogeneous.  Wall values are interpolated at
    wall degrees of freedom.  At wall/axis corners the wall data wins; a
    warning reports data that violates the axis conditions of this mode
    beyond ``corner_tol``.
    """
    n = space.n_vel
    state = np.zeros((3, n), dtype=np.int8)
    fix = np.zeros(3 * n, dtype=complex)

    wall = np.fromiter(space.wall_dofs, dtype=np.int64) if space.wall_dofs else np.empty(0, np.int64)
    if wall.size:
        state[:, wall] = _FIXED
        if g is not None:
            comps = g.components if isinstance(g, VectorModeFn) else tuple(g)
            coords = space.dof_coords[wall]
            for c, comp in enumerate(comps):
                fn = as_mode_function(comp)
                vals = np.asarray(fn.value(coords[:, 0], coords[:, 1]), dtype=complex)
                fix[c * n + wall] = np.broadcast_to(vals, wall.shape)

    axis_only = sorted(space.axis_dofs - space.wall_dofs)
    n_slaved = 0
    for d in axis_only:
        if k == 0:
            state[COMP_R, d] = _FIXED
            state[COMP_T, d] = _FIXED
        elif abs(k) == 1:
            state[COMP_Z, d] = _FIXED
            state[COMP_R, d] = _SLAVE
            n_slaved += 1
        else:
            state[:, d] = _FIXED

    if g is not None and space.corner_dofs:
        for d in sorted(space.corner_dofs):
            gr, gt, gz = fix[d], fix[n + d], fix[2 * n + d]
            bad = _axis_violation(k, gr, gt, gz)
            if bad > corner_tol:
                r0, z0 = space.dof_coords[d]
                warnings.warn(
                    f"wall data at corner node ({r0:.3g}, {z0:.3g}) violates the "
                    f"axis conditions of mode {k} by {bad:.3e}; wall values kept",
                    stacklevel=2,
                )

    rows, cols, vals = [], [], []
    free_dofs = []
    for c in range(3):
        for d in range(n):
            if state[c, d] == _FREE:
                col = len(free_dofs)
                free_dofs.append((c, d))
                rows.append(c * n + d)
                cols.append(col)
                vals.append(1.0 + 0.0j)
    if abs(k) == 1:
        master_col = {cd: i for i, cd in enumerate(free_dofs)}
        for d in axis_only:
            if state[COMP_R, d] == _SLAVE:
                col = master_col[(COMP_T, d)]
                rows.append(COMP_R * n + d)
                cols.append(col)
                vals.append(-1j * k)
    C = sp.csr_matrix(
        (np.asarray(vals), (np.asarray(rows), np.asarray(cols))),
        shape=(3 * n, len(free_dofs)),
        dtype=complex,
    )
    n_fixed = int(np.count_nonzero(state == _FIXED))
    return ModeConstraints(
        k=k, C=C, fix=fix, free_dofs=free_dofs, n_fixed=n_fixed, n_slaved=n_slaved
    )


def assemble_rhs(space: FemSpace, f=None, rule: QuadratureRule = None) -> np.ndarray:
    """Load vector of the momentum equations, component-major, length 3n."""
    n = space.n_vel
    F = np.zeros(3 * n, dtype=complex)
    if f is None:
        return F
    rule = rule or triangle_rule(DEFAULT_ASSEMBLY_DEGREE)
    N, _, R, Z, W = space.tabulation(rule)
    comps = f.components if isinstance(f, VectorModeFn) else tuple(f)
    for c, comp in enumerate(comps):
        fn = as_mode_function(comp)
        vals = np.asarray(fn.value(R, Z), dtype=complex)
        vals = np.broadcast_to(vals, R.shape)
        loc = np.einsum("tq,qb->tb", W * R * vals, N)
        np.add.at(F[c * n : (c + 1) * n], space.dof_map.ravel(), loc.ravel())
    return F


def assemble_divergence_rhs(space: FemSpace, g_div, rule: QuadratureRule = None):
    """Continuity right side G_m = -(g_div, psi_m) weighted by r."""
    G = np.zeros(space.n_p, dtype=complex)
    if g_div is None:
        return G
    rule = rule or triangle_rule(DEFAULT_ASSEMBLY_DEGREE)
    _, _, R, Z, W = space.tabulation(rule)
    fn = as_mode_function(g_div)
    vals = np.broadcast_to(np.asarray(fn.value(R, Z), dtype=complex), R.shape)
    loc = -np.einsum("tq,qm->tm", W * R * vals, rule.points)
    np.add.at(G, space.mesh.triangles.ravel(), loc.ravel())
    return G


@dataclass
class SaddleSystem:
    """One mode's constrained saddle problem, ready for right sides.

    Holds the full and reduced operators; ``rhs`` folds data and pinned
    values into the free unknowns.  The reduced velocity block ``A_hat``
    is Hermitian positive definite, ``B_hat`` has full rank except for the
    axisymmetric constant pressure, represented by ``m_free``.
    """

    space: FemSpace
    k: int
    rule: QuadratureRule
    constraints: ModeConstraints
    A_full: sp.csr_matrix
    B_full: sp.csr_matrix
    A_hat: sp.csr_matrix
    B_hat: sp.csr_matrix
    Mp: sp.csr_matrix
    m_vec: np.ndarray
    _a_factor: object = field(default=None, repr=False)

    @property
    def n_free(self) -> int:
        return self.A_hat.shape[0]

    @property
    def n_p(self) -> int:
        return self.B_hat.shape[0]

    def rhs(self, f=None, g_div=None, *, compat_tol: float = 1e-10):
        """Reduced right sides (F_hat, G_hat) for body force and divergence data.

        For the axisymmetric mode a net volume defect between the wall data
        and the divergence data makes the continuity block inconsistent;
        it is reported as a warning and left in place.
        """
        F = assemble_rhs(self.space, f, self.rule)
        G = assemble_divergence_rhs(self.space, g_div, self.rule)
        fix = self.constraints.fix
        F_hat = self.constraints.C.conj().T @ (F - self.A_full @ fix)
        G_hat = G - self.B_full @ fix
        if self.k == 0:
            defect = complex(np.sum(G_hat))
            scale = max(1.0, float(np.abs(fix).max(initial=0.0)))
            if abs(defect) > compat_tol * scale:
                warnings.warn(
                    f"axisymmetric data carries net volume flux {defect:.3e}; "
                    "the mean-free pressure solve will balance it",
                    stacklevel=2,
                )
        return F_hat, G_hat

    def recover(self, u_free: np.ndarray) -> np.ndarray:
        """Full component-major velocity vector from free unknowns."""
        full = self.constraints.C @ u_free + self.constraints.fix
        return full.reshape(3, self.space.n_vel)

    def a_solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._a_factor is None:
            self._a_factor = spla.splu(self.A_hat.tocsc())
        return self._a_factor.solve(rhs)

    def energy_norm(self, u_free: np.ndarray) -> float:
        return float(np.sqrt(max(np.vdot(u_free, self.A_hat @ u_free).real, 0.0)))

    def dual_norm(self, f) -> float:
        """Norm of a velocity functional in the dual of the constrained space.

        ``f`` is either mode-function data or an already reduced vector.
        """
        if isinstance(f, np.ndarray) and f.shape == (self.n_free,):
            F_hat = f
        else:
            F = assemble_rhs(self.space, f, self.rule)
            F_hat = self.constraints.C.conj().T @ F
        w = self.a_solve(F_hat)
        return float(np.sqrt(max(np.vdot(F_hat, w).real, 0.0)))


def assemble(
    space: FemSpace, k: int, g=None, rule: QuadratureRule = None
) -> SaddleSystem:
    """Build the constrained saddle system of mode k with wall data g."""
    rule = rule or triangle_rule(DEFAULT_ASSEMBLY_DEGREE)
    A, B = mode_matrices(space, k, rule)
    cons = mode_constraints(space, k, g)
    C = cons.C
    A_hat = (C.conj().T @ A @ C).tocsr()
    B_hat = (B @ C).tocsr()
    ops = space.operators(rule)
    return SaddleSystem(
        space=space,
        k=k,
        rule=rule,
        constraints=cons,
        A_full=A,
        B_full=B,
        A_hat=A_hat,
        B_hat=B_hat,
        Mp=ops.Mp,
        m_vec=ops.m.copy(),
    )


class FemScalarField:
    """One scalar coefficient field over a FemSpace, P2 or P1.

    Implements the sampling protocol the norm engine consumes, plus point
    evaluation anywhere in the domain.
    """

    def __init__(self, space: FemSpace, dofs: np.ndarray, kind: str = "p2"):
        if kind not in ("p2", "p1"):
            raise ValueError("kind must be 'p2' or 'p1'")
        expected = space.n_vel if kind == "p2" else space.n_p
        dofs = np.asarray(dofs, dtype=complex)
        if dofs.shape != (expected,):
            raise ValueError(f"expected {expected} coefficients, got {dofs.shape}")
        self.space = space
        self.dofs = dofs
        self.kind = kind

    def sample_on(self, mesh: MeridianMesh, rule: QuadratureRule, need_grad=True):
        if mesh.mesh_id != self.space.mesh.mesh_id:
            raise ValueError("field sampled on a mesh it does not live on")
        N, grads, R, Z, W = self.space.tabulation(rule)
        if self.kind == "p2":
            loc = self.dofs[self.space.dof_map]
            val = np.einsum("qb,tb->tq", N, loc)
            if not need_grad:
                return val, None, None
            dr = np.einsum("tqb,tb->tq", grads[:, :, :, 0], loc)
            dz = np.einsum("tqb,tb->tq", grads[:, :, :, 1], loc)
            return val, dr, dz
        loc = self.dofs[self.space.mesh.triangles]
        val = np.einsum("qb,tb->tq", rule.points, loc)
        if not need_grad:
            return val, None, None
        gl = self.space.grad_lambda
        dr = np.einsum("tb,tb->t", gl[:, :, 0], loc)
        dz = np.einsum("tb,tb->t", gl[:, :, 1], loc)
        nq = rule.points.shape[0]
        return val, np.repeat(dr[:, None], nq, 1), np.repeat(dz[:, None], nq, 1)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        tri, bary = locate_points(self.space.mesh, points)
        if self.kind == "p2":
            N = _p2_values(bary)
            loc = self.dofs[self.space.dof_map[tri]]
        else:
            N = bary
            loc = self.dofs[self.space.mesh.triangles[tri]]
        return np.einsum("pb,pb->p", N, loc)


@dataclass
class ModeSolution:
    """Velocity and pressure coefficients of one solved mode."""

    k: int
    space: FemSpace
    u: np.ndarray
    p: np.ndarray
    report: object = None

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=complex).reshape(3, self.space.n_vel)
        self.p = np.asarray(self.p, dtype=complex).reshape(self.space.n_p)

    def velocity_fields(self):
        return tuple(FemScalarField(self.space, self.u[c]) for c in range(3))

    def pressure_field(self) -> FemScalarField:
        return FemScalarField(self.space, self.p, kind="p1")

    def evaluate(self, points: np.ndarray):
        """Velocity (3, npts) and pressure (npts,) at meridian points."""
        fields = self.velocity_fields()
        u = np.stack([f(points) for f in fields])
        return u, self.pressure_field()(points)


def boundary_flux(space: FemSpace, u, rule_degree: int = 7) -> complex:
    """Net outward volume flux of the meridian velocity through the boundary.

    Integrates (u_r n_r + u_z n_z) r along every boundary edge with the
    outward normal derived from the adjacent triangle's orientation.  Axis
    edges contribute nothing because of the r weight.
    """
    u = np.asarray(u, dtype=complex).reshape(3, space.n_vel)
    mesh = space.mesh
    # Boundary edges in traversal order of their (counterclockwise) triangle.
    seen = {}
    for t, tri in enumerate(mesh.triangles):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            if key in seen:
                seen.pop(key)
            else:
                seen[key] = (int(a), int(b))
    erule = edge_rule(rule_degree)
    t = erule.points
    shape = np.stack([(1 - t) * (1 - 2 * t), t * (2 * t - 1), 4 * t * (1 - t)], axis=1)
    total = 0.0 + 0.0j
    nv = mesh.n_vertices
    for a, b in seen.values():
        pa, pb = mesh.vertices[a], mesh.vertices[b]
        dvec = pb - pa
        length = float(np.hypot(dvec[0], dvec[1]))
        normal = np.array([dvec[1], -dvec[0]]) / length
        mid = nv + space.edge_ids[(min(a, b), max(a, b))]
        ur = shape @ np.array([u[COMP_R, a], u[COMP_R, b], u[COMP_R, mid]])
        uz = shape @ np.array([u[COMP_Z, a], u[COMP_Z, b], u[COMP_Z, mid]])
        rline = (1 - t) * pa[0] + t * pb[0]
        total += length * np.sum(
            erule.weights * (ur * normal[0] + uz * normal[1]) * rline
        )
    return complex(total)


_COO_TAG = "axistokes-coo v1"


def export_matrix_coo(matrix, path) -> None:
    """Write a sparse matrix as plain text coordinate triples."""
    mat = sp.coo_matrix(matrix)
    lines = [f"{_COO_TAG} {mat.shape[0]} {mat.shape[1]} {mat.nnz}"]
    for i, j, v in zip(mat.row, mat.col, mat.data):
        v = complex(v)
        lines.append(f"{i} {j} {v.real!r} {v.imag!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix_coo(path) -> sp.csr_matrix:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    head = lines[0].split()
    if " ".join(head[:2]) != _COO_TAG or len(head) != 5:
        raise ValueError(f"{path}: expected header '{_COO_TAG} nrows ncols nnz'")
    nrows, ncols, nnz = (int(tok) for tok in head[2:])
    if len(lines) - 1 != nnz:
        raise ValueError(f"{path}: expected {nnz} entries, found {len(lines) - 1}")
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    data = np.empty(nnz, dtype=complex)
    for idx, line in enumerate(lines[1:]):
        toks = line.split()
        if len(toks) != 4:
            raise ValueError(f"{path}: malformed entry on line {idx + 2}")
        rows[idx], cols[idx] = int(toks[0]), int(toks[1])
        data[idx] = complex(float(toks[2]), float(toks[3]))
    return sp.coo_matrix((data, (rows, cols)), shape=(nrows, ncols)).tocsr()
