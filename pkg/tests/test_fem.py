"""Taylor-Hood assembly: operators, constraints, right sides, and fields."""

import numpy as np
import pytest
import scipy.sparse as sp

from axistokes.fem import (
    COMP_R,
    COMP_T,
    COMP_Z,
    FemScalarField,
    FemSpace,
    ModeSolution,
    assemble,
    assemble_divergence_rhs,
    assemble_rhs,
    boundary_flux,
    export_matrix_coo,
    mode_constraints,
    mode_matrices,
    read_matrix_coo,
)
from axistokes.fields import Poly2
from axistokes.meshing import generate_structured
from axistokes.norms import mode_energy_product
from axistokes.quadrature import triangle_rule

ONE = Poly2({(0, 0): 1.0})
R = Poly2({(1, 0): 1.0})
Z = Poly2({(0, 1): 1.0})
ZERO = 0.0 * ONE


@pytest.fixture(scope="module")
def space():
    return FemSpace(generate_structured((1.0, 1.0), 0.5))


def test_space_counts(space):
    # 3 x 3 vertex grid, 8 triangles, 16 distinct edges.
    assert space.n_p == 9
    assert space.n_vel == 9 + 16
    assert len(space.corner_dofs) == 2
    # Axis side contributes two edges: three vertices plus two midpoints.
    assert len(space.axis_dofs) == 5
    assert len(space.axis_dofs - space.wall_dofs) == 3


@pytest.mark.parametrize("k,axis_fixed,slaved", [(0, 2, 0), (1, 1, 1), (-1, 1, 1), (2, 3, 0), (5, 3, 0)])
def test_constraint_counts(space, k, axis_fixed, slaved):
    cons = mode_constraints(space, k)
    n_wall = len(space.wall_dofs)
    n_axis_only = len(space.axis_dofs - space.wall_dofs)
    assert cons.n_fixed == 3 * n_wall + axis_fixed * n_axis_only
    assert cons.n_slaved == slaved * n_axis_only
    assert cons.n_free == 3 * space.n_vel - cons.n_fixed - cons.n_slaved


@pytest.mark.parametrize("k", [1, -1])
def test_unit_wavenumber_axis_tie(space, k):
    # On the axis the radial component is slaved as u_r = -i k u_theta.
    cons = mode_constraints(space, k)
    C = cons.C.toarray()
    n = space.n_vel
    master = {cd: i for i, cd in enumerate(cons.free_dofs)}
    for d in sorted(space.axis_dofs - space.wall_dofs):
        col = master[(COMP_T, d)]
        assert C[COMP_R * n + d, col] == -1j * k
        assert (COMP_R, d) not in master


def test_wall_values_enter_fix(space):
    # The angular data z is nonzero at the (0, 1) corner, which mode 2
    # reports; the warning is incidental to what this test checks.
    with pytest.warns(UserWarning, match="axis conditions"):
        cons = mode_constraints(space, 2, g=(R, Z, R + Z))
    n = space.n_vel
    for d in sorted(space.wall_dofs):
        r, z = space.dof_coords[d]
        assert cons.fix[COMP_R * n + d] == pytest.approx(r)
        assert cons.fix[COMP_T * n + d] == pytest.approx(z)
        assert cons.fix[COMP_Z * n + d] == pytest.approx(r + z)
    # Free part untouched.
    full = cons.C @ np.zeros(cons.n_free) + cons.fix
    for d in sorted(space.axis_dofs - space.wall_dofs):
        assert full[COMP_R * n + d] == 0.0


def test_corner_data_violating_axis_conditions_warns(space):
    with pytest.warns(UserWarning, match="axis conditions"):
        mode_constraints(space, 0, g=(ONE, ZERO, ZERO))


def test_axial_block_is_plain_stiffness_for_axisymmetric(space):
    A, _ = mode_matrices(space, 0)
    n = space.n_vel
    K = space.operators().K
    diff = A[2 * n :, 2 * n :] - K.astype(complex)
    assert diff.nnz == 0 or abs(diff).max() == 0.0
    # And the radial/angular coupling blocks are absent.
    coupling = A[:n, n : 2 * n]
    assert coupling.nnz == 0 or abs(coupling).max() == 0.0


def test_mode_matrix_conjugation(space):
    A_pos, B_pos = mode_matrices(space, 3)
    A_neg, B_neg = mode_matrices(space, -3)
    assert np.abs((A_neg - A_pos.conj()).toarray()).max() == 0.0
    assert np.abs((B_neg - B_pos.conj()).toarray()).max() == 0.0


@pytest.mark.parametrize("k", [0, 1, 2])
def test_reduced_velocity_block_hermitian_definite(space, k):
    system = assemble(space, k)
    H = system.A_hat.toarray()
    scale = np.abs(H).max()
    assert np.abs(H - H.conj().T).max() <= 1e-14 * scale
    eigs = np.linalg.eigvalsh(H)
    assert eigs.min() > 0.0


@pytest.mark.parametrize("k", [0, 1, 3])
def test_energy_matrix_matches_quadrature_product(space, k):
    # u* A u agrees with the sesquilinear energy form evaluated by the
    # norm engine on the same quadrature rule.
    rng = np.random.default_rng(17)
    rule = triangle_rule(5)
    A, _ = mode_matrices(space, k, rule)
    n = space.n_vel
    u = rng.standard_normal(3 * n) + 1j * rng.standard_normal(3 * n)
    quad = complex(np.vdot(u, A @ u))
    fields = tuple(
        FemScalarField(space, u[c * n : (c + 1) * n]) for c in range(3)
    )
    ref = mode_energy_product(space.mesh, k, fields, fields, rule)
    assert quad == pytest.approx(ref, rel=1e-12)


def test_rhs_partition_of_unity(space):
    # The quadratic basis sums to one, so the component load of a unit
    # force integrates the weight: sum F_c = int r = 1/2.
    n = space.n_vel
    for c, f in enumerate([(ONE, ZERO, ZERO), (ZERO, ONE, ZERO), (ZERO, ZERO, ONE)]):
        F = assemble_rhs(space, f)
        block = F[c * n : (c + 1) * n]
        assert np.sum(block) == pytest.approx(0.5, rel=1e-13)
        others = np.delete(F.reshape(3, n), c, axis=0)
        assert np.abs(others).max() == 0.0
    assert np.abs(assemble_rhs(space, None)).max() == 0.0


def test_divergence_rhs_sums_to_weighted_mean(space):
    G = assemble_divergence_rhs(space, ONE)
    assert np.sum(G) == pytest.approx(-0.5, rel=1e-13)
    assert np.abs(assemble_divergence_rhs(space, None)).max() == 0.0


def test_axisymmetric_wall_data_with_net_flux_warns(space):
    system = assemble(space, 0, g=(R, ZERO, ZERO))
    with pytest.warns(UserWarning, match="net volume flux"):
        system.rhs()


def test_boundary_flux_closed_forms():
    space = FemSpace(generate_structured((1.0, 1.0), 0.25))
    n = space.n_vel
    coords = space.dof_coords

    # u = (r, 0, 0): the weighted divergence is 2, so the flux is 2 int r = 1.
    u = np.zeros((3, n), dtype=complex)
    u[COMP_R] = coords[:, 0]
    assert boundary_flux(space, u) == pytest.approx(1.0, rel=1e-12)

    # Constant axial flow passes straight through: zero net flux.
    u = np.zeros((3, n), dtype=complex)
    u[COMP_Z] = 1.0
    assert boundary_flux(space, u) == pytest.approx(0.0, abs=1e-13)

    # Divergence-free quadratic field (rz, *, -z^2).
    u = np.zeros((3, n), dtype=complex)
    u[COMP_R] = coords[:, 0] * coords[:, 1]
    u[COMP_Z] = -coords[:, 1] ** 2
    assert boundary_flux(space, u) == pytest.approx(0.0, abs=1e-12)


def test_scalar_field_point_evaluation(space):
    coords = space.dof_coords
    q = lambda r, z: 1.0 + 2.0 * r - z + r**2 - 3.0 * r * z + 0.5 * z**2
    field = FemScalarField(space, q(coords[:, 0], coords[:, 1]).astype(complex))
    rng = np.random.default_rng(4)
    pts = rng.uniform(0.05, 0.95, size=(20, 2))
    np.testing.assert_allclose(field(pts), q(pts[:, 0], pts[:, 1]), rtol=1e-12)

    verts = space.mesh.vertices
    lin = lambda r, z: 2.0 - r + 3.0 * z
    p1 = FemScalarField(space, lin(verts[:, 0], verts[:, 1]).astype(complex), kind="p1")
    np.testing.assert_allclose(p1(pts), lin(pts[:, 0], pts[:, 1]), rtol=1e-12)


def test_scalar_field_validation(space):
    with pytest.raises(ValueError, match="kind"):
        FemScalarField(space, np.zeros(space.n_vel), kind="p3")
    with pytest.raises(ValueError, match="coefficients"):
        FemScalarField(space, np.zeros(space.n_vel - 1))
    other = FemSpace(generate_structured((1.0, 1.0), 0.25))
    field = FemScalarField(space, np.zeros(space.n_vel))
    with pytest.raises(ValueError, match="does not live"):
        field.sample_on(other.mesh, triangle_rule(2))


def test_mode_solution_evaluation(space):
    rng = np.random.default_rng(8)
    u = rng.standard_normal((3, space.n_vel)) + 1j * rng.standard_normal((3, space.n_vel))
    p = rng.standard_normal(space.n_p)
    sol = ModeSolution(k=1, space=space, u=u, p=p)
    pts = rng.uniform(0.1, 0.9, size=(5, 2))
    uvals, pvals = sol.evaluate(pts)
    assert uvals.shape == (3, 5)
    for c, field in enumerate(sol.velocity_fields()):
        np.testing.assert_allclose(uvals[c], field(pts), rtol=1e-14)
    np.testing.assert_allclose(pvals, sol.pressure_field()(pts), rtol=1e-14)


def test_matrix_coo_roundtrip(tmp_path):
    rng = np.random.default_rng(12)
    dense = np.zeros((10, 7), dtype=complex)
    idx = rng.integers(0, 10, size=15), rng.integers(0, 7, size=15)
    dense[idx] = rng.standard_normal(15) + 1j * rng.standard_normal(15)
    path = tmp_path / "mat.coo"
    export_matrix_coo(sp.csr_matrix(dense), path)
    back = read_matrix_coo(path)
    assert back.shape == (10, 7)
    np.testing.assert_array_equal(back.toarray(), dense)
    bad = tmp_path / "bad.coo"
    bad.write_text("not a header\n")
    with pytest.raises(ValueError, match="header"):
        read_matrix_coo(bad)
