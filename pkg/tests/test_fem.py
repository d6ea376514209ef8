"""Assembly, constraints, and the linear solver against dense oracles."""

import math

import numpy as np
import pytest
import scipy.sparse as sparse

import helpers
from slfem.constitutive import MaterialModel, SymTensor2
from slfem.fem import (
    DofMap,
    LinearizedSystem,
    LoadSpec,
    QuadratureRule,
    apply_constraints,
    assemble,
    constraints_from_nodes,
    mass_matrix,
    mode1_constraints,
    shape_eval,
    solve_spd,
    strain_at,
)
from slfem.mesh import BoundaryTag, MeshSpec, generate_mesh

SMALL = MaterialModel(mu=1.0, lambda_lame=1.0, gamma=0.5, beta=1.0, alpha=1.0)


def small_mesh(nx=2, ny=2, grading=1.0):
    # tip must sit on a node line: lx chosen so nx * tip_x / lx is integral
    return generate_mesh(MeshSpec(lx=2.0, ly=1.0, nx=nx, ny=ny,
                                  crack_tip=(2.0 / nx, 0.0), grading=grading))


class TestDofMap:
    def test_layout(self):
        dm = DofMap(num_nodes=5)
        assert dm.num_dofs == 10
        assert dm.dof(3, 0) == 6 and dm.dof(3, 1) == 7
        with pytest.raises(ValueError):
            dm.dof(5, 0)
        with pytest.raises(ValueError):
            dm.dof(0, 2)

    def test_element_dofs(self):
        dm = DofMap(num_nodes=6)
        elements = np.array([[0, 1, 4, 3]])
        expected = [0, 1, 2, 3, 8, 9, 6, 7]
        assert dm.element_dofs(elements)[0].tolist() == expected


class TestShapeFunctions:
    def test_partition_of_unity(self):
        rng = np.random.default_rng(420)
        for _ in range(20):
            xi, eta = rng.uniform(-1, 1, size=2)
            n, dn = shape_eval(xi, eta)
            assert n.sum() == pytest.approx(1.0, abs=1e-15)
            np.testing.assert_allclose(dn.sum(axis=0), [0.0, 0.0], atol=1e-15)

    def test_kronecker_at_corners(self):
        corners = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
        for a, (xi, eta) in enumerate(corners):
            n, _ = shape_eval(xi, eta)
            expected = np.zeros(4)
            expected[a] = 1.0
            np.testing.assert_allclose(n, expected, atol=0)

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(421)
        h = 1e-6
        for _ in range(10):
            xi, eta = rng.uniform(-0.9, 0.9, size=2)
            _, dn = shape_eval(xi, eta)
            fd_xi = (shape_eval(xi + h, eta)[0] - shape_eval(xi - h, eta)[0]) / (2 * h)
            fd_eta = (shape_eval(xi, eta + h)[0] - shape_eval(xi, eta - h)[0]) / (2 * h)
            np.testing.assert_allclose(dn[:, 0], fd_xi, atol=1e-9)
            np.testing.assert_allclose(dn[:, 1], fd_eta, atol=1e-9)

    def test_agrees_with_tensor_product_oracle(self):
        rng = np.random.default_rng(422)
        for _ in range(10):
            xi, eta = rng.uniform(-1, 1, size=2)
            n, dn = shape_eval(xi, eta)
            vals, grads = helpers.q1_shapes(xi, eta)
            np.testing.assert_allclose(n, vals, atol=1e-15)
            np.testing.assert_allclose(dn, grads, atol=1e-15)

    def test_quadrature_rule(self):
        quad = QuadratureRule.gauss_2x2()
        assert quad.weights.sum() == pytest.approx(4.0)   # area of [-1,1]^2
        # 2x2 Gauss integrates cubics exactly: int xi^2 = 4/3 over the square
        total = sum(w * xi * xi for (xi, _), w in zip(quad.points, quad.weights))
        assert total == pytest.approx(4.0 / 3.0, rel=1e-15)


class TestAssembly:
    def test_linear_matches_dense_oracle(self):
        mesh = small_mesh(2, 2, grading=1.3)
        model = MaterialModel(mu=1.0, lambda_lame=1.0, gamma=0.5, beta=0.0, fiber_angle=0.4)
        system = assemble(mesh, model, None, LoadSpec())
        dense = helpers.dense_assemble(mesh, model)
        np.testing.assert_allclose(system.matrix.toarray(), dense, atol=1e-14)

    def test_frozen_coefficient_matches_dense_oracle(self):
        mesh = small_mesh(3, 3, grading=1.2)
        rng = np.random.default_rng(423)
        u_prev = 1e-3 * rng.normal(size=2 * mesh.num_nodes)   # safely admissible
        system = assemble(mesh, SMALL, u_prev, LoadSpec())
        dense = helpers.dense_assemble(mesh, SMALL, u_prev)
        np.testing.assert_allclose(system.matrix.toarray(), dense, atol=1e-14)

    def test_matrix_symmetric(self):
        mesh = small_mesh(3, 3, grading=1.2)
        system = assemble(mesh, SMALL, None, LoadSpec())
        diff = (system.matrix - system.matrix.T).toarray()
        assert np.max(np.abs(diff)) < 1e-14

    def test_rigid_motions_in_null_space(self):
        mesh = small_mesh(3, 3, grading=1.1)
        system = assemble(mesh, SMALL, None, LoadSpec())
        n = mesh.num_nodes
        tx = np.zeros(2 * n)
        tx[0::2] = 1.0
        ty = np.zeros(2 * n)
        ty[1::2] = 1.0
        rot = np.zeros(2 * n)
        rot[0::2] = -mesh.nodes[:, 1]
        rot[1::2] = mesh.nodes[:, 0]
        for v in (tx, ty, rot):
            assert np.linalg.norm(system.matrix @ v) < 1e-13 * np.linalg.norm(v)

    def test_clamp_counting(self):
        mesh = small_mesh(2, 2)
        huge = np.ones(2 * mesh.num_nodes)        # strains far outside the ball
        huge[1::2] = np.repeat(mesh.nodes[:, 1], 1) * 5.0
        system = assemble(mesh, SMALL, huge, LoadSpec(), clamp_delta=1e-8)
        assert system.clamped_points > 0
        with pytest.raises(Exception):
            assemble(mesh, SMALL, huge, LoadSpec(), clamp_delta=None)

    def test_rejects_wrong_shape_iterate(self):
        mesh = small_mesh(2, 2)
        with pytest.raises(ValueError):
            assemble(mesh, SMALL, np.zeros(3), LoadSpec())


class TestLoadVector:
    def test_top_traction_totals(self):
        mesh = generate_mesh(MeshSpec(nx=8, ny=4, grading=1.2))
        system = assemble(mesh, SMALL, None, LoadSpec(sigma_top=0.3))
        rhs = system.rhs
        # total vertical force = sigma * lx, no horizontal load
        assert rhs[1::2].sum() == pytest.approx(0.3 * 2.0, rel=1e-14)
        assert np.all(rhs[0::2] == 0.0)
        top = mesh.nodes_with_tag(BoundaryTag.TOP)
        loaded = np.where(rhs[1::2] != 0.0)[0]
        assert set(loaded) == set(top.tolist())

    def test_constant_body_force_totals(self):
        mesh = generate_mesh(MeshSpec(nx=8, ny=4, grading=1.15))
        system = assemble(mesh, SMALL, None, LoadSpec(body_force=(0.7, -1.1)))
        area = 2.0 * 1.0
        assert system.rhs[0::2].sum() == pytest.approx(0.7 * area, rel=1e-13)
        assert system.rhs[1::2].sum() == pytest.approx(-1.1 * area, rel=1e-13)

    def test_callable_body_force_matches_quadrature(self):
        mesh = small_mesh(2, 2, grading=1.2)

        def force(points):
            return np.column_stack([points[:, 0] ** 2, points[:, 0] * points[:, 1]])

        system = assemble(mesh, SMALL, None, LoadSpec(body_force=force))
        # independent quadrature: loop elements, 2x2 Gauss via oracle shapes
        expected = np.zeros(2 * mesh.num_nodes)
        g = 1.0 / math.sqrt(3.0)
        for e in range(mesh.num_elements):
            conn = mesh.elements[e]
            coords = mesh.nodes[conn]
            for xi in (-g, g):
                for eta in (-g, g):
                    vals, grads = helpers.q1_shapes(xi, eta)
                    jac = np.zeros((2, 2))
                    for a in range(4):
                        jac += np.outer(grads[a], coords[a])
                    det = np.linalg.det(jac)
                    x, y = np.array(vals) @ coords
                    f = (x * x, x * y)
                    for a in range(4):
                        for c in range(2):
                            expected[2 * conn[a] + c] += vals[a] * f[c] * det
        np.testing.assert_allclose(system.rhs, expected, atol=1e-14)

    def test_rejects_bad_constant(self):
        mesh = small_mesh(2, 2)
        with pytest.raises(ValueError):
            assemble(mesh, SMALL, None, LoadSpec(body_force=(1.0, 2.0, 3.0)))


class TestConstraints:
    def test_elimination_matches_reduced_dense_solve(self):
        mesh = small_mesh(3, 3, grading=1.15)
        system = assemble(mesh, SMALL, None, LoadSpec(sigma_top=0.1))
        bcs = mode1_constraints(mesh)
        fixed = apply_constraints(system, bcs)
        u = solve_spd(fixed, rel_tol=1e-14)

        # oracle: dense solve of the reduced block
        k = helpers.dense_assemble(mesh, SMALL)
        n = 2 * mesh.num_nodes
        cons = sorted(dof for dof, _ in bcs)
        free = [d for d in range(n) if d not in cons]
        u_free = np.linalg.solve(k[np.ix_(free, free)], system.rhs[free])
        expected = np.zeros(n)
        expected[free] = u_free
        np.testing.assert_allclose(u, expected, atol=1e-12)

    def test_nonzero_values_enforced_exactly(self):
        mesh = small_mesh(2, 2)
        system = assemble(mesh, SMALL, None, LoadSpec())
        bcs = [(0, 0.25), (1, -0.5), (7, 0.125)]
        fixed = apply_constraints(system, bcs)
        u = solve_spd(fixed, rel_tol=1e-13)
        assert u[0] == 0.25 and u[1] == -0.5 and u[7] == 0.125

    def test_constrained_matrix_spd(self):
        mesh = small_mesh(3, 3, grading=1.2)
        system = assemble(mesh, SMALL, None, LoadSpec(sigma_top=0.1))
        fixed = apply_constraints(system, mode1_constraints(mesh))
        eigs = np.linalg.eigvalsh(fixed.matrix.toarray())
        assert eigs.min() > 0.0

    def test_duplicate_consistent_allowed(self):
        mesh = small_mesh(2, 2)
        system = assemble(mesh, SMALL, None, LoadSpec())
        fixed = apply_constraints(system, [(0, 0.0), (0, 0.0), (3, 1.0)])
        assert (0, 0.0) in fixed.constraints and (3, 1.0) in fixed.constraints

    def test_conflicting_values_rejected(self):
        mesh = small_mesh(2, 2)
        system = assemble(mesh, SMALL, None, LoadSpec())
        with pytest.raises(ValueError, match="dof 0"):
            apply_constraints(system, [(0, 0.0), (0, 1.0)])

    def test_out_of_range_rejected(self):
        mesh = small_mesh(2, 2)
        system = assemble(mesh, SMALL, None, LoadSpec())
        with pytest.raises(ValueError, match="out of range"):
            apply_constraints(system, [(10_000, 0.0)])

    def test_empty_bcs_incompatible_load_rejected(self):
        mesh = small_mesh(2, 2)
        system = assemble(mesh, SMALL, None, LoadSpec(sigma_top=0.1))
        with pytest.raises(ValueError, match="net force"):
            apply_constraints(system, [])

    def test_mode1_set(self):
        mesh = generate_mesh(MeshSpec(nx=8, ny=4))
        bcs = dict(mode1_constraints(mesh))
        left = mesh.nodes_with_tag(BoundaryTag.LEFT)
        ligament = mesh.nodes_with_tag(BoundaryTag.LIGAMENT)
        assert len(bcs) == len(left) + len(ligament)
        for n in left:
            assert bcs[2 * n] == 0.0
        for n in ligament:
            assert bcs[2 * n + 1] == 0.0
        # crack face nodes left free: mouth corner node (0, 0) only fixes u1
        mouth = int(np.where((mesh.nodes[:, 0] == 0.0) & (mesh.nodes[:, 1] == 0.0))[0][0])
        assert 2 * mouth in bcs and (2 * mouth + 1) not in bcs


class TestSolveSpd:
    def test_matches_dense_solve(self):
        rng = np.random.default_rng(424)
        n = 60
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        a = q @ np.diag(rng.uniform(0.5, 50.0, size=n)) @ q.T
        a = 0.5 * (a + a.T)
        b = rng.normal(size=n)
        system = LinearizedSystem(matrix=sparse.csr_matrix(a), rhs=b)
        x = solve_spd(system, rel_tol=1e-13)
        np.testing.assert_allclose(x, np.linalg.solve(a, b), rtol=1e-9, atol=1e-11)

    def test_zero_rhs_returns_zero(self):
        a = sparse.eye(4, format="csr")
        x = solve_spd(LinearizedSystem(matrix=a, rhs=np.zeros(4)))
        assert np.all(x == 0.0)

    def test_rejects_nonpositive_diagonal(self):
        a = sparse.diags([1.0, -2.0, 3.0]).tocsr()
        with pytest.raises(ValueError, match="diagonal"):
            solve_spd(LinearizedSystem(matrix=a, rhs=np.ones(3)))

    def test_detects_indefiniteness(self):
        # positive diagonal but not SPD; rhs must excite the negative eigenspace
        a = sparse.csr_matrix(np.array([[1.0, 4.0], [4.0, 1.0]]))
        with pytest.raises(ValueError, match="curvature"):
            solve_spd(LinearizedSystem(matrix=a, rhs=np.array([1.0, 0.0])))

    def test_iteration_cap_raises(self):
        rng = np.random.default_rng(425)
        n = 50
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        a = q @ np.diag(np.geomspace(1e-6, 1.0, n)) @ q.T
        a = 0.5 * (a + a.T) + 1e-7 * np.eye(n)
        system = LinearizedSystem(matrix=sparse.csr_matrix(a), rhs=rng.normal(size=n))
        with pytest.raises(RuntimeError, match="relative residual"):
            solve_spd(system, rel_tol=1e-14, max_iter=3)


class TestStrainAt:
    def test_linear_field_reproduced_exactly(self):
        mesh = generate_mesh(MeshSpec(nx=8, ny=4, grading=1.3))
        grad = np.array([[0.002, -0.001], [0.0005, 0.003]])
        u = np.zeros(2 * mesh.num_nodes)
        u[0::2] = mesh.nodes @ grad[0]
        u[1::2] = mesh.nodes @ grad[1]
        expected = 0.5 * (grad + grad.T)
        rng = np.random.default_rng(426)
        for _ in range(20):
            p = (rng.uniform(0, 2), rng.uniform(0, 1))
            e, ref = mesh.locate(p)
            eps = strain_at(e, ref, u, mesh)
            np.testing.assert_allclose(eps.to_matrix(), expected, atol=1e-15)

    def test_matches_loop_oracle(self):
        mesh = small_mesh(3, 3, grading=1.2)
        rng = np.random.default_rng(427)
        u = rng.normal(size=2 * mesh.num_nodes)
        for e in (0, 4, 8):
            xi, eta = rng.uniform(-1, 1, size=2)
            eps = strain_at(e, (xi, eta), u, mesh)
            oracle = helpers.strain_matrix_at(mesh, e, xi, eta, u)
            np.testing.assert_allclose(eps.to_matrix(), oracle, atol=1e-13)

    def test_element_range_checked(self):
        mesh = small_mesh(2, 2)
        with pytest.raises(ValueError):
            strain_at(99, (0.0, 0.0), np.zeros(2 * mesh.num_nodes), mesh)


class TestMassMatrix:
    def test_matches_dense_oracle(self):
        mesh = small_mesh(2, 2, grading=1.25)
        m = mass_matrix(mesh).toarray()
        np.testing.assert_allclose(m, helpers.dense_mass(mesh), atol=1e-14)

    def test_total_mass(self):
        mesh = generate_mesh(MeshSpec(nx=8, ny=4, grading=1.1))
        m = mass_matrix(mesh)
        ones = np.ones(2 * mesh.num_nodes)
        # integral of 1 over the domain, once per component
        assert ones @ (m @ ones) == pytest.approx(2.0 * 2.0, rel=1e-13)


def test_constraints_from_nodes():
    out = constraints_from_nodes([2, 5], 1, value=0.25)
    assert out == [(5, 0.25), (11, 0.25)]
