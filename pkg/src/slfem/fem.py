"""Q1 finite elements, sparse assembly and the preconditioned CG solve.

Displacement fields live in dense vectors ordered node-major with the x
component before the y component, so node n owns dofs 2n and 2n + 1.
Element matrices are integrated with 2x2 Gauss quadrature; the nonlinear
coefficient psi is frozen at a given previous iterate, which keeps every
assembled system symmetric positive definite once constrained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

from .constitutive import (
    MaterialModel,
    SymTensor2,
    elasticity_matrix,
    energy_norm_mandel,
    psi,
    psi_clamped,
)
from .mesh import BoundaryTag, Mesh

ROOT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class DofMap:
    """Node-major dof numbering, x before y."""

    num_nodes: int

    @property
    def num_dofs(self) -> int:
        return 2 * self.num_nodes

    def dof(self, node: int, component: int) -> int:
        if component not in (0, 1):
            raise ValueError(f"component must be 0 or 1, got {component}")
        if not 0 <= node < self.num_nodes:
            raise ValueError(f"node {node} out of range")
        return 2 * node + component

    def element_dofs(self, elements: np.ndarray) -> np.ndarray:
        """(E, 8) dof indices for (E, 4) element connectivity."""
        e = np.repeat(2 * elements, 2, axis=1)
        e[:, 1::2] += 1
        return e


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor-product Gauss rule on the reference square [-1, 1]^2."""

    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def gauss_2x2(cls) -> "QuadratureRule":
        g = 1.0 / math.sqrt(3.0)
        pts = np.array([[-g, -g], [g, -g], [g, g], [-g, g]])
        return cls(points=pts, weights=np.ones(4))


def shape_eval(xi: float, eta: float):
    """Q1 shape function values (4,) and reference gradients (4, 2).

    Node order matches the element connectivity: (-1,-1), (1,-1), (1,1),
    (-1,1).
    """
    n = 0.25 * np.array([
        (1 - xi) * (1 - eta),
        (1 + xi) * (1 - eta),
        (1 + xi) * (1 + eta),
        (1 - xi) * (1 + eta),
    ])
    dn = 0.25 * np.array([
        [-(1 - eta), -(1 - xi)],
        [(1 - eta), -(1 + xi)],
        [(1 + eta), (1 + xi)],
        [-(1 + eta), (1 - xi)],
    ])
    return n, dn


@dataclass(frozen=True)
class LoadSpec:
    """Applied loads: uniform traction (0, sigma_top) on Top edges plus a body force.

    body_force is either a constant pair or a callable mapping an (N, 2)
    array of points to an (N, 2) array of force densities.
    """

    sigma_top: float = 0.0
    body_force: object = (0.0, 0.0)


@dataclass
class LinearizedSystem:
    """Sparse symmetric system K u = f in CSR form.

    constraints lists the (dof, prescribed value) pairs that have been
    eliminated; empty until apply_constraints has run.  clamped_points
    counts quadrature points whose psi argument hit the admissibility
    guard during assembly.
    """

    matrix: sparse.csr_matrix
    rhs: np.ndarray
    constraints: list = field(default_factory=list)
    clamped_points: int = 0

    @property
    def num_dofs(self) -> int:
        return self.rhs.shape[0]


class _ElementOperators:
    """Geometry-dependent factors shared by every assembly over one mesh."""

    def __init__(self, mesh: Mesh, quad: QuadratureRule):
        coords = mesh.nodes[mesh.elements]          # (E, 4, 2)
        nq = quad.points.shape[0]
        ne = mesh.num_elements
        self.quad = quad
        self.edofs = DofMap(mesh.num_nodes).element_dofs(mesh.elements)
        self.b = np.zeros((nq, ne, 3, 8))
        self.detj = np.zeros((nq, ne))
        self.shape = np.zeros((nq, 4))
        self.qpoints = np.zeros((nq, ne, 2))
        for q, (xi, eta) in enumerate(quad.points):
            n, dn = shape_eval(xi, eta)
            jac = np.einsum("ai,eaj->eij", dn, coords)         # d x_j / d xi_i
            det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
            if np.any(det <= 0.0):
                raise ValueError("element with nonpositive jacobian")
            inv = np.empty_like(jac)
            inv[:, 0, 0] = jac[:, 1, 1] / det
            inv[:, 0, 1] = -jac[:, 0, 1] / det
            inv[:, 1, 0] = -jac[:, 1, 0] / det
            inv[:, 1, 1] = jac[:, 0, 0] / det
            # dN_a/dx_j = dN_a/dxi_i * (J^-1)_ij
            dndx = np.einsum("ai,eij->eaj", dn, inv)
            b = np.zeros((ne, 3, 8))
            b[:, 0, 0::2] = dndx[:, :, 0]
            b[:, 1, 1::2] = dndx[:, :, 1]
            b[:, 2, 0::2] = dndx[:, :, 1] / ROOT2
            b[:, 2, 1::2] = dndx[:, :, 0] / ROOT2
            self.b[q] = b
            self.detj[q] = det
            self.shape[q] = n
            self.qpoints[q] = np.einsum("a,eaj->ej", n, coords)


def element_operators(mesh: Mesh, quad: QuadratureRule | None = None) -> _ElementOperators:
    quad = quad or QuadratureRule.gauss_2x2()
    key = ("ops", tuple(map(tuple, quad.points)))
    if key not in mesh._cache:
        mesh._cache[key] = _ElementOperators(mesh, quad)
    return mesh._cache[key]


def _assemble_matrix(mesh, model, u_prev, clamp_delta):
    """Stiffness in CSR with psi frozen at u_prev; returns (matrix, clamp count)."""
    ops = element_operators(mesh)
    a_e = elasticity_matrix(model)
    n_dofs = 2 * mesh.num_nodes
    if u_prev is None:
        u_prev = np.zeros(n_dofs)
    u_prev = np.asarray(u_prev, dtype=float)
    if u_prev.shape != (n_dofs,):
        raise ValueError(f"u_prev must have shape ({n_dofs},), got {u_prev.shape}")
    ue = u_prev[ops.edofs]                                      # (E, 8)

    ne = mesh.num_elements
    ke = np.zeros((ne, 8, 8))
    clamped = 0
    for q, w in enumerate(ops.quad.weights):
        bq = ops.b[q]
        if model.beta == 0.0:
            vals = np.ones(ne)
        else:
            eps = np.einsum("eij,ej->ei", bq, ue)
            s = energy_norm_mandel(eps, a_e)
            if clamp_delta is None:
                vals = psi(s, model.beta, model.alpha)
            else:
                vals, n_cl = psi_clamped(s, model.beta, model.alpha, clamp_delta)
                clamped += n_cl
        coef = w * vals * ops.detj[q]
        ke += np.einsum("eki,kl,elj,e->eij", bq, a_e, bq, coef, optimize=True)

    rows = np.repeat(ops.edofs, 8, axis=1).ravel()
    cols = np.tile(ops.edofs, (1, 8)).ravel()
    mat = sparse.coo_matrix((ke.ravel(), (rows, cols)), shape=(n_dofs, n_dofs)).tocsr()
    return mat, clamped


def _assemble_load(mesh: Mesh, load: LoadSpec) -> np.ndarray:
    """Body-force volume terms plus the (0, sigma_top) traction on Top edges."""
    ops = element_operators(mesh)
    n_dofs = 2 * mesh.num_nodes
    rhs = np.zeros(n_dofs)

    bf = load.body_force
    if callable(bf):
        for q, w in enumerate(ops.quad.weights):
            fq = np.asarray(bf(ops.qpoints[q]), dtype=float)    # (E, 2)
            coef = w * ops.detj[q]                              # (E,)
            fe = np.einsum("a,ek,e->eak", ops.shape[q], fq, coef).reshape(-1, 8)
            np.add.at(rhs, ops.edofs.ravel(), fe.ravel())
    else:
        f = np.asarray(bf, dtype=float)
        if f.shape != (2,):
            raise ValueError(f"body_force must be a pair, got shape {f.shape}")
        if np.any(f != 0.0):
            for q, w in enumerate(ops.quad.weights):
                coef = w * ops.detj[q]
                fe = np.einsum("a,k,e->eak", ops.shape[q], f, coef).reshape(-1, 8)
                np.add.at(rhs, ops.edofs.ravel(), fe.ravel())

    if load.sigma_top != 0.0:
        for (n1, n2), tag in mesh.boundary_edges:
            if tag is BoundaryTag.TOP:
                length = abs(mesh.nodes[n2, 0] - mesh.nodes[n1, 0])
                rhs[2 * n1 + 1] += 0.5 * load.sigma_top * length
                rhs[2 * n2 + 1] += 0.5 * load.sigma_top * length
    return rhs


def assemble(mesh: Mesh, model: MaterialModel, u_prev, load: LoadSpec,
             clamp_delta: float | None = None) -> LinearizedSystem:
    """Assemble the frozen-coefficient system at the iterate u_prev.

    Entry (i, j) of the matrix is the sum over elements and quadrature
    points of w * psi(s(u_prev)) * (E[eps(phi_j)] : eps(phi_i)) * |J|.
    With clamp_delta set, inadmissible quadrature states are clamped and
    counted in the returned system; with clamp_delta None they raise.
    """
    mat, clamped = _assemble_matrix(mesh, model, u_prev, clamp_delta)
    rhs = _assemble_load(mesh, load)
    return LinearizedSystem(matrix=mat, rhs=rhs, clamped_points=clamped)


def apply_constraints(system: LinearizedSystem, bcs) -> LinearizedSystem:
    """Eliminate Dirichlet dofs symmetrically, keeping the matrix SPD.

    bcs is an iterable of (dof, prescribed value).  Duplicate entries must
    agree; an empty set is only accepted when the load is compatible with
    pure Neumann data (zero net force).
    """
    n = system.num_dofs
    resolved: dict[int, float] = {}
    for dof, val in bcs:
        dof = int(dof)
        if not 0 <= dof < n:
            raise ValueError(f"constraint dof {dof} out of range for {n} dofs")
        if dof in resolved and resolved[dof] != val:
            raise ValueError(
                f"conflicting constraints on dof {dof}: {resolved[dof]} vs {val}"
            )
        resolved[dof] = float(val)

    if not resolved:
        net = np.array([system.rhs[0::2].sum(), system.rhs[1::2].sum()])
        if np.any(np.abs(net) > 1e-10 * (1.0 + np.linalg.norm(system.rhs))):
            raise ValueError(
                f"no constraints given and the load is incompatible with "
                f"pure Neumann data (net force {net})"
            )
        return LinearizedSystem(matrix=system.matrix.copy(), rhs=system.rhs.copy(),
                                constraints=[], clamped_points=system.clamped_points)

    cons_idx = np.array(sorted(resolved), dtype=int)
    cons_val = np.array([resolved[d] for d in cons_idx])

    x_bc = np.zeros(n)
    x_bc[cons_idx] = cons_val
    rhs = system.rhs - system.matrix @ x_bc
    rhs[cons_idx] = cons_val

    free = np.ones(n)
    free[cons_idx] = 0.0
    proj = sparse.diags(free)
    mat = (proj @ system.matrix @ proj + sparse.diags(1.0 - free)).tocsr()

    return LinearizedSystem(matrix=mat, rhs=rhs,
                            constraints=[(int(d), float(v)) for d, v in zip(cons_idx, cons_val)],
                            clamped_points=system.clamped_points)


def solve_spd(system: LinearizedSystem, rel_tol: float = 1e-12,
              max_iter: int | None = None) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradients on a constrained system.

    Stops when the residual norm falls below rel_tol times the rhs norm.
    Raises RuntimeError (with the final residual) if the iteration cap,
    10x the dof count by default, is exhausted, and ValueError if the
    matrix reveals itself as not positive definite.
    """
    a = system.matrix
    b = system.rhs
    n = b.shape[0]
    diag = a.diagonal()
    if np.any(diag <= 0.0):
        raise ValueError("matrix diagonal has nonpositive entries; system not SPD")
    inv_diag = 1.0 / diag

    def impose(x):
        # eliminated dofs carry identity rows; pin them to their exact values
        for dof, val in system.constraints:
            x[dof] = val
        return x

    b_norm = np.linalg.norm(b)
    x = np.zeros(n)
    if b_norm == 0.0:
        return impose(x)
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    cap = max_iter if max_iter is not None else 10 * n
    for _ in range(cap):
        ap = a @ p
        pap = float(p @ ap)
        if pap <= 0.0:
            raise ValueError("encountered nonpositive curvature; system not SPD")
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        if np.linalg.norm(r) <= rel_tol * b_norm:
            return impose(x)
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise RuntimeError(
        f"conjugate gradients did not reach rel_tol {rel_tol:g} within {cap} "
        f"iterations; final relative residual {np.linalg.norm(r) / b_norm:.3e}"
    )


def strain_at(element: int, xi_eta, u, mesh: Mesh) -> SymTensor2:
    """Strain of a nodal field at reference coordinates inside one element."""
    if not 0 <= element < mesh.num_elements:
        raise ValueError(f"element {element} out of range")
    xi, eta = xi_eta
    coords = mesh.nodes[mesh.elements[element]]
    _, dn = shape_eval(xi, eta)
    jac = dn.T @ coords
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    if det <= 0.0:
        raise ValueError(f"nonpositive jacobian in element {element}")
    dndx = dn @ np.linalg.inv(jac).T
    ue = np.asarray(u)[DofMap(mesh.num_nodes).element_dofs(mesh.elements[element:element + 1])[0]]
    grad = np.zeros((2, 2))
    for a in range(4):
        grad[0] += ue[2 * a] * dndx[a]
        grad[1] += ue[2 * a + 1] * dndx[a]
    eps = 0.5 * (grad + grad.T)
    return SymTensor2.from_matrix(eps)


def constraints_from_nodes(nodes, component: int, value: float = 0.0):
    """(dof, value) pairs fixing one displacement component on given nodes."""
    return [(2 * int(n) + component, float(value)) for n in nodes]


def mode1_constraints(mesh: Mesh):
    """Dirichlet set of the cracked strip: u1 = 0 on Left, u2 = 0 on Ligament.

    The crack face stays unconstrained (traction free); the tip node is
    part of the ligament, so its u2 is fixed.
    """
    left = mesh.nodes_with_tag(BoundaryTag.LEFT)
    ligament = mesh.nodes_with_tag(BoundaryTag.LIGAMENT)
    return constraints_from_nodes(left, 0) + constraints_from_nodes(ligament, 1)


def mass_matrix(mesh: Mesh) -> sparse.csr_matrix:
    """Consistent mass matrix acting on both displacement components."""
    ops = element_operators(mesh)
    ne = mesh.num_elements
    me = np.zeros((ne, 4, 4))
    for q, w in enumerate(ops.quad.weights):
        n = ops.shape[q]
        me += w * np.einsum("a,b,e->eab", n, n, ops.detj[q])
    me8 = np.einsum("eab,kl->eakbl", me, np.eye(2)).reshape(ne, 8, 8)
    rows = np.repeat(ops.edofs, 8, axis=1).ravel()
    cols = np.tile(ops.edofs, (1, 8)).ravel()
    n_dofs = 2 * mesh.num_nodes
    return sparse.coo_matrix((me8.ravel(), (rows, cols)), shape=(n_dofs, n_dofs)).tocsr()
