"""Independent reference implementations used as test oracles.

Everything here is written against the math, not against the library:
plain loops, scalar arithmetic, its own shape-function algebra. Slow on
purpose; only run on small meshes.
"""

import math

import numpy as np
import scipy.linalg

from slfem.constitutive import MaterialModel, psi

ROOT2 = math.sqrt(2.0)

# 2x2 Gauss points as 1D tensor products, unlike the library's point table.
_G1D = (-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0))


def shape1d(t):
    """Linear 1D shapes on [-1, 1] and their derivatives."""
    return (0.5 * (1 - t), 0.5 * (1 + t)), (-0.5, 0.5)


def q1_shapes(xi, eta):
    """Q1 values and reference gradients via tensor products of 1D shapes.

    Returned in the connectivity corner order (-1,-1), (1,-1), (1,1), (-1,1).
    """
    (nx0, nx1), (dx0, dx1) = shape1d(xi)
    (ny0, ny1), (dy0, dy1) = shape1d(eta)
    vals = [nx0 * ny0, nx1 * ny0, nx1 * ny1, nx0 * ny1]
    grads = [
        (dx0 * ny0, nx0 * dy0),
        (dx1 * ny0, nx1 * dy0),
        (dx1 * ny1, nx1 * dy1),
        (dx0 * ny1, nx0 * dy1),
    ]
    return vals, grads


def elasticity_tensor_4idx(model: MaterialModel) -> np.ndarray:
    """Full E_ijkl from the constitutive formula, no Mandel shortcuts."""
    a = np.array([math.cos(model.fiber_angle), math.sin(model.fiber_angle)])
    m = np.outer(a, a)
    eye = np.eye(2)
    e = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for L in range(2):
                    sym = 0.5 * (eye[i, k] * eye[j, L] + eye[i, L] * eye[j, k])
                    e[i, j, k, L] = (
                        2.0 * model.mu * sym
                        + model.lambda_lame * eye[i, j] * eye[k, L]
                        + model.gamma * m[i, j] * m[k, L]
                    )
    return e


def mandel_matrix_from_4idx(e: np.ndarray) -> np.ndarray:
    """Contract a 4-index tensor against the orthonormal Mandel basis."""
    basis = [
        np.array([[1.0, 0.0], [0.0, 0.0]]),
        np.array([[0.0, 0.0], [0.0, 1.0]]),
        np.array([[0.0, 1.0 / ROOT2], [1.0 / ROOT2, 0.0]]),
    ]
    a = np.zeros((3, 3))
    for p, bp in enumerate(basis):
        for q, bq in enumerate(basis):
            a[p, q] = np.einsum("ij,ijkl,kl->", bp, e, bq)
    return a


def energy_norm_sqrtm(m_vec: np.ndarray, a_e: np.ndarray) -> float:
    """||E^(1/2) eps|| via an explicit matrix square root."""
    root = scipy.linalg.sqrtm(a_e)
    return float(np.linalg.norm(np.real(root) @ m_vec))


def strain_matrix_at(mesh, element, xi, eta, u):
    """Symmetrized displacement gradient, scalar loops only."""
    conn = mesh.elements[element]
    coords = mesh.nodes[conn]
    _, grads = q1_shapes(xi, eta)
    jac = np.zeros((2, 2))
    for a in range(4):
        for i in range(2):
            for j in range(2):
                jac[i, j] += grads[a][i] * coords[a, j]
    inv = np.linalg.inv(jac)
    grad_u = np.zeros((2, 2))
    for a in range(4):
        dndx = inv.T @ np.array(grads[a])
        for comp in range(2):
            ua = u[2 * conn[a] + comp]
            for j in range(2):
                grad_u[comp, j] += ua * dndx[j]
    return 0.5 * (grad_u + grad_u.T)


def dense_assemble(mesh, model: MaterialModel, u_prev=None) -> np.ndarray:
    """Brute-force dense stiffness with psi frozen at u_prev.

    Quadratic in dofs and cubic in patience; meshes above ~4x4 get slow.
    """
    n_dofs = 2 * mesh.num_nodes
    if u_prev is None:
        u_prev = np.zeros(n_dofs)
    a_e4 = elasticity_tensor_4idx(model)
    a_mandel = mandel_matrix_from_4idx(a_e4)
    k = np.zeros((n_dofs, n_dofs))
    for e in range(mesh.num_elements):
        conn = mesh.elements[e]
        coords = mesh.nodes[conn]
        for xi in _G1D:
            for eta in _G1D:
                _, grads = q1_shapes(xi, eta)
                jac = np.zeros((2, 2))
                for a in range(4):
                    for i in range(2):
                        for j in range(2):
                            jac[i, j] += grads[a][i] * coords[a, j]
                det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
                assert det > 0.0
                inv = np.linalg.inv(jac)

                if model.beta == 0.0:
                    coef = 1.0
                else:
                    eps = strain_matrix_at(mesh, e, xi, eta, u_prev)
                    m_vec = np.array([eps[0, 0], eps[1, 1], ROOT2 * eps[0, 1]])
                    s = math.sqrt(max(float(m_vec @ a_mandel @ m_vec), 0.0))
                    coef = float(psi(s, model.beta, model.alpha))

                # strain of basis function (a, comp) as a 2x2 matrix
                def basis_strain(a, comp):
                    dndx = inv.T @ np.array(grads[a])
                    g = np.zeros((2, 2))
                    g[comp, :] = dndx
                    return 0.5 * (g + g.T)

                for a in range(4):
                    for ca in range(2):
                        ea = basis_strain(a, ca)
                        ta = np.einsum("ijkl,kl->ij", a_e4, ea)
                        for b in range(4):
                            for cb in range(2):
                                eb = basis_strain(b, cb)
                                val = coef * np.einsum("ij,ij->", ta, eb) * det
                                k[2 * conn[a] + ca, 2 * conn[b] + cb] += val
    return k


def dense_mass(mesh) -> np.ndarray:
    """Loop-built consistent mass acting identically on both components."""
    n_dofs = 2 * mesh.num_nodes
    m = np.zeros((n_dofs, n_dofs))
    for e in range(mesh.num_elements):
        conn = mesh.elements[e]
        coords = mesh.nodes[conn]
        for xi in _G1D:
            for eta in _G1D:
                vals, grads = q1_shapes(xi, eta)
                jac = np.zeros((2, 2))
                for a in range(4):
                    for i in range(2):
                        for j in range(2):
                            jac[i, j] += grads[a][i] * coords[a, j]
                det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
                for a in range(4):
                    for b in range(4):
                        for comp in range(2):
                            m[2 * conn[a] + comp, 2 * conn[b] + comp] += vals[a] * vals[b] * det
    return m


def random_admissible_strain(rng, model: MaterialModel, fraction=0.9):
    """Mandel vector uniformly inside fraction x the admissible energy ball."""
    return random_admissible_batch(rng, model, 1, fraction)[0]


def random_admissible_batch(rng, model: MaterialModel, n, fraction=0.9):
    """(n, 3) Mandel vectors uniformly inside fraction x the admissible ball."""
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    limit = fraction / model.beta if model.beta > 0 else 1.0
    # uniform in the ball: radius ~ u^(1/3)
    radius_energy = limit * rng.uniform(size=n) ** (1.0 / 3.0)
    a_e = mandel_matrix_from_4idx(elasticity_tensor_4idx(model))
    unit_energy = np.sqrt(np.einsum("ni,ij,nj->n", direction, a_e, direction))
    return direction * (radius_energy / unit_energy)[:, None]


def parse_legacy_vtk(path):
    """Minimal reader for the legacy ASCII unstructured-grid format.

    Returns a dict with points (N, 3), cells (E, 4), point vector fields,
    and cell scalar fields. Raises on anything outside the narrow dialect
    the writer is supposed to emit.
    """
    with open(path, encoding="ascii") as handle:
        tokens = handle.read().split("\n")
    if not tokens[0].startswith("# vtk DataFile Version"):
        raise ValueError("missing vtk header")
    if tokens[2] != "ASCII":
        raise ValueError("expected ASCII encoding")
    if tokens[3] != "DATASET UNSTRUCTURED_GRID":
        raise ValueError("expected unstructured grid")

    pos = 4
    out = {"title": tokens[1], "point_vectors": {}, "cell_scalars": {}}

    def floats(line):
        return [float(tok) for tok in line.split()]

    while pos < len(tokens):
        line = tokens[pos].strip()
        if not line:
            pos += 1
            continue
        word = line.split()[0]
        if word == "POINTS":
            count = int(line.split()[1])
            rows = [floats(tokens[pos + 1 + i]) for i in range(count)]
            out["points"] = np.array(rows)
            pos += 1 + count
        elif word == "CELLS":
            count = int(line.split()[1])
            rows = []
            for i in range(count):
                parts = [int(tok) for tok in tokens[pos + 1 + i].split()]
                if parts[0] != 4:
                    raise ValueError("expected 4-node cells")
                rows.append(parts[1:])
            out["cells"] = np.array(rows)
            pos += 1 + count
        elif word == "CELL_TYPES":
            count = int(line.split()[1])
            types = [int(tokens[pos + 1 + i]) for i in range(count)]
            if any(t != 9 for t in types):
                raise ValueError("expected VTK_QUAD (9) everywhere")
            pos += 1 + count
        elif word in ("POINT_DATA", "CELL_DATA"):
            out["_section"] = word
            pos += 1
        elif word == "VECTORS":
            name = line.split()[1]
            count = out["points"].shape[0]
            rows = [floats(tokens[pos + 1 + i]) for i in range(count)]
            out["point_vectors"][name] = np.array(rows)
            pos += 1 + count
        elif word == "SCALARS":
            name = line.split()[1]
            if tokens[pos + 1].split()[0] != "LOOKUP_TABLE":
                raise ValueError("SCALARS must be followed by LOOKUP_TABLE")
            count = out["cells"].shape[0] if out.get("_section") == "CELL_DATA" \
                else out["points"].shape[0]
            vals = [float(tokens[pos + 2 + i]) for i in range(count)]
            out["cell_scalars"][name] = np.array(vals)
            pos += 2 + count
        else:
            raise ValueError(f"unrecognized vtk directive: {line!r}")
    return out


def read_csv_columns(path):
    """Header list plus a dict of float column arrays."""
    with open(path, encoding="ascii") as handle:
        lines = [line for line in handle.read().split("\n") if line]
    header = lines[0].split(",")
    data = np.array([[float(tok) for tok in line.split(",")] for line in lines[1:]])
    return header, {name: data[:, i] for i, name in enumerate(header)}
