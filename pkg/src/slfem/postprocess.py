"""Field sampling, crack-opening extraction and file export.

CSV files carry full double precision (17 significant digits) so a
round-trip through text recovers every value exactly.  The VTK writer
emits the legacy ASCII unstructured-grid format readable by standard
viewers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constitutive import (
    MaterialModel,
    SymTensor2,
    elasticity_matrix,
    energy_norm_mandel,
    psi,
    psi_clamped,
)
from .fem import element_operators, mass_matrix, strain_at
from .mesh import BoundaryTag, Mesh

RADIAL_COLUMNS = (
    "r", "eps11", "eps22", "eps12", "T11", "T22", "T12",
    "T11_norm", "T22_norm", "T12_norm", "psi", "energy",
    "eps_frob", "T_frob",
)


@dataclass(frozen=True)
class FieldSample:
    """Strain, stress and energy state at one point."""

    point: tuple[float, float]
    eps: SymTensor2
    stress: SymTensor2
    psi_value: float
    energy: float
    dist_to_tip: float


@dataclass(frozen=True)
class PathSpec:
    """Radial sampling path anchored at the crack tip.

    Radii run from r_min to r_max in geometric progression, denser near
    the tip.  A small offset displaces the path along the normal of its
    direction so samples on the crack plane do not sit exactly on the
    boundary.  Fields left at None fall back to mesh-derived defaults:
    origin = crack tip, offset = 1e-6 * lx, r_min = r_max / 32.

    The r_min fallback is half the tip element size of the default 64x32
    mesh were it uniform; samples inside the first element ring measure
    interpolation error more than the field, so the path starts outside it.
    """

    origin: tuple[float, float] | None = None
    angle: float = 0.0
    r_max: float = 0.5
    n_samples: int = 64
    offset: float | None = None
    r_min: float | None = None


@dataclass(frozen=True)
class CrackOpeningProfile:
    """Vertical displacement along the crack face, mouth to tip."""

    x: np.ndarray
    u2: np.ndarray

    def pairs(self):
        return list(zip(self.x.tolist(), self.u2.tolist()))


def sample_at(u, point, mesh: Mesh, model: MaterialModel) -> FieldSample:
    """Evaluate strain, stress, psi and energy density at a point.

    Raises InadmissibleStrainError if the strain there violates the limit
    bound; a converged solve is expected to have prevented that.
    """
    element, ref = mesh.locate(point)
    eps = strain_at(element, ref, u, mesh)
    a_e = elasticity_matrix(model)
    m = eps.m
    s = float(energy_norm_mandel(m, a_e))
    psi_value = float(psi(s, model.beta, model.alpha))
    stress = SymTensor2.from_mandel(psi_value * (a_e @ m))
    tip = mesh.spec.crack_tip
    return FieldSample(
        point=(float(point[0]), float(point[1])),
        eps=eps,
        stress=stress,
        psi_value=psi_value,
        energy=psi_value * s * s,
        dist_to_tip=math.hypot(point[0] - tip[0], point[1] - tip[1]),
    )


def radial_samples(u, path: PathSpec, mesh: Mesh, model: MaterialModel) -> list[FieldSample]:
    """Samples along a ray from the crack tip, ordered by increasing radius."""
    origin = path.origin if path.origin is not None else mesh.spec.crack_tip
    offset = path.offset if path.offset is not None else 1e-6 * mesh.spec.lx
    r_min = path.r_min if path.r_min is not None else path.r_max / 32.0
    if path.n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {path.n_samples}")
    if not 0.0 < r_min < path.r_max:
        raise ValueError(f"need 0 < r_min < r_max, got r_min={r_min}, r_max={path.r_max}")
    q = (r_min / path.r_max) ** (1.0 / (path.n_samples - 1))
    radii = path.r_max * q ** np.arange(path.n_samples)
    radii = radii[::-1]                       # increasing toward r_max
    direction = np.array([math.cos(path.angle), math.sin(path.angle)])
    normal = np.array([-direction[1], direction[0]])
    samples = []
    for r in radii:
        p = np.asarray(origin) + r * direction + offset * normal
        samples.append(sample_at(u, p, mesh, model))
    return samples


def crack_opening(u, mesh: Mesh) -> CrackOpeningProfile:
    """u2 at the crack-face nodes, sorted from the mouth to the tip."""
    face_nodes = mesh.nodes_with_tag(BoundaryTag.CRACK_FACE)
    if face_nodes.size == 0:
        raise ValueError("mesh has no crack-face edges")
    xs = mesh.nodes[face_nodes, 0]
    order = np.argsort(xs)
    nodes = face_nodes[order]
    u = np.asarray(u)
    return CrackOpeningProfile(x=xs[order].copy(), u2=u[2 * nodes + 1].copy())


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def export_csv(data, path, sigma_top: float = 0.0) -> None:
    """Write samples or a crack-opening profile as CSV.

    For samples the columns are RADIAL_COLUMNS; the *_norm stress columns
    are divided by sigma_top when it is positive and left raw otherwise.
    A profile gets two columns, x and u2.
    """
    lines = []
    if isinstance(data, CrackOpeningProfile):
        lines.append("x,u2")
        for x, v in zip(data.x, data.u2):
            lines.append(f"{_fmt(x)},{_fmt(v)}")
    else:
        scale = 1.0 / sigma_top if sigma_top > 0.0 else 1.0
        lines.append(",".join(RADIAL_COLUMNS))
        for s in data:
            t = s.stress
            row = (
                s.dist_to_tip,
                s.eps.t11, s.eps.t22, s.eps.t12,
                t.t11, t.t22, t.t12,
                scale * t.t11, scale * t.t22, scale * t.t12,
                s.psi_value, s.energy,
                s.eps.norm(), t.norm(),
            )
            lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _cell_averages(u, mesh: Mesh, model: MaterialModel):
    """Quadrature-point averages per element of strain, stress and energy."""
    ops = element_operators(mesh)
    a_e = elasticity_matrix(model)
    ue = np.asarray(u)[ops.edofs]
    nq = len(ops.quad.weights)
    eps_sum = np.zeros((mesh.num_elements, 3))
    stress_sum = np.zeros((mesh.num_elements, 3))
    energy_sum = np.zeros(mesh.num_elements)
    for q in range(nq):
        eps = np.einsum("eij,ej->ei", ops.b[q], ue)
        s = energy_norm_mandel(eps, a_e)
        # exports stay usable for diagnosing runs whose iterates overshoot
        # the limit surface, so clamp rather than fail here
        vals, _ = psi_clamped(s, model.beta, model.alpha, 1e-8) if model.beta > 0.0 \
            else (np.ones(mesh.num_elements), 0)
        stress = vals[:, None] * (eps @ a_e.T)
        eps_sum += eps
        stress_sum += stress
        energy_sum += np.einsum("ei,ei->e", stress, eps)
    return eps_sum / nq, stress_sum / nq, energy_sum / nq


def export_vtk(u, mesh: Mesh, model: MaterialModel, path) -> None:
    """Legacy ASCII VTK unstructured grid with point and cell data.

    Point data: the displacement vector.  Cell data: strain and stress
    components and the energy density, averaged over each element's
    quadrature points.
    """
    u = np.asarray(u)
    eps_avg, stress_avg, energy_avg = _cell_averages(u, mesh, model)
    # Mandel shear entries back to tensor components
    eps12 = eps_avg[:, 2] / math.sqrt(2.0)
    t12 = stress_avg[:, 2] / math.sqrt(2.0)

    out = []
    out.append("# vtk DataFile Version 3.0")
    out.append("displacement and crack-tip field export")
    out.append("ASCII")
    out.append("DATASET UNSTRUCTURED_GRID")
    out.append(f"POINTS {mesh.num_nodes} double")
    for x, y in mesh.nodes:
        out.append(f"{_fmt(x)} {_fmt(y)} 0")
    out.append(f"CELLS {mesh.num_elements} {5 * mesh.num_elements}")
    for el in mesh.elements:
        out.append(f"4 {el[0]} {el[1]} {el[2]} {el[3]}")
    out.append(f"CELL_TYPES {mesh.num_elements}")
    out.extend(["9"] * mesh.num_elements)
    out.append(f"POINT_DATA {mesh.num_nodes}")
    out.append("VECTORS displacement double")
    for n in range(mesh.num_nodes):
        out.append(f"{_fmt(u[2 * n])} {_fmt(u[2 * n + 1])} 0")
    out.append(f"CELL_DATA {mesh.num_elements}")
    for name, values in (
        ("strain_11", eps_avg[:, 0]),
        ("strain_22", eps_avg[:, 1]),
        ("strain_12", eps12),
        ("stress_11", stress_avg[:, 0]),
        ("stress_22", stress_avg[:, 1]),
        ("stress_12", t12),
        ("energy_density", energy_avg),
    ):
        out.append(f"SCALARS {name} double 1")
        out.append("LOOKUP_TABLE default")
        out.extend(_fmt(v) for v in values)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


def field_distance(u_a, u_b, mesh: Mesh) -> float:
    """L2 distance between two nodal fields, weighted by the mass matrix."""
    u_a = np.asarray(u_a, dtype=float)
    u_b = np.asarray(u_b, dtype=float)
    if u_a.shape != u_b.shape or u_a.shape != (2 * mesh.num_nodes,):
        raise ValueError("fields must both match the mesh dof count")
    if "mass" not in mesh._cache:
        mesh._cache["mass"] = mass_matrix(mesh)
    d = u_a - u_b
    return float(math.sqrt(max(d @ (mesh._cache["mass"] @ d), 0.0)))


def strain_limit_audit(u, mesh: Mesh, model: MaterialModel) -> float:
    """Max of beta * energy_norm(strain) over all quadrature points."""
    ops = element_operators(mesh)
    a_e = elasticity_matrix(model)
    ue = np.asarray(u)[ops.edofs]
    worst = 0.0
    for q in range(len(ops.quad.weights)):
        eps = np.einsum("eij,ej->ei", ops.b[q], ue)
        s = energy_norm_mandel(eps, a_e)
        worst = max(worst, model.beta * float(s.max()))
    return worst
