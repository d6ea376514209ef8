"""Structured quadrilateral meshes for the cracked strip domain.

The domain is the rectangle [0, lx] x [0, ly].  A mode-I crack runs along
y = 0 from x = 0 to the tip at x = crack_tip[0]; the remaining part of the
bottom edge (x >= tip) is the ligament ahead of the crack.  Node spacing can
be geometrically graded so the smallest elements sit at the crack tip.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class BoundaryTag(enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"
    TOP = "Top"
    CRACK_FACE = "CrackFace"
    LIGAMENT = "Ligament"


@dataclass(frozen=True)
class MeshSpec:
    """Parameters of the structured mesh.

    nx * crack_tip[0] / lx must be an integer so the tip falls on a grid
    line; the boundary tag split at the tip is then clean.  grading >= 1 is
    the ratio between neighbouring element widths, applied per coordinate
    direction with the smallest elements adjacent to the tip.
    """

    lx: float = 2.0
    ly: float = 1.0
    nx: int = 64
    ny: int = 32
    crack_tip: tuple[float, float] = (1.0, 0.0)
    grading: float = 1.15

    def __post_init__(self):
        if not (self.lx > 0.0 and self.ly > 0.0):
            raise ValueError(f"domain lengths must be positive, got lx={self.lx}, ly={self.ly}")
        if self.nx < 2 or self.ny < 1:
            raise ValueError(f"need nx >= 2 and ny >= 1, got nx={self.nx}, ny={self.ny}")
        if self.grading < 1.0:
            raise ValueError(f"grading must be >= 1, got {self.grading}")
        tx, ty = self.crack_tip
        if ty != 0.0:
            raise ValueError(f"crack tip must lie on y = 0, got {self.crack_tip}")
        if not 0.0 < tx < self.lx:
            raise ValueError(f"crack tip x must lie inside (0, lx), got {tx}")
        ratio = self.nx * tx / self.lx
        if abs(ratio - round(ratio)) > 1e-9 or not 1 <= round(ratio) <= self.nx - 1:
            raise ValueError(
                f"crack tip x = {tx} does not fall on a grid line of an "
                f"nx = {self.nx} mesh over lx = {self.lx}"
            )

    @property
    def tip_index(self) -> int:
        """Index of the grid line carrying the crack tip."""
        return round(self.nx * self.crack_tip[0] / self.lx)


@dataclass
class Mesh:
    """Immutable quadrilateral mesh with tagged boundary edges.

    nodes are numbered row-major from the bottom-left corner, elements
    counter-clockwise starting at their bottom-left node.  xs and ys are the
    grid lines of the tensor-product layout and back fast point location.
    """

    nodes: np.ndarray
    elements: np.ndarray
    boundary_edges: list[tuple[tuple[int, int], BoundaryTag]]
    xs: np.ndarray
    ys: np.ndarray
    spec: MeshSpec
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for arr in (self.nodes, self.elements, self.xs, self.ys):
            arr.setflags(write=False)

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def num_elements(self) -> int:
        return self.elements.shape[0]

    def nodes_with_tag(self, tag: BoundaryTag) -> np.ndarray:
        """Sorted ids of all nodes on edges carrying the given tag."""
        ids = sorted({n for (pair, t) in self.boundary_edges if t is tag for n in pair})
        return np.asarray(ids, dtype=int)

    def locate(self, point) -> tuple[int, tuple[float, float]]:
        """Containing element and reference coordinates of a point.

        Points on an interior grid line resolve to the neighbouring element
        with the smaller index.  Raises ValueError for points outside the
        domain (beyond a 1e-12 tolerance).
        """
        x, y = float(point[0]), float(point[1])
        tol = 1e-12 * max(self.spec.lx, self.spec.ly)
        if not (self.xs[0] - tol <= x <= self.xs[-1] + tol
                and self.ys[0] - tol <= y <= self.ys[-1] + tol):
            raise ValueError(f"point {(x, y)} lies outside the meshed domain")
        ix = int(np.clip(np.searchsorted(self.xs, x, side="left") - 1, 0, len(self.xs) - 2))
        iy = int(np.clip(np.searchsorted(self.ys, y, side="left") - 1, 0, len(self.ys) - 2))
        x0, x1 = self.xs[ix], self.xs[ix + 1]
        y0, y1 = self.ys[iy], self.ys[iy + 1]
        xi = 2.0 * (x - x0) / (x1 - x0) - 1.0
        eta = 2.0 * (y - y0) / (y1 - y0) - 1.0
        return iy * self.spec.nx + ix, (xi, eta)


def _graded_points(a, b, n, grading, fine_at_start):
    """n+1 points on [a, b] with widths in geometric progression of the ratio.

    The smallest width sits at a if fine_at_start else at b.  Endpoints are
    set exactly.
    """
    if grading == 1.0:
        pts = np.linspace(a, b, n + 1)
    else:
        w0 = (b - a) * (grading - 1.0) / (grading ** n - 1.0)
        offs = w0 * (grading ** np.arange(n + 1) - 1.0) / (grading - 1.0)
        pts = a + offs if fine_at_start else b - offs[::-1]
    pts[0], pts[-1] = a, b
    return pts


def generate_mesh(spec: MeshSpec) -> Mesh:
    """Build the structured mesh described by the spec."""
    k = spec.tip_index
    tip_x = spec.crack_tip[0]
    xs = np.concatenate([
        _graded_points(0.0, tip_x, k, spec.grading, fine_at_start=False),
        _graded_points(tip_x, spec.lx, spec.nx - k, spec.grading, fine_at_start=True)[1:],
    ])
    ys = _graded_points(0.0, spec.ly, spec.ny, spec.grading, fine_at_start=True)

    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    nxp = spec.nx + 1
    i, j = np.meshgrid(np.arange(spec.nx), np.arange(spec.ny))
    n0 = (j * nxp + i).ravel()
    elements = np.column_stack([n0, n0 + 1, n0 + nxp + 1, n0 + nxp])

    def node(ii, jj):
        return jj * nxp + ii

    edges: list[tuple[tuple[int, int], BoundaryTag]] = []
    for ii in range(spec.nx):
        mid = 0.5 * (xs[ii] + xs[ii + 1])
        tag = BoundaryTag.CRACK_FACE if mid < tip_x else BoundaryTag.LIGAMENT
        edges.append(((node(ii, 0), node(ii + 1, 0)), tag))
    for jj in range(spec.ny):
        edges.append(((node(spec.nx, jj), node(spec.nx, jj + 1)), BoundaryTag.RIGHT))
    for ii in range(spec.nx):
        edges.append(((node(ii, spec.ny), node(ii + 1, spec.ny)), BoundaryTag.TOP))
    for jj in range(spec.ny):
        edges.append(((node(0, jj), node(0, jj + 1)), BoundaryTag.LEFT))

    return Mesh(nodes=nodes, elements=elements, boundary_edges=edges, xs=xs, ys=ys, spec=spec)


# 2x2 Gauss points, where the jacobian check samples each element.
_G = 1.0 / np.sqrt(3.0)
_CHECK_PTS = [(-_G, -_G), (_G, -_G), (_G, _G), (-_G, _G)]


def _grad_ref(xi, eta):
    return 0.25 * np.array([
        [-(1 - eta), -(1 - xi)],
        [(1 - eta), -(1 + xi)],
        [(1 + eta), (1 + xi)],
        [-(1 + eta), (1 - xi)],
    ])


@dataclass
class MeshDiagnostics:
    checks: dict[str, bool]
    failures: list[str]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def validate_mesh(mesh: Mesh) -> MeshDiagnostics:
    """Run consistency checks: jacobians, boundary tags, node bounds."""
    failures = []

    jac_ok = True
    coords = mesh.nodes[mesh.elements]
    for xi, eta in _CHECK_PTS:
        dn = _grad_ref(xi, eta)
        jac = np.einsum("ai,eaj->eij", dn, coords)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        if np.any(det <= 0.0):
            jac_ok = False
            bad = int(np.argmax(det <= 0.0))
            failures.append(f"nonpositive jacobian in element {bad} at ({xi:.4f}, {eta:.4f})")
            break

    # every exterior element edge must carry exactly one tag
    counts: dict[tuple[int, int], int] = {}
    for el in mesh.elements:
        for a, b in ((0, 1), (1, 2), (2, 3), (3, 0)):
            key = tuple(sorted((int(el[a]), int(el[b]))))
            counts[key] = counts.get(key, 0) + 1
    exterior = {k for k, c in counts.items() if c == 1}
    tagged = {tuple(sorted(pair)) for pair, _ in mesh.boundary_edges}
    tags_ok = exterior == tagged and len(tagged) == len(mesh.boundary_edges)
    if not tags_ok:
        failures.append(
            f"boundary tags do not cover the exterior edges exactly "
            f"({len(exterior)} exterior, {len(tagged)} tagged)"
        )

    tol = 1e-12 * max(mesh.spec.lx, mesh.spec.ly)
    bounds_ok = bool(
        np.all(mesh.nodes[:, 0] >= -tol) and np.all(mesh.nodes[:, 0] <= mesh.spec.lx + tol)
        and np.all(mesh.nodes[:, 1] >= -tol) and np.all(mesh.nodes[:, 1] <= mesh.spec.ly + tol)
    )
    if not bounds_ok:
        failures.append("node coordinates fall outside the domain box")

    return MeshDiagnostics(
        checks={"jacobian_positive": jac_ok, "boundary_tags": tags_ok, "node_bounds": bounds_ok},
        failures=failures,
    )


def dump_mesh(mesh: Mesh, path) -> None:
    """Write a plain-text listing: nodes, elements, tagged boundary edges.

    Format: a header line "mesh <num_nodes> <num_elements> <num_edges>",
    then one line per node "n <id> <x> <y>", one per element
    "e <id> <n0> <n1> <n2> <n3>", one per boundary edge
    "b <n0> <n1> <tag>".  Floats use 17 significant digits.
    """
    lines = [f"mesh {mesh.num_nodes} {mesh.num_elements} {len(mesh.boundary_edges)}"]
    for nid, (x, y) in enumerate(mesh.nodes):
        lines.append(f"n {nid} {x:.17g} {y:.17g}")
    for eid, el in enumerate(mesh.elements):
        lines.append(f"e {eid} {el[0]} {el[1]} {el[2]} {el[3]}")
    for (a, b), tag in mesh.boundary_edges:
        lines.append(f"b {a} {b} {tag.value}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
