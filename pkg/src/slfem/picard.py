"""Fixed-point solver for the strain-limiting boundary value problem.

Each step freezes the stress amplification psi at the previous iterate and
solves the resulting linear elasticity problem, starting from the solution
of the beta = 0 (linear) problem.  The reported residual is the fully
nonlinear one: with A(u) the matrix assembled at u itself and b the load
vector, r = A(u) u - b restricted to unconstrained dofs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .constitutive import MaterialModel
from .fem import LinearizedSystem, LoadSpec, _assemble_load, _assemble_matrix, \
    apply_constraints, solve_spd
from .mesh import Mesh


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls.

    relaxation scales the update, u <- (1 - w) u_old + w u_new; the default
    of 1 is the plain fixed point, smaller values damp strongly nonlinear
    cases (large beta).
    """

    tol: float = 1e-6
    max_iter: int = 10
    clamp_delta: float = 1e-8
    linear_rel_tol: float = 1e-12
    relaxation: float = 1.0

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not 0.0 < self.clamp_delta < 1.0:
            raise ValueError(f"clamp_delta must lie in (0, 1), got {self.clamp_delta}")
        if not self.linear_rel_tol > 0.0:
            raise ValueError(f"linear_rel_tol must be positive, got {self.linear_rel_tol}")
        if not 0.0 < self.relaxation <= 1.0:
            raise ValueError(f"relaxation must lie in (0, 1], got {self.relaxation}")


class PicardDivergenceError(RuntimeError):
    """Raised when an iterate stops being finite."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"iterate became non-finite at iteration {iteration}")


@dataclass
class IterationReport:
    """Per-iteration residuals and admissibility guard activity.

    clamp_counts[k] is the number of quadrature points clamped while
    evaluating psi at the (k + 1)-th iterate, the evaluation that produces
    residuals[k] and the coefficients of the following step.
    """

    residuals: list[float] = field(default_factory=list)
    clamp_counts: list[int] = field(default_factory=list)
    converged: bool = False
    iterations_used: int = 0

    @property
    def flagged(self) -> bool:
        """True when the admissibility guard fired during the iteration."""
        return any(c > 0 for c in self.clamp_counts)

    def to_table(self) -> str:
        """Plain-text (iteration, residual) table."""
        lines = ["iteration residual"]
        for k, r in enumerate(self.residuals, start=1):
            lines.append(f"{k} {r:.17g}")
        return "\n".join(lines) + "\n"


def _free_mask(n_dofs: int, bcs) -> np.ndarray:
    mask = np.ones(n_dofs, dtype=bool)
    for dof, _ in bcs:
        mask[int(dof)] = False
    return mask


def initial_guess(mesh: Mesh, model: MaterialModel, load: LoadSpec, bcs,
                  linear_rel_tol: float = 1e-12) -> np.ndarray:
    """Solution of the beta = 0 (linear) problem under the same data."""
    linear = replace(model, beta=0.0)
    mat, _ = _assemble_matrix(mesh, linear, None, None)
    system = LinearizedSystem(matrix=mat, rhs=_assemble_load(mesh, load))
    return solve_spd(apply_constraints(system, bcs), rel_tol=linear_rel_tol)


def residual_norm(mesh: Mesh, model: MaterialModel, u, load: LoadSpec, bcs,
                  clamp_delta: float | None = None) -> float:
    """Euclidean norm of the nonlinear residual on unconstrained dofs."""
    mat, _ = _assemble_matrix(mesh, model, u, clamp_delta)
    r = mat @ np.asarray(u, dtype=float) - _assemble_load(mesh, load)
    return float(np.linalg.norm(r[_free_mask(len(r), bcs)]))


def solve(mesh: Mesh, model: MaterialModel, load: LoadSpec, bcs,
          config: SolverConfig = SolverConfig()):
    """Run the fixed-point iteration; returns (u, IterationReport).

    Non-convergence within max_iter is reported, not raised; a non-finite
    iterate raises PicardDivergenceError.
    """
    b = _assemble_load(mesh, load)
    free = _free_mask(len(b), bcs)

    u = initial_guess(mesh, model, load, bcs, config.linear_rel_tol)
    # psi frozen at the current iterate; reused as the residual matrix below
    mat, _ = _assemble_matrix(mesh, model, u, config.clamp_delta)

    report = IterationReport()
    for it in range(1, config.max_iter + 1):
        system = apply_constraints(LinearizedSystem(matrix=mat, rhs=b.copy()), bcs)
        u_new = solve_spd(system, rel_tol=config.linear_rel_tol)
        if config.relaxation != 1.0:
            u_new = (1.0 - config.relaxation) * u + config.relaxation * u_new
        if not np.all(np.isfinite(u_new)):
            raise PicardDivergenceError(it)
        u = u_new

        mat, clamped = _assemble_matrix(mesh, model, u, config.clamp_delta)
        res = float(np.linalg.norm((mat @ u - b)[free]))
        report.residuals.append(res)
        report.clamp_counts.append(clamped)
        report.iterations_used = it
        if res <= config.tol:
            report.converged = True
            break

    return u, report
