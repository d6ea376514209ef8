"""Plane-strain FEM for crack-tip fields in strain-limiting transversely isotropic bodies."""

__version__ = "0.1.0"

from .constitutive import (
    InadmissibleStrainError,
    MaterialModel,
    SymTensor2,
    Tensor4,
    compliance_tensor,
    elasticity_tensor,
    energy_density,
    energy_norm,
    psi,
    strain_from_stress,
    stress_from_strain,
)
from .mesh import BoundaryTag, Mesh, MeshSpec, generate_mesh, validate_mesh
from .fem import (
    DofMap,
    LinearizedSystem,
    LoadSpec,
    QuadratureRule,
    apply_constraints,
    assemble,
    mode1_constraints,
    solve_spd,
    strain_at,
)
from .picard import IterationReport, SolverConfig, initial_guess, residual_norm, solve
from .postprocess import (
    CrackOpeningProfile,
    FieldSample,
    PathSpec,
    crack_opening,
    export_csv,
    export_vtk,
    field_distance,
    radial_samples,
    sample_at,
)

__all__ = [
    "__version__",
    "InadmissibleStrainError",
    "MaterialModel",
    "SymTensor2",
    "Tensor4",
    "compliance_tensor",
    "elasticity_tensor",
    "energy_density",
    "energy_norm",
    "psi",
    "strain_from_stress",
    "stress_from_strain",
    "BoundaryTag",
    "Mesh",
    "MeshSpec",
    "generate_mesh",
    "validate_mesh",
    "DofMap",
    "LinearizedSystem",
    "LoadSpec",
    "QuadratureRule",
    "apply_constraints",
    "assemble",
    "mode1_constraints",
    "solve_spd",
    "strain_at",
    "IterationReport",
    "SolverConfig",
    "initial_guess",
    "residual_norm",
    "solve",
    "CrackOpeningProfile",
    "FieldSample",
    "PathSpec",
    "crack_opening",
    "export_csv",
    "export_vtk",
    "field_distance",
    "radial_samples",
    "sample_at",
]
