"""Strain-limiting constitutive relations for transversely isotropic plane strain.

Symmetric 2x2 tensors are carried as 3-vectors in orthonormal (Mandel)
notation, ``(t11, t22, sqrt(2)*t12)``, so the Euclidean norm of the vector
equals the Frobenius norm of the tensor and fourth-order tensors act as
plain symmetric 3x3 matrices.

The material law is the inverted strain-limiting relation

    T = psi(s) * E[eps],    s = sqrt(eps : E[eps]),
    psi(s) = (1 - (beta*s)**alpha) ** (-1/alpha),

whose exact inverse is

    eps = K[T] / (1 + (beta*k)**alpha) ** (1/alpha),    k = sqrt(T : K[T]),

with E the transversely isotropic elasticity tensor and K its inverse.
States with (beta*s)**alpha >= 1 carry no finite stress and are rejected.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

ROOT2 = math.sqrt(2.0)

__all__ = [
    "SymTensor2",
    "Tensor4",
    "MaterialModel",
    "InadmissibleStrainError",
    "elasticity_tensor",
    "compliance_tensor",
    "psi",
    "psi_clamped",
    "admissible_radius",
    "energy_norm",
    "energy_density",
    "stress_from_strain",
    "strain_from_stress",
]


class InadmissibleStrainError(ValueError):
    """Raised when a strain state violates the strain-limit bound."""


class SymTensor2:
    """Symmetric 2x2 tensor stored by components, exposed in Mandel notation.

    Components are the stored truth; the Mandel 3-vector is derived on
    access.  This keeps ``from_components`` -> ``to_components`` exact
    (multiplying and dividing by sqrt(2) is not an identity in floating
    point).
    """

    __slots__ = ("t11", "t22", "t12")

    def __init__(self, t11, t22, t12):
        self.t11 = float(t11)
        self.t22 = float(t22)
        self.t12 = float(t12)

    @classmethod
    def from_components(cls, t11, t22, t12):
        return cls(t11, t22, t12)

    @classmethod
    def from_mandel(cls, m):
        m = np.asarray(m, dtype=float)
        if m.shape != (3,):
            raise ValueError(f"Mandel vector must have shape (3,), got {m.shape}")
        return cls(m[0], m[1], m[2] / ROOT2)

    @classmethod
    def from_matrix(cls, a):
        a = np.asarray(a, dtype=float)
        if a.shape != (2, 2) or abs(a[0, 1] - a[1, 0]) > 1e-14 * max(1.0, abs(a[0, 1])):
            raise ValueError("expected a symmetric 2x2 matrix")
        return cls(a[0, 0], a[1, 1], 0.5 * (a[0, 1] + a[1, 0]))

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0, 0.0)

    @property
    def m(self):
        """Mandel 3-vector (t11, t22, sqrt(2)*t12)."""
        return np.array([self.t11, self.t22, ROOT2 * self.t12])

    def to_components(self):
        return (self.t11, self.t22, self.t12)

    def to_matrix(self):
        return np.array([[self.t11, self.t12], [self.t12, self.t22]])

    def norm(self):
        """Frobenius norm, equal to the Euclidean norm of the Mandel vector."""
        return float(np.linalg.norm(self.m))

    def trace(self):
        return self.t11 + self.t22

    def __add__(self, other):
        return SymTensor2(self.t11 + other.t11, self.t22 + other.t22, self.t12 + other.t12)

    def __sub__(self, other):
        return SymTensor2(self.t11 - other.t11, self.t22 - other.t22, self.t12 - other.t12)

    def __mul__(self, c):
        return SymTensor2(c * self.t11, c * self.t22, c * self.t12)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SymTensor2(t11={self.t11!r}, t22={self.t22!r}, t12={self.t12!r})"


class Tensor4:
    """Fourth-order tensor with minor and major symmetries, as a 3x3 Mandel matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (3, 3):
            raise ValueError(f"Mandel matrix must have shape (3, 3), got {matrix.shape}")
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(matrix).max())):
            raise ValueError("Mandel matrix must be symmetric (major symmetry)")
        m = 0.5 * (matrix + matrix.T)
        m.setflags(write=False)
        self.matrix = m

    def apply(self, t: SymTensor2) -> SymTensor2:
        return SymTensor2.from_mandel(self.matrix @ t.m)

    def inverse(self) -> "Tensor4":
        return Tensor4(np.linalg.inv(self.matrix))

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)

    def is_positive_definite(self):
        return bool(self.eigenvalues()[0] > 0.0)

    def __repr__(self):
        return f"Tensor4({self.matrix!r})"


@dataclass(frozen=True)
class MaterialModel:
    """Transversely isotropic strain-limiting material.

    Parameters
    ----------
    mu : float
        Shear modulus, > 0.
    lambda_lame : float
        First Lame parameter, > 0.
    gamma : float
        Fiber reinforcement modulus, >= 0.  ``gamma = 0`` recovers isotropy.
    beta : float
        Strain-limit parameter, >= 0.  ``beta = 0`` recovers linear elasticity;
        otherwise admissible strains satisfy ``beta * energy_norm(eps) < 1``.
    alpha : float
        Strain-limit exponent, > 0.
    fiber_angle : float
        Angle of the fiber direction against the x-axis, radians.

    The default moduli put the stiffness two orders of magnitude above the
    unit-scale tractions used in the crack scenarios.  That keeps strains at
    the 1e-3 scale the linearized kinematics assume, and it keeps the
    fixed-point iteration inside its contraction regime for beta up to 10
    on the default mesh.  Equivalent engineering constants: E = 250,
    nu = 0.25, with gamma / mu = 0.5 fiber reinforcement.
    """

    mu: float = 100.0
    lambda_lame: float = 100.0
    gamma: float = 50.0
    beta: float = 1.0
    alpha: float = 1.0
    fiber_angle: float = 0.0

    def __post_init__(self):
        if not self.mu > 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.lambda_lame > 0.0:
            raise ValueError(f"lambda_lame must be positive, got {self.lambda_lame}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @classmethod
    def from_engineering(cls, youngs=1.0, poisson=0.3, **kwargs):
        """Build from Young's modulus and Poisson's ratio instead of Lame constants."""
        if not youngs > 0.0:
            raise ValueError(f"youngs must be positive, got {youngs}")
        if not 0.0 < poisson < 0.5:
            raise ValueError(f"poisson must lie in (0, 0.5), got {poisson}")
        mu = youngs / (2.0 * (1.0 + poisson))
        lam = youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson))
        return cls(mu=mu, lambda_lame=lam, **kwargs)

    def fiber_vector(self):
        """Unit fiber direction a = (cos(theta), sin(theta))."""
        return np.array([math.cos(self.fiber_angle), math.sin(self.fiber_angle)])

    def fiber_mandel(self):
        """Mandel vector of the structural tensor M = a (x) a."""
        a1, a2 = self.fiber_vector()
        return np.array([a1 * a1, a2 * a2, ROOT2 * a1 * a2])


# Mandel vector of the 2x2 identity; tr(eps) = _IDENT_M . m(eps).
_IDENT_M = np.array([1.0, 1.0, 0.0])


@functools.lru_cache(maxsize=128)
def _mandel_pair(model: MaterialModel):
    """Cached read-only (elasticity, compliance) Mandel matrices of a model.

    MaterialModel is frozen and hashes by value, so sweeps that rebuild
    equal models share one entry.
    """
    m_f = model.fiber_mandel()
    a = 2.0 * model.mu * np.eye(3)
    a += model.lambda_lame * np.outer(_IDENT_M, _IDENT_M)
    a += model.gamma * np.outer(m_f, m_f)
    k = np.linalg.inv(a)
    a.setflags(write=False)
    k.setflags(write=False)
    return a, k


def elasticity_matrix(model: MaterialModel) -> np.ndarray:
    """Mandel 3x3 matrix of eps -> 2*mu*eps + lambda*tr(eps)*I + gamma*(eps:M)*M."""
    return _mandel_pair(model)[0].copy()


def elasticity_tensor(model: MaterialModel) -> Tensor4:
    """Transversely isotropic elasticity tensor E, checked positive definite."""
    t = Tensor4(elasticity_matrix(model))
    ev = t.eigenvalues()
    if not ev[0] > 0.0:
        raise ValueError(f"elasticity tensor is not positive definite, eigenvalues {ev}")
    return t


def compliance_tensor(model: MaterialModel) -> Tensor4:
    """Inverse K = E**-1 of the elasticity tensor."""
    return elasticity_tensor(model).inverse()


def admissible_radius(beta, alpha, clamp_delta=0.0):
    """Largest admissible s: (beta*s)**alpha <= 1 - clamp_delta.  inf for beta = 0."""
    if beta == 0.0:
        return math.inf
    return (1.0 - clamp_delta) ** (1.0 / alpha) / beta

def psi(s, beta, alpha):
    """Stress amplification factor psi(s) = (1 - (beta*s)**alpha)**(-1/alpha).

    Accepts a scalar or an array of nonnegative ``s``.  Nondecreasing in s,
    with psi(0) = 1 and psi -> inf as beta*s -> 1.  Raises
    :class:`InadmissibleStrainError` if any state has (beta*s)**alpha >= 1;
    callers that prefer clamping to failure use :func:`psi_clamped`.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0.0):
        raise ValueError("s must be nonnegative")
    core = (beta * s_arr) ** alpha
    if np.any(core >= 1.0):
        worst = float(s_arr.max()) if s_arr.ndim else float(s_arr)
        raise InadmissibleStrainError(
            f"strain state outside the admissible ball: s = {worst:.6g} "
            f"with beta = {beta:.6g}, alpha = {alpha:.6g}"
        )
    out = (1.0 - core) ** (-1.0 / alpha)
    return out if s_arr.ndim else float(out)


def psi_clamped(s, beta, alpha, clamp_delta):
    """psi with s clamped into the admissible ball; returns (values, clamp count).

    Before evaluation, s is reduced where needed so (beta*s)**alpha stays at
    or below 1 - clamp_delta.  The count of clamped entries is reported so
    callers can surface guard activations.
    """
    if not 0.0 < clamp_delta < 1.0:
        raise ValueError(f"clamp_delta must lie in (0, 1), got {clamp_delta}")
    s_arr = np.asarray(s, dtype=float)
    s_max = admissible_radius(beta, alpha, clamp_delta)
    clamped = int(np.count_nonzero(s_arr > s_max))
    if clamped:
        s_arr = np.minimum(s_arr, s_max)
    vals = psi(s_arr, beta, alpha)
    return vals, clamped


def energy_norm_mandel(m, a_e):
    """sqrt(m . A m) for Mandel vectors m of shape (..., 3), A the Mandel matrix of E."""
    q = np.einsum("...i,ij,...j->...", m, a_e, m)
    # q >= 0 up to roundoff since A is positive definite
    return np.sqrt(np.maximum(q, 0.0))


def energy_norm(eps: SymTensor2, model: MaterialModel) -> float:
    """Energy norm s = sqrt(eps : E[eps]) of a strain state."""
    return float(energy_norm_mandel(eps.m, _mandel_pair(model)[0]))


def stress_from_strain(eps: SymTensor2, model: MaterialModel) -> SymTensor2:
    """Stress T = psi(s) * E[eps] of an admissible strain state."""
    a_e = _mandel_pair(model)[0]
    m = eps.m
    s = float(energy_norm_mandel(m, a_e))
    return SymTensor2.from_mandel(psi(s, model.beta, model.alpha) * (a_e @ m))


def strain_from_stress(stress: SymTensor2, model: MaterialModel) -> SymTensor2:
    """Strain eps = K[T] / (1 + (beta*k)**alpha)**(1/alpha), k = sqrt(T : K[T]).

    Exact inverse of :func:`stress_from_strain`; defined for every stress,
    and the result always satisfies beta * energy_norm(eps) < 1.
    """
    a_e, a_k = _mandel_pair(model)
    m = stress.m
    kt = a_k @ m
    k = math.sqrt(max(float(m @ kt), 0.0))
    denom = (1.0 + (model.beta * k) ** model.alpha) ** (1.0 / model.alpha)
    result = SymTensor2.from_mandel(kt / denom)
    if model.beta > 0.0:
        # for enormous stresses the rounded result can land exactly on the
        # ball boundary, which the forward map rejects; back off by ulps,
        # checking the component representation callers will hand back
        shrink = 1.0 - 4.0 * np.finfo(float).eps
        while model.beta * float(energy_norm_mandel(result.m, a_e)) >= 1.0:
            result = SymTensor2(result.t11 * shrink, result.t22 * shrink,
                                result.t12 * shrink)
    return result


def energy_density(eps: SymTensor2, model: MaterialModel) -> float:
    """Strain energy density T : eps = psi(s) * s**2."""
    s = energy_norm(eps, model)
    return psi(s, model.beta, model.alpha) * s * s
