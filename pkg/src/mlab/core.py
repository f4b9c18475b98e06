"""Dense complex linear algebra primitives and state validity checks.

Vectors and matrices are plain complex ``numpy`` arrays. Validated
quantities (density matrices) are wrapped in small frozen dataclasses so
that downstream code can rely on their invariants.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    NotHermitian,
    NotNormalized,
    NotPositive,
    NotUnitary,
    TraceNotOne,
)


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances used across the package.

    Attributes
    ----------
    validity : float
        Hermiticity, positivity, trace, unitarity and normalization checks.
    reconstruction : float
        Eigendecomposition reconstruction and cross-checks between two
        independent evaluation paths.
    optimization : float
        Target residual of the nonnegative factorization.
    zero_probability : float
        Outcome probabilities at or below this value are treated as zero.
    violation_margin : float
        Margin applied before a steering violation is reported.
    """

    validity: float = 1e-10
    reconstruction: float = 1e-9
    optimization: float = 1e-8
    zero_probability: float = 1e-12
    violation_margin: float = 1e-9


DEFAULT_TOL = ToleranceConfig()


def as_vector(x, name="vector"):
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise DimensionError(f"{name} must be a non-empty 1-d array", shape=list(v.shape))
    return v


def as_matrix(m, name="matrix"):
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.size < 1:
        raise DimensionError(f"{name} must be a non-empty 2-d array", shape=list(a.shape))
    return a


def as_square(m, name="matrix"):
    a = as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square", shape=list(a.shape))
    return a


def inner(x, y):
    """Return the inner product ``<x|y> = sum(conj(x_i) * y_i)``."""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    if x.shape != y.shape:
        raise DimensionError("inner product of vectors with different dimensions",
                             dims=[x.size, y.size])
    return complex(np.vdot(x, y))


def hermitian_deviation(m):
    return float(np.max(np.abs(m - m.conj().T)))


def hermitize(m, tol=DEFAULT_TOL.validity):
    """Return ``(m + m^dagger) / 2``, refusing inputs further than `tol` from Hermitian."""
    m = as_square(m)
    dev = hermitian_deviation(m)
    if dev > tol:
        raise NotHermitian("matrix is not Hermitian", max_deviation=dev, tol=tol)
    return 0.5 * (m + m.conj().T)


def hermitian_eig(m, tol=DEFAULT_TOL.validity):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Square complex matrix, Hermitian within `tol` (max elementwise
        deviation). It is symmetrized before decomposition.
    tol : float
        Hermiticity tolerance.

    Returns
    -------
    eigenvalues : ndarray
        Real eigenvalues in ascending order.
    vectors : ndarray
        Unitary matrix whose columns are the matching eigenvectors, so that
        ``m = V @ diag(eigenvalues) @ V^dagger``.
    """
    h = hermitize(m, tol)
    w, v = np.linalg.eigh(h)
    return w, v


def unitarity_deviation(u):
    u = as_square(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def check_unitary(u, tol=DEFAULT_TOL.validity, name="matrix"):
    u = as_square(u, name)
    dev = unitarity_deviation(u)
    if dev > tol:
        raise NotUnitary(f"{name} is not unitary", max_deviation=dev, tol=tol)
    return u


def isometry_deviation(w):
    w = as_matrix(w)
    return float(np.max(np.abs(w.conj().T @ w - np.eye(w.shape[1]))))


def check_normalized(v, tol=DEFAULT_TOL.validity, name="vector"):
    v = as_vector(v, name)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > tol:
        raise NotNormalized(f"{name} does not have unit norm", norm=norm, tol=tol)
    return v


@dataclass(frozen=True)
class DensityMatrix:
    """A validated density matrix in the eigenbasis of the target observable."""

    matrix: np.ndarray
    labels: tuple = field(default=())

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(self.matrix.shape[0])))
        self.matrix.setflags(write=False)


def validate_density(rho, tol=DEFAULT_TOL.validity, labels=()):
    """Check that `rho` is a density matrix and wrap it.

    Raises
    ------
    NotHermitian, NotPositive, TraceNotOne
        Naming the worst offending value.
    """
    rho = as_square(rho, "density matrix")
    dev = hermitian_deviation(rho)
    if dev > tol:
        raise NotHermitian("density matrix is not Hermitian", max_deviation=dev, tol=tol)
    h = 0.5 * (rho + rho.conj().T)
    w = np.linalg.eigvalsh(h)
    if w[0] < -tol:
        raise NotPositive("density matrix has a negative eigenvalue",
                          min_eigenvalue=float(w[0]), tol=tol)
    tr = float(np.trace(h).real)
    if abs(tr - 1.0) > tol:
        raise TraceNotOne("density matrix trace differs from 1", trace=tr, tol=tol)
    if labels and len(labels) != h.shape[0]:
        raise DimensionError("label count does not match density matrix size",
                             labels=len(labels), dim=h.shape[0])
    return DensityMatrix(h, tuple(labels))


def pure_density(psi, tol=DEFAULT_TOL.validity, labels=()):
    psi = check_normalized(psi, tol, "state vector")
    return validate_density(np.outer(psi, psi.conj()), tol, labels)


def fidelity_pure(psi, rho):
    """Fidelity ``<psi|rho|psi>`` of a density matrix with a pure state."""
    psi = as_vector(psi)
    return float(np.real(np.vdot(psi, np.asarray(rho) @ psi)))


def trace_distance(rho, sigma):
    w = np.linalg.eigvalsh(hermitize(np.asarray(rho) - np.asarray(sigma), tol=np.inf))
    return 0.5 * float(np.sum(np.abs(w)))
