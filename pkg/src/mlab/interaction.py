"""Stage-I measurement interactions.

An interaction is fully described by its conditional meter states
``|phi(a)> = U_M(a) |Phi_0>``, one per eigenstate ``|a>`` of the target
observable. Three constructions are provided: explicit conditional
unitaries, a product Hamiltonian ``A (x) B``, and a symmetric two-part
meter whose inner products are real and nonnegative by construction.
"""

from dataclasses import dataclass, field
import warnings

import numpy as np

from .core import (
    DEFAULT_TOL,
    as_matrix,
    as_square,
    as_vector,
    check_normalized,
    check_unitary,
)
from .errors import DimensionError, NotHermitian, NotNormalized, NotPositive, ValidationError


class DegenerateLabelsWarning(UserWarning):
    """Two eigenstates share the same eigenvalue of the target observable."""


@dataclass(frozen=True)
class MeasurementInteraction:
    """Conditional meter states indexed by eigenstate label.

    Attributes
    ----------
    labels : tuple
        Eigenvalue labels ``A_a`` of the target observable, one per state.
    phi : ndarray, shape (n, d)
        Row ``i`` is the conditional meter state for ``labels[i]``.
    unitaries : ndarray or None, shape (n, d, d)
        Conditional unitaries, when the construction provides them. Used
        to look for eraser readouts.
    degenerate : bool
        Set when two labels carry the same numeric value.
    kind : str
        Name of the construction that produced the interaction.
    """

    labels: tuple
    phi: np.ndarray
    unitaries: np.ndarray = None
    degenerate: bool = False
    kind: str = "states"
    params: dict = field(default_factory=dict, compare=False)

    @property
    def n(self):
        return self.phi.shape[0]

    @property
    def dim(self):
        return self.phi.shape[1]

    def state(self, i):
        return self.phi[i]


def _labels_degenerate(labels):
    try:
        values = [float(x) for x in labels]
    except (TypeError, ValueError):
        values = list(labels)
    return len(set(values)) != len(values)


def from_states(states, labels=None, unitaries=None, kind="states", params=None,
                tol=DEFAULT_TOL.validity):
    """Build an interaction directly from conditional meter states."""
    phi = as_matrix(states, "conditional states")
    n, d = phi.shape
    if n < 2:
        raise DimensionError("an interaction needs at least two eigenstates", n=n)
    norms = np.linalg.norm(phi, axis=1)
    worst = int(np.argmax(np.abs(norms - 1.0)))
    if abs(norms[worst] - 1.0) > tol:
        raise NotNormalized("conditional meter state does not have unit norm",
                            index=worst, norm=float(norms[worst]), tol=tol)
    if labels is None:
        labels = tuple(range(n))
    labels = tuple(labels)
    if len(labels) != n:
        raise DimensionError("label count does not match number of states",
                             labels=len(labels), states=n)
    degenerate = _labels_degenerate(labels)
    if degenerate:
        warnings.warn(f"degenerate eigenvalue labels {labels}; pairs are still "
                      "indexed per eigenstate", DegenerateLabelsWarning, stacklevel=2)
    phi = phi.copy()
    phi.setflags(write=False)
    if unitaries is not None:
        unitaries = np.array(unitaries, dtype=complex)
        unitaries.setflags(write=False)
    return MeasurementInteraction(labels, phi, unitaries, degenerate, kind, dict(params or {}))


def from_conditional_unitaries(unitaries, initial_meter, labels=None,
                               tol=DEFAULT_TOL.validity):
    """Apply each conditional unitary ``U_M(a)`` to the initial meter state.

    Parameters
    ----------
    unitaries : sequence of (d, d) arrays
    initial_meter : (d,) array
        Unit-norm initial meter state ``|Phi_0>``.
    labels : sequence, optional
        Eigenvalue labels; defaults to ``0..n-1``.
    """
    psi0 = check_normalized(as_vector(initial_meter, "initial meter state"), tol,
                            "initial meter state")
    us = [as_square(u, f"unitary {i}") for i, u in enumerate(unitaries)]
    if labels is not None and len(labels) != len(us):
        raise DimensionError("label count does not match number of unitaries",
                             labels=len(labels), unitaries=len(us))
    for i, u in enumerate(us):
        if u.shape[0] != psi0.size:
            raise DimensionError("unitary dimension does not match meter dimension",
                                 index=i, unitary=u.shape[0], meter=psi0.size)
        check_unitary(u, tol, f"unitary {i}")
    stack = np.stack(us)
    phi = stack @ psi0
    return from_states(phi, labels, stack, "conditional-unitaries", tol=tol)


@dataclass(frozen=True)
class ProductHamiltonianSpec:
    """Interaction ``H = A (x) B`` acting for a scaled time ``t/hbar``.

    ``initial_meter`` is given in the eigenbasis of ``B``.
    """

    a_values: tuple
    b_values: tuple
    initial_meter: np.ndarray
    effective_time: float

    def __post_init__(self):
        psi0 = as_vector(self.initial_meter, "initial meter state")
        if psi0.size != len(self.b_values):
            raise DimensionError("initial meter dimension must equal number of B eigenvalues",
                                 meter=psi0.size, b_values=len(self.b_values))
        check_normalized(psi0, DEFAULT_TOL.validity, "initial meter state")
        object.__setattr__(self, "initial_meter", psi0)
        object.__setattr__(self, "a_values", tuple(float(a) for a in self.a_values))
        object.__setattr__(self, "b_values", tuple(float(b) for b in self.b_values))


def from_product_hamiltonian(spec):
    """Conditional states ``phi(a)[b] = exp(-i A_a B_b t) <b|Phi_0>``."""
    a = np.asarray(spec.a_values)
    b = np.asarray(spec.b_values)
    phases = np.exp(-1j * np.outer(a, b) * spec.effective_time)
    phi = phases * spec.initial_meter[None, :]
    unitaries = np.stack([np.diag(row) for row in phases])
    return from_states(phi, spec.a_values, unitaries, "product-hamiltonian",
                       params={"b_values": spec.b_values,
                               "effective_time": spec.effective_time})


@dataclass(frozen=True)
class TwoPartMeterSpec:
    """Meter split into two identical parts coupled with opposite signs.

    ``dist`` is the common distribution ``|<v|Phi_P1>|^2 = |<v|Phi_P2>|^2``
    over the eigenvalues ``v_values`` of ``V_P1`` and ``V_P2``.
    """

    a_values: tuple
    v_values: tuple
    dist: np.ndarray
    effective_time: float

    def __post_init__(self):
        p = np.asarray(self.dist, dtype=float)
        if p.ndim != 1 or p.size != len(self.v_values):
            raise DimensionError("dist must have one entry per V eigenvalue",
                                 dist=p.size, v_values=len(self.v_values))
        if np.any(p < 0):
            raise ValidationError("dist entries must be nonnegative", dist=p.tolist())
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError("dist must sum to 1", total=float(p.sum()))
        object.__setattr__(self, "dist", p)
        object.__setattr__(self, "a_values", tuple(float(a) for a in self.a_values))
        object.__setattr__(self, "v_values", tuple(float(v) for v in self.v_values))


def from_two_part_meter(spec):
    """Product conditional states ``phi_P1(a) (x) phi_P2(a)``.

    Each part starts in ``sum_v sqrt(dist_v) |v>``; part 1 acquires the
    phase ``exp(-i A_a V_v t)`` and part 2 the opposite phase, so that the
    two inner-product factors are complex conjugates and the Gram matrix
    is real and nonnegative. The meter basis is ``|v1> (x) |v2>``.
    """
    a = np.asarray(spec.a_values)
    v = np.asarray(spec.v_values)
    amp = np.sqrt(spec.dist)
    p1 = np.exp(-1j * np.outer(a, v) * spec.effective_time) * amp
    p2 = np.exp(+1j * np.outer(a, v) * spec.effective_time) * amp
    phi = np.stack([np.kron(x, y) for x, y in zip(p1, p2)])
    # B = V_P1 - V_P2 is diagonal in the product basis.
    b = (v[:, None] - v[None, :]).ravel()
    unitaries = np.stack([np.diag(np.exp(-1j * ai * b * spec.effective_time)) for ai in a])
    return from_states(phi, spec.a_values, unitaries, "two-part-meter",
                       params={"v_values": spec.v_values,
                               "effective_time": spec.effective_time})


@dataclass(frozen=True)
class GramMatrix:
    """Inner products ``g[i, j] = <phi(a_i)|phi(a_j)>``."""

    g: np.ndarray
    labels: tuple

    @property
    def n(self):
        return self.g.shape[0]

    def overlap(self, i, j):
        """``<phi(a_j)|phi(a_i)>``, the factor multiplying ``rho[i, j]``."""
        return complex(self.g[j, i])


def validate_gram(g, labels=None, tol=DEFAULT_TOL.validity):
    g = as_square(g, "Gram matrix")
    dev = float(np.max(np.abs(g - g.conj().T)))
    if dev > tol:
        raise NotHermitian("Gram matrix is not Hermitian", max_deviation=dev, tol=tol)
    diag_dev = float(np.max(np.abs(np.diag(g) - 1.0)))
    if diag_dev > tol:
        raise NotNormalized("Gram matrix diagonal differs from 1", max_deviation=diag_dev,
                            tol=tol)
    w = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
    if w[0] < -tol:
        raise NotPositive("Gram matrix is not positive semidefinite",
                          min_eigenvalue=float(w[0]), tol=tol)
    if np.max(np.abs(g)) > 1 + tol:
        raise ValidationError("Gram entry exceeds 1 in modulus", max_modulus=float(np.max(np.abs(g))))
    if labels is None:
        labels = tuple(range(g.shape[0]))
    g = g.copy()
    g.setflags(write=False)
    return GramMatrix(g, tuple(labels))


def gram(mi):
    """Gram matrix of the conditional meter states."""
    g = mi.phi.conj() @ mi.phi.T
    # Exact unit diagonal and Hermiticity up to rounding.
    g = 0.5 * (g + g.conj().T)
    return validate_gram(g, mi.labels)


def product_hamiltonian_gram(spec):
    """Closed-form Gram ``sum_b exp(-i (A_1 - A_2) B_b t) |<b|Phi_0>|^2``.

    Entry ``[j, i]`` is ``<phi(a_j)|phi(a_i)>`` with ``A_1 = A_i``, ``A_2 = A_j``.
    """
    a = np.asarray(spec.a_values)
    b = np.asarray(spec.b_values)
    w = np.abs(spec.initial_meter) ** 2
    diff = a[None, :] - a[:, None]  # [j, i] -> A_i - A_j
    return np.einsum("jib,b->ji", np.exp(-1j * diff[:, :, None] * b * spec.effective_time), w)


def cnot_partial(theta, initial_meter=(1.0, 0.0)):
    """Qubit meter rotated about Y by ``2*theta`` when the system is in ``|1>``.

    With the default meter state ``|0>`` this gives ``phi(0) = |0>`` and
    ``phi(1) = cos(theta)|0> + sin(theta)|1>``; ``theta = pi/2`` is a full CNOT.
    """
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]], dtype=complex)
    return from_conditional_unitaries([np.eye(2), rot], initial_meter, (0, 1))
