"""Readout statistics, resolution, decoherence and steering.

Conventions: ``P[m, a]`` is the probability of outcome ``m`` given
eigenstate ``a``; pair matrices are indexed by eigenstate position; a
readout is an isometry ``W`` whose rows are the outcome bras ``<m|W``.
"""

from dataclasses import dataclass, field
import enum

import numpy as np

from .core import (
    DEFAULT_TOL,
    DensityMatrix,
    as_matrix,
    isometry_deviation,
    validate_density,
)
from .errors import DimensionError, NotIsometry, PositivityViolation, UndefinedEntry, ValidationError
from .interaction import gram


@dataclass(frozen=True)
class ReadoutStrategy:
    """Orthonormal readout of a (possibly enlarged) meter.

    Attributes
    ----------
    embed : ndarray, shape (M, d)
        Isometry ``W``; row ``m`` is the outcome bra ``<m|W``.
    labels : tuple
        Outcome labels, ``0..M-1`` by default.
    name : str
    """

    embed: np.ndarray
    labels: tuple = ()
    name: str = "readout"

    @property
    def outcomes(self):
        return self.embed.shape[0]

    @property
    def dim(self):
        return self.embed.shape[1]

    def kets(self):
        """Outcome kets ``W^dagger |m>`` in the meter space, one per row."""
        return self.embed.conj()


def readout(embed, name="readout", labels=None, tol=DEFAULT_TOL.validity):
    """Validate an isometry and wrap it as a :class:`ReadoutStrategy`."""
    w = as_matrix(embed, "readout embedding")
    if w.shape[0] < w.shape[1]:
        raise NotIsometry("readout has fewer outcomes than the meter dimension",
                          shape=list(w.shape))
    dev = isometry_deviation(w)
    if dev > tol:
        raise NotIsometry("readout embedding is not an isometry", max_deviation=dev, tol=tol)
    if labels is None:
        labels = tuple(range(w.shape[0]))
    w = w.copy()
    w.setflags(write=False)
    return ReadoutStrategy(w, tuple(labels), name)


def basis_readout(kets, name="basis", tol=DEFAULT_TOL.validity):
    """Readout in the orthonormal basis given as a list of kets."""
    return readout(np.conj(as_matrix(kets, "readout basis")), name, tol=tol)


def computational_readout(d, name="computational"):
    return readout(np.eye(d), name)


@dataclass(frozen=True)
class CondProbTable:
    """Conditional probabilities ``p[m, a] = P(m|a)``."""

    p: np.ndarray
    outcome_labels: tuple
    labels: tuple


class PairKind(str, enum.Enum):
    RESOLUTION = "resolution"
    DECOHERENCE = "decoherence"
    IRREVERSIBLE = "irreversible"


@dataclass(frozen=True)
class PairMatrix:
    """Symmetric real matrix over eigenstate pairs with zero diagonal.

    Undefined entries (state-based irreversible decoherence at vanishing
    input coherence) are stored as NaN.
    """

    values: np.ndarray
    kind: PairKind
    labels: tuple
    name: str = ""

    def entry(self, i, j):
        v = float(self.values[i, j])
        if np.isnan(v):
            raise UndefinedEntry("pair entry is undefined (vanishing input coherence)",
                                 pair=[i, j], kind=self.kind.value)
        return v

    @property
    def defined(self):
        return ~np.isnan(self.values)

    def pairs(self):
        """Yield ``(i, j, value)`` for ``i < j``."""
        n = self.values.shape[0]
        for i in range(n):
            for j in range(i + 1, n):
                yield i, j, float(self.values[i, j])


def _pair_matrix(values, kind, labels, name=""):
    values = np.array(values, dtype=float)
    np.fill_diagonal(values, 0.0)
    values.setflags(write=False)
    return PairMatrix(values, kind, tuple(labels), name)


def amplitudes(mi, r):
    """Readout amplitudes ``A[m, a] = <m|W|phi(a)>``."""
    if r.dim != mi.dim:
        raise DimensionError("readout does not act on the meter space",
                             readout_dim=r.dim, meter_dim=mi.dim)
    return r.embed @ mi.phi.T


def cond_probs(mi, r, tol=DEFAULT_TOL):
    """Conditional outcome probabilities ``P(m|a) = |<m|W|phi(a)>|^2``."""
    p = np.abs(amplitudes(mi, r)) ** 2
    lo, hi = -tol.zero_probability, 1 + tol.zero_probability
    if p.min() < lo or p.max() > hi:
        raise ValidationError("conditional probability out of range",
                              min=float(p.min()), max=float(p.max()))
    p = np.clip(p, 0.0, 1.0)
    sums = p.sum(axis=0)
    dev = float(np.max(np.abs(sums - 1.0)))
    if dev > tol.validity:
        raise ValidationError("conditional probabilities do not sum to 1",
                              max_deviation=dev, tol=tol.validity)
    p.setflags(write=False)
    return CondProbTable(p, r.labels, mi.labels)


def bhattacharyya(p):
    """Matrix of Bhattacharyya coefficients ``sum_m sqrt(P(m|a1) P(m|a2))``."""
    s = np.sqrt(p.p)
    return s.T @ s


def resolution(p, name=""):
    """Squared Hellinger distance between the columns of a probability table.

    ``R(a1, a2) = 1/2 sum_m (sqrt(P(m|a1)) - sqrt(P(m|a2)))^2``.
    """
    s = np.sqrt(p.p)
    diff = s[:, :, None] - s[:, None, :]
    r = 0.5 * np.sum(diff ** 2, axis=0)
    return _pair_matrix(np.clip(r, 0.0, 1.0), PairKind.RESOLUTION, p.labels, name)


def irreversible_decoherence(p, name="", tol=DEFAULT_TOL):
    """Irreversible decoherence ``1 - sum_m sqrt(P(m|a1) P(m|a2))``.

    Computed through the Bhattacharyya coefficient and cross-checked
    against :func:`resolution`, which uses the Hellinger form.
    """
    d = np.clip(1.0 - bhattacharyya(p), 0.0, 1.0)
    out = _pair_matrix(d, PairKind.IRREVERSIBLE, p.labels, name)
    gap = float(np.max(np.abs(out.values - resolution(p).values)))
    if gap > 1e-12 * max(1, p.p.shape[0]):
        raise ValidationError("irreversible decoherence and resolution disagree", gap=gap)
    return out


def decoherence(g, name=""):
    """Decoherence ``D(a1, a2) = 1 - |<phi(a2)|phi(a1)>|`` of a Gram matrix."""
    return _pair_matrix(np.clip(1.0 - np.abs(g.g), 0.0, 1.0), PairKind.DECOHERENCE,
                        g.labels, name)


def _as_density(rho_in, n, tol):
    if isinstance(rho_in, DensityMatrix):
        rho = rho_in.matrix
    else:
        rho = validate_density(rho_in, tol.validity).matrix
    if rho.shape[0] != n:
        raise DimensionError("input state dimension does not match number of eigenstates",
                             state_dim=rho.shape[0], eigenstates=n)
    return rho


def output_density(mi, rho_in, tol=DEFAULT_TOL):
    """Unconditioned system state after the interaction.

    ``<a1|rho_out|a2> = <phi(a2)|phi(a1)> <a1|rho_in|a2>``, applied
    elementwise to pure or mixed inputs.
    """
    rho = _as_density(rho_in, mi.n, tol)
    g = gram(mi).g
    return validate_density(rho * g.T, tol.validity, mi.labels)


@dataclass(frozen=True)
class ConditionalOutput:
    """Outcome ``m`` with probability ``p(m)`` and conditional system state.

    ``rho`` is None when ``p(m)`` is at or below the zero-probability
    threshold.
    """

    outcome: object
    prob: float
    rho: DensityMatrix = None
    amplitudes: np.ndarray = field(default=None, repr=False, compare=False)


def conditional_outputs(mi, r, rho_in, tol=DEFAULT_TOL):
    """Conditional system states for every readout outcome.

    ``<a1|rho_cond(m)|a2> = <phi(a2)|m><m|phi(a1)> <a1|rho_in|a2> / p(m)``
    with ``p(m) = sum_a P(m|a) <a|rho_in|a>``.
    """
    rho = _as_density(rho_in, mi.n, tol)
    amp = amplitudes(mi, r)
    populations = np.real(np.diag(rho))
    probs = np.clip(np.abs(amp) ** 2 @ populations, 0.0, None)
    outs = []
    for m, label in enumerate(r.labels):
        pm = float(probs[m])
        if pm <= tol.zero_probability:
            outs.append(ConditionalOutput(label, pm, None, amp[m]))
            continue
        cond = np.outer(amp[m], amp[m].conj()) * rho / pm
        outs.append(ConditionalOutput(label, pm,
                                      validate_density(cond, tol.validity, mi.labels),
                                      amp[m]))
    total = sum(o.prob for o in outs)
    if abs(total - 1.0) > tol.validity:
        raise ValidationError("outcome probabilities do not sum to 1", total=total)
    return outs


def average_conditional_state(outs):
    """``sum_m p(m) rho_cond(m)`` over outcomes with nonzero probability."""
    live = [o for o in outs if o.rho is not None]
    return sum(o.prob * o.rho.matrix for o in live)


def irreversible_decoherence_from_states(outs, rho_in, name="", tol=DEFAULT_TOL):
    """Irreversible decoherence from the conditional output states.

    ``1 - sum_m p(m) |<a1|rho_cond(m)|a2>| / |<a1|rho_in|a2>|``. Entries
    whose input coherence is at or below the zero-probability threshold
    are undefined (NaN).
    """
    live = [o for o in outs if o.rho is not None]
    if not live:
        raise ValidationError("no outcome with nonzero probability")
    n = live[0].rho.dim
    rho = _as_density(rho_in, n, tol)
    avg = sum(o.prob * np.abs(o.rho.matrix) for o in live)
    coh = np.abs(rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(coh > tol.zero_probability, 1.0 - avg / coh, np.nan)
    d = np.where(np.isnan(d), d, np.clip(d, 0.0, 1.0))
    return _pair_matrix(d, PairKind.IRREVERSIBLE, live[0].rho.labels, name)


def positivity_excess(outs):
    """Largest ``|rho[a1,a2]| - sqrt(rho[a1,a1] rho[a2,a2])`` over outcomes.

    Returns ``(excess, outcome, pair)`` for the worst entry.
    """
    worst = (-np.inf, None, None)
    for o in outs:
        if o.rho is None:
            continue
        m = o.rho.matrix
        diag = np.clip(np.real(np.diag(m)), 0.0, None)
        excess = np.abs(m) - np.sqrt(np.outer(diag, diag))
        k = int(np.argmax(excess))
        if excess.flat[k] > worst[0]:
            i, j = np.unravel_index(k, excess.shape)
            worst = (float(excess.flat[k]), o.outcome, (int(i), int(j)))
    return worst


def check_positivity(outs, tol=DEFAULT_TOL):
    """Require ``|rho[a1,a2]| <= sqrt(rho[a1,a1] rho[a2,a2])`` for every outcome."""
    excess, outcome, pair = positivity_excess(outs)
    if excess > tol.validity:
        raise PositivityViolation("conditional state coherence exceeds its bound",
                                  outcome=outcome, pair=list(pair), excess=excess)
    return excess


def steering_averages(outs, rho_in, pair, tol=DEFAULT_TOL):
    """Outcome-averaged root diagonal product and coherence for one pair.

    Returns
    -------
    avg_root_diag : float
        ``sum_m p(m) sqrt(rho_cond(m)[a1,a1] rho_cond(m)[a2,a2])``, which
        equals ``(1 - R) sqrt(rho_in[a1,a1] rho_in[a2,a2])``.
    avg_coherence : float
        ``sum_m p(m) |rho_cond(m)[a1,a2]|``, which equals
        ``(1 - D_irr) |rho_in[a1,a2]|``.
    """
    check_positivity(outs, tol)
    i, j = pair
    root = 0.0
    coh = 0.0
    for o in outs:
        if o.rho is None:
            continue
        m = o.rho.matrix
        root += o.prob * np.sqrt(max(m[i, i].real, 0.0) * max(m[j, j].real, 0.0))
        coh += o.prob * abs(m[i, j])
    return float(root), float(coh)


@dataclass(frozen=True)
class SteeringReport:
    pair: tuple
    resolution_r: float
    irreversible_c: float
    violation: bool
    margin: float
    readout_r: str = "r"
    readout_c: str = "c"


def steering_report(mi, readout_r, readout_c, pair, margin=None, tol=DEFAULT_TOL):
    """Compare the resolution of one readout with the irreversible decoherence of another.

    A violation ``R_r > D_irr,c + margin`` certifies that the two readouts
    cannot be explained by a single set of conditional states, i.e. that
    the interaction produced system-meter entanglement.
    """
    margin = tol.violation_margin if margin is None else margin
    i, j = pair
    r_val = resolution(cond_probs(mi, readout_r, tol)).values[i, j]
    d_val = irreversible_decoherence(cond_probs(mi, readout_c, tol), tol=tol).values[i, j]
    return SteeringReport((i, j), float(r_val), float(d_val),
                          bool(r_val - d_val > margin), margin,
                          readout_r.name, readout_c.name)
