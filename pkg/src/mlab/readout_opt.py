"""Readout synthesis at the two extremes of the trade-off.

* Optimal readouts reach ``R = D`` for every pair. They exist when the
  Gram matrix is real and nonnegative and admits a nonnegative
  factorization ``G = F^T F``; the factor rows are the readout amplitudes.
* Eraser readouts have outcome statistics independent of the eigenstate
  (``R = 0``); the remaining outcome-dependent phases are undone by a
  diagonal feedback unitary on the system.
"""

from dataclasses import dataclass, field

import numpy as np

from .analysis import ConditionalOutput, amplitudes, cond_probs, conditional_outputs, readout
from .core import DEFAULT_TOL, DensityMatrix, validate_density
from .errors import (
    FactorizationNotFound,
    GramNotNonnegative,
    InconsistentFactorization,
    NoEraserFound,
    NotEraser,
)
from .interaction import GramMatrix


@dataclass(frozen=True)
class NonnegFactorization:
    """Entrywise nonnegative ``F`` (outcomes x eigenstates) with ``F^T F ~ G``."""

    f: np.ndarray
    residual: float
    seed: int
    iterations: int
    restart: int
    method: str

    @property
    def outcomes(self):
        return self.f.shape[0]

    def to_dict(self):
        return {
            "f": self.f.tolist(),
            "residual": self.residual,
            "outcomes": self.outcomes,
            "seed": self.seed,
            "iterations": self.iterations,
            "restart": self.restart,
            "method": self.method,
        }


def factorization_residual(f, g):
    """Frobenius norm ``||F^T F - Re(G)||``."""
    g = np.real(np.asarray(g.g if isinstance(g, GramMatrix) else g))
    return float(np.linalg.norm(f.T @ f - g))


def _real_gram(g, tol):
    g = np.asarray(g.g if isinstance(g, GramMatrix) else g, dtype=complex)
    imag = float(np.max(np.abs(g.imag)))
    if imag > tol:
        raise GramNotNonnegative("Gram matrix has complex entries", max_imag=imag, tol=tol)
    re = g.real
    if re.min() < -tol:
        raise GramNotNonnegative("Gram matrix has negative entries", min_entry=float(re.min()),
                                 tol=tol)
    return 0.5 * (re + re.T)


def _gram_root(g):
    """``B`` (rank x n) with ``B^T B = G``, dropping only numerically null directions."""
    w, v = np.linalg.eigh(g)
    keep = w > 1e-15 * max(1.0, float(w.max()))
    return np.sqrt(w[keep])[:, None] * v[:, keep].T


def _alternating(g, m, rng, tol, max_iter):
    # Alternate between the factor set {Q B : Q^T Q = I} and the nonnegative orthant.
    b = _gram_root(g)
    if m < b.shape[0]:
        # Too few outcomes for an exact fit; keep the dominant directions so a residual is reported.
        b = b[-m:]
    r = b.shape[0]
    q, _ = np.linalg.qr(rng.normal(size=(m, r)))
    x = q @ b
    if np.maximum(x, 0).sum() < np.maximum(-x, 0).sum():
        q = -q
    best_f, best_res = None, np.inf
    checkpoint = np.inf
    polish_until = None
    for it in range(1, max_iter + 1):
        f = np.maximum(q @ b, 0.0)
        res = float(np.linalg.norm(f.T @ f - g))
        if res < best_res:
            best_f, best_res = f, res
        if res <= tol and polish_until is None:
            # Keep iterating briefly; convergence is linear so this is cheap.
            polish_until = it + 200
        if polish_until is not None and (it >= polish_until or best_res <= 1e-4 * tol):
            return best_f, best_res, it
        if it % 500 == 0:
            if best_res > 0.999 * checkpoint:
                break
            checkpoint = best_res
        u, _, vh = np.linalg.svd(f @ b.T, full_matrices=False)
        q = u @ vh
    return best_f, best_res, it


def _projected_gradient(g, m, rng, tol, max_iter, grad_tol=1e-10):
    # Minimize ||F^T F - G||^2 over F >= 0 with Armijo backtracking on the projection arc.
    n = g.shape[0]
    f = rng.uniform(size=(m, n))
    f /= np.linalg.norm(f, axis=0)
    err = f.T @ f - g
    obj = float(np.sum(err * err))
    step = 1.0
    for it in range(1, max_iter + 1):
        if np.sqrt(obj) <= tol:
            return f, float(np.sqrt(obj)), it
        grad = 4.0 * f @ err
        while True:
            trial = np.maximum(f - step * grad, 0.0)
            delta = trial - f
            t_err = trial.T @ trial - g
            t_obj = float(np.sum(t_err * t_err))
            if t_obj <= obj - 1e-4 / step * float(np.sum(delta * delta)) or step < 1e-20:
                break
            step *= 0.5
        f, err, obj = trial, t_err, t_obj
        if np.linalg.norm(delta) / step < grad_tol:
            break
        step *= 2.0
    return f, float(np.sqrt(obj)), it


METHODS = {"alternating": _alternating, "projected-gradient": _projected_gradient}


def cp_factorize(g, max_outcomes=None, restarts=32, tol=DEFAULT_TOL.optimization, seed=0,
                 method="alternating", max_iter=None, gram_tol=DEFAULT_TOL.validity):
    """Search for a nonnegative ``F`` with ``F^T F = G``.

    Parameters
    ----------
    g : GramMatrix or array_like
        Real, entrywise nonnegative Gram matrix (within `gram_tol`).
    max_outcomes : int, optional
        Number of rows of ``F``; defaults to ``n (n + 1) / 2``.
    restarts : int
        Independent random starts; the search stops at the first success.
    tol : float
        Required Frobenius residual.
    seed : int
        Restart ``k`` uses the ``k``-th child of ``SeedSequence(seed)``.
    method : {"alternating", "projected-gradient"}
    max_iter : int, optional
        Iteration cap per restart (20000 for alternating projections,
        100000 for projected gradient).

    Raises
    ------
    GramNotNonnegative
        The Gram matrix is not real and nonnegative, so no optimal readout
        exists.
    FactorizationNotFound
        No restart reached `tol`; the best residual is reported.
    """
    gr = _real_gram(g, gram_tol)
    n = gr.shape[0]
    m = n * (n + 1) // 2 if max_outcomes is None else int(max_outcomes)
    if m < 1 or restarts < 1:
        raise FactorizationNotFound("need at least one outcome and one restart",
                                    max_outcomes=m, restarts=restarts)
    run = METHODS[method]
    if max_iter is None:
        max_iter = 20000 if method == "alternating" else 100000
    children = np.random.SeedSequence(seed).spawn(restarts)
    best = None
    for k, child in enumerate(children):
        f, res, iters = run(gr, m, np.random.default_rng(child), tol, max_iter)
        if f is None:
            continue
        res = factorization_residual(f, gr)
        if best is None or res < best[1]:
            best = (f, res, iters, k)
        if res <= tol:
            break
    if best is None or best[1] > tol:
        raise FactorizationNotFound("no nonnegative factorization reached the tolerance",
                                    best_residual=None if best is None else best[1],
                                    tol=tol, restarts=restarts, max_outcomes=m)
    f, res, iters, k = best
    f = f.copy()
    f.setflags(write=False)
    return NonnegFactorization(f, res, seed, iters, k, method)


def optimal_readout(mi, fact, tol=1e-6, name="optimal"):
    """Isometric readout whose amplitudes reproduce a nonnegative factorization.

    Solves ``<m|W|phi(a)> = F[m, a]`` on the span of the conditional
    states, takes the nearest isometry there, and extends it onto the
    orthogonal complement. Extra zero-probability outcomes are appended
    when ``F`` has fewer rows than the meter dimension.

    Raises
    ------
    InconsistentFactorization
        No isometry reproduces ``F`` within `tol`.
    """
    phi = mi.phi.T  # d x n
    f = np.asarray(fact.f, dtype=float)
    m_out, n = f.shape
    d = mi.dim
    if n != mi.n:
        raise InconsistentFactorization("factorization size does not match interaction",
                                        columns=n, eigenstates=mi.n)
    u, s, vh = np.linalg.svd(phi, full_matrices=True)
    r = int(np.sum(s > 1e-10 * s[0]))
    if m_out < r:
        raise InconsistentFactorization("fewer outcomes than the span of the conditional states",
                                        outcomes=m_out, rank=r)
    span = u[:, :r]
    comp = u[:, r:]
    # W span = F V S^-1 on the span, projected to the nearest isometry.
    x = f @ vh[:r].conj().T / s[:r]
    ux, _, vhx = np.linalg.svd(x, full_matrices=False)
    x = ux @ vhx
    total = max(m_out, d)
    xt = np.zeros((total, r), dtype=complex)
    xt[:m_out] = x
    if d > r:
        # Orthonormal completion of the columns of xt.
        full, _ = np.linalg.qr(np.hstack([xt, np.eye(total)]))
        y = full[:, r:d]
        out = xt @ span.conj().T + y @ comp.conj().T
    else:
        out = xt @ span.conj().T
    achieved = out @ phi
    gap = float(np.max(np.abs(achieved[:m_out] - f)))
    leak = float(np.max(np.abs(achieved[m_out:]))) if total > m_out else 0.0
    if max(gap, leak) > tol:
        raise InconsistentFactorization("readout does not reproduce the factorization",
                                        max_deviation=max(gap, leak), tol=tol)
    return readout(out, name, tol=max(DEFAULT_TOL.validity, 1e-9))


def _joint_eigenbasis(mats, rng, tol):
    """Common eigenbasis of pairwise commuting normal matrices."""
    d = mats[0].shape[0]
    herms = []
    for u in mats:
        herms.append(0.5 * (u + u.conj().T))
        herms.append(-0.5j * (u - u.conj().T))

    def refine(basis, depth):
        if basis.shape[1] <= 1 or depth > 3:
            return basis
        weights = rng.normal(size=len(herms))
        h = sum(w * (basis.conj().T @ m @ basis) for w, m in zip(weights, herms))
        h = 0.5 * (h + h.conj().T)
        vals, vecs = np.linalg.eigh(h)
        cols = []
        start = 0
        scale = max(1.0, float(np.max(np.abs(vals))))
        for k in range(1, len(vals) + 1):
            if k == len(vals) or vals[k] - vals[k - 1] > 1e-8 * scale:
                block = basis @ vecs[:, start:k]
                if k - start > 1:
                    # Degenerate block: split again only if some matrix is not scalar on it.
                    if any(np.max(np.abs(block.conj().T @ m @ block
                                         - np.trace(block.conj().T @ m @ block) / (k - start)
                                         * np.eye(k - start))) > tol for m in herms):
                        block = refine(block, depth + 1)
                cols.append(block)
                start = k
        return np.hstack(cols)

    return refine(np.eye(d, dtype=complex), 0)


def eraser_readout(mi, tol=DEFAULT_TOL.validity, seed=12345, name="eraser"):
    """Readout whose outcome probabilities do not depend on the eigenstate.

    For commuting conditional unitaries, their common eigenbasis is an
    eraser: ``|<m|U(a)|Phi_0>|^2 = |<m|Phi_0>|^2`` for every ``a``.

    Raises
    ------
    NoEraserFound
        The interaction carries no conditional unitaries, they do not
        commute, or the resulting basis fails the eigenstate-independence
        check.
    """
    us = mi.unitaries
    if us is None:
        raise NoEraserFound("interaction has no conditional unitaries to diagonalize")
    worst = 0.0
    for i in range(len(us)):
        for j in range(i + 1, len(us)):
            worst = max(worst, float(np.max(np.abs(us[i] @ us[j] - us[j] @ us[i]))))
    if worst > tol:
        raise NoEraserFound("conditional unitaries do not commute", max_commutator=worst,
                            tol=tol)
    if all(np.max(np.abs(u - np.diag(np.diag(u)))) <= tol for u in us):
        basis = np.eye(mi.dim, dtype=complex)
    else:
        basis = _joint_eigenbasis(list(us), np.random.default_rng(seed), tol)
    for u in us:
        off = basis.conj().T @ u @ basis
        dev = float(np.max(np.abs(off - np.diag(np.diag(off)))))
        if dev > 1e-8:
            raise NoEraserFound("joint diagonalization failed", max_offdiagonal=dev)
    r = readout(basis.conj().T, name)
    spread = _eraser_spread(mi, r)
    if spread > tol:
        raise NoEraserFound("outcome statistics depend on the eigenstate", max_spread=spread,
                            tol=tol)
    return r


def _eraser_spread(mi, r):
    p = cond_probs(mi, r).p
    return float(np.max(p.max(axis=1) - p.min(axis=1)))


@dataclass(frozen=True)
class FeedbackCorrection:
    """Diagonal system unitaries ``diag(exp(-i theta_m(a)))``, one per outcome."""

    phases: np.ndarray  # outcomes x eigenstates, theta_m(a)
    labels: tuple = field(default=())

    def unitary(self, m):
        return np.diag(np.exp(-1j * self.phases[m]))

    def apply(self, m, rho):
        u = self.unitary(m)
        return u @ np.asarray(rho) @ u.conj().T


def feedback_correction(mi, r, tol=DEFAULT_TOL.validity):
    """Phase feedback undoing the outcome-dependent phases of an eraser readout.

    Raises
    ------
    NotEraser
        Outcome probabilities of `r` depend on the eigenstate.
    """
    spread = _eraser_spread(mi, r)
    if spread > tol:
        raise NotEraser("readout is not an eraser for this interaction", max_spread=spread,
                        tol=tol)
    amp = amplitudes(mi, r)
    phases = np.where(np.abs(amp) > 1e-12, np.angle(amp), 0.0)
    phases.setflags(write=False)
    return FeedbackCorrection(phases, r.labels)


def corrected_outputs(outs, fb):
    """Apply the feedback unitary of each outcome to its conditional state."""
    fixed = []
    for m, o in enumerate(outs):
        if o.rho is None:
            fixed.append(o)
            continue
        rho = validate_density(fb.apply(m, o.rho.matrix), labels=o.rho.labels)
        fixed.append(ConditionalOutput(o.outcome, o.prob, rho, o.amplitudes))
    return fixed


def corrected_channel(mi, r, fb, rho_in):
    """Outcome-averaged state after readout and feedback: ``sum_m p(m) U_m rho_m U_m^dagger``."""
    outs = conditional_outputs(mi, r, rho_in)
    acc = sum(o.prob * o.rho.matrix for o in corrected_outputs(outs, fb) if o.rho is not None)
    return DensityMatrix(np.asarray(acc), tuple(mi.labels))
