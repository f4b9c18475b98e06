"""Randomized cross-checks of the resolution and decoherence relations.

Random draws use numpy's PCG64 generator. Trial ``k`` of a suite is
seeded with the ``k``-th child of ``SeedSequence(seed)``, so every trial
can be reproduced on its own and trials can run in any order.
"""

from dataclasses import asdict, dataclass
import time

import numpy as np

from . import analysis
from .analysis import readout
from .core import DEFAULT_TOL, pure_density, validate_density
from .errors import BoundViolated, ValidationError
from .interaction import from_states, gram

RNG_ALGORITHM = "numpy.PCG64 via SeedSequence(seed).spawn(trials)"


@dataclass(frozen=True)
class RandomSuiteConfig:
    seed: int = 20240601
    trials: int = 1000
    n_range: tuple = (2, 4)
    d_range: tuple = (2, 5)
    haar_samples: int = 10

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be at least 1", trials=self.trials)
        for name in ("n_range", "d_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValidationError(f"{name} is empty", range=[lo, hi])
        if self.n_range[0] < 2 or self.d_range[0] < 1:
            raise ValidationError("need n >= 2 and d >= 1", n_range=list(self.n_range),
                                  d_range=list(self.d_range))
        if self.haar_samples < 1:
            raise ValidationError("haar_samples must be at least 1",
                                  haar_samples=self.haar_samples)

    def rngs(self):
        return [np.random.default_rng(c)
                for c in np.random.SeedSequence(self.seed).spawn(self.trials)]


def _rng(source):
    if isinstance(source, np.random.Generator):
        return source
    if isinstance(source, RandomSuiteConfig):
        return np.random.default_rng(source.seed)
    return np.random.default_rng(source)


def random_state(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_interaction(source, n, d):
    """``n`` Haar-random conditional meter states in dimension ``d``."""
    rng = _rng(source)
    return from_states(np.stack([random_state(rng, d) for _ in range(n)]))


def haar_unitary(rng, d):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_readout(source, d, name="haar"):
    """Readout in the basis given by the columns of a Haar-random unitary."""
    u = haar_unitary(_rng(source), d)
    return readout(u.conj().T, name)


def random_density(rng, n, rank=None):
    rank = n if rank is None else rank
    u = haar_unitary(rng, n)
    p = rng.dirichlet(np.ones(rank))
    p = np.concatenate([p, np.zeros(n - rank)])
    return validate_density((u * p) @ u.conj().T)


def _offdiag_max(m):
    iu = np.triu_indices(m.shape[0], 1)
    return float(np.max(m[iu]))


def _trial(rng, cfg, tol):
    n = int(rng.integers(cfg.n_range[0], cfg.n_range[1] + 1))
    d = int(rng.integers(cfg.d_range[0], cfg.d_range[1] + 1))
    mi = random_interaction(rng, n, d)
    g = gram(mi)
    dmat = analysis.decoherence(g).values
    pure = pure_density(random_state(rng, n))
    mixed = random_density(rng, n)
    out = {"n": n, "d": d, "bound": -np.inf, "tradeoff": 0.0, "reversible": 0.0,
           "positivity": -np.inf, "diagonal": 0.0}
    rho_outs = {id(rho): analysis.output_density(mi, rho).matrix for rho in (pure, mixed)}
    for rho in (pure, mixed):
        out["diagonal"] = max(out["diagonal"], float(np.max(np.abs(
            np.diag(rho_outs[id(rho)]) - np.diag(rho.matrix)))))
    for _ in range(cfg.haar_samples):
        r = haar_readout(rng, d)
        p = analysis.cond_probs(mi, r)
        rmat = analysis.resolution(p).values
        out["bound"] = max(out["bound"], _offdiag_max(rmat - dmat))
        for rho in (pure, mixed):
            outs = analysis.conditional_outputs(mi, r, rho)
            avg = analysis.average_conditional_state(outs)
            out["reversible"] = max(out["reversible"],
                                    float(np.max(np.abs(avg - rho_outs[id(rho)]))))
            dstate = analysis.irreversible_decoherence_from_states(outs, rho).values
            ok = ~np.isnan(dstate)
            if ok.any():
                out["tradeoff"] = max(out["tradeoff"], float(np.max(np.abs(dstate - rmat)[ok])))
            out["positivity"] = max(out["positivity"], analysis.positivity_excess(outs)[0])
    return out


def invariant_suite(cfg=None, tol=DEFAULT_TOL):
    """Run the random suite and collect worst-case deviations.

    Checked per trial, with ``haar_samples`` readouts and one pure and one
    mixed input state each: ``R <= D``; the state-based irreversible
    decoherence equals ``R``; the outcome average of the conditional
    states equals the unconditioned output; per-outcome positivity; the
    interaction leaves populations unchanged.
    """
    cfg = cfg or RandomSuiteConfig()
    start = time.perf_counter()
    worst = {"bound": (-np.inf, None), "tradeoff": (0.0, None), "reversible": (0.0, None),
             "positivity": (-np.inf, None), "diagonal": (0.0, None)}
    for k, rng in enumerate(cfg.rngs()):
        res = _trial(rng, cfg, tol)
        for key in worst:
            if res[key] > worst[key][0]:
                worst[key] = (res[key], k)
    limits = {"bound": tol.validity, "tradeoff": tol.reconstruction,
              "reversible": tol.validity, "positivity": tol.validity, "diagonal": 1e-12}
    checks = {key: {"worst": float(worst[key][0]), "trial": worst[key][1],
                    "limit": limits[key], "passed": bool(worst[key][0] <= limits[key])}
              for key in worst}
    return {
        "config": _config_dict(cfg),
        "rng": RNG_ALGORITHM,
        "checks": checks,
        "passed": all(c["passed"] for c in checks.values()),
        "seconds": time.perf_counter() - start,
    }


def _config_dict(cfg):
    out = asdict(cfg)
    out["n_range"] = list(cfg.n_range)
    out["d_range"] = list(cfg.d_range)
    return out


def sweep_bound_check(cfg=None, tol=DEFAULT_TOL, raise_on_violation=True):
    """Check ``max(R - D) <= tol`` over random interactions and Haar readouts.

    Returns a JSON-ready report with the worst case and its trial seed.

    Raises
    ------
    BoundViolated
        When any trial exceeds the bound; the report is attached.
    """
    cfg = cfg or RandomSuiteConfig()
    start = time.perf_counter()
    worst, worst_trial = -np.inf, None
    for k, rng in enumerate(cfg.rngs()):
        n = int(rng.integers(cfg.n_range[0], cfg.n_range[1] + 1))
        d = int(rng.integers(cfg.d_range[0], cfg.d_range[1] + 1))
        mi = random_interaction(rng, n, d)
        dmat = analysis.decoherence(gram(mi)).values
        for _ in range(cfg.haar_samples):
            rmat = analysis.resolution(analysis.cond_probs(mi, haar_readout(rng, d))).values
            gap = _offdiag_max(rmat - dmat)
            if gap > worst:
                worst, worst_trial = gap, {"trial": k, "n": n, "d": d}
    report = {
        "config": _config_dict(cfg),
        "rng": RNG_ALGORITHM,
        "max_r_minus_d": worst,
        "worst_case": worst_trial,
        "limit": tol.validity,
        "passed": bool(worst <= tol.validity),
        "seconds": time.perf_counter() - start,
    }
    if raise_on_violation and not report["passed"]:
        raise BoundViolated("resolution exceeds decoherence", report=report)
    return report


def bhattacharyya_supremum(mi, pair, cfg=None):
    """Smallest Bhattacharyya coefficient of a pair over sampled Haar readouts.

    Every readout satisfies ``coefficient >= |<phi(a1)|phi(a2)>|``, so the
    sampled minimum approaches that overlap from above.
    """
    cfg = cfg or RandomSuiteConfig()
    rng = np.random.default_rng(cfg.seed)
    i, j = pair
    best = np.inf
    for _ in range(cfg.haar_samples):
        p = analysis.cond_probs(mi, haar_readout(rng, mi.dim))
        best = min(best, float(analysis.bhattacharyya(p)[i, j]))
    return best
