"""Estimators and comparison experiments built on the simulators."""
from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np
from scipy import stats

from .ibm import init_monomorphic, init_population, inject_mutant, marker_distribution, run_until
from .limits import WFParams, wf_simulate
from .model import ModelSpec, equilibrium_mass, invasion_fitness
from .rng import derive_seed, make_rng


class NonPositiveFitness(ValueError):
    pass


class EmptySample(ValueError):
    pass


# ---------------------------------------------------------------------------
# summaries


@dataclass(frozen=True)
class SummaryStats:
    estimate: float
    standard_error: float
    wilson_ci_95: tuple[float, float]
    n_trials: int

    def to_dict(self) -> dict:
        return asdict(self)


def bernoulli_summary(successes: int, n: int) -> SummaryStats:
    """Proportion estimate with its binomial standard error and 95% Wilson interval."""
    if n == 0:
        return SummaryStats(math.nan, math.nan, (0.0, 1.0), 0)
    p = successes / n
    ci = stats.binomtest(int(successes), int(n)).proportion_ci(0.95, method="wilson")
    lo, hi = min(ci.low, p), max(ci.high, p)
    return SummaryStats(p, math.sqrt(p * (1 - p) / n), (float(lo), float(hi)), n)


def _masses(atoms) -> np.ndarray:
    vals = atoms.values() if isinstance(atoms, Mapping) else atoms
    m = np.asarray(list(vals), dtype=float)
    if m.size == 0 or np.any(m < 0) or abs(m.sum() - 1.0) > 1e-9:
        raise ValueError("marker atoms must be non-negative masses summing to 1")
    return m


def bottleneck_metric(atoms) -> float:
    """Mass of the largest atom: 1 for a Dirac law."""
    return float(_masses(atoms).max())


def heterozygosity(atoms) -> float:
    """``1 - sum p_i**2`` over atom masses."""
    m = _masses(atoms)
    return float(max(0.0, 1.0 - np.dot(m, m)))


def ks_distance(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise EmptySample("both samples must be non-empty")
    return float(stats.ks_2samp(a, b).statistic)


def _master_seed(seed) -> int:
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, 2**63))
    if seed is None:
        raise ValueError("an explicit seed is required")
    return int(seed)


# ---------------------------------------------------------------------------
# invasion and fixation of a mutant


@dataclass(frozen=True)
class FixationTrialResult:
    """Outcome of one invasion trial.

    ``marker_max_atom_at_tK`` is the bottleneck metric of the mutant's
    marker law at ``t_K``, or 0 when the mutant is extinct.
    ``fixation_completed`` means the mutant survived and the resident
    trait is gone at ``t_K``.
    """

    index: int
    survived_at_tK: bool
    marker_max_atom_at_tK: float
    fixation_completed: bool
    t_K_used: float
    mutant_mass_at_tK: float
    founder_marker: float
    marker_heterozygosity_at_tK: float = 0.0


@dataclass
class FixationReport:
    x0: float
    y: float
    K: int
    t_K: float
    epsilon: float
    seed: int
    predicted: float
    survival: SummaryStats
    fixation: SummaryStats
    bottleneck: SummaryStats  # fraction of survivors with metric >= bottleneck_threshold
    bottleneck_threshold: float
    trials: list[FixationTrialResult] = field(repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trials"] = [asdict(t) for t in self.trials]
        return d


def default_t_K(K: int) -> float:
    return math.log(K) ** 2


def fixation_trial(
    spec: ModelSpec,
    x0: float,
    y: float,
    seed: int,
    index: int,
    t_K: float,
    epsilon: float,
    u0: float = 0.0,
    burn_in: float = 0.0,
) -> FixationTrialResult:
    """One invasion trial on stream ``index`` of master ``seed``.

    The resident starts at ``round(n_x0 K)`` individuals carrying ``u0``
    and optionally evolves for ``burn_in``; one mutant ``y`` carrying the
    marker of a uniformly chosen resident is then added, and the system runs
    for ``t_K`` (stopping early if the mutant dies out).
    """
    rng = make_rng(derive_seed(seed, index))
    state = init_monomorphic(spec, x0, u0, float(equilibrium_mass(spec, x0)))
    if burn_in > 0:
        run_until(state, burn_in, rng)
    g = state.groups.get(x0)
    v = g.markers[int(rng.integers(len(g.markers)))] if g is not None else u0
    inject_mutant(state, y, v)
    t_start = state.time

    def mutant_gone(s):
        return y not in s.groups

    run_until(state, t_start + t_K, rng, stop=mutant_gone)
    mass = state.trait_mass(y)
    survived = mass > epsilon
    if survived:
        atoms = marker_distribution(state, y)
        top = bottleneck_metric(atoms)
        het = heterozygosity(atoms)
    else:
        top, het = 0.0, 0.0
    fixed = survived and x0 not in state.groups
    return FixationTrialResult(index, survived, top, fixed, t_K, mass, float(v), het)


def fixation_experiment(
    spec: ModelSpec,
    x0: float,
    y: float,
    trials: int,
    seed,
    t_K: float | None = None,
    epsilon: float | None = None,
    u0: float = 0.0,
    burn_in: float = 0.0,
    bottleneck_threshold: float = 0.95,
    workers: int = 1,
    indices: Sequence[int] | None = None,
) -> FixationReport:
    """Estimate the probability that a single mutant ``y`` survives in a resident ``x0``.

    The large-population limit of this probability is ``f(y; x0) / b(y)``.
    Survival means the mutant's mass exceeds ``epsilon`` (default
    ``0.1 * n_y / 2``) at ``t_K`` (default ``(log K)**2``).  Trials use
    derived streams, so the report does not depend on ``workers``.
    """
    f = float(invasion_fitness(spec, y, x0))
    if not f > 0:
        raise NonPositiveFitness(f"f({y}; {x0}) = {f} is not positive")
    master = _master_seed(seed)
    t_K = default_t_K(spec.K) if t_K is None else float(t_K)
    epsilon = 0.1 * float(equilibrium_mass(spec, y)) / 2 if epsilon is None else float(epsilon)
    idx = list(range(trials)) if indices is None else list(indices)
    run = partial(fixation_trial, spec, x0, y, master, t_K=t_K, epsilon=epsilon, u0=u0, burn_in=burn_in)
    if workers > 1 and len(idx) > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(run, idx, chunksize=max(1, len(idx) // (4 * workers))))
    else:
        results = [run(i) for i in idx]
    results.sort(key=lambda r: r.index)
    n_surv = sum(r.survived_at_tK for r in results)
    n_fix = sum(r.fixation_completed for r in results)
    n_dirac = sum(r.marker_max_atom_at_tK >= bottleneck_threshold for r in results if r.survived_at_tK)
    return FixationReport(
        x0, y, spec.K, t_K, epsilon, master, f / float(spec.b(y)),
        bernoulli_summary(n_surv, len(results)),
        bernoulli_summary(n_fix, len(results)),
        bernoulli_summary(n_dirac, n_surv),
        bottleneck_threshold,
        results,
    )


# ---------------------------------------------------------------------------
# individual-based model against the Wright-Fisher diffusion


@dataclass
class WFComparison:
    K: int
    horizon: float
    ibm: np.ndarray
    wf: np.ndarray
    ks: float
    mean_ibm: float
    mean_wf: float
    pooled_se: float
    var_ibm: float
    var_wf: float
    ibm_extinct: int

    @property
    def mean_gap_in_se(self) -> float:
        gap = abs(self.mean_ibm - self.mean_wf)
        return 0.0 if gap == 0 else gap / self.pooled_se if self.pooled_se > 0 else math.inf

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ibm"] = self.ibm.tolist()
        d["wf"] = self.wf.tolist()
        return d


def ibm_allele_frequency(spec: ModelSpec, x: float, w0: float, horizon: float, seed: int, index: int) -> float:
    """Frequency of allele ``a`` after ``K * horizon`` time units of the individual-based model (NaN if extinct)."""
    rng = make_rng(derive_seed(seed, index))
    n = int(math.floor(float(equilibrium_mass(spec, x)) * spec.K + 0.5))
    n_a = int(math.floor(w0 * n + 0.5))
    state = init_population(spec, {x: {0.0: n_a, 1.0: n - n_a}})
    run_until(state, spec.K * horizon, rng)
    g = state.groups.get(x)
    if g is None:
        return math.nan
    return g.markers.count(0.0) / len(g.markers)


def compare_ibm_to_wf(
    spec: ModelSpec,
    horizon: float,
    K: int,
    replicates: int,
    seed,
    trait: float,
    w0: float = 0.5,
    dt: float = 1e-4,
) -> WFComparison:
    """Terminal allele frequencies of the individual-based model and of its Wright-Fisher limit.

    The model is rescaled to size ``K`` keeping ``r_bar = q_K K`` fixed,
    with trait mutations switched off.  IBM replicates run for ``K *
    horizon`` and use streams ``0..replicates-1``; the diffusion uses
    stream ``replicates``.
    """
    if not spec.two_allele:
        raise ValueError("the Wright-Fisher comparison needs a two-allele marker")
    r_bar = spec.limit_generator_scale
    model = spec.with_changes(K=int(K), q_K=min(r_bar / K, 1.0), p_K=0.0)
    master = _master_seed(seed)
    ibm = np.array([ibm_allele_frequency(model, trait, w0, horizon, master, i) for i in range(replicates)])
    extinct = int(np.isnan(ibm).sum())
    ibm = ibm[~np.isnan(ibm)]
    params = WFParams.for_trait(spec, trait)
    wf = wf_simulate(w0, horizon, params, make_rng(derive_seed(master, replicates)), dt=dt, paths=replicates).w
    if ibm.size == 0 or wf.size == 0:
        ks, se = math.nan, math.nan
    else:
        ks = ks_distance(ibm, wf)
        se = math.sqrt(ibm.var(ddof=1) / ibm.size + wf.var(ddof=1) / wf.size) if min(ibm.size, wf.size) > 1 else 0.0
    return WFComparison(
        int(K), horizon, ibm, wf, ks,
        float(ibm.mean()) if ibm.size else math.nan,
        float(wf.mean()) if wf.size else math.nan,
        se,
        float(ibm.var()) if ibm.size else math.nan,
        float(wf.var()) if wf.size else math.nan,
        extinct,
    )
