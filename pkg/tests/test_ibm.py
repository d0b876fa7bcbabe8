import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ecoevo.ibm import (
    EventKind,
    ExtinctPopulation,
    PopulationState,
    UnknownTrait,
    generator_drift,
    init_monomorphic,
    init_population,
    inject_mutant,
    marker_distribution,
    run_until,
    step,
    total_event_rate,
)
from ecoevo.model import (
    EcologyModel,
    GaussianStep,
    Interval,
    ModelSpec,
    MutationModel,
    ParamFn,
    dieckmann_doebeli,
    equilibrium_mass,
)
from ecoevo.rng import make_rng, stream

DD = dieckmann_doebeli(K=1000)


def flat(K=4, b=1.0, d=0.0, p_K=0.0, q_K=0.0):
    eco = EcologyModel(ParamFn.constant(b), ParamFn.constant(d), ParamFn.constant(1.0), ParamFn.constant(1.0))
    return ModelSpec(eco, MutationModel(0.1, GaussianStep(0.01), q_K, p_K), Interval(-1, 1), Interval(-2, 2), K)


def brute_force_rate(state):
    s = state.spec
    inds = [(x, u) for x, g in state.groups.items() for u in g.markers]
    total = 0.0
    for x, _ in inds:
        comp = sum(float(s.C(x - y)) for y, _ in inds) / state.K
        total += float(s.b(x)) + float(s.d(x)) + float(s.eta(x)) * comp
    return total


# --- construction ---------------------------------------------------------


def test_init_monomorphic_counts():
    s = init_monomorphic(DD, -1.0, 0.0, 0.53946)
    assert s.total_count == 539 and s.time == 0.0
    assert init_monomorphic(DD, -1.0, 0.0, 0.0).total_count == 0
    one = init_monomorphic(DD.with_changes(K=1), 0.0, 0.0, 1.0)
    assert one.total_count == 1 and one.mass == 1.0


def test_init_rejects_points_outside_spaces():
    with pytest.raises(ValueError):
        init_monomorphic(DD, 1.5, 0.0, 0.5)
    with pytest.raises(ValueError):
        init_monomorphic(DD, 0.0, 3.0, 0.5)
    with pytest.raises(ValueError):
        init_monomorphic(DD, 0.0, 0.0, -0.1)
    two = dieckmann_doebeli(K=10, marker="two-allele")
    assert init_monomorphic(two, 0.0, "A", 0.5).snapshot() == [(0.0, 1.0, 5)]
    with pytest.raises(ValueError):
        init_monomorphic(two, 0.0, "b", 0.5)


def test_inject_mutant():
    s = PopulationState(DD)
    inject_mutant(s, 0.3, 0.1)
    assert s.total_count == 1 and s.snapshot() == [(0.3, 0.1, 1)]
    s = init_monomorphic(DD, -1.0, 0.0, equilibrium_mass(DD, -1.0))
    m0 = s.mass
    inject_mutant(s, 0.0, 0.0)
    assert s.trait_mass(0.0) * s.K == 1
    assert s.mass - m0 == pytest.approx(1 / s.K, abs=1e-15)
    with pytest.raises(ValueError):
        inject_mutant(s, 2.0, 0.0)


def test_marker_distribution():
    s = init_monomorphic(DD, -1.0, 0.25, 0.5)
    assert marker_distribution(s, -1.0) == {0.25: 1.0}
    s = init_population(DD, {0.0: {0.1: 3, 0.2: 1}})
    assert marker_distribution(s, 0.0) == {0.1: 0.75, 0.2: 0.25}
    with pytest.raises(UnknownTrait):
        marker_distribution(s, 0.5)


def test_atoms_merge_within_tolerance():
    s = init_population(DD, {0.0: {0.1: 2, 0.1 + 1e-14: 2}})
    assert marker_distribution(s, 0.0) == {0.1: 1.0}


# --- rates ----------------------------------------------------------------


def test_total_rate_examples():
    s = init_population(DD, {0.4: {0.0: 1}})
    assert total_event_rate(s) == pytest.approx(DD.b(0.4) + DD.d(0.4) + 1 / DD.K, rel=1e-15)
    assert total_event_rate(PopulationState(DD)) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.integers(1, 12)), min_size=3, max_size=3, unique_by=lambda t: t[0]))
def test_total_rate_matches_brute_force(groups):
    m = dieckmann_doebeli(K=50)
    s = init_population(m, {x: {0.0: c} for x, c in groups})
    assert total_event_rate(s) == pytest.approx(brute_force_rate(s), rel=1e-9)


# --- dynamics -------------------------------------------------------------


def test_step_on_empty_state_raises():
    with pytest.raises(ExtinctPopulation):
        step(PopulationState(DD), make_rng(1))


def test_single_individual_birth_probability():
    m = flat(K=4)
    rng = make_rng(11)
    base = init_population(m, {0.0: {0.0: 1}})
    shared = None
    births = 0
    n = 100_000
    for _ in range(n):
        s = base.copy()
        s._draws = shared
        births += step(s, rng).kind is EventKind.BIRTH
        shared = s._draws
    p = 1.0 / (1.0 + 1.0 / 4)
    assert abs(births / n - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_no_mutation_means_faithful_copies():
    m = dieckmann_doebeli(K=100, p_K=0.0, q_K=0.0)
    s = init_population(m, {-0.5: {0.3: 20}, 0.5: {-0.2: 20}})
    res = run_until(s, 20.0, make_rng(3), log_events=True)
    births = [e for e in res.event_log if e.kind.is_birth]
    assert births and all(e.kind is EventKind.BIRTH for e in births)
    assert all((e.child_trait, e.child_marker) == (e.parent_trait, e.parent_marker) for e in births)


def test_event_count_matches_compensator():
    # N_T - int_0^T lambda(s) ds is a mean-zero martingale
    m = flat(K=10, b=1.0, d=0.2)
    diffs, firsts = [], []
    T = 2.0
    for i in range(1000):
        rng = stream(99, i)
        s = init_population(m, {0.0: {0.0: 5}})
        lam0 = total_event_rate(s)
        n, integral, t = 0, 0.0, 0.0
        while True:
            lam = total_event_rate(s)
            if lam == 0.0:
                integral += 0.0
                break
            ev = step(s, rng)
            if n == 0:
                firsts.append((ev.time, lam0))
            if ev.time > T:
                integral += lam * (T - t)
                break
            integral += lam * (ev.time - t)
            t = ev.time
            n += 1
        diffs.append(n - integral)
    diffs = np.array(diffs)
    assert abs(diffs.mean()) < 3 * diffs.std(ddof=1) / math.sqrt(diffs.size)
    scaled = np.array([t * lam for t, lam in firsts])
    assert stats.kstest(scaled, "expon").pvalue > 1e-3


def test_run_until_zero_length_is_noop():
    s = init_monomorphic(DD, -1.0, 0.0, 0.5)
    before = s.snapshot()
    res = run_until(s, 0.0, make_rng(1))
    assert res.n_events == 0 and res.status == "completed" and s.snapshot() == before and s.time == 0.0
    with pytest.raises(ValueError):
        run_until(s, -1.0, make_rng(1))


def test_run_until_is_deterministic():
    logs = []
    for _ in range(2):
        s = init_monomorphic(dieckmann_doebeli(K=200, p_K=1e-3), -1.0, 0.0, 0.54)
        logs.append(run_until(s, 10.0, make_rng(2024), log_events=True).event_log)
    assert logs[0] == logs[1] and len(logs[0]) > 1000


def test_run_until_recorder_and_extinction():
    m = flat(K=5, b=0.0, d=1.0)
    s = init_population(m, {0.0: {0.0: 3}})
    seen = []
    res = run_until(s, 100.0, make_rng(5), recorder=lambda t, st_: seen.append((t, st_.total_count)), sample_interval=1.0)
    assert res.status == "extinct" and s.total_count == 0
    assert [t for t, _ in seen] == [float(i) for i in range(101)]
    assert seen[-1][1] == 0 and seen[0][1] == 3


def test_stop_predicate():
    s = init_monomorphic(DD, -1.0, 0.0, 0.54)
    res = run_until(s, 1e9, make_rng(1), stop=lambda st_: st_.total_count > 560)
    assert res.status == "stopped" and s.total_count == 561


def test_caches_stay_coherent_and_mass_moves_by_one():
    m = dieckmann_doebeli(K=200, p_K=0.02)
    s = init_monomorphic(m, -1.0, 0.0, 0.54)
    rng = make_rng(77)
    counts = [s.total_count]
    for _ in range(100_000):
        step(s, rng)
        counts.append(s.total_count)
    assert len(s.groups) > 5
    assert s.check_caches() <= 1e-9
    assert set(np.abs(np.diff(counts)).tolist()) == {1}


def test_trait_events_ignore_markers():
    # same seed, different marker kernels with equal q_K: identical trait-marginal logs
    base = dieckmann_doebeli(K=100, p_K=0.01)
    other = base.with_changes(marker_kernel=GaussianStep(0.5))
    logs = []
    for m, u0 in ((base, 0.0), (other, 1.3)):
        s = init_monomorphic(m, -1.0, u0, 0.54)
        log = run_until(s, 30.0, make_rng(8), log_events=True).event_log
        logs.append([(e.time, e.kind.is_birth, e.parent_trait, e.child_trait) for e in log])
    assert logs[0] == logs[1]


def test_neutral_allele_frequency_is_martingale():
    m = dieckmann_doebeli(K=30, marker="two-allele", q_K=0.0, p_K=0.0)
    freqs = []
    for i in range(400):
        s = init_population(m, {0.0: {0.0: 10, 1.0: 20}})
        run_until(s, 10.0, stream(4, i))
        if s.total_count:
            g = s.groups[0.0]
            freqs.append(g.markers.count(0.0) / len(g.markers))
    f = np.array(freqs)
    assert abs(f.mean() - 1 / 3) < 3 * f.std(ddof=1) / math.sqrt(f.size)


# --- generator ------------------------------------------------------------


def test_drift_of_constant_function_without_mutation():
    m = dieckmann_doebeli(K=50, p_K=0.0, q_K=0.0)
    s = init_population(m, {-0.5: {0.0: 10, 0.3: 5}, 0.4: {1.0: 8}})
    drift = generator_drift(s, lambda x, u: np.ones_like(x))
    expect = sum(
        len(g.markers) / m.K * (g.b - g.d - g.eta * g.comp_sum / m.K) for g in s.groups.values()
    )
    assert drift == pytest.approx(expect, rel=1e-12)


def test_drift_monomorphic_formula():
    s = init_monomorphic(DD, -1.0, 0.0, 0.4)
    N, K = s.total_count, DD.K
    expect = N / K * (DD.b(-1.0) - DD.d(-1.0) - DD.eta(-1.0) * DD.C(0.0) * N / K)
    assert generator_drift(s, lambda x, u: np.ones_like(x)) == pytest.approx(expect, rel=1e-12)


def test_drift_two_allele_marker_is_exact():
    m = dieckmann_doebeli(K=20, marker="two-allele", q_a=0.3, q_A=0.1, q_K=0.2, p_K=0.0)
    s = init_population(m, {0.0: {0.0: 6, 1.0: 4}})
    phi = lambda x, u: u  # noqa: E731
    # births: a parents give A with prob q*q_a, A parents give a with prob q*q_A
    b, K = m.b(0.0), m.K
    death = m.eta(0.0) * m.C(0.0) * 10 / K
    expect = (6 / K) * b * 0.2 * 0.3 + (4 / K) * (b * (1 - 0.2 * 0.1) - death)
    assert generator_drift(s, phi) == pytest.approx(expect, rel=1e-12)
