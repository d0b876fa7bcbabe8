import math

import numpy as np
import pytest
from scipy import stats

from ecoevo.analysis import ks_distance
from ecoevo.limits import (
    FVParticleSystem,
    NoCoexistence,
    SFVPState,
    TSSState,
    WFParams,
    WFState,
    dimorphic_bracket,
    dimorphic_fv_run,
    fv_advance,
    fv_sample,
    fv_step,
    hitchhike,
    jump_acceptance,
    sfvp_jump,
    sfvp_run,
    tss_next_jump,
    tss_run,
    wf_simulate,
    wf_step,
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
    invasion_fitness,
    tss_jump_rate,
)
from ecoevo.rng import make_rng, stream

DD = dieckmann_doebeli()


def flat_model():
    eco = EcologyModel(ParamFn.constant(1.0), ParamFn.constant(0.0), ParamFn.constant(1.0), ParamFn.constant(1.0))
    return ModelSpec(eco, MutationModel(0.1, GaussianStep(0.01), 0.01), Interval(-1, 1), Interval(-2, 2), 100)


def gaussian_system(N=20, sigma2=0.01, values=None, b=1.0, n_hat=0.5, r_cfg=100.0):
    vals = np.zeros(N) if values is None else values
    return FVParticleSystem(0.0, n_hat, 2 * b / n_hat, b, N, sigma2=sigma2, bounds=(-2.0, 2.0), r_cfg=r_cfg, values=vals)


# --- TSS ------------------------------------------------------------------


def test_no_favourable_mutant_means_no_jump():
    m = flat_model()
    s, jumped = tss_next_jump(m, TSSState(0.0, 0.2, 0.0), make_rng(1), horizon=50.0)
    assert not jumped and s.time == 50.0 and s.trait == 0.2
    s, jumped = tss_next_jump(m, TSSState(0.0, 0.2, 0.0), make_rng(1))
    assert not jumped and s.time == math.inf


def test_acceptance_probability_is_positive_part_ratio():
    for y in np.linspace(-1, 1, 41):
        f = float(invasion_fitness(DD, y, -0.4))
        assert jump_acceptance(DD, -0.4, y) == pytest.approx(max(f, 0.0) / DD.b(y), abs=1e-15)


def test_tss_path_is_piecewise_constant_with_finite_jumps():
    sup_beta = max(tss_jump_rate(DD, x, nodes=2049) for x in np.linspace(-1, 1, 41))
    horizon = 50.0
    counts = []
    for i in range(200):
        path = tss_run(DD, -1.0, 0.0, horizon, stream(3, i))
        times = [s.time for s in path]
        assert times == sorted(times) and times[-1] == horizon
        counts.append(len(path) - 2)
    assert np.mean(counts) <= horizon * sup_beta


def test_tss_marker_law_supplies_new_marker():
    s, jumped = tss_next_jump(DD, TSSState(0.0, -1.0, 0.0), make_rng(4), marker_law=lambda rng: 0.7)
    assert jumped and s.marker == 0.7 and s.trait != -1.0


# --- Moran / Fleming-Viot -------------------------------------------------


def test_fv_rejects_small_systems():
    with pytest.raises(ValueError):
        gaussian_system(N=1)
    with pytest.raises(ValueError):
        FVParticleSystem(0.0, 1.0, 2.0, 1.0, 10, two_allele=True, n_a=11)


def test_identical_particles_without_mutation_never_change():
    s = gaussian_system(sigma2=0.0, values=np.full(20, 0.3))
    rng = make_rng(2)
    for _ in range(500):
        fv_step(s, rng)
    assert np.all(s.values == 0.3)
    fv_advance(s, s.time + 5.0, rng)
    assert np.all(s.values == 0.3) and s.n_events > 500


def test_particles_conserved_and_inside_space():
    s = gaussian_system(N=30, sigma2=4.0, values=np.full(30, 1.9), r_cfg=5.0)
    rng = make_rng(3)
    for _ in range(2000):
        fv_step(s, rng)
    fv_advance(s, s.time + 3.0, rng)
    assert s.values.shape == (30,) and s.values.min() >= -2.0 and s.values.max() <= 2.0
    assert sum(s.atoms().values()) == pytest.approx(1.0)


def test_advance_does_not_depend_on_call_boundaries():
    a, b = gaussian_system(N=40), gaussian_system(N=40)
    fv_advance(a, 4.0, make_rng(9))
    rb = make_rng(9)
    for t in np.linspace(0.3, 4.0, 13):
        fv_advance(b, t, rb)
    assert np.array_equal(a.values, b.values) and a.n_events == b.n_events


def test_mean_is_martingale_for_pure_diffusion():
    start = np.linspace(-0.5, 0.5, 20)
    incs = []
    for i in range(10_000):
        s = gaussian_system(values=start.copy())
        fv_advance(s, 0.5, stream(12, i))
        incs.append(s.mean() - start.mean())
    incs = np.array(incs)
    assert abs(incs.mean()) < 3 * incs.std(ddof=1) / math.sqrt(incs.size)


def test_variance_relaxation_follows_moment_equation():
    # dE[Var]/dt = b sigma2 (1 - 1/N) - (2b/n) E[Var]
    N, sigma2, b, n_hat, t = 20, 0.04, 1.0, 0.5, 0.3
    gamma = 2 * b / n_hat
    v_inf = b * sigma2 * (1 - 1 / N) / gamma
    expect = v_inf * (1 - math.exp(-gamma * t))
    v = []
    for i in range(5000):
        s = gaussian_system(N=N, sigma2=sigma2, b=b, n_hat=n_hat)
        fv_advance(s, t, stream(13, i))
        v.append(s.variance())
    v = np.array(v)
    assert abs(v.mean() - expect) < 3 * v.std(ddof=1) / math.sqrt(v.size)


def test_step_and_compiled_loop_agree_in_law():
    def run(fn, seed):
        out = []
        for i in range(400):
            s = FVParticleSystem(0.0, 1.0, 2.0, 1.0, 10, two_allele=True, r_bar=1.0, q_a=0.3, q_A=0.6, n_a=5)
            fn(s, stream(seed, i))
            out.append(s.n_a)
        return np.array(out)

    def stepper(s, rng):
        while True:
            na = s.n_a
            fv_step(s, rng)
            if s.time > 1.0:
                s.n_a = na
                return

    a = run(lambda s, r: fv_advance(s, 1.0, r), 14)
    b = run(stepper, 15)
    assert stats.ks_2samp(a, b).pvalue > 1e-3


def test_two_allele_moran_matches_wright_fisher():
    paths = 2000
    fv = []
    for i in range(paths):
        s = FVParticleSystem(0.0, 1.0, 2.0, 1.0, 1000, two_allele=True, r_bar=1.0, q_a=0.5, q_A=0.5, n_a=500)
        fv_advance(s, 1.0, stream(21, i))
        fv.append(s.freq_a)
    wf = wf_simulate(0.5, 1.0, WFParams(1.0, 1.0, 1.0, 0.5, 0.5), stream(22, 0), dt=1e-4, paths=paths).w
    assert ks_distance(fv, wf) <= 0.05


# --- Wright-Fisher --------------------------------------------------------


def test_wf_boundaries_absorb_without_mutation():
    p = WFParams(1.0, 0.5, 1.0, 0.0, 0.0)
    rng = make_rng(1)
    for w in (0.0, 1.0):
        s = WFState(0.0, 0.0, w)
        for _ in range(100):
            s = wf_step(s, 1e-3, rng, p)
        assert s.w_a == w
    assert np.all(wf_simulate(np.array([0.0, 1.0]), 1.0, p, rng).w == [0.0, 1.0])


def test_wf_rejects_bad_input():
    p = WFParams(1.0, 0.5, 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        wf_step(WFState(0.0, 0.0, 0.5), 0.0, make_rng(1), p)
    with pytest.raises(ValueError):
        WFState(0.0, 0.0, 1.5)


def test_wf_martingale_without_mutation():
    w = wf_simulate(0.3, 1.0, WFParams(1.0, 1.0, 1.0, 0.0, 0.0), make_rng(5), paths=10_000).w
    assert abs(w.mean() - 0.3) < 3 * w.std(ddof=1) / 100


def test_wf_mean_follows_linear_ode():
    p = WFParams(1.0, 1.0, 1.0, 0.0, 1.0)
    w0, t = 0.5, 0.5
    w = wf_simulate(w0, t, p, make_rng(6), paths=10_000).w
    mu = 1 - (1 - w0) * math.exp(-p.r_bar * p.b * p.q_A * t)
    assert abs(w.mean() - mu) < 3 * w.std(ddof=1) / 100


def test_wf_clamping_is_rare_from_interior():
    batch = wf_simulate(0.5, 1.0, WFParams(1.0, 1.0, 1.0, 0.5, 0.5), make_rng(7), dt=1e-4, paths=1000)
    assert batch.clamps <= 0.01 * batch.steps * 1000


def test_wf_step_matches_vectorised_scheme_in_law():
    p = WFParams(1.0, 1.0, 1.0, 0.2, 0.2)
    rng = make_rng(8)
    single = []
    for _ in range(2000):
        s = WFState(0.0, 0.0, 0.4)
        for _ in range(20):
            s = wf_step(s, 0.01, rng, p)
        single.append(s.w_a)
    batch = wf_simulate(0.4, 0.2, p, make_rng(9), dt=0.01, paths=2000).w
    assert stats.ks_2samp(single, batch).pvalue > 1e-3


# --- SFVP -----------------------------------------------------------------


def test_sfvp_without_favourable_mutants_is_pure_fleming_viot():
    m = dieckmann_doebeli(sigma_C=1e3)  # b is maximal at 0, nothing invades there
    res = sfvp_run(m, 0.0, 0.0, 5.0, make_rng(1), sample_interval=1.0, N=50)
    assert res.n_jumps == 0 and res.status == "completed"
    assert {r.trait for r in res.records} == {0.0}
    assert res.records[-1].marker_var > 0


def test_sfvp_law_is_dirac_after_every_jump():
    res = sfvp_run(DD, -1.0, 0.0, 60.0, make_rng(2), sample_interval=2.0, N=100)
    jumps = [r for r in res.records if r.jump]
    assert len(jumps) == res.n_jumps > 0
    assert all(r.marker_var == 0.0 and r.marker_heterozygosity == 0.0 for r in jumps)
    assert all(r.n_hat == pytest.approx(equilibrium_mass(DD, r.trait)) for r in res.records)


def test_sfvp_two_allele_mode_uses_wright_fisher():
    m = dieckmann_doebeli(marker="two-allele")
    res = sfvp_run(m, -1.0, "a", 40.0, make_rng(3), sample_interval=1.0)
    assert isinstance(res.state.marker_law, WFState)
    for r in res.records:
        if r.jump:
            assert r.marker_mean in (0.0, 1.0)


def test_hitchhike_jump_is_all_or_nothing():
    m = dieckmann_doebeli(marker="two-allele")
    rng = make_rng(4)
    outcomes = []
    for _ in range(200):
        st = SFVPState(0.0, -1.0, 0.54, WFState(0.0, -1.0, 0.85))
        sfvp_jump(m, st, -0.5, rng)
        outcomes.append(st.marker_law.w_a)
        assert st.trait == -0.5 and st.n_hat == pytest.approx(equilibrium_mass(m, -0.5))
    assert set(outcomes) <= {0.0, 1.0}
    assert hitchhike(1.0, rng) == 1.0 and hitchhike(0.0, rng) == 0.0


def test_continuous_jump_resets_particles_to_one_of_them():
    st = SFVPState(0.0, -1.0, 0.54, FVParticleSystem.for_trait(DD, -1.0, 0.0, N=10))
    st.marker_law.values[:] = np.linspace(-1, 1, 10)
    before = set(st.marker_law.values.tolist())
    sfvp_jump(DD, st, -0.5, make_rng(5))
    vals = st.marker_law.values
    assert np.all(vals == vals[0]) and vals[0] in before
    assert st.marker_law.bracket == pytest.approx(2 * DD.b(-0.5) / equilibrium_mass(DD, -0.5))


# --- dimorphic ------------------------------------------------------------


def test_dimorphic_bracket_symmetry_and_reduction():
    m = flat_model()
    assert dimorphic_bracket(m, -0.3, 0.3, 0.4, 0.6) == dimorphic_bracket(m, 0.3, -0.3, 0.4, 0.6)
    for x in (-0.8, 0.0, 0.5):
        n = float(equilibrium_mass(DD, x))
        assert dimorphic_bracket(DD, x, 0.7, n, 0.0) == pytest.approx(2 * DD.b(x) / n, rel=1e-13)


def test_dimorphic_requires_coexistence():
    with pytest.raises(NoCoexistence):
        dimorphic_fv_run(DD, -1.0, -0.5, 0.0, 0.0, 1.0, (make_rng(1), make_rng(2)))


def test_dimorphic_laws_evolve_independently():
    m = dieckmann_doebeli(sigma_C=0.7)
    res = dimorphic_fv_run(
        m, -0.1, 0.1, 0.0, 0.0, 200.0, (make_rng(31), make_rng(32)), sample_interval=0.5, N=100
    )
    d1 = np.diff(res.trajectories[0].mean)
    d2 = np.diff(res.trajectories[1].mean)
    prod = (d1 - d1.mean()) * (d2 - d2.mean())
    assert abs(prod.mean()) < 3 * prod.std(ddof=1) / math.sqrt(prod.size)
    g1 = res.systems[0].bracket
    assert g1 == pytest.approx(dimorphic_bracket(m, -0.1, 0.1, res.n1, res.n2))
