"""Large-population limit processes.

All processes here run on the trait-mutation time scale: one unit of limit
time corresponds to ``K`` units of individual-based time.  This module
provides:

* the trait substitution sequence (TSS), simulated by thinning;
* the Fleming-Viot marker law, approximated by an ``N``-particle Moran
  system;
* the two-allele Wright-Fisher diffusion;
* their composition (the substitution Fleming-Viot process, SFVP), which
  resets the marker law to a Dirac mass at every trait substitution;
* the paired Fleming-Viot systems of a trait-dimorphic population.

Moran rates.  Each ordered particle pair ``(i, j)`` fires at rate
``gamma / 2`` and replaces ``i`` by a copy of ``j``, where ``gamma`` is
the bracket coefficient (``2 b(x) / n_x`` for a monomorphic resident).
A resampling event changes ``<F, phi>`` by ``(phi(u_j) - phi(u_i)) / N``,
so the quadratic variation rate is
``gamma / (2 N**2) * sum_{i != j} (phi_j - phi_i)**2 = gamma * Var_F(phi)``
whatever ``N`` is.  Mutation is a thinned discretisation of the generator:
each particle jumps at rate ``b * r_cfg`` by a centred Gaussian step of
variance ``sigma2 / r_cfg``, giving drift ``b * (sigma2 / 2) phi''`` up to
``O(1 / r_cfg)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _moran
from .model import (
    Discrete,
    ModelSpec,
    MutationSamplingError,
    equilibrium_mass,
    invasion_fitness,
    is_viable,
    lv_coexistence_equilibrium,
    sample_conditioned_normal,
    tss_jump_rate,
)


class NoCoexistence(ValueError):
    pass


# ---------------------------------------------------------------------------
# trait substitution sequence


@dataclass(frozen=True)
class TSSState:
    time: float
    trait: float
    marker: float


def _draw_trait_step(spec: ModelSpec, x: float, rng: np.random.Generator) -> float:
    ts = spec.trait_space
    return sample_conditioned_normal(x, spec.mutation.trait_sd, ts.lo, ts.hi, rng.standard_normal)


def jump_acceptance(spec: ModelSpec, x: float, y: float) -> float:
    """Probability ``[f(y; x)]_+ / b(y)`` that a proposed trait ``y`` invades and fixes."""
    b = float(spec.b(y))
    if b <= 0.0:
        return 0.0
    return max(float(invasion_fitness(spec, y, x)), 0.0) / b


def tss_next_jump(
    spec: ModelSpec,
    state: TSSState,
    rng: np.random.Generator,
    marker_law: Callable[[np.random.Generator], float] | None = None,
    horizon: float = math.inf,
) -> tuple[TSSState, bool]:
    """Advance to the next trait substitution, or to ``horizon``.

    Proposals arrive at the envelope rate ``b(Y) n_Y``; each draws a trait
    step from the mutation kernel and is accepted with probability
    ``[f(Y+k; Y)]_+ / b(Y+k)``.  The new marker comes from ``marker_law``
    (a Dirac at the current marker when omitted).  Returns the new state
    and whether a jump happened; without a jump the state is censored at
    ``horizon`` (time ``inf`` when no jump is possible and the horizon is
    infinite).
    """
    x = state.trait
    envelope = float(spec.b(x)) * float(equilibrium_mass(spec, x))
    if envelope <= 0.0 or (math.isinf(horizon) and tss_jump_rate(spec, x) <= 0.0):
        return TSSState(max(horizon, state.time), x, state.marker), False
    t = state.time
    while True:
        t += rng.exponential(1.0 / envelope)
        if t > horizon:
            return TSSState(horizon, x, state.marker), False
        y = _draw_trait_step(spec, x, rng)
        if rng.random() < jump_acceptance(spec, x, y):
            v = state.marker if marker_law is None else marker_law(rng)
            return TSSState(t, y, v), True


def tss_run(spec: ModelSpec, x0: float, u0: float, horizon: float, rng: np.random.Generator) -> list[TSSState]:
    """Trait substitution sequence path on ``[0, horizon]``; the last entry is censored at ``horizon``."""
    path = [TSSState(0.0, float(x0), float(u0))]
    while True:
        nxt, jumped = tss_next_jump(spec, path[-1], rng, horizon=horizon)
        path.append(nxt)
        if not jumped:
            return path


# ---------------------------------------------------------------------------
# Moran approximation of the Fleming-Viot process


class _KernelDraws:
    """Refillable uniform/normal arrays handed to the compiled kernels.

    Refills start small and double up to ``max_chunk`` so that short runs
    stay cheap.
    """

    def __init__(self, rng: np.random.Generator, chunk: int = 256, max_chunk: int = 1 << 16):
        self.rng = rng
        self.u_chunk = self.z_chunk = chunk
        self.max_chunk = max_chunk
        self.U = np.empty(0)
        self.ui = 0
        self.Z = np.empty(0)
        self.zi = 0

    def more_uniforms(self):
        self.U = np.concatenate([self.U[self.ui :], self.rng.random(self.u_chunk)])
        self.ui = 0
        self.u_chunk = min(2 * self.u_chunk, self.max_chunk)

    def more_normals(self):
        self.Z = np.concatenate([self.Z[self.zi :], self.rng.standard_normal(self.z_chunk)])
        self.zi = 0
        self.z_chunk = min(2 * self.z_chunk, self.max_chunk)


@dataclass
class FVParticleSystem:
    """``N``-particle Moran system whose empirical law approximates ``F_t(x, .)``.

    Continuous markers live in ``particles``.  In two-allele mode
    (``two_allele=True``) the particles are exchangeable and only the count
    ``n_a`` of allele ``a`` (marker index 0) is stored; ``particles``
    materialises it.  ``bracket`` is the resampling coefficient ``gamma``
    and ``drift_rate`` the factor multiplying the mutation generator
    (``b(x)`` in both the monomorphic and dimorphic cases).
    """

    trait: float
    n_hat: float
    bracket: float
    drift_rate: float
    N: int
    time: float = 0.0
    sigma2: float = 0.0
    bounds: tuple[float, float] = (-math.inf, math.inf)
    r_cfg: float = 100.0
    two_allele: bool = False
    r_bar: float = 0.0
    q_a: float = 0.0
    q_A: float = 0.0
    values: np.ndarray | None = None
    n_a: int = 0
    n_events: int = 0
    next_event: float = math.nan
    _draws: _KernelDraws | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("a Moran system needs at least two particles")
        if self.two_allele:
            if not 0 <= self.n_a <= self.N:
                raise ValueError("allele count outside [0, N]")
        else:
            if self.values is None:
                raise ValueError("continuous mode needs initial particle values")
            self.values = np.array(self.values, dtype=float)
            if self.values.shape != (self.N,):
                raise ValueError("need exactly N particle values")
            lo, hi = self.bounds
            if np.any((self.values < lo) | (self.values > hi)):
                raise ValueError("particle outside the marker space")
        if self.r_cfg <= 0:
            raise ValueError("r_cfg must be positive")

    # construction --------------------------------------------------------

    @classmethod
    def for_trait(
        cls, spec: ModelSpec, x: float, u0, N: int = 500, r_cfg: float = 100.0, bracket: float | None = None
    ) -> "FVParticleSystem":
        """Monomorphic system at trait ``x`` with all particles at ``u0``.

        The generator scale (``sigma**2`` or ``r_bar``) is the model's limit
        value; the bracket defaults to ``2 b(x) / n_x``.
        """
        n = float(equilibrium_mass(spec, x))
        if n <= 0.0:
            raise ValueError(f"trait {x} is not viable")
        b = float(spec.b(x))
        gamma = 2.0 * b / n if bracket is None else bracket
        ms = spec.marker_space
        if isinstance(ms, Discrete):
            ker = spec.mutation.marker_kernel
            u = ms.index(u0)
            return cls(
                x, n, gamma, b, N, two_allele=True, r_bar=spec.limit_generator_scale,
                q_a=ker.q_a, q_A=ker.q_A, n_a=N if u == 0.0 else 0, r_cfg=r_cfg,
            )
        return cls(
            x, n, gamma, b, N, sigma2=spec.limit_generator_scale, bounds=(ms.lo, ms.hi),
            r_cfg=r_cfg, values=np.full(N, float(u0)),
        )

    # views ---------------------------------------------------------------

    @property
    def particles(self) -> np.ndarray:
        if self.two_allele:
            return np.concatenate([np.zeros(self.n_a), np.ones(self.N - self.n_a)])
        return self.values.copy()

    @property
    def freq_a(self) -> float:
        if not self.two_allele:
            raise ValueError("allele frequency is only defined in two-allele mode")
        return self.n_a / self.N

    def mean(self) -> float:
        if self.two_allele:
            return 1.0 - self.n_a / self.N
        return float(self.values.mean())

    def variance(self) -> float:
        """Variance of the empirical measure (divisor ``N``)."""
        if self.two_allele:
            w = self.n_a / self.N
            return w * (1.0 - w)
        v = self.values
        if np.all(v == v[0]):
            return 0.0  # exact for a Dirac law, np.var can leave round-off
        return float(v.var())

    def atoms(self) -> dict[float, float]:
        if self.two_allele:
            w = self.n_a / self.N
            return {u: m for u, m in ((0.0, w), (1.0, 1.0 - w)) if m > 0}
        vals, counts = np.unique(self.values, return_counts=True)
        return dict(zip(vals.tolist(), (counts / self.N).tolist()))

    def heterozygosity(self) -> float:
        return 1.0 - sum(p * p for p in self.atoms().values())

    def sample_marker(self, rng: np.random.Generator) -> float:
        """A marker drawn from the empirical law."""
        i = int(rng.integers(self.N))
        if self.two_allele:
            return 0.0 if i < self.n_a else 1.0
        return float(self.values[i])

    def reset_to(self, v: float) -> None:
        """Collapse the law to a Dirac mass at ``v``."""
        if self.two_allele:
            self.n_a = self.N if v == 0.0 else 0
        else:
            self.values[:] = v
        self.next_event = math.nan

    # rates ---------------------------------------------------------------

    @property
    def pair_rate(self) -> float:
        return 0.5 * self.bracket

    @property
    def mutation_rate(self) -> float:
        """Per-particle mutation event rate in continuous mode."""
        return self.drift_rate * self.r_cfg

    @property
    def flip_rates(self) -> tuple[float, float]:
        """Per-particle ``a -> A`` and ``A -> a`` rates in two-allele mode."""
        s = self.drift_rate * self.r_bar
        return s * self.q_a, s * self.q_A


def fv_step(sys: FVParticleSystem, rng: np.random.Generator) -> FVParticleSystem:
    """Perform one Moran event in place (reference implementation of the compiled loop)."""
    N = sys.N
    if sys.two_allele:
        fa, fA = sys.flip_rates
        na, nA = sys.n_a, N - sys.n_a
        res = sys.pair_rate * na * nA
        down = res + fa * na
        total = down + res + fA * nA
        if total <= 0.0:
            sys.time = math.inf
            return sys
        sys.time += rng.exponential(1.0 / total)
        sys.n_a += -1 if rng.random() * total < down else 1
    else:
        R = sys.pair_rate * N * (N - 1)
        total = R + sys.mutation_rate * N
        if total <= 0.0:
            sys.time = math.inf
            return sys
        sys.time += rng.exponential(1.0 / total)
        if rng.random() * total < R:
            i, j = rng.choice(N, size=2, replace=False)
            sys.values[i] = sys.values[j]
        else:
            i = int(rng.integers(N))
            lo, hi = sys.bounds
            sd = math.sqrt(sys.sigma2 / sys.r_cfg)
            sys.values[i] = sample_conditioned_normal(sys.values[i], sd, lo, hi, rng.standard_normal)
    sys.n_events += 1
    sys.next_event = math.nan
    return sys


def fv_advance(sys: FVParticleSystem, t_end: float, rng: np.random.Generator) -> FVParticleSystem:
    """Run the Moran dynamics in place up to ``t_end`` with the compiled event loop.

    The pending event time is kept across calls, so the path does not
    depend on how ``[time, t_end]`` is cut into calls.  A system should be
    driven by a single generator.
    """
    if t_end < sys.time:
        raise ValueError("t_end is before the current time")
    dr = sys._draws
    if dr is None or dr.rng is not rng:
        dr = sys._draws = _KernelDraws(rng)
    while True:
        if sys.two_allele:
            fa, fA = sys.flip_rates
            na, t, nxt, ui, n_ev, status = _moran.two_allele_moran(
                sys.n_a, sys.N, sys.time, sys.next_event, t_end, sys.pair_rate, fa, fA, dr.U, dr.ui
            )
            sys.n_a = int(na)
            zi = dr.zi
        else:
            lo, hi = sys.bounds
            sd = math.sqrt(sys.sigma2 / sys.r_cfg) if sys.sigma2 > 0 else 0.0
            mut = sys.mutation_rate if sd > 0 else 0.0
            t, nxt, ui, zi, n_ev, status = _moran.gaussian_moran(
                sys.values, sys.time, sys.next_event, t_end, sys.pair_rate, mut, sd, lo, hi, dr.U, dr.ui, dr.Z, dr.zi
            )
        sys.time, sys.next_event, dr.ui, dr.zi = float(t), float(nxt), int(ui), int(zi)
        sys.n_events += int(n_ev)
        if status == 0:
            return sys
        if status == 1:
            dr.more_uniforms()
        elif status == 2:
            dr.more_normals()
        else:
            raise MutationSamplingError("marker step rejection cap exceeded")


@dataclass
class FVTrajectory:
    times: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    heterozygosity: np.ndarray


def fv_sample(sys: FVParticleSystem, times, rng: np.random.Generator, heterozygosity: bool = False) -> FVTrajectory:
    """Advance through the increasing ``times`` and record the law's mean and variance at each."""
    times = np.asarray(times, dtype=float)
    mean = np.empty(times.size)
    var = np.empty(times.size)
    het = np.full(times.size, np.nan)
    for i, t in enumerate(times):
        fv_advance(sys, t, rng)
        mean[i] = sys.mean()
        var[i] = sys.variance()
        if heterozygosity:
            het[i] = sys.heterozygosity()
    return FVTrajectory(times, mean, var, het)


# ---------------------------------------------------------------------------
# Wright-Fisher diffusion


@dataclass
class WFState:
    time: float
    trait: float
    w_a: float

    def __post_init__(self):
        if not 0.0 <= self.w_a <= 1.0:
            raise ValueError("allele frequency outside [0, 1]")


@dataclass(frozen=True)
class WFParams:
    """Coefficients of ``dW = r b (q_A (1-W) - q_a W) dt + sqrt(2 b / n W (1-W)) dB``."""

    b: float
    n_hat: float
    r_bar: float
    q_a: float
    q_A: float

    @classmethod
    def for_trait(cls, spec: ModelSpec, y: float) -> "WFParams":
        if not spec.two_allele:
            raise ValueError("the Wright-Fisher limit needs a two-allele marker")
        ker = spec.mutation.marker_kernel
        return cls(float(spec.b(y)), float(equilibrium_mass(spec, y)), spec.limit_generator_scale, ker.q_a, ker.q_A)

    @property
    def drift_up(self) -> float:
        return self.r_bar * self.b * self.q_A

    @property
    def drift_down(self) -> float:
        return self.r_bar * self.b * self.q_a

    @property
    def diffusion(self) -> float:
        return 2.0 * self.b / self.n_hat


def wf_step(state: WFState, dt: float, rng: np.random.Generator, params: WFParams) -> WFState:
    """One Euler-Maruyama step, clamped to ``[0, 1]``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    w = state.w_a
    w += (params.drift_up * (1 - w) - params.drift_down * w) * dt
    w += math.sqrt(params.diffusion * state.w_a * (1 - state.w_a) * dt) * rng.standard_normal()
    return WFState(state.time + dt, state.trait, min(max(w, 0.0), 1.0))


@dataclass
class WFBatch:
    w: np.ndarray
    clamps: int
    steps: int


def wf_simulate(
    w0, horizon: float, params: WFParams, rng: np.random.Generator, dt: float = 1e-4, paths: int | None = None
) -> WFBatch:
    """Terminal frequencies of independent Wright-Fisher paths started at ``w0``.

    ``w0`` is a scalar (with ``paths`` copies) or an array of starts.  The
    step is shrunk so that an integer number of steps reaches ``horizon``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    w = np.array(np.broadcast_to(np.asarray(w0, dtype=float), (paths,) if paths is not None else np.shape(w0)))
    w = np.atleast_1d(w).astype(float)
    if np.any((w < 0) | (w > 1)):
        raise ValueError("allele frequency outside [0, 1]")
    steps = int(math.ceil(horizon / dt - 1e-9)) if horizon > 0 else 0
    h = horizon / steps if steps else 0.0
    clamps = 0
    done = 0
    block = max(1, (1 << 20) // max(w.size, 1))
    while done < steps:
        s = min(block, steps - done)
        noise = rng.standard_normal((s, w.size))
        clamps += _moran.wf_euler(w, s, h, params.drift_up, params.drift_down, params.diffusion, noise)
        done += s
    return WFBatch(w, int(clamps), steps)


# ---------------------------------------------------------------------------
# substitution Fleming-Viot process


@dataclass
class SFVPState:
    time: float
    trait: float
    n_hat: float
    marker_law: FVParticleSystem | WFState


@dataclass
class SFVPRecord:
    time: float
    trait: float
    n_hat: float
    marker_mean: float
    marker_var: float
    marker_heterozygosity: float
    jump: bool


@dataclass
class SFVPResult:
    state: SFVPState
    status: str  # "completed" or "non-viable"
    records: list[SFVPRecord]
    n_jumps: int


def _law_summary(law) -> tuple[float, float, float]:
    if isinstance(law, WFState):
        w = law.w_a
        return 1.0 - w, w * (1.0 - w), 2.0 * w * (1.0 - w)
    return law.mean(), law.variance(), law.heterozygosity()


def hitchhike(w_a: float, rng: np.random.Generator) -> float:
    """Post-substitution frequency of ``a``: 1 with probability ``w_a``, else 0."""
    return 1.0 if rng.random() < w_a else 0.0


def sfvp_jump(spec: ModelSpec, state: SFVPState, y: float, rng: np.random.Generator) -> SFVPState:
    """Substitute trait ``y`` in place, collapsing the marker law onto one marker.

    The surviving marker is drawn from the current law: a uniformly chosen
    particle in continuous mode, allele ``a`` with probability ``W_a`` in
    two-allele mode.
    """
    law = state.marker_law
    n = float(equilibrium_mass(spec, y))
    if isinstance(law, WFState):
        state.marker_law = WFState(state.time, y, hitchhike(law.w_a, rng))
    else:
        v = law.sample_marker(rng)
        law.reset_to(v)
        law.trait, law.n_hat = y, n
        law.drift_rate = float(spec.b(y))
        law.bracket = 2.0 * law.drift_rate / n if n > 0 else math.inf
    state.trait, state.n_hat = y, n
    return state


def sfvp_init(spec: ModelSpec, x0: float, u0, N: int = 500, r_cfg: float = 100.0) -> SFVPState:
    """SFVP started from the Dirac marker law at ``u0``."""
    n = float(equilibrium_mass(spec, x0))
    if n <= 0.0:
        raise ValueError(f"initial trait {x0} is not viable")
    if spec.two_allele:
        w = 1.0 if spec.marker_space.index(u0) == 0.0 else 0.0
        return SFVPState(0.0, float(x0), n, WFState(0.0, float(x0), w))
    return SFVPState(0.0, float(x0), n, FVParticleSystem.for_trait(spec, x0, u0, N=N, r_cfg=r_cfg))


def _advance_law(spec, state: SFVPState, t: float, rng, dt: float) -> None:
    law = state.marker_law
    if isinstance(law, WFState):
        if t > law.time:
            params = WFParams.for_trait(spec, state.trait)
            batch = wf_simulate(law.w_a, t - law.time, params, rng, dt=dt, paths=1)
            state.marker_law = WFState(t, state.trait, float(batch.w[0]))
    else:
        fv_advance(law, t, rng)
    state.time = t


def sfvp_run(
    spec: ModelSpec,
    x0: float,
    u0,
    horizon: float,
    rng: np.random.Generator,
    recorder: Callable[[SFVPRecord], None] | None = None,
    sample_interval: float | None = None,
    N: int = 500,
    r_cfg: float = 100.0,
    dt: float = 1e-3,
) -> SFVPResult:
    """Simulate the substitution Fleming-Viot process on ``[0, horizon]``.

    Between trait substitutions the marker law evolves as a Fleming-Viot
    process at the current trait (Moran particles, or the Wright-Fisher
    diffusion in two-allele mode).  Substitutions follow the TSS thinning
    scheme; at each one the law collapses onto a single marker drawn from
    it.  Records are taken at multiples of ``sample_interval`` and right
    after each substitution (``jump=True``).
    """
    state = sfvp_init(spec, x0, u0, N=N, r_cfg=r_cfg)
    records: list[SFVPRecord] = []

    def record(jump: bool):
        rec = SFVPRecord(state.time, state.trait, state.n_hat, *_law_summary(state.marker_law), jump)
        records.append(rec)
        if recorder is not None:
            recorder(rec)

    step = sample_interval if sample_interval and sample_interval > 0 else None
    i_sample = 0
    n_jumps = 0
    status = "completed"
    while True:
        x = state.trait
        envelope = float(spec.b(x)) * state.n_hat
        t_prop = state.time + rng.exponential(1.0 / envelope) if envelope > 0 else math.inf
        while step is not None and i_sample * step <= min(t_prop, horizon):
            _advance_law(spec, state, i_sample * step, rng, dt)
            record(False)
            i_sample += 1
        if t_prop > horizon:
            _advance_law(spec, state, horizon, rng, dt)
            break
        _advance_law(spec, state, t_prop, rng, dt)
        y = _draw_trait_step(spec, x, rng)
        if rng.random() < jump_acceptance(spec, x, y):
            if not is_viable(spec, y):
                status = "non-viable"
                break
            sfvp_jump(spec, state, y, rng)
            n_jumps += 1
            record(True)
    return SFVPResult(state, status, records, n_jumps)


# ---------------------------------------------------------------------------
# dimorphic populations


def dimorphic_bracket(spec: ModelSpec, x: float, y: float, n_x: float, n_y: float) -> float:
    """Resampling coefficient of the trait-``x`` marker law next to a coexisting ``y``.

    ``(b(x) + d(x) + eta(x) [C(0) n_x + C(x - y) n_y]) / (n_x + n_y)``.
    """
    eco = spec.ecology
    load = eco.eta(x) * (eco.C(0.0) * n_x + eco.C(x - y) * n_y)
    return float((eco.b(x) + eco.d(x) + load) / (n_x + n_y))


@dataclass
class DimorphicResult:
    n1: float
    n2: float
    systems: tuple[FVParticleSystem, FVParticleSystem]
    trajectories: tuple[FVTrajectory, FVTrajectory]


def dimorphic_fv_run(
    spec: ModelSpec,
    x0: float,
    y: float,
    u1,
    u2,
    horizon: float,
    rngs: tuple[np.random.Generator, np.random.Generator],
    sample_interval: float = 0.1,
    N: int = 500,
    r_cfg: float = 100.0,
    equilibrium: tuple[float, float] | None = None,
    heterozygosity: bool = False,
) -> DimorphicResult:
    """Independent marker laws of two coexisting traits ``x0`` and ``y``.

    Both laws start as Dirac masses at ``u1`` and ``u2`` and are driven by
    separate generators.
    """
    if equilibrium is None:
        eq = lv_coexistence_equilibrium(spec, x0, y)
        if eq is None:
            raise NoCoexistence(f"traits {x0} and {y} do not coexist")
        n1, n2 = eq.n1, eq.n2
    else:
        n1, n2 = equilibrium
        if not (n1 > 0 and n2 > 0):
            raise NoCoexistence("equilibrium masses must be positive")
    g1 = dimorphic_bracket(spec, x0, y, n1, n2)
    g2 = dimorphic_bracket(spec, y, x0, n2, n1)
    s1 = FVParticleSystem.for_trait(spec, x0, u1, N=N, r_cfg=r_cfg, bracket=g1)
    s2 = FVParticleSystem.for_trait(spec, y, u2, N=N, r_cfg=r_cfg, bracket=g2)
    s1.n_hat, s2.n_hat = n1, n2
    times = np.arange(0.0, horizon + 1e-12, sample_interval)
    tr1 = fv_sample(s1, times, rngs[0], heterozygosity)
    tr2 = fv_sample(s2, times, rngs[1], heterozygosity)
    return DimorphicResult(n1, n2, (s1, s2), (tr1, tr2))
