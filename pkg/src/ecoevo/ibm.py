"""Exact event-driven simulation of the individual-based model.

The population is a point measure with mass ``1/K`` per individual.
Individuals are grouped by trait value; each :class:`TraitGroup` keeps the
markers of its members and the running competition sum
``sum_h C(x - x_h) n_h`` so that one event costs ``O(G)`` for ``G``
distinct traits.  Rates never read markers.

Two random streams drive a run: the main stream (event times, event
choice, individual choice, mutation coin flips and trait steps) and a
marker stream (marker displacements).  Keeping them apart makes the
trait-marginal event sequence independent of the marker kernel.
"""
from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy import stats

from .model import Discrete, ModelSpec, sample_conditioned_normal
from .rng import DrawBuffer


class ExtinctPopulation(RuntimeError):
    pass


class UnknownTrait(KeyError):
    pass


class EventKind(enum.IntEnum):
    BIRTH = 0
    BIRTH_TRAIT_MUTATION = 1
    BIRTH_MARKER_MUTATION = 2
    BIRTH_DOUBLE_MUTATION = 3
    NATURAL_DEATH = 4
    COMPETITION_DEATH = 5

    @property
    def is_birth(self) -> bool:
        return self <= 3


@dataclass(frozen=True, slots=True)
class EventRecord:
    time: float
    kind: EventKind
    parent_trait: float
    parent_marker: float
    child_trait: float | None = None
    child_marker: float | None = None


class TraitGroup:
    """Individuals sharing one trait value.

    ``markers`` holds one marker per individual (order is irrelevant);
    ``comp`` maps every present trait to ``C(trait - other)`` and
    ``comp_sum`` is ``sum_h C(trait - x_h) n_h`` including self-competition.
    """

    __slots__ = ("trait", "markers", "b", "d", "eta", "comp", "comp_sum")

    def __init__(self, trait: float, b: float, d: float, eta: float):
        self.trait = trait
        self.markers: list[float] = []
        self.b = b
        self.d = d
        self.eta = eta
        self.comp: dict[float, float] = {}
        self.comp_sum = 0.0

    @property
    def count(self) -> int:
        return len(self.markers)

    @property
    def birth_rate(self) -> float:
        return self.b * len(self.markers)

    @property
    def death_base(self) -> float:
        return self.d * len(self.markers)

    def marker_atoms(self, tol: float = 1e-12) -> dict[float, int]:
        """Multiset of markers, merging values closer than ``tol``."""
        if not self.markers:
            return {}
        vals = sorted(self.markers)
        atoms: dict[float, int] = {}
        rep = vals[0]
        atoms[rep] = 0
        for v in vals:
            if v - rep > tol:
                rep = v
                atoms[rep] = 0
            atoms[rep] += 1
        return atoms

    def __repr__(self):
        return f"TraitGroup(trait={self.trait!r}, count={self.count})"


class PopulationState:
    """Rescaled point measure ``(1/K) sum_i delta_(x_i, u_i)`` at ``time``."""

    def __init__(self, spec: ModelSpec, time: float = 0.0):
        self.spec = spec
        self.K = spec.K
        self.time = float(time)
        self.groups: dict[float, TraitGroup] = {}
        self.total_count = 0
        self._draws: _Draws | None = None

    # -- bookkeeping ------------------------------------------------------

    def _group(self, x: float) -> TraitGroup:
        g = self.groups.get(x)
        if g is not None:
            return g
        s = self.spec
        g = TraitGroup(x, float(s.b(x)), float(s.d(x)), float(s.eta(x)))
        C = s.ecology.comp_kernel
        for h in self.groups.values():
            c_gh = float(C(x - h.trait))
            c_hg = float(C(h.trait - x))
            g.comp[h.trait] = c_gh
            g.comp_sum += c_gh * len(h.markers)
            h.comp[x] = c_hg
        g.comp[x] = float(C(0.0))
        self.groups[x] = g
        return g

    def _add(self, x: float, u: float) -> None:
        g = self._group(x)
        g.markers.append(u)
        for h in self.groups.values():
            h.comp_sum += h.comp[x]
        self.total_count += 1

    def _remove(self, g: TraitGroup, idx: int) -> float:
        m = g.markers
        u = m[idx]
        m[idx] = m[-1]
        m.pop()
        x = g.trait
        for h in self.groups.values():
            h.comp_sum -= h.comp[x]
        self.total_count -= 1
        if not m:
            del self.groups[x]
            for h in self.groups.values():
                del h.comp[x]
        return u

    # -- views ------------------------------------------------------------

    @property
    def mass(self) -> float:
        """Total mass ``<nu, 1> = N / K``."""
        return self.total_count / self.K

    def trait_mass(self, x: float) -> float:
        g = self.groups.get(x)
        return 0.0 if g is None else len(g.markers) / self.K

    def traits(self) -> list[float]:
        return sorted(self.groups)

    def snapshot(self) -> list[tuple[float, float, int]]:
        """``(trait, marker, count)`` rows sorted by trait then marker."""
        rows = []
        for x in sorted(self.groups):
            for u, c in sorted(Counter(self.groups[x].markers).items()):
                rows.append((x, u, c))
        return rows

    def copy(self) -> "PopulationState":
        new = PopulationState(self.spec, self.time)
        for x, g in self.groups.items():
            h = TraitGroup(x, g.b, g.d, g.eta)
            h.markers = list(g.markers)
            h.comp = dict(g.comp)
            h.comp_sum = g.comp_sum
            new.groups[x] = h
        new.total_count = self.total_count
        return new

    def check_caches(self) -> float:
        """Largest relative deviation of cached rates from a from-scratch recomputation."""
        s = self.spec
        worst = 0.0
        n = sum(len(g.markers) for g in self.groups.values())
        if n != self.total_count:
            return math.inf
        for g in self.groups.values():
            fresh = sum(float(s.C(g.trait - h.trait)) * len(h.markers) for h in self.groups.values())
            worst = max(worst, abs(g.comp_sum - fresh) / max(abs(fresh), 1e-300))
            for var, val in (("b", s.b(g.trait)), ("d", s.d(g.trait)), ("eta", s.eta(g.trait))):
                cached = getattr(g, var)
                worst = max(worst, abs(cached - val) / max(abs(val), 1e-300))
        return worst

    def __repr__(self):
        return f"PopulationState(time={self.time:g}, N={self.total_count}, traits={self.traits()})"


class _Draws:
    __slots__ = ("rng", "main", "marker")

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        marker_rng = np.random.Generator(np.random.Philox(key=int(rng.integers(0, 2**63))))
        self.main = DrawBuffer(rng)
        self.marker = DrawBuffer(marker_rng)


def _draws(state: PopulationState, rng) -> _Draws:
    d = state._draws
    if d is None or d.rng is not rng:
        if not isinstance(rng, np.random.Generator):
            raise TypeError("rng must be a numpy Generator")
        d = state._draws = _Draws(rng)
    return d


# ---------------------------------------------------------------------------
# construction


def _check_marker(spec: ModelSpec, u) -> float:
    ms = spec.marker_space
    if isinstance(ms, Discrete):
        return ms.index(u)
    u = float(u)
    if not ms.contains(u):
        raise ValueError(f"marker {u} outside {ms}")
    return u


def _check_trait(spec: ModelSpec, x) -> float:
    x = float(x)
    if not spec.trait_space.contains(x):
        raise ValueError(f"trait {x} outside {spec.trait_space}")
    return x


def init_population(spec: ModelSpec, composition: Mapping[float, Mapping], time: float = 0.0) -> PopulationState:
    """State with ``composition[trait][marker]`` individuals of each type."""
    state = PopulationState(spec, time)
    for x, markers in composition.items():
        x = _check_trait(spec, x)
        for u, c in markers.items():
            u = _check_marker(spec, u)
            for _ in range(int(c)):
                state._add(x, u)
    return state


def init_monomorphic(spec: ModelSpec, x0: float, u0, n0: float) -> PopulationState:
    """``round(n0 K)`` identical individuals ``(x0, u0)`` at time 0."""
    if n0 < 0:
        raise ValueError("initial mass must be non-negative")
    count = int(math.floor(n0 * spec.K + 0.5))
    x0 = _check_trait(spec, x0)
    u0 = _check_marker(spec, u0)
    if count == 0:
        return PopulationState(spec)
    return init_population(spec, {x0: {u0: count}})


def inject_mutant(state: PopulationState, y: float, v) -> PopulationState:
    """Add one individual ``(y, v)`` in place; returns the same state."""
    state._add(_check_trait(state.spec, y), _check_marker(state.spec, v))
    return state


def marker_distribution(state: PopulationState, x: float, tol: float = 1e-12) -> dict[float, float]:
    """Normalised marker atoms of the trait-``x`` subpopulation."""
    g = state.groups.get(x)
    if g is None:
        raise UnknownTrait(x)
    n = len(g.markers)
    return {u: c / n for u, c in g.marker_atoms(tol).items()}


# ---------------------------------------------------------------------------
# dynamics


def total_event_rate(state: PopulationState) -> float:
    """Sum over individuals of ``b(x) + d(x) + eta(x) (1/K) sum_i C(x - x_i)``."""
    return _rates_total(state)


def _rates_total(state: PopulationState) -> float:
    K = state.K
    total = 0.0
    for g in state.groups.values():
        total += len(g.markers) * (g.b + g.d + g.eta * g.comp_sum / K)
    return total


def _execute(state: PopulationState, dr: _Draws, total: float):
    """Choose and apply one event given the current total rate.

    One uniform picks the event category and, through its residual within
    the chosen category, the individual.  A second uniform (births only)
    settles both mutation coins by partitioning ``[0, 1)`` into
    ``[0, pq)``, ``[pq, p)``, ``[p, p + q - pq)`` and the rest.

    Returns ``(kind, parent_trait, parent_marker, child_trait, child_marker)``.
    """
    K = state.K
    main = dr.main
    r = main.uniform() * total
    chosen = None
    kind = 0
    for g in state.groups.values():
        n = len(g.markers)
        rate = g.b * n
        if r < rate:
            chosen = g
            break
        r -= rate
        rate = g.d * n
        if r < rate:
            chosen, kind = g, EventKind.NATURAL_DEATH
            break
        r -= rate
        rate = g.eta * n * g.comp_sum / K
        if r < rate:
            chosen, kind = g, EventKind.COMPETITION_DEATH
            break
        r -= rate
    if chosen is None:
        # round-off at the top of the cumulative sum
        chosen = next(reversed(state.groups.values()))
        n = len(chosen.markers)
        kind, r, rate = EventKind.COMPETITION_DEATH, 0.0, 1.0
    idx = int(r / rate * n)
    if idx >= n:
        idx = n - 1
    x = chosen.trait
    if kind:
        u = state._remove(chosen, idx)
        return kind, x, u, None, None

    spec = state.spec
    u = chosen.markers[idx]
    p, q = spec.p_K, spec.mutation.q_K
    trait_mut = marker_mut = False
    if p > 0.0 or q > 0.0:
        w = main.uniform()
        if w < p:
            trait_mut = True
            marker_mut = w < p * q
        else:
            marker_mut = w < p + q - p * q
    y, v = x, u
    if trait_mut:
        ts = spec.trait_space
        y = sample_conditioned_normal(x, spec.mutation.trait_sd, ts.lo, ts.hi, main.normal)
    if marker_mut:
        v = _mutate_marker(spec, u, dr.marker)
    state._add(y, v)
    return _BIRTH_KINDS[trait_mut][marker_mut], x, u, y, v


_BIRTH_KINDS = {
    False: {False: EventKind.BIRTH, True: EventKind.BIRTH_MARKER_MUTATION},
    True: {False: EventKind.BIRTH_TRAIT_MUTATION, True: EventKind.BIRTH_DOUBLE_MUTATION},
}


def _mutate_marker(spec: ModelSpec, u: float, buf: DrawBuffer) -> float:
    ker = spec.mutation.marker_kernel
    if isinstance(spec.marker_space, Discrete):
        flip = ker.q_a if u == 0.0 else ker.q_A
        return 1.0 - u if buf.uniform() < flip else u
    ms = spec.marker_space
    return sample_conditioned_normal(u, math.sqrt(ker.variance), ms.lo, ms.hi, buf.normal)


def step(state: PopulationState, rng: np.random.Generator) -> EventRecord:
    """Perform one event of the jump chain in place and describe it."""
    dr = _draws(state, rng)
    total = _rates_total(state)
    if total <= 0.0:
        raise ExtinctPopulation(f"no individuals left at time {state.time}")
    state.time -= math.log(1.0 - dr.main.uniform()) / total
    kind, x, u, y, v = _execute(state, dr, total)
    return EventRecord(state.time, kind, x, u, y, v)


@dataclass
class RunResult:
    state: PopulationState
    status: str  # "completed", "extinct" or "stopped"
    n_events: int
    event_log: list[EventRecord] | None = None


def run_until(
    state: PopulationState,
    t_end: float,
    rng: np.random.Generator,
    recorder: Callable[[float, PopulationState], None] | None = None,
    sample_interval: float | None = None,
    log_events: bool = False,
    stop: Callable[[PopulationState], bool] | None = None,
) -> RunResult:
    """Simulate in place until ``t_end``.

    ``recorder(t, state)`` is called at ``t0 + i * sample_interval`` (``t0``
    the starting time, up to and including ``t_end``) with the state as it
    is at that instant.  Extinction ends the run early with status
    ``"extinct"``; ``stop(state)`` returning true after an event ends it with
    status ``"stopped"``.  The event drawn past ``t_end`` is discarded, which
    is exact by memorylessness.
    """
    if t_end < state.time:
        raise ValueError("t_end is before the current time")
    if recorder is not None and not (sample_interval and sample_interval > 0):
        raise ValueError("a recorder needs a positive sample_interval")
    dr = _draws(state, rng)
    main = dr.main
    log: list[EventRecord] | None = [] if log_events else None
    t0 = state.time
    i_sample = 0
    next_sample = t0 if recorder is not None else math.inf
    last_sample = t_end + 1e-9 * max(1.0, abs(t_end))
    n_events = 0
    status = "completed"
    while True:
        total = _rates_total(state)
        t = state.time - math.log(1.0 - main.uniform()) / total if total > 0.0 else math.inf
        while next_sample <= last_sample and next_sample < t:
            recorder(next_sample, state)
            i_sample += 1
            next_sample = t0 + i_sample * sample_interval
        if t > t_end:
            if total <= 0.0:
                status = "extinct"
            else:
                state.time = t_end
            break
        state.time = t
        ev = _execute(state, dr, total)
        n_events += 1
        if log is not None:
            log.append(EventRecord(t, *ev))
        if stop is not None and stop(state):
            status = "stopped"
            break
    return RunResult(state, status, n_events, log)


# ---------------------------------------------------------------------------
# generator


def generator_drift(
    state: PopulationState,
    phi: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n_samples: int = 100_000,
    rng: np.random.Generator | None = None,
) -> float:
    """Drift ``<nu, (B - D(nu)) phi>`` of ``<nu, phi>`` at the current state.

    ``phi(x, u)`` must accept arrays.  Kernel expectations are exact for the
    two-allele marker kernel and Monte-Carlo (``n_samples`` draws from an
    inverse-CDF truncated normal, independent of the engine's rejection
    sampler) for Gaussian kernels.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    spec = state.spec
    K = state.K
    p, q = spec.p_K, spec.mutation.q_K
    ts, ms = spec.trait_space, spec.marker_space
    sd_x = spec.mutation.trait_sd
    ker = spec.mutation.marker_kernel
    two_allele = isinstance(ms, Discrete)

    def trait_draws(x):
        a, b = (ts.lo - x) / sd_x, (ts.hi - x) / sd_x
        return x + sd_x * stats.truncnorm.rvs(a, b, size=n_samples, random_state=rng)

    def marker_law(u):
        """(values, weights) of the mutated marker."""
        if two_allele:
            flip = ker.q_a if u == 0.0 else ker.q_A
            return np.array([u, 1.0 - u]), np.array([1.0 - flip, flip])
        sd = math.sqrt(ker.variance)
        a, b = (ms.lo - u) / sd, (ms.hi - u) / sd
        vals = u + sd * stats.truncnorm.rvs(a, b, size=n_samples, random_state=rng)
        return vals, np.full(n_samples, 1.0 / n_samples)

    total = 0.0
    for x, g in state.groups.items():
        death = g.d + g.eta * g.comp_sum / K
        need_k = p > 0.0
        ks = trait_draws(x) if need_k else None
        for u, c in Counter(g.markers).items():
            base = float(phi(np.array([x]), np.array([u]))[0])
            birth = (1 - p) * (1 - q) * base
            if p > 0.0:
                birth += p * (1 - q) * float(np.mean(phi(ks, np.full(ks.shape, u))))
            if q > 0.0:
                vals, w = marker_law(u)
                birth += q * (1 - p) * float(np.dot(w, phi(np.full(vals.shape, x), vals)))
                if p > 0.0:
                    if two_allele:
                        e = sum(wi * np.mean(phi(ks, np.full(ks.shape, vi))) for vi, wi in zip(vals, w))
                    else:
                        e = np.mean(phi(ks, rng.permutation(vals)))
                    birth += p * q * float(e)
            total += c / K * (g.b * birth - death * base)
    return total
