"""Model definition and the deterministic analytic layer.

A :class:`ModelSpec` bundles the ecological rate functions (birth ``b``,
intrinsic death ``d``, competition sensitivity ``eta`` and competition
kernel ``C``), the trait and marker mutation kernels, the trait and marker
spaces and the system size ``K``.  The functions below evaluate the
quantities every simulator relies on: monomorphic equilibria, invasion
fitness, the invasion-implies-fixation classification, logistic and
two-trait Lotka-Volterra trajectories, and the jump rate of the trait
substitution sequence.

Times of the ODE solvers are ecological (individual lifetime) units.  The
jump rate returned by :func:`tss_jump_rate` is per unit of the slow
trait-mutation time scale, i.e. per ``K`` ecological time units.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Union

import numpy as np
from scipy import integrate, special

ArrayLike = Union[float, np.ndarray]


class ModelError(ValueError):
    """Invalid model definition."""


class SingularSystem(ArithmeticError):
    pass


class MutationSamplingError(RuntimeError):
    """Rejection sampling of a conditioned kernel hit its retry cap."""


# ---------------------------------------------------------------------------
# parametric functions


@dataclass(frozen=True)
class ParamFn:
    """Rate function of a single real argument.

    ``kind="constant"`` evaluates to ``amplitude`` everywhere;
    ``kind="gaussian"`` evaluates to
    ``amplitude * exp(-(z - center)**2 / (2 * sigma**2))``.
    """

    kind: str = "constant"
    amplitude: float = 1.0
    sigma: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "gaussian"):
            raise ModelError(f"unknown function kind {self.kind!r}")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise ModelError("gaussian sigma must be positive")

    @classmethod
    def constant(cls, value: float) -> "ParamFn":
        return cls("constant", float(value))

    @classmethod
    def gaussian(cls, sigma: float, amplitude: float = 1.0, center: float = 0.0) -> "ParamFn":
        return cls("gaussian", float(amplitude), float(sigma), float(center))

    def __call__(self, z: ArrayLike) -> ArrayLike:
        if self.kind == "constant":
            if np.ndim(z):
                return np.full(np.shape(z), self.amplitude)
            return self.amplitude
        if np.ndim(z):
            z = np.asarray(z, dtype=float)
            return self.amplitude * np.exp(-((z - self.center) ** 2) / (2.0 * self.sigma**2))
        return self.amplitude * math.exp(-((z - self.center) ** 2) / (2.0 * self.sigma**2))

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.amplitude}
        return {"kind": "gaussian", "amplitude": self.amplitude, "sigma": self.sigma, "center": self.center}

    @classmethod
    def from_dict(cls, d: dict) -> "ParamFn":
        kind = d.get("kind")
        if kind == "constant":
            return cls.constant(_req(d, "value"))
        if kind == "gaussian":
            return cls.gaussian(_req(d, "sigma"), d.get("amplitude", 1.0), d.get("center", 0.0))
        raise ModelError(f"unknown function kind {kind!r}")


# ---------------------------------------------------------------------------
# spaces


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ModelError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")

    def contains(self, z: float) -> bool:
        return self.lo <= z <= self.hi

    def grid(self, n: int) -> np.ndarray:
        return np.linspace(self.lo, self.hi, n)

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Discrete:
    """Finite marker space.  Markers are stored as label indices ``0.0, 1.0, ...``."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) < 2:
            raise ModelError("a discrete space needs at least two labels")
        if len(set(self.labels)) != len(self.labels):
            raise ModelError("discrete labels must be distinct")

    def contains(self, z: float) -> bool:
        return z in range(len(self.labels))

    def index(self, label: str | float) -> float:
        if isinstance(label, str):
            return float(self.labels.index(label))
        if not self.contains(label):
            raise ModelError(f"{label!r} is not a marker of {self.labels}")
        return float(label)

    def label(self, z: float) -> str:
        return self.labels[int(z)]

    def to_dict(self) -> dict:
        return {"labels": list(self.labels)}


Space = Union[Interval, Discrete]


def space_from_dict(d: Any) -> Space:
    if isinstance(d, dict) and "labels" in d:
        return Discrete(tuple(str(s) for s in d["labels"]))
    if isinstance(d, (list, tuple)) and len(d) == 2 and not isinstance(d[0], str):
        return Interval(float(d[0]), float(d[1]))
    if isinstance(d, dict):
        return Interval(float(_req(d, "lo")), float(_req(d, "hi")))
    raise ModelError(f"cannot read a space from {d!r}")


# ---------------------------------------------------------------------------
# kernels


def normal_interval_mass(center: float, sd: float, lo: float, hi: float) -> float:
    """Probability that ``N(center, sd**2)`` falls in ``[lo, hi]``."""
    a = (lo - center) / (sd * math.sqrt(2.0))
    b = (hi - center) / (sd * math.sqrt(2.0))
    return 0.5 * (special.erf(b) - special.erf(a))


def sample_conditioned_normal(
    center: float, sd: float, lo: float, hi: float, normal: Callable[[], float], cap: int = 10_000
) -> float:
    """Draw ``center + sd*Z`` conditioned to ``[lo, hi]`` by rejection."""
    for _ in range(cap):
        z = center + sd * normal()
        if lo <= z <= hi:
            return z
    raise MutationSamplingError(f"no draw of N({center}, {sd}^2) in [{lo}, {hi}] after {cap} tries")


@dataclass(frozen=True)
class GaussianStep:
    """Centred Gaussian marker step of variance ``variance``, conditioned to the marker interval."""

    variance: float

    kind = "gaussian"

    def __post_init__(self):
        if not self.variance > 0:
            raise ModelError("marker step variance must be positive")

    def to_dict(self) -> dict:
        return {"kind": "gaussian", "variance": self.variance}


@dataclass(frozen=True)
class TwoAllele:
    """Two-allele marker kernel.

    At a marker mutation event an ``a`` (index 0) parent produces an ``A``
    child with probability ``q_a``; an ``A`` parent produces an ``a`` child
    with probability ``q_A``.  Otherwise the marker is copied.
    """

    q_a: float
    q_A: float

    kind = "two-allele"

    def __post_init__(self):
        for q in (self.q_a, self.q_A):
            if not 0.0 <= q <= 1.0:
                raise ModelError("two-allele flip probabilities must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {"kind": "two-allele", "q_a": self.q_a, "q_A": self.q_A}


MarkerKernel = Union[GaussianStep, TwoAllele]


def marker_kernel_from_dict(d: dict) -> MarkerKernel:
    kind = d.get("kind")
    if kind == "gaussian":
        return GaussianStep(float(_req(d, "variance")))
    if kind == "two-allele":
        return TwoAllele(float(_req(d, "q_a")), float(_req(d, "q_A")))
    raise ModelError(f"unknown marker kernel {kind!r}")


@dataclass(frozen=True)
class MutationModel:
    """Trait and marker mutation at birth.

    ``p_K=None`` means the default trait mutation probability ``1/K**2``.
    An explicit value overrides it (``0.0`` disables trait mutations).
    """

    trait_variance: float
    marker_kernel: MarkerKernel
    q_K: float
    p_K: float | None = None

    def __post_init__(self):
        if not self.trait_variance > 0:
            raise ModelError("trait kernel variance must be positive")
        if not 0.0 <= self.q_K < 1.0:
            raise ModelError("q_K must lie in [0, 1)")
        if self.p_K is not None and not 0.0 <= self.p_K <= 1.0:
            raise ModelError("p_K must lie in [0, 1]")

    @property
    def trait_sd(self) -> float:
        return math.sqrt(self.trait_variance)

    def to_dict(self) -> dict:
        d = {"trait_variance": self.trait_variance, "marker_kernel": self.marker_kernel.to_dict(), "q_K": self.q_K}
        if self.p_K is not None:
            d["p_K"] = self.p_K
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MutationModel":
        p = d.get("p_K")
        return cls(
            float(_req(d, "trait_variance")),
            marker_kernel_from_dict(_req(d, "marker_kernel")),
            float(_req(d, "q_K")),
            None if p is None else float(p),
        )


# ---------------------------------------------------------------------------
# ecology


@dataclass(frozen=True)
class EcologyModel:
    birth: ParamFn
    death: ParamFn
    comp_sensitivity: ParamFn
    comp_kernel: ParamFn

    def b(self, x):
        return self.birth(x)

    def d(self, x):
        return self.death(x)

    def eta(self, x):
        return self.comp_sensitivity(x)

    def C(self, z):
        return self.comp_kernel(z)

    def bounds(self, trait_space: Interval, n: int = 513) -> dict:
        """Grid estimates of ``sup b``, ``sup d`` and ``inf eta(x) C(x-y)``."""
        g = trait_space.grid(n)
        b = np.asarray(self.birth(g), dtype=float)
        d = np.asarray(self.death(g), dtype=float)
        etac = np.asarray(self.comp_sensitivity(g), dtype=float)[:, None] * np.asarray(
            self.comp_kernel(g[:, None] - g[None, :]), dtype=float
        )
        i, j = np.unravel_index(np.argmin(etac), etac.shape)
        return {
            "b_max": float(b.max()),
            "b_min": float(b.min()),
            "d_max": float(d.max()),
            "d_min": float(d.min()),
            "eta_C_min": float(etac[i, j]),
            "eta_C_argmin": (float(g[i]), float(g[j])),
        }

    def check(self, trait_space: Interval, n: int = 513) -> dict:
        bd = self.bounds(trait_space, n)
        if bd["b_min"] < 0:
            raise ModelError("birth rate is negative somewhere on the trait space")
        if bd["d_min"] < 0:
            raise ModelError("death rate is negative somewhere on the trait space")
        if not bd["eta_C_min"] > 0:
            x, y = bd["eta_C_argmin"]
            raise ModelError(f"eta(x)*C(x-y) must be bounded away from 0; got {bd['eta_C_min']:g} at x={x:g}, y={y:g}")
        return bd

    def to_dict(self) -> dict:
        return {
            "birth": self.birth.to_dict(),
            "death": self.death.to_dict(),
            "comp_sensitivity": self.comp_sensitivity.to_dict(),
            "comp_kernel": self.comp_kernel.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EcologyModel":
        return cls(*(ParamFn.from_dict(_req(d, k)) for k in ("birth", "death", "comp_sensitivity", "comp_kernel")))


@dataclass(frozen=True)
class ModelSpec:
    ecology: EcologyModel
    mutation: MutationModel
    trait_space: Interval
    marker_space: Space
    K: int
    name: str = ""
    bounds: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ModelError("K must be a positive integer")
        if not isinstance(self.trait_space, Interval):
            raise ModelError("the trait space must be an interval")
        two_allele = isinstance(self.mutation.marker_kernel, TwoAllele)
        if two_allele != isinstance(self.marker_space, Discrete):
            raise ModelError("two-allele kernels go with discrete marker spaces, gaussian steps with intervals")
        if two_allele and len(self.marker_space.labels) != 2:
            raise ModelError("the two-allele kernel needs exactly two marker labels")
        object.__setattr__(self, "bounds", self.ecology.check(self.trait_space))

    # mutation scaling -----------------------------------------------------

    @property
    def p_K(self) -> float:
        p = self.mutation.p_K
        return 1.0 / self.K**2 if p is None else p

    @property
    def q_K(self) -> float:
        return self.mutation.q_K

    @property
    def r_K(self) -> float:
        """Marker-to-trait mutation ratio under the nominal ``p_K = 1/K**2``."""
        return self.q_K * self.K**2

    @property
    def two_allele(self) -> bool:
        return isinstance(self.mutation.marker_kernel, TwoAllele)

    @property
    def limit_generator_scale(self) -> float:
        """``sigma**2 = r_K sigma_K**2 / K`` (gaussian) or ``r_bar = r_K / K`` (two-allele)."""
        if self.two_allele:
            return self.r_K / self.K
        return self.r_K * self.mutation.marker_kernel.variance / self.K

    # convenience evaluations ---------------------------------------------

    def b(self, x):
        return self.ecology.birth(x)

    def d(self, x):
        return self.ecology.death(x)

    def eta(self, x):
        return self.ecology.comp_sensitivity(x)

    def C(self, z):
        return self.ecology.comp_kernel(z)

    def with_changes(self, **kw) -> "ModelSpec":
        """Copy with top-level fields replaced; ``p_K``/``q_K`` go to the mutation model."""
        mut = {k: kw.pop(k) for k in ("p_K", "q_K", "marker_kernel", "trait_variance") if k in kw}
        spec = self
        if mut:
            spec = replace(spec, mutation=replace(spec.mutation, **mut))
        return replace(spec, **kw) if kw else spec

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "K": self.K,
            "ecology": self.ecology.to_dict(),
            "mutation": self.mutation.to_dict(),
            "trait_space": self.trait_space.to_dict(),
            "marker_space": self.marker_space.to_dict(),
        }
        if not self.name:
            del d["name"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        """Build from a config document.

        ``{"preset": name, ...}`` expands a named preset; any other keys are
        passed to the preset factory as keyword overrides.
        """
        if "preset" in d:
            opts = {k: v for k, v in d.items() if k != "preset"}
            return preset(d["preset"], **opts)
        return cls(
            EcologyModel.from_dict(_req(d, "ecology")),
            MutationModel.from_dict(_req(d, "mutation")),
            space_from_dict(_req(d, "trait_space")),
            space_from_dict(_req(d, "marker_space")),
            int(_req(d, "K")),
            d.get("name", ""),
        )


def _req(d: dict, key: str):
    try:
        return d[key]
    except (KeyError, TypeError):
        raise ModelError(f"missing field {key!r}") from None


# ---------------------------------------------------------------------------
# presets


def dieckmann_doebeli(
    K: int = 1000,
    sigma_b: float = 0.9,
    sigma_C: float = 0.8,
    marker: str = "gaussian",
    q_a: float = 0.5,
    q_A: float = 0.5,
    r_bar: float = 1.0,
    p_K: float | None = None,
    q_K: float | None = None,
    trait_variance: float = 0.1,
    marker_variance: float | None = None,
) -> ModelSpec:
    """Roughgarden / Dieckmann-Doebeli logistic competition model.

    ``b(x) = exp(-x**2 / (2 sigma_b**2))``, ``d = 0``, ``eta = 1``,
    ``C(z) = exp(-z**2 / (2 sigma_C**2))`` on traits ``[-1, 1]``, with trait
    kernel ``N(0, 0.1)`` conditioned to the trait space.  With
    ``marker="gaussian"`` markers live on ``[-2, 2]`` and mutate with
    probability ``1/sqrt(K)`` by a ``N(0, 1/sqrt(K))`` step.  With
    ``marker="two-allele"`` markers are ``{a, A}`` and a marker mutation
    happens with probability ``r_bar / K`` per birth.
    """
    eco = EcologyModel(
        birth=ParamFn.gaussian(sigma_b),
        death=ParamFn.constant(0.0),
        comp_sensitivity=ParamFn.constant(1.0),
        comp_kernel=ParamFn.gaussian(sigma_C),
    )
    if marker == "gaussian":
        kernel: MarkerKernel = GaussianStep(1.0 / math.sqrt(K) if marker_variance is None else marker_variance)
        space: Space = Interval(-2.0, 2.0)
        q = 1.0 / math.sqrt(K) if q_K is None else q_K
    elif marker == "two-allele":
        kernel = TwoAllele(q_a, q_A)
        space = Discrete(("a", "A"))
        q = r_bar / K if q_K is None else q_K
    else:
        raise ModelError(f"unknown marker model {marker!r}")
    return ModelSpec(
        ecology=eco,
        mutation=MutationModel(trait_variance, kernel, q, p_K),
        trait_space=Interval(-1.0, 1.0),
        marker_space=space,
        K=int(K),
        name="dieckmann-doebeli",
    )


PRESETS: dict[str, Callable[..., ModelSpec]] = {"dieckmann-doebeli": dieckmann_doebeli}


def preset(name: str, **overrides) -> ModelSpec:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ModelError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
    try:
        return factory(**overrides)
    except TypeError as e:
        raise ModelError(f"bad option for preset {name!r}: {e}") from None


# ---------------------------------------------------------------------------
# analytic layer


def _eco(model) -> EcologyModel:
    return model.ecology if isinstance(model, ModelSpec) else model


def is_viable(model, x: float) -> bool:
    eco = _eco(model)
    return eco.b(x) > eco.d(x)


def equilibrium_mass(model, x: ArrayLike) -> ArrayLike:
    """Stable equilibrium ``(b - d) / (eta C(0))`` of the monomorphic logistic equation.

    Nonviable traits (``b <= d``) get 0; use :func:`is_viable` to tell
    them apart from a genuine zero.
    """
    eco = _eco(model)
    n = (eco.b(x) - eco.d(x)) / (eco.eta(x) * eco.C(0.0))
    return np.maximum(n, 0.0) if np.ndim(n) else max(n, 0.0)


def invasion_fitness(model, y: ArrayLike, x: float) -> ArrayLike:
    """Initial per-capita growth rate ``f(y; x)`` of a rare ``y`` in a resident ``x`` at equilibrium."""
    eco = _eco(model)
    return eco.b(y) - eco.d(y) - eco.eta(y) * eco.C(np.subtract(y, x)) * equilibrium_mass(eco, x)


class IIF(enum.Enum):
    MUTANT_DIES = "mutant-dies"
    FIXATION_REPLACES = "fixation-replaces"
    DEGENERATE = "degenerate"


def classify_iif(model, x: float, y: float, rtol: float = 1e-12) -> IIF:
    """Which branch of the invasion-implies-fixation condition the pair ``(x, y)`` falls in.

    Ratios within ``rtol`` of each other count as equal, which makes the
    pair ``DEGENERATE``; so does mutual invasibility (coexistence).
    """
    eco = _eco(model)

    def ratio(z, w):
        return (eco.b(z) - eco.d(z)) / (eco.eta(z) * eco.C(z - w))

    def cmp(lhs, rhs):
        if abs(lhs - rhs) <= rtol * max(abs(lhs), abs(rhs), 1e-300):
            return 0
        return -1 if lhs < rhs else 1

    invade = cmp(ratio(y, x), ratio(x, x))
    if invade < 0:
        return IIF.MUTANT_DIES
    if invade > 0 and cmp(ratio(x, y), ratio(y, y)) < 0:
        return IIF.FIXATION_REPLACES
    return IIF.DEGENERATE


def _rk4(rhs, y0: np.ndarray, horizon: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    n = int(math.ceil(horizon / dt - 1e-9))
    t = np.linspace(0.0, horizon, n + 1)
    y = np.empty((n + 1, len(y0)))
    y[0] = y0
    cur = np.asarray(y0, dtype=float)
    for i in range(n):
        h = t[i + 1] - t[i]
        k1 = rhs(cur)
        k2 = rhs(cur + 0.5 * h * k1)
        k3 = rhs(cur + 0.5 * h * k2)
        k4 = rhs(cur + h * k3)
        cur = cur + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        y[i + 1] = cur
    return t, y


def logistic_solve(model, x: float, n0: float, horizon: float, dt: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """RK4 trajectory ``(t, n)`` of ``dn/dt = (b - d - eta C(0) n) n``."""
    if n0 < 0:
        raise ValueError("initial mass must be non-negative")
    eco = _eco(model)
    r = eco.b(x) - eco.d(x)
    a = eco.eta(x) * eco.C(0.0)
    t, y = _rk4(lambda n: (r - a * n) * n, np.array([n0], dtype=float), horizon, dt)
    return t, y[:, 0]


def lv_solve(
    model, x1: float, x2: float, n0: tuple[float, float], horizon: float, dt: float = 1e-3
) -> tuple[np.ndarray, np.ndarray]:
    """RK4 trajectory ``(t, n)`` of the two-trait Lotka-Volterra system; ``n`` has shape ``(steps+1, 2)``."""
    if min(n0) < 0:
        raise ValueError("initial masses must be non-negative")
    eco = _eco(model)
    r = np.array([eco.b(x1) - eco.d(x1), eco.b(x2) - eco.d(x2)])
    A = _lv_matrix(eco, x1, x2)
    return _rk4(lambda n: (r - A @ n) * n, np.asarray(n0, dtype=float), horizon, dt)


def _lv_matrix(eco: EcologyModel, x1: float, x2: float) -> np.ndarray:
    return np.array(
        [
            [eco.eta(x1) * eco.C(0.0), eco.eta(x1) * eco.C(x1 - x2)],
            [eco.eta(x2) * eco.C(x2 - x1), eco.eta(x2) * eco.C(0.0)],
        ]
    )


@dataclass(frozen=True)
class Coexistence:
    n1: float
    n2: float
    eigenvalues: tuple[complex, complex]

    @property
    def stable(self) -> bool:
        return all(ev.real < 0 for ev in self.eigenvalues)


def lv_coexistence_equilibrium(model, x1: float, x2: float, max_cond: float = 1e10) -> Coexistence | None:
    """Interior equilibrium of the two-trait Lotka-Volterra system, if both masses are positive."""
    if x1 == x2:
        raise ValueError("coexistence needs two distinct traits")
    eco = _eco(model)
    A = _lv_matrix(eco, x1, x2)
    if np.linalg.cond(A) > max_cond:
        raise SingularSystem(f"competition matrix for ({x1}, {x2}) is numerically singular")
    r = np.array([eco.b(x1) - eco.d(x1), eco.b(x2) - eco.d(x2)])
    n = np.linalg.solve(A, r)
    if not (n[0] > 0 and n[1] > 0):
        return None
    ev = np.linalg.eigvals(-n[:, None] * A)
    return Coexistence(float(n[0]), float(n[1]), (complex(ev[0]), complex(ev[1])))


def trait_kernel_density(model: ModelSpec, x: float, k: np.ndarray) -> np.ndarray:
    """Density ``m(x, k)`` of the trait step, a Gaussian conditioned to keep ``x + k`` in the trait space."""
    sd = model.mutation.trait_sd
    lo, hi = model.trait_space.lo, model.trait_space.hi
    z = normal_interval_mass(0.0, sd, lo - x, hi - x)
    k = np.asarray(k, dtype=float)
    dens = np.exp(-(k**2) / (2 * sd * sd)) / (sd * math.sqrt(2 * math.pi)) / z
    return np.where((x + k >= lo) & (x + k <= hi), dens, 0.0)


def _jump_integrand(model: ModelSpec, x: float, k: np.ndarray) -> np.ndarray:
    y = x + k
    b = np.asarray(model.b(y), dtype=float)
    f = np.maximum(np.asarray(invasion_fitness(model, y, x), dtype=float), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(b > 0, f / b, 0.0)
    return ratio * trait_kernel_density(model, x, k)


def tss_jump_rate(model: ModelSpec, x: float, nodes: int = 4097, full_output: bool = False):
    """Total jump rate of the trait substitution sequence out of trait ``x``.

    ``b(x) n(x) * integral of [f(x+k; x)]_+ / b(x+k) m(x, k) dk`` over
    ``k`` in ``trait_space - x``, by composite Simpson on ``nodes`` points.
    With ``full_output`` returns ``(rate, error_estimate)`` where the error
    is the difference from the half-resolution grid (conservative
    because the integrand has a kink where the fitness crosses 0).
    """
    if nodes < 2049 or nodes % 2 == 0:
        raise ValueError("need an odd number of at least 2049 nodes")
    lo, hi = model.trait_space.lo - x, model.trait_space.hi - x
    k = np.linspace(lo, hi, nodes)
    g = _jump_integrand(model, x, k)
    fine = integrate.simpson(g, x=k)
    coarse = integrate.simpson(g[::2], x=k[::2])
    scale = model.b(x) * equilibrium_mass(model, x)
    rate = scale * fine
    if full_output:
        return rate, scale * abs(fine - coarse)
    return rate
