"""Individual-based eco-evolutionary model with a linked neutral marker and its limit processes."""
__version__ = "0.1.0"

from .model import (  # noqa: E402
    IIF,
    Coexistence,
    Discrete,
    EcologyModel,
    GaussianStep,
    Interval,
    ModelError,
    ModelSpec,
    MutationModel,
    ParamFn,
    SingularSystem,
    TwoAllele,
    classify_iif,
    dieckmann_doebeli,
    equilibrium_mass,
    invasion_fitness,
    logistic_solve,
    lv_coexistence_equilibrium,
    lv_solve,
    preset,
    tss_jump_rate,
)
from .ibm import (  # noqa: E402
    EventKind,
    EventRecord,
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
from .rng import derive_seed, make_rng, stream  # noqa: E402
