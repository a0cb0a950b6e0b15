"""Exclusivity-graph bounds for linear inequalities on causal scenarios.

Events of a causal scenario are joined when no deterministic response can
produce both; the independence number of the weighted graph gives the
classical bound, the Lovasz theta number an upper bound on quantum values,
and a see-saw search a quantum lower bound.
"""

__version__ = "0.1.0"

from .scenario import (  # noqa: E402
    CausalScenario,
    Distribution,
    Event,
    ScenarioError,
    Variable,
    WeakInstrumentError,
    as_scenario,
    bell,
    enumerate_events,
    estimate_iv_strength,
    instrumental,
    parse_scenario,
    synthetic_iv_samples,
)
from .graph import (  # noqa: E402
    ColoredMultigraph,
    ExclusivityGraph,
    are_exclusive,
    build_graph,
    colored_layers,
    complement,
    complete_graph,
    cycle_graph,
    dump_json,
    export_dot,
    induced_subgraph,
)
from .catalog import (  # noqa: E402
    LinearInequality,
    MissingProbabilityError,
    catalog_get,
    catalog_names,
    cglmp_alpha,
    cglmp_full,
    cglmp_s,
    evaluate,
    pearl_family,
    resolve_inequality,
    support_graph,
)
from .classical import (  # noqa: E402
    DeterministicStrategy,
    StableSetResult,
    StrategyCapExceeded,
    alpha,
    best_strategy,
    classical_max_oracle,
    enumerate_strategies,
    evaluate_strategy,
    is_stable,
    strategy_count,
)
from .sdp import SdpDimensionError, SdpProblem, SdpSolution, solve  # noqa: E402
from .quantum import (  # noqa: E402
    QuantumStrategy,
    SeesawResult,
    ThetaResult,
    born_probabilities,
    lovasz_theta,
    quantum_value,
    seesaw_lower_bound,
    theta_cycle_formula,
    tsirelson_strategy,
)
from .structure import (  # noqa: E402
    Appearance,
    Hole,
    HoleReport,
    IsomorphismSizeError,
    PerfectVerdict,
    UnverifiedHoleError,
    are_isomorphic,
    family_grid,
    find_odd_antiholes,
    find_odd_holes,
    hole_to_inequality,
    perfect_verdict,
    scan_family,
)
