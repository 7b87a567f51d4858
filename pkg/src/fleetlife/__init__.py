"""Fleet aging analysis from right-censored failure records and
maintenance strategy simulation."""

__version__ = "0.1.0"

from .fleet import (
    AssetRecord,
    DataError,
    FleetSummary,
    LifetimeObservation,
    SyntheticFleetSpec,
    VoltageClass,
    build_lifetime_table,
    draw_failures,
    fleet_summary,
    generate_synthetic_fleet,
    parse_asset_csv,
    write_asset_csv,
)
from .health import (
    AhiConfig,
    AhiScore,
    Band,
    DegradationState,
    ScoreBasis,
    ahi_from_age,
    ahi_from_probability,
    apparent_age,
    score_asset,
    threshold_age,
)
from .scenarios import (
    ScenarioError,
    builtin_scenario,
    load_scenario_file,
    resolve_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .simulate import (
    ActivityCatalog,
    ActivityKind,
    ActivitySpec,
    ConditionBased,
    ConstantRate,
    Constrained,
    FamilyPolicy,
    KpiSeries,
    LognormalRate,
    PeriodicInspections,
    Policy,
    Scenario,
    SimulationReport,
    TimeBased,
    Unconstrained,
    aggregate_replications,
    compare_scenarios,
    run_scenario,
)
from .survival import UNBOUNDED, SurvivalCurve, km_fit
from .weibull import (
    REFERENCE_LAWS,
    FitDiagnostics,
    FitError,
    WeibullLaw,
    fit_weibull_mle,
    fit_weibull_rank_regression,
)

__all__ = [
    "__version__",
    "AssetRecord",
    "DataError",
    "FleetSummary",
    "LifetimeObservation",
    "SyntheticFleetSpec",
    "VoltageClass",
    "build_lifetime_table",
    "draw_failures",
    "fleet_summary",
    "generate_synthetic_fleet",
    "parse_asset_csv",
    "write_asset_csv",
    "UNBOUNDED",
    "SurvivalCurve",
    "km_fit",
    "REFERENCE_LAWS",
    "FitDiagnostics",
    "FitError",
    "WeibullLaw",
    "fit_weibull_mle",
    "fit_weibull_rank_regression",
    "AhiConfig",
    "AhiScore",
    "Band",
    "DegradationState",
    "ScoreBasis",
    "ahi_from_age",
    "ahi_from_probability",
    "apparent_age",
    "score_asset",
    "threshold_age",
    "ActivityCatalog",
    "ActivityKind",
    "ActivitySpec",
    "ConditionBased",
    "ConstantRate",
    "Constrained",
    "FamilyPolicy",
    "KpiSeries",
    "LognormalRate",
    "PeriodicInspections",
    "Policy",
    "Scenario",
    "SimulationReport",
    "TimeBased",
    "Unconstrained",
    "aggregate_replications",
    "compare_scenarios",
    "run_scenario",
    "ScenarioError",
    "builtin_scenario",
    "load_scenario_file",
    "resolve_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
]
