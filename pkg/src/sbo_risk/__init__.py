"""Quantitative valuation of security-by-obscurity measures.

Attacker-population filtering, time-to-compromise scaling, work-factor
composition and ALE, plus a Monte Carlo simulator for single targets,
fleets and periodically regenerated (epoch) targets.
"""

from .analytic import (
    AnalyticReport,
    ResidualThreat,
    aggregate_compromise_rate,
    analyze,
    annual_loss_expectancy,
    calibrated_guess_rate,
    composed_filter_fraction,
    composed_work_factor,
    crack_time,
    epoch_compromise_probability,
    next_test_failure_probability,
    residual_threat,
    scaled_time_to_compromise,
)
from .catalog import CatalogEntry, Provenance, UnknownMeasureName, builtin_measures, lookup
from .scenario_io import emit_report, parse_scenario, serialize_scenario
from .simulator import (
    EpochReport,
    FleetReport,
    SimReport,
    run_trials,
    simulate_epochs,
    simulate_fleet,
    simulate_source,
)
from .threat_model import (
    AttackerClass,
    CompositionMode,
    DefenseStack,
    FleetConfig,
    ObscurityMeasure,
    RiskParams,
    Scenario,
    SecretMode,
    ThreatPopulation,
    ValidationError,
    total_population,
    validate_scenario,
)

__version__ = "0.1.0"
