"""Closed-form risk quantities for an obscurity defense stack.

Filter fractions are composed in exact decimal arithmetic (each float is read
back through its shortest repr), so hand-written coefficients such as 0.2 and
0.05 sum exactly as written. Everything else is plain float math.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .threat_model import (
    CLASSES,
    AttackerClass,
    CompositionMode,
    DefenseStack,
    RiskParams,
    Scenario,
    ThreatPopulation,
    validate_scenario,
)

SECONDS_PER_DAY = 86400.0


class WorkFactorIgnoredWarning(RuntimeWarning):
    """A work factor was declared for a class that cannot learn."""


def _exact(x: float) -> Fraction:
    return Fraction(repr(x)) if isinstance(x, float) else Fraction(x)


def _composed_fraction_exact(stack: DefenseStack, cls: AttackerClass, mode: CompositionMode) -> Fraction:
    fractions = [_exact(m.fraction(cls)) for m in stack]
    if mode is CompositionMode.ADDITIVE:
        return min(Fraction(1), sum(fractions, Fraction(0)))
    survival = Fraction(1)
    for f in fractions:
        survival *= 1 - f
    return 1 - survival


def composed_filter_fraction(
    stack: DefenseStack, cls: AttackerClass, mode: CompositionMode = CompositionMode.ADDITIVE
) -> float:
    return float(_composed_fraction_exact(stack, cls, mode))


@dataclass(frozen=True)
class ResidualThreat:
    counts: Mapping[AttackerClass, float]
    total: float
    fraction: float

    def count(self, cls: AttackerClass) -> float:
        return self.counts.get(cls, 0.0)


def residual_threat(
    population: ThreatPopulation, stack: DefenseStack, mode: CompositionMode = CompositionMode.ADDITIVE
) -> ResidualThreat:
    exact = {
        cls: population.count(cls) * (1 - _composed_fraction_exact(stack, cls, mode)) for cls in CLASSES
    }
    total = sum(exact.values(), Fraction(0))
    n = population.total
    fraction = total / n if n else Fraction(1)
    return ResidualThreat({c: float(v) for c, v in exact.items()}, float(total), float(fraction))


def scaled_time_to_compromise(
    baseline_time_hours: float, baseline_population: int, residual_total: float
) -> float:
    """Mean time to first compromise, inversely proportional to the residual threat."""
    if residual_total <= 0:
        return math.inf
    return baseline_time_hours * baseline_population / residual_total


def annual_loss_expectancy(risk: RiskParams) -> float:
    return risk.aro * (risk.av * risk.ef)


def composed_work_factor(stack: DefenseStack, cls: AttackerClass) -> float:
    """Product of independent work factors times each dependency group's max."""
    factors = []
    groups: dict[Optional[str], float] = {}
    for m in stack:
        lam = m.work_factor(cls)
        if m.independent:
            factors.append(lam)
        else:
            groups[m.group] = max(groups.get(m.group, 1.0), lam)
    factors.extend(groups.values())
    # sorted so the float product does not depend on measure order
    return math.prod(sorted(factors))


def effective_work_factor(stack: DefenseStack, cls: AttackerClass) -> float:
    """Work factor as the models apply it: 1 for go/no-go classes."""
    if cls.learning_capable:
        return composed_work_factor(stack, cls)
    ignored = [m.name for m in stack if m.work_factor(cls) != 1.0]
    if ignored:
        warnings.warn(
            f"work factors for {cls.value} ignored (class cannot learn): {', '.join(ignored)}",
            WorkFactorIgnoredWarning,
            stacklevel=2,
        )
    return 1.0


def next_test_failure_probability(p0: float, lambda_total: float) -> float:
    return p0 / lambda_total


def crack_time(length: int, charset_size: int, guess_rate: float) -> float:
    """Average-case brute-force time in seconds: half the keyspace at ``guess_rate``/s.

    Returns ``inf`` when the keyspace overflows a double.
    """
    if length < 1 or charset_size < 1:
        raise ValueError("length and charset_size must be >= 1")
    if not guess_rate > 0:
        raise ValueError("guess_rate must be positive")
    try:
        keyspace = float(charset_size) ** length
    except OverflowError:
        return math.inf
    return keyspace / (2.0 * guess_rate)


def calibrated_guess_rate(length: int, charset_size: int, crack_seconds: float) -> float:
    """Guess rate at which ``crack_time(length, charset_size, rate) == crack_seconds``."""
    return float(charset_size) ** length / (2.0 * crack_seconds)


def per_source_rate(baseline_time_hours: float, baseline_population: int) -> float:
    return 1.0 / (baseline_time_hours * baseline_population)


def aggregate_compromise_rate(
    residual: ResidualThreat,
    baseline_time_hours: float,
    baseline_population: int,
    hacker_lambda: float = 1.0,
) -> float:
    """Total compromise rate per hour of all surviving sources.

    Each surviving source compromises at an exponential rate fixed by the
    baseline; learning sources are slowed by their composed work factor.
    """
    lam0 = per_source_rate(baseline_time_hours, baseline_population)
    weighted = 0.0
    for cls in CLASSES:
        n = residual.count(cls)
        weighted += n / hacker_lambda if cls.learning_capable else n
    return lam0 * weighted


def epoch_compromise_probability(rate_per_hour: float, epoch_hours: float) -> float:
    return -math.expm1(-rate_per_hour * epoch_hours)


@dataclass(frozen=True)
class AnalyticReport:
    mode: CompositionMode
    population: Mapping[AttackerClass, int]
    filter_fractions: Mapping[AttackerClass, float]
    residual_counts: Mapping[AttackerClass, float]
    residual_total: float
    residual_fraction: float
    scaled_time_hours: float
    composed_lambda: Mapping[AttackerClass, float]
    aggregate_rate_per_hour: float
    mean_first_compromise_hours: float
    ale: float
    epoch_hours: Optional[float] = None
    epoch_compromise_probability: Optional[float] = None


def analyze(scenario: Scenario, mode: CompositionMode | None = None) -> AnalyticReport:
    scenario = validate_scenario(scenario)
    mode = mode or scenario.composition_mode
    stack = scenario.stack
    residual = residual_threat(scenario.population, stack, mode)
    lambdas = {cls: effective_work_factor(stack, cls) for cls in CLASSES}
    rate = aggregate_compromise_rate(
        residual,
        scenario.baseline_time_hours,
        scenario.baseline_population,
        lambdas[AttackerClass.HACKER],
    )
    epoch_p = None
    if scenario.epoch_hours is not None:
        epoch_p = epoch_compromise_probability(rate, scenario.epoch_hours)
    return AnalyticReport(
        mode=mode,
        population={c: scenario.population.count(c) for c in CLASSES},
        filter_fractions={c: composed_filter_fraction(stack, c, mode) for c in CLASSES},
        residual_counts=dict(residual.counts),
        residual_total=residual.total,
        residual_fraction=residual.fraction,
        scaled_time_hours=scaled_time_to_compromise(
            scenario.baseline_time_hours, scenario.baseline_population, residual.total
        ),
        composed_lambda=lambdas,
        aggregate_rate_per_hour=rate,
        mean_first_compromise_hours=1.0 / rate if rate > 0 else math.inf,
        ale=annual_loss_expectancy(scenario.risk),
        epoch_hours=scenario.epoch_hours,
        epoch_compromise_probability=epoch_p,
    )
