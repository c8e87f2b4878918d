"""Domain types: attacker populations, obscurity measures, defense stacks, scenarios."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Optional


class AttackerClass(Enum):
    WORM = "worms"
    BOT = "bots"
    SKID = "skids"
    HACKER = "hackers"

    @property
    def learning_capable(self) -> bool:
        # Automated sources follow go/no-go logic; only humans learn past an obstacle.
        return self is AttackerClass.HACKER


CLASSES: tuple[AttackerClass, ...] = tuple(AttackerClass)


class CompositionMode(Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE_SURVIVAL = "multiplicative-survival"


class SecretMode(Enum):
    SHARED = "shared"
    PER_INSTANCE_RANDOMIZED = "per-instance-randomized"


class ValidationError(ValueError):
    """Base class for every scenario validation failure."""

    def __init__(self, message: str, field: str | None = None, measure: str | None = None):
        self.field = field
        self.measure = measure
        where = []
        if measure is not None:
            where.append(f"measure {measure!r}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class NegativeCount(ValidationError):
    pass


class FractionOutOfRange(ValidationError):
    pass


class WorkFactorBelowOne(ValidationError):
    pass


class DuplicateMeasureName(ValidationError):
    pass


class NonPositiveBaseline(ValidationError):
    pass


class InvalidParameter(ValidationError):
    """Out-of-domain value for a parameter without a more specific error."""


@dataclass(frozen=True)
class ThreatPopulation:
    counts: Mapping[AttackerClass, int]

    @classmethod
    def of(cls, worms: int = 0, bots: int = 0, skids: int = 0, hackers: int = 0) -> ThreatPopulation:
        return cls(
            {
                AttackerClass.WORM: worms,
                AttackerClass.BOT: bots,
                AttackerClass.SKID: skids,
                AttackerClass.HACKER: hackers,
            }
        )

    def count(self, cls: AttackerClass) -> int:
        return self.counts.get(cls, 0)

    @property
    def total(self) -> int:
        return sum(self.count(c) for c in CLASSES)


def total_population(population: ThreatPopulation) -> int:
    return population.total


@dataclass(frozen=True)
class ObscurityMeasure:
    """A defense layer.

    ``filter_fractions`` is the per-class probability that the layer removes a
    source outright; ``work_factors`` is the per-class multiplier on the mean
    effort needed to get past it. Measures with ``independent=False`` that share
    a ``group`` label only contribute the largest work factor in that group.
    """

    name: str
    filter_fractions: Mapping[AttackerClass, float] = field(default_factory=dict)
    work_factors: Mapping[AttackerClass, float] = field(default_factory=dict)
    independent: bool = True
    group: Optional[str] = None

    def fraction(self, cls: AttackerClass) -> float:
        return self.filter_fractions.get(cls, 0.0)

    def work_factor(self, cls: AttackerClass) -> float:
        return self.work_factors.get(cls, 1.0)


@dataclass(frozen=True)
class DefenseStack:
    measures: tuple[ObscurityMeasure, ...] = ()

    def __iter__(self):
        return iter(self.measures)

    def __len__(self) -> int:
        return len(self.measures)

    def with_measure(self, measure: ObscurityMeasure) -> DefenseStack:
        return DefenseStack(self.measures + (measure,))


@dataclass(frozen=True)
class RiskParams:
    aro: float = 0.0
    av: float = 0.0
    ef: float = 0.0


@dataclass(frozen=True)
class FleetConfig:
    instances: int
    secret_mode: SecretMode
    per_instance_compromise_probability: float


@dataclass(frozen=True)
class Scenario:
    population: ThreatPopulation
    stack: DefenseStack
    baseline_time_hours: float
    baseline_population: int
    risk: RiskParams = RiskParams()
    fleet: Optional[FleetConfig] = None
    epoch_hours: Optional[float] = None
    composition_mode: CompositionMode = CompositionMode.ADDITIVE


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_fraction(value, field_name: str, measure: str | None = None) -> float:
    if not _is_real(value) or not (0.0 <= value <= 1.0):
        raise FractionOutOfRange(f"{value!r} is not a fraction in [0, 1]", field_name, measure)
    return value


def validate_population(population: ThreatPopulation) -> ThreatPopulation:
    for key in population.counts:
        if not isinstance(key, AttackerClass):
            raise InvalidParameter(f"unknown attacker class {key!r}", "population")
    counts = {}
    for cls in CLASSES:
        n = population.count(cls)
        if not _is_int(n):
            raise InvalidParameter(f"count {n!r} is not an integer", f"population.{cls.value}")
        if n < 0:
            raise NegativeCount(f"count {n} is negative", f"population.{cls.value}")
        counts[cls] = n
    if dict(population.counts) == counts:
        return population
    return ThreatPopulation(counts)


def validate_measure(measure: ObscurityMeasure) -> ObscurityMeasure:
    if not isinstance(measure.name, str) or not measure.name.strip():
        raise InvalidParameter("measure name must be a non-empty string", "name")
    name = measure.name
    for key in (*measure.filter_fractions, *measure.work_factors):
        if not isinstance(key, AttackerClass):
            raise InvalidParameter(f"unknown attacker class {key!r}", "class", name)
    fractions = {}
    factors = {}
    for cls in CLASSES:
        fractions[cls] = _check_fraction(measure.fraction(cls), f"filter_fractions.{cls.value}", name)
        lam = measure.work_factor(cls)
        if not _is_real(lam) or math.isnan(lam) or lam < 1.0:
            raise WorkFactorBelowOne(f"{lam!r} is below 1", f"work_factors.{cls.value}", name)
        factors[cls] = lam
    if not isinstance(measure.independent, bool):
        raise InvalidParameter(f"{measure.independent!r} is not a boolean", "independent", name)
    if measure.group is not None and not isinstance(measure.group, str):
        raise InvalidParameter(f"{measure.group!r} is not a string", "group", name)
    if dict(measure.filter_fractions) == fractions and dict(measure.work_factors) == factors:
        return measure
    return replace(measure, filter_fractions=fractions, work_factors=factors)


def validate_stack(stack: DefenseStack) -> DefenseStack:
    seen: set[str] = set()
    measures = []
    for m in stack.measures:
        m = validate_measure(m)
        if m.name in seen:
            raise DuplicateMeasureName("name appears more than once in the stack", "name", m.name)
        seen.add(m.name)
        measures.append(m)
    measures = tuple(measures)
    if measures == stack.measures:
        return stack
    return DefenseStack(measures)


def validate_scenario(raw: Scenario) -> Scenario:
    """Check every invariant and fill per-class measure defaults (f=0, λ=1).

    Returns ``raw`` itself when nothing needed filling, so validation is
    idempotent. Raises a :class:`ValidationError` subclass naming the field.
    """
    population = validate_population(raw.population)
    stack = validate_stack(raw.stack)

    t = raw.baseline_time_hours
    if not _is_real(t) or not math.isfinite(t) or t <= 0:
        raise NonPositiveBaseline(f"{t!r} must be a positive number of hours", "baseline.time_hours")
    n = raw.baseline_population
    if not _is_int(n) or n < 1:
        raise NonPositiveBaseline(f"{n!r} must be an integer >= 1", "baseline.population")

    risk = raw.risk
    for name in ("aro", "av"):
        v = getattr(risk, name)
        if not _is_real(v) or not math.isfinite(v) or v < 0:
            raise InvalidParameter(f"{v!r} must be a non-negative number", f"risk.{name}")
    _check_fraction(risk.ef, "risk.ef")

    if raw.fleet is not None:
        validate_fleet(raw.fleet)

    if raw.epoch_hours is not None:
        e = raw.epoch_hours
        if not _is_real(e) or math.isnan(e) or e <= 0:
            raise InvalidParameter(f"{e!r} must be positive", "epoch_hours")

    if not isinstance(raw.composition_mode, CompositionMode):
        raise InvalidParameter(f"unknown mode {raw.composition_mode!r}", "composition_mode")

    if population is raw.population and stack is raw.stack:
        return raw
    return replace(raw, population=population, stack=stack)


def validate_fleet(fleet: FleetConfig) -> FleetConfig:
    if not _is_int(fleet.instances) or fleet.instances < 1:
        raise InvalidParameter(f"{fleet.instances!r} must be an integer >= 1", "fleet.instances")
    if not isinstance(fleet.secret_mode, SecretMode):
        raise InvalidParameter(f"unknown secret mode {fleet.secret_mode!r}", "fleet.secret_mode")
    _check_fraction(fleet.per_instance_compromise_probability, "fleet.per_instance_probability")
    return fleet
