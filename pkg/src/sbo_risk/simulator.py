"""Monte Carlo simulation of attacker populations against a defense stack.

Every source in a trial is simulated individually: it is filtered with the
composed filter fraction of its class, and otherwise draws an exponential
time to compromise at the per-source baseline rate (slowed by the composed
work factor for learning classes). A trial's outcome is the earliest of
those times.

Trial ``i`` always draws from ``trial_stream(master_seed, i)``, so results do
not depend on how trials are split across worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .analytic import composed_filter_fraction, effective_work_factor, per_source_rate
from .threat_model import (
    CLASSES,
    AttackerClass,
    CompositionMode,
    DefenseStack,
    FleetConfig,
    InvalidParameter,
    Scenario,
    SecretMode,
    ValidationError,
    validate_fleet,
    validate_scenario,
)

DEFAULT_TRIALS = 10_000


class MissingEpochLength(ValidationError):
    pass


def trial_stream(master_seed: int, trial_index: int) -> np.random.Generator:
    """Private generator for one trial, keyed on ``(master_seed, trial_index)``."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class _Plan:
    counts: tuple[int, ...]
    fractions: tuple[float, ...]
    scales: tuple[float, ...]  # mean hours to compromise for one unfiltered source
    hacker_lambda: float


def _plan(scenario: Scenario, mode: CompositionMode) -> _Plan:
    lam0 = per_source_rate(scenario.baseline_time_hours, scenario.baseline_population)
    stack = scenario.stack
    lambdas = [effective_work_factor(stack, c) for c in CLASSES]
    return _Plan(
        counts=tuple(scenario.population.count(c) for c in CLASSES),
        fractions=tuple(composed_filter_fraction(stack, c, mode) for c in CLASSES),
        scales=tuple(lam / lam0 for lam in lambdas),
        hacker_lambda=lambdas[CLASSES.index(AttackerClass.HACKER)],
    )


def _filter_sources(plan: _Plan, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Filter every source; return per-class filtered counts and survivor mean times."""
    filtered = np.zeros(len(CLASSES), dtype=np.int64)
    for i, (n, f) in enumerate(zip(plan.counts, plan.fractions)):
        if n:
            filtered[i] = np.count_nonzero(rng.random(n) < f)
    survivors = np.asarray(plan.counts, dtype=np.int64) - filtered
    return filtered, np.repeat(np.asarray(plan.scales), survivors)


def simulate_source(
    cls: AttackerClass,
    stack: DefenseStack,
    baseline_time_hours: float,
    baseline_population: int,
    rng: np.random.Generator,
    mode: CompositionMode = CompositionMode.ADDITIVE,
) -> Optional[float]:
    """Hours until this one source compromises the target, or None if filtered."""
    if rng.random() < composed_filter_fraction(stack, cls, mode):
        return None
    lam = effective_work_factor(stack, cls)
    return lam * rng.standard_exponential() / per_source_rate(baseline_time_hours, baseline_population)


def _trial_chunk(plan: _Plan, master_seed: int, start: int, stop: int):
    filtered = np.zeros((stop - start, len(CLASSES)), dtype=np.int64)
    first = np.full(stop - start, math.inf)
    for row, i in enumerate(range(start, stop)):
        rng = trial_stream(master_seed, i)
        filtered[row], scales = _filter_sources(plan, rng)
        if scales.size:
            first[row] = (scales * rng.standard_exponential(scales.size)).min()
    return filtered, first


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    n = max(1, min(workers, trials))
    bounds = np.linspace(0, trials, n + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _map_chunks(fn, args: tuple, trials: int, workers: int) -> list:
    chunks = _chunks(trials, workers)
    if workers <= 1 or len(chunks) == 1:
        return [fn(*args, a, b) for a, b in chunks]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        futures = [pool.submit(fn, *args, a, b) for a, b in chunks]
        return [f.result() for f in futures]


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    if n == 0:
        return math.nan, math.nan
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


@dataclass(frozen=True)
class TimeSummary:
    mean: float
    se: float
    p05: float
    p95: float


@dataclass(frozen=True)
class SimReport:
    trials: int
    seed: int
    mode: CompositionMode
    horizon_hours: float
    baseline_time_hours: float
    baseline_population: int
    hacker_lambda: float
    per_class_filtered: Mapping[AttackerClass, float]
    per_class_filtered_se: Mapping[AttackerClass, float]
    compromised_trials: int
    first_compromise_hours: Optional[TimeSummary]
    compromise_probability: float
    compromise_probability_se: float


def _check_trials(trials: int) -> None:
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        raise InvalidParameter(f"{trials!r} must be an integer >= 1", "trials")


def run_trials(
    scenario: Scenario,
    trials: int = DEFAULT_TRIALS,
    master_seed: int = 0,
    *,
    horizon_hours: float = math.inf,
    mode: CompositionMode | None = None,
    workers: int = 1,
) -> SimReport:
    scenario = validate_scenario(scenario)
    _check_trials(trials)
    mode = mode or scenario.composition_mode
    plan = _plan(scenario, mode)

    parts = _map_chunks(_trial_chunk, (plan, master_seed), trials, workers)
    filtered = np.concatenate([p[0] for p in parts])
    first = np.concatenate([p[1] for p in parts])

    per_class = {}
    per_class_se = {}
    for i, cls in enumerate(CLASSES):
        per_class[cls], per_class_se[cls] = _mean_se(filtered[:, i].astype(float))

    finite = first[np.isfinite(first)]
    summary = None
    if finite.size:
        mean, se = _mean_se(finite)
        p05, p95 = np.percentile(np.sort(finite), [5, 95])
        summary = TimeSummary(mean, se, float(p05), float(p95))
    p, p_se = _mean_se((np.isfinite(first) & (first <= horizon_hours)).astype(float))

    return SimReport(
        trials=trials,
        seed=master_seed,
        mode=mode,
        horizon_hours=horizon_hours,
        baseline_time_hours=scenario.baseline_time_hours,
        baseline_population=scenario.baseline_population,
        hacker_lambda=plan.hacker_lambda,
        per_class_filtered=per_class,
        per_class_filtered_se=per_class_se,
        compromised_trials=int(finite.size),
        first_compromise_hours=summary,
        compromise_probability=p,
        compromise_probability_se=p_se,
    )


@dataclass(frozen=True)
class FleetReport:
    instances: int
    secret_mode: SecretMode
    per_instance_probability: float
    trials: int
    seed: int
    mean_compromised_instances: float
    mean_compromised_instances_se: float
    probability_all_compromised: float
    probability_all_compromised_se: float


def _fleet_chunk(fleet: FleetConfig, master_seed: int, start: int, stop: int) -> np.ndarray:
    m = fleet.instances
    p = fleet.per_instance_compromise_probability
    out = np.zeros(stop - start, dtype=np.int64)
    for row, i in enumerate(range(start, stop)):
        rng = trial_stream(master_seed, i)
        if fleet.secret_mode is SecretMode.SHARED:
            out[row] = m if rng.random() < p else 0
        else:
            out[row] = np.count_nonzero(rng.random(m) < p)
    return out


def simulate_fleet(
    fleet: FleetConfig, trials: int = DEFAULT_TRIALS, master_seed: int = 0, *, workers: int = 1
) -> FleetReport:
    """Compromised instances per trial for a shared vs per-instance secret.

    A shared secret is one draw: break it and every instance falls. Per-instance
    secrets are ``instances`` independent draws.
    """
    fleet = validate_fleet(fleet)
    _check_trials(trials)
    counts = np.concatenate(_map_chunks(_fleet_chunk, (fleet, master_seed), trials, workers))
    mean, se = _mean_se(counts.astype(float))
    p_all, p_all_se = _mean_se((counts == fleet.instances).astype(float))
    return FleetReport(
        instances=fleet.instances,
        secret_mode=fleet.secret_mode,
        per_instance_probability=fleet.per_instance_compromise_probability,
        trials=trials,
        seed=master_seed,
        mean_compromised_instances=mean,
        mean_compromised_instances_se=se,
        probability_all_compromised=p_all,
        probability_all_compromised_se=p_all_se,
    )


@dataclass(frozen=True)
class EpochReport:
    epoch_hours: float
    horizon_hours: float
    epochs: int
    reset_fraction: float
    trials: int
    seed: int
    per_epoch_compromise_probability: Optional[float]
    per_epoch_compromise_probability_se: Optional[float]
    mean_epochs_survived: float
    mean_epochs_survived_se: float
    probability_any_compromise: float
    probability_any_compromise_se: float


def epoch_durations(epoch_hours: float, horizon_hours: float) -> list[float]:
    """Epoch lengths covering the horizon; the last one may be shorter."""
    if horizon_hours <= 0:
        return []
    full = int(horizon_hours // epoch_hours)
    durations = [epoch_hours] * full
    rest = horizon_hours - full * epoch_hours
    if rest > 1e-12 * horizon_hours:
        durations.append(rest)
    return durations


def _epoch_chunk(plan: _Plan, durations: tuple[float, ...], reset_fraction: float,
                 master_seed: int, start: int, stop: int) -> np.ndarray:
    hits = np.zeros((stop - start, len(durations)), dtype=bool)
    for row, i in enumerate(range(start, stop)):
        rng = trial_stream(master_seed, i)
        # Filtering is a fixed property of the source for the whole horizon.
        _, scales = _filter_sources(plan, rng)
        if not scales.size:
            continue
        remaining = None
        for k, d in enumerate(durations):
            fresh = scales * rng.standard_exponential(scales.size)
            if remaining is None or reset_fraction == 1.0:
                remaining = fresh
            else:
                remaining = reset_fraction * fresh + (1.0 - reset_fraction) * remaining
            hits[row, k] = remaining.min() <= d
            remaining = np.maximum(remaining - d, 0.0)
    return hits


def simulate_epochs(
    scenario: Scenario,
    horizon_hours: float,
    trials: int = DEFAULT_TRIALS,
    master_seed: int = 0,
    *,
    reset_fraction: float = 1.0,
    mode: CompositionMode | None = None,
    workers: int = 1,
) -> EpochReport:
    """Simulate periodic regeneration of the target over ``horizon_hours``.

    At each epoch boundary the attackers' remaining effort is rebuilt as
    ``reset_fraction * fresh + (1 - reset_fraction) * leftover``, so 1 is a
    full knowledge reset and 0 is no regeneration at all.
    """
    scenario = validate_scenario(scenario)
    if scenario.epoch_hours is None:
        raise MissingEpochLength("scenario has no epoch length", "epoch_hours")
    _check_trials(trials)
    if not (0.0 <= horizon_hours < math.inf):
        raise InvalidParameter(f"{horizon_hours!r} must be finite and >= 0", "horizon_hours")
    if not (0.0 <= reset_fraction <= 1.0):
        raise InvalidParameter(f"{reset_fraction!r} is not in [0, 1]", "reset_fraction")
    mode = mode or scenario.composition_mode
    plan = _plan(scenario, mode)
    durations = tuple(epoch_durations(scenario.epoch_hours, horizon_hours))

    common = dict(
        epoch_hours=scenario.epoch_hours,
        horizon_hours=horizon_hours,
        epochs=len(durations),
        reset_fraction=reset_fraction,
        trials=trials,
        seed=master_seed,
    )
    if not durations:
        return EpochReport(
            **common,
            per_epoch_compromise_probability=None,
            per_epoch_compromise_probability_se=None,
            mean_epochs_survived=0.0,
            mean_epochs_survived_se=0.0,
            probability_any_compromise=0.0,
            probability_any_compromise_se=0.0,
        )

    parts = _map_chunks(_epoch_chunk, (plan, durations, reset_fraction, master_seed), trials, workers)
    hits = np.concatenate(parts)
    n = len(durations)
    per_epoch, per_epoch_se = _mean_se(hits.mean(axis=1))
    any_hit = hits.any(axis=1)
    survived = np.where(any_hit, hits.argmax(axis=1), n).astype(float)
    mean_survived, mean_survived_se = _mean_se(survived)
    p_any, p_any_se = _mean_se(any_hit.astype(float))
    return EpochReport(
        **common,
        per_epoch_compromise_probability=per_epoch,
        per_epoch_compromise_probability_se=per_epoch_se,
        mean_epochs_survived=mean_survived,
        mean_epochs_survived_se=mean_survived_se,
        probability_any_compromise=p_any,
        probability_any_compromise_se=p_any_se,
    )
