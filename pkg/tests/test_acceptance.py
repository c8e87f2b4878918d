"""Exit criteria. Each test records one PASS/FAIL line shown in the terminal summary."""

from __future__ import annotations

import json
import math
import random
import time

import pytest

from sbo_risk.analytic import (
    SECONDS_PER_DAY,
    analyze,
    calibrated_guess_rate,
    composed_filter_fraction,
    composed_work_factor,
    crack_time,
    epoch_compromise_probability,
    residual_threat,
    scaled_time_to_compromise,
)
from sbo_risk.cli import main
from sbo_risk.simulator import run_trials, simulate_epochs, simulate_fleet
from sbo_risk.threat_model import (
    CLASSES,
    CompositionMode,
    DefenseStack,
    FleetConfig,
    ObscurityMeasure,
    SecretMode,
    ThreatPopulation,
)

from conftest import small_scenario

W, B, S, H = CLASSES
PAPER_TIME_HOURS = 24 * 100_000 / 26_500  # 90.566037...


def cli_json(capsysbinary, *argv):
    start = time.perf_counter()
    code = main(list(argv))
    elapsed = time.perf_counter() - start
    out, err = capsysbinary.readouterr()
    assert code == 0, err
    return json.loads(out), elapsed


def test_1_exact_reproduction(capsysbinary, record_criterion):
    data, elapsed = cli_json(capsysbinary, "analyze", "--scenario", "paper-8-1")
    counts = [data[f"residual_{c.value}"] for c in CLASSES]
    ok = (counts == [5000, 5000, 5000, 11500] and data["residual_total"] == 26500
          and data["residual_fraction"] == 0.265 and elapsed < 1.0)
    record_criterion(1, "residual counts / 26,500 / 0.265 exact", ok,
                     f"counts={counts}, T={data['residual_total']}, frac={data['residual_fraction']}, {elapsed:.3f}s")
    assert ok


def test_2_time_scaling(capsysbinary, record_criterion, paper_scenario):
    data, elapsed = cli_json(capsysbinary, "analyze", "--scenario", "paper-8-1")
    exact = analyze(paper_scenario).scaled_time_hours
    ok = abs(exact - 90.566) <= 0.001 and abs(data["scaled_time_hours"] - 90.566) <= 0.001 and elapsed < 1.0
    record_criterion(2, "scaled time 90.566 +/- 0.001 h", ok, f"{exact:.6f} h, {elapsed:.3f}s")
    assert ok


def test_3_simulator_oracle(capsysbinary, record_criterion):
    data, elapsed = cli_json(capsysbinary, "simulate", "--scenario", "paper-8-1", "--trials", "10000", "--seed", "0")
    mean, se = data["first_compromise_mean_hours"], data["first_compromise_se_hours"]
    ok = abs(mean - PAPER_TIME_HOURS) <= 3 * se and elapsed < 60
    details = [f"mean={mean}+/-{se}"]
    for c, expected in zip(CLASSES, (20_000, 20_000, 20_000, 13_500)):
        m, s = data[f"filtered_mean_{c.value}"], data[f"filtered_se_{c.value}"]
        ok = ok and abs(m - expected) <= 3 * s
        details.append(f"{c.value}={m}+/-{s}")
    record_criterion(3, "simulated mean and filter counts within 3 SE", ok, ", ".join(details) + f", {elapsed:.1f}s")
    assert ok


def test_4_work_factor(record_criterion):
    def hacker_only(lam):
        stack = DefenseStack((ObscurityMeasure("delay", filter_fractions={H: 0.2}, work_factors={H: lam}),))
        return small_scenario(stack, hackers=50, baseline_time_hours=10.0, baseline_population=50)

    a = run_trials(hacker_only(2.0), 10_000, 21).first_compromise_hours
    b = run_trials(hacker_only(4.0), 10_000, 22).first_compromise_hours
    se = math.sqrt(b.se**2 + 4 * a.se**2)
    doubled = abs(b.mean - 2 * a.mean) <= 3 * se

    stack = DefenseStack((ObscurityMeasure("a", work_factors={H: 2}), ObscurityMeasure("b", work_factors={H: 3})))
    product = composed_work_factor(stack, H)
    ok = doubled and product == 6
    record_criterion(4, "doubling hacker work factor doubles mean time; [2,3] -> 6", ok,
                     f"{a.mean:.3f} -> {b.mean:.3f} (ratio {b.mean / a.mean:.4f}, 3SE={3 * se:.3f}), product={product}")
    assert ok


def test_5_crack_calibration(record_criterion):
    rate = calibrated_guess_rate(10, 62, 5 * SECONDS_PER_DAY)
    base_days = crack_time(10, 62, rate) / SECONDS_PER_DAY
    sym_days = crack_time(10, 93, rate) / SECONDS_PER_DAY
    ok = (base_days == pytest.approx(5.0, rel=1e-12) and abs(sym_days - 288) <= 1
          and abs(sym_days - 280) / 280 <= 0.03)
    record_criterion(5, "crack time 5 d -> 288 +/- 1 d (280 within 3%)", ok,
                     f"rate={rate:.4e}/s, {base_days:.6f} d, {sym_days:.4f} d, "
                     f"{100 * abs(sym_days - 280) / 280:.2f}% from 280")
    assert ok


def test_6_bobe(record_criterion):
    shared = simulate_fleet(FleetConfig(10, SecretMode.SHARED, 0.1), 10_000, 0)
    rand = simulate_fleet(FleetConfig(10, SecretMode.PER_INSTANCE_RANDOMIZED, 0.1), 10_000, 0)
    gap = shared.probability_all_compromised - rand.probability_all_compromised
    gap_se = math.hypot(shared.probability_all_compromised_se, rand.probability_all_compromised_se)
    mean_ok = abs(rand.mean_compromised_instances - 1.0) <= 3 * rand.mean_compromised_instances_se
    ok = gap > 3 * gap_se and mean_ok
    record_criterion(6, "shared secret all-compromised >> randomized; randomized mean 1.0", ok,
                     f"P_all shared={shared.probability_all_compromised:.4f}, "
                     f"randomized={rand.probability_all_compromised:.4g}, gap/SE={gap / gap_se:.1f}, "
                     f"mean={rand.mean_compromised_instances:.4f}+/-{rand.mean_compromised_instances_se:.4f}")
    assert ok


def test_7_epochs(record_criterion, paper_scenario):
    from dataclasses import replace

    hacker_slow = DefenseStack((ObscurityMeasure("delay", work_factors={H: 2.0}),))
    settings = [
        # (scenario, epoch hours, horizon hours); rates from the analytic engine
        (small_scenario(worms=10, baseline_time_hours=10.0), math.log(2), 4 * math.log(2)),
        (small_scenario(hacker_slow, worms=4, hackers=4, baseline_time_hours=20.0), 1.0, 5.0),
        (paper_scenario, PAPER_TIME_HOURS, 2 * PAPER_TIME_HOURS),
    ]
    ok = True
    details = []
    for i, (sc, e, horizon) in enumerate(settings):
        sc = replace(sc, epoch_hours=e)
        rate = analyze(sc).aggregate_rate_per_hour
        expected = epoch_compromise_probability(rate, e)
        rep = simulate_epochs(sc, horizon, 10_000, 100 + i)
        p, se = rep.per_epoch_compromise_probability, rep.per_epoch_compromise_probability_se
        ok = ok and abs(p - expected) <= 3 * se
        details.append(f"LE={rate * e:.4f}: {p:.4f} vs {expected:.4f} (3SE={3 * se:.4f})")

    # memorylessness: two half-epochs with full reset behave like one epoch
    base = small_scenario(worms=10, baseline_time_hours=10.0)
    h = 2 * math.log(2)
    single = simulate_epochs(replace(base, epoch_hours=h), h, 10_000, 7)
    split = simulate_epochs(replace(base, epoch_hours=h / 2), h, 10_000, 8)
    se = math.hypot(single.per_epoch_compromise_probability_se, split.probability_any_compromise_se)
    split_ok = abs(split.probability_any_compromise - single.per_epoch_compromise_probability) <= 3 * se
    half_ok = abs(split.per_epoch_compromise_probability - 0.5) <= 3 * split.per_epoch_compromise_probability_se
    ok = ok and split_ok and half_ok
    details.append(f"split {split.probability_any_compromise:.4f} vs single "
                   f"{single.per_epoch_compromise_probability:.4f}")
    record_criterion(7, "per-epoch probability = 1 - exp(-LE) within 3 SE; memorylessness", ok, "; ".join(details))
    assert ok


def test_8_determinism(tmp_path, record_criterion):
    commands = [
        ["analyze", "--scenario", "paper-8-1"],
        ["analyze", "--scenario", "paper-8-1", "--format", "csv"],
        ["simulate", "--scenario", "paper-8-1", "--trials", "400", "--seed", "99"],
        ["fleet", "--scenario", "paper-8-1", "--trials", "2000", "--seed", "99", "--format", "csv"],
        ["epochs", "--scenario", "paper-8-1", "--trials", "200", "--seed", "99", "--horizon", "150"],
        ["catalog"],
        ["crack", "--length", "12", "--charset", "93"],
    ]
    ok = True
    for i, argv in enumerate(commands):
        outputs = []
        for run in range(2):
            path = tmp_path / f"{i}-{run}.out"
            assert main(argv + ["--output", str(path)]) == 0
            outputs.append(path.read_bytes())
        ok = ok and outputs[0] == outputs[1] and len(outputs[0]) > 0

    parallel_ok = True
    for argv in commands[2:5]:
        serial, parallel = tmp_path / "serial.out", tmp_path / "parallel.out"
        assert main(argv + ["--workers", "1", "--output", str(serial)]) == 0
        assert main(argv + ["--workers", "3", "--output", str(parallel)]) == 0
        parallel_ok = parallel_ok and serial.read_bytes() == parallel.read_bytes()
    ok = ok and parallel_ok
    record_criterion(8, "byte-identical reruns; serial == parallel", ok,
                     f"{len(commands)} subcommand runs, 3 worker comparisons")
    assert ok


def _random_stack(rng: random.Random, prefix="m", max_size=6) -> DefenseStack:
    return DefenseStack(tuple(
        ObscurityMeasure(
            f"{prefix}{i}",
            filter_fractions={c: rng.choice([rng.random(), round(rng.random(), 2), 0.0, 1.0]) for c in CLASSES},
            work_factors={c: 1 + 9 * rng.random() for c in CLASSES},
            independent=rng.random() < 0.7,
            group=rng.choice([None, "g"]),
        )
        for i in range(rng.randint(0, max_size))
    ))


def _random_population(rng: random.Random) -> ThreatPopulation:
    return ThreatPopulation.of(*(rng.randint(0, 100_000) for _ in CLASSES))


def test_9_invariant_suite(record_criterion):
    rng = random.Random(2011)
    cases = 200
    modes = list(CompositionMode)
    results = {}

    def check(name, predicate):
        results[name] = all(predicate() for _ in range(cases))

    def order():
        stack, pop, mode = _random_stack(rng), _random_population(rng), rng.choice(modes)
        shuffled = list(stack.measures)
        rng.shuffle(shuffled)
        other = DefenseStack(tuple(shuffled))
        return (residual_threat(pop, stack, mode) == residual_threat(pop, other, mode)
                and all(composed_work_factor(stack, c) == composed_work_factor(other, c) for c in CLASSES))

    def cap():
        stack, mode = _random_stack(rng, max_size=12), rng.choice(modes)
        return all(0.0 <= composed_filter_fraction(stack, c, mode) <= 1.0 for c in CLASSES)

    def dominance():
        stack = _random_stack(rng)
        return all(composed_filter_fraction(stack, c, CompositionMode.ADDITIVE)
                   >= composed_filter_fraction(stack, c, CompositionMode.MULTIPLICATIVE_SURVIVAL) for c in CLASSES)

    def monotone():
        stack, pop, mode = _random_stack(rng), _random_population(rng), rng.choice(modes)
        extra = _random_stack(rng, prefix="x", max_size=1)
        bigger = DefenseStack(stack.measures + extra.measures)
        t0, t1 = residual_threat(pop, stack, mode).total, residual_threat(pop, bigger, mode).total
        return t1 <= t0 and scaled_time_to_compromise(24, 100_000, t1) >= scaled_time_to_compromise(24, 100_000, t0)

    def crack():
        length, charset, rate = rng.randint(1, 30), rng.randint(1, 100), 10 ** rng.uniform(0, 14)
        t = crack_time(length, charset, rate)
        longer_ok = charset == 1 or crack_time(length + 1, charset, rate) > t
        return longer_ok and crack_time(length, charset + 1, rate) > t

    for name, fn in [("order", order), ("cap", cap), ("dominance", dominance),
                     ("monotonicity", monotone), ("crack", crack)]:
        check(name, fn)
    ok = all(results.values())
    record_criterion(9, f"invariant suite ({cases} cases each)", ok,
                     ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in results.items()))
    assert ok
