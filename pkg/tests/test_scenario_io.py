from __future__ import annotations

import csv
import io
import json

import pytest

from sbo_risk.analytic import analyze
from sbo_risk.catalog import UnknownMeasureName
from sbo_risk.scenario_io import (
    MissingField,
    ScenarioSyntaxError,
    UnknownKey,
    bundled_scenarios,
    emit_report,
    parse_scenario,
    serialize_scenario,
)
from sbo_risk.simulator import run_trials, simulate_epochs, simulate_fleet
from sbo_risk.threat_model import (
    CLASSES,
    CompositionMode,
    FractionOutOfRange,
    SecretMode,
)

H = CLASSES[3]

BASE = {
    "population": {"worms": 10, "bots": 0, "skids": 0, "hackers": 5},
    "baseline": {"time_hours": 24, "population": 100},
    "risk": {"aro": 1, "av": 10, "ef": 0.5},
}


def doc(**extra):
    d = json.loads(json.dumps(BASE))
    d.update(extra)
    return json.dumps(d).encode()


def test_bundled_paper_scenario(paper_scenario):
    assert "paper-8-1" in bundled_scenarios()
    assert [m.name for m in paper_scenario.stack][0] == "banner-obfuscation"
    assert paper_scenario.baseline_time_hours == 24
    assert paper_scenario.baseline_population == 100_000
    assert paper_scenario.fleet.secret_mode is SecretMode.SHARED


def test_round_trip(paper_scenario):
    again = parse_scenario(serialize_scenario(paper_scenario).encode())
    assert again == paper_scenario
    assert serialize_scenario(again) == serialize_scenario(paper_scenario)


def test_parse_from_path(tmp_path, paper_scenario):
    path = tmp_path / "s.json"
    path.write_text(serialize_scenario(paper_scenario), encoding="utf-8")
    assert parse_scenario(path) == paper_scenario
    assert parse_scenario(str(path)) == paper_scenario


def test_syntax_error_has_position():
    with pytest.raises(ScenarioSyntaxError) as info:
        parse_scenario(b'{\n  "population": {,\n}')
    assert info.value.line == 2


def test_missing_population():
    d = json.loads(doc())
    del d["population"]
    with pytest.raises(MissingField, match="population"):
        parse_scenario(json.dumps(d).encode())


@pytest.mark.parametrize(
    "payload",
    [
        doc(extra=1),
        doc(population={"worms": 1, "wrms": 2}),
        doc(measures=[{"name": "x", "filter_fractions": {"hacker": 0.1}}]),
        doc(baseline={"time_hours": 1, "population": 1, "unit": "h"}),
    ],
)
def test_unknown_keys_rejected(payload):
    with pytest.raises(UnknownKey):
        parse_scenario(payload)


def test_unknown_catalog_reference():
    with pytest.raises(UnknownMeasureName):
        parse_scenario(doc(measures=["nope"]))
    with pytest.raises(UnknownMeasureName):
        parse_scenario(doc(measures=[{"name": "nope"}]))


def test_inline_and_override_measures():
    sc = parse_scenario(doc(measures=[
        {"name": "os-choice-nextstep", "work_factors": {"hackers": 3}},
        {"name": "custom", "filter_fractions": {"worms": 0.25}, "independent": False, "group": "g"},
    ]))
    nextstep, custom = sc.stack.measures
    assert nextstep.fraction(H) == 0.2 and nextstep.work_factor(H) == 3
    assert custom.fraction(CLASSES[0]) == 0.25 and custom.fraction(H) == 0.0
    assert custom.group == "g" and not custom.independent


def test_validation_errors_propagate():
    with pytest.raises(FractionOutOfRange):
        parse_scenario(doc(measures=[{"name": "x", "filter_fractions": {"worms": 1.3}}]))


def test_mode_and_epoch_keys():
    sc = parse_scenario(doc(composition_mode="multiplicative-survival", epoch_hours=12))
    assert sc.composition_mode is CompositionMode.MULTIPLICATIVE_SURVIVAL
    assert sc.epoch_hours == 12


def _csv_row(data: bytes) -> dict:
    return next(csv.DictReader(io.StringIO(data.decode())))


def test_emit_deterministic_and_formats_agree(paper_scenario):
    rep = analyze(paper_scenario)
    js = emit_report(rep, "json")
    assert js == emit_report(rep, "json")
    parsed = json.loads(js)
    assert parsed["residual_total"] == 26500
    assert parsed["scaled_time_hours"] == 90.566
    row = _csv_row(emit_report(rep, "csv"))
    assert list(row) == list(parsed)
    for key, value in parsed.items():
        if value is None:
            assert row[key] == ""
        else:
            assert row[key] == str(value)


@pytest.mark.parametrize("make", [
    lambda s: run_trials(s, 20, 1),
    lambda s: simulate_fleet(s.fleet, 20, 1),
    lambda s: simulate_epochs(s, 200.0, 5, 1),
])
def test_simulation_reports_render(paper_scenario, make):
    rep = make(paper_scenario)
    parsed = json.loads(emit_report(rep, "json"))
    row = _csv_row(emit_report(rep, "csv"))
    assert list(row) == list(parsed)
    assert all(k.islower() for k in parsed)


def test_six_significant_digits():
    data = json.loads(emit_report({"x_hours": 1 / 3, "big": 123456789.0, "n": 3}, "json"))
    assert data == {"x_hours": 0.333333, "big": 123457000, "n": 3}
