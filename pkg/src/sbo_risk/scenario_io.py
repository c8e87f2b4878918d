"""JSON scenario files and JSON/CSV report rendering."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import replace
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Union

from . import catalog
from .analytic import AnalyticReport
from .catalog import CatalogEntry
from .simulator import EpochReport, FleetReport, SimReport
from .threat_model import (
    CLASSES,
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
    validate_scenario,
)

CLASS_KEYS = {c.value: c for c in CLASSES}
SIGNIFICANT_DIGITS = 6


class ScenarioSyntaxError(ValidationError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class SchemaError(ValidationError):
    pass


class UnknownKey(SchemaError):
    pass


class MissingField(SchemaError):
    pass


def bundled_scenarios() -> list[str]:
    root = resources.files("sbo_risk") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_scenario_text(name: str) -> str:
    return (resources.files("sbo_risk") / "scenarios" / f"{name}.json").read_text("utf-8")


def _object(value: Any, where: str, allowed: Iterable[str], required: Iterable[str] = ()) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"expected an object, got {type(value).__name__}", where)
    allowed = list(allowed)
    for key in value:
        if key not in allowed:
            raise UnknownKey(f"unknown key {key!r}; allowed: {', '.join(allowed)}", where)
    for key in required:
        if key not in value:
            raise MissingField("required key is missing", f"{where}.{key}" if where else key)
    return value


def _per_class(value: Any, where: str) -> dict[AttackerClass, Any]:
    obj = _object(value, where, CLASS_KEYS)
    return {CLASS_KEYS[k]: v for k, v in obj.items()}


def _measure(item: Any, index: int) -> ObscurityMeasure:
    where = f"measures[{index}]"
    if isinstance(item, str):
        return catalog.lookup(item).measure
    obj = _object(item, where, ("name", "filter_fractions", "work_factors", "independent", "group"), ("name",))
    name = obj["name"]
    if not isinstance(name, str):
        raise SchemaError("name must be a string", f"{where}.name")
    if len(obj) == 1:
        return catalog.lookup(name).measure
    try:
        base = catalog.lookup(name).measure
    except catalog.UnknownMeasureName:
        base = ObscurityMeasure(name=name)
    fractions = dict(base.filter_fractions)
    factors = dict(base.work_factors)
    if "filter_fractions" in obj:
        fractions.update(_per_class(obj["filter_fractions"], f"{where}.filter_fractions"))
    if "work_factors" in obj:
        factors.update(_per_class(obj["work_factors"], f"{where}.work_factors"))
    return ObscurityMeasure(
        name=name,
        filter_fractions=fractions,
        work_factors=factors,
        independent=obj.get("independent", base.independent),
        group=obj.get("group", base.group),
    )


def _enum(enum_cls, value, where):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise SchemaError(f"{value!r} is not one of: {allowed}", where) from None


def scenario_from_dict(doc: Any) -> Scenario:
    doc = _object(
        doc,
        "",
        ("population", "measures", "baseline", "risk", "fleet", "epoch_hours", "composition_mode"),
        ("population", "baseline", "risk"),
    )
    counts = _per_class(doc["population"], "population")
    population = ThreatPopulation({c: counts.get(c, 0) for c in CLASSES})

    measures = doc.get("measures", [])
    if not isinstance(measures, list):
        raise SchemaError("expected a list", "measures")
    stack = DefenseStack(tuple(_measure(m, i) for i, m in enumerate(measures)))

    baseline = _object(doc["baseline"], "baseline", ("time_hours", "population"), ("time_hours", "population"))
    risk = _object(doc["risk"], "risk", ("aro", "av", "ef"), ("aro", "av", "ef"))

    fleet = None
    if doc.get("fleet") is not None:
        f = _object(
            doc["fleet"],
            "fleet",
            ("instances", "secret_mode", "per_instance_probability"),
            ("instances", "secret_mode", "per_instance_probability"),
        )
        fleet = FleetConfig(
            instances=f["instances"],
            secret_mode=_enum(SecretMode, f["secret_mode"], "fleet.secret_mode"),
            per_instance_compromise_probability=f["per_instance_probability"],
        )

    mode = _enum(CompositionMode, doc.get("composition_mode", "additive"), "composition_mode")
    scenario = Scenario(
        population=population,
        stack=stack,
        baseline_time_hours=baseline["time_hours"],
        baseline_population=baseline["population"],
        risk=RiskParams(aro=risk["aro"], av=risk["av"], ef=risk["ef"]),
        fleet=fleet,
        epoch_hours=doc.get("epoch_hours"),
        composition_mode=mode,
    )
    return validate_scenario(scenario)


def parse_scenario(source: Union[str, Path, bytes]) -> Scenario:
    """Parse a scenario from a file path or from raw UTF-8 bytes.

    Catalog references are resolved before validation. A ``str`` that is not
    an existing file but names a bundled scenario (e.g. ``"paper-8-1"``)
    loads that scenario.
    """
    if isinstance(source, bytes):
        try:
            text = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ScenarioSyntaxError(f"input is not UTF-8: {exc.reason}", 1, exc.start + 1) from None
    else:
        path = Path(source)
        if not path.exists() and isinstance(source, str) and source in bundled_scenarios():
            text = bundled_scenario_text(source)
        else:
            text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    return scenario_from_dict(doc)


def _class_map(mapping) -> dict[str, Any]:
    return {c.value: mapping[c] for c in CLASSES}


def scenario_to_dict(scenario: Scenario) -> dict:
    scenario = validate_scenario(scenario)
    doc: dict[str, Any] = {
        "population": _class_map(scenario.population.counts),
        "measures": [
            {
                "name": m.name,
                "filter_fractions": _class_map(m.filter_fractions),
                "work_factors": _class_map(m.work_factors),
                "independent": m.independent,
                **({"group": m.group} if m.group is not None else {}),
            }
            for m in scenario.stack
        ],
        "baseline": {"time_hours": scenario.baseline_time_hours, "population": scenario.baseline_population},
        "risk": {"aro": scenario.risk.aro, "av": scenario.risk.av, "ef": scenario.risk.ef},
        "composition_mode": scenario.composition_mode.value,
    }
    if scenario.fleet is not None:
        doc["fleet"] = {
            "instances": scenario.fleet.instances,
            "secret_mode": scenario.fleet.secret_mode.value,
            "per_instance_probability": scenario.fleet.per_instance_compromise_probability,
        }
    if scenario.epoch_hours is not None:
        doc["epoch_hours"] = scenario.epoch_hours
    return doc


def serialize_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


# --- reports -----------------------------------------------------------------

Row = dict[str, Any]


def _analytic_rows(r: AnalyticReport) -> list[Row]:
    row: Row = {"report": "analytic", "composition_mode": r.mode.value}
    for c in CLASSES:
        row[f"population_{c.value}"] = r.population[c]
    for c in CLASSES:
        row[f"filter_fraction_{c.value}"] = r.filter_fractions[c]
    for c in CLASSES:
        row[f"residual_{c.value}"] = r.residual_counts[c]
    row["residual_total"] = r.residual_total
    row["residual_fraction"] = r.residual_fraction
    row["scaled_time_hours"] = r.scaled_time_hours
    for c in CLASSES:
        row[f"composed_lambda_{c.value}"] = r.composed_lambda[c]
    row["aggregate_rate_per_hour"] = r.aggregate_rate_per_hour
    row["mean_first_compromise_hours"] = r.mean_first_compromise_hours
    row["ale_units"] = r.ale
    row["epoch_hours"] = r.epoch_hours
    row["epoch_compromise_probability"] = r.epoch_compromise_probability
    return [row]


def _sim_rows(r: SimReport) -> list[Row]:
    row: Row = {
        "report": "simulation",
        "composition_mode": r.mode.value,
        "trials": r.trials,
        "seed": r.seed,
        "horizon_hours": r.horizon_hours,
        "baseline_time_hours": r.baseline_time_hours,
        "baseline_population": r.baseline_population,
        "hacker_lambda": r.hacker_lambda,
    }
    for c in CLASSES:
        row[f"filtered_mean_{c.value}"] = r.per_class_filtered[c]
        row[f"filtered_se_{c.value}"] = r.per_class_filtered_se[c]
    row["compromised_trials"] = r.compromised_trials
    s = r.first_compromise_hours
    row["first_compromise_mean_hours"] = s.mean if s else None
    row["first_compromise_se_hours"] = s.se if s else None
    row["first_compromise_p05_hours"] = s.p05 if s else None
    row["first_compromise_p95_hours"] = s.p95 if s else None
    row["compromise_probability"] = r.compromise_probability
    row["compromise_probability_se"] = r.compromise_probability_se
    return [row]


def _fleet_rows(r: FleetReport) -> list[Row]:
    return [
        {
            "report": "fleet",
            "instances": r.instances,
            "secret_mode": r.secret_mode.value,
            "per_instance_probability": r.per_instance_probability,
            "trials": r.trials,
            "seed": r.seed,
            "mean_compromised_instances": r.mean_compromised_instances,
            "mean_compromised_instances_se": r.mean_compromised_instances_se,
            "probability_all_compromised": r.probability_all_compromised,
            "probability_all_compromised_se": r.probability_all_compromised_se,
        }
    ]


def _epoch_rows(r: EpochReport) -> list[Row]:
    return [
        {
            "report": "epochs",
            "epoch_hours": r.epoch_hours,
            "horizon_hours": r.horizon_hours,
            "epochs": r.epochs,
            "reset_fraction": r.reset_fraction,
            "trials": r.trials,
            "seed": r.seed,
            "per_epoch_compromise_probability": r.per_epoch_compromise_probability,
            "per_epoch_compromise_probability_se": r.per_epoch_compromise_probability_se,
            "mean_epochs_survived": r.mean_epochs_survived,
            "mean_epochs_survived_se": r.mean_epochs_survived_se,
            "probability_any_compromise": r.probability_any_compromise,
            "probability_any_compromise_se": r.probability_any_compromise_se,
        }
    ]


def _catalog_rows(entries: list[CatalogEntry]) -> list[Row]:
    rows = []
    for e in entries:
        row: Row = {"name": e.name, "provenance": e.provenance.value, "description": e.description}
        for c in CLASSES:
            row[f"filter_fraction_{c.value}"] = e.measure.fraction(c)
        for c in CLASSES:
            row[f"work_factor_{c.value}"] = e.measure.work_factor(c)
        row["independent"] = e.measure.independent
        rows.append(row)
    return rows


def report_rows(report) -> list[Row]:
    """Flat, ordered records for a report; plain dicts and lists of dicts pass through."""
    if isinstance(report, AnalyticReport):
        return _analytic_rows(report)
    if isinstance(report, SimReport):
        return _sim_rows(report)
    if isinstance(report, FleetReport):
        return _fleet_rows(report)
    if isinstance(report, EpochReport):
        return _epoch_rows(report)
    if isinstance(report, list) and all(isinstance(e, CatalogEntry) for e in report):
        return _catalog_rows(report)
    if isinstance(report, dict):
        return [report]
    if isinstance(report, list):
        return list(report)
    raise TypeError(f"cannot render {type(report).__name__}")


def _round(value: Any) -> Any:
    """Fixed-precision value shared by both renderings."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    rounded = float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    return int(rounded) if rounded.is_integer() and abs(rounded) < 1e15 else rounded


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def emit_report(report, fmt: str = "json") -> bytes:
    """Serialize a report deterministically: fixed field order, 6 significant digits."""
    rows = [{k: _round(v) for k, v in row.items()} for row in report_rows(report)]
    if fmt == "json":
        payload: Any = rows[0] if len(rows) == 1 and not isinstance(report, list) else rows
        return (json.dumps(payload, indent=2, allow_nan=False) + "\n").encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        columns = list(rows[0]) if rows else []
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_cell(row[c]) for c in columns])
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def with_mode(scenario: Scenario, mode: CompositionMode | None) -> Scenario:
    return scenario if mode is None else replace(scenario, composition_mode=mode)
