"""Built-in obscurity measures.

The six worked-example entries carry their published per-class filter
fractions (worm, bot, skid, hacker) and unit work factors. The generic
technique entries are placeholders with zero fractions: there are no
sourced numbers for them, so they must be parameterized by the user.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .threat_model import AttackerClass, ObscurityMeasure, ValidationError

W, B, S, H = AttackerClass.WORM, AttackerClass.BOT, AttackerClass.SKID, AttackerClass.HACKER


class Provenance(Enum):
    PAPER81 = "paper81"
    SECTION7_GENERIC = "section7-generic"


class UnknownMeasureName(ValidationError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    measure: ObscurityMeasure
    provenance: Provenance
    description: str

    @property
    def name(self) -> str:
        return self.measure.name


def _entry(name, fractions, provenance, description):
    measure = ObscurityMeasure(
        name=name,
        filter_fractions=dict(zip((W, B, S, H), fractions)),
        work_factors={W: 1.0, B: 1.0, S: 1.0, H: 1.0},
    )
    return CatalogEntry(measure, provenance, description)


_WORKED = [
    ("banner-obfuscation", (0.2, 0.2, 0.2, 0.01), "meaningless custom server banner"),
    ("nonstandard-port-18888", (0.1, 0.1, 0.1, 0.01), "service listens on port 18888"),
    ("server-choice-thttpd", (0.15, 0.15, 0.1, 0.02), "lightweight, uncommon web server"),
    ("os-choice-nextstep", (0.1, 0.1, 0.1, 0.2), "obscure, long-discontinued host OS"),
    ("proprietary-protocol-msp", (0.2, 0.2, 0.2, 0.2), "private SSL-like transport protocol"),
    ("local-db-bdb", (0.05, 0.05, 0.1, 0.1), "embedded local database instead of a networked one"),
]

_GENERIC = [
    ("obscure-software", "choose uncommon software"),
    ("lie-about-versions", "report false version information"),
    ("obscure-configuration", "non-standard software configuration"),
    ("obscure-location", "non-standard install or resource locations"),
    ("change-defaults", "replace vendor default settings"),
    ("change-passwords", "replace default credentials"),
    ("randomize-attributes", "randomize predictable names and attributes"),
]

_ENTRIES: tuple[CatalogEntry, ...] = tuple(
    [_entry(n, f, Provenance.PAPER81, d) for n, f, d in _WORKED]
    + [_entry(n, (0.0, 0.0, 0.0, 0.0), Provenance.SECTION7_GENERIC, d) for n, d in _GENERIC]
)
_BY_NAME = {e.name: e for e in _ENTRIES}

PAPER_STACK_NAMES: tuple[str, ...] = tuple(n for n, _, _ in _WORKED)


def builtin_measures() -> list[CatalogEntry]:
    return list(_ENTRIES)


def names() -> list[str]:
    return [e.name for e in _ENTRIES]


def lookup(name: str) -> CatalogEntry:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise UnknownMeasureName(
            f"unknown measure; available: {', '.join(names())}", "name", name
        ) from None
