"""Shared domain vocabulary: severities, defects, rubric entities, snippets
and the test sets they are pooled into.

All types are frozen; a validated :class:`TestSet` can be shared freely
between worker threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .errors import DanglingReference, DuplicateId, EmptyTestSet, OutOfRange, ValidationError


@enum.unique
class Severity(enum.IntEnum):
    LOW = 1
    MILD = 2
    MODERATE = 3
    MAJOR = 4
    CRITICAL = 5

    @property
    def level(self) -> int:
        return int(self)

    @property
    def label(self) -> str:
        return self.name.capitalize()


def severity_from_level(level) -> Severity:
    """Map an integer level 1-5 to its :class:`Severity`.

    Booleans and non-integral values are rejected along with anything
    outside the scale.
    """
    if isinstance(level, bool) or not isinstance(level, int):
        raise OutOfRange(f"severity level must be an integer 1-5, got {level!r}")
    try:
        return Severity(level)
    except ValueError:
        raise OutOfRange(f"severity level must be 1-5, got {level}") from None


MISSING_INFORMATION = "missing_information"
INACCURATE = "inaccurate"


def _fold(text: str) -> str:
    return text.strip().lower().replace(" ", "_").replace("-", "_")


_MISSING_ALIASES = (MISSING_INFORMATION, "missinginformation", "missing")
_RESERVED = _MISSING_ALIASES + (INACCURATE,)


@dataclass(frozen=True)
class DefectKind:
    """Defect category.

    ``name`` is ``missing_information``, ``inaccurate`` or ``other``; for
    ``other`` the free-text ``label`` preserves whatever the dataset used.
    """

    name: str
    label: Optional[str] = None

    def __post_init__(self):
        if self.name not in (MISSING_INFORMATION, INACCURATE, "other"):
            raise ValueError(f"unknown defect kind {self.name!r}")
        if self.name == "other":
            if not self.label or self.label != self.label.strip():
                raise ValueError("Other defect kinds need a non-blank, unpadded label")
            if _fold(self.label) in _RESERVED:
                raise ValueError(f"label {self.label!r} names a built-in kind")

    @classmethod
    def parse(cls, text: str) -> "DefectKind":
        key = text.strip()
        folded = _fold(key)
        if folded in _MISSING_ALIASES:
            return MissingInformation
        if folded == INACCURATE:
            return Inaccurate
        if not key:
            raise ValueError("empty defect kind")
        return cls("other", key)

    def serialize(self) -> str:
        return self.label if self.name == "other" else self.name

    @property
    def is_missing(self) -> bool:
        return self.name == MISSING_INFORMATION

    @property
    def is_inaccurate(self) -> bool:
        return self.name == INACCURATE


MissingInformation = DefectKind(MISSING_INFORMATION)
Inaccurate = DefectKind(INACCURATE)


def Other(label: str) -> DefectKind:
    return DefectKind("other", label)


@dataclass(frozen=True)
class Defect:
    kind: DefectKind
    severity: Severity
    note: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.severity, Severity):
            object.__setattr__(self, "severity", severity_from_level(self.severity))


@dataclass(frozen=True)
class Entity:
    entity_id: str
    rubric_id: str
    text: str
    medically_relevant: bool = True

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValidationError(f"entity {self.entity_id!r} has empty text")


@dataclass(frozen=True)
class Snippet:
    snippet_id: str
    note_id: str
    text: str
    linked_entity: Optional[str] = None


@dataclass(frozen=True)
class AuditedEntity:
    entity: Entity
    defects: tuple[Defect, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "defects", tuple(self.defects))

    @property
    def defect_free(self) -> bool:
        return not self.defects

    def has_defect(self, min_severity: int = 1, kind: Optional[str] = None) -> bool:
        return any(
            d.severity >= min_severity and (kind is None or d.kind.name == kind)
            for d in self.defects
        )


@dataclass(frozen=True)
class Encounter:
    encounter_id: str
    entities: tuple[AuditedEntity, ...] = ()
    snippets: tuple[Snippet, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entities", tuple(self.entities))
        object.__setattr__(self, "snippets", tuple(self.snippets))


@dataclass(frozen=True)
class TestSet:
    set_id: str
    encounters: tuple[Encounter, ...]
    source: str = ""
    date_range: str = ""

    # keep pytest from collecting this as a test class
    __test__ = False

    def __post_init__(self):
        object.__setattr__(self, "encounters", tuple(self.encounters))

    def audited_entities(self) -> list[AuditedEntity]:
        return [ae for enc in self.encounters for ae in enc.entities]

    def snippets(self) -> list[Snippet]:
        return [s for enc in self.encounters for s in enc.snippets]


def validate_test_set(raw: TestSet) -> TestSet:
    """Check cross references and id uniqueness; return the validated set.

    Encounters are returned in their input order; the function is
    idempotent so re-validating its own output yields an equal object.
    """
    if not raw.encounters:
        raise EmptyTestSet(f"test set {raw.set_id!r} has no encounters")

    seen_encounters: set[str] = set()
    seen_entities: set[str] = set()
    seen_snippets: set[str] = set()
    for enc in raw.encounters:
        if enc.encounter_id in seen_encounters:
            raise DuplicateId(f"duplicate encounter_id {enc.encounter_id!r}")
        seen_encounters.add(enc.encounter_id)

        local = set()
        for ae in enc.entities:
            eid = ae.entity.entity_id
            if eid in seen_entities:
                raise DuplicateId(f"duplicate entity_id {eid!r}")
            seen_entities.add(eid)
            local.add(eid)

        for sn in enc.snippets:
            if sn.snippet_id in seen_snippets:
                raise DuplicateId(f"duplicate snippet_id {sn.snippet_id!r}")
            seen_snippets.add(sn.snippet_id)
            if sn.linked_entity is not None and sn.linked_entity not in local:
                raise DanglingReference(
                    f"snippet {sn.snippet_id!r} links to {sn.linked_entity!r}, "
                    f"which is not in encounter {enc.encounter_id!r}"
                )

    return TestSet(
        set_id=raw.set_id,
        encounters=tuple(raw.encounters),
        source=raw.source,
        date_range=raw.date_range,
    )
