"""Defect-free rates (MDFR, CDFR) and the recall/precision funnel (CER, AER).

Rates are pooled over every medically relevant entity in the input and kept
as exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import EmptyInput, NoCapturedEntities
from .model import INACCURATE, MISSING_INFORMATION, AuditedEntity, Severity


@dataclass(frozen=True)
class StatRatesResult:
    mdfr: Fraction
    cdfr: Fraction
    n_entities: int
    n_major: int
    n_critical: int


@dataclass(frozen=True)
class FunnelResult:
    mer: Fraction
    cer: Fraction
    ier: Fraction
    aer: Fraction
    n_relevant: int
    n_captured: int
    n_missing: int
    n_inaccurate: int


def relevant(entities: Iterable[AuditedEntity]) -> list[AuditedEntity]:
    return [ae for ae in entities if ae.entity.medically_relevant]


@dataclass(frozen=True)
class EntityCounts:
    """Additive per-chunk tallies; partial counts from workers can be summed."""

    n: int = 0
    major: int = 0
    critical: int = 0
    missing: int = 0
    inaccurate: int = 0

    def __add__(self, other):
        return EntityCounts(
            self.n + other.n,
            self.major + other.major,
            self.critical + other.critical,
            self.missing + other.missing,
            self.inaccurate + other.inaccurate,
        )


def count_entities(entities: Iterable[AuditedEntity]) -> EntityCounts:
    n = major = critical = missing = inaccurate = 0
    for ae in entities:
        if not ae.entity.medically_relevant:
            continue
        n += 1
        top = max((d.severity for d in ae.defects), default=0)
        if top >= Severity.MAJOR:
            major += 1
        if top >= Severity.CRITICAL:
            critical += 1
        # missing takes precedence over inaccurate
        if ae.has_defect(Severity.MAJOR, MISSING_INFORMATION):
            missing += 1
        elif ae.has_defect(Severity.MAJOR, INACCURATE):
            inaccurate += 1
    return EntityCounts(n, major, critical, missing, inaccurate)


def stat_rates_from_counts(c: EntityCounts) -> StatRatesResult:
    if c.n == 0:
        raise EmptyInput("no medically relevant entities; MDFR/CDFR undefined")
    return StatRatesResult(
        mdfr=1 - Fraction(c.major, c.n),
        cdfr=1 - Fraction(c.critical, c.n),
        n_entities=c.n,
        n_major=c.major,
        n_critical=c.critical,
    )


def funnel_from_counts(c: EntityCounts) -> FunnelResult:
    if c.n == 0:
        raise EmptyInput("no medically relevant entities; CER/AER undefined")
    captured = c.n - c.missing
    if captured == 0:
        raise NoCapturedEntities("every relevant entity is missing; AER undefined")
    mer = Fraction(c.missing, c.n)
    ier = Fraction(c.inaccurate, captured)
    return FunnelResult(
        mer=mer,
        cer=1 - mer,
        ier=ier,
        aer=1 - ier,
        n_relevant=c.n,
        n_captured=captured,
        n_missing=c.missing,
        n_inaccurate=c.inaccurate,
    )


def compute_stat_rates(entities: Iterable[AuditedEntity]) -> StatRatesResult:
    """MDFR and CDFR: share of relevant entities with no defect of severity
    >= 4 (resp. == 5). Defect kind is irrelevant here."""
    return stat_rates_from_counts(count_entities(entities))


def compute_funnel(entities: Iterable[AuditedEntity]) -> FunnelResult:
    """Missing/captured and inaccurate/accurate entity rates.

    An entity is missing when it carries a Missing Information defect of
    Major or Critical severity. Captured entities are the rest; of those, an
    entity is inaccurate when it carries an Inaccurate defect of Major or
    Critical severity. IER is taken over captured entities only.
    """
    return funnel_from_counts(count_entities(entities))
