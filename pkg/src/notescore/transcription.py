"""Medical Word Hit Rate: how many clearly audible, annotated medical terms in
a reference transcript survive ASR exactly."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .align import Token, align_codes
from .errors import NoAudibleTerms, ValidationError


@dataclass(frozen=True)
class MedicalTermAnnotation:
    term_id: str
    tokens: tuple[Token, ...]
    start_index: int
    clearly_audible: bool = True

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValidationError(f"term {self.term_id!r} has no tokens")
        if self.start_index < 0:
            raise ValidationError(f"term {self.term_id!r} has negative start_index")

    @property
    def end_index(self) -> int:
        return self.start_index + len(self.tokens)


@dataclass(frozen=True)
class QcRecord:
    record_id: str
    reference: tuple[Token, ...]
    hypothesis: tuple[Token, ...]
    terms: tuple[MedicalTermAnnotation, ...] = ()
    reference_text: Optional[str] = None
    hypothesis_text: Optional[str] = None

    def __post_init__(self):
        for name in ("reference", "hypothesis", "terms"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.reference_text is None:
            object.__setattr__(self, "reference_text", " ".join(t.surface for t in self.reference))
        if self.hypothesis_text is None:
            object.__setattr__(self, "hypothesis_text", " ".join(t.surface for t in self.hypothesis))
        for t in self.terms:
            window = self.reference[t.start_index:t.end_index]
            if window != t.tokens:
                raise ValidationError(
                    f"record {self.record_id!r}: term {t.term_id!r} does not match "
                    f"reference tokens at {t.start_index}"
                )


def annotate(reference: Sequence[Token], term_id: str, start: int, length: int,
             clearly_audible: bool = True) -> MedicalTermAnnotation:
    """Annotation for ``reference[start:start+length]``."""
    if length < 1 or start < 0 or start + length > len(reference):
        raise ValidationError(
            f"term {term_id!r}: span [{start}, {start + length}) outside reference of "
            f"{len(reference)} tokens"
        )
    return MedicalTermAnnotation(term_id, tuple(reference[start:start + length]), start, clearly_audible)


@dataclass(frozen=True)
class Miss:
    record_id: str
    term_id: str
    reference: tuple[str, ...]
    hypothesis: tuple[str, ...]


@dataclass(frozen=True)
class MwhrResult:
    hits: int
    audible_terms: int
    misses: tuple[Miss, ...] = ()

    @property
    def mwhr(self) -> Fraction:
        return Fraction(self.hits, self.audible_terms)


def _score_record(rec: QcRecord, backend: Optional[str] = None):
    audible = [t for t in rec.terms if t.clearly_audible]
    if not audible:
        return 0, 0, []
    _, codes = align_codes(rec.reference, rec.hypothesis, backend)
    # per reference position: op code and aligned hypothesis index
    ref_op = np.empty(len(rec.reference), dtype=np.int8)
    ref_hyp = np.full(len(rec.reference), -1, dtype=np.int64)
    i = j = 0
    for c in codes.tolist():
        if c == _kernels.INS:
            j += 1
            continue
        ref_op[i] = c
        if c != _kernels.DEL:
            ref_hyp[i] = j
            j += 1
        i += 1

    hits = 0
    misses = []
    for t in audible:
        span = slice(t.start_index, t.end_index)
        if np.all(ref_op[span] == _kernels.KEEP):
            hits += 1
            continue
        hyp = tuple(
            rec.hypothesis[h].surface
            for op, h in zip(ref_op[span], ref_hyp[span])
            if op == _kernels.SUB
        )
        misses.append(Miss(rec.record_id, t.term_id, tuple(tok.surface for tok in t.tokens), hyp))
    return hits, len(audible), misses


def compute_mwhr(records: Sequence[QcRecord], jobs: int = 1) -> MwhrResult:
    """Pooled hit rate over all clearly audible terms in ``records``.

    A term is hit only if every one of its reference tokens is kept by the
    global reference/hypothesis alignment; any substitution or deletion
    inside the span is a miss.
    """
    if jobs > 1 and len(records) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scored = list(pool.map(_score_record, records))
    else:
        scored = [_score_record(r) for r in records]

    hits = sum(s[0] for s in scored)
    total = sum(s[1] for s in scored)
    if total == 0:
        raise NoAudibleTerms("no clearly audible medical terms; MWHR undefined")
    misses = tuple(m for s in scored for m in s[2])
    return MwhrResult(hits, total, misses)
