"""User-acceptance metrics: words added / deleted / substituted per note and
the Minimally-Edited Note Rate over a population of notes."""

from __future__ import annotations

import enum
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .align import Token, align_codes, tokenize
from .errors import DuplicateId, EmptyInput, OutOfRange

MNR_THRESHOLD = Fraction(1, 10)


@dataclass(frozen=True)
class NoteEditPair:
    note_id: str
    initial: tuple[Token, ...]
    final: tuple[Token, ...]
    # source text as written; defaults to the space-joined token surfaces
    initial_text: Optional[str] = None
    final_text: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "initial", tuple(self.initial))
        object.__setattr__(self, "final", tuple(self.final))
        if self.initial_text is None:
            object.__setattr__(self, "initial_text", " ".join(t.surface for t in self.initial))
        if self.final_text is None:
            object.__setattr__(self, "final_text", " ".join(t.surface for t in self.final))

    @classmethod
    def from_text(cls, note_id: str, initial_text: str, final_text: str) -> "NoteEditPair":
        return cls(note_id, tokenize(initial_text), tokenize(final_text), initial_text, final_text)


@dataclass(frozen=True)
class EditBreakdown:
    n_initial: int
    n_final: int
    added: int
    deleted: int
    substituted: int
    kept: int

    @property
    def words_added_rate(self) -> Fraction:
        return Fraction(self.added, self.n_final) if self.n_final else Fraction(0)

    @property
    def words_deleted_rate(self) -> Fraction:
        return Fraction(self.deleted, self.n_initial) if self.n_initial else Fraction(0)

    @property
    def words_substituted_rate(self) -> Fraction:
        return Fraction(self.substituted, self.n_initial) if self.n_initial else Fraction(0)


class Segment(str, enum.Enum):
    ZERO = "0%"
    UNDER_FIVE = "<5%"
    FIVE_TO_TEN = "5-10%"
    TEN_PLUS = ">=10%"


SEGMENTS = tuple(Segment)


def segment_of(rate) -> Segment:
    if not 0 <= rate <= 1:
        raise OutOfRange(f"substitution rate must lie in [0, 1], got {rate}")
    if rate == 0:
        return Segment.ZERO
    if rate < Fraction(1, 20):
        return Segment.UNDER_FIVE
    if rate < MNR_THRESHOLD:
        return Segment.FIVE_TO_TEN
    return Segment.TEN_PLUS


def edit_breakdown(pair: NoteEditPair, backend: Optional[str] = None) -> EditBreakdown:
    _, codes = align_codes(pair.initial, pair.final, backend)
    c = np.bincount(codes, minlength=4)
    return EditBreakdown(
        n_initial=len(pair.initial),
        n_final=len(pair.final),
        added=int(c[_kernels.INS]),
        deleted=int(c[_kernels.DEL]),
        substituted=int(c[_kernels.SUB]),
        kept=int(c[_kernels.KEEP]),
    )


def breakdowns(pairs: Sequence[NoteEditPair], jobs: int = 1,
               backend: Optional[str] = None) -> list[EditBreakdown]:
    """Per-pair breakdowns in input order, fanned out over ``jobs`` threads."""
    if jobs <= 1 or len(pairs) < 2:
        return [edit_breakdown(p, backend) for p in pairs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda p: edit_breakdown(p, backend), pairs))


@dataclass(frozen=True)
class MnrResult:
    mnr: Fraction
    segment_shares: dict
    segment_counts: dict
    n_notes: int
    breakdowns: tuple[EditBreakdown, ...] = ()


def mnr_from_breakdowns(items: Sequence[EditBreakdown]) -> MnrResult:
    if not items:
        raise EmptyInput("no edit pairs; MNR undefined")
    counts = Counter(segment_of(b.words_substituted_rate) for b in items)
    n = len(items)
    seg_counts = {s: counts.get(s, 0) for s in SEGMENTS}
    minimal = sum(1 for b in items if b.words_substituted_rate < MNR_THRESHOLD)
    return MnrResult(
        mnr=Fraction(minimal, n),
        segment_shares={s: Fraction(k, n) for s, k in seg_counts.items()},
        segment_counts=seg_counts,
        n_notes=n,
        breakdowns=tuple(items),
    )


def compute_mnr(pairs: Sequence[NoteEditPair], jobs: int = 1) -> MnrResult:
    """Share of notes whose word-substitution rate is strictly below 10%.

    The rate's denominator is the initial-draft word count; each note counts
    once regardless of length.
    """
    if not pairs:
        raise EmptyInput("no edit pairs; MNR undefined")
    dupes = [k for k, v in Counter(p.note_id for p in pairs).items() if v > 1]
    if dupes:
        raise DuplicateId(f"duplicate note_id(s) in edit batch: {sorted(dupes)[:5]}")
    return mnr_from_breakdowns(breakdowns(pairs, jobs))
