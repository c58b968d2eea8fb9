"""Synthetic corpora with known ground truth, and a brute-force edit-distance
oracle that shares no code with the production alignment.

Exact-count profiles place exactly the requested number of defects or edits,
so every estimator can be checked for equality with the rates implied by
construction. Generation uses :class:`random.Random` seeded from the profile
and is sequential, so the same profile always yields the same corpus.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence, Union

from .align import Token
from .edit_metrics import NoteEditPair, Segment, segment_of
from .errors import InfeasibleProfile, InputTooLarge
from .ingest import DatasetBundle, Meta, write_bundle
from .model import (
    AuditedEntity,
    Defect,
    Encounter,
    Entity,
    Inaccurate,
    MissingInformation,
    Other,
    Severity,
    Snippet,
    TestSet,
)
from .transcription import QcRecord, annotate

CATEGORIES = ("major", "critical", "missing_major", "inaccurate_major")


# -- entity audits ---------------------------------------------------------

@dataclass(frozen=True)
class InjectionProfile:
    n_entities: int
    p_major_defect: float = 0.0
    p_critical_defect: float = 0.0
    p_missing_major: float = 0.0
    p_inaccurate_major: float = 0.0
    exact_counts: Optional[dict] = None
    seed: int = 0
    n_encounters: int = 1
    n_irrelevant: int = 0
    noise_defects: int = 0
    disjoint: bool = True

    def probabilities(self) -> dict:
        return {
            "major": self.p_major_defect,
            "critical": self.p_critical_defect,
            "missing_major": self.p_missing_major,
            "inaccurate_major": self.p_inaccurate_major,
        }


@dataclass(frozen=True)
class EntityGroundTruth:
    n: int
    major: frozenset
    critical: frozenset
    missing: frozenset
    inaccurate: frozenset

    @property
    def mdfr(self) -> Fraction:
        return 1 - Fraction(len(self.major), self.n)

    @property
    def cdfr(self) -> Fraction:
        return 1 - Fraction(len(self.critical), self.n)

    @property
    def mer(self) -> Fraction:
        return Fraction(len(self.missing), self.n)

    @property
    def cer(self) -> Fraction:
        return 1 - self.mer

    @property
    def ier(self) -> Optional[Fraction]:
        captured = self.n - len(self.missing)
        if captured == 0:
            return None
        return Fraction(len(self.inaccurate - self.missing), captured)

    @property
    def aer(self) -> Optional[Fraction]:
        ier = self.ier
        return None if ier is None else 1 - ier

    def rates(self) -> dict:
        return {"mdfr": self.mdfr, "cdfr": self.cdfr, "cer": self.cer, "aer": self.aer}


def _check_profile(p: InjectionProfile):
    if p.n_entities < 1:
        raise InfeasibleProfile("n_entities must be positive")
    if p.n_encounters < 1 or p.n_encounters > p.n_entities:
        raise InfeasibleProfile("n_encounters must be between 1 and n_entities")
    for name, prob in p.probabilities().items():
        if not 0.0 <= prob <= 1.0:
            raise InfeasibleProfile(f"probability {name}={prob} outside [0, 1]")
    if p.exact_counts is not None:
        unknown = set(p.exact_counts) - set(CATEGORIES)
        if unknown:
            raise InfeasibleProfile(f"unknown exact_counts keys {sorted(unknown)}")
        counts = [p.exact_counts.get(c, 0) for c in CATEGORIES]
        if any(k < 0 or k > p.n_entities for k in counts):
            raise InfeasibleProfile("each exact count must lie in [0, n_entities]")
        if p.disjoint and sum(counts) > p.n_entities:
            raise InfeasibleProfile(
                f"disjoint placement of {sum(counts)} defects needs at least that many entities, "
                f"have {p.n_entities}"
            )


def _choose_sets(p: InjectionProfile, rng: random.Random) -> dict:
    n = p.n_entities
    if p.exact_counts is not None:
        counts = {c: p.exact_counts.get(c, 0) for c in CATEGORIES}
        if p.disjoint:
            picked = rng.sample(range(n), sum(counts.values()))
            out, at = {}, 0
            for c in CATEGORIES:
                out[c] = set(picked[at:at + counts[c]])
                at += counts[c]
            return out
        return {c: set(rng.sample(range(n), counts[c])) for c in CATEGORIES}
    probs = p.probabilities()
    return {c: {i for i in range(n) if rng.random() < probs[c]} for c in CATEGORIES}


def generate_audited_set(profile: InjectionProfile) -> tuple[TestSet, EntityGroundTruth]:
    """Build an audited test set with defects injected per ``profile``.

    Ground truth is computed from the injected index sets by set algebra, not
    by inspecting the emitted entities.
    """
    _check_profile(profile)
    rng = random.Random(profile.seed)
    n = profile.n_entities
    sets = _choose_sets(profile, rng)

    defects: list[list[Defect]] = [[] for _ in range(n)]
    for i in sorted(sets["major"]):
        defects[i].append(Defect(Other("synthetic-major"), Severity.MAJOR))
    for i in sorted(sets["critical"]):
        defects[i].append(Defect(Other("synthetic-critical"), Severity.CRITICAL))
    crit_missing, crit_inacc = set(), set()
    for i in sorted(sets["missing_major"]):
        sev = rng.choice((Severity.MAJOR, Severity.CRITICAL))
        if sev == Severity.CRITICAL:
            crit_missing.add(i)
        defects[i].append(Defect(MissingInformation, sev))
    for i in sorted(sets["inaccurate_major"]):
        sev = rng.choice((Severity.MAJOR, Severity.CRITICAL))
        if sev == Severity.CRITICAL:
            crit_inacc.add(i)
        defects[i].append(Defect(Inaccurate, sev))
    # low-severity noise never moves any rate
    noise_kinds = (MissingInformation, Inaccurate, Other("synthetic-minor"))
    for _ in range(profile.noise_defects):
        i = rng.randrange(n)
        defects[i].append(Defect(rng.choice(noise_kinds), Severity(rng.randint(1, 3))))

    bounds = [round(k * n / profile.n_encounters) for k in range(profile.n_encounters + 1)]
    encounters = []
    for k in range(profile.n_encounters):
        enc_id = f"enc{k:04d}"
        ents, snips = [], []
        for i in range(bounds[k], bounds[k + 1]):
            eid = f"e{i:06d}"
            ents.append(AuditedEntity(Entity(eid, enc_id, f"synthetic entity {i}"), tuple(defects[i])))
            if i not in sets["missing_major"]:
                snips.append(Snippet(f"s{i:06d}", enc_id, f"synthetic snippet {i}", eid))
        encounters.append(Encounter(enc_id, tuple(ents), tuple(snips)))

    # distractors: irrelevant entities with severe defects, excluded from every rate
    for j in range(profile.n_irrelevant):
        k = rng.randrange(profile.n_encounters)
        enc = encounters[k]
        extra = AuditedEntity(
            Entity(f"x{j:06d}", enc.encounter_id, f"irrelevant entity {j}", medically_relevant=False),
            (Defect(MissingInformation, Severity.CRITICAL), Defect(Inaccurate, Severity.CRITICAL)),
        )
        encounters[k] = Encounter(enc.encounter_id, enc.entities + (extra,), enc.snippets)

    truth = EntityGroundTruth(
        n=n,
        major=frozenset(set().union(*(sets[c] for c in CATEGORIES))),
        critical=frozenset(sets["critical"] | crit_missing | crit_inacc),
        missing=frozenset(sets["missing_major"]),
        inaccurate=frozenset(sets["inaccurate_major"]),
    )
    ts = TestSet(f"synth-{profile.seed}", tuple(encounters), source="synthetic", date_range="")
    return ts, truth


# -- edit pairs --------------------------------------------------------------

CountSpec = Union[int, tuple]


@dataclass(frozen=True)
class EditInjectionProfile:
    """Per-note edit counts.

    ``substitutions``/``insertions``/``deletions`` are either a fixed count
    or an inclusive ``(lo, hi)`` range drawn per note. ``per_note`` lists
    explicit ``(substitutions, insertions, deletions)`` triples and, when
    given, fixes ``n_notes`` to its length.
    """

    n_notes: int
    note_length: int
    substitutions: CountSpec = 0
    insertions: CountSpec = 0
    deletions: CountSpec = 0
    per_note: Optional[tuple] = None
    seed: int = 0


@dataclass(frozen=True)
class NoteTruth:
    note_id: str
    n_initial: int
    substituted: int
    added: int
    deleted: int

    @property
    def n_final(self) -> int:
        return self.n_initial - self.deleted + self.added

    @property
    def words_substituted_rate(self) -> Fraction:
        return Fraction(self.substituted, self.n_initial) if self.n_initial else Fraction(0)

    @property
    def words_deleted_rate(self) -> Fraction:
        return Fraction(self.deleted, self.n_initial) if self.n_initial else Fraction(0)

    @property
    def words_added_rate(self) -> Fraction:
        return Fraction(self.added, self.n_final) if self.n_final else Fraction(0)

    @property
    def segment(self) -> Segment:
        return segment_of(self.words_substituted_rate)


@dataclass(frozen=True)
class EditGroundTruth:
    notes: tuple[NoteTruth, ...]

    @property
    def mnr(self) -> Fraction:
        return Fraction(sum(1 for t in self.notes if t.words_substituted_rate < Fraction(1, 10)), len(self.notes))

    def segment_counts(self) -> dict:
        c = Counter(t.segment for t in self.notes)
        return {s: c.get(s, 0) for s in Segment}


def _draw(spec: CountSpec, rng: random.Random) -> int:
    if isinstance(spec, int):
        return spec
    lo, hi = spec
    return rng.randint(lo, hi)


def _edit_triples(p: EditInjectionProfile, rng: random.Random) -> list:
    if p.per_note is not None:
        return [tuple(t) for t in p.per_note]
    return [(_draw(p.substitutions, rng), _draw(p.insertions, rng), _draw(p.deletions, rng)) for _ in range(p.n_notes)]


def _layout(L: int, s: int, i: int, d: int, rng: random.Random):
    """Pick deleted positions, substituted positions and insertion gaps.

    When a note has both insertions and deletions, every deletion precedes
    every insertion with ``d + i`` untouched tokens between them; without
    that buffer a delete/insert pair could be re-aligned as cheaper
    substitutions and the injected counts would not be recoverable.
    """
    if min(s, i, d) < 0:
        raise InfeasibleProfile("edit counts must be non-negative")
    buffer = d + i if (d and i) else 0
    if s + d + buffer > L:
        raise InfeasibleProfile(
            f"note of {L} tokens cannot hold {s} substitutions, {d} deletions"
            + (f" and a {buffer}-token separation buffer" if buffer else "")
        )
    if buffer:
        cut = rng.randint(d, L - buffer)
        deleted = set(rng.sample(range(cut), d))
        gaps = [rng.randint(cut + buffer, L) for _ in range(i)]
        blocked = set(range(cut, cut + buffer)) | deleted
    else:
        deleted = set(rng.sample(range(L), d))
        gaps = [rng.randint(0, L) for _ in range(i)]
        blocked = set(deleted)
    free = [k for k in range(L) if k not in blocked]
    subbed = set(rng.sample(free, s))
    return deleted, subbed, Counter(gaps)


def generate_edit_pairs(profile: EditInjectionProfile) -> tuple[list[NoteEditPair], EditGroundTruth]:
    """Notes whose drafts use distinct tokens, edited by exact op counts.

    Because no token repeats and every substituted or inserted word is
    fresh, the minimal alignment has exactly the injected op counts.
    """
    if profile.note_length < 0:
        raise InfeasibleProfile("note_length must be non-negative")
    rng = random.Random(profile.seed)
    triples = _edit_triples(profile, rng)
    if profile.per_note is None and len(triples) != profile.n_notes:
        raise InfeasibleProfile("n_notes mismatch")
    L = profile.note_length
    pairs, truths = [], []
    for k, (s, i, d) in enumerate(triples):
        deleted, subbed, gaps = _layout(L, s, i, d, rng)
        draft = [f"w{v}" for v in rng.sample(range(10 * L + 10), L)]
        final = []
        fresh = 0
        for pos in range(L + 1):
            for _ in range(gaps.get(pos, 0)):
                final.append(f"ins{fresh}")
                fresh += 1
            if pos == L:
                break
            if pos in deleted:
                continue
            if pos in subbed:
                final.append(f"sub{fresh}")
                fresh += 1
            else:
                final.append(draft[pos])
        note_id = f"note{k:05d}"
        pairs.append(NoteEditPair(note_id, tuple(Token(w) for w in draft), tuple(Token(w) for w in final)))
        truths.append(NoteTruth(note_id, L, s, i, d))
    return pairs, EditGroundTruth(tuple(truths))


# -- transcription QC -------------------------------------------------------

@dataclass(frozen=True)
class QcProfile:
    n_records: int
    terms_per_record: int
    corrupted: int = 0
    inaudible: int = 0
    multi_token_share: float = 0.3
    seed: int = 0


@dataclass(frozen=True)
class QcGroundTruth:
    hits: int
    audible_terms: int
    corrupted_terms: tuple = ()

    @property
    def mwhr(self) -> Fraction:
        return Fraction(self.hits, self.audible_terms)


def generate_qc_records(profile: QcProfile) -> tuple[list[QcRecord], QcGroundTruth]:
    """Transcripts of distinct filler and term tokens; ``corrupted`` audible
    terms get one token replaced by a fresh word in the hypothesis."""
    total = profile.n_records * profile.terms_per_record
    if profile.corrupted + profile.inaudible > total:
        raise InfeasibleProfile("corrupted + inaudible terms exceed the number of terms")
    rng = random.Random(profile.seed)
    order = rng.sample(range(total), total)
    corrupted = set(order[:profile.corrupted])
    inaudible = set(order[profile.corrupted:profile.corrupted + profile.inaudible])

    records = []
    bad = []
    word = 0
    for r in range(profile.n_records):
        ref, hyp, spans = [], [], []
        for t in range(profile.terms_per_record):
            g = r * profile.terms_per_record + t
            for _ in range(rng.randint(1, 3)):
                ref.append(f"f{word}")
                hyp.append(f"f{word}")
                word += 1
            length = 2 if rng.random() < profile.multi_token_share else 1
            start = len(ref)
            broken = rng.randrange(length) if g in corrupted else -1
            for k in range(length):
                ref.append(f"m{word}")
                hyp.append(f"x{word}" if k == broken else f"m{word}")
                word += 1
            spans.append((f"r{r:03d}t{t:03d}", start, length, g not in inaudible))
            if g in corrupted:
                bad.append(f"r{r:03d}t{t:03d}")
        ref.append(f"f{word}")
        hyp.append(f"f{word}")
        word += 1
        rt = tuple(Token(w) for w in ref)
        records.append(QcRecord(
            f"qc{r:03d}", rt, tuple(Token(w) for w in hyp),
            tuple(annotate(rt, tid, st, ln, aud) for tid, st, ln, aud in spans),
        ))
    audible = total - profile.inaudible
    # corrupted and inaudible sets are disjoint, so every corrupted term is audible
    return records, QcGroundTruth(audible - profile.corrupted, audible, tuple(bad))


# -- brute-force oracle ------------------------------------------------------

ORACLE_LIMIT = 12


@dataclass(frozen=True)
class OracleResult:
    cost: int
    ops: dict = field(default_factory=dict)


def oracle_edit_distance(a: Sequence, b: Sequence) -> OracleResult:
    """Edit distance by memoised recursion over suffixes.

    Tokens compare by ``normalized`` when present, else by value. The op
    multiset is that of one optimal alignment (first optimum in the order
    keep/substitute, delete, insert while recursing forward).
    """
    if len(a) > ORACLE_LIMIT or len(b) > ORACLE_LIMIT:
        raise InputTooLarge(f"oracle handles at most {ORACLE_LIMIT} tokens per side")
    ka = tuple(getattr(t, "normalized", t) for t in a)
    kb = tuple(getattr(t, "normalized", t) for t in b)

    @lru_cache(maxsize=None)
    def rest(i, j):
        if i == len(ka):
            return len(kb) - j, (0, 0, 0, len(kb) - j)
        if j == len(kb):
            return len(ka) - i, (0, 0, len(ka) - i, 0)
        best = None
        c, (k, s, d, n) = rest(i + 1, j + 1)
        if ka[i] == kb[j]:
            best = (c, (k + 1, s, d, n))
        else:
            best = (c + 1, (k, s + 1, d, n))
        c, (k, s, d, n) = rest(i + 1, j)
        if c + 1 < best[0]:
            best = (c + 1, (k, s, d + 1, n))
        c, (k, s, d, n) = rest(i, j + 1)
        if c + 1 < best[0]:
            best = (c + 1, (k, s, d, n + 1))
        return best

    cost, (k, s, d, n) = rest(0, 0)
    return OracleResult(cost, {"keep": k, "substitute": s, "delete": d, "insert": n})


# -- on-disk corpus ----------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, Fraction):
        return {"fraction": f"{obj.numerator}/{obj.denominator}", "value": float(obj)}
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, Segment):
        return obj.value
    return obj


def write_corpus(out_dir, seed: int = 0, n_entities: int = 1000, exact_counts: Optional[dict] = None,
                 n_encounters: int = 10, n_notes: int = 100, note_length: int = 50,
                 substitutions: CountSpec = (0, 8), qc_records: int = 10, terms_per_record: int = 9,
                 corrupted_terms: int = 2) -> dict:
    """Write a full synthetic bundle plus a ``ground_truth.json`` sidecar."""
    exact = exact_counts if exact_counts is not None else {
        "major": 15, "critical": 0, "missing_major": 40, "inaccurate_major": 20,
    }
    ts, et = generate_audited_set(InjectionProfile(
        n_entities=n_entities, exact_counts=exact, seed=seed, n_encounters=n_encounters,
        n_irrelevant=max(1, n_entities // 50), noise_defects=n_entities // 10,
    ))
    pairs, gt = generate_edit_pairs(EditInjectionProfile(
        n_notes=n_notes, note_length=note_length, substitutions=substitutions, seed=seed + 1,
    ))
    qc, qt = generate_qc_records(QcProfile(
        n_records=qc_records, terms_per_record=terms_per_record, corrupted=corrupted_terms, seed=seed + 2,
    ))
    meta = Meta(set_id=ts.set_id, run_label=f"synthetic seed {seed}", date="", source="synthetic")
    paths = write_bundle(DatasetBundle(ts, tuple(pairs), tuple(qc), meta), out_dir)

    truth = {
        "seed": seed,
        "mdfr": _jsonable(et.mdfr),
        "cdfr": _jsonable(et.cdfr),
        "cer": _jsonable(et.cer),
        "aer": _jsonable(et.aer),
        "mnr": _jsonable(gt.mnr),
        "mwhr": _jsonable(qt.mwhr),
        "n_entities": et.n,
        "segment_counts": {s.value: k for s, k in gt.segment_counts().items()},
        "corrupted_terms": list(qt.corrupted_terms),
        "profiles": {
            "exact_counts": exact,
            "edits": asdict(EditInjectionProfile(n_notes, note_length, substitutions, seed=seed + 1)),
        },
    }
    sidecar = Path(out_dir) / "ground_truth.json"
    sidecar.write_text(json.dumps(truth, indent=2, default=_jsonable) + "\n", encoding="utf-8")
    return {"paths": paths, "ground_truth": sidecar}


def random_token_pairs(n_pairs: int, max_len: int = 8, vocab_size: int = 4, seed: int = 0) -> list:
    """Random sequence pairs over a tiny vocabulary, so tokens repeat often.

    These are the stress cases for cost-only comparisons against the oracle;
    with repeats the optimal op multiset need not be unique.
    """
    rng = random.Random(seed)
    vocab = [Token(f"v{k}") for k in range(vocab_size)]

    def seq():
        return [rng.choice(vocab) for _ in range(rng.randint(0, max_len))]

    return [(seq(), seq()) for _ in range(n_pairs)]
