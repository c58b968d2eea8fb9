"""Line-delimited JSON record formats: parsing into a :class:`DatasetBundle`
and emitting a bundle back to records.

Every line is one JSON object whose ``kind`` field selects the record type:

``entity_audit``
    ``{encounter_id, entity_id, text, medically_relevant, defects: [{kind, severity, note}]}``
``snippet``
    ``{note_id, snippet_id, text, linked_entity}``
``edit_pair``
    ``{note_id, initial_text, final_text}``
``qc_record``
    ``{record_id, reference_text, hypothesis_text, terms: [{term_id, start_index, length, clearly_audible}]}``
``meta``
    ``{set_id, run_label, date, source, date_range, sources: {metric: label}}``

Any record may carry ``schema_version`` (currently 1). Records of any kind may
appear in any file; the per-section file names are a convention only.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from .align import tokenize
from .edit_metrics import NoteEditPair
from .errors import IoError, Issue, ParseError, ValidationError
from .model import (
    AuditedEntity,
    Defect,
    DefectKind,
    Encounter,
    Entity,
    Severity,
    Snippet,
    TestSet,
    validate_test_set,
)
from .transcription import QcRecord, annotate

SCHEMA_VERSION = 1

SECTION_FILES = {
    "meta": "meta.jsonl",
    "entities": "entities.jsonl",
    "snippets": "snippets.jsonl",
    "edits": "edits.jsonl",
    "qc": "qc.jsonl",
}


@dataclass(frozen=True)
class Meta:
    set_id: str = "test-set"
    run_label: str = ""
    date: str = ""
    source: str = ""
    date_range: str = ""
    sources: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DatasetBundle:
    test_set: Optional[TestSet] = None
    edit_pairs: Optional[tuple[NoteEditPair, ...]] = None
    qc_records: Optional[tuple[QcRecord, ...]] = None
    meta: Meta = field(default_factory=Meta)

    def __post_init__(self):
        if self.test_set is None and self.edit_pairs is None and self.qc_records is None:
            raise ValidationError("bundle contains no entity, edit or QC sections")


@dataclass
class BundlePaths:
    meta: Optional[Path] = None
    entities: Optional[Path] = None
    snippets: Optional[Path] = None
    edits: Optional[Path] = None
    qc: Optional[Path] = None

    @classmethod
    def from_dir(cls, directory, **overrides) -> "BundlePaths":
        d = Path(directory)
        found = {k: d / name for k, name in SECTION_FILES.items() if (d / name).exists()}
        found.update({k: Path(v) for k, v in overrides.items() if v is not None})
        return cls(**found)

    def present(self) -> list[tuple[str, Path]]:
        return [(f.name, getattr(self, f.name)) for f in fields(self) if getattr(self, f.name) is not None]


class _RecordError(Exception):
    pass


def _req(rec, key, typ=str):
    if key not in rec:
        raise _RecordError(f"missing field {key!r}")
    val = rec[key]
    if typ is not None and not isinstance(val, typ):
        raise _RecordError(f"field {key!r} must be {typ.__name__ if isinstance(typ, type) else typ}")
    return val


def _opt(rec, key, default, typ):
    val = rec.get(key, default)
    if val is None:
        return default
    if not isinstance(val, typ):
        raise _RecordError(f"field {key!r} has wrong type")
    return val


def _severity(raw) -> Severity:
    if isinstance(raw, bool):
        raise _RecordError(f"invalid severity {raw!r}")
    if isinstance(raw, str):
        s = raw.strip()
        if s.lstrip("-").isdigit():
            raw = int(s)
        else:
            try:
                return Severity[s.upper()]
            except KeyError:
                raise _RecordError(f"invalid severity {raw!r}") from None
    if not isinstance(raw, int):
        raise _RecordError(f"invalid severity {raw!r}")
    if not 1 <= raw <= 5:
        raise _RecordError(f"severity {raw} outside 1-5")
    return Severity(raw)


def _parse_entity(rec):
    enc = _req(rec, "encounter_id")
    eid = _req(rec, "entity_id")
    text = _req(rec, "text")
    if not text.strip():
        raise _RecordError("entity text is empty")
    relevant = _opt(rec, "medically_relevant", True, bool)
    rubric = _opt(rec, "rubric_id", enc, str)
    defects = []
    for k, d in enumerate(_opt(rec, "defects", [], list)):
        if not isinstance(d, dict):
            raise _RecordError(f"defects[{k}] is not an object")
        try:
            kind = DefectKind.parse(_req(d, "kind"))
        except ValueError as e:
            raise _RecordError(f"defects[{k}]: {e}") from None
        try:
            sev = _severity(_req(d, "severity", None))
        except _RecordError as e:
            raise _RecordError(f"defects[{k}]: {e}") from None
        defects.append(Defect(kind, sev, _opt(d, "note", None, str)))
    return enc, AuditedEntity(Entity(eid, rubric, text, relevant), tuple(defects))


def _parse_snippet(rec):
    note = _req(rec, "note_id")
    sn = Snippet(
        snippet_id=_req(rec, "snippet_id"),
        note_id=note,
        text=_req(rec, "text"),
        linked_entity=_opt(rec, "linked_entity", None, str),
    )
    return _opt(rec, "encounter_id", note, str), sn


def _parse_edit(rec):
    return NoteEditPair.from_text(_req(rec, "note_id"), _req(rec, "initial_text"), _req(rec, "final_text"))


def _parse_qc(rec):
    rid = _req(rec, "record_id")
    ref_text = _req(rec, "reference_text")
    hyp_text = _req(rec, "hypothesis_text")
    ref = tokenize(ref_text)
    hyp = tokenize(hyp_text)
    terms = []
    for k, t in enumerate(_opt(rec, "terms", [], list)):
        if not isinstance(t, dict):
            raise _RecordError(f"terms[{k}] is not an object")
        start = _req(t, "start_index", int)
        length = _opt(t, "length", 1, int)
        try:
            ann = annotate(ref, _req(t, "term_id"), start, length, _opt(t, "clearly_audible", True, bool))
        except ValidationError as e:
            raise _RecordError(str(e)) from None
        if "text" in t and [x.normalized for x in tokenize(t["text"])] != [x.normalized for x in ann.tokens]:
            raise _RecordError(f"term {ann.term_id!r}: text {t['text']!r} does not match reference span")
        terms.append(ann)
    try:
        return QcRecord(rid, ref, hyp, tuple(terms), ref_text, hyp_text)
    except ValidationError as e:
        raise _RecordError(str(e)) from None


def _parse_meta(rec):
    return Meta(
        set_id=_opt(rec, "set_id", "test-set", str),
        run_label=_opt(rec, "run_label", "", str),
        date=_opt(rec, "date", "", str),
        source=_opt(rec, "source", "", str),
        date_range=_opt(rec, "date_range", "", str),
        sources=dict(_opt(rec, "sources", {}, dict)),
    )


_PARSERS = {
    "entity_audit": _parse_entity,
    "snippet": _parse_snippet,
    "edit_pair": _parse_edit,
    "qc_record": _parse_qc,
    "meta": _parse_meta,
}


def read_records(path, issues: list) -> list[tuple[str, object, int]]:
    """Parse one JSONL file into ``(kind, parsed, line)`` triples.

    Problems are appended to ``issues`` rather than raised.
    """
    out = []
    name = str(path)
    try:
        fh = open(path, encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read {name}: {e.strerror or e}") from e
    with fh:
        try:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as e:
                    issues.append(Issue(name, lineno, f"invalid JSON: {e.msg}"))
                    continue
                if not isinstance(rec, dict):
                    issues.append(Issue(name, lineno, "record is not a JSON object"))
                    continue
                kind = rec.get("kind")
                if kind not in _PARSERS:
                    issues.append(Issue(name, lineno, f"unknown record kind {kind!r}"))
                    continue
                version = rec.get("schema_version", SCHEMA_VERSION)
                if version != SCHEMA_VERSION:
                    issues.append(Issue(name, lineno, f"unsupported schema_version {version!r}"))
                    continue
                try:
                    out.append((kind, _PARSERS[kind](rec), lineno))
                except _RecordError as e:
                    issues.append(Issue(name, lineno, str(e)))
        except UnicodeDecodeError as e:
            issues.append(Issue(name, 0, f"not valid UTF-8: {e.reason}"))
    return out


def load_bundle(paths: BundlePaths) -> DatasetBundle:
    """Parse every file in ``paths`` and validate the result.

    All parse problems across all files are gathered into a single
    :class:`ParseError`; structural problems in the entity test set raise a
    :class:`ValidationError` subclass.
    """
    issues: list[Issue] = []
    records = []
    for _, path in paths.present():
        records.extend(read_records(path, issues))
    if issues:
        raise ParseError(issues)

    meta = Meta()
    encounters: dict[str, list] = {}
    snippets: dict[str, list] = {}
    edits = []
    qc = []
    for kind, obj, _ in records:
        if kind == "entity_audit":
            enc, ae = obj
            encounters.setdefault(enc, []).append(ae)
            snippets.setdefault(enc, [])
        elif kind == "snippet":
            enc, sn = obj
            encounters.setdefault(enc, [])
            snippets.setdefault(enc, []).append(sn)
        elif kind == "edit_pair":
            edits.append(obj)
        elif kind == "qc_record":
            qc.append(obj)
        else:
            meta = obj

    test_set = None
    if encounters:
        raw = TestSet(
            set_id=meta.set_id,
            encounters=tuple(Encounter(e, tuple(encounters[e]), tuple(snippets[e])) for e in encounters),
            source=meta.source,
            date_range=meta.date_range,
        )
        test_set = validate_test_set(raw)
    return DatasetBundle(
        test_set=test_set,
        edit_pairs=tuple(edits) if edits else None,
        qc_records=tuple(qc) if qc else None,
        meta=meta,
    )


def _surface_text(toks) -> str:
    return " ".join(t.surface for t in toks)


def emit_records(bundle: DatasetBundle) -> dict[str, list[dict]]:
    """Records per section file, in the same formats :func:`load_bundle` reads."""
    m = bundle.meta
    out = {
        "meta": [{
            "kind": "meta",
            "schema_version": SCHEMA_VERSION,
            "set_id": m.set_id,
            "run_label": m.run_label,
            "date": m.date,
            "source": m.source,
            "date_range": m.date_range,
            "sources": dict(m.sources),
        }],
        "entities": [],
        "snippets": [],
        "edits": [],
        "qc": [],
    }
    if bundle.test_set is not None:
        for enc in bundle.test_set.encounters:
            for ae in enc.entities:
                e = ae.entity
                rec = {
                    "kind": "entity_audit",
                    "encounter_id": enc.encounter_id,
                    "entity_id": e.entity_id,
                    "text": e.text,
                    "medically_relevant": e.medically_relevant,
                    "defects": [
                        {"kind": d.kind.serialize(), "severity": d.severity.level, "note": d.note}
                        for d in ae.defects
                    ],
                }
                if e.rubric_id != enc.encounter_id:
                    rec["rubric_id"] = e.rubric_id
                out["entities"].append(rec)
            for sn in enc.snippets:
                rec = {
                    "kind": "snippet",
                    "note_id": sn.note_id,
                    "snippet_id": sn.snippet_id,
                    "text": sn.text,
                    "linked_entity": sn.linked_entity,
                }
                if sn.note_id != enc.encounter_id:
                    rec["encounter_id"] = enc.encounter_id
                out["snippets"].append(rec)
    for p in bundle.edit_pairs or ():
        out["edits"].append({
            "kind": "edit_pair",
            "note_id": p.note_id,
            "initial_text": p.initial_text,
            "final_text": p.final_text,
        })
    for r in bundle.qc_records or ():
        out["qc"].append({
            "kind": "qc_record",
            "record_id": r.record_id,
            "reference_text": r.reference_text,
            "hypothesis_text": r.hypothesis_text,
            "terms": [
                {
                    "term_id": t.term_id,
                    "start_index": t.start_index,
                    "length": len(t.tokens),
                    "clearly_audible": t.clearly_audible,
                    "text": _surface_text(t.tokens),
                }
                for t in r.terms
            ],
        })
    return out


def dumps_records(records: list[dict]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)


def write_bundle(bundle: DatasetBundle, directory) -> BundlePaths:
    """Write non-empty sections to ``directory`` using the conventional names."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = {}
    for section, recs in emit_records(bundle).items():
        if not recs:
            continue
        path = d / SECTION_FILES[section]
        path.write_text(dumps_records(recs), encoding="utf-8")
        written[section] = path
    return BundlePaths(**written)


def default_output_dir() -> Optional[Path]:
    val = os.environ.get("NOTESCORE_OUTPUT_DIR")
    return Path(val) if val else None

