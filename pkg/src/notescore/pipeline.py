"""Batch run: load a bundle, compute every metric whose inputs are present,
and write the scorecard."""

from __future__ import annotations

import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import scorecard as sc
from .edit_metrics import MnrResult, compute_mnr
from .entity_metrics import (
    EntityCounts,
    count_entities,
    funnel_from_counts,
    stat_rates_from_counts,
)
from .errors import NoteScoreError
from .ingest import BundlePaths, DatasetBundle, default_output_dir, load_bundle
from .transcription import MwhrResult, compute_mwhr

DEFAULT_SOURCES = {
    "mdfr": "entity audits",
    "cdfr": "entity audits",
    "cer": "entity audits",
    "aer": "entity audits",
    "mnr": "note edit pairs",
    "mwhr": "transcription QC records",
}


@dataclass
class RunConfig:
    paths: BundlePaths
    out: Optional[Path] = None
    format: str = "json"
    rounding: str = "half-up"
    jobs: int = 1

    def __post_init__(self):
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.rounding != "half-up":
            raise ValueError("only half-up rounding is supported")
        if self.format not in sc.FORMATS:
            raise ValueError(f"format must be one of {sc.FORMATS}")


def entity_counts(bundle: DatasetBundle, jobs: int = 1) -> EntityCounts:
    """Per-encounter tallies summed; order-independent, so any jobs value
    gives the same totals."""
    encounters = bundle.test_set.encounters
    if jobs > 1 and len(encounters) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda e: count_entities(e.entities), encounters))
    else:
        parts = [count_entities(e.entities) for e in encounters]
    total = EntityCounts()
    for p in parts:
        total = total + p
    return total


def _f(x) -> float:
    return float(x)


def _mean(xs) -> float:
    xs = list(xs)
    return math.fsum(xs) / len(xs) if xs else 0.0


def edit_details(res: MnrResult) -> dict:
    b = res.breakdowns
    return {
        "n_notes": res.n_notes,
        "segment_counts": {s.value: k for s, k in res.segment_counts.items()},
        "segment_shares": {s.value: _f(v) for s, v in res.segment_shares.items()},
        "mean_words_added_rate": _mean(_f(x.words_added_rate) for x in b),
        "mean_words_deleted_rate": _mean(_f(x.words_deleted_rate) for x in b),
        "mean_words_substituted_rate": _mean(_f(x.words_substituted_rate) for x in b),
        "words_added": sum(x.added for x in b),
        "words_deleted": sum(x.deleted for x in b),
        "words_substituted": sum(x.substituted for x in b),
    }


def mwhr_details(res: MwhrResult) -> dict:
    return {
        "hits": res.hits,
        "audible_terms": res.audible_terms,
        "misses": [
            {"record_id": m.record_id, "term_id": m.term_id,
             "reference": " ".join(m.reference), "hypothesis": " ".join(m.hypothesis)}
            for m in res.misses
        ],
    }


def compute_scorecard(bundle: DatasetBundle, jobs: int = 1) -> sc.Scorecard:
    """Every metric the bundle supports; DeepScore only when all six exist."""
    meta = bundle.meta
    sources = dict(DEFAULT_SOURCES)
    if meta.source:
        sources.update(dict.fromkeys(("mdfr", "cdfr", "cer", "aer"), meta.source))
    sources.update({k: v for k, v in meta.sources.items() if k in sources and v})
    comps = {}
    details = {}
    warnings = []

    if bundle.test_set is not None:
        counts = entity_counts(bundle, jobs)
        sr = stat_rates_from_counts(counts)
        fn = funnel_from_counts(counts)
        comps["mdfr"] = sc.Component("mdfr", sr.mdfr, sources["mdfr"], sr.n_entities)
        comps["cdfr"] = sc.Component("cdfr", sr.cdfr, sources["cdfr"], sr.n_entities)
        comps["cer"] = sc.Component("cer", fn.cer, sources["cer"], fn.n_relevant)
        comps["aer"] = sc.Component("aer", fn.aer, sources["aer"], fn.n_captured)
        details["entities"] = {
            "n_relevant": counts.n,
            "n_major": counts.major,
            "n_critical": counts.critical,
            "n_missing": counts.missing,
            "n_inaccurate": counts.inaccurate,
            "n_captured": fn.n_captured,
            "mer": _f(fn.mer),
            "ier": _f(fn.ier),
        }
    else:
        warnings.append("no entity audits: MDFR, CDFR, CER and AER not computed")

    if bundle.edit_pairs is not None:
        res = compute_mnr(bundle.edit_pairs, jobs)
        comps["mnr"] = sc.Component("mnr", res.mnr, sources["mnr"], res.n_notes)
        details["edits"] = edit_details(res)
    else:
        warnings.append("no edit pairs: MNR not computed")

    if bundle.qc_records is not None:
        res = compute_mwhr(bundle.qc_records, jobs)
        comps["mwhr"] = sc.Component("mwhr", res.mwhr, sources["mwhr"], res.audible_terms)
        details["mwhr"] = mwhr_details(res)
    else:
        warnings.append("no QC records: MWHR not computed")

    metrics = sc.ComponentMetrics(**comps)
    if not metrics.complete:
        warnings.append("DeepScore omitted: missing " + ", ".join(metrics.missing()))
    return sc.Scorecard.build(
        metrics,
        run_label=meta.run_label,
        date=meta.date,
        deep_score_source=meta.sources.get("deep_score") or meta.run_label or "computed",
        warnings=tuple(warnings),
        details=details,
    )


def resolve_out(out: Optional[Path], fmt: str, stem: str = "scorecard") -> Optional[Path]:
    """File to write, or None for stdout. Directories get ``<stem>.<ext>``."""
    target = out if out is not None else default_output_dir()
    if target is None:
        return None
    target = Path(target)
    if target.is_dir() or out is None:
        ext = {"json": "json", "table": "txt", "html": "html"}[fmt]
        target = target / f"{stem}.{ext}"
    return target


def write_output(text: str, target: Optional[Path], stdout=None):
    if target is None:
        (stdout or sys.stdout).write(text)
        return
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")


def run_pipeline(config: RunConfig, stdout=None, stderr=None) -> int:
    """Run end to end; returns the process exit status (0 ok, 1 failure)."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        bundle = load_bundle(config.paths)
        card = compute_scorecard(bundle, config.jobs)
    except NoteScoreError as e:
        print(f"error: {type(e).__name__}: {e}", file=stderr)
        return 1

    for w in card.warnings:
        print(f"warning: {w}", file=stderr)

    target = resolve_out(config.out, config.format)
    if target is not None:
        write_output(sc.render_scorecard(card, config.format), target)
        print(f"wrote {target}", file=stderr)
        stdout.write(sc.render_scorecard(card, "table"))
    else:
        stdout.write(sc.render_scorecard(card, config.format))
    return 0
