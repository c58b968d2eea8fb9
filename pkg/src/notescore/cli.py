"""Command-line entry point.

Exit codes: 0 success, 1 parse/validation/metric failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import html
import json
import sys
from pathlib import Path

from . import scorecard as sc
from .edit_metrics import compute_mnr
from .entity_metrics import compute_funnel, compute_stat_rates
from .errors import NoteScoreError
from .ingest import BundlePaths, load_bundle
from .pipeline import (
    RunConfig,
    compute_scorecard,
    edit_details,
    mwhr_details,
    resolve_out,
    run_pipeline,
    write_output,
)
from .synth import write_corpus
from .transcription import compute_mwhr


def _bundle_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("inputs")
    g.add_argument("--bundle-dir", type=Path, help="directory holding meta/entities/snippets/edits/qc .jsonl files")
    g.add_argument("--entities", type=Path, help="entity_audit records")
    g.add_argument("--snippets", type=Path, help="snippet records")
    g.add_argument("--edits", type=Path, help="edit_pair records")
    g.add_argument("--qc", type=Path, help="qc_record records")


def _output_args(p: argparse.ArgumentParser):
    p.add_argument("--out", type=Path, help="output file or directory (default: $NOTESCORE_OUTPUT_DIR, else stdout)")
    p.add_argument("--format", choices=sc.FORMATS, default="table")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker threads for alignment and counting")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="notescore", description="Clinical note quality metrics and DeepScore")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in [
        ("statrates", "major / critical defect-free rates from entity audits"),
        ("funnel", "captured and accurate entity rates from entity audits"),
        ("edits", "words added/deleted/substituted and MNR from edit pairs"),
        ("mwhr", "medical word hit rate from transcription QC records"),
    ]:
        p = sub.add_parser(name, help=help_)
        _bundle_args(p)
        _output_args(p)

    p = sub.add_parser("score", help="compute every available metric and the DeepScore scorecard")
    _bundle_args(p)
    _output_args(p)
    p.add_argument("--values", help="skip the bundle; six comma-separated percentages MDFR,CDFR,CER,AER,MNR,MWHR")

    p = sub.add_parser("report", help="render a scorecard JSON (or a bundle) as table/json/html")
    _bundle_args(p)
    _output_args(p)
    p.add_argument("--scorecard", type=Path, help="scorecard JSON written by `score --format json`")
    p.add_argument("--reported", type=Path, help="JSON object of reported percentages to check against")

    p = sub.add_parser("synth", help="write a synthetic bundle with a ground_truth.json sidecar")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-entities", type=int, default=1000)
    p.add_argument("--n-encounters", type=int, default=10)
    p.add_argument("--major", type=int, default=15, help="exact count of Other-kind severity-4 defects")
    p.add_argument("--critical", type=int, default=0, help="exact count of Other-kind severity-5 defects")
    p.add_argument("--missing", type=int, default=40, help="exact count of Missing Information major/critical defects")
    p.add_argument("--inaccurate", type=int, default=20, help="exact count of Inaccurate major/critical defects")
    p.add_argument("--n-notes", type=int, default=100)
    p.add_argument("--note-length", type=int, default=50)
    p.add_argument("--max-substitutions", type=int, default=8)
    p.add_argument("--qc-records", type=int, default=10)
    p.add_argument("--terms-per-record", type=int, default=9)
    p.add_argument("--corrupted-terms", type=int, default=2)
    return parser


def _paths(args, parser) -> BundlePaths:
    overrides = dict(entities=args.entities, snippets=args.snippets, edits=args.edits, qc=args.qc)
    if args.bundle_dir is not None:
        if not args.bundle_dir.is_dir():
            parser.error(f"--bundle-dir {args.bundle_dir} is not a directory")
        paths = BundlePaths.from_dir(args.bundle_dir, **overrides)
    else:
        paths = BundlePaths(**{k: v for k, v in overrides.items()})
    if not paths.present():
        parser.error("no inputs: give --bundle-dir or at least one of --entities/--edits/--qc")
    return paths


def _pct(x) -> dict:
    return {"value": float(x), "display": sc.display_percent(x)}


def _emit(doc: dict, fmt: str, out, title: str, stem: str):
    if fmt == "json":
        text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    else:
        rows = []
        for k, v in doc.items():
            if isinstance(v, dict) and "display" in v:
                v = v["display"]
            elif isinstance(v, (dict, list)):
                v = json.dumps(v, ensure_ascii=False)
            rows.append((k, str(v)))
        if fmt == "html":
            body = "".join(f"<tr><td>{html.escape(k)}</td><td>{html.escape(v)}</td></tr>" for k, v in rows)
            text = f"<table><caption>{html.escape(title)}</caption>{body}</table>\n"
        else:
            w = max(len(k) for k, _ in rows)
            text = f"{title}\n" + "".join(f"  {k.ljust(w)}  {v}\n" for k, v in rows)
    write_output(text, resolve_out(out, fmt, stem) if out is not None else None)


def _need(section, what):
    if section is None:
        raise NoteScoreError(f"bundle has no {what}")
    return section


def cmd_statrates(args, parser):
    b = load_bundle(_paths(args, parser))
    r = compute_stat_rates(_need(b.test_set, "entity audits").audited_entities())
    _emit({"mdfr": _pct(r.mdfr), "cdfr": _pct(r.cdfr), "n_entities": r.n_entities,
           "n_major": r.n_major, "n_critical": r.n_critical}, args.format, args.out, "Stat Rates", "statrates")


def cmd_funnel(args, parser):
    b = load_bundle(_paths(args, parser))
    r = compute_funnel(_need(b.test_set, "entity audits").audited_entities())
    _emit({"mer": _pct(r.mer), "cer": _pct(r.cer), "ier": _pct(r.ier), "aer": _pct(r.aer),
           "n_relevant": r.n_relevant, "n_captured": r.n_captured,
           "n_missing": r.n_missing, "n_inaccurate": r.n_inaccurate},
          args.format, args.out, "Recall/Precision Funnel", "funnel")


def cmd_edits(args, parser):
    b = load_bundle(_paths(args, parser))
    r = compute_mnr(_need(b.edit_pairs, "edit pairs"), args.jobs)
    _emit({"mnr": _pct(r.mnr), **edit_details(r)}, args.format, args.out, "User Acceptance", "edits")


def cmd_mwhr(args, parser):
    b = load_bundle(_paths(args, parser))
    r = compute_mwhr(_need(b.qc_records, "QC records"), args.jobs)
    _emit({"mwhr": _pct(r.mwhr), **mwhr_details(r)}, args.format, args.out, "Transcription QC", "mwhr")


def cmd_score(args, parser):
    if args.values:
        try:
            vals = [float(v) for v in args.values.split(",")]
        except ValueError:
            parser.error("--values needs six numbers")
        if len(vals) != 6:
            parser.error("--values needs exactly six numbers")
        card = sc.Scorecard.build(sc.ComponentMetrics.from_percentages(*vals, source="command line"))
        write_output(sc.render_scorecard(card, args.format), resolve_out(args.out, args.format))
        return 0
    return run_pipeline(RunConfig(_paths(args, parser), args.out, args.format, jobs=args.jobs))


def cmd_report(args, parser):
    if args.scorecard is not None:
        try:
            card = sc.parse_scorecard(args.scorecard.read_text(encoding="utf-8"))
        except (OSError, ValueError, KeyError) as e:
            raise NoteScoreError(f"cannot read scorecard {args.scorecard}: {e}") from e
    else:
        card = compute_scorecard(load_bundle(_paths(args, parser)), args.jobs)
    if args.reported is not None:
        reported = json.loads(args.reported.read_text(encoding="utf-8"))
        flagged = sc.compare_reported(card, reported)
        card = sc.Scorecard(card.components, card.deep_score, card.run_label, card.date,
                            card.deep_score_source, card.warnings + tuple(f"discrepancy: {f}" for f in flagged),
                            card.details)
    write_output(sc.render_scorecard(card, args.format), resolve_out(args.out, args.format))
    return 0


def cmd_synth(args, parser):
    res = write_corpus(
        args.out,
        seed=args.seed,
        n_entities=args.n_entities,
        exact_counts={"major": args.major, "critical": args.critical,
                      "missing_major": args.missing, "inaccurate_major": args.inaccurate},
        n_encounters=args.n_encounters,
        n_notes=args.n_notes,
        note_length=args.note_length,
        substitutions=(0, args.max_substitutions),
        qc_records=args.qc_records,
        terms_per_record=args.terms_per_record,
        corrupted_terms=args.corrupted_terms,
    )
    for _, path in res["paths"].present():
        print(path)
    print(res["ground_truth"])
    return 0


COMMANDS = {
    "statrates": cmd_statrates,
    "funnel": cmd_funnel,
    "edits": cmd_edits,
    "mwhr": cmd_mwhr,
    "score": cmd_score,
    "report": cmd_report,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        return COMMANDS[args.command](args, parser) or 0
    except NoteScoreError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
