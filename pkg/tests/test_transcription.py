from fractions import Fraction

import pytest

from notescore.align import Token, tokenize
from notescore.errors import NoAudibleTerms, ValidationError
from notescore.synth import QcProfile, generate_qc_records, oracle_edit_distance
from notescore.transcription import MedicalTermAnnotation, QcRecord, annotate, compute_mwhr


def record(ref_text, hyp_text, spans, rid="r"):
    ref = tokenize(ref_text)
    terms = [annotate(ref, f"t{k}", s, n, aud) for k, (s, n, aud) in enumerate(spans)]
    return QcRecord(rid, ref, tokenize(hyp_text), terms)


def test_identical_transcript():
    r = record("stop the clonidine and start envarsus", "stop the clonidine and start envarsus",
               [(2, 1, True), (5, 1, True)])
    res = compute_mwhr([r])
    assert res.mwhr == 1
    assert res.misses == ()


def test_multi_token_term_with_one_bad_token_is_a_miss():
    ref = "we will keep the beta blocker for your blood pressure"
    hyp = "we will keep the beta blockers for your blood pressure"
    # oracle: one substitution, nine keeps, at the "blocker" position
    o = oracle_edit_distance(tokenize(ref), tokenize(hyp))
    assert o.cost == 1 and o.ops["substitute"] == 1 and o.ops["keep"] == 9
    res = compute_mwhr([record(ref, hyp, [(4, 2, True), (8, 2, True)])])
    assert (res.hits, res.audible_terms) == (1, 2)
    assert res.misses[0].term_id == "t0"
    assert res.misses[0].hypothesis == ("blockers",)
    assert res.misses[0].reference == ("beta", "blocker")


def test_deleted_term_reports_no_hypothesis_tokens():
    res = compute_mwhr([record("take the lisinopril daily", "take the daily", [(2, 1, True)])])
    assert res.hits == 0
    assert res.misses[0].hypothesis == ()


def test_case_and_punctuation_still_hit():
    res = compute_mwhr([record("stop the Clonidine.", "Stop the clonidine", [(2, 1, True)])])
    assert res.hits == 1


def test_inaudible_terms_are_ignored():
    res = compute_mwhr([record("stop the clonidine", "stop the client", [(2, 1, False), (0, 1, True)])])
    assert (res.hits, res.audible_terms) == (1, 1)


def test_no_audible_terms():
    with pytest.raises(NoAudibleTerms):
        compute_mwhr([record("a b", "a b", [(0, 1, False)])])
    with pytest.raises(NoAudibleTerms):
        compute_mwhr([])


def test_annotation_must_match_reference():
    ref = tokenize("a b c")
    with pytest.raises(ValidationError):
        annotate(ref, "t", 2, 2)
    with pytest.raises(ValidationError):
        QcRecord("r", ref, ref, [MedicalTermAnnotation("t", (Token("z"),), 0)])


def test_fixture_examples(bundle_dir):
    from notescore.ingest import BundlePaths, load_bundle
    b = load_bundle(BundlePaths.from_dir(bundle_dir))
    res = compute_mwhr(b.qc_records)
    assert (res.hits, res.audible_terms) == (3, 5)
    assert {(m.reference, m.hypothesis) for m in res.misses} == {
        (("Clonidine",), ("client",)), (("Envarsus",), ("invasive",))}


@pytest.mark.parametrize("seed", range(5))
def test_synthetic_recovery(seed):
    records, truth = generate_qc_records(QcProfile(6, 8, corrupted=5, inaudible=3, seed=seed))
    res = compute_mwhr(records, jobs=3)
    assert res.mwhr == truth.mwhr
    assert sorted(m.term_id for m in res.misses) == sorted(truth.corrupted_terms)


@pytest.mark.parametrize("seed", range(5))
def test_one_more_corruption_costs_one_hit(seed):
    records, _ = generate_qc_records(QcProfile(3, 6, corrupted=2, seed=seed))
    base = compute_mwhr(records)
    missed = {m.term_id for m in base.misses}
    rec = records[0]
    term = next(t for t in rec.terms if t.term_id not in missed)
    hyp = list(rec.hypothesis)
    hyp[term.start_index] = Token("garbled")
    records[0] = QcRecord(rec.record_id, rec.reference, hyp, rec.terms)
    assert compute_mwhr(records).hits == base.hits - 1


@pytest.mark.parametrize("seed", range(5))
def test_edits_between_anchors_leave_mwhr_alone(seed):
    records, _ = generate_qc_records(QcProfile(4, 6, corrupted=2, seed=seed))
    base = compute_mwhr(records).mwhr
    covered = {i for t in records[0].terms for i in range(t.start_index, t.end_index)}
    ref = records[0].reference
    # filler position whose neighbours are also untouched filler (kept anchors)
    spots = [p for p in range(1, len(ref) - 1) if not {p - 1, p, p + 1} & covered]
    if not spots:
        pytest.skip("no isolated filler in this draw")
    p = spots[0]
    rec = records[0]
    for hyp in (
        rec.hypothesis[:p] + (Token("noise"),) + rec.hypothesis[p + 1:],
        rec.hypothesis[:p] + rec.hypothesis[p + 1:],
    ):
        edited = [QcRecord(rec.record_id, rec.reference, hyp, rec.terms)] + records[1:]
        assert compute_mwhr(edited).mwhr == base


def test_pooling_equals_sum_of_records():
    records, _ = generate_qc_records(QcProfile(5, 7, corrupted=6, seed=42))
    pooled = compute_mwhr(records)
    per = [compute_mwhr([r]) for r in records]
    assert pooled.hits == sum(p.hits for p in per)
    assert pooled.audible_terms == sum(p.audible_terms for p in per)
    assert pooled.mwhr == Fraction(sum(p.hits for p in per), sum(p.audible_terms for p in per))
    assert 0 <= pooled.mwhr <= 1
