import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from notescore.align import align, tokens
from notescore.edit_metrics import Segment, compute_mnr, edit_breakdown
from notescore.entity_metrics import compute_funnel, compute_stat_rates
from notescore.errors import InfeasibleProfile, InputTooLarge
from notescore.synth import (
    EditInjectionProfile,
    InjectionProfile,
    QcProfile,
    generate_audited_set,
    generate_edit_pairs,
    generate_qc_records,
    oracle_edit_distance,
    random_token_pairs,
    write_corpus,
)
from notescore.transcription import compute_mwhr


def _recount(ts):
    """Count straight from the emitted records, sharing nothing with the
    production counters."""
    rel = [ae for ae in ts.audited_entities() if ae.entity.medically_relevant]
    major = sum(any(d.severity >= 4 for d in ae.defects) for ae in rel)
    return len(rel), major


def test_41_major_of_1000():
    ts, truth = generate_audited_set(InjectionProfile(1000, exact_counts={"major": 41}, seed=5,
                                                      n_encounters=7, n_irrelevant=9, noise_defects=120))
    assert truth.mdfr == Fraction(959, 1000)
    n, major = _recount(ts)
    assert (n, major) == (1000, 41)
    r = compute_stat_rates(ts.audited_entities())
    assert r.mdfr == Fraction(959, 1000) and r.cdfr == 1


def test_no_defects():
    ts, truth = generate_audited_set(InjectionProfile(50, seed=1, noise_defects=30))
    assert set(truth.rates().values()) == {1}
    f = compute_funnel(ts.audited_entities())
    assert f.cer == f.aer == 1


def test_50_critical_of_100():
    ts, truth = generate_audited_set(InjectionProfile(100, exact_counts={"critical": 50}))
    r = compute_stat_rates(ts.audited_entities())
    assert truth.cdfr == truth.mdfr == r.cdfr == r.mdfr == Fraction(1, 2)


@pytest.mark.parametrize("kw", [
    dict(n_entities=0),
    dict(n_entities=10, exact_counts={"major": 11}),
    dict(n_entities=10, exact_counts={"major": 6, "missing_major": 5}),
    dict(n_entities=10, exact_counts={"bogus": 1}),
    dict(n_entities=10, p_major_defect=1.5),
    dict(n_entities=3, n_encounters=4),
])
def test_infeasible_entity_profiles(kw):
    with pytest.raises(InfeasibleProfile):
        generate_audited_set(InjectionProfile(**kw))


def test_overlapping_placement_allowed():
    p = InjectionProfile(10, exact_counts={"major": 6, "missing_major": 5}, disjoint=False, seed=2)
    ts, truth = generate_audited_set(p)
    assert compute_stat_rates(ts.audited_entities()).mdfr == truth.mdfr


def test_probabilistic_mode_matches_its_own_truth():
    p = InjectionProfile(400, p_major_defect=0.05, p_critical_defect=0.02, p_missing_major=0.1,
                         p_inaccurate_major=0.08, seed=11, disjoint=False)
    ts, truth = generate_audited_set(p)
    ents = ts.audited_entities()
    r, f = compute_stat_rates(ents), compute_funnel(ents)
    assert (r.mdfr, r.cdfr, f.cer, f.aer) == (truth.mdfr, truth.cdfr, truth.cer, truth.aer)


profiles = st.builds(
    lambda n, m, c, mi, ia, seed, enc, disjoint: InjectionProfile(
        n, exact_counts={"major": m, "critical": c, "missing_major": mi, "inaccurate_major": ia},
        seed=seed, n_encounters=enc, n_irrelevant=seed % 4, noise_defects=seed % 7, disjoint=disjoint),
    st.just(60), st.integers(0, 15), st.integers(0, 15), st.integers(0, 15), st.integers(0, 15),
    st.integers(0, 10**6), st.integers(1, 6), st.booleans(),
)


@settings(max_examples=120)
@given(profiles)
def test_entity_estimators_recover_truth(p):
    ts, truth = generate_audited_set(p)
    ents = ts.audited_entities()
    r, f = compute_stat_rates(ents), compute_funnel(ents)
    assert r.mdfr == truth.mdfr and r.cdfr == truth.cdfr
    assert f.cer == truth.cer and f.aer == truth.aer


@pytest.mark.parametrize("s, rate, seg", [
    (3, Fraction(3, 25), Segment.TEN_PLUS),
    (1, Fraction(1, 25), Segment.UNDER_FIVE),
    (0, Fraction(0), Segment.ZERO),
])
def test_25_token_notes(s, rate, seg):
    (pair,), truth = generate_edit_pairs(EditInjectionProfile(1, 25, substitutions=s, seed=s))
    assert truth.notes[0].words_substituted_rate == rate
    assert truth.notes[0].segment == seg
    b = edit_breakdown(pair)
    assert b.words_substituted_rate == rate
    o = oracle_edit_distance(pair.initial[:12], pair.final[:12])
    assert o.cost == align(pair.initial[:12], pair.final[:12]).cost


def test_drafts_are_distinct():
    pairs, _ = generate_edit_pairs(EditInjectionProfile(30, 40, (0, 5), (0, 5), (0, 5), seed=9))
    for p in pairs:
        assert len({t.normalized for t in p.initial}) == len(p.initial)


@pytest.mark.parametrize("kw", [
    dict(n_notes=1, note_length=5, substitutions=6),
    dict(n_notes=1, note_length=10, deletions=3, insertions=3, substitutions=3),
    dict(n_notes=1, note_length=-1),
    dict(n_notes=1, note_length=5, substitutions=-1),
])
def test_infeasible_edit_profiles(kw):
    with pytest.raises(InfeasibleProfile):
        generate_edit_pairs(EditInjectionProfile(**kw))


@settings(max_examples=60)
@given(st.integers(0, 10**6), st.integers(1, 40), st.integers(10, 60))
def test_edit_estimators_recover_truth(seed, n_notes, length):
    hi = length // 4
    pairs, truth = generate_edit_pairs(EditInjectionProfile(n_notes, length, (0, hi), (0, hi), (0, hi), seed=seed))
    res = compute_mnr(pairs)
    assert res.mnr == truth.mnr
    assert res.segment_counts == truth.segment_counts()
    for b, t in zip(res.breakdowns, truth.notes):
        assert (b.substituted, b.added, b.deleted) == (t.substituted, t.added, t.deleted)


def test_qc_generator():
    records, truth = generate_qc_records(QcProfile(10, 9, corrupted=2, inaudible=3, seed=4))
    res = compute_mwhr(records)
    assert (res.hits, res.audible_terms) == (truth.hits, truth.audible_terms) == (85, 87)
    assert sorted(m.term_id for m in res.misses) == sorted(truth.corrupted_terms)
    with pytest.raises(InfeasibleProfile):
        generate_qc_records(QcProfile(1, 2, corrupted=2, inaudible=1))


def test_oracle_examples():
    assert oracle_edit_distance(tokens("a b c".split()), tokens("a b c".split())).cost == 0
    o = oracle_edit_distance(tokens("a b c".split()), tokens("a x c".split()))
    assert o.cost == 1 and o.ops == {"keep": 2, "substitute": 1, "delete": 0, "insert": 0}
    assert oracle_edit_distance("kitten", "sitting").cost == 3
    with pytest.raises(InputTooLarge):
        oracle_edit_distance(list(range(13)), [])


def test_stress_pairs_match_oracle_cost():
    pairs = random_token_pairs(300, max_len=8, vocab_size=3, seed=1)
    assert any(len(set(a)) < len(a) for a, _ in pairs)
    for a, b in pairs:
        assert align(a, b).cost == oracle_edit_distance(a, b).cost


def test_corpus_seed_determinism(tmp_path):
    kw = dict(n_entities=120, n_encounters=4, n_notes=15, note_length=30, qc_records=3)
    write_corpus(tmp_path / "a", seed=8, **kw)
    write_corpus(tmp_path / "b", seed=8, **kw)
    write_corpus(tmp_path / "c", seed=9, **kw)
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == ["edits.jsonl", "entities.jsonl", "ground_truth.json", "meta.jsonl", "qc.jsonl", "snippets.jsonl"]
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
    assert (tmp_path / "a" / "entities.jsonl").read_bytes() != (tmp_path / "c" / "entities.jsonl").read_bytes()
    truth = json.loads((tmp_path / "a" / "ground_truth.json").read_text())
    assert truth["mwhr"]["fraction"] == "25/27"
