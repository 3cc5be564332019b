"""Weighted precision/recall/F1, consensus fusion, paired bootstrap."""

import numpy as np
import pytest

from recipealign.evaluation import (
    EmptyScores,
    LengthMismatch,
    PairScore,
    ReferenceAlignment,
    aggregate,
    consensus,
    load_references,
    paired_bootstrap,
    reference_from_record,
    reference_to_record,
    score_pair,
    weighted_prf,
    write_references,
)

from oracles import weighted_prf_direct


def reference(rows):
    """One annotator; rows is a list of single labels."""
    return ReferenceAlignment(
        source_id="s", target_id="t",
        annotations=(tuple((r,) for r in rows),),
    )


# ---------------------------------------------------------------------------
# weighted P/R/F1
# ---------------------------------------------------------------------------


def test_weighted_prf_worked_example():
    # reference [0, 1, 1], prediction [0, 1, 0]:
    #   label 0 (weight 1/3): P = 1/2, R = 1, F = 2/3
    #   label 1 (weight 2/3): P = 1,   R = 1/2, F = 2/3
    score = weighted_prf([0, 1, 0], [0, 1, 1])
    assert score.precision == pytest.approx(5 / 6)
    assert score.recall == pytest.approx(2 / 3)
    assert score.f1 == pytest.approx(2 / 3)
    assert score.support == {0: 1, 1: 2}


def test_weighted_prf_second_worked_example():
    # reference [2, 2, 3, 3], prediction [3, 3, 3, 2]:
    #   label 2 (weight 1/2): P = 0,   R = 0,   F = 0
    #   label 3 (weight 1/2): P = 1/3, R = 1/2, F = 2/5
    score = weighted_prf([3, 3, 3, 2], [2, 2, 3, 3])
    assert score.precision == pytest.approx(1 / 6)
    assert score.recall == pytest.approx(1 / 4)
    assert score.f1 == pytest.approx(1 / 5)


def test_weighted_recall_equals_accuracy():
    rng = np.random.default_rng(31)
    for _ in range(100):
        m = int(rng.integers(1, 12))
        n = int(rng.integers(1, 6))
        ref = [int(x) for x in rng.integers(0, n, size=m)]
        pred = [int(x) for x in rng.integers(0, n, size=m)]
        score = weighted_prf(pred, ref)
        accuracy = sum(p == r for p, r in zip(pred, ref)) / m
        assert score.recall == pytest.approx(accuracy)


def test_weighted_prf_matches_direct_computation():
    rng = np.random.default_rng(37)
    for _ in range(100):
        m = int(rng.integers(1, 12))
        n = int(rng.integers(1, 6))
        ref = [int(x) for x in rng.integers(0, n, size=m)]
        pred = [int(x) for x in rng.integers(0, n, size=m)]
        score = weighted_prf(pred, ref)
        weights = {l: ref.count(l) / m for l in set(ref)}
        expected = weighted_prf_direct(pred, [{r} for r in ref], weights)
        assert score.precision == pytest.approx(expected[0], abs=1e-12)
        assert score.recall == pytest.approx(expected[1], abs=1e-12)
        assert score.f1 == pytest.approx(expected[2], abs=1e-12)


def test_perfect_and_disjoint_predictions():
    perfect = weighted_prf([0, 1, 2], [0, 1, 2])
    assert (perfect.precision, perfect.recall, perfect.f1) == (1.0, 1.0, 1.0)
    wrong = weighted_prf([1, 2, 0], [0, 1, 2])
    assert (wrong.precision, wrong.recall, wrong.f1) == (0.0, 0.0, 0.0)


def test_weighted_prf_validations():
    with pytest.raises(LengthMismatch):
        weighted_prf([0, 1], [0])
    with pytest.raises(ValueError):
        weighted_prf([], [])


# ---------------------------------------------------------------------------
# consensus and scoring modes
# ---------------------------------------------------------------------------


def test_consensus_majority_vote():
    ref = ReferenceAlignment(
        source_id="s", target_id="t",
        annotations=(
            ((0,), (1,)),
            ((0,), (2,)),
            ((3,), (2,)),
        ),
    )
    assert consensus(ref) == [0, 2]


def test_consensus_tie_scans_annotators_in_order():
    ref = ReferenceAlignment(
        source_id="s", target_id="t",
        annotations=(
            ((2,),),
            ((1,),),
        ),
    )
    # 1 vote each; annotator 0 is scanned first, so its label wins
    assert consensus(ref) == [2]


def test_consensus_multilabel_counts_once_and_resolves_to_first():
    ref = ReferenceAlignment(
        source_id="s", target_id="t",
        annotations=(((4, 2, 4),),),
    )
    # duplicate listing gives no extra vote; first listed tied label wins
    assert consensus(ref) == [4]


def test_score_pair_modes():
    ref = ReferenceAlignment(
        source_id="s", target_id="t",
        annotations=(
            ((0,), (1,), (1,)),
            ((0,), (1,), (0,)),
        ),
    )
    by_consensus = score_pair([0, 1, 1], ref)
    # consensus is [0, 1, <first tied>] = [0, 1, 1]
    assert by_consensus.f1 == pytest.approx(1.0)

    averaged = score_pair([0, 1, 1], ref, mode="average")
    # annotator 0 scores 1.0; annotator 1: P=5/6, R=2/3, F=2/3
    assert averaged.precision == pytest.approx((1.0 + 5 / 6) / 2)
    assert averaged.recall == pytest.approx((1.0 + 2 / 3) / 2)
    assert averaged.f1 == pytest.approx((1.0 + 2 / 3) / 2)

    with pytest.raises(ValueError):
        score_pair([0, 1, 1], ref, mode="mean")


def test_reference_validations():
    with pytest.raises(ValueError):
        ReferenceAlignment(source_id="s", target_id="t", annotations=())
    with pytest.raises(LengthMismatch):
        ReferenceAlignment(
            source_id="s", target_id="t",
            annotations=(((0,), (1,)), ((0,),)),
        )
    with pytest.raises(ValueError):
        ReferenceAlignment(
            source_id="s", target_id="t",
            annotations=(((0,), ()),),
        )


# ---------------------------------------------------------------------------
# aggregation and bootstrap
# ---------------------------------------------------------------------------


def test_aggregate_is_unweighted_mean():
    scores = [
        PairScore(precision=1.0, recall=0.5, f1=0.6, support={}),
        PairScore(precision=0.0, recall=1.0, f1=0.2, support={}),
    ]
    total = aggregate(scores)
    assert total.precision == pytest.approx(0.5)
    assert total.recall == pytest.approx(0.75)
    assert total.f1 == pytest.approx(0.4)
    with pytest.raises(EmptyScores):
        aggregate([])


def test_paired_bootstrap_clear_winner():
    a = [0.9, 0.8, 0.85, 0.95, 0.9]
    b = [0.1, 0.2, 0.15, 0.05, 0.1]
    assert paired_bootstrap(a, b, resamples=2000, seed=1) == 0.0
    # swapping the systems flips the verdict
    assert paired_bootstrap(b, a, resamples=2000, seed=1) == 1.0


def test_paired_bootstrap_identical_systems():
    scores = [0.5, 0.6, 0.7]
    assert paired_bootstrap(scores, scores, resamples=1000) == 1.0


def test_paired_bootstrap_near_even_match():
    rng = np.random.default_rng(7)
    base = rng.random(40)
    noisy = base + rng.normal(scale=1e-3, size=40)
    p = paired_bootstrap(list(base), list(noisy), resamples=2000, seed=3)
    assert 0.05 < p < 0.95


def test_paired_bootstrap_is_seed_deterministic():
    rng = np.random.default_rng(11)
    a = list(rng.random(20))
    b = list(rng.random(20))
    first = paired_bootstrap(a, b, resamples=1500, seed=42)
    assert paired_bootstrap(a, b, resamples=1500, seed=42) == first


def test_paired_bootstrap_validations():
    with pytest.raises(LengthMismatch):
        paired_bootstrap([0.1], [0.2, 0.3])
    with pytest.raises(EmptyScores):
        paired_bootstrap([], [])
    with pytest.raises(ValueError):
        paired_bootstrap([0.1, 0.2], [0.3, 0.4], resamples=500)


# ---------------------------------------------------------------------------
# reference files
# ---------------------------------------------------------------------------


def test_reference_record_roundtrip(tmp_path):
    refs = [
        ReferenceAlignment(
            source_id="a", target_id="b",
            annotations=(((0,), (1, 2)), ((0,), (2,))),
        ),
        reference([0, 0, 1]),
    ]
    for ref in refs:
        assert reference_from_record(reference_to_record(ref)) == ref
    path = tmp_path / "refs.jsonl"
    write_references(path, refs)
    assert load_references(path) == refs
