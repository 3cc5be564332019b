"""Paraphrase/breakdown mining and the precision-coverage curve."""

import numpy as np
import pytest

from recipealign.corpus import Instruction, Modality, Recipe
from recipealign.evaluation import ReferenceAlignment
from recipealign.extraction import (
    extract_paraphrases,
    extract_step_breakdowns,
    tradeoff_curve,
)
from recipealign.hmm_ibm1 import PairwiseAlignment


def recipe(recipe_id, texts, modality=Modality.TEXT, url=None):
    instructions = []
    for i, text in enumerate(texts):
        if modality is Modality.VIDEO:
            instructions.append(Instruction(i, text, start_sec=10.0 * i, end_sec=10.0 * i + 5))
        else:
            instructions.append(Instruction(i, text))
    return Recipe(
        recipe_id=recipe_id, dish_id="dish", modality=modality, title=recipe_id,
        ingredients=(), instructions=tuple(instructions), source_url=url,
    )


def align(source_id, target_id, labels, posteriors, kind="text_text"):
    return PairwiseAlignment(
        source_id=source_id, target_id=target_id,
        labels=tuple(labels), posteriors=tuple(posteriors),
        dish_id="dish", kind=kind,
    )


RECIPES = {
    "A": recipe("A", ["boil water", "add pasta", "serve hot"]),
    "B": recipe("B", ["heat water", "cook the pasta"]),
    "V": recipe("V", ["boil it", "plate it"], modality=Modality.VIDEO,
                url="https://example.com/v"),
}


# ---------------------------------------------------------------------------
# paraphrases
# ---------------------------------------------------------------------------


def test_paraphrases_keep_only_confident_pairs():
    a = align("A", "B", [0, 1, 1], [0.9, 0.5, 0.7])
    records = extract_paraphrases([a], RECIPES, threshold=0.5)
    # 0.5 is not strictly above the threshold, so the middle pair is dropped
    assert [(r["a"]["index"], r["b"]["index"]) for r in records] == [(0, 0), (2, 1)]
    assert records[0]["a"]["text"] == "boil water"
    assert records[0]["b"]["text"] == "heat water"
    assert records[0]["probability"] == 0.9


def test_paraphrase_video_endpoints_use_timestamps():
    a = align("A", "V", [0], [0.95], kind="text_video")
    records = extract_paraphrases([a], RECIPES)
    assert records[0]["b"] == {
        "recipe_id": "V", "index": 0,
        "url": "https://example.com/v", "start_sec": 0.0, "end_sec": 5.0,
    }
    assert records[0]["kind"] == "text_video"


def test_paraphrases_survive_missing_recipe_lookup():
    a = align("A", "X", [0], [0.9])
    records = extract_paraphrases([a], RECIPES)
    assert records[0]["b"] == {"recipe_id": "X", "index": 0}


def test_paraphrase_order_is_stable():
    a1 = align("A", "B", [0, 1, 1], [0.9, 0.8, 0.7])
    a2 = align("B", "A", [0, 1], [0.6, 0.95])
    records = extract_paraphrases([a1, a2], RECIPES)
    keys = [(r["a"]["recipe_id"], r["a"]["index"]) for r in records]
    assert keys == [("A", 0), ("A", 1), ("A", 2), ("B", 0), ("B", 1)]


# ---------------------------------------------------------------------------
# step breakdowns
# ---------------------------------------------------------------------------


def test_breakdown_requires_two_confident_sources():
    a = align("A", "B", [0, 0, 1], [0.95, 0.92, 0.99])
    records = extract_step_breakdowns([a], RECIPES, threshold=0.9)
    assert len(records) == 1
    record = records[0]
    assert record["single"]["recipe_id"] == "B"
    assert record["single"]["index"] == 0
    assert [e["index"] for e in record["multi"]] == [0, 1]
    assert record["probabilities"] == [0.95, 0.92]


def test_breakdown_one_weak_member_disqualifies_the_group():
    a = align("A", "B", [0, 0, 1], [0.95, 0.9, 0.99])
    # the 0.9 member does not clear a 0.9 threshold, so the group is dropped
    assert extract_step_breakdowns([a], RECIPES, threshold=0.9) == []
    assert len(extract_step_breakdowns([a], RECIPES, threshold=0.85)) == 1


def test_breakdown_skips_non_text_pairs():
    a = align("A", "V", [0, 0, 1], [0.95, 0.93, 0.99], kind="text_video")
    assert extract_step_breakdowns([a], RECIPES) == []
    # untagged alignments participate
    untagged = align("A", "B", [0, 0, 1], [0.95, 0.93, 0.99], kind=None)
    assert len(extract_step_breakdowns([untagged], RECIPES)) == 1


def test_breakdown_groups_are_reported_per_target_in_order():
    a = align("A", "B", [1, 1, 0], [0.95, 0.93, 0.99])
    b = align("B", "A", [2, 2], [0.94, 0.97])
    records = extract_step_breakdowns([a, b], RECIPES)
    singles = [(r["single"]["recipe_id"], r["single"]["index"]) for r in records]
    assert singles == [("B", 1), ("A", 2)]


# ---------------------------------------------------------------------------
# tradeoff curve
# ---------------------------------------------------------------------------


def curve_fixture():
    a = align("A", "B", [0, 1, 1], [0.95, 0.65, 0.35])
    ref = ReferenceAlignment(
        source_id="A", target_id="B",
        annotations=(((0,), (1,), (0,)),),
    )
    return [a], {("A", "B"): ref}


def test_curve_points_are_sorted_and_complete():
    alignments, references = curve_fixture()
    curve = tradeoff_curve(alignments, references, thresholds=[0.9, 0.3, 0.6])
    assert [p["threshold"] for p in curve] == [0.3, 0.6, 0.9]
    assert [p["retained_fraction"] for p in curve] == [
        pytest.approx(3 / 3), pytest.approx(2 / 3), pytest.approx(1 / 3),
    ]
    # at 0.3 the wrong third prediction hurts; at 0.9 only the correct one stays
    assert curve[0]["f1"] < 1.0
    assert curve[2]["precision"] == 1.0
    assert curve[2]["recall"] == 1.0


def test_curve_retained_fraction_never_increases():
    rng = np.random.default_rng(41)
    for _ in range(20):
        m = int(rng.integers(2, 8))
        n = 4
        labels = [int(x) for x in rng.integers(0, n, size=m)]
        posteriors = [float(x) for x in rng.random(m)]
        a = align("A", "B", labels, posteriors)
        ref = ReferenceAlignment(
            source_id="A", target_id="B",
            annotations=(tuple((int(x),) for x in rng.integers(0, n, size=m)),),
        )
        curve = tradeoff_curve([a], {("A", "B"): ref}, np.linspace(0.1, 0.9, 9))
        fractions = [p["retained_fraction"] for p in curve]
        assert all(x >= y for x, y in zip(fractions, fractions[1:]))


def test_curve_with_nothing_retained_reports_nulls():
    alignments, references = curve_fixture()
    (point,) = tradeoff_curve(alignments, references, thresholds=[0.99])
    assert point["retained_fraction"] == 0.0
    assert point["precision"] is None
    assert point["recall"] is None
    assert point["f1"] is None


def test_curve_ignores_pairs_without_references():
    a = align("A", "B", [0], [0.9])
    stray = align("A", "X", [0], [0.9])
    ref = ReferenceAlignment(source_id="A", target_id="B", annotations=(((0,),),))
    curve = tradeoff_curve([a, stray], {("A", "B"): ref}, thresholds=[0.5])
    assert curve[0]["retained_fraction"] == 1.0
    assert curve[0]["f1"] == 1.0
