"""Pair generation: ingredient overlap gates, length caps, ordering."""

import numpy as np
import pytest

from recipealign.corpus import ChatLabel, Instruction, Modality, Recipe
from recipealign.pairing import (
    MixedDish,
    PairKind,
    PruneConfig,
    build_dish_ingredient_set,
    estimate_video_ingredients,
    generate_pairs,
    ingredient_match_ratio,
    ingredient_tokens,
    pair_from_record,
    pair_to_record,
)


def recipe(
    recipe_id,
    ingredients=("flour", "sugar"),
    n_steps=3,
    modality=Modality.TEXT,
    dish_id="dish",
    texts=None,
    chat_flags=None,
):
    instructions = []
    for i in range(n_steps):
        text = texts[i] if texts else f"step {i} mix the {ingredients[0] if ingredients else 'bowl'}"
        label = None
        if chat_flags and chat_flags[i]:
            label = ChatLabel.CHAT
        if modality is Modality.VIDEO:
            ins = Instruction(i, text, start_sec=float(i), end_sec=i + 0.5, chat_label=label)
        else:
            ins = Instruction(i, text, chat_label=label)
        instructions.append(ins)
    return Recipe(
        recipe_id=recipe_id,
        dish_id=dish_id,
        modality=modality,
        title=f"{dish_id} variant",
        ingredients=tuple(ingredients),
        instructions=tuple(instructions),
    )


# ---------------------------------------------------------------------------
# ingredient sets and ratios
# ---------------------------------------------------------------------------


def test_match_ratio_hand_values():
    a = frozenset({"a", "b", "c"})
    b = frozenset({"b", "c", "d"})
    assert ingredient_match_ratio(a, b) == pytest.approx(2 / 3)
    assert ingredient_match_ratio(a, frozenset()) == 0.0
    assert ingredient_match_ratio(frozenset(), frozenset()) == 1.0


def test_match_ratio_uses_larger_set():
    a = frozenset({"a", "b"})
    b = frozenset({"a", "b", "c", "d"})
    assert ingredient_match_ratio(a, b) == pytest.approx(0.5)
    assert ingredient_match_ratio(b, a) == pytest.approx(0.5)


def test_ingredient_tokens_split_multiword_items():
    r = recipe("r1", ingredients=("unsalted butter", "2 cups flour", "butter"))
    tokens = ingredient_tokens(r)
    assert tokens == frozenset({"unsalted", "butter", "2", "cups", "flour"})


def test_ingredient_tokens_respect_stop_words():
    r = recipe("r1", ingredients=("a pinch of salt",))
    assert "of" not in ingredient_tokens(r)
    assert ingredient_tokens(r, stop_words=frozenset()) >= {"of", "pinch", "salt"}


def test_dish_ingredient_set_ignores_videos():
    t = recipe("t1", ingredients=("salt", "pepper"))
    v = recipe("v1", ingredients=(), modality=Modality.VIDEO)
    assert build_dish_ingredient_set([t, v]) == frozenset({"salt", "pepper"})


def test_video_ingredients_from_mentions_only():
    t = recipe("t1", ingredients=("pasta", "salt", "butter"))
    dish_set = build_dish_ingredient_set([t])
    v = recipe(
        "v1",
        ingredients=(),
        modality=Modality.VIDEO,
        texts=["boil the pasta well", "add some salt now", "plate it up"],
    )
    assert estimate_video_ingredients(v, dish_set) == frozenset({"pasta", "salt"})


def test_video_ingredients_skip_chat_sentences():
    t = recipe("t1", ingredients=("pasta", "salt"))
    dish_set = build_dish_ingredient_set([t])
    v = recipe(
        "v1",
        ingredients=(),
        modality=Modality.VIDEO,
        texts=["subscribe for more pasta", "add the salt", "serve"],
        chat_flags=[True, False, False],
    )
    # "pasta" only appears in the chat line, so it is not counted as mentioned
    assert estimate_video_ingredients(v, dish_set) == frozenset({"salt"})


# ---------------------------------------------------------------------------
# pruning
# ---------------------------------------------------------------------------


def ingredients_with_overlap(total, shared):
    base = [f"item{k}" for k in range(total)]
    other = [f"item{k}" for k in range(shared)] + [
        f"extra{k}" for k in range(total - shared)
    ]
    return tuple(base), tuple(other)


def test_text_text_threshold_is_inclusive():
    a_ing, b_ing = ingredients_with_overlap(10, 7)  # ratio exactly 0.70
    a = recipe("a", ingredients=a_ing)
    b = recipe("b", ingredients=b_ing)
    pairs = generate_pairs([a, b])
    assert len(pairs) == 1
    assert pairs[0].ingredient_match == pytest.approx(0.70)

    a_ing, b_ing = ingredients_with_overlap(100, 69)  # just below
    a = recipe("a", ingredients=a_ing)
    b = recipe("b", ingredients=b_ing)
    assert generate_pairs([a, b]) == []


def test_video_video_needs_higher_overlap():
    # dish vocabulary comes from the one text recipe; each video mentions a
    # subset, so the video-video ratio is controlled by the transcripts
    words = [f"item{k}" for k in range(10)]
    t = recipe("t", ingredients=tuple(words))
    v1 = recipe(
        "v1", ingredients=(), modality=Modality.VIDEO, n_steps=1,
        texts=[" ".join(words)],
    )
    v2 = recipe(
        "v2", ingredients=(), modality=Modality.VIDEO, n_steps=1,
        texts=[" ".join(words[:8])],  # 8/10 = 0.8 < 0.9
    )
    pairs = generate_pairs([t, v1, v2])
    kinds = sorted(p.kind for p in pairs)
    assert PairKind.VIDEO_VIDEO not in kinds
    # both text-video pairs survive the lower 0.70 bar
    assert kinds == [PairKind.TEXT_VIDEO, PairKind.TEXT_VIDEO]


def test_length_ratio_prunes_text_text_only():
    a = recipe("a", n_steps=2)
    b = recipe("b", n_steps=5)
    assert generate_pairs([a, b]) == []
    # exactly 2x is allowed
    c = recipe("c", n_steps=4)
    assert len(generate_pairs([a, c])) == 1
    # text-video is exempt from the relative-length rule
    v = recipe(
        "v", ingredients=(), modality=Modality.VIDEO, n_steps=20,
        texts=[f"use flour and sugar batch {i}" for i in range(20)],
    )
    pairs = generate_pairs([a, v])
    assert [p.kind for p in pairs] == [PairKind.TEXT_VIDEO]


def test_long_videos_are_dropped_entirely():
    t = recipe("t", ingredients=("flour",))
    long_video = recipe(
        "v1", ingredients=(), modality=Modality.VIDEO, n_steps=101,
        texts=[f"flour sentence {i}" for i in range(101)],
    )
    assert generate_pairs([t, long_video]) == []
    # chat sentences do not count against the cap
    flags = [True] * 40 + [False] * 61
    mostly_chat = recipe(
        "v2", ingredients=(), modality=Modality.VIDEO, n_steps=101,
        texts=[f"flour sentence {i}" for i in range(101)],
        chat_flags=flags,
    )
    pairs = generate_pairs([t, mostly_chat])
    assert [p.target_id for p in pairs] == ["v2"]


def test_custom_prune_config():
    a_ing, b_ing = ingredients_with_overlap(10, 5)
    a = recipe("a", ingredients=a_ing)
    b = recipe("b", ingredients=b_ing)
    assert generate_pairs([a, b]) == []
    relaxed = PruneConfig(text_text_ingredient=0.5)
    assert len(generate_pairs([a, b], relaxed)) == 1


# ---------------------------------------------------------------------------
# orientation and ordering
# ---------------------------------------------------------------------------


def test_canonical_orientation():
    b = recipe("beta")
    a = recipe("alpha")
    v = recipe(
        "aaa-video", ingredients=(), modality=Modality.VIDEO,
        texts=["flour", "sugar", "mix"],
    )
    pairs = generate_pairs([b, v, a])
    assert [(p.source_id, p.target_id, p.kind) for p in pairs] == [
        ("alpha", "beta", PairKind.TEXT_TEXT),
        ("alpha", "aaa-video", PairKind.TEXT_VIDEO),
        ("beta", "aaa-video", PairKind.TEXT_VIDEO),
    ]


def test_output_order_is_input_order_independent():
    rng = np.random.default_rng(7)
    recipes = [recipe(f"r{i}") for i in range(5)] + [
        recipe(
            f"v{i}", ingredients=(), modality=Modality.VIDEO,
            texts=["flour and sugar", "mix well", "bake"],
        )
        for i in range(3)
    ]
    baseline = generate_pairs(recipes)
    assert len(baseline) == 10 + 15 + 3  # C(5,2) + 5*3 + C(3,2)
    for _ in range(10):
        shuffled = list(recipes)
        rng.shuffle(shuffled)
        assert generate_pairs(shuffled) == baseline


def test_mixed_dish_rejected():
    a = recipe("a", dish_id="lasagna")
    b = recipe("b", dish_id="tacos")
    with pytest.raises(MixedDish):
        generate_pairs([a, b])


def test_empty_input_and_singleton():
    assert generate_pairs([]) == []
    assert generate_pairs([recipe("solo")]) == []


def test_empty_ingredient_pairs_are_flagged():
    # no text recipes means no dish vocabulary, so both video estimates are
    # empty and the vacuous 1.0 match is flagged rather than silently kept
    v1 = recipe("v1", ingredients=(), modality=Modality.VIDEO, texts=["a", "b", "c"])
    v2 = recipe("v2", ingredients=(), modality=Modality.VIDEO, texts=["d", "e", "f"])
    pairs = generate_pairs([v1, v2])
    assert len(pairs) == 1
    assert pairs[0].empty_ingredients
    assert pairs[0].ingredient_match == 1.0


def test_pair_record_roundtrip():
    pairs = generate_pairs([recipe("a"), recipe("b")])
    for pair in pairs:
        record = pair_to_record(pair)
        assert pair_from_record(record) == pair
        assert pair_from_record({k: v for k, v in record.items() if k != "empty_ingredients"}) == pair


def test_generated_pairs_respect_thresholds():
    rng = np.random.default_rng(11)
    pool = [f"item{k}" for k in range(12)]
    prune = PruneConfig()
    for _ in range(40):
        recipes = []
        for i in range(rng.integers(2, 7)):
            size = int(rng.integers(1, len(pool) + 1))
            picks = rng.choice(pool, size=size, replace=False)
            recipes.append(
                recipe(f"r{i}", ingredients=tuple(picks), n_steps=int(rng.integers(2, 6)))
            )
        sets = {r.recipe_id: ingredient_tokens(r) for r in recipes}
        for pair in generate_pairs(recipes):
            assert pair.kind is PairKind.TEXT_TEXT
            assert pair.source_id < pair.target_id
            expected = ingredient_match_ratio(sets[pair.source_id], sets[pair.target_id])
            assert pair.ingredient_match == pytest.approx(expected)
            assert expected >= prune.text_text_ingredient
