"""Pairing recipes of a dish into alignable pairs.

Pairs stay within a dish.  A pair survives when the two ingredient sets
overlap enough for the pair to plausibly describe the same dish variant;
video recipes additionally get a transcript-length cap and text-text pairs a
relative-length cap, both of which mainly guard against pathological inputs
drowning the aligner.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable, Sequence

from .corpus import Modality, Recipe, TokenMode, UNK, tokenize


class PairKind(str, Enum):
    TEXT_TEXT = "text_text"
    TEXT_VIDEO = "text_video"
    VIDEO_VIDEO = "video_video"


class MixedDish(ValueError):
    """Recipes from different dishes were passed where one dish is required."""


@dataclass(frozen=True)
class PruneConfig:
    """Thresholds for keeping a candidate pair.

    Ingredient thresholds are minimum match ratios; ``length_ratio`` drops a
    text-text pair when one side has more than that many times the other's
    instructions; ``max_video_sentences`` drops a video recipe (and all its
    pairs) when its content transcript is longer.
    """

    text_text_ingredient: float = 0.70
    text_video_ingredient: float = 0.70
    video_video_ingredient: float = 0.90
    length_ratio: float = 2.0
    max_video_sentences: int = 100


@dataclass(frozen=True)
class RecipePair:
    """One alignable pair; source/target fix the canonical orientation.

    ``empty_ingredients`` flags pairs whose match ratio is the vacuous 1.0 of
    two empty ingredient sets so callers can filter them if they want to.
    """

    dish_id: str
    source_id: str
    target_id: str
    kind: PairKind
    ingredient_match: float
    empty_ingredients: bool = False


def ingredient_tokens(
    recipe: Recipe, stop_words: Iterable[str] | None = None
) -> frozenset[str]:
    """Content tokens of all ingredient strings; multiword items contribute each token."""
    tokens: set[str] = set()
    for item in recipe.ingredients:
        tokens.update(
            t
            for t in tokenize(item, stop_words, TokenMode.ALL_WORDS).tokens
            if t != UNK
        )
    return frozenset(tokens)


def build_dish_ingredient_set(
    recipes: Sequence[Recipe], stop_words: Iterable[str] | None = None
) -> frozenset[str]:
    """Union of ingredient tokens over the dish's text recipes."""
    tokens: set[str] = set()
    for recipe in recipes:
        if recipe.modality is Modality.TEXT:
            tokens.update(ingredient_tokens(recipe, stop_words))
    return frozenset(tokens)


def estimate_video_ingredients(
    video: Recipe,
    dish_ingredients: frozenset[str],
    stop_words: Iterable[str] | None = None,
) -> frozenset[str]:
    """Dish ingredient tokens actually mentioned in the content transcript."""
    mentioned: set[str] = set()
    for ins in video.content_instructions():
        mentioned.update(tokenize(ins.text, stop_words, TokenMode.ALL_WORDS).tokens)
    return frozenset(mentioned & dish_ingredients)


def ingredient_match_ratio(a: frozenset[str], b: frozenset[str]) -> float:
    """Shared tokens over the larger set; two empty sets count as a full match."""
    if not a and not b:
        return 1.0
    return len(a & b) / max(len(a), len(b))


def _length_compatible(a: Recipe, b: Recipe, ratio: float) -> bool:
    la, lb = len(a.instructions), len(b.instructions)
    return max(la, lb) <= ratio * min(la, lb)


def generate_pairs(
    recipes: Sequence[Recipe],
    prune: PruneConfig | None = None,
    stop_words: Iterable[str] | None = None,
) -> list[RecipePair]:
    """All surviving pairs among one dish's recipes.

    Text-text and video-video pairs are unordered and stored once with the
    lexicographically smaller recipe id as source; text-video pairs always
    store the text recipe as source.  Output order is deterministic: kinds in
    (text_text, text_video, video_video), then (source_id, target_id).
    """
    if not recipes:
        return []
    prune = prune or PruneConfig()
    dishes = {r.dish_id for r in recipes}
    if len(dishes) != 1:
        raise MixedDish(f"expected one dish, got {sorted(dishes)}")
    dish_id = recipes[0].dish_id

    texts = sorted(
        (r for r in recipes if r.modality is Modality.TEXT),
        key=lambda r: r.recipe_id,
    )
    videos = sorted(
        (r for r in recipes if r.modality is Modality.VIDEO),
        key=lambda r: r.recipe_id,
    )
    videos = [
        v
        for v in videos
        if len(v.content_instructions()) <= prune.max_video_sentences
    ]

    dish_set = build_dish_ingredient_set(texts, stop_words)
    ing: dict[str, frozenset[str]] = {}
    for r in texts:
        ing[r.recipe_id] = ingredient_tokens(r, stop_words)
    for v in videos:
        ing[v.recipe_id] = estimate_video_ingredients(v, dish_set, stop_words)

    def make(kind: PairKind, src: Recipe, tgt: Recipe, threshold: float) -> RecipePair | None:
        a, b = ing[src.recipe_id], ing[tgt.recipe_id]
        ratio = ingredient_match_ratio(a, b)
        if ratio < threshold:
            return None
        return RecipePair(
            dish_id=dish_id,
            source_id=src.recipe_id,
            target_id=tgt.recipe_id,
            kind=kind,
            ingredient_match=ratio,
            empty_ingredients=not a and not b,
        )

    pairs: list[RecipePair] = []
    for a, b in combinations(texts, 2):
        if not _length_compatible(a, b, prune.length_ratio):
            continue
        pair = make(PairKind.TEXT_TEXT, a, b, prune.text_text_ingredient)
        if pair:
            pairs.append(pair)
    for t in texts:
        for v in videos:
            pair = make(PairKind.TEXT_VIDEO, t, v, prune.text_video_ingredient)
            if pair:
                pairs.append(pair)
    for a, b in combinations(videos, 2):
        pair = make(PairKind.VIDEO_VIDEO, a, b, prune.video_video_ingredient)
        if pair:
            pairs.append(pair)
    return pairs


def pair_to_record(pair: RecipePair) -> dict:
    return {
        "dish_id": pair.dish_id,
        "source_id": pair.source_id,
        "target_id": pair.target_id,
        "kind": pair.kind.value,
        "ingredient_match": pair.ingredient_match,
        "empty_ingredients": pair.empty_ingredients,
    }


def pair_from_record(record: dict) -> RecipePair:
    return RecipePair(
        dish_id=record["dish_id"],
        source_id=record["source_id"],
        target_id=record["target_id"],
        kind=PairKind(record["kind"]),
        ingredient_match=float(record["ingredient_match"]),
        empty_ingredients=bool(record.get("empty_ingredients", False)),
    )
