"""Synthetic dishes with known instruction correspondences.

A synthetic dish has K latent steps; each step owns a few word slots and
each slot a small synonym set.  Every generated recipe renders every step,
with controlled corruption: synonym swaps, bounded local reordering, step
splits (one step becomes two instructions), step merges (two adjacent steps
become one instruction), and, for video recipes, interleaved chat sentences.
The generator returns the ground-truth latent ids per content instruction,
from which exact reference alignments for any recipe pair follow.

All randomness flows from one integer seed through per-recipe child streams,
so a fixed config and seed reproduce the corpus bit for bit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import ChatLabel, Instruction, Modality, Recipe
from .evaluation import ReferenceAlignment

_WORD_OK = re.compile(r"[a-z0-9]+\Z")

_VERB_BANK = (
    ("mix", "stir", "combine"),
    ("heat", "warm", "preheat"),
    ("chop", "dice", "mince"),
    ("bake", "roast", "broil"),
    ("add", "fold", "toss"),
    ("whisk", "beat", "whip"),
    ("pour", "drizzle", "ladle"),
    ("simmer", "boil", "poach"),
    ("spread", "layer", "coat"),
    ("serve", "plate", "garnish"),
    ("rinse", "drain", "strain"),
    ("knead", "roll", "press"),
)

_NOUN_BANK = (
    ("bowl", "basin", "vessel"),
    ("oven", "stove", "cooker"),
    ("butter", "margarine", "shortening"),
    ("sugar", "honey", "syrup"),
    ("flour", "cornmeal", "semolina"),
    ("egg", "yolk", "eggwhite"),
    ("pan", "skillet", "griddle"),
    ("onion", "shallot", "scallion"),
    ("salt", "pepper", "paprika"),
    ("water", "broth", "stock"),
    ("dough", "batter", "paste"),
    ("cheese", "cheddar", "mozzarella"),
    ("rice", "quinoa", "couscous"),
    ("chicken", "turkey", "duck"),
    ("sauce", "glaze", "gravy"),
    ("garlic", "ginger", "turmeric"),
    ("tomato", "zucchini", "eggplant"),
    ("milk", "cream", "yogurt"),
)

_OTHER_BANK = (
    ("gently", "slowly", "carefully"),
    ("thoroughly", "evenly", "fully"),
    ("350", "375", "400"),
    ("overnight", "briefly", "twice"),
    ("10", "15", "20"),
    ("golden", "crispy", "tender"),
    ("lightly", "halfway", "completely"),
    ("aside", "together", "apart"),
    ("five", "ten", "fifteen"),
    ("medium", "low", "high"),
    ("30", "45", "60"),
    ("immediately", "eventually", "occasionally"),
    ("firmly", "loosely", "tightly"),
    ("once", "thrice", "again"),
    ("hot", "cold", "cool"),
    ("smooth", "fluffy", "sticky"),
)

_CHAT_LINES = (
    "hey everyone welcome back to the channel",
    "don't forget to like and subscribe",
    "thanks so much for watching today",
    "let me know in the comments below",
    "this video is sponsored by our friends",
    "hit the bell icon for notifications",
)

_FILLERS = ("the", "and", "with", "then")


class InvalidConfig(ValueError):
    """A synthetic-dish config fails its sanity checks."""


@dataclass(frozen=True)
class SynthConfig:
    """Everything a synthetic dish needs besides the seed.

    ``step_words[k][s]`` is the synonym tuple of slot s of latent step k; the
    first synonym is the base form used when no swap fires.  ``ingredients``
    becomes the ingredient list of every text recipe.  The last ``n_video``
    recipes render as video transcripts with time spans and chat noise.
    """

    dish_id: str
    n_recipes: int
    step_words: tuple[tuple[tuple[str, ...], ...], ...]
    ingredients: tuple[str, ...] = ()
    swap_rate: float = 0.0
    reorder_window: int = 0
    split_rate: float = 0.0
    merge_rate: float = 0.0
    chat_noise: float = 0.0
    n_video: int = 0

    def validate(self) -> None:
        if not self.dish_id:
            raise InvalidConfig("dish_id must be non-empty")
        if self.n_recipes < 1:
            raise InvalidConfig("need at least one recipe")
        if not self.step_words:
            raise InvalidConfig("need at least one latent step")
        for k, slots in enumerate(self.step_words):
            if not slots:
                raise InvalidConfig(f"step {k} has no word slots")
            for synonyms in slots:
                if not synonyms:
                    raise InvalidConfig(f"step {k} has an empty synonym set")
                for word in synonyms:
                    if not _WORD_OK.match(word):
                        raise InvalidConfig(
                            f"step word {word!r} is not a single lowercase token"
                        )
        for name in ("swap_rate", "split_rate", "merge_rate", "chat_noise"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1]")
        if self.reorder_window < 0:
            raise InvalidConfig("reorder_window must be >= 0")
        if not 0 <= self.n_video <= self.n_recipes:
            raise InvalidConfig("n_video must be between 0 and n_recipes")


def default_config(
    dish_id: str,
    n_recipes: int = 6,
    n_steps: int = 8,
    seed: int = 0,
    swap_rate: float = 0.0,
    reorder_window: int = 0,
    split_rate: float = 0.0,
    merge_rate: float = 0.0,
    chat_noise: float = 0.0,
    n_video: int = 0,
    n_other: int = 1,
) -> SynthConfig:
    """Config with bank-sampled step words: verb + two nouns + ``n_other``
    adverbish slots per step, sampled without replacement within the dish.

    ``n_other`` controls how much of each instruction is neither noun nor
    verb, i.e. how much signal a noun/verb-only tokenization gives up.
    """
    if n_other < 1:
        raise InvalidConfig("need at least one adverbish slot per step")
    max_steps = min(
        len(_VERB_BANK), len(_NOUN_BANK) // 2, len(_OTHER_BANK) // n_other
    )
    if not 1 <= n_steps <= max_steps:
        raise InvalidConfig(
            f"default banks support 1..{max_steps} steps "
            f"at {n_other} adverbish slots, got {n_steps}"
        )
    rng = np.random.default_rng(seed)
    verb_pick = rng.permutation(len(_VERB_BANK))[:n_steps]
    noun_pick = rng.permutation(len(_NOUN_BANK))[: 2 * n_steps]
    other_pick = rng.permutation(len(_OTHER_BANK))[: n_other * n_steps]
    step_words = tuple(
        (
            _VERB_BANK[verb_pick[k]],
            _NOUN_BANK[noun_pick[2 * k]],
            _NOUN_BANK[noun_pick[2 * k + 1]],
        )
        + tuple(_OTHER_BANK[other_pick[n_other * k + j]] for j in range(n_other))
        for k in range(n_steps)
    )
    ingredients = tuple(
        sorted(_NOUN_BANK[noun_pick[i]][0] for i in range(2 * n_steps))
    )
    config = SynthConfig(
        dish_id=dish_id,
        n_recipes=n_recipes,
        step_words=step_words,
        ingredients=ingredients,
        swap_rate=swap_rate,
        reorder_window=reorder_window,
        split_rate=split_rate,
        merge_rate=merge_rate,
        chat_noise=chat_noise,
        n_video=n_video,
    )
    config.validate()
    return config


def default_lexicon() -> dict[str, frozenset[str]]:
    """Tag lexicon covering the built-in word banks (N / V / O)."""
    lexicon: dict[str, frozenset[str]] = {}
    for bank, tag in ((_VERB_BANK, "V"), (_NOUN_BANK, "N"), (_OTHER_BANK, "O")):
        for synonyms in bank:
            for word in synonyms:
                lexicon[word] = frozenset({tag})
    return lexicon


def _instruction_text(words: Sequence[str]) -> str:
    parts = [words[0]]
    for i, word in enumerate(words[1:]):
        parts.append(_FILLERS[i % len(_FILLERS)])
        parts.append(word)
    return " ".join(parts)


def _pick_word(synonyms: Sequence[str], swap_rate: float, rng) -> str:
    if rng.random() < swap_rate and len(synonyms) > 1:
        return synonyms[int(rng.integers(1, len(synonyms)))]
    return synonyms[0]


GroundTruth = dict[str, tuple[tuple[int, ...], ...]]


def synth_dish(config: SynthConfig, seed: int) -> tuple[list[Recipe], GroundTruth]:
    """Render the dish's recipes and their per-instruction latent ids.

    Ground truth covers content instructions only (chat sentences carry no
    latent step), in content order, matching what the pipeline sees after
    chat filtering and renumbering.
    """
    config.validate()
    children = np.random.SeedSequence(seed).spawn(config.n_recipes)
    recipes: list[Recipe] = []
    truth: GroundTruth = {}
    n_steps = len(config.step_words)
    for r_idx in range(config.n_recipes):
        rng = np.random.default_rng(children[r_idx])
        recipe_id = f"{config.dish_id}-r{r_idx:02d}"
        is_video = r_idx >= config.n_recipes - config.n_video

        keys = np.arange(n_steps) + rng.uniform(
            0.0, float(config.reorder_window), size=n_steps
        )
        order = [int(i) for i in np.argsort(keys, kind="stable")]

        # merge pass over the rendered order, then split pass
        groups: list[tuple[tuple[int, ...], tuple[tuple[str, ...], ...]]] = []
        t = 0
        while t < n_steps:
            step = order[t]
            if t + 1 < n_steps and rng.random() < config.merge_rate:
                nxt = order[t + 1]
                groups.append(
                    ((step, nxt), config.step_words[step] + config.step_words[nxt])
                )
                t += 2
            else:
                groups.append(((step,), config.step_words[step]))
                t += 1
        rendered: list[tuple[tuple[int, ...], list[str]]] = []
        for latents, slots in groups:
            words = [_pick_word(s, config.swap_rate, rng) for s in slots]
            if (
                len(latents) == 1
                and len(words) >= 2
                and rng.random() < config.split_rate
            ):
                half = len(words) // 2
                rendered.append((latents, words[:half]))
                rendered.append((latents, words[half:]))
            else:
                rendered.append((latents, words))

        instructions: list[Instruction] = []
        latent_rows: list[tuple[int, ...]] = []

        def push_chat(index: int) -> int:
            if is_video and rng.random() < config.chat_noise:
                line = _CHAT_LINES[int(rng.integers(0, len(_CHAT_LINES)))]
                instructions.append(
                    Instruction(
                        index=index,
                        text=line,
                        start_sec=8.0 * index,
                        end_sec=8.0 * index + 6.0,
                        chat_label=ChatLabel.CHAT,
                    )
                )
                return index + 1
            return index

        idx = 0
        for latents, words in rendered:
            idx = push_chat(idx)
            text = _instruction_text(words)
            if is_video:
                instructions.append(
                    Instruction(
                        index=idx,
                        text=text,
                        start_sec=8.0 * idx,
                        end_sec=8.0 * idx + 6.0,
                        chat_label=ChatLabel.CONTENT,
                    )
                )
            else:
                instructions.append(Instruction(index=idx, text=text))
            idx += 1
            latent_rows.append(tuple(sorted(latents)))
        push_chat(idx)

        recipes.append(
            Recipe(
                recipe_id=recipe_id,
                dish_id=config.dish_id,
                modality=Modality.VIDEO if is_video else Modality.TEXT,
                title=f"synthetic {config.dish_id}",
                ingredients=() if is_video else config.ingredients,
                instructions=tuple(instructions),
                source_url=f"https://example.com/{recipe_id}" if is_video else None,
            )
        )
        truth[recipe_id] = tuple(latent_rows)
    return recipes, truth


def induced_reference(
    truth: GroundTruth, source_id: str, target_id: str
) -> ReferenceAlignment:
    """Exact reference for one ordered pair: a source instruction's labels are
    all target instructions sharing a latent step with it."""
    rows = []
    for source_latents in truth[source_id]:
        labels = tuple(
            n
            for n, target_latents in enumerate(truth[target_id])
            if set(source_latents) & set(target_latents)
        )
        rows.append(labels)
    return ReferenceAlignment(
        source_id=source_id, target_id=target_id, annotations=(tuple(rows),)
    )


def induced_references(
    recipes: Sequence[Recipe], truth: GroundTruth
) -> list[ReferenceAlignment]:
    """References for every ordered pair of distinct recipes."""
    ids = [r.recipe_id for r in recipes]
    return [
        induced_reference(truth, src, tgt)
        for src in ids
        for tgt in ids
        if src != tgt
    ]
