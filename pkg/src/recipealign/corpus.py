"""Corpus model: recipes, tokenization, vocabularies, chat filtering.

A corpus is a flat set of recipes; every recipe belongs to a dish and is
either a written text recipe or a video transcript whose sentences play the
role of instructions.  Everything downstream (pairing, alignment, joint
graphs) works on the token sequences produced here, so the tokenizer and
vocabulary rules are pinned:

* tokens are maximal alphanumeric runs of the lowercased text,
* the all-words mode drops stop words but keeps digit tokens,
* the noun / noun-verb modes keep only tokens whose lexicon tags allow it,
* a sequence that loses every token becomes the single reserved ``UNK``.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .stopwords import DEFAULT_STOP_WORDS

UNK = "<unk>"

# Maximal runs of (unicode) letters or digits; underscore is punctuation here.
_TOKEN_RE = re.compile(r"[^\W_]+")

_VALID_POS_TAGS = frozenset({"N", "V", "O"})


class Modality(str, Enum):
    TEXT = "text"
    VIDEO = "video"


class ChatLabel(str, Enum):
    CHAT = "chat"
    CONTENT = "content"


class TokenMode(str, Enum):
    ALL_WORDS = "all"
    NOUNS = "nouns"
    NOUNS_VERBS = "nouns_verbs"


class MalformedRecord(ValueError):
    """A corpus file record violates the schema."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class EmptyRecipe(ValueError):
    """A corpus file record has zero instructions."""

    def __init__(self, line_no: int, recipe_id: str = ""):
        super().__init__(f"line {line_no}: recipe {recipe_id!r} has no instructions")
        self.line_no = line_no
        self.recipe_id = recipe_id


class NoData(ValueError):
    """No training examples were supplied."""


class EmptyModel(ValueError):
    """A classifier with no classes cannot classify."""


@dataclass(frozen=True)
class Instruction:
    """One instruction (text recipe) or transcript sentence (video)."""

    index: int
    text: str
    start_sec: float | None = None
    end_sec: float | None = None
    chat_label: ChatLabel | None = None


@dataclass(frozen=True)
class Recipe:
    recipe_id: str
    dish_id: str
    modality: Modality
    title: str
    ingredients: tuple[str, ...]
    instructions: tuple[Instruction, ...]
    source_url: str | None = None

    def content_instructions(self) -> tuple[Instruction, ...]:
        """Instructions not labeled as chat (unlabeled counts as content)."""
        return tuple(
            ins for ins in self.instructions if ins.chat_label is not ChatLabel.CHAT
        )


@dataclass(frozen=True)
class TokenSequence:
    """Filtered tokens of one instruction plus where they came from."""

    tokens: tuple[str, ...]
    origin_index: int
    mode: TokenMode


# ---------------------------------------------------------------------------
# tokenization
# ---------------------------------------------------------------------------


def tokenize(
    text: str,
    stop_words: Iterable[str] | None = None,
    mode: TokenMode = TokenMode.ALL_WORDS,
    pos_lexicon: Mapping[str, frozenset[str]] | None = None,
    origin_index: int = 0,
) -> TokenSequence:
    """Lowercase, split on non-alphanumeric runs, filter by mode.

    ``stop_words=None`` selects the built-in list; pass an empty set to keep
    everything.  The noun and noun-verb modes need ``pos_lexicon`` and retain
    a token iff its tag set contains ``N`` (resp. ``N`` or ``V``); untagged
    tokens are dropped there.  An empty result collapses to ``(UNK,)``.
    """
    if mode is not TokenMode.ALL_WORDS and pos_lexicon is None:
        raise ValueError(f"mode {mode.value} requires a pos_lexicon")
    stops = DEFAULT_STOP_WORDS if stop_words is None else frozenset(stop_words)
    words = _TOKEN_RE.findall(text.lower())
    if mode is TokenMode.ALL_WORDS:
        kept = [w for w in words if w not in stops]
    else:
        wanted = {"N"} if mode is TokenMode.NOUNS else {"N", "V"}
        assert pos_lexicon is not None
        kept = [w for w in words if pos_lexicon.get(w, frozenset()) & wanted]
    if not kept:
        kept = [UNK]
    return TokenSequence(tokens=tuple(kept), origin_index=origin_index, mode=mode)


def tokenize_instructions(
    recipe: Recipe,
    stop_words: Iterable[str] | None = None,
    mode: TokenMode = TokenMode.ALL_WORDS,
    pos_lexicon: Mapping[str, frozenset[str]] | None = None,
) -> list[TokenSequence]:
    """Tokenize the content instructions of a recipe, keeping their indices."""
    return [
        tokenize(ins.text, stop_words, mode, pos_lexicon, origin_index=ins.index)
        for ins in recipe.content_instructions()
    ]


def load_stop_words(path: str | Path) -> frozenset[str]:
    """Read a stop-word file: one word per line, blank lines ignored."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


def load_pos_lexicon(path: str | Path) -> dict[str, frozenset[str]]:
    """Read a tag lexicon: ``word<TAB>tag[,tag...]`` with tags in {N, V, O}."""
    lexicon: dict[str, frozenset[str]] = {}
    for line_no, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            word, tag_field = line.split("\t")
        except ValueError:
            raise MalformedRecord(line_no, "expected word<TAB>tags") from None
        tags = frozenset(t.strip() for t in tag_field.split(",") if t.strip())
        if not tags or not tags <= _VALID_POS_TAGS:
            raise MalformedRecord(line_no, f"bad tag set {tag_field!r}")
        lexicon[word.strip().lower()] = tags
    return lexicon


def write_pos_lexicon(
    path: str | Path, lexicon: Mapping[str, frozenset[str]]
) -> None:
    """Write a tag lexicon in the word<TAB>tags format, sorted by word."""
    lines = [
        f"{word}\t{','.join(sorted(lexicon[word]))}" for word in sorted(lexicon)
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


# ---------------------------------------------------------------------------
# vocabulary
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Vocabulary:
    """Dense symbol table with UNK pinned at id 0.

    Non-UNK ids are assigned by decreasing corpus frequency, ties broken
    lexicographically, so two builds over the same corpus agree bit for bit.
    """

    symbols: tuple[str, ...]
    counts: Mapping[str, int]
    min_count: int
    _ids: Mapping[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self._ids:
            object.__setattr__(
                self, "_ids", {s: i for i, s in enumerate(self.symbols)}
            )

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._ids

    def __len__(self) -> int:
        return len(self.symbols)

    def id_of(self, symbol: str) -> int:
        return self._ids[symbol]

    def symbol_of(self, idx: int) -> str:
        return self.symbols[idx]


def build_vocabulary(
    sequences: Iterable[TokenSequence], min_count: int
) -> Vocabulary:
    """Count tokens across sequences and keep those seen >= min_count times.

    UNK is always present (id 0) and exempt from the cutoff; its stored count
    is the number of UNK placeholders in the input.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    freq = Counter()
    for seq in sequences:
        freq.update(seq.tokens)
    retained = [
        s for s, c in freq.items() if s != UNK and c >= min_count
    ]
    retained.sort(key=lambda s: (-freq[s], s))
    symbols = (UNK, *retained)
    counts = {s: freq.get(s, 0) for s in symbols}
    return Vocabulary(symbols=symbols, counts=counts, min_count=min_count)


def apply_vocabulary(seq: TokenSequence, vocab: Vocabulary) -> TokenSequence:
    """Drop out-of-vocabulary tokens; a fully dropped sequence becomes (UNK,)."""
    kept = tuple(t for t in seq.tokens if t in vocab)
    if not kept:
        kept = (UNK,)
    return replace(seq, tokens=kept)


# ---------------------------------------------------------------------------
# corpus files
# ---------------------------------------------------------------------------


def _parse_instruction(
    raw: object, line_no: int, modality: Modality, position: int
) -> Instruction:
    if not isinstance(raw, dict):
        raise MalformedRecord(line_no, f"instruction {position} is not an object")
    if not isinstance(raw.get("index"), int) or isinstance(raw.get("index"), bool):
        raise MalformedRecord(line_no, f"instruction {position} needs an int index")
    text = raw.get("text")
    if not isinstance(text, str) or not text.strip():
        raise MalformedRecord(line_no, f"instruction {position} has empty text")
    start = raw.get("start_sec")
    end = raw.get("end_sec")
    if modality is Modality.TEXT and (start is not None or end is not None):
        raise MalformedRecord(line_no, "text instructions cannot carry time spans")
    if (start is None) != (end is None):
        raise MalformedRecord(line_no, "time span needs both start_sec and end_sec")
    if start is not None:
        if not isinstance(start, (int, float)) or not isinstance(end, (int, float)):
            raise MalformedRecord(line_no, "time span bounds must be numbers")
        if not float(end) > float(start):
            raise MalformedRecord(line_no, "end_sec must exceed start_sec")
    label_raw = raw.get("chat_label")
    label: ChatLabel | None = None
    if label_raw is not None:
        try:
            label = ChatLabel(label_raw)
        except ValueError:
            raise MalformedRecord(line_no, f"bad chat_label {label_raw!r}") from None
    return Instruction(
        index=raw["index"],
        text=text,
        start_sec=None if start is None else float(start),
        end_sec=None if end is None else float(end),
        chat_label=label,
    )


def _parse_record(raw: object, line_no: int, modality: Modality | None) -> Recipe:
    """One corpus record; ``modality`` is the expected kind, None for any."""
    if not isinstance(raw, dict):
        raise MalformedRecord(line_no, "record is not an object")
    for key in ("recipe_id", "dish_id", "title"):
        if not isinstance(raw.get(key), str) or not raw[key].strip():
            raise MalformedRecord(line_no, f"missing or empty {key}")
    declared = raw.get("modality")
    if modality is None:
        if declared is None:
            raise MalformedRecord(line_no, "record needs a modality field")
        try:
            modality = Modality(declared)
        except ValueError:
            raise MalformedRecord(line_no, f"bad modality {declared!r}") from None
    elif declared is not None and declared != modality.value:
        raise MalformedRecord(
            line_no, f"expected modality {modality.value!r}, got {declared!r}"
        )
    ingredients = raw.get("ingredients", [])
    if not isinstance(ingredients, list) or not all(
        isinstance(s, str) for s in ingredients
    ):
        raise MalformedRecord(line_no, "ingredients must be a string list")
    raw_instructions = raw.get("instructions")
    if raw_instructions is None or not isinstance(raw_instructions, list):
        raise MalformedRecord(line_no, "missing instructions field")
    if not raw_instructions:
        raise EmptyRecipe(line_no, raw["recipe_id"])
    parsed = [
        _parse_instruction(item, line_no, modality, pos)
        for pos, item in enumerate(raw_instructions)
    ]
    parsed.sort(key=lambda ins: ins.index)
    renumbered = tuple(
        replace(ins, index=new_index) for new_index, ins in enumerate(parsed)
    )
    url = raw.get("source_url")
    if url is not None and not isinstance(url, str):
        raise MalformedRecord(line_no, "source_url must be a string")
    return Recipe(
        recipe_id=raw["recipe_id"],
        dish_id=raw["dish_id"],
        modality=modality,
        title=raw["title"].lower(),
        ingredients=tuple(s.lower() for s in ingredients),
        instructions=renumbered,
        source_url=url,
    )


def _parse_lines(path: str | Path, modality: Modality | None) -> list[Recipe]:
    recipes: list[Recipe] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from None
            recipe = _parse_record(raw, line_no, modality)
            if recipe.recipe_id in seen_ids:
                raise MalformedRecord(
                    line_no, f"duplicate recipe_id {recipe.recipe_id!r}"
                )
            seen_ids.add(recipe.recipe_id)
            recipes.append(recipe)
    return recipes


def parse_recipe_file(path: str | Path, modality: Modality) -> list[Recipe]:
    """Read a JSON-lines recipe file of the given modality.

    The argument is the expected modality: records may omit the field but a
    conflicting one is an error.  Instructions are re-sorted by their declared
    index and renumbered to a contiguous 0-based range.  Raises
    MalformedRecord (with the line number) on any schema violation and
    EmptyRecipe on a record with no instructions.
    """
    return _parse_lines(path, modality)


def load_corpus(path: str | Path) -> list[Recipe]:
    """Read a mixed corpus file where every record declares its modality."""
    return _parse_lines(path, None)


def recipe_to_record(recipe: Recipe) -> dict:
    """JSON-serializable record in the corpus file schema."""
    instructions = []
    for ins in recipe.instructions:
        item: dict = {"index": ins.index, "text": ins.text}
        if ins.start_sec is not None:
            item["start_sec"] = ins.start_sec
            item["end_sec"] = ins.end_sec
        if ins.chat_label is not None:
            item["chat_label"] = ins.chat_label.value
        instructions.append(item)
    record = {
        "recipe_id": recipe.recipe_id,
        "dish_id": recipe.dish_id,
        "modality": recipe.modality.value,
        "title": recipe.title,
        "ingredients": list(recipe.ingredients),
        "instructions": instructions,
    }
    if recipe.source_url is not None:
        record["source_url"] = recipe.source_url
    return record


def drop_chat(recipe: Recipe) -> Recipe | None:
    """Remove chat sentences and renumber; None if nothing is left."""
    kept = recipe.content_instructions()
    if not kept:
        return None
    renumbered = tuple(
        replace(ins, index=new_index) for new_index, ins in enumerate(kept)
    )
    return replace(recipe, instructions=renumbered)


# ---------------------------------------------------------------------------
# chat / content classifier
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChatModel:
    """Multinomial naive Bayes over sentence tokens.

    ``likelihood_log[label]`` maps tokens to add-one smoothed log likelihoods;
    the reserved UNK key holds the likelihood of a token unseen in training.
    """

    priors: Mapping[str, float]
    likelihood_log: Mapping[str, Mapping[str, float]]
    smoothing: int = 1


def train_chat_model(examples: Sequence[tuple[str, ChatLabel]]) -> ChatModel:
    """Fit the classifier; smoothing is add-one over the training vocabulary.

    With vocabulary size V and per-class token total T_c, a token seen c times
    in class texts gets likelihood (c + 1) / (T_c + V + 1); the extra bucket in
    the denominator is reserved for unseen tokens under the UNK key.
    """
    if not examples:
        raise NoData("no labeled sentences to train on")
    token_counts: dict[str, Counter] = {}
    class_counts: Counter = Counter()
    vocab: set[str] = set()
    for text, label in examples:
        class_counts[label.value] += 1
        tokens = tokenize(text, stop_words=frozenset()).tokens
        tokens = tuple(t for t in tokens if t != UNK)
        vocab.update(tokens)
        token_counts.setdefault(label.value, Counter()).update(tokens)
    if len(class_counts) < 2:
        # a one-class model would label everything identically
        raise NoData("training examples cover only one label")
    total = sum(class_counts.values())
    v_size = len(vocab)
    priors = {label: class_counts[label] / total for label in sorted(class_counts)}
    likelihood_log: dict[str, dict[str, float]] = {}
    for label in sorted(class_counts):
        counts = token_counts.get(label, Counter())
        denom = sum(counts.values()) + v_size + 1
        row = {tok: math.log((counts[tok] + 1) / denom) for tok in sorted(vocab)}
        row[UNK] = math.log(1 / denom)
        likelihood_log[label] = row
    return ChatModel(priors=priors, likelihood_log=likelihood_log, smoothing=1)


def classify_chat(sentences: Sequence[str], model: ChatModel) -> list[ChatLabel]:
    """Label each sentence with the higher-scoring class.

    Scores are log prior plus summed token log likelihoods (unseen tokens use
    the UNK bucket); ties go to the lexicographically smaller class name so an
    empty sentence under equal priors is deterministic.
    """
    labels = sorted(model.priors)
    if not labels:
        raise EmptyModel("chat model has no classes")
    out: list[ChatLabel] = []
    for text in sentences:
        tokens = tuple(
            t for t in tokenize(text, stop_words=frozenset()).tokens if t != UNK
        )
        best_label = None
        best_score = -math.inf
        for label in labels:
            row = model.likelihood_log[label]
            unseen = row[UNK]
            score = math.log(model.priors[label])
            for tok in tokens:
                score += row.get(tok, unseen)
            if score > best_score:
                best_label, best_score = label, score
        out.append(ChatLabel(best_label))
    return out


def save_chat_model(model: ChatModel, path: str | Path) -> None:
    payload = {
        "priors": dict(model.priors),
        "likelihood_log": {k: dict(v) for k, v in model.likelihood_log.items()},
        "smoothing": model.smoothing,
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_chat_model(path: str | Path) -> ChatModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return ChatModel(
        priors=payload["priors"],
        likelihood_log=payload["likelihood_log"],
        smoothing=int(payload.get("smoothing", 1)),
    )
