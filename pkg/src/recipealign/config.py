"""Run configuration.

One plain-text file of ``key = value`` lines ('#' starts a comment) carries
every tunable constant; anything not set falls back to the defaults below,
and an environment variable ``RECIPEALIGN_<KEY>`` (upper-cased key) overrides
both, which is how CI pins single values without editing files.
"""

from __future__ import annotations

import os
from pathlib import Path

from .hmm_ibm1 import TrainSchedule
from .pairing import PruneConfig

ENV_PREFIX = "RECIPEALIGN_"

# Defaults double as the type table: each value is parsed as the type found
# here (int, float, or string).
DEFAULTS: dict[str, object] = {
    # shared RNG seed for every stochastic stage
    "seed": 13,
    # EM window schedule, comma-separated window:iterations stages
    "schedule": "1:3,2:2",
    # vocabulary frequency cutoffs per modality
    "min_count_text": 5,
    "min_count_video": 15,
    # tokenization mode: all | nouns | nouns_verbs
    "token_mode": "all",
    # optional file overrides ("" = built-in stop words / no tag lexicon)
    "stop_words": "",
    "pos_lexicon": "",
    # minimum ingredient match ratios per pair kind
    "text_text_ingredient": 0.70,
    "text_video_ingredient": 0.70,
    "video_video_ingredient": 0.90,
    # drop text-text pairs when one side has more than this times the
    # other's instructions
    "length_ratio": 2.0,
    # drop video recipes with more content sentences than this
    "max_video_sentences": 100,
    # minimum posterior for a directed edge in the dish graph
    "edge_threshold": 0.5,
    # extraction thresholds
    "paraphrase_threshold": 0.5,
    "breakdown_threshold": 0.9,
    # bm25 shape constants
    "bm25_k1": 1.2,
    "bm25_b": 0.75,
    # paired bootstrap resamples
    "bootstrap_resamples": 10000,
    # joint-set enumeration guardrails
    "joint_min_size": 2,
    "joint_path_cap": 1000000,
}


def _coerce(key: str, raw: str) -> object:
    default = DEFAULTS[key]
    try:
        if isinstance(default, bool):  # not used today, but bool < int in mro
            return raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ValueError(f"config key {key!r}: cannot parse {raw!r}") from None
    return raw


def load_config(path: str | Path | None = None) -> dict[str, object]:
    """Defaults, overlaid by the file (if any), overlaid by environment."""
    config = dict(DEFAULTS)
    if path is not None:
        for line_no, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"config line {line_no}: expected key = value")
            key, raw = (part.strip() for part in stripped.split("=", 1))
            if key not in DEFAULTS:
                raise ValueError(f"config line {line_no}: unknown key {key!r}")
            config[key] = _coerce(key, raw)
    for key in DEFAULTS:
        env_value = os.environ.get(ENV_PREFIX + key.upper())
        if env_value is not None:
            config[key] = _coerce(key, env_value)
    return config


def parse_schedule(spec: str) -> TrainSchedule:
    """Parse ``1:3,2:2`` into a training schedule."""
    stages = []
    for part in spec.split(","):
        try:
            window, iters = part.strip().split(":")
            stages.append((int(window), int(iters)))
        except ValueError:
            raise ValueError(f"bad schedule stage {part!r}") from None
    return TrainSchedule(stages=tuple(stages))


def prune_config(config: dict[str, object]) -> PruneConfig:
    return PruneConfig(
        text_text_ingredient=float(config["text_text_ingredient"]),
        text_video_ingredient=float(config["text_video_ingredient"]),
        video_video_ingredient=float(config["video_video_ingredient"]),
        length_ratio=float(config["length_ratio"]),
        max_video_sentences=int(config["max_video_sentences"]),
    )
