"""Scoring predicted alignments against reference annotations.

Per pair, precision/recall/F1 are computed per target label and averaged
with weights proportional to each label's reference support, so weighted
recall coincides with plain accuracy.  Multiple annotators are fused by
majority vote per instruction before scoring (or scored separately behind
the ``mode`` flag), and systems are compared with a paired bootstrap over
per-pair F1.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .io_utils import read_jsonl, write_jsonl


class LengthMismatch(ValueError):
    """Predicted and reference sequences differ in length."""


class EmptyScores(ValueError):
    """An aggregate over zero pair scores is undefined."""


@dataclass(frozen=True)
class ReferenceAlignment:
    """Reference labels for one ordered pair.

    ``annotations[a][m]`` is annotator a's label set (non-empty, in listed
    order) for source instruction m; all annotators cover every instruction.
    """

    source_id: str
    target_id: str
    annotations: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        if not self.annotations:
            raise ValueError("need at least one annotator")
        length = len(self.annotations[0])
        for row in self.annotations:
            if len(row) != length:
                raise LengthMismatch("annotators cover different instruction counts")
            if any(not labels for labels in row):
                raise ValueError("each instruction needs at least one label")

    def __len__(self) -> int:
        return len(self.annotations[0])


def consensus(reference: ReferenceAlignment) -> list[int]:
    """Majority label per instruction.

    Every label an annotator listed gets one vote.  Among labels tied at the
    top count, annotators are scanned in order (and their lists in listed
    order) and the first tied label wins, so a single annotator's multi-label
    set resolves to its first entry.
    """
    fused = []
    for m in range(len(reference)):
        votes: Counter = Counter()
        for row in reference.annotations:
            votes.update(set(row[m]))
        top = max(votes.values())
        tied = {label for label, count in votes.items() if count == top}
        chosen = None
        for row in reference.annotations:
            for label in row[m]:
                if label in tied:
                    chosen = label
                    break
            if chosen is not None:
                break
        fused.append(chosen)
    return fused


@dataclass(frozen=True)
class PairScore:
    precision: float
    recall: float
    f1: float
    support: Mapping[int, int]


def weighted_prf(predicted: Sequence[int], reference: Sequence[int]) -> PairScore:
    """Support-weighted average of per-label precision/recall/F1.

    Labels absent from the reference contribute weight zero; a label never
    predicted has precision 0 by convention, and F1 is 0 when both P and R
    vanish.
    """
    if len(predicted) != len(reference):
        raise LengthMismatch(
            f"{len(predicted)} predictions vs {len(reference)} references"
        )
    if not reference:
        raise ValueError("cannot score an empty pair")
    support = Counter(reference)
    predicted_counts = Counter(predicted)
    correct = Counter(r for p, r in zip(predicted, reference) if p == r)
    total = len(reference)
    precision = recall = f1 = 0.0
    for label, sup in support.items():
        weight = sup / total
        p_c = correct[label] / predicted_counts[label] if predicted_counts[label] else 0.0
        r_c = correct[label] / sup
        f_c = 2 * p_c * r_c / (p_c + r_c) if (p_c + r_c) > 0 else 0.0
        precision += weight * p_c
        recall += weight * r_c
        f1 += weight * f_c
    return PairScore(
        precision=precision, recall=recall, f1=f1, support=dict(sorted(support.items()))
    )


def score_pair(
    predicted: Sequence[int],
    reference: ReferenceAlignment,
    mode: str = "consensus",
) -> PairScore:
    """Score one pair against its annotators.

    ``consensus`` (default) fuses annotators by majority vote first;
    ``average`` scores against each annotator separately (multi-label sets
    resolve to their first entry) and averages the three metrics.
    """
    if mode == "consensus":
        return weighted_prf(predicted, consensus(reference))
    if mode == "average":
        scores = [
            weighted_prf(predicted, [labels[0] for labels in row])
            for row in reference.annotations
        ]
        return PairScore(
            precision=sum(s.precision for s in scores) / len(scores),
            recall=sum(s.recall for s in scores) / len(scores),
            f1=sum(s.f1 for s in scores) / len(scores),
            support={},
        )
    raise ValueError(f"unknown scoring mode {mode!r}")


def aggregate(scores: Sequence[PairScore]) -> PairScore:
    """Unweighted mean over pairs."""
    if not scores:
        raise EmptyScores("no pair scores to aggregate")
    n = len(scores)
    return PairScore(
        precision=sum(s.precision for s in scores) / n,
        recall=sum(s.recall for s in scores) / n,
        f1=sum(s.f1 for s in scores) / n,
        support={},
    )


def paired_bootstrap(
    scores_a: Sequence[float],
    scores_b: Sequence[float],
    resamples: int = 10_000,
    seed: int = 0,
) -> float:
    """Fraction of paired resamples where system a fails to beat system b.

    Small values mean a outperforms b consistently across pairs.  Identical
    score lists give p = 1 because ties count against a.
    """
    if len(scores_a) != len(scores_b):
        raise LengthMismatch("score lists must be paired")
    if not scores_a:
        raise EmptyScores("no scores to resample")
    if resamples < 1000:
        raise ValueError("use at least 1000 resamples")
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(a), size=(resamples, len(a)))
    return float(np.mean(a[idx].mean(axis=1) <= b[idx].mean(axis=1)))


# ---------------------------------------------------------------------------
# reference files
# ---------------------------------------------------------------------------


def reference_to_record(reference: ReferenceAlignment) -> dict:
    return {
        "source_id": reference.source_id,
        "target_id": reference.target_id,
        "annotations": [
            [list(labels) for labels in row] for row in reference.annotations
        ],
    }


def reference_from_record(record: dict) -> ReferenceAlignment:
    return ReferenceAlignment(
        source_id=record["source_id"],
        target_id=record["target_id"],
        annotations=tuple(
            tuple(tuple(int(x) for x in labels) for labels in row)
            for row in record["annotations"]
        ),
    )


def load_references(path: str | Path) -> list[ReferenceAlignment]:
    return [reference_from_record(r) for r in read_jsonl(path)]


def write_references(path: str | Path, references: Sequence[ReferenceAlignment]) -> None:
    write_jsonl(path, [reference_to_record(r) for r in references])
