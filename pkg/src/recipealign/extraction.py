"""Mining decoded alignments for paraphrases and step breakdowns.

Both extractors are posterior-threshold filters over decoded alignments; the
tradeoff curve quantifies what a stricter threshold buys (precision) and
costs (coverage) against reference annotations.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .corpus import Modality, Recipe
from .evaluation import ReferenceAlignment, aggregate, consensus, weighted_prf
from .hmm_ibm1 import PairwiseAlignment
from .pairing import PairKind


def _endpoint(recipe: Recipe | None, recipe_id: str, index: int) -> dict:
    payload: dict = {"recipe_id": recipe_id, "index": index}
    if recipe is None or index >= len(recipe.instructions):
        return payload
    ins = recipe.instructions[index]
    if recipe.modality is Modality.VIDEO and ins.start_sec is not None:
        payload["url"] = recipe.source_url or ""
        payload["start_sec"] = ins.start_sec
        payload["end_sec"] = ins.end_sec
    else:
        payload["text"] = ins.text
    return payload


def extract_paraphrases(
    alignments: Sequence[PairwiseAlignment],
    recipes_by_id: Mapping[str, Recipe],
    threshold: float = 0.5,
) -> list[dict]:
    """Instruction pairs aligned with posterior strictly above the threshold.

    Output order follows the alignment list, then source instruction order,
    so identical inputs produce identical files.
    """
    records = []
    for alignment in alignments:
        source = recipes_by_id.get(alignment.source_id)
        target = recipes_by_id.get(alignment.target_id)
        for m, (label, posterior) in enumerate(
            zip(alignment.labels, alignment.posteriors)
        ):
            if posterior > threshold:
                records.append(
                    {
                        "dish_id": alignment.dish_id,
                        "kind": alignment.kind,
                        "a": _endpoint(source, alignment.source_id, m),
                        "b": _endpoint(target, alignment.target_id, label),
                        "probability": float(posterior),
                    }
                )
    return records


def extract_step_breakdowns(
    alignments: Sequence[PairwiseAlignment],
    recipes_by_id: Mapping[str, Recipe],
    threshold: float = 0.9,
) -> list[dict]:
    """Target instructions expanded into several source instructions.

    Only text-text alignments participate.  A target instruction qualifies
    when at least two source instructions map to it and every one of them
    clears the threshold; both decode directions of a pair are processed, so
    the mirror reading appears when its alignment is in the input.
    """
    records = []
    for alignment in alignments:
        if alignment.kind is not None and alignment.kind != PairKind.TEXT_TEXT.value:
            continue
        source = recipes_by_id.get(alignment.source_id)
        target = recipes_by_id.get(alignment.target_id)
        groups: dict[int, list[int]] = {}
        for m, label in enumerate(alignment.labels):
            groups.setdefault(label, []).append(m)
        for label in sorted(groups):
            members = groups[label]
            if len(members) < 2:
                continue
            posteriors = [alignment.posteriors[m] for m in members]
            if min(posteriors) <= threshold:
                continue
            records.append(
                {
                    "dish_id": alignment.dish_id,
                    "single": _endpoint(target, alignment.target_id, label),
                    "multi": [
                        _endpoint(source, alignment.source_id, m) for m in members
                    ],
                    "probabilities": [float(p) for p in posteriors],
                }
            )
    return records


def tradeoff_curve(
    alignments: Sequence[PairwiseAlignment],
    references: Mapping[tuple[str, str], ReferenceAlignment],
    thresholds: Sequence[float],
) -> list[dict]:
    """Retained fraction and retained-set scores per threshold, ascending.

    At each threshold, instructions whose posterior clears it stay; the
    retained predictions are scored per pair against the consensus labels of
    the same positions and averaged over pairs that kept anything.  A
    threshold that retains nothing reports null scores.
    """
    scored = []
    for alignment in alignments:
        reference = references.get((alignment.source_id, alignment.target_id))
        if reference is None:
            continue
        scored.append((alignment, consensus(reference)))

    total = sum(len(a.labels) for a, _ in scored)
    curve = []
    for threshold in sorted(thresholds):
        kept = 0
        pair_scores = []
        for alignment, fused in scored:
            retained = [
                m
                for m, posterior in enumerate(alignment.posteriors)
                if posterior > threshold
            ]
            kept += len(retained)
            if retained:
                pair_scores.append(
                    weighted_prf(
                        [alignment.labels[m] for m in retained],
                        [fused[m] for m in retained],
                    )
                )
        point: dict = {
            "threshold": float(threshold),
            "retained_fraction": kept / total if total else 0.0,
        }
        if pair_scores:
            overall = aggregate(pair_scores)
            point["precision"] = overall.precision
            point["recall"] = overall.recall
            point["f1"] = overall.f1
        else:
            point["precision"] = point["recall"] = point["f1"] = None
        curve.append(point)
    return curve
