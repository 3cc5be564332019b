"""Command-line pipeline.

Subcommands mirror the pipeline stages: ingest -> pairs -> train -> align ->
joint / extract, plus baseline, eval, curve, synth, and export-dot.  Every
command logs the resolved config and a content hash of each input to stderr,
writes outputs atomically with canonical JSON, and exits non-zero with one
machine-readable JSON error line on stderr when something is wrong, so
repeated runs over the same inputs are byte-identical and scriptable.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import baselines, extraction
from .config import load_config, parse_schedule, prune_config
from .corpus import (
    Modality,
    Recipe,
    TokenMode,
    TokenSequence,
    Vocabulary,
    apply_vocabulary,
    build_vocabulary,
    classify_chat,
    drop_chat,
    load_chat_model,
    load_corpus,
    load_pos_lexicon,
    load_stop_words,
    parse_recipe_file,
    recipe_to_record,
    save_chat_model,
    tokenize_instructions,
    train_chat_model,
    write_pos_lexicon,
)
from .evaluation import (
    aggregate,
    load_references,
    paired_bootstrap,
    reference_to_record,
    score_pair,
)
from .hmm_ibm1 import (
    NoPairs,
    PairwiseAlignment,
    alignment_from_record,
    alignment_to_record,
    decode,
    em_train,
)
from .io_utils import atomic_write_text, dumps_canonical, read_jsonl, sha256_file, write_jsonl
from .joint import (
    build_dish_graph,
    export_dot,
    extract_joint_sets,
    forest_from_record,
    forest_to_record,
    max_spanning_forest,
)
from .model_io import load_model, save_model
from .pairing import PairKind, RecipePair, generate_pairs, pair_from_record, pair_to_record
from .synth import default_config, default_lexicon, induced_references, synth_dish

log = logging.getLogger("recipealign")

_KIND_MODALITIES = {
    PairKind.TEXT_TEXT: (Modality.TEXT, Modality.TEXT),
    PairKind.TEXT_VIDEO: (Modality.TEXT, Modality.VIDEO),
    PairKind.VIDEO_VIDEO: (Modality.VIDEO, Modality.VIDEO),
}


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def _log_run(command: str, config: Mapping[str, object], inputs: Sequence[str]) -> None:
    log.info("command=%s config=%s", command, dumps_canonical(dict(config)))
    for path in inputs:
        log.info("input=%s sha256=%s", path, sha256_file(path))


def _load_corpus_files(paths: Sequence[str]) -> tuple[list[Recipe], dict[str, Recipe]]:
    recipes: list[Recipe] = []
    by_id: dict[str, Recipe] = {}
    for path in paths:
        for recipe in load_corpus(path):
            if recipe.recipe_id in by_id:
                raise ValueError(f"duplicate recipe_id {recipe.recipe_id!r} across corpus files")
            by_id[recipe.recipe_id] = recipe
            recipes.append(recipe)
    return recipes, by_id


def _stop_words(config: Mapping[str, object]):
    path = str(config["stop_words"])
    return load_stop_words(path) if path else None


def _pos_lexicon(config: Mapping[str, object]):
    path = str(config["pos_lexicon"])
    return load_pos_lexicon(path) if path else None


def _token_mode(config: Mapping[str, object]) -> TokenMode:
    return TokenMode(str(config["token_mode"]))


def _sequence_index(
    recipes: Sequence[Recipe],
    config: Mapping[str, object],
    mode: TokenMode | None = None,
) -> dict[str, list[TokenSequence]]:
    stops = _stop_words(config)
    lexicon = _pos_lexicon(config)
    mode = mode or _token_mode(config)
    return {
        r.recipe_id: tokenize_instructions(r, stops, mode, lexicon) for r in recipes
    }


def _modality_vocabularies(
    recipes: Sequence[Recipe],
    sequences: Mapping[str, list[TokenSequence]],
    config: Mapping[str, object],
) -> dict[Modality, Vocabulary]:
    """One vocabulary per modality over all its recipes' content sequences."""
    vocabs: dict[Modality, Vocabulary] = {}
    for modality, key in ((Modality.TEXT, "min_count_text"), (Modality.VIDEO, "min_count_video")):
        pool = [
            seq
            for r in sorted(recipes, key=lambda r: r.recipe_id)
            if r.modality is modality
            for seq in sequences[r.recipe_id]
        ]
        if pool:
            vocabs[modality] = build_vocabulary(pool, min_count=int(config[key]))
    return vocabs


def _select_pairs(path: str, kind: str | None) -> list[RecipePair]:
    pairs = [pair_from_record(r) for r in read_jsonl(path)]
    if kind:
        pairs = [p for p in pairs if p.kind.value == kind]
    return pairs


def _ordered_pairs(pairs: Sequence[RecipePair]):
    """Both decode orientations of every stored pair, in file order."""
    for pair in pairs:
        yield pair, pair.source_id, pair.target_id
        yield pair, pair.target_id, pair.source_id


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_ingest(args, config) -> int:
    _log_run("ingest", config, [args.input])
    modality = Modality(args.modality)
    recipes = parse_recipe_file(args.input, modality)
    if args.fit_chat_model:
        labeled = [
            (ins.text, ins.chat_label)
            for recipe in recipes
            for ins in recipe.instructions
            if ins.chat_label is not None
        ]
        chat_model = train_chat_model(labeled)
        save_chat_model(chat_model, args.fit_chat_model)
        log.info("chat model fitted on %d sentences -> %s", len(labeled), args.fit_chat_model)
    if args.chat_model:
        chat_model = load_chat_model(args.chat_model)
        relabeled = []
        for recipe in recipes:
            unlabeled = [ins for ins in recipe.instructions if ins.chat_label is None]
            if not unlabeled:
                relabeled.append(recipe)
                continue
            predictions = classify_chat([ins.text for ins in unlabeled], chat_model)
            label_of = {ins.index: lab for ins, lab in zip(unlabeled, predictions)}
            relabeled.append(
                replace(
                    recipe,
                    instructions=tuple(
                        replace(ins, chat_label=label_of.get(ins.index, ins.chat_label))
                        for ins in recipe.instructions
                    ),
                )
            )
        recipes = relabeled
    if args.drop_chat:
        kept = []
        for recipe in recipes:
            filtered = drop_chat(recipe)
            if filtered is None:
                log.warning("recipe %s is all chat; skipped", recipe.recipe_id)
            else:
                kept.append(filtered)
        recipes = kept
    write_jsonl(args.out, [recipe_to_record(r) for r in recipes])
    log.info("wrote %d recipes -> %s", len(recipes), args.out)
    return 0


def cmd_pairs(args, config) -> int:
    _log_run("pairs", config, list(args.corpus))
    recipes, _ = _load_corpus_files(args.corpus)
    stops = _stop_words(config)
    prune = prune_config(config)
    by_dish: dict[str, list[Recipe]] = {}
    for recipe in recipes:
        by_dish.setdefault(recipe.dish_id, []).append(recipe)
    pairs: list[RecipePair] = []
    for dish_id in sorted(by_dish):
        pairs.extend(generate_pairs(by_dish[dish_id], prune, stops))
    write_jsonl(args.out, [pair_to_record(p) for p in pairs])
    log.info("wrote %d pairs -> %s", len(pairs), args.out)
    return 0


def cmd_train(args, config) -> int:
    _log_run("train", config, list(args.corpus) + [args.pairs])
    recipes, by_id = _load_corpus_files(args.corpus)
    pairs = _select_pairs(args.pairs, args.kind)
    if not pairs:
        raise NoPairs(f"no pairs of kind {args.kind!r} in {args.pairs}")
    used_ids = sorted({p.source_id for p in pairs} | {p.target_id for p in pairs})
    used = [by_id[rid] for rid in used_ids]
    sequences = _sequence_index(used, config)
    vocabs = _modality_vocabularies(used, sequences, config)
    applied = {
        r.recipe_id: [
            apply_vocabulary(seq, vocabs[r.modality]) for seq in sequences[r.recipe_id]
        ]
        for r in used
    }
    training = []
    for pair in pairs:
        src, tgt = applied[pair.source_id], applied[pair.target_id]
        training.append((src, tgt))
        training.append((tgt, src))
    schedule = parse_schedule(str(config["schedule"]))
    src_modality, tgt_modality = _KIND_MODALITIES[PairKind(args.kind)]
    model = em_train(
        training,
        schedule=schedule,
        source_vocab=vocabs.get(src_modality),
        target_vocab=vocabs.get(tgt_modality),
    )
    save_model(model, args.out, fmt=args.format)
    log.info(
        "trained on %d ordered pairs; final loglik %.4f -> %s",
        len(training),
        model.loglik_trace[-1],
        args.out,
    )
    return 0


def _vocab_by_modality_from_model(kind: PairKind, model) -> dict[Modality, Vocabulary]:
    src_modality, tgt_modality = _KIND_MODALITIES[kind]
    vocabs = {}
    if model.source_vocab is not None:
        vocabs[src_modality] = model.source_vocab
    if model.target_vocab is not None:
        vocabs[tgt_modality] = model.target_vocab
    return vocabs


def cmd_align(args, config) -> int:
    _log_run("align", config, list(args.corpus) + [args.pairs, args.model])
    _, by_id = _load_corpus_files(args.corpus)
    pairs = _select_pairs(args.pairs, args.kind)
    if not pairs:
        raise NoPairs(f"no pairs of kind {args.kind!r} in {args.pairs}")
    model = load_model(args.model)
    used = [by_id[rid] for rid in sorted({p.source_id for p in pairs} | {p.target_id for p in pairs})]
    sequences = _sequence_index(used, config)
    vocabs = _vocab_by_modality_from_model(PairKind(args.kind), model)
    applied = {
        r.recipe_id: [
            apply_vocabulary(seq, vocabs[r.modality]) if r.modality in vocabs else seq
            for seq in sequences[r.recipe_id]
        ]
        for r in used
    }
    records = []
    for pair, source_id, target_id in _ordered_pairs(pairs):
        alignment = decode(
            applied[source_id],
            applied[target_id],
            model,
            source_id=source_id,
            target_id=target_id,
            dish_id=pair.dish_id,
            kind=pair.kind.value,
        )
        records.append(alignment_to_record(alignment))
    write_jsonl(args.out, records)
    log.info("wrote %d alignments -> %s", len(records), args.out)
    return 0


def cmd_baseline(args, config) -> int:
    inputs = list(args.corpus) + [args.pairs]
    if args.vectors:
        inputs.append(args.vectors)
    _log_run("baseline", config, inputs)
    _, by_id = _load_corpus_files(args.corpus)
    pairs = _select_pairs(args.pairs, args.kind)
    if not pairs:
        raise NoPairs(f"no pairs of kind {args.kind!r} in {args.pairs}")
    used = [by_id[rid] for rid in sorted({p.source_id for p in pairs} | {p.target_id for p in pairs})]
    mode = TokenMode.NOUNS_VERBS if args.method == "word_vector" else None
    sequences = _sequence_index(used, config, mode=mode)

    table = None
    if args.method == "word_vector":
        if not args.vectors:
            raise ValueError("word_vector needs --vectors")
        table = baselines.load_word_vectors(args.vectors)
    elif args.method == "sentence_vector":
        if not args.vectors:
            raise ValueError("sentence_vector needs --vectors")
        table = baselines.load_sentence_vectors(args.vectors)

    seed = int(config["seed"])
    records = []
    for pair_index, (pair, source_id, target_id) in enumerate(_ordered_pairs(pairs)):
        src = sequences[source_id]
        tgt = sequences[target_id]
        n_source, n_target = len(src), len(tgt)
        if args.method == "random":
            labels = baselines.random_align(n_source, n_target, seed + pair_index)
            winners = [1.0] * n_source
        elif args.method == "uniform":
            labels = baselines.uniform_align(n_source, n_target)
            winners = [1.0] * n_source
        elif args.method == "bm25":
            labels, _ = baselines.bm25_align(
                src, tgt, k1=float(config["bm25_k1"]), b=float(config["bm25_b"])
            )
            winners = [1.0] * n_source
        elif args.method == "exact":
            labels, winners = baselines.exact_match_align(src, tgt)
        elif args.method == "tfidf":
            vectorizer = baselines.TfidfVectorizer().fit(
                [s.tokens for s in src] + [t.tokens for t in tgt]
            )
            labels, winners = baselines.tfidf_align(src, tgt, vectorizer)
            winners = [max(w, 0.0) for w in winners]
        elif args.method == "word_vector":
            labels, winners = baselines.embedding_align(
                src, tgt, table, baselines.EmbeddingMode.WORD_AVERAGE
            )
            winners = [min(max(w, 0.0), 1.0) for w in winners]
        elif args.method == "sentence_vector":
            labels, winners = baselines.embedding_align(
                src,
                tgt,
                table,
                baselines.EmbeddingMode.SENTENCE,
                source_keys=[
                    baselines.sentence_key(source_id, s.origin_index) for s in src
                ],
                target_keys=[
                    baselines.sentence_key(target_id, t.origin_index) for t in tgt
                ],
            )
            winners = [min(max(w, 0.0), 1.0) for w in winners]
        else:
            raise ValueError(f"unknown baseline {args.method!r}")
        alignment = PairwiseAlignment(
            source_id=source_id,
            target_id=target_id,
            labels=tuple(labels),
            posteriors=tuple(winners),
            dish_id=pair.dish_id,
            kind=pair.kind.value,
        )
        records.append(alignment_to_record(alignment))
    write_jsonl(args.out, records)
    log.info("wrote %d %s alignments -> %s", len(records), args.method, args.out)
    return 0


def cmd_joint(args, config) -> int:
    _log_run("joint", config, list(args.corpus) + [args.alignments])
    recipes, by_id = _load_corpus_files(args.corpus)
    alignments = [alignment_from_record(r) for r in read_jsonl(args.alignments)]
    by_dish: dict[str, list] = {}
    for alignment in alignments:
        if alignment.dish_id is None:
            raise ValueError("joint fusion needs dish_id on every alignment record")
        by_dish.setdefault(alignment.dish_id, []).append(alignment)
    recipes_by_dish: dict[str, list[Recipe]] = {}
    for recipe in recipes:
        recipes_by_dish.setdefault(recipe.dish_id, []).append(recipe)
    records = []
    for dish_id in sorted(by_dish):
        graph = build_dish_graph(
            by_dish[dish_id],
            threshold=float(config["edge_threshold"]),
            recipes=recipes_by_dish.get(dish_id, []),
        )
        forest = max_spanning_forest(graph)
        joint_sets = extract_joint_sets(
            forest,
            min_size=int(config["joint_min_size"]),
            path_cap=int(config["joint_path_cap"]),
        )
        records.append(forest_to_record(forest, by_id, joint_sets))
    write_jsonl(args.out, records)
    log.info("wrote %d dish forests -> %s", len(records), args.out)
    return 0


def cmd_eval(args, config) -> int:
    inputs = [args.alignments, args.references]
    if args.against:
        inputs.append(args.against)
    _log_run("eval", config, inputs)
    references = {
        (r.source_id, r.target_id): r for r in load_references(args.references)
    }

    def scored(path: str) -> dict[tuple[str, str], object]:
        out = {}
        for record in read_jsonl(path):
            alignment = alignment_from_record(record)
            key = (alignment.source_id, alignment.target_id)
            reference = references.get(key)
            if reference is None:
                continue
            out[key] = score_pair(list(alignment.labels), reference, mode=args.mode)
        return out

    main_scores = scored(args.alignments)
    if not main_scores:
        raise ValueError("no alignment matches any reference pair")
    keys = sorted(main_scores)
    overall = aggregate([main_scores[k] for k in keys])
    report = {
        "mode": args.mode,
        "n_pairs": len(keys),
        "aggregate": {
            "precision": overall.precision,
            "recall": overall.recall,
            "f1": overall.f1,
        },
        "pairs": [
            {
                "source_id": s,
                "target_id": t,
                "precision": main_scores[(s, t)].precision,
                "recall": main_scores[(s, t)].recall,
                "f1": main_scores[(s, t)].f1,
            }
            for s, t in keys
        ],
    }
    if args.against:
        other_scores = scored(args.against)
        common = sorted(set(keys) & set(other_scores))
        if not common:
            raise ValueError("no common scored pairs for the significance test")
        p_value = paired_bootstrap(
            [main_scores[k].f1 for k in common],
            [other_scores[k].f1 for k in common],
            resamples=int(config["bootstrap_resamples"]),
            seed=int(config["seed"]),
        )
        report["significance"] = {
            "against": Path(args.against).name,
            "common_pairs": len(common),
            "resamples": int(config["bootstrap_resamples"]),
            "p_value": p_value,
        }
    atomic_write_text(args.out, json.dumps(report, sort_keys=True, indent=2) + "\n")
    log.info(
        "scored %d pairs, f1 %.4f -> %s", len(keys), overall.f1, args.out
    )
    return 0


def cmd_extract(args, config) -> int:
    _log_run("extract", config, list(args.corpus) + [args.alignments])
    _, by_id = _load_corpus_files(args.corpus)
    alignments = [alignment_from_record(r) for r in read_jsonl(args.alignments)]
    if args.paraphrases:
        records = extraction.extract_paraphrases(
            alignments, by_id, threshold=float(config["paraphrase_threshold"])
        )
        write_jsonl(args.paraphrases, records)
        log.info("wrote %d paraphrases -> %s", len(records), args.paraphrases)
    if args.breakdowns:
        records = extraction.extract_step_breakdowns(
            alignments, by_id, threshold=float(config["breakdown_threshold"])
        )
        write_jsonl(args.breakdowns, records)
        log.info("wrote %d breakdowns -> %s", len(records), args.breakdowns)
    return 0


def cmd_curve(args, config) -> int:
    _log_run("curve", config, [args.alignments, args.references])
    alignments = [alignment_from_record(r) for r in read_jsonl(args.alignments)]
    references = {
        (r.source_id, r.target_id): r for r in load_references(args.references)
    }
    thresholds = [float(x) for x in args.thresholds.split(",") if x.strip()]
    points = extraction.tradeoff_curve(alignments, references, thresholds)
    atomic_write_text(args.out, json.dumps(points, sort_keys=True, indent=2) + "\n")
    log.info("wrote %d curve points -> %s", len(points), args.out)
    return 0


def cmd_synth(args, config) -> int:
    _log_run("synth", config, [])
    seed = int(config["seed"]) if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    dish_seeds = rng.integers(0, 2**63 - 1, size=(args.dishes, 2))
    all_records = []
    all_references = []
    for dish_index in range(args.dishes):
        dish_config = default_config(
            dish_id=f"dish{dish_index:03d}",
            n_recipes=args.recipes,
            n_steps=args.steps,
            seed=int(dish_seeds[dish_index, 0]),
            swap_rate=args.swap_rate,
            reorder_window=args.reorder_window,
            split_rate=args.split_rate,
            merge_rate=args.merge_rate,
            chat_noise=args.chat_noise,
            n_video=args.videos,
        )
        recipes, truth = synth_dish(dish_config, seed=int(dish_seeds[dish_index, 1]))
        all_records.extend(recipe_to_record(r) for r in recipes)
        all_references.extend(induced_references(recipes, truth))
    write_jsonl(args.out, all_records)
    if args.refs:
        write_jsonl(args.refs, [reference_to_record(r) for r in all_references])
    if args.lexicon:
        write_pos_lexicon(args.lexicon, default_lexicon())
    log.info(
        "wrote %d synthetic recipes (%d dishes) -> %s", len(all_records), args.dishes, args.out
    )
    return 0


def cmd_export_dot(args, config) -> int:
    _log_run("export-dot", config, [args.forest])
    records = list(read_jsonl(args.forest))
    if args.dish:
        records = [r for r in records if r["dish_id"] == args.dish]
        if not records:
            raise ValueError(f"dish {args.dish!r} not in {args.forest}")
    if len(records) != 1:
        raise ValueError(
            f"{args.forest} holds {len(records)} dishes; pick one with --dish"
        )
    forest = forest_from_record(records[0])
    atomic_write_text(args.out, export_dot(forest))
    log.info("wrote dot graph -> %s", args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recipealign",
        description="align instruction sequences across recipes of a dish",
    )
    parser.add_argument("--config", help="key = value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate, chat-filter, and normalize a recipe file")
    p.add_argument("--input", required=True)
    p.add_argument("--modality", required=True, choices=[m.value for m in Modality])
    p.add_argument("--out", required=True)
    p.add_argument("--chat-model", help="classify unlabeled video sentences with this model")
    p.add_argument("--fit-chat-model", help="also fit a chat model on labeled sentences and save it here")
    p.add_argument("--drop-chat", action="store_true", help="drop chat sentences and renumber")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pairs", help="generate surviving recipe pairs per dish")
    p.add_argument("--corpus", required=True, nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("train", help="EM-train an alignment model for one pair kind")
    p.add_argument("--corpus", required=True, nargs="+")
    p.add_argument("--pairs", required=True)
    p.add_argument("--kind", required=True, choices=[k.value for k in PairKind])
    p.add_argument("--out", required=True)
    p.add_argument("--format", default="json", choices=["json", "binary"])
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("align", help="decode both orientations of each pair")
    p.add_argument("--corpus", required=True, nargs="+")
    p.add_argument("--pairs", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--kind", required=True, choices=[k.value for k in PairKind])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("baseline", help="non-learned alignments in the same format")
    p.add_argument("--corpus", required=True, nargs="+")
    p.add_argument("--pairs", required=True)
    p.add_argument(
        "--method",
        required=True,
        choices=["random", "uniform", "bm25", "exact", "tfidf", "word_vector", "sentence_vector"],
    )
    p.add_argument("--kind", help="restrict to one pair kind")
    p.add_argument("--vectors", help="word or sentence vector file for the embedding methods")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("joint", help="fuse a dish's alignments into a forest and joint sets")
    p.add_argument("--corpus", required=True, nargs="+")
    p.add_argument("--alignments", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_joint)

    p = sub.add_parser("eval", help="score alignments against references")
    p.add_argument("--alignments", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--against", help="second alignment file for a paired bootstrap")
    p.add_argument("--mode", default="consensus", choices=["consensus", "average"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("extract", help="mine paraphrases and step breakdowns")
    p.add_argument("--corpus", required=True, nargs="+")
    p.add_argument("--alignments", required=True)
    p.add_argument("--paraphrases")
    p.add_argument("--breakdowns")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("curve", help="threshold / coverage / quality tradeoff")
    p.add_argument("--alignments", required=True)
    p.add_argument("--references", required=True)
    p.add_argument(
        "--thresholds", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("synth", help="generate synthetic dishes with exact references")
    p.add_argument("--out", required=True)
    p.add_argument("--refs", help="write induced reference alignments here")
    p.add_argument("--lexicon", help="write the generator's tag lexicon here")
    p.add_argument("--dishes", type=int, default=1)
    p.add_argument("--recipes", type=int, default=6)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--videos", type=int, default=0, help="video recipes per dish")
    p.add_argument("--swap-rate", type=float, default=0.0)
    p.add_argument("--reorder-window", type=int, default=0)
    p.add_argument("--split-rate", type=float, default=0.0)
    p.add_argument("--merge-rate", type=float, default=0.0)
    p.add_argument("--chat-noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export-dot", help="GraphViz text for one dish forest")
    p.add_argument("--forest", required=True)
    p.add_argument("--dish")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_dot)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except Exception as exc:  # noqa: BLE001 - single boundary for error lines
        error_line = dumps_canonical(
            {
                "command": getattr(args, "command", None),
                "error": type(exc).__name__,
                "message": str(exc),
            }
        )
        print(error_line, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
