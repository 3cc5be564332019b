"""Unsupervised alignment of instruction sequences across recipes of a dish."""

from .baselines import (
    EmbeddingMode,
    MissingSentenceKey,
    bm25_align,
    embedding_align,
    exact_match_align,
    random_align,
    tfidf_align,
    uniform_align,
)
from .corpus import (
    ChatLabel,
    EmptyRecipe,
    Instruction,
    MalformedRecord,
    Modality,
    Recipe,
    TokenMode,
    TokenSequence,
    Vocabulary,
    apply_vocabulary,
    build_vocabulary,
    load_corpus,
    parse_recipe_file,
    tokenize,
    tokenize_instructions,
)
from .evaluation import (
    PairScore,
    ReferenceAlignment,
    aggregate,
    consensus,
    paired_bootstrap,
    score_pair,
    weighted_prf,
)
from .extraction import extract_paraphrases, extract_step_breakdowns, tradeoff_curve
from .hmm_ibm1 import (
    AlignmentModel,
    DegenerateInput,
    PairwiseAlignment,
    TrainSchedule,
    decode,
    em_train,
    forward_backward,
)
from .joint import (
    DishGraph,
    JointForest,
    PathExplosion,
    build_dish_graph,
    export_dot,
    extract_joint_sets,
    max_spanning_forest,
)
from .model_io import load_model, save_model
from .pairing import MixedDish, PairKind, PruneConfig, RecipePair, generate_pairs
from .synth import (
    SynthConfig,
    default_config,
    default_lexicon,
    induced_reference,
    induced_references,
    synth_dish,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentModel",
    "ChatLabel",
    "DegenerateInput",
    "DishGraph",
    "EmbeddingMode",
    "EmptyRecipe",
    "Instruction",
    "JointForest",
    "MalformedRecord",
    "MissingSentenceKey",
    "MixedDish",
    "Modality",
    "PairKind",
    "PairScore",
    "PairwiseAlignment",
    "PathExplosion",
    "PruneConfig",
    "Recipe",
    "RecipePair",
    "ReferenceAlignment",
    "SynthConfig",
    "TokenMode",
    "TokenSequence",
    "TrainSchedule",
    "Vocabulary",
    "aggregate",
    "apply_vocabulary",
    "bm25_align",
    "build_dish_graph",
    "build_vocabulary",
    "consensus",
    "decode",
    "default_config",
    "default_lexicon",
    "em_train",
    "embedding_align",
    "exact_match_align",
    "export_dot",
    "extract_joint_sets",
    "extract_paraphrases",
    "extract_step_breakdowns",
    "forward_backward",
    "generate_pairs",
    "induced_reference",
    "induced_references",
    "load_corpus",
    "load_model",
    "max_spanning_forest",
    "paired_bootstrap",
    "parse_recipe_file",
    "random_align",
    "save_model",
    "score_pair",
    "synth_dish",
    "tfidf_align",
    "tokenize",
    "tokenize_instructions",
    "tradeoff_curve",
    "uniform_align",
    "weighted_prf",
    "__version__",
]
