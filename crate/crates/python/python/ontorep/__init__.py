"""Ontology-grounded contrastive embeddings."""

from ._ontorep import (
    EmbeddingIndex,
    Encoder,
    Ontology,
    __version__,
    batch_accuracy,
    evaluate_l2p,
    evaluate_nel,
    evaluate_nli,
    evaluate_sts,
    generate_descriptions,
    load_pairs,
    pearson,
    sample_pairs,
    spearman,
    train,
)

__all__ = [
    "EmbeddingIndex",
    "Encoder",
    "Ontology",
    "__version__",
    "batch_accuracy",
    "evaluate_l2p",
    "evaluate_nel",
    "evaluate_nli",
    "evaluate_sts",
    "generate_descriptions",
    "load_pairs",
    "pearson",
    "sample_pairs",
    "spearman",
    "train",
]
