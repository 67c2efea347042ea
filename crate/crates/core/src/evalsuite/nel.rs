//! Entity linking by nearest concept name.

use std::collections::HashSet;

use rayon::prelude::*;

use super::{embed_all, EvalError, EvalReport, Embedder, Fingerprint, NelMention};
use crate::ontograph::{ConceptId, OntologyGraph};
use crate::vecindex::EmbeddingMatrix;

const SYNONYM_TAG: &str = "#syn";

/// Query text for a mention in context.
pub fn render_mention(mention: &str, sentence: &str) -> String {
    format!("{mention} [SEP] (context: {sentence})")
}

/// Embedded concept names with the concept each row belongs to.
///
/// Row keys are `{id}` for canonical names and `{id}#syn{k}` for the k-th
/// additional synonym.
#[derive(Clone, Debug)]
pub struct CandidateIndex {
    pub matrix: EmbeddingMatrix,
    pub concepts: Vec<ConceptId>,
}

impl CandidateIndex {
    pub fn from_matrix(matrix: EmbeddingMatrix) -> Self {
        let concepts = matrix
            .ids()
            .iter()
            .map(|key| {
                let id = match key.rfind(SYNONYM_TAG) {
                    Some(at) if key[at + SYNONYM_TAG.len()..].parse::<usize>().is_ok() => {
                        &key[..at]
                    }
                    _ => key.as_str(),
                };
                ConceptId::from(id)
            })
            .collect();
        CandidateIndex { matrix, concepts }
    }

    pub fn contains(&self, id: &ConceptId) -> bool {
        self.concepts.contains(id)
    }
}

pub fn build_concept_index<E: Embedder + ?Sized>(
    model: &E,
    graph: &OntologyGraph,
    synonyms: bool,
) -> Result<CandidateIndex, EvalError> {
    let mut keys = Vec::new();
    let mut texts: Vec<&str> = Vec::new();
    for (id, c) in graph.sorted_ids() {
        let names = if synonyms { &c.names[..] } else { &c.names[..1] };
        for (k, name) in names.iter().enumerate() {
            keys.push(if k == 0 {
                id.to_string()
            } else {
                format!("{id}{SYNONYM_TAG}{k}")
            });
            texts.push(name);
        }
    }
    if keys.is_empty() {
        return Err(EvalError::Empty("concept index"));
    }
    let rows = embed_all(model, &texts)?;
    Ok(CandidateIndex::from_matrix(EmbeddingMatrix::from_rows(
        keys, rows,
    )?))
}

/// Top-1 accuracy of rendered mentions against the index.
pub fn eval_nel<E: Embedder + ?Sized>(
    model: &E,
    mentions: &[NelMention],
    index: &CandidateIndex,
) -> Result<EvalReport, EvalError> {
    if mentions.is_empty() {
        return Err(EvalError::Empty("mention set"));
    }
    let known: HashSet<&ConceptId> = index.concepts.iter().collect();
    if let Some(m) = mentions.iter().find(|m| !known.contains(&m.gold)) {
        return Err(EvalError::UnknownGold(m.gold.to_string()));
    }
    let hits: Vec<bool> = mentions
        .par_iter()
        .map(|m| {
            let q = model.embed(&render_mention(&m.mention, &m.sentence))?;
            let top = index.matrix.topk(&q, 1)?;
            Ok(index.concepts[top.hits[0].row] == m.gold)
        })
        .collect::<Result<_, EvalError>>()?;
    let correct = hits.iter().filter(|&&h| h).count();
    let mut fingerprint = Fingerprint {
        model: model.fingerprint(),
        distance: Some("cosine".into()),
        ..Fingerprint::default()
    };
    fingerprint
        .options
        .insert("index_rows".into(), index.matrix.len().to_string());
    Ok(EvalReport::new("nel", "accuracy", mentions.len(), fingerprint)
        .with("accuracy", correct as f64 / mentions.len() as f64))
}
