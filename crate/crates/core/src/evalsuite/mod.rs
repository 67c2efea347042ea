//! Evaluation battery over any [`Embedder`].
//!
//! Every evaluation is read-only over the model. Reports carry a
//! fingerprint (model hash, distance, options) and are bitwise reproducible
//! for equal inputs.

mod benchmarks;
mod correlation;
mod l2p;
mod nel;
mod simmatrix;

use std::collections::BTreeMap;
use std::fmt;
use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use benchmarks::{
    parse_concept_pairs, parse_nel, parse_nli, parse_sts, ConceptPairBenchmark, NelMention,
    NliTriplet, Scale, TermPair,
};
pub use correlation::{midranks, pearson, spearman};
pub use l2p::{
    build_l2p, eval_l2p, eval_l2p_ranks, L2pBenchmark, L2pCandidate, L2pOptions, L2pQuery,
    ParentMode, DEFAULT_K_MISS,
};
pub use nel::{build_concept_index, eval_nel, render_mention, CandidateIndex};
pub use simmatrix::{similarity_matrix_report, LabeledTerm, SimilarityMatrix};

use crate::ontograph::GraphError;
use crate::trainer::{Encoder, StsPair, TrainError};
use crate::vecindex::IndexError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0} input sequence is constant; correlation undefined")]
    Constant(&'static str),
    #[error("model predictions are constant; correlation undefined")]
    ConstantPredictions,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 points, got {0}")]
    TooFew(usize),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("gold concept `{0}` is not in the candidate index")]
    UnknownGold(String),
    #[error("graph has no hierarchical edges")]
    NoHierarchy,
    #[error("no leaf queries with a non-leaf parent")]
    NoLeaves,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Encode(#[from] TrainError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Anything that maps text to a unit vector.
pub trait Embedder: Sync {
    fn embed(&self, text: &str) -> Result<Vec<f32>, EvalError>;
    /// Stable identifier of the model parameters.
    fn fingerprint(&self) -> String;
}

impl Embedder for Encoder<f32> {
    fn embed(&self, text: &str) -> Result<Vec<f32>, EvalError> {
        Ok(self.encode(text)?)
    }

    fn fingerprint(&self) -> String {
        self.checksum()
    }
}

impl<E: Embedder + ?Sized> Embedder for &E {
    fn embed(&self, text: &str) -> Result<Vec<f32>, EvalError> {
        (**self).embed(text)
    }
    fn fingerprint(&self) -> String {
        (**self).fingerprint()
    }
}

/// Embed texts in parallel, preserving order.
pub fn embed_all<E: Embedder + ?Sized>(
    model: &E,
    texts: &[&str],
) -> Result<Vec<Vec<f32>>, EvalError> {
    texts.par_iter().map(|t| model.embed(t)).collect()
}

/// Cosine in f64. Bitwise-identical vectors score exactly 1.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    if a == b {
        return 1.0;
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    dot / (na.sqrt() * nb.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    Cosine,
    Euclidean,
    Manhattan,
}

impl Distance {
    pub const ALL: [Distance; 3] = [Distance::Cosine, Distance::Euclidean, Distance::Manhattan];

    /// Higher means more similar; distances are negated.
    pub fn similarity(self, a: &[f32], b: &[f32]) -> f64 {
        match self {
            Distance::Cosine => cosine(a, b),
            Distance::Euclidean => -a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
                .sum::<f64>()
                .sqrt(),
            Distance::Manhattan => -a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x as f64 - y as f64).abs())
                .sum::<f64>(),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distance::Cosine => "cosine",
            Distance::Euclidean => "euclidean",
            Distance::Manhattan => "manhattan",
        })
    }
}

impl std::str::FromStr for Distance {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cosine" => Ok(Distance::Cosine),
            "euclidean" => Ok(Distance::Euclidean),
            "manhattan" => Ok(Distance::Manhattan),
            other => Err(format!("unknown distance `{other}`")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub options: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    /// Name of the headline metric.
    pub metric: String,
    pub n: usize,
    /// All metric values; the headline one included.
    #[serde(flatten)]
    pub metrics: BTreeMap<String, f64>,
    pub fingerprint: Fingerprint,
}

impl EvalReport {
    fn new(dataset: &str, metric: &str, n: usize, fingerprint: Fingerprint) -> Self {
        EvalReport {
            dataset: dataset.to_owned(),
            metric: metric.to_owned(),
            n,
            metrics: BTreeMap::new(),
            fingerprint,
        }
    }

    fn with(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_owned(), value);
        self
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn headline(&self) -> f64 {
        self.metrics[&self.metric]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} (n={})\n", self.dataset, self.n);
        for (k, v) in &self.metrics {
            let mark = if *k == self.metric { "*" } else { " " };
            out.push_str(&format!("{mark} {k:<20} {v:.6}\n"));
        }
        out.push_str(&format!("  model {}\n", self.fingerprint.model));
        if let Some(d) = &self.fingerprint.distance {
            out.push_str(&format!("  distance {d}\n"));
        }
        for (k, v) in &self.fingerprint.options {
            out.push_str(&format!("  {k} = {v}\n"));
        }
        out
    }
}

/// Spearman correlation between model similarity and gold relatedness.
pub fn eval_concept_similarity<E: Embedder + ?Sized>(
    model: &E,
    benchmark: &ConceptPairBenchmark,
    distance: Distance,
) -> Result<EvalReport, EvalError> {
    if benchmark.rows.is_empty() {
        return Err(EvalError::Empty("benchmark"));
    }
    let mut texts: Vec<&str> = Vec::with_capacity(benchmark.rows.len() * 2);
    for r in &benchmark.rows {
        texts.push(&r.first);
        texts.push(&r.second);
    }
    let vecs = embed_all(model, &texts)?;
    let predicted: Vec<f64> = vecs
        .chunks(2)
        .map(|p| distance.similarity(&p[0], &p[1]))
        .collect();
    let gold: Vec<f64> = benchmark.rows.iter().map(|r| r.gold).collect();
    let rho = spearman(&predicted, &gold)?;
    Ok(EvalReport::new(
        &benchmark.name,
        "spearman",
        benchmark.rows.len(),
        Fingerprint {
            model: model.fingerprint(),
            distance: Some(distance.to_string()),
            ..Fingerprint::default()
        },
    )
    .with("spearman", rho))
}

/// Pearson correlation between pair cosine and gold score.
pub fn eval_sts<E: Embedder + ?Sized>(model: &E, pairs: &[StsPair]) -> Result<EvalReport, EvalError> {
    eval_sts_named(model, pairs, "sts")
}

pub fn eval_sts_named<E: Embedder + ?Sized>(
    model: &E,
    pairs: &[StsPair],
    dataset: &str,
) -> Result<EvalReport, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty("STS set"));
    }
    let mut texts: Vec<&str> = Vec::with_capacity(pairs.len() * 2);
    for p in pairs {
        texts.push(&p.first);
        texts.push(&p.second);
    }
    let vecs = embed_all(model, &texts)?;
    let predicted: Vec<f64> = vecs.chunks(2).map(|p| cosine(&p[0], &p[1])).collect();
    let gold: Vec<f64> = pairs.iter().map(|p| p.score).collect();
    let r = match pearson(&predicted, &gold) {
        Err(EvalError::Constant("first")) => return Err(EvalError::ConstantPredictions),
        other => other?,
    };
    Ok(EvalReport::new(
        dataset,
        "pearson",
        pairs.len(),
        Fingerprint {
            model: model.fingerprint(),
            distance: Some("cosine".into()),
            ..Fingerprint::default()
        },
    )
    .with("pearson", r))
}

/// Share of triplets whose entailed hypothesis is strictly closer to the
/// premise than the contradicted one. Exact ties count as failures and are
/// reported under `ties`.
pub fn eval_nli_triplets<E: Embedder + ?Sized>(
    model: &E,
    triplets: &[NliTriplet],
) -> Result<EvalReport, EvalError> {
    if triplets.is_empty() {
        return Err(EvalError::Empty("triplet set"));
    }
    let outcomes: Vec<(bool, bool)> = triplets
        .par_iter()
        .map(|t| {
            let p = model.embed(t.premise())?;
            let e = model.embed(t.entailed())?;
            let c = model.embed(t.contradicted())?;
            let (se, sc) = (cosine(&p, &e), cosine(&p, &c));
            Ok((se > sc, se == sc))
        })
        .collect::<Result<_, EvalError>>()?;
    let correct = outcomes.iter().filter(|o| o.0).count();
    let ties = outcomes.iter().filter(|o| o.1).count();
    let n = triplets.len();
    Ok(EvalReport::new(
        "nli-triplets",
        "accuracy",
        n,
        Fingerprint {
            model: model.fingerprint(),
            distance: Some("cosine".into()),
            ..Fingerprint::default()
        },
    )
    .with("accuracy", correct as f64 / n as f64)
    .with("ties", ties as f64))
}
