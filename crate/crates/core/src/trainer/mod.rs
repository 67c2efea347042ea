//! Bi-encoder training: InfoNCE pre-training on name ↔ definition/description
//! pairs and cosine-regression finetuning on STS pairs.
//!
//! Steps are sequential over batches. Within a step the forward passes run
//! in parallel; gradients are reduced in batch order so results do not
//! depend on the thread count.

mod checkpoint;
mod encoder;
mod loss;
mod optim;

use std::fmt::Debug;
use std::io;
use std::ops::{Index, IndexMut};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub(crate) use checkpoint::read_f32s;
pub use encoder::{bucket_of, tokenize, Encoder, Forward, Gradients};
pub use loss::{infonce_loss, InfoNce};
pub use optim::{adamw_step, lr_at, AdamW, OptimState};

use crate::digest::fnv1a64;
use crate::pairset::TrainingPair;
use crate::SeededRng;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("text is empty after normalization: {0:?}")]
    EmptyText(String),
    #[error("projected embedding has zero norm")]
    ZeroNorm,
    #[error("projected embedding is not finite")]
    NonFiniteEmbedding,
    #[error("temperature must be positive, got {0}")]
    BadTemperature(f64),
    #[error("in-batch negatives need at least 2 rows, got {0}")]
    BatchTooSmall(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite gradient in tensor {tensor} at index {index}: {value}")]
    NonFiniteGradient {
        tensor: usize,
        index: usize,
        value: f64,
    },
    #[error("non-finite loss at step {step} (batch {batch})")]
    NonFiniteLoss { step: usize, batch: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("STS score {0} outside [0, 5]")]
    ScoreRange(f64),
    #[error("best-epoch selection requested but the dev split is empty")]
    EmptyDev,
    #[error("dev evaluation failed: {0}")]
    Eval(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl TrainError {
    /// Errors caused by numerical blow-up rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            TrainError::NonFiniteGradient { .. }
                | TrainError::NonFiniteLoss { .. }
                | TrainError::NonFiniteEmbedding
        )
    }
}

/// Float types the encoder and loss are generic over.
pub trait Scalar: num_traits::Float + Send + Sync + Debug + 'static {
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub warmup_fraction: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub seed: u64,
    pub temperature: f32,
    pub buckets: usize,
    pub dim: usize,
    /// Half-width of the uniform embedding initialization.
    pub init_scale: f64,
}

impl TrainConfig {
    pub fn new(seed: u64) -> Self {
        TrainConfig {
            batch_size: 64,
            learning_rate: 2e-5,
            warmup_fraction: 0.05,
            weight_decay: 0.01,
            epochs: 1,
            seed,
            temperature: 0.05,
            buckets: 1 << 15,
            dim: 64,
            init_scale: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_owned()));
        if self.batch_size < 2 {
            return bad("batch size must be at least 2");
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return bad("warmup fraction must lie in [0, 1)");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad("weight decay must be non-negative");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.temperature > 0.0) {
            return Err(TrainError::BadTemperature(self.temperature as f64));
        }
        if self.buckets == 0 || self.dim == 0 {
            return bad("buckets and dim must be positive");
        }
        Ok(())
    }

    fn adamw(&self) -> AdamW {
        AdamW {
            weight_decay: self.weight_decay,
            ..AdamW::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: usize,
    pub loss: f64,
    pub lr: f64,
}

pub fn curve_to_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("step,loss,lr\n");
    for p in curve {
        out.push_str(&format!("{},{},{}\n", p.step, p.loss, p.lr));
    }
    out
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub encoder: Encoder<f32>,
    pub curve: Vec<CurvePoint>,
}

/// Shuffled batches of indices; a trailing batch of fewer than two rows is
/// dropped because it has no negatives.
fn epoch_batches(n: usize, batch_size: usize, seed: u64, epoch: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SeededRng::seed_from_u64(seed);
    rng.set_stream(1000 + epoch as u64);
    order.shuffle(&mut rng);
    order
        .chunks(batch_size)
        .filter(|c| c.len() >= 2)
        .map(<[usize]>::to_vec)
        .collect()
}

fn batch_fingerprint(pairs: &[TrainingPair], batch: &[usize]) -> String {
    let mut bytes = Vec::new();
    for &i in batch {
        bytes.extend_from_slice(pairs[i].anchor.as_bytes());
        bytes.push(0);
        bytes.extend_from_slice(pairs[i].positive.as_bytes());
        bytes.push(0);
    }
    format!("{:016x}", fnv1a64(&bytes))
}

fn forward_all<T: Scalar>(
    encoder: &Encoder<T>,
    texts: &[&str],
) -> Result<Vec<Forward<T>>, TrainError> {
    texts.par_iter().map(|t| encoder.forward(t)).collect()
}

/// Forward, loss and backward for one contrastive batch. Returns the loss
/// and fills `grads` (which is zeroed first).
pub fn contrastive_gradients<T: Scalar>(
    encoder: &Encoder<T>,
    anchors: &[&str],
    positives: &[&str],
    grads: &mut Gradients<T>,
) -> Result<T, TrainError> {
    let fa = forward_all(encoder, anchors)?;
    let fp = forward_all(encoder, positives)?;
    let d = encoder.dim();
    let out = infonce_loss(
        &Encoder::stack(&fa, d),
        &Encoder::stack(&fp, d),
        T::from_f64(encoder.temperature() as f64),
    )?;
    grads.embeddings.iter_mut().for_each(|g| *g = T::zero());
    grads.projection.iter_mut().for_each(|g| *g = T::zero());
    for (i, f) in fa.iter().enumerate() {
        encoder.backward(f, out.grad_anchors.row(i), grads);
    }
    for (i, f) in fp.iter().enumerate() {
        encoder.backward(f, out.grad_positives.row(i), grads);
    }
    Ok(out.loss)
}

fn check_pairs(pairs: &[TrainingPair], batch_size: usize) -> Result<(), TrainError> {
    if pairs.is_empty() {
        return Err(TrainError::Config("pair set is empty".into()));
    }
    if batch_size > pairs.len() {
        return Err(TrainError::Config(format!(
            "batch size {batch_size} exceeds {} pairs",
            pairs.len()
        )));
    }
    Ok(())
}

/// Train a fresh encoder on `pairs`.
pub fn train(pairs: &[TrainingPair], config: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    let encoder = Encoder::new(
        config.buckets,
        config.dim,
        config.temperature,
        config.init_scale,
        config.seed,
    );
    train_from(encoder, pairs, config)
}

/// Continue training an existing encoder. `buckets`, `dim` and
/// `init_scale` in `config` are ignored.
pub fn train_from(
    mut encoder: Encoder<f32>,
    pairs: &[TrainingPair],
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    check_pairs(pairs, config.batch_size)?;
    encoder.temperature = config.temperature;
    let hp = config.adamw();
    let mut state = OptimState::new(&[encoder.embeddings.len(), encoder.projection.len()]);
    let mut grads = Gradients::zeros_like(&encoder);

    let per_epoch: Vec<Vec<Vec<usize>>> = (0..config.epochs)
        .map(|e| epoch_batches(pairs.len(), config.batch_size, config.seed, e))
        .collect();
    let total_steps: usize = per_epoch.iter().map(Vec::len).sum();
    let mut curve = Vec::with_capacity(total_steps);
    let mut step = 0;
    for batches in &per_epoch {
        for batch in batches {
            let anchors: Vec<&str> = batch.iter().map(|&i| pairs[i].anchor.as_str()).collect();
            let positives: Vec<&str> =
                batch.iter().map(|&i| pairs[i].positive.as_str()).collect();
            let loss = contrastive_gradients(&encoder, &anchors, &positives, &mut grads)?;
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    step,
                    batch: batch_fingerprint(pairs, batch),
                });
            }
            let lr = lr_at(step, total_steps, config.learning_rate, config.warmup_fraction);
            let [emb, proj] = encoder.params_mut();
            adamw_step(
                &mut [emb, proj],
                &[&grads.embeddings, &grads.projection],
                &mut state,
                lr,
                &hp,
            )?;
            curve.push(CurvePoint {
                step,
                loss: loss as f64,
                lr,
            });
            step += 1;
        }
        log::debug!("epoch done at step {step}");
    }
    debug_assert!(encoder.all_finite());
    Ok(TrainOutcome { encoder, curve })
}

/// Fraction of anchors whose own positive scores strictly highest among the
/// positives of their batch. Batches are consecutive chunks of `pairs`; a
/// trailing chunk of fewer than two rows is ignored.
pub fn in_batch_accuracy(
    encoder: &Encoder<f32>,
    pairs: &[TrainingPair],
    batch_size: usize,
) -> Result<f64, TrainError> {
    let mut hits = 0usize;
    let mut total = 0usize;
    for chunk in pairs.chunks(batch_size).filter(|c| c.len() >= 2) {
        let anchors: Vec<&str> = chunk.iter().map(|p| p.anchor.as_str()).collect();
        let positives: Vec<&str> = chunk.iter().map(|p| p.positive.as_str()).collect();
        let fa = forward_all(encoder, &anchors)?;
        let fp = forward_all(encoder, &positives)?;
        for (i, a) in fa.iter().enumerate() {
            let score = |f: &Forward<f32>| -> f32 {
                a.output.iter().zip(&f.output).map(|(x, y)| x * y).sum()
            };
            let own = score(&fp[i]);
            let beaten = fp
                .iter()
                .enumerate()
                .any(|(j, f)| j != i && score(f) >= own);
            hits += usize::from(!beaten);
            total += 1;
        }
    }
    if total == 0 {
        return Err(TrainError::BatchTooSmall(pairs.len()));
    }
    Ok(hits as f64 / total as f64)
}

/// Sentence pair with a gold similarity in `[0, 5]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StsPair {
    pub first: String,
    pub second: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinetuneConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub warmup_fraction: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Keep the weights with the best dev Pearson instead of the last ones.
    pub select_best: bool,
}

impl FinetuneConfig {
    pub fn new(seed: u64) -> Self {
        FinetuneConfig {
            batch_size: 64,
            learning_rate: 6e-6,
            warmup_fraction: 0.05,
            weight_decay: 0.01,
            epochs: 10,
            seed,
            select_best: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 0 is the encoder before finetuning.
    pub epoch: usize,
    pub train_loss: Option<f64>,
    pub dev_pearson: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct FinetuneOutcome {
    pub encoder: Encoder<f32>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
}

/// Mean squared error between pair cosine and `score / 5`, with gradients.
pub fn sts_gradients<T: Scalar>(
    encoder: &Encoder<T>,
    batch: &[&StsPair],
    grads: &mut Gradients<T>,
) -> Result<T, TrainError> {
    let firsts: Vec<&str> = batch.iter().map(|p| p.first.as_str()).collect();
    let seconds: Vec<&str> = batch.iter().map(|p| p.second.as_str()).collect();
    let f1 = forward_all(encoder, &firsts)?;
    let f2 = forward_all(encoder, &seconds)?;
    grads.embeddings.iter_mut().for_each(|g| *g = T::zero());
    grads.projection.iter_mut().for_each(|g| *g = T::zero());
    let n = T::from_usize(batch.len());
    let mut loss = T::zero();
    for ((a, b), pair) in f1.iter().zip(&f2).zip(batch) {
        let cos = a
            .output
            .iter()
            .zip(&b.output)
            .fold(T::zero(), |acc, (&x, &y)| acc + x * y);
        let diff = cos - T::from_f64(pair.score / 5.0);
        loss = loss + diff * diff / n;
        let dcos = T::from_f64(2.0) * diff / n;
        let ga: Vec<T> = b.output.iter().map(|&y| dcos * y).collect();
        let gb: Vec<T> = a.output.iter().map(|&x| dcos * x).collect();
        encoder.backward(a, &ga, grads);
        encoder.backward(b, &gb, grads);
    }
    Ok(loss)
}

fn dev_pearson(encoder: &Encoder<f32>, dev: &[StsPair]) -> Result<f64, TrainError> {
    crate::evalsuite::eval_sts(encoder, dev)
        .map(|r| r.value("pearson").expect("pearson metric"))
        .map_err(|e| TrainError::Eval(e.to_string()))
}

/// Cosine-regression finetuning with per-epoch dev evaluation.
pub fn finetune_sts(
    encoder: Encoder<f32>,
    train_pairs: &[StsPair],
    dev: &[StsPair],
    config: &FinetuneConfig,
) -> Result<FinetuneOutcome, TrainError> {
    finetune_sts_with(encoder, train_pairs, dev, config, |_, _| Ok(()))
}

/// As [`finetune_sts`], calling `on_epoch` after every epoch (epoch 0 is the
/// starting encoder).
pub fn finetune_sts_with(
    mut encoder: Encoder<f32>,
    train_pairs: &[StsPair],
    dev: &[StsPair],
    config: &FinetuneConfig,
    mut on_epoch: impl FnMut(&EpochRecord, &Encoder<f32>) -> Result<(), TrainError>,
) -> Result<FinetuneOutcome, TrainError> {
    for p in train_pairs.iter().chain(dev) {
        if !(0.0..=5.0).contains(&p.score) {
            return Err(TrainError::ScoreRange(p.score));
        }
    }
    if config.select_best && dev.is_empty() {
        return Err(TrainError::EmptyDev);
    }
    if config.batch_size == 0 || config.epochs == 0 || train_pairs.is_empty() {
        return Err(TrainError::Config(
            "finetuning needs pairs, epochs and a positive batch size".into(),
        ));
    }

    let hp = AdamW {
        weight_decay: config.weight_decay,
        ..AdamW::default()
    };
    let mut state = OptimState::new(&[encoder.embeddings.len(), encoder.projection.len()]);
    let mut grads = Gradients::zeros_like(&encoder);
    let score_dev = |enc: &Encoder<f32>| -> Result<Option<f64>, TrainError> {
        if dev.is_empty() {
            Ok(None)
        } else {
            dev_pearson(enc, dev).map(Some)
        }
    };

    let initial = EpochRecord {
        epoch: 0,
        train_loss: None,
        dev_pearson: score_dev(&encoder)?,
    };
    on_epoch(&initial, &encoder)?;
    let mut best = (0usize, initial.dev_pearson, encoder.clone());
    let mut history = vec![initial];

    let steps_per_epoch = train_pairs.len().div_ceil(config.batch_size);
    let total_steps = steps_per_epoch * config.epochs;
    let mut step = 0;
    for epoch in 1..=config.epochs {
        let mut order: Vec<usize> = (0..train_pairs.len()).collect();
        let mut rng = SeededRng::seed_from_u64(config.seed);
        rng.set_stream(epoch as u64);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&StsPair> = chunk.iter().map(|&i| &train_pairs[i]).collect();
            let loss = sts_gradients(&encoder, &batch, &mut grads)?;
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    step,
                    batch: format!("epoch {epoch}"),
                });
            }
            epoch_loss += loss as f64 * chunk.len() as f64;
            let lr = lr_at(step, total_steps, config.learning_rate, config.warmup_fraction);
            let [emb, proj] = encoder.params_mut();
            adamw_step(
                &mut [emb, proj],
                &[&grads.embeddings, &grads.projection],
                &mut state,
                lr,
                &hp,
            )?;
            step += 1;
        }
        let record = EpochRecord {
            epoch,
            train_loss: Some(epoch_loss / train_pairs.len() as f64),
            dev_pearson: score_dev(&encoder)?,
        };
        on_epoch(&record, &encoder)?;
        if let (Some(score), Some(best_score)) = (record.dev_pearson, best.1) {
            if score > best_score {
                best = (epoch, Some(score), encoder.clone());
            }
        }
        history.push(record);
    }

    if config.select_best {
        Ok(FinetuneOutcome {
            encoder: best.2,
            history,
            best_epoch: best.0,
        })
    } else {
        Ok(FinetuneOutcome {
            encoder,
            history,
            best_epoch: config.epochs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairset::PairKind;

    fn pair(anchor: &str, positive: &str) -> TrainingPair {
        TrainingPair {
            anchor: anchor.into(),
            positive: positive.into(),
            concept_id: "c".into(),
            kind: PairKind::Description,
        }
    }

    fn toy_pairs() -> Vec<TrainingPair> {
        let words = [
            "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel",
        ];
        let mut out = Vec::new();
        for rep in 0..40 {
            for (i, w) in words.iter().enumerate() {
                let other = words[(i + 3) % words.len()];
                out.push(pair(w, &format!("thing which relates to {other} {rep}")));
            }
        }
        out
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            batch_size: 8,
            learning_rate: 1e-2,
            buckets: 256,
            dim: 16,
            init_scale: 0.1,
            epochs: 2,
            ..TrainConfig::new(3)
        }
    }

    #[test]
    fn loss_decreases_and_is_deterministic() {
        let pairs = toy_pairs();
        let a = train(&pairs, &small_config()).unwrap();
        let first: f64 = a.curve[..5].iter().map(|p| p.loss).sum();
        let last: f64 = a.curve[a.curve.len() - 5..].iter().map(|p| p.loss).sum();
        assert!(last < first, "{first} -> {last}");
        let b = train(&pairs, &small_config()).unwrap();
        assert_eq!(a.encoder.to_checkpoint_bytes(), b.encoder.to_checkpoint_bytes());
        assert!(a.encoder.all_finite());
    }

    #[test]
    fn lr_curve_follows_schedule() {
        let out = train(&toy_pairs(), &small_config()).unwrap();
        assert_eq!(out.curve[0].lr, 0.0);
        let peak = out.curve.iter().map(|p| p.lr).fold(0.0, f64::max);
        assert!((peak - 1e-2).abs() < 1e-12);
        assert!(curve_to_csv(&out.curve).starts_with("step,loss,lr\n0,"));
    }

    #[test]
    fn config_validation() {
        let pairs = toy_pairs();
        let mut c = small_config();
        c.batch_size = 1;
        assert!(matches!(train(&pairs, &c), Err(TrainError::Config(_))));
        let mut c = small_config();
        c.warmup_fraction = 1.0;
        assert!(train(&pairs, &c).is_err());
        let mut c = small_config();
        c.batch_size = pairs.len() + 1;
        assert!(train(&pairs, &c).is_err());
        assert!(train(&[], &small_config()).is_err());
    }

    #[test]
    fn unit_norm_survives_training() {
        let out = train(&toy_pairs(), &small_config()).unwrap();
        for p in toy_pairs().iter().take(20) {
            let v = out.encoder.encode(&p.positive).unwrap();
            let n: f64 = v.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sts_identical_texts_have_zero_loss() {
        let enc = Encoder::<f64>::new(64, 8, 0.05, 0.1, 0);
        let p = StsPair {
            first: "chest pain".into(),
            second: "Chest pain".into(),
            score: 5.0,
        };
        let mut g = Gradients::zeros_like(&enc);
        let loss = sts_gradients(&enc, &[&p], &mut g).unwrap();
        assert!(loss.abs() < 1e-24);
        let q = StsPair {
            score: 0.0,
            ..p.clone()
        };
        // target 0 against cosine 1
        assert!((sts_gradients(&enc, &[&q], &mut g).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finetune_errors() {
        let enc = Encoder::<f32>::new(64, 8, 0.05, 0.1, 0);
        let p = StsPair {
            first: "a".into(),
            second: "b".into(),
            score: 6.0,
        };
        let cfg = FinetuneConfig::new(0);
        assert!(matches!(
            finetune_sts(enc.clone(), std::slice::from_ref(&p), &[], &cfg),
            Err(TrainError::ScoreRange(_))
        ));
        let ok = StsPair { score: 2.0, ..p };
        assert!(matches!(
            finetune_sts(enc, &[ok], &[], &cfg),
            Err(TrainError::EmptyDev)
        ));
    }
}
