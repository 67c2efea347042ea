//! Hashed bag-of-tokens encoder.
//!
//! `text → lowercase tokens → FNV-1a bucket ids → mean of bucket rows →
//! linear projection → L2 normalization`. The encoder is generic over the
//! float type so gradient checks can run in `f64`; training uses `f32`.

use rand::{Rng, SeedableRng};

use super::{Matrix, Scalar, TrainError};
use crate::digest::fnv1a64;
use crate::SeededRng;

/// Lowercased runs of alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

pub fn bucket_of(token: &str, buckets: usize) -> usize {
    (fnv1a64(token.as_bytes()) % buckets as u64) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct Encoder<T = f32> {
    pub(crate) buckets: usize,
    pub(crate) dim: usize,
    pub(crate) temperature: f32,
    /// `buckets × dim`, row-major.
    pub(crate) embeddings: Vec<T>,
    /// `dim × dim`, row-major; output = pooled · projection.
    pub(crate) projection: Vec<T>,
}

/// Cached intermediate values of one forward pass.
#[derive(Clone, Debug)]
pub struct Forward<T> {
    pub buckets: Vec<usize>,
    pub pooled: Vec<T>,
    pub norm: T,
    pub output: Vec<T>,
}

/// Dense gradient buffers matching the encoder parameters.
#[derive(Clone, Debug)]
pub struct Gradients<T> {
    pub embeddings: Vec<T>,
    pub projection: Vec<T>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(enc: &Encoder<T>) -> Self {
        Gradients {
            embeddings: vec![T::zero(); enc.embeddings.len()],
            projection: vec![T::zero(); enc.projection.len()],
        }
    }
}

impl<T: Scalar> Encoder<T> {
    /// Embeddings uniform in `[-init_scale, init_scale]`, identity projection.
    pub fn new(buckets: usize, dim: usize, temperature: f32, init_scale: f64, seed: u64) -> Self {
        assert!(buckets > 0 && dim > 0, "encoder needs positive shape");
        let mut rng = SeededRng::seed_from_u64(seed);
        let embeddings = (0..buckets * dim)
            .map(|_| T::from_f64(rng.random_range(-init_scale..=init_scale)))
            .collect();
        let mut projection = vec![T::zero(); dim * dim];
        for i in 0..dim {
            projection[i * dim + i] = T::one();
        }
        Encoder {
            buckets,
            dim,
            temperature,
            embeddings,
            projection,
        }
    }

    pub fn from_parts(
        buckets: usize,
        dim: usize,
        temperature: f32,
        embeddings: Vec<T>,
        projection: Vec<T>,
    ) -> Result<Self, TrainError> {
        if buckets == 0 || dim == 0 {
            return Err(TrainError::Shape("encoder shape must be positive".into()));
        }
        if embeddings.len() != buckets * dim || projection.len() != dim * dim {
            return Err(TrainError::Shape(format!(
                "expected {}+{} parameters, got {}+{}",
                buckets * dim,
                dim * dim,
                embeddings.len(),
                projection.len()
            )));
        }
        Ok(Encoder {
            buckets,
            dim,
            temperature,
            embeddings,
            projection,
        })
    }

    pub fn buckets(&self) -> usize {
        self.buckets
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn temperature(&self) -> f32 {
        self.temperature
    }

    pub fn embeddings(&self) -> &[T] {
        &self.embeddings
    }

    pub fn projection(&self) -> &[T] {
        &self.projection
    }

    pub fn params_mut(&mut self) -> [&mut [T]; 2] {
        [&mut self.embeddings, &mut self.projection]
    }

    pub fn all_finite(&self) -> bool {
        self.embeddings
            .iter()
            .chain(&self.projection)
            .all(|x| x.is_finite())
    }

    /// Sorted bucket ids, so pooling is bitwise independent of token order.
    pub fn bucket_ids(&self, text: &str) -> Result<Vec<usize>, TrainError> {
        let mut ids: Vec<usize> = tokenize(text)
            .iter()
            .map(|t| bucket_of(t, self.buckets))
            .collect();
        if ids.is_empty() {
            return Err(TrainError::EmptyText(text.to_owned()));
        }
        ids.sort_unstable();
        Ok(ids)
    }

    pub fn forward(&self, text: &str) -> Result<Forward<T>, TrainError> {
        let buckets = self.bucket_ids(text)?;
        self.forward_buckets(buckets)
    }

    pub fn forward_buckets(&self, buckets: Vec<usize>) -> Result<Forward<T>, TrainError> {
        let d = self.dim;
        let mut pooled = vec![T::zero(); d];
        for &b in &buckets {
            for (p, &e) in pooled.iter_mut().zip(&self.embeddings[b * d..(b + 1) * d]) {
                *p = *p + e;
            }
        }
        let inv = T::one() / T::from_usize(buckets.len());
        for p in &mut pooled {
            *p = *p * inv;
        }
        let mut projected = vec![T::zero(); d];
        for (i, &h) in pooled.iter().enumerate() {
            let row = &self.projection[i * d..(i + 1) * d];
            for (z, &w) in projected.iter_mut().zip(row) {
                *z = *z + h * w;
            }
        }
        let norm = projected
            .iter()
            .fold(T::zero(), |acc, &z| acc + z * z)
            .sqrt();
        if !norm.is_finite() {
            return Err(TrainError::NonFiniteEmbedding);
        }
        if norm <= T::zero() {
            return Err(TrainError::ZeroNorm);
        }
        let output = projected.iter().map(|&z| z / norm).collect();
        Ok(Forward {
            buckets,
            pooled,
            norm,
            output,
        })
    }

    /// Unit-norm embedding of `text`.
    pub fn encode(&self, text: &str) -> Result<Vec<T>, TrainError> {
        Ok(self.forward(text)?.output)
    }

    /// Stack forward outputs as rows.
    pub fn stack(forwards: &[Forward<T>], dim: usize) -> Matrix<T> {
        let mut m = Matrix::zeros(forwards.len(), dim);
        for (i, f) in forwards.iter().enumerate() {
            m.row_mut(i).copy_from_slice(&f.output);
        }
        m
    }

    /// Accumulate parameter gradients given `dL/d output`.
    pub fn backward(&self, fwd: &Forward<T>, grad_output: &[T], grads: &mut Gradients<T>) {
        let d = self.dim;
        let v = &fwd.output;
        let dot = v
            .iter()
            .zip(grad_output)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        // through the normalization
        let grad_projected: Vec<T> = v
            .iter()
            .zip(grad_output)
            .map(|(&vi, &gi)| (gi - vi * dot) / fwd.norm)
            .collect();
        let mut grad_pooled = vec![T::zero(); d];
        for i in 0..d {
            let h = fwd.pooled[i];
            let row = &self.projection[i * d..(i + 1) * d];
            let grow = &mut grads.projection[i * d..(i + 1) * d];
            let mut acc = T::zero();
            for j in 0..d {
                grow[j] = grow[j] + h * grad_projected[j];
                acc = acc + row[j] * grad_projected[j];
            }
            grad_pooled[i] = acc;
        }
        let inv = T::one() / T::from_usize(fwd.buckets.len());
        for &b in &fwd.buckets {
            for (g, &gp) in grads.embeddings[b * d..(b + 1) * d]
                .iter_mut()
                .zip(&grad_pooled)
            {
                *g = *g + gp * inv;
            }
        }
    }
}

impl Encoder<f32> {
    /// Lossless widening, used by gradient checks.
    pub fn to_f64(&self) -> Encoder<f64> {
        Encoder {
            buckets: self.buckets,
            dim: self.dim,
            temperature: self.temperature,
            embeddings: self.embeddings.iter().map(|&x| x as f64).collect(),
            projection: self.projection.iter().map(|&x| x as f64).collect(),
        }
    }
}
