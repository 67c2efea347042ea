//! Exact top-k cosine search over unit-norm rows.
//!
//! The scan is split into fixed-size row chunks processed in parallel; each
//! chunk keeps a bounded heap and the partial results are merged in chunk
//! order. Ordering is score descending, then id ascending, so the output is
//! the same for any thread count.
//!
//! Embedding file, little-endian:
//!
//! ```text
//! magic  b"OREM"
//! u32    version (1)
//! u64    rows N
//! u32    dim D
//! N ×    (u32 byte length, UTF-8 id)
//! f32    vectors[N*D] row-major
//! ```

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::io::{self, Read, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub const EMBEDDING_MAGIC: &[u8; 4] = b"OREM";
pub const EMBEDDING_VERSION: u32 = 1;

/// Rows per scan chunk.
pub const SCAN_CHUNK: usize = 2048;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("row `{0}` has zero or non-finite norm")]
    ZeroVector(String),
    #[error("{ids} ids but {rows} rows of dimension {dim}")]
    Shape { ids: usize, rows: usize, dim: usize },
    #[error("query has dimension {got}, index has {expected}")]
    DimMismatch { got: usize, expected: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("embedding file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    ids: Vec<String>,
    dim: usize,
    data: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hit {
    pub id: String,
    pub row: usize,
    pub score: f32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedHits {
    pub hits: Vec<Hit>,
    /// Set when `k` exceeded the number of rows and was clamped.
    pub clamped: bool,
}

/// Ordering of candidates: higher score first, then lower id.
/// `-0.0` and `0.0` compare equal.
pub fn rank_order(a_score: f32, a_id: &str, b_score: f32, b_id: &str) -> Ordering {
    b_score
        .partial_cmp(&a_score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a_id.cmp(b_id))
}

pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Heap entry ordered so that the worst candidate is at the top.
struct Entry<'a> {
    score: f32,
    id: &'a str,
    row: usize,
}

impl PartialEq for Entry<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry<'_> {}
impl PartialOrd for Entry<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        rank_order(self.score, self.id, other.score, other.id)
    }
}

impl EmbeddingMatrix {
    /// Validate and L2-normalize `vectors` (row-major, `ids.len()` rows).
    pub fn build(ids: Vec<String>, dim: usize, mut vectors: Vec<f32>) -> Result<Self, IndexError> {
        if dim == 0 || vectors.len() != ids.len() * dim {
            return Err(IndexError::Shape {
                ids: ids.len(),
                rows: vectors.len().checked_div(dim).unwrap_or(0),
                dim,
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(IndexError::DuplicateId(id.clone()));
            }
        }
        for (id, row) in ids.iter().zip(vectors.chunks_exact_mut(dim)) {
            let norm = row.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(IndexError::ZeroVector(id.clone()));
            }
            for x in row.iter_mut() {
                *x = (*x as f64 / norm) as f32;
            }
        }
        Ok(EmbeddingMatrix {
            ids,
            dim,
            data: vectors,
        })
    }

    pub fn from_rows(ids: Vec<String>, rows: Vec<Vec<f32>>) -> Result<Self, IndexError> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(IndexError::Shape {
                ids: ids.len(),
                rows: rows.len(),
                dim,
            });
        }
        Self::build(ids, dim, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    fn check_query(&self, query: &[f32]) -> Result<(), IndexError> {
        if query.len() != self.dim {
            return Err(IndexError::DimMismatch {
                got: query.len(),
                expected: self.dim,
            });
        }
        Ok(())
    }

    /// Cosine score of the query against every row, in row order.
    pub fn scores(&self, query: &[f32]) -> Result<Vec<f32>, IndexError> {
        self.check_query(query)?;
        Ok(self
            .data
            .par_chunks(self.dim * SCAN_CHUNK)
            .flat_map_iter(|block| block.chunks_exact(self.dim).map(|r| dot(r, query)))
            .collect())
    }

    /// Exact top-k rows by cosine.
    pub fn topk(&self, query: &[f32], k: usize) -> Result<RankedHits, IndexError> {
        self.check_query(query)?;
        if k == 0 {
            return Err(IndexError::ZeroK);
        }
        let clamped = k > self.len();
        let k = k.min(self.len());
        let partial: Vec<Vec<Entry<'_>>> = self
            .data
            .par_chunks(self.dim * SCAN_CHUNK)
            .enumerate()
            .map(|(c, block)| {
                let mut heap = BinaryHeap::with_capacity(k + 1);
                for (r, row) in block.chunks_exact(self.dim).enumerate() {
                    let i = c * SCAN_CHUNK + r;
                    let entry = Entry {
                        score: dot(row, query),
                        id: &self.ids[i],
                        row: i,
                    };
                    if heap.len() < k {
                        heap.push(entry);
                    } else if entry < *heap.peek().expect("k >= 1") {
                        heap.pop();
                        heap.push(entry);
                    }
                }
                heap.into_vec()
            })
            .collect();
        let mut merged: Vec<Entry<'_>> = partial.into_iter().flatten().collect();
        merged.sort();
        merged.truncate(k);
        Ok(RankedHits {
            hits: merged
                .into_iter()
                .map(|e| Hit {
                    id: e.id.to_owned(),
                    row: e.row,
                    score: e.score,
                })
                .collect(),
            clamped,
        })
    }

    /// Queries sharded across workers; results in query order.
    pub fn topk_batch(&self, queries: &[Vec<f32>], k: usize) -> Result<Vec<RankedHits>, IndexError> {
        queries.par_iter().map(|q| self.topk(q, k)).collect()
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(EMBEDDING_MAGIC)?;
        out.write_all(&EMBEDDING_VERSION.to_le_bytes())?;
        out.write_all(&(self.len() as u64).to_le_bytes())?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        for id in &self.ids {
            out.write_all(&(id.len() as u32).to_le_bytes())?;
            out.write_all(id.as_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.data.len() * 4);
        for x in &self.data {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        out.write_all(&buf)
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self, IndexError> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != EMBEDDING_MAGIC {
            return Err(IndexError::Format(format!("bad magic {magic:?}")));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != EMBEDDING_VERSION {
            return Err(IndexError::Format(format!("unsupported version {version}")));
        }
        input.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        input.read_exact(&mut b4)?;
        let dim = u32::from_le_bytes(b4) as usize;
        let mut ids = Vec::with_capacity(n);
        for _ in 0..n {
            input.read_exact(&mut b4)?;
            let len = u32::from_le_bytes(b4) as usize;
            let mut bytes = vec![0u8; len];
            input.read_exact(&mut bytes)?;
            ids.push(
                String::from_utf8(bytes).map_err(|e| IndexError::Format(e.to_string()))?,
            );
        }
        let data = crate::trainer::read_f32s(&mut input, n * dim)?;
        Self::build(ids, dim, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("r{i:02}")).collect()
    }

    #[test]
    fn orthonormal_rows_and_self_retrieval() {
        let m = EmbeddingMatrix::from_rows(
            ids(3),
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert_eq!(m.len(), 3);
        let hits = m.topk(m.row(1), 1).unwrap();
        assert_eq!(hits.hits[0].id, "r01");
        assert_eq!(hits.hits[0].score, 1.0);
    }

    #[test]
    fn renormalizes() {
        let m = EmbeddingMatrix::from_rows(ids(1), vec![vec![0.0, 2.0]]).unwrap();
        assert_eq!(m.row(0), &[0.0, 1.0]);
        assert_eq!(m.topk(&[0.0, 1.0], 1).unwrap().hits[0].score, 1.0);
    }

    #[test]
    fn orthogonal_query_ties_by_id() {
        let names = vec!["b".to_string(), "c".into(), "a".into()];
        let rows = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        let m = EmbeddingMatrix::from_rows(names, rows).unwrap();
        let hits = m.topk(&[0.0, 0.0, 1.0], 3).unwrap();
        let order: Vec<&str> = hits.hits.iter().map(|h| h.id.as_str()).collect();
        assert_eq!(order, vec!["a", "b", "c"]);
        assert!(hits.hits.iter().all(|h| h.score == 0.0));
    }

    #[test]
    fn errors() {
        let dup = EmbeddingMatrix::from_rows(
            vec!["x".into(), "x".into()],
            vec![vec![1.0], vec![1.0]],
        );
        assert!(matches!(dup, Err(IndexError::DuplicateId(id)) if id == "x"));
        assert!(matches!(
            EmbeddingMatrix::from_rows(ids(1), vec![vec![0.0, 0.0]]),
            Err(IndexError::ZeroVector(_))
        ));
        let m = EmbeddingMatrix::from_rows(ids(2), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(m.topk(&[1.0], 1), Err(IndexError::DimMismatch { .. })));
        assert!(matches!(m.topk(&[1.0, 0.0], 0), Err(IndexError::ZeroK)));
        let clamped = m.topk(&[1.0, 0.0], 5).unwrap();
        assert!(clamped.clamped);
        assert_eq!(clamped.hits.len(), 2);
    }

    #[test]
    fn file_round_trip() {
        let m = EmbeddingMatrix::from_rows(
            vec!["C001".into(), "ünïcode".into()],
            vec![vec![0.6, 0.8], vec![1.0, 0.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"OREM");
        assert_eq!(EmbeddingMatrix::read(&buf[..]).unwrap(), m);
    }
}
