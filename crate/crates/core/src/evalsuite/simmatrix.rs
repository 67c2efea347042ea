//! Pairwise cosine matrix over a small term list.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{cosine, embed_all, EvalError, Embedder};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledTerm {
    pub term: String,
    pub group: Option<String>,
}

impl LabeledTerm {
    pub fn new(term: &str, group: Option<&str>) -> Self {
        LabeledTerm {
            term: term.to_owned(),
            group: group.map(str::to_owned),
        }
    }

    /// `term` or `term\tgroup` per line.
    pub fn parse_list(text: &str) -> Vec<LabeledTerm> {
        text.lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(|l| match l.split_once('\t') {
                Some((t, g)) => LabeledTerm::new(t.trim(), Some(g.trim())),
                None => LabeledTerm::new(l.trim(), None),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimilarityMatrix {
    pub terms: Vec<String>,
    pub groups: Vec<Option<String>>,
    /// Row-major, symmetric.
    pub values: Vec<f64>,
    /// Terms that occur more than once.
    pub duplicates: Vec<String>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    /// Mean off-diagonal similarity within each labeled group.
    pub fn group_means(&self) -> BTreeMap<String, f64> {
        let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if let (Some(a), Some(b)) = (&self.groups[i], &self.groups[j]) {
                    if a == b {
                        let e = acc.entry(a.clone()).or_default();
                        e.0 += self.get(i, j);
                        e.1 += 1;
                    }
                }
            }
        }
        acc.into_iter()
            .map(|(g, (s, n))| (g, s / n as f64))
            .collect()
    }

    /// Mean similarity over pairs with two different labels.
    pub fn between_group_mean(&self) -> Option<f64> {
        let (mut s, mut n) = (0.0, 0usize);
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if let (Some(a), Some(b)) = (&self.groups[i], &self.groups[j]) {
                    if a != b {
                        s += self.get(i, j);
                        n += 1;
                    }
                }
            }
        }
        (n > 0).then(|| s / n as f64)
    }

    /// Fixed-width table with a shade glyph per cell.
    pub fn render_text(&self) -> String {
        const SHADES: [char; 5] = [' ', '.', ':', '*', '#'];
        let width = self.terms.iter().map(|t| t.chars().count()).max().unwrap_or(0).min(32);
        let mut out = String::new();
        let _ = write!(out, "{:width$} ", "");
        for j in 0..self.len() {
            let _ = write!(out, "{j:>6} ");
        }
        out.push('\n');
        for i in 0..self.len() {
            let label: String = self.terms[i].chars().take(width).collect();
            let _ = write!(out, "{label:width$} ");
            for j in 0..self.len() {
                let v = self.get(i, j);
                let shade = SHADES[((v.clamp(0.0, 1.0) * 4.0).round()) as usize];
                let _ = write!(out, "{v:>5.2}{shade} ");
            }
            out.push('\n');
        }
        for (g, m) in self.group_means() {
            let _ = writeln!(out, "within {g}: {m:.4}");
        }
        if let Some(m) = self.between_group_mean() {
            let _ = writeln!(out, "between groups: {m:.4}");
        }
        for d in &self.duplicates {
            let _ = writeln!(out, "duplicate term: {d}");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
        let mut out = String::from("term");
        for t in &self.terms {
            out.push(',');
            out.push_str(&quote(t));
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&quote(&self.terms[i]));
            for j in 0..self.len() {
                let _ = write!(out, ",{}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }
}

pub fn similarity_matrix_report<E: Embedder + ?Sized>(
    model: &E,
    terms: &[LabeledTerm],
) -> Result<SimilarityMatrix, EvalError> {
    if terms.len() < 2 {
        return Err(EvalError::TooFew(terms.len()));
    }
    let texts: Vec<&str> = terms.iter().map(|t| t.term.as_str()).collect();
    let vecs = embed_all(model, &texts)?;
    let n = terms.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = cosine(&vecs[i], &vecs[i]);
        for j in i + 1..n {
            let c = cosine(&vecs[i], &vecs[j]);
            values[i * n + j] = c;
            values[j * n + i] = c;
        }
    }
    let mut seen = BTreeMap::new();
    for t in &texts {
        *seen.entry(*t).or_insert(0usize) += 1;
    }
    let duplicates = seen
        .into_iter()
        .filter(|&(_, c)| c > 1)
        .map(|(t, _)| t.to_owned())
        .collect();
    Ok(SimilarityMatrix {
        terms: texts.iter().map(|t| t.to_string()).collect(),
        groups: terms.iter().map(|t| t.group.clone()).collect(),
        values,
        duplicates,
    })
}
