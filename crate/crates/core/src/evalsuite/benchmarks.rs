//! Benchmark record types and their TSV formats.
//!
//! ```text
//! concept pairs  term1 \t term2 \t gold
//! STS            s1 \t s2 \t gold(0..5)
//! NLI triplets   premise \t entailed \t contradicted
//! NEL            mention \t sentence \t gold_id
//! ```
//!
//! Blank lines and `#` comments are skipped. A first line whose numeric
//! column does not parse is treated as a header.

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::ontograph::ConceptId;
use crate::trainer::StsPair;
use crate::tsv;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TermPair {
    pub first: String,
    pub second: String,
    pub gold: f64,
}

impl TermPair {
    pub fn new(first: &str, second: &str, gold: f64) -> Self {
        TermPair {
            first: first.to_owned(),
            second: second.to_owned(),
            gold,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConceptPairBenchmark {
    pub name: String,
    pub rows: Vec<TermPair>,
    pub scale: Option<Scale>,
}

impl ConceptPairBenchmark {
    pub fn new(name: &str, rows: Vec<TermPair>, scale: Option<Scale>) -> Result<Self, EvalError> {
        for (i, r) in rows.iter().enumerate() {
            let err = |message: String| EvalError::Parse {
                line: i + 1,
                message,
            };
            if r.first.trim().is_empty() || r.second.trim().is_empty() {
                return Err(err("empty term".into()));
            }
            if !r.gold.is_finite() {
                return Err(err("non-finite gold score".into()));
            }
            if let Some(s) = scale {
                if r.gold < s.min || r.gold > s.max {
                    return Err(err(format!(
                        "gold {} outside scale [{}, {}]",
                        r.gold, s.min, s.max
                    )));
                }
            }
        }
        Ok(ConceptPairBenchmark {
            name: name.to_owned(),
            rows,
            scale,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NliTriplet {
    premise: String,
    entailed: String,
    contradicted: String,
}

impl NliTriplet {
    pub fn new(premise: &str, entailed: &str, contradicted: &str) -> Result<Self, String> {
        if [premise, entailed, contradicted]
            .iter()
            .any(|s| s.trim().is_empty())
        {
            return Err("empty field".into());
        }
        if entailed == contradicted {
            return Err("entailed and contradicted hypotheses are identical".into());
        }
        Ok(NliTriplet {
            premise: premise.to_owned(),
            entailed: entailed.to_owned(),
            contradicted: contradicted.to_owned(),
        })
    }

    pub fn premise(&self) -> &str {
        &self.premise
    }

    pub fn entailed(&self) -> &str {
        &self.entailed
    }

    pub fn contradicted(&self) -> &str {
        &self.contradicted
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NelMention {
    pub mention: String,
    pub sentence: String,
    pub gold: ConceptId,
}

/// `(line number, fields)` for every data line with exactly three columns.
fn rows(text: &str) -> Result<Vec<(usize, Vec<String>)>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = tsv::split_fields(line);
        if fields.len() != 3 {
            return Err(EvalError::Parse {
                line: i + 1,
                message: format!("expected 3 tab-separated columns, got {}", fields.len()),
            });
        }
        out.push((i + 1, fields));
    }
    Ok(out)
}

fn scored_rows(text: &str) -> Result<Vec<(usize, String, String, f64)>, EvalError> {
    let mut out = Vec::new();
    for (k, (line, f)) in rows(text)?.into_iter().enumerate() {
        match f[2].trim().parse::<f64>() {
            Ok(v) => {
                let mut it = f.into_iter();
                out.push((line, it.next().unwrap(), it.next().unwrap(), v));
            }
            Err(_) if k == 0 => continue,
            Err(e) => {
                return Err(EvalError::Parse {
                    line,
                    message: format!("gold score: {e}"),
                })
            }
        }
    }
    Ok(out)
}

pub fn parse_concept_pairs(
    name: &str,
    text: &str,
    scale: Option<Scale>,
) -> Result<ConceptPairBenchmark, EvalError> {
    let rows = scored_rows(text)?
        .into_iter()
        .map(|(_, a, b, g)| TermPair {
            first: a,
            second: b,
            gold: g,
        })
        .collect();
    ConceptPairBenchmark::new(name, rows, scale)
}

pub fn parse_sts(text: &str) -> Result<Vec<StsPair>, EvalError> {
    scored_rows(text)?
        .into_iter()
        .map(|(line, first, second, score)| {
            if !(0.0..=5.0).contains(&score) {
                return Err(EvalError::Parse {
                    line,
                    message: format!("STS score {score} outside [0, 5]"),
                });
            }
            Ok(StsPair {
                first,
                second,
                score,
            })
        })
        .collect()
}

pub fn parse_nli(text: &str) -> Result<Vec<NliTriplet>, EvalError> {
    rows(text)?
        .into_iter()
        .map(|(line, f)| {
            NliTriplet::new(&f[0], &f[1], &f[2]).map_err(|message| EvalError::Parse { line, message })
        })
        .collect()
}

pub fn parse_nel(text: &str) -> Result<Vec<NelMention>, EvalError> {
    rows(text)?
        .into_iter()
        .map(|(line, f)| {
            if f[0].trim().is_empty() || f[2].trim().is_empty() {
                return Err(EvalError::Parse {
                    line,
                    message: "empty mention or gold id".into(),
                });
            }
            let mut it = f.into_iter();
            Ok(NelMention {
                mention: it.next().unwrap(),
                sentence: it.next().unwrap(),
                gold: ConceptId(it.next().unwrap()),
            })
        })
        .collect()
}
