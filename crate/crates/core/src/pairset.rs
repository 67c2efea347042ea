//! Contrastive training pairs: a concept name on one side, a definition or a
//! generated description of the same concept on the other.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descgen::StoredDescription;
use crate::ontograph::{ConceptId, OntologyGraph};
use crate::tsv;
use crate::SeededRng;

pub const PAIRS_HEADER: &str = "anchor\tpositive\tconcept_id\tkind";

/// Streams used for the independent random decisions of a build.
const STREAM_ALLOCATE: u64 = 1;
const STREAM_DEF_ANCHORS: u64 = 2;
const STREAM_DESC_ANCHORS: u64 = 3;
const STREAM_SHUFFLE: u64 = 4;

#[derive(Debug, Error)]
pub enum PairError {
    #[error("total must be positive")]
    EmptyTotal,
    #[error("definition fraction {0} outside [0, 1]")]
    BadFraction(f64),
    #[error("need {needed} definition pairs but {definitions} definitions under a cap of {cap} allow at most {achievable} (max fraction {max_fraction:.6})")]
    DefinitionShortfall {
        needed: usize,
        definitions: usize,
        cap: usize,
        achievable: usize,
        max_fraction: f64,
    },
    #[error("{0} description pairs requested but the description corpus is empty")]
    EmptyCorpus(usize),
    #[error("description for unknown concept `{0}`")]
    UnknownConcept(ConceptId),
    #[error("dev fraction {0} must lie strictly between 0 and 1")]
    BadDevFraction(f64),
    #[error("split of {total} pairs with dev fraction {fraction} leaves an empty side")]
    EmptySplit { total: usize, fraction: f64 },
    #[error("dev split needs {needed} description pairs, only {available} are eligible")]
    NotEnoughDescriptions { needed: usize, available: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Definition,
    Description,
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairKind::Definition => "definition",
            PairKind::Description => "description",
        })
    }
}

impl FromStr for PairKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "definition" => Ok(PairKind::Definition),
            "description" => Ok(PairKind::Description),
            other => Err(format!("unknown pair kind `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingPair {
    pub anchor: String,
    pub positive: String,
    pub concept_id: ConceptId,
    pub kind: PairKind,
}

impl TrainingPair {
    pub fn to_tsv_line(&self) -> String {
        tsv::join_fields([
            self.anchor.as_str(),
            self.positive.as_str(),
            self.concept_id.as_str(),
            &self.kind.to_string(),
        ])
    }

    /// Anchor is a name of the concept; a definition positive is one of its
    /// definitions.
    pub fn validate(&self, graph: &OntologyGraph) -> Result<(), String> {
        let c = graph
            .concept(&self.concept_id)
            .ok_or_else(|| format!("unknown concept `{}`", self.concept_id))?;
        if !c.names.contains(&self.anchor) {
            return Err(format!("`{}` is not a name of {}", self.anchor, c.id));
        }
        if self.kind == PairKind::Definition && !c.definitions.contains(&self.positive) {
            return Err(format!("definition not found on {}", c.id));
        }
        Ok(())
    }
}

pub fn write_pairs<W: Write>(pairs: &[TrainingPair], mut out: W) -> io::Result<()> {
    writeln!(out, "{PAIRS_HEADER}")?;
    for p in pairs {
        out.write_all(p.to_tsv_line().as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn pairs_to_bytes(pairs: &[TrainingPair]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_pairs(pairs, &mut buf).expect("writing to memory");
    buf
}

pub fn read_pairs<R: BufRead>(input: R) -> Result<Vec<TrainingPair>, PairError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if i == 0 && line.trim_end_matches('\r') == PAIRS_HEADER {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| PairError::Parse {
            line: i + 1,
            message,
        };
        let fields = tsv::split_fields(&line);
        if fields.len() != 4 {
            return Err(parse_err(format!("expected 4 columns, got {}", fields.len())));
        }
        let mut fields = fields.into_iter();
        let anchor = fields.next().unwrap();
        let positive = fields.next().unwrap();
        let concept_id = ConceptId(fields.next().unwrap());
        let kind = fields.next().unwrap().parse().map_err(parse_err)?;
        out.push(TrainingPair {
            anchor,
            positive,
            concept_id,
            kind,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct PairConfig {
    pub total: usize,
    pub def_fraction: f64,
    pub def_repeat_cap: usize,
    pub seed: u64,
    /// Optional per-concept weight on its share of definition pairs.
    pub concept_weights: Option<HashMap<ConceptId, f64>>,
}

impl PairConfig {
    pub fn new(total: usize, seed: u64) -> Self {
        PairConfig {
            total,
            def_fraction: 0.15,
            def_repeat_cap: 50,
            seed,
            concept_weights: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub total_pairs: usize,
    pub definition_pairs: usize,
    pub description_pairs: usize,
    pub target_definition_fraction: f64,
    pub definition_fraction: f64,
    pub def_repeat_cap: usize,
    pub max_definition_usage: usize,
    /// Keyed `concept_id#definition_index`.
    pub definition_usage: BTreeMap<String, usize>,
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
    pub output_sha256: String,
}

/// Parse `concept_id<TAB>weight` lines.
pub fn parse_weights(text: &str) -> Result<HashMap<ConceptId, f64>, PairError> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = tsv::split_fields(line);
        let err = |message: String| PairError::Parse {
            line: i + 1,
            message,
        };
        if fields.len() != 2 {
            return Err(err("expected concept_id<TAB>weight".into()));
        }
        let w: f64 = fields[1].trim().parse().map_err(|e| err(format!("{e}")))?;
        if !(w.is_finite() && w >= 0.0) {
            return Err(err(format!("weight {w} must be finite and non-negative")));
        }
        out.insert(ConceptId(fields[0].clone()), w);
    }
    Ok(out)
}

/// Split `needed` uses over definitions with the given weights, none above
/// `cap`. Largest-remainder rounding with random tie order.
fn allocate_uses(weights: &[f64], needed: usize, cap: usize, rng: &mut SeededRng) -> Vec<usize> {
    let n = weights.len();
    let mut uses = vec![0usize; n];
    let mut remaining = needed;
    let mut open: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
    // water-filling: hand out proportional shares, saturate, repeat
    while remaining > 0 && !open.is_empty() {
        let mass: f64 = open.iter().map(|&i| weights[i]).sum();
        let mut shares: Vec<(usize, f64)> = open
            .iter()
            .map(|&i| (i, remaining as f64 * weights[i] / mass))
            .collect();
        let mut handed = 0usize;
        let mut saturated = false;
        for (i, share) in shares.iter_mut() {
            let room = cap - uses[*i];
            let whole = (share.floor() as usize).min(room).min(remaining - handed);
            if share.floor() as usize >= room {
                saturated = true;
            }
            uses[*i] += whole;
            handed += whole;
            *share -= whole as f64;
        }
        remaining -= handed;
        if saturated {
            open.retain(|&i| uses[i] < cap);
            continue;
        }
        // no saturation: distribute the leftover one-by-one by remainder
        shares.shuffle(rng);
        shares.sort_by(|a, b| b.1.total_cmp(&a.1));
        for (i, _) in shares {
            if remaining == 0 {
                break;
            }
            if uses[i] < cap {
                uses[i] += 1;
                remaining -= 1;
            }
        }
        open.retain(|&i| uses[i] < cap);
    }
    debug_assert_eq!(remaining, 0);
    uses
}

/// Round-half-away-from-zero share of definition pairs.
pub fn definition_target(total: usize, def_fraction: f64) -> usize {
    (total as f64 * def_fraction).round() as usize
}

/// Assemble the shuffled pair list and its manifest.
///
/// `descriptions` is consumed in order, cycling if it is shorter than the
/// number of description pairs requested.
pub fn build_pairs(
    graph: &OntologyGraph,
    descriptions: &[StoredDescription],
    config: &PairConfig,
) -> Result<(Vec<TrainingPair>, DatasetManifest), PairError> {
    if config.total == 0 {
        return Err(PairError::EmptyTotal);
    }
    if !(0.0..=1.0).contains(&config.def_fraction) {
        return Err(PairError::BadFraction(config.def_fraction));
    }
    let n_def = definition_target(config.total, config.def_fraction);
    let n_desc = config.total - n_def;

    // (concept position, definition index), weight
    let mut defs: Vec<(usize, usize)> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (ci, c) in graph.concepts().iter().enumerate() {
        let w = match &config.concept_weights {
            Some(map) => map.get(&c.id).copied().unwrap_or(1.0),
            None => 1.0,
        };
        for di in 0..c.definitions.len() {
            defs.push((ci, di));
            weights.push(w);
        }
    }
    let positive_defs = weights.iter().filter(|&&w| w > 0.0).count();
    let achievable = positive_defs * config.def_repeat_cap;
    if n_def > achievable {
        return Err(PairError::DefinitionShortfall {
            needed: n_def,
            definitions: positive_defs,
            cap: config.def_repeat_cap,
            achievable,
            max_fraction: achievable as f64 / config.total as f64,
        });
    }
    if n_desc > 0 && descriptions.is_empty() {
        return Err(PairError::EmptyCorpus(n_desc));
    }

    let rng_for = |stream| {
        let mut rng = SeededRng::seed_from_u64(config.seed);
        rng.set_stream(stream);
        rng
    };

    let uses = allocate_uses(&weights, n_def, config.def_repeat_cap, &mut rng_for(STREAM_ALLOCATE));

    let mut pairs = Vec::with_capacity(config.total);
    let mut usage = BTreeMap::new();
    let mut anchor_rng = rng_for(STREAM_DEF_ANCHORS);
    for (&(ci, di), &u) in defs.iter().zip(&uses) {
        if u == 0 {
            continue;
        }
        let c = &graph.concepts()[ci];
        // every distinct name once before any name repeats
        let mut order: Vec<&String> = c.names.iter().collect();
        order.shuffle(&mut anchor_rng);
        for k in 0..u {
            pairs.push(TrainingPair {
                anchor: order[k % order.len()].clone(),
                positive: c.definitions[di].clone(),
                concept_id: c.id.clone(),
                kind: PairKind::Definition,
            });
        }
        usage.insert(format!("{}#{}", c.id, di), u);
    }

    let mut desc_rng = rng_for(STREAM_DESC_ANCHORS);
    for k in 0..n_desc {
        let d = &descriptions[k % descriptions.len()];
        let c = graph
            .concept(&d.concept_id)
            .ok_or_else(|| PairError::UnknownConcept(d.concept_id.clone()))?;
        let anchor = c.names[desc_rng.random_range(0..c.names.len())].clone();
        pairs.push(TrainingPair {
            anchor,
            positive: d.text.clone(),
            concept_id: c.id.clone(),
            kind: PairKind::Description,
        });
    }

    pairs.shuffle(&mut rng_for(STREAM_SHUFFLE));

    let manifest = DatasetManifest {
        total_pairs: pairs.len(),
        definition_pairs: n_def,
        description_pairs: n_desc,
        target_definition_fraction: config.def_fraction,
        definition_fraction: n_def as f64 / config.total as f64,
        def_repeat_cap: config.def_repeat_cap,
        max_definition_usage: uses.iter().copied().max().unwrap_or(0),
        definition_usage: usage,
        seed: config.seed,
        inputs: BTreeMap::new(),
        output_sha256: crate::digest::sha256_hex(&pairs_to_bytes(&pairs)),
    };
    Ok((pairs, manifest))
}

/// Deterministic train/dev split; dev only receives description pairs whose
/// text is not also a definition text anywhere in the input.
///
/// Both sides keep the input's relative order.
pub fn split(
    pairs: &[TrainingPair],
    dev_fraction: f64,
    seed: u64,
) -> Result<(Vec<TrainingPair>, Vec<TrainingPair>), PairError> {
    if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
        return Err(PairError::BadDevFraction(dev_fraction));
    }
    let n_dev = (pairs.len() as f64 * dev_fraction).round() as usize;
    if n_dev == 0 || n_dev >= pairs.len() {
        return Err(PairError::EmptySplit {
            total: pairs.len(),
            fraction: dev_fraction,
        });
    }
    let definition_texts: HashSet<&str> = pairs
        .iter()
        .filter(|p| p.kind == PairKind::Definition)
        .map(|p| p.positive.as_str())
        .collect();
    let mut eligible: Vec<usize> = pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            p.kind == PairKind::Description && !definition_texts.contains(p.positive.as_str())
        })
        .map(|(i, _)| i)
        .collect();
    if eligible.len() < n_dev {
        return Err(PairError::NotEnoughDescriptions {
            needed: n_dev,
            available: eligible.len(),
        });
    }
    let mut rng = SeededRng::seed_from_u64(seed);
    eligible.shuffle(&mut rng);
    let mut is_dev = vec![false; pairs.len()];
    for &i in &eligible[..n_dev] {
        is_dev[i] = true;
    }
    let (dev, train): (Vec<_>, Vec<_>) = pairs
        .iter()
        .cloned()
        .zip(is_dev)
        .partition(|(_, d)| *d);
    Ok((
        train.into_iter().map(|(p, _)| p).collect(),
        dev.into_iter().map(|(p, _)| p).collect(),
    ))
}
