//! Synthetic ontologies with a controlled shape.
//!
//! Names are made of pseudo-words. A child's name reuses the last two words
//! of its parent's name, so a subtree shares head words the way clinical
//! terminologies do ("x disorder", "y x disorder"). Every concept inherits
//! the semantic type of its root and carries associative edges to a few
//! random concepts. Definitions mention the parent and the edge targets.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::ontograph::{Concept, ConceptId, EdgeKind, GraphError, OntologyGraph, Relationship};
use crate::trainer::StsPair;
use crate::SeededRng;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic ontology config: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub const SEMANTIC_TYPES: [&str; 8] = [
    "disorder",
    "finding",
    "procedure",
    "substance",
    "structure",
    "organism",
    "device",
    "qualifier",
];

pub const ASSOCIATIVE_LABELS: [&str; 6] = [
    "has_finding_site",
    "has_associated_morphology",
    "has_causative_agent",
    "may_treat",
    "interacts_with",
    "occurs_in",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub leaves: usize,
    pub non_leaves: usize,
    /// Non-leaf roots; capped by the number of semantic types.
    pub roots: usize,
    /// Extra names per concept, drawn from `0..=max_synonyms`.
    pub max_synonyms: usize,
    /// Definitions per concept, drawn from `min..=max`.
    pub definitions: (usize, usize),
    /// Associative edges per concept, drawn from `min..=max`.
    pub associative: (usize, usize),
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(leaves: usize, non_leaves: usize, seed: u64) -> Self {
        SynthConfig {
            leaves,
            non_leaves,
            roots: 8.min(non_leaves.max(1)),
            max_synonyms: 2,
            definitions: (3, 6),
            associative: (1, 3),
            seed,
        }
    }
}

struct Words {
    seen: HashSet<String>,
}

impl Words {
    const ONSETS: [&'static str; 18] = [
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr",
        "pl",
    ];
    const VOWELS: [&'static str; 6] = ["a", "e", "i", "o", "u", "ae"];

    fn fresh(&mut self, rng: &mut SeededRng) -> String {
        loop {
            let syllables = rng.random_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(Self::ONSETS.choose(rng).expect("nonempty"));
                w.push_str(Self::VOWELS.choose(rng).expect("nonempty"));
            }
            if rng.random_bool(0.5) {
                w.push_str(["n", "s", "x", "l"].choose(rng).expect("nonempty"));
            }
            if !SEMANTIC_TYPES.contains(&w.as_str()) && self.seen.insert(w.clone()) {
                return w;
            }
        }
    }
}

fn head(name: &str) -> String {
    let words: Vec<&str> = name.split(' ').collect();
    words[words.len().saturating_sub(2)..].join(" ")
}

fn phrase(label: &str) -> String {
    label.trim_start_matches("has_").replace('_', " ")
}

/// Generate a graph with exactly `leaves` leaves and `non_leaves` non-leaves.
///
/// Concept ids are `C00001`.. with non-leaves first.
pub fn synth_ontology(config: &SynthConfig) -> Result<OntologyGraph, SynthError> {
    let SynthConfig {
        leaves,
        non_leaves,
        roots,
        ..
    } = *config;
    if non_leaves == 0 {
        return Err(SynthError::Config("need at least one non-leaf".into()));
    }
    if roots == 0 || roots > non_leaves || roots > SEMANTIC_TYPES.len() {
        return Err(SynthError::Config(format!(
            "roots must be in 1..={}",
            non_leaves.min(SEMANTIC_TYPES.len())
        )));
    }
    if config.definitions.0 > config.definitions.1 || config.associative.0 > config.associative.1
    {
        return Err(SynthError::Config("min above max".into()));
    }
    let mut rng = SeededRng::seed_from_u64(config.seed);
    let mut words = Words {
        seen: HashSet::new(),
    };
    let total = leaves + non_leaves;
    let id = |i: usize| ConceptId(format!("C{:05}", i + 1));

    // parent[i] for every non-root; non-leaves attach to earlier non-leaves.
    let mut parent: Vec<Option<usize>> = vec![None; total];
    let mut has_child = vec![false; non_leaves];
    for (i, p) in parent.iter_mut().enumerate().take(non_leaves).skip(roots) {
        let q = rng.random_range(0..i);
        *p = Some(q);
        has_child[q] = true;
    }
    let childless: Vec<usize> = (0..non_leaves).filter(|&i| !has_child[i]).collect();
    if childless.len() > leaves {
        return Err(SynthError::Config(format!(
            "{} non-leaves need a child but only {leaves} leaves requested",
            childless.len()
        )));
    }
    for (k, slot) in parent.iter_mut().skip(non_leaves).enumerate() {
        *slot = Some(match childless.get(k) {
            Some(&c) => c,
            None => rng.random_range(0..non_leaves),
        });
    }

    let mut root_of = vec![0usize; total];
    let mut names: Vec<Vec<String>> = Vec::with_capacity(total);
    for i in 0..total {
        let canonical = match parent[i] {
            None => {
                root_of[i] = i;
                format!("{} {}", words.fresh(&mut rng), SEMANTIC_TYPES[i])
            }
            Some(p) => {
                root_of[i] = root_of[p];
                format!("{} {}", words.fresh(&mut rng), head(&names[p][0]))
            }
        };
        let mut ns = vec![canonical];
        let tail = SEMANTIC_TYPES[root_of[i]];
        for _ in 0..rng.random_range(0..=config.max_synonyms) {
            ns.push(format!("{} {tail}", words.fresh(&mut rng)));
        }
        names.push(ns);
    }

    let mut edges = Vec::new();
    let mut targets: Vec<Vec<(usize, &str)>> = vec![Vec::new(); total];
    for i in 0..total {
        if let Some(p) = parent[i] {
            edges.push(Relationship {
                source: id(i),
                target: id(p),
                label: "isa".into(),
                kind: EdgeKind::Hierarchical,
            });
        }
        if total < 2 {
            continue;
        }
        let n = rng.random_range(config.associative.0..=config.associative.1);
        for _ in 0..n {
            let mut t = rng.random_range(0..total - 1);
            if t >= i {
                t += 1;
            }
            let label = *ASSOCIATIVE_LABELS.choose(&mut rng).expect("nonempty");
            targets[i].push((t, label));
            edges.push(Relationship {
                source: id(i),
                target: id(t),
                label: label.into(),
                kind: EdgeKind::Associative,
            });
        }
    }

    let mut concepts = Vec::with_capacity(total);
    for i in 0..total {
        let kind = SEMANTIC_TYPES[root_of[i]];
        let genus = match parent[i] {
            Some(p) => names[p][0].clone(),
            None => kind.to_owned(),
        };
        let marker = words.fresh(&mut rng);
        let n_defs = rng.random_range(config.definitions.0..=config.definitions.1);
        let mut definitions = Vec::with_capacity(n_defs);
        for d in 0..n_defs {
            let text = match targets[i].get(d % targets[i].len().max(1)) {
                Some(&(t, label)) if d % 3 != 2 => {
                    let target_name = &names[t][0];
                    if d % 2 == 0 {
                        format!("a {genus} {} {target_name}", phrase(label))
                    } else {
                        format!("{kind} marked by {marker} with {} {target_name}", phrase(label))
                    }
                }
                _ => format!("any {genus} showing {marker} {}", words.fresh(&mut rng)),
            };
            let text = if definitions.contains(&text) {
                format!("{text} and {}", words.fresh(&mut rng))
            } else {
                text
            };
            definitions.push(text);
        }
        concepts.push(Concept {
            id: id(i),
            names: names[i].clone(),
            definitions,
            semantic_types: vec![kind.to_owned()],
        });
    }
    Ok(OntologyGraph::new(concepts, edges)?)
}

/// Benchmark fixtures derived from a graph, as TSV-ready records.
#[derive(Clone, Debug, Default)]
pub struct SynthBenchmarks {
    /// `(term1, term2, gold)` on a 1..4 scale.
    pub concept_pairs: Vec<(String, String, f64)>,
    pub sts: Vec<StsPair>,
    /// `(premise, entailed, contradicted)`.
    pub nli: Vec<(String, String, String)>,
    /// `(mention, sentence, gold id)`.
    pub nel: Vec<(String, String, ConceptId)>,
}

/// Relatedness by graph position: synonyms 4, parent/child 3, same root 2,
/// otherwise 1. STS scores scale the same grades to 0..5.
pub fn synth_benchmarks(graph: &OntologyGraph, n: usize, seed: u64) -> SynthBenchmarks {
    let mut rng = SeededRng::seed_from_u64(seed);
    let concepts = graph.concepts();
    let mut out = SynthBenchmarks::default();
    if concepts.len() < 2 {
        return out;
    }
    let grade = |a: &Concept, b: &Concept| -> f64 {
        if a.id == b.id {
            4.0
        } else if graph.parents(&a.id).map(|p| p.contains(&b.id)).unwrap_or(false)
            || graph.parents(&b.id).map(|p| p.contains(&a.id)).unwrap_or(false)
        {
            3.0
        } else if a.semantic_types == b.semantic_types {
            2.0
        } else {
            1.0
        }
    };
    for k in 0..n {
        let a = concepts.choose(&mut rng).expect("nonempty");
        let b = match k % 4 {
            0 => a,
            1 => graph
                .parents(&a.id)
                .ok()
                .and_then(|p| p.into_iter().next())
                .and_then(|p| graph.concept(&p))
                .unwrap_or(a),
            _ => concepts.choose(&mut rng).expect("nonempty"),
        };
        let first = a.names.choose(&mut rng).expect("names").clone();
        let second = b.names.choose(&mut rng).expect("names").clone();
        let g = grade(a, b);
        out.concept_pairs
            .push((first.clone(), second.clone(), g));
        out.sts.push(StsPair {
            first: format!("patient with {first}"),
            second: format!("patient with {second}"),
            score: (g - 1.0) * 5.0 / 3.0,
        });

        let other = loop {
            let c = concepts.choose(&mut rng).expect("nonempty");
            if c.id != a.id {
                break c;
            }
        };
        let premise = format!("the patient has {}", a.canonical_name());
        let entailed = format!("patient has {}", a.names.choose(&mut rng).expect("names"));
        let contradicted = format!("patient has {}", other.canonical_name());
        if entailed != contradicted {
            out.nli.push((premise, entailed, contradicted));
        }

        let mention = a.names.choose(&mut rng).expect("names").clone();
        let sentence = format!("admitted with {mention} last week.");
        out.nel.push((mention, sentence, a.id.clone()));
    }
    out
}

impl SynthBenchmarks {
    pub fn concept_pairs_tsv(&self) -> String {
        let mut s = String::from("term1\tterm2\tgold\n");
        for (a, b, g) in &self.concept_pairs {
            s.push_str(&format!("{a}\t{b}\t{g}\n"));
        }
        s
    }

    pub fn sts_tsv(&self) -> String {
        let mut s = String::from("s1\ts2\tgold\n");
        for p in &self.sts {
            s.push_str(&format!("{}\t{}\t{}\n", p.first, p.second, p.score));
        }
        s
    }

    pub fn nli_tsv(&self) -> String {
        let mut s = String::new();
        for (p, e, c) in &self.nli {
            s.push_str(&format!("{p}\t{e}\t{c}\n"));
        }
        s
    }

    pub fn nel_tsv(&self) -> String {
        let mut s = String::new();
        for (m, sent, id) in &self.nel {
            s.push_str(&format!("{m}\t{sent}\t{id}\n"));
        }
        s
    }
}
