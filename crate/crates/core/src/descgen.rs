//! Templated descriptions built from graph relationships.
//!
//! Every description has the shape
//!
//! ```text
//! [more-generic-concept] which [relation phrase] [related-concept name]
//! ```
//!
//! The generic slot is drawn uniformly from the names of the concept's
//! ancestors, its semantic types, and one extra BLANK candidate rendered as
//! `something`. The relation is drawn uniformly from the concept's outgoing
//! edges, and the related name uniformly from the target's names.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontograph::{ConceptId, GraphError, OntologyGraph, DEFAULT_MAX_DEPTH};
use crate::SeededRng;

/// Text rendered for an empty generic slot.
pub const BLANK: &str = "something";

/// Descriptions per independent RNG stream in [`generate_corpus`].
pub const CORPUS_BLOCK: usize = 4096;

#[derive(Debug, Error)]
pub enum DescError {
    #[error("concept `{0}` has no outgoing relationships")]
    NoRelations(ConceptId),
    #[error("graph has no concept with an outgoing relationship")]
    NoEligibleConcepts,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
}

/// How a relationship label becomes a verb phrase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerbRule {
    UseAsIs,
    PrependIs,
    PrependHas,
    Custom(String),
}

impl VerbRule {
    fn apply(&self, label: &str) -> String {
        let base = label.replace('_', " ");
        match self {
            VerbRule::UseAsIs => base,
            VerbRule::PrependIs => format!("is {base}"),
            VerbRule::PrependHas => format!("has {base}"),
            VerbRule::Custom(phrase) => phrase.clone(),
        }
    }
}

/// Label → [`VerbRule`] table with a fallback for unmapped labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerbLexicon {
    rules: BTreeMap<String, VerbRule>,
    default_rule: VerbRule,
}

impl VerbLexicon {
    pub fn empty(default_rule: VerbRule) -> Self {
        VerbLexicon {
            rules: BTreeMap::new(),
            default_rule,
        }
    }

    pub fn insert(&mut self, label: &str, rule: VerbRule) -> &mut Self {
        self.rules.insert(label.to_owned(), rule);
        self
    }

    pub fn default_rule(&self) -> &VerbRule {
        &self.default_rule
    }

    pub fn rule_for(&self, label: &str) -> &VerbRule {
        self.rules.get(label).unwrap_or(&self.default_rule)
    }

    /// Parse `label<TAB>rule[<TAB>phrase]` lines; rule is one of
    /// `use_as_is`, `prepend_is`, `prepend_has`, `custom`. The label `*`
    /// sets the fallback rule. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, DescError> {
        let mut lexicon = VerbLexicon::empty(VerbRule::PrependIs);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| DescError::Lexicon {
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let rule = match (fields.get(1).copied(), fields.get(2).copied()) {
                (Some("use_as_is"), None) => VerbRule::UseAsIs,
                (Some("prepend_is"), None) => VerbRule::PrependIs,
                (Some("prepend_has"), None) => VerbRule::PrependHas,
                (Some("custom"), Some(phrase)) if !phrase.trim().is_empty() => {
                    VerbRule::Custom(phrase.to_owned())
                }
                (Some("custom"), _) => return Err(err("custom rule needs a phrase".into())),
                (rule, _) => return Err(err(format!("unknown rule {rule:?}"))),
            };
            if fields[0] == "*" {
                lexicon.default_rule = rule;
            } else {
                lexicon.rules.insert(fields[0].to_owned(), rule);
            }
        }
        Ok(lexicon)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let line = |label: &str, rule: &VerbRule| match rule {
            VerbRule::UseAsIs => format!("{label}\tuse_as_is\n"),
            VerbRule::PrependIs => format!("{label}\tprepend_is\n"),
            VerbRule::PrependHas => format!("{label}\tprepend_has\n"),
            VerbRule::Custom(p) => format!("{label}\tcustom\t{p}\n"),
        };
        out.push_str(&line("*", &self.default_rule));
        for (label, rule) in &self.rules {
            out.push_str(&line(label, rule));
        }
        out
    }
}

impl Default for VerbLexicon {
    /// Common UMLS/SnomedCT relationship labels. Labels already phrased as
    /// verbs are used as they are; nominal ones get `is`/`has`.
    fn default() -> Self {
        let mut lex = VerbLexicon::empty(VerbRule::PrependIs);
        for label in [
            "may_treat",
            "may_prevent",
            "may_diagnose",
            "may_be_treated_by",
            "may_be_prevented_by",
            "has_finding_site",
            "has_causative_agent",
            "has_active_ingredient",
            "has_associated_morphology",
            "has_method",
            "has_procedure_site",
            "has_interpretation",
            "has_dose_form",
            "has_component",
            "has_direct_substance",
            "has_pathological_process",
            "occurs_after",
            "occurs_in",
            "causes",
            "treats",
            "interacts_with",
            "contraindicated_with",
        ] {
            lex.insert(label, VerbRule::UseAsIs);
        }
        for label in [
            "active_ingredient",
            "finding_site",
            "causative_agent",
            "associated_morphology",
            "dose_form",
            "component",
            "method",
            "procedure_site",
            "pathological_process",
        ] {
            lex.insert(label, VerbRule::PrependHas);
        }
        lex.insert("isa", VerbRule::Custom("is a".into()));
        lex.insert("is_a", VerbRule::Custom("is a".into()));
        lex.insert("inverse_isa", VerbRule::Custom("has subtype".into()));
        lex.insert("part_of", VerbRule::PrependIs);
        lex.insert("associated_with", VerbRule::PrependIs);
        lex
    }
}

/// Relation label → phrase usable right after the generic slot.
pub fn verbalize_relation(label: &str, lexicon: &VerbLexicon) -> String {
    lexicon.rule_for(label).apply(label)
}

/// Recorded template slots of a description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slots {
    /// `None` is the BLANK candidate.
    pub generic: Option<String>,
    pub relation: String,
    pub related: String,
}

impl Slots {
    pub fn render(&self) -> String {
        format!(
            "{} which {} {}",
            self.generic.as_deref().unwrap_or(BLANK),
            self.relation,
            self.related
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Description {
    pub concept_id: ConceptId,
    pub text: String,
    pub slots: Slots,
    /// Target concept of the chosen edge.
    pub related_id: ConceptId,
    /// Generator position (stream, word) when sampling started.
    pub rng_state: (u64, u128),
}

#[derive(Serialize, Deserialize)]
struct DescriptionRecord {
    concept_id: String,
    text: String,
    generic: Option<String>,
    relation: String,
    related: String,
}

impl Description {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&DescriptionRecord {
            concept_id: self.concept_id.0.clone(),
            text: self.text.clone(),
            generic: self.slots.generic.clone(),
            relation: self.slots.relation.clone(),
            related: self.slots.related.clone(),
        })
        .expect("description record serializes")
    }
}

/// A description as read back from `descriptions.jsonl`; the slot values
/// are kept but the generator state and target id are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredDescription {
    pub concept_id: ConceptId,
    pub text: String,
    pub slots: Slots,
}

impl From<&Description> for StoredDescription {
    fn from(d: &Description) -> Self {
        StoredDescription {
            concept_id: d.concept_id.clone(),
            text: d.text.clone(),
            slots: d.slots.clone(),
        }
    }
}

pub fn parse_description_line(line: &str) -> Result<StoredDescription, String> {
    let rec: DescriptionRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let slots = Slots {
        generic: rec.generic,
        relation: rec.relation,
        related: rec.related,
    };
    if slots.render() != rec.text {
        return Err(format!("text does not match slots: {:?}", rec.text));
    }
    Ok(StoredDescription {
        concept_id: ConceptId(rec.concept_id),
        text: rec.text,
        slots,
    })
}

/// Candidate fillers for the generic slot, sorted and deduplicated;
/// BLANK is not included.
pub fn generic_candidates(
    graph: &OntologyGraph,
    id: &ConceptId,
    max_depth: usize,
) -> Result<Vec<String>, DescError> {
    let concept = graph
        .concept(id)
        .ok_or_else(|| GraphError::UnknownConcept(id.0.clone()))?;
    let mut pool = BTreeSet::new();
    for ancestor in graph.ancestors(id, max_depth)? {
        let a = graph.concept(&ancestor).expect("ancestor resolves");
        pool.extend(a.names.iter().cloned());
    }
    pool.extend(concept.semantic_types.iter().cloned());
    Ok(pool.into_iter().collect())
}

/// Sample one description for a concept.
pub fn generate_description(
    graph: &OntologyGraph,
    id: &ConceptId,
    lexicon: &VerbLexicon,
    rng: &mut SeededRng,
) -> Result<Description, DescError> {
    generate_with_depth(graph, id, lexicon, DEFAULT_MAX_DEPTH, rng)
}

pub fn generate_with_depth(
    graph: &OntologyGraph,
    id: &ConceptId,
    lexicon: &VerbLexicon,
    max_depth: usize,
    rng: &mut SeededRng,
) -> Result<Description, DescError> {
    let rng_state = (rng.get_stream(), rng.get_word_pos());
    let edges: Vec<_> = graph.outgoing(id)?.collect();
    if edges.is_empty() {
        return Err(DescError::NoRelations(id.clone()));
    }
    let pool = generic_candidates(graph, id, max_depth)?;
    // index == pool.len() is the BLANK candidate
    let pick = rng.random_range(0..=pool.len());
    let generic = pool.get(pick).cloned();
    let edge = edges[rng.random_range(0..edges.len())];
    let target = graph.concept(&edge.target).expect("edge target resolves");
    let related = target.names[rng.random_range(0..target.names.len())].clone();
    let slots = Slots {
        generic,
        relation: verbalize_relation(&edge.label, lexicon),
        related,
    };
    Ok(Description {
        concept_id: id.clone(),
        text: slots.render(),
        slots,
        related_id: edge.target.clone(),
        rng_state,
    })
}

/// Cumulative out-degree table for degree-proportional concept sampling.
struct DegreeSampler {
    cumulative: Vec<u64>,
}

impl DegreeSampler {
    fn new(graph: &OntologyGraph) -> Option<Self> {
        let mut total = 0u64;
        let cumulative: Vec<u64> = (0..graph.len())
            .map(|i| {
                total += graph.out_degree_at(i) as u64;
                total
            })
            .collect();
        (total > 0).then_some(DegreeSampler { cumulative })
    }

    fn sample(&self, rng: &mut SeededRng) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let r = rng.random_range(0..total);
        self.cumulative.partition_point(|&c| c <= r)
    }
}

/// `count` descriptions; concepts drawn proportionally to out-degree.
///
/// The output is split into blocks of [`CORPUS_BLOCK`]; block `b` uses
/// ChaCha stream `b` of the seed, so the result does not depend on how many
/// threads generate it.
pub fn generate_corpus(
    graph: &OntologyGraph,
    count: usize,
    seed: u64,
    lexicon: &VerbLexicon,
) -> Result<Vec<Description>, DescError> {
    generate_corpus_with_depth(graph, count, seed, lexicon, DEFAULT_MAX_DEPTH)
}

pub fn generate_corpus_with_depth(
    graph: &OntologyGraph,
    count: usize,
    seed: u64,
    lexicon: &VerbLexicon,
    max_depth: usize,
) -> Result<Vec<Description>, DescError> {
    let sampler = DegreeSampler::new(graph).ok_or(DescError::NoEligibleConcepts)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let blocks = count.div_ceil(CORPUS_BLOCK);
    let chunks: Vec<Vec<Description>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = SeededRng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = CORPUS_BLOCK.min(count - b * CORPUS_BLOCK);
            (0..len)
                .map(|_| {
                    let pos = sampler.sample(&mut rng);
                    let id = &graph.concepts()[pos].id;
                    generate_with_depth(graph, id, lexicon, max_depth, &mut rng)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

pub fn write_corpus<W: Write>(descriptions: &[Description], mut out: W) -> io::Result<()> {
    for d in descriptions {
        out.write_all(d.to_json_line().as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontograph::{tests::concept, Concept, EdgeKind, Relationship};

    fn lex() -> VerbLexicon {
        VerbLexicon::default()
    }

    #[test]
    fn verbal_labels() {
        assert_eq!(verbalize_relation("may_treat", &lex()), "may treat");
        let mut l = VerbLexicon::empty(VerbRule::PrependIs);
        l.insert("active_ingredient", VerbRule::PrependHas);
        assert_eq!(
            verbalize_relation("active_ingredient", &l),
            "has active ingredient"
        );
        assert_eq!(verbalize_relation("xyz_rel", &l), "is xyz rel");
    }

    #[test]
    fn lexicon_tsv_round_trip() {
        let parsed = VerbLexicon::parse(&lex().to_tsv()).unwrap();
        assert_eq!(parsed, lex());
        assert!(VerbLexicon::parse("x\tcustom\n").is_err());
        assert!(VerbLexicon::parse("x\tbogus\n").is_err());
    }

    fn drug_graph() -> OntologyGraph {
        OntologyGraph::new(
            vec![
                concept("aspirin", &["aspirin"]),
                concept("drug", &["drug"]),
                concept("headache", &["headache"]),
            ],
            vec![
                Relationship {
                    source: "aspirin".into(),
                    target: "drug".into(),
                    label: "isa".into(),
                    kind: EdgeKind::Hierarchical,
                },
                Relationship {
                    source: "aspirin".into(),
                    target: "headache".into(),
                    label: "may_treat".into(),
                    kind: EdgeKind::Associative,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn drug_which_may_treat_headache() {
        let g = drug_graph();
        let mut seen = BTreeSet::new();
        for seed in 0..200 {
            let mut rng = SeededRng::seed_from_u64(seed);
            let d = generate_description(&g, &"aspirin".into(), &lex(), &mut rng).unwrap();
            assert_eq!(d.slots.render(), d.text);
            seen.insert(d.text);
        }
        assert!(seen.contains("drug which may treat headache"));
        assert!(seen.contains("something which may treat headache"));
        assert!(seen.contains("drug which is a drug"));
        assert!(seen.iter().all(|t| t.starts_with("drug which ") || t.starts_with("something which ")));
    }

    #[test]
    fn no_relations_error() {
        let g = drug_graph();
        let mut rng = SeededRng::seed_from_u64(1);
        assert!(matches!(
            generate_description(&g, &"headache".into(), &lex(), &mut rng),
            Err(DescError::NoRelations(_))
        ));
    }

    #[test]
    fn seeded_determinism() {
        let g = drug_graph();
        let a = generate_description(&g, &"aspirin".into(), &lex(), &mut SeededRng::seed_from_u64(42));
        let b = generate_description(&g, &"aspirin".into(), &lex(), &mut SeededRng::seed_from_u64(42));
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn corpus_edge_cases() {
        let g = drug_graph();
        assert!(generate_corpus(&g, 0, 3, &lex()).unwrap().is_empty());
        let only = OntologyGraph::new(vec![concept("a", &["a"])], vec![]).unwrap();
        assert!(matches!(
            generate_corpus(&only, 5, 3, &lex()),
            Err(DescError::NoEligibleConcepts)
        ));
        let c = generate_corpus(&g, CORPUS_BLOCK + 7, 3, &lex()).unwrap();
        assert_eq!(c.len(), CORPUS_BLOCK + 7);
        assert!(c.iter().all(|d| d.concept_id.as_str() == "aspirin"));
    }

    #[test]
    fn stored_lines_parse_back() {
        let g = drug_graph();
        for d in generate_corpus(&g, 50, 9, &lex()).unwrap() {
            let back = parse_description_line(&d.to_json_line()).unwrap();
            assert_eq!(back, StoredDescription::from(&d));
        }
        let bad = r#"{"concept_id":"a","text":"x","generic":null,"relation":"r","related":"y"}"#;
        assert!(parse_description_line(bad).is_err());
    }

    #[test]
    fn semantic_types_fill_generic_slot() {
        let mut c: Concept = concept("x", &["x"]);
        c.semantic_types = vec!["pharmacologic substance".into()];
        let g = OntologyGraph::new(
            vec![c, concept("y", &["y"])],
            vec![Relationship {
                source: "x".into(),
                target: "y".into(),
                label: "may_treat".into(),
                kind: EdgeKind::Associative,
            }],
        )
        .unwrap();
        assert_eq!(
            generic_candidates(&g, &"x".into(), 10).unwrap(),
            vec!["pharmacologic substance".to_string()]
        );
    }
}
