//! Multi-relational ontology graph.
//!
//! Concepts carry names (first = canonical), definitions and semantic types.
//! Edges are typed; hierarchical edges always point child → parent and feed
//! the derived child → parents adjacency used for ancestor traversal.
//!
//! Input is JSONL, one object per line:
//!
//! ```text
//! concepts.jsonl  {"id": str, "names": [str], "definitions": [str], "semantic_types": [str]}
//! edges.jsonl     {"source": str, "target": str, "label": str, "kind": "hierarchical"|"associative"}
//! ```
//!
//! `kind` may be omitted, in which case the label is looked up in a
//! [`KindTable`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on ancestor traversal depth.
pub const DEFAULT_MAX_DEPTH: usize = 10;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: malformed record: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate concept id `{0}`")]
    DuplicateConcept(String),
    #[error("edge {source_id} -[{label}]-> {target_id} references unknown concept `{missing}`")]
    DanglingEndpoint {
        source_id: String,
        target_id: String,
        label: String,
        missing: String,
    },
    #[error("unknown concept id `{0}`")]
    UnknownConcept(String),
    #[error("max_depth must be positive")]
    ZeroDepth,
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// Opaque concept identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(pub String);

impl ConceptId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ConceptId {
    fn from(s: &str) -> Self {
        ConceptId(s.to_owned())
    }
}

impl From<String> for ConceptId {
    fn from(s: String) -> Self {
        ConceptId(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: ConceptId,
    pub names: Vec<String>,
    #[serde(default)]
    pub definitions: Vec<String>,
    #[serde(default)]
    pub semantic_types: Vec<String>,
}

impl Concept {
    pub fn canonical_name(&self) -> &str {
        &self.names[0]
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.0.trim().is_empty() {
            return Err("empty concept id".into());
        }
        if self.names.is_empty() {
            return Err(format!("concept `{}` has no names", self.id));
        }
        if self.names.iter().any(|n| n.trim().is_empty()) {
            return Err(format!("concept `{}` has a blank name", self.id));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Hierarchical,
    Associative,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relationship {
    pub source: ConceptId,
    pub target: ConceptId,
    pub label: String,
    pub kind: EdgeKind,
}

/// How a relationship label is interpreted when an edge omits `kind`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelKind {
    /// Source is the child, target the parent.
    Hierarchical,
    /// Source is the parent; the edge is flipped on load so it points child → parent.
    InverseHierarchical,
    Associative,
}

/// Per-label hierarchical/associative declaration.
#[derive(Clone, Debug)]
pub struct KindTable {
    labels: HashMap<String, LabelKind>,
    fallback: LabelKind,
}

impl Default for KindTable {
    fn default() -> Self {
        let mut labels = HashMap::new();
        for l in ["isa", "is_a", "subclass_of", "par", "parent", "broader"] {
            labels.insert(l.to_owned(), LabelKind::Hierarchical);
        }
        for l in ["inverse_isa", "has_subtype", "chd", "child", "narrower"] {
            labels.insert(l.to_owned(), LabelKind::InverseHierarchical);
        }
        KindTable {
            labels,
            fallback: LabelKind::Associative,
        }
    }
}

impl KindTable {
    pub fn empty(fallback: LabelKind) -> Self {
        KindTable {
            labels: HashMap::new(),
            fallback,
        }
    }

    pub fn insert(&mut self, label: &str, kind: LabelKind) {
        self.labels.insert(label.to_lowercase(), kind);
    }

    pub fn lookup(&self, label: &str) -> LabelKind {
        self.labels
            .get(&label.to_lowercase())
            .copied()
            .unwrap_or(self.fallback)
    }

    /// Parse `label<TAB>hierarchical|inverse_hierarchical|associative` lines.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut table = KindTable::empty(LabelKind::Associative);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let label = parts.next().unwrap_or_default();
            let kind = match parts.next().map(str::trim) {
                Some("hierarchical") => LabelKind::Hierarchical,
                Some("inverse_hierarchical") => LabelKind::InverseHierarchical,
                Some("associative") => LabelKind::Associative,
                other => return Err(format!("line {}: bad kind {:?}", i + 1, other)),
            };
            if label == "*" {
                table.fallback = kind;
            } else {
                table.insert(label, kind);
            }
        }
        Ok(table)
    }
}

/// What to do when the same concept id appears twice in the concept file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DuplicatePolicy {
    #[default]
    Error,
    /// Union names, definitions and semantic types, keeping first-seen order.
    Merge,
}

#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    pub kinds: KindTable,
    pub duplicates: DuplicatePolicy,
}

/// Counts reported after a load.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub concepts: usize,
    pub names: usize,
    pub definitions: usize,
    pub edges: usize,
    pub hierarchical_edges: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    source: String,
    target: String,
    label: String,
    #[serde(default)]
    kind: Option<EdgeKind>,
}

/// Immutable validated ontology.
#[derive(Clone, Debug, PartialEq)]
pub struct OntologyGraph {
    concepts: Vec<Concept>,
    index: HashMap<ConceptId, usize>,
    edges: Vec<Relationship>,
    outgoing: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
    children_count: Vec<usize>,
}

impl OntologyGraph {
    /// Build from in-memory records, validating every invariant.
    pub fn new(concepts: Vec<Concept>, edges: Vec<Relationship>) -> Result<Self> {
        Self::with_policy(concepts, edges, DuplicatePolicy::Error)
    }

    pub fn with_policy(
        concepts: Vec<Concept>,
        edges: Vec<Relationship>,
        duplicates: DuplicatePolicy,
    ) -> Result<Self> {
        let mut merged: Vec<Concept> = Vec::with_capacity(concepts.len());
        let mut index = HashMap::with_capacity(concepts.len());
        for concept in concepts {
            if let Err(message) = concept.validate() {
                return Err(GraphError::Malformed {
                    path: PathBuf::new(),
                    line: 0,
                    message,
                });
            }
            match index.get(&concept.id) {
                None => {
                    index.insert(concept.id.clone(), merged.len());
                    merged.push(concept);
                }
                Some(&i) => match duplicates {
                    DuplicatePolicy::Error => {
                        return Err(GraphError::DuplicateConcept(concept.id.0))
                    }
                    DuplicatePolicy::Merge => merge_into(&mut merged[i], concept),
                },
            }
        }

        let n = merged.len();
        let mut outgoing = vec![Vec::new(); n];
        let mut parents = vec![Vec::new(); n];
        let mut children_count = vec![0usize; n];
        for (ei, edge) in edges.iter().enumerate() {
            let missing = |id: &ConceptId| GraphError::DanglingEndpoint {
                source_id: edge.source.0.clone(),
                target_id: edge.target.0.clone(),
                label: edge.label.clone(),
                missing: id.0.clone(),
            };
            let s = *index.get(&edge.source).ok_or_else(|| missing(&edge.source))?;
            let t = *index.get(&edge.target).ok_or_else(|| missing(&edge.target))?;
            outgoing[s].push(ei);
            if edge.kind == EdgeKind::Hierarchical && !parents[s].contains(&t) {
                parents[s].push(t);
                children_count[t] += 1;
            }
        }

        Ok(OntologyGraph {
            concepts: merged,
            index,
            edges,
            outgoing,
            parents,
            children_count,
        })
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            concepts: self.concepts.len(),
            names: self.concepts.iter().map(|c| c.names.len()).sum(),
            definitions: self.concepts.iter().map(|c| c.definitions.len()).sum(),
            edges: self.edges.len(),
            hierarchical_edges: self
                .edges
                .iter()
                .filter(|e| e.kind == EdgeKind::Hierarchical)
                .count(),
        }
    }

    /// Concepts in file order.
    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn edges(&self) -> &[Relationship] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concept(&self, id: &ConceptId) -> Option<&Concept> {
        self.index.get(id).map(|&i| &self.concepts[i])
    }

    pub fn position(&self, id: &ConceptId) -> Option<usize> {
        self.index.get(id).copied()
    }

    fn require(&self, id: &ConceptId) -> Result<usize> {
        self.position(id)
            .ok_or_else(|| GraphError::UnknownConcept(id.0.clone()))
    }

    /// All outgoing edges of a concept, hierarchical ones included.
    pub fn outgoing(&self, id: &ConceptId) -> Result<impl Iterator<Item = &Relationship>> {
        let i = self.require(id)?;
        Ok(self.outgoing[i].iter().map(move |&e| &self.edges[e]))
    }

    pub fn out_degree_at(&self, position: usize) -> usize {
        self.outgoing[position].len()
    }

    /// Direct hierarchical parents.
    pub fn parents(&self, id: &ConceptId) -> Result<BTreeSet<ConceptId>> {
        let i = self.require(id)?;
        Ok(self.parents[i]
            .iter()
            .map(|&p| self.concepts[p].id.clone())
            .collect())
    }

    /// Transitive hierarchical parents up to `max_depth` hops, excluding `id`.
    ///
    /// Breadth-first with a visited set, so cycles terminate.
    pub fn ancestors(&self, id: &ConceptId, max_depth: usize) -> Result<BTreeSet<ConceptId>> {
        if max_depth == 0 {
            return Err(GraphError::ZeroDepth);
        }
        let start = self.require(id)?;
        let mut visited = vec![false; self.concepts.len()];
        visited[start] = true;
        let mut frontier = vec![start];
        let mut out = BTreeSet::new();
        for _ in 0..max_depth {
            let mut next = Vec::new();
            for node in frontier {
                for &p in &self.parents[node] {
                    if !visited[p] {
                        visited[p] = true;
                        out.insert(self.concepts[p].id.clone());
                        next.push(p);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(out)
    }

    /// Concepts with no hierarchical child.
    pub fn leaf_ids(&self) -> BTreeSet<ConceptId> {
        self.concepts
            .iter()
            .zip(&self.children_count)
            .filter(|(_, &c)| c == 0)
            .map(|(concept, _)| concept.id.clone())
            .collect()
    }

    pub fn is_leaf(&self, id: &ConceptId) -> Result<bool> {
        Ok(self.children_count[self.require(id)?] == 0)
    }

    /// Load and validate `concepts.jsonl` + `edges.jsonl`.
    pub fn load(concepts_path: &Path, edges_path: &Path, options: &LoadOptions) -> Result<Self> {
        let concepts = read_jsonl(concepts_path, |line| {
            serde_json::from_str::<Concept>(line).map_err(|e| e.to_string())
        })?;
        for (line, c) in &concepts {
            c.validate().map_err(|message| GraphError::Malformed {
                path: concepts_path.to_owned(),
                line: *line,
                message,
            })?;
        }
        let edges = read_jsonl(edges_path, |line| {
            let rec: EdgeRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
            Ok(resolve_edge(rec, &options.kinds))
        })?;
        Self::with_policy(
            concepts.into_iter().map(|(_, c)| c).collect(),
            edges.into_iter().map(|(_, e)| e).collect(),
            options.duplicates,
        )
    }

    pub fn write_concepts<W: Write>(&self, mut out: W) -> io::Result<()> {
        for c in &self.concepts {
            serde_json::to_writer(&mut out, c)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_edges<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.edges {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Concepts reachable by id, sorted, for stable iteration.
    pub fn sorted_ids(&self) -> BTreeMap<&ConceptId, &Concept> {
        self.concepts.iter().map(|c| (&c.id, c)).collect()
    }
}

fn resolve_edge(rec: EdgeRecord, kinds: &KindTable) -> Relationship {
    let (source, target, kind) = match rec.kind {
        Some(kind) => (rec.source, rec.target, kind),
        None => match kinds.lookup(&rec.label) {
            LabelKind::Hierarchical => (rec.source, rec.target, EdgeKind::Hierarchical),
            LabelKind::InverseHierarchical => (rec.target, rec.source, EdgeKind::Hierarchical),
            LabelKind::Associative => (rec.source, rec.target, EdgeKind::Associative),
        },
    };
    Relationship {
        source: ConceptId(source),
        target: ConceptId(target),
        label: rec.label,
        kind,
    }
}

fn merge_into(into: &mut Concept, other: Concept) {
    fn extend(dst: &mut Vec<String>, src: Vec<String>) {
        for s in src {
            if !dst.contains(&s) {
                dst.push(s);
            }
        }
    }
    extend(&mut into.names, other.names);
    extend(&mut into.definitions, other.definitions);
    extend(&mut into.semantic_types, other.semantic_types);
}

/// Read a JSONL file, skipping blank lines, reporting 1-based line numbers.
fn read_jsonl<T>(
    path: &Path,
    mut parse: impl FnMut(&str) -> std::result::Result<T, String>,
) -> Result<Vec<(usize, T)>> {
    let io_err = |source| GraphError::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = parse(&line).map_err(|message| GraphError::Malformed {
            path: path.to_owned(),
            line: i + 1,
            message,
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}
