//! Leaf-to-parent linking over the leaf-pruned hierarchy.
//!
//! Queries are leaf names; candidates are the non-leaf concepts. A query
//! succeeds at rank r when its best-ranked true parent is the r-th candidate.
//! Candidate order is score descending, then concept id ascending.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EvalError, EvalReport, Embedder, Fingerprint};
use crate::ontograph::{ConceptId, OntologyGraph, DEFAULT_MAX_DEPTH};
use crate::vecindex::{dot, EmbeddingMatrix};

pub const DEFAULT_K_MISS: usize = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParentMode {
    #[default]
    Direct,
    Ancestors,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2pOptions {
    pub parents: ParentMode,
    /// Embed every name of a candidate, scoring the concept by its best one.
    pub synonyms: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2pQuery {
    pub name: String,
    pub leaf: ConceptId,
    pub parents: BTreeSet<ConceptId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2pCandidate {
    pub id: ConceptId,
    pub names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2pBenchmark {
    pub options: L2pOptions,
    pub queries: Vec<L2pQuery>,
    /// Sorted by id.
    pub candidates: Vec<L2pCandidate>,
}

impl L2pBenchmark {
    pub fn candidate_ids(&self) -> BTreeSet<ConceptId> {
        self.candidates.iter().map(|c| c.id.clone()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("benchmark serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        let b: L2pBenchmark = serde_json::from_str(text).map_err(|e| EvalError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let ids = b.candidate_ids();
        for q in &b.queries {
            if ids.contains(&q.leaf) || !q.parents.is_subset(&ids) {
                return Err(EvalError::Parse {
                    line: 0,
                    message: format!("query for `{}` violates candidate invariants", q.leaf),
                });
            }
        }
        Ok(b)
    }
}

/// One query per name of every leaf that has a non-leaf parent.
pub fn build_l2p(graph: &OntologyGraph, options: &L2pOptions) -> Result<L2pBenchmark, EvalError> {
    if graph.stats().hierarchical_edges == 0 {
        return Err(EvalError::NoHierarchy);
    }
    let leaves = graph.leaf_ids();
    let candidates: Vec<L2pCandidate> = graph
        .sorted_ids()
        .into_iter()
        .filter(|(id, _)| !leaves.contains(*id))
        .map(|(id, c)| {
            let names = if options.synonyms {
                c.names.clone()
            } else {
                vec![c.canonical_name().to_owned()]
            };
            L2pCandidate {
                id: id.clone(),
                names,
            }
        })
        .collect();
    let mut queries = Vec::new();
    for leaf in &leaves {
        let parents = match options.parents {
            ParentMode::Direct => graph.parents(leaf)?,
            ParentMode::Ancestors => graph.ancestors(leaf, DEFAULT_MAX_DEPTH)?,
        };
        let parents: BTreeSet<ConceptId> =
            parents.into_iter().filter(|p| !leaves.contains(p)).collect();
        if parents.is_empty() {
            continue;
        }
        for name in &graph.concept(leaf).expect("leaf from graph").names {
            queries.push(L2pQuery {
                name: name.clone(),
                leaf: leaf.clone(),
                parents: parents.clone(),
            });
        }
    }
    if queries.is_empty() {
        return Err(EvalError::NoLeaves);
    }
    Ok(L2pBenchmark {
        options: *options,
        queries,
        candidates,
    })
}

/// 1-based rank of the best true parent for each query.
pub fn eval_l2p_ranks<E: Embedder + ?Sized>(
    model: &E,
    benchmark: &L2pBenchmark,
) -> Result<Vec<usize>, EvalError> {
    if benchmark.queries.is_empty() {
        return Err(EvalError::Empty("query set"));
    }
    if benchmark.candidates.is_empty() {
        return Err(EvalError::Empty("candidate set"));
    }
    let mut keys = Vec::new();
    let mut texts: Vec<&str> = Vec::new();
    let mut owner = Vec::new();
    for (ci, c) in benchmark.candidates.iter().enumerate() {
        for (k, name) in c.names.iter().enumerate() {
            keys.push(format!("{}#{k}", c.id));
            texts.push(name);
            owner.push(ci);
        }
    }
    let rows = super::embed_all(model, &texts)?;
    let matrix = EmbeddingMatrix::from_rows(keys, rows)?;
    let n_cand = benchmark.candidates.len();
    let position = |id: &ConceptId| {
        benchmark
            .candidates
            .binary_search_by(|c| c.id.cmp(id))
            .ok()
    };
    benchmark
        .queries
        .par_iter()
        .map(|q| {
            let v = model.embed(&q.name)?;
            if v.len() != matrix.dim() {
                return Err(EvalError::Index(crate::vecindex::IndexError::DimMismatch {
                    got: v.len(),
                    expected: matrix.dim(),
                }));
            }
            let mut best = vec![f32::NEG_INFINITY; n_cand];
            for (r, &ci) in owner.iter().enumerate() {
                let s = dot(matrix.row(r), &v);
                if s > best[ci] {
                    best[ci] = s;
                }
            }
            // Candidates are id-sorted, so index order breaks ties.
            let ranks_before = |target: usize| {
                let t = best[target];
                best.iter()
                    .enumerate()
                    .filter(|&(i, &s)| s > t || (s == t && i < target))
                    .count()
            };
            let top = q
                .parents
                .iter()
                .filter_map(position)
                .map(ranks_before)
                .min()
                .ok_or_else(|| EvalError::UnknownGold(q.leaf.to_string()))?;
            Ok(top + 1)
        })
        .collect()
}

/// MRR, Acc@1 and the share of queries with no parent in the top `k_miss`.
pub fn eval_l2p<E: Embedder + ?Sized>(
    model: &E,
    benchmark: &L2pBenchmark,
    k_miss: usize,
) -> Result<EvalReport, EvalError> {
    let ranks = eval_l2p_ranks(model, benchmark)?;
    let n = ranks.len() as f64;
    let mrr = ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / n;
    let acc = ranks.iter().filter(|&&r| r == 1).count() as f64 / n;
    let missing = ranks.iter().filter(|&&r| r > k_miss).count() as f64 / n;
    let mut fingerprint = Fingerprint {
        model: model.fingerprint(),
        distance: Some("cosine".into()),
        ..Fingerprint::default()
    };
    let parents = match benchmark.options.parents {
        ParentMode::Direct => "direct",
        ParentMode::Ancestors => "ancestors",
    };
    fingerprint.options.insert("parents".into(), parents.into());
    fingerprint
        .options
        .insert("synonyms".into(), benchmark.options.synonyms.to_string());
    fingerprint
        .options
        .insert("candidates".into(), benchmark.candidates.len().to_string());
    Ok(EvalReport::new("l2p", "mrr", ranks.len(), fingerprint)
        .with("mrr", mrr)
        .with("acc_at_1", acc)
        .with(&format!("missing_at_{k_miss}"), missing))
}

#[cfg(test)]
mod tests {
    use super::super::tests::TableEmbedder;
    use super::*;
    use crate::ontograph::tests::{chain, concept, isa};
    use std::collections::HashMap;

    #[test]
    fn chain_gives_single_query() {
        let g = chain();
        let b = build_l2p(&g, &L2pOptions::default()).unwrap();
        assert_eq!(b.queries.len(), 1);
        assert_eq!(b.queries[0].leaf.as_str(), "A");
        assert_eq!(
            b.queries[0].parents,
            BTreeSet::from([ConceptId::from("B")])
        );
        let ids: Vec<&str> = b.candidates.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["B", "C"]);
        let wide = build_l2p(
            &g,
            &L2pOptions {
                parents: ParentMode::Ancestors,
                synonyms: false,
            },
        )
        .unwrap();
        assert_eq!(wide.queries[0].parents.len(), 2);
    }

    #[test]
    fn no_hierarchy() {
        let g = OntologyGraph::new(vec![concept("A", &["a"])], vec![]).unwrap();
        assert!(matches!(
            build_l2p(&g, &L2pOptions::default()),
            Err(EvalError::NoHierarchy)
        ));
    }

    fn table(entries: &[(&str, [f32; 2])]) -> TableEmbedder {
        TableEmbedder(
            entries
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_vec()))
                .collect::<HashMap<_, _>>(),
        )
    }

    #[test]
    fn parent_ranked_second() {
        // leaf x under p; q is a sibling root that scores higher.
        let g = OntologyGraph::new(
            vec![
                concept("x", &["leafname"]),
                concept("y", &["other"]),
                concept("p", &["pname"]),
                concept("q", &["qname"]),
            ],
            vec![isa("x", "p"), isa("y", "q")],
        )
        .unwrap();
        let b = build_l2p(&g, &L2pOptions::default()).unwrap();
        let e = table(&[
            ("leafname", [1.0, 0.0]),
            ("other", [0.8, 0.6]),
            ("pname", [0.6, 0.8]),
            ("qname", [0.8, 0.6]),
        ]);
        let mut ranks = eval_l2p_ranks(&e, &b).unwrap();
        ranks.sort();
        assert_eq!(ranks, [1, 2]);
        let r = eval_l2p(&e, &b, 1).unwrap();
        assert_eq!(r.value("mrr"), Some(0.75));
        assert_eq!(r.value("acc_at_1"), Some(0.5));
        assert_eq!(r.value("missing_at_1"), Some(0.5));
    }

    #[test]
    fn oracle_encoder_is_perfect() {
        let g = OntologyGraph::new(
            vec![
                concept("x", &["leafname"]),
                concept("p", &["pname"]),
                concept("q", &["qname"]),
            ],
            vec![isa("x", "p"), isa("p", "q")],
        )
        .unwrap();
        let b = build_l2p(&g, &L2pOptions::default()).unwrap();
        let e = table(&[
            ("leafname", [0.6, 0.8]),
            ("pname", [0.6, 0.8]),
            ("qname", [1.0, 0.0]),
        ]);
        let r = eval_l2p(&e, &b, 1000).unwrap();
        assert_eq!(r.value("acc_at_1"), Some(1.0));
        assert_eq!(r.value("mrr"), Some(1.0));
    }

    #[test]
    fn json_round_trip() {
        let b = build_l2p(&chain(), &L2pOptions::default()).unwrap();
        assert_eq!(L2pBenchmark::from_json(&b.to_json()).unwrap(), b);
    }
}
