//! Python bindings: ontology loading and synthesis, description and pair
//! generation, training, the top-k index and the evaluation battery.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use ontorep::descgen::{generate_corpus, StoredDescription, VerbLexicon};
use ontorep::evalsuite::{
    self, build_concept_index, build_l2p, eval_l2p, eval_nel, eval_nli_triplets, eval_sts,
    EvalReport, L2pOptions, NelMention, NliTriplet, ParentMode, DEFAULT_K_MISS,
};
use ontorep::ontograph::{LoadOptions, OntologyGraph};
use ontorep::pairset::{build_pairs, read_pairs, PairConfig, PairKind, TrainingPair};
use ontorep::synth::{synth_ontology, SynthConfig};
use ontorep::trainer::{self, in_batch_accuracy, StsPair, TrainConfig};
use ontorep::vecindex::EmbeddingMatrix;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn io_err(e: impl std::fmt::Display) -> PyErr {
    PyIOError::new_err(e.to_string())
}

fn metrics(report: EvalReport) -> BTreeMap<String, f64> {
    report.metrics
}

/// Hashed bag-of-tokens bi-encoder.
#[pyclass(name = "Encoder", module = "ontorep._ontorep")]
struct PyEncoder {
    inner: trainer::Encoder<f32>,
}

#[pymethods]
impl PyEncoder {
    #[new]
    #[pyo3(signature = (buckets = 1 << 15, dim = 64, temperature = 0.05, init_scale = 1e-3, seed = 0))]
    fn new(buckets: usize, dim: usize, temperature: f32, init_scale: f64, seed: u64) -> PyResult<Self> {
        if buckets == 0 || dim == 0 {
            return Err(value_err("buckets and dim must be positive"));
        }
        Ok(PyEncoder {
            inner: trainer::Encoder::new(buckets, dim, temperature, init_scale, seed),
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let file = File::open(&path).map_err(io_err)?;
        let inner = trainer::Encoder::read_checkpoint(BufReader::new(file)).map_err(value_err)?;
        Ok(PyEncoder { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let file = File::create(&path).map_err(io_err)?;
        self.inner
            .write_checkpoint(BufWriter::new(file))
            .map_err(io_err)
    }

    fn encode(&self, text: &str) -> PyResult<Vec<f32>> {
        self.inner.encode(text).map_err(value_err)
    }

    fn encode_batch(&self, py: Python<'_>, texts: Vec<String>) -> PyResult<Vec<Vec<f32>>> {
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        py.detach(|| evalsuite::embed_all(&self.inner, &refs))
            .map_err(value_err)
    }

    fn checksum(&self) -> String {
        self.inner.checksum()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn buckets(&self) -> usize {
        self.inner.buckets()
    }

    fn __repr__(&self) -> String {
        format!(
            "Encoder(buckets={}, dim={}, checksum={})",
            self.inner.buckets(),
            self.inner.dim(),
            &self.inner.checksum()[..12]
        )
    }
}

/// Multi-relational ontology graph.
#[pyclass(name = "Ontology", module = "ontorep._ontorep")]
struct PyOntology {
    inner: OntologyGraph,
}

#[pymethods]
impl PyOntology {
    #[staticmethod]
    fn load(concepts: PathBuf, edges: PathBuf) -> PyResult<Self> {
        let inner = OntologyGraph::load(&concepts, &edges, &LoadOptions::default()).map_err(value_err)?;
        Ok(PyOntology { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (leaves = 550, non_leaves = 150, seed = 0))]
    fn synth(leaves: usize, non_leaves: usize, seed: u64) -> PyResult<Self> {
        let inner = synth_ontology(&SynthConfig::new(leaves, non_leaves, seed)).map_err(value_err)?;
        Ok(PyOntology { inner })
    }

    /// Write `concepts.jsonl` and `edges.jsonl` into `dir`.
    fn write(&self, dir: PathBuf) -> PyResult<()> {
        fs::create_dir_all(&dir).map_err(io_err)?;
        let c = File::create(dir.join("concepts.jsonl")).map_err(io_err)?;
        self.inner.write_concepts(BufWriter::new(c)).map_err(io_err)?;
        let e = File::create(dir.join("edges.jsonl")).map_err(io_err)?;
        self.inner.write_edges(BufWriter::new(e)).map_err(io_err)
    }

    fn stats(&self) -> BTreeMap<&'static str, usize> {
        let s = self.inner.stats();
        BTreeMap::from([
            ("concepts", s.concepts),
            ("names", s.names),
            ("definitions", s.definitions),
            ("edges", s.edges),
            ("hierarchical_edges", s.hierarchical_edges),
        ])
    }

    fn names(&self, id: &str) -> PyResult<Vec<String>> {
        self.inner
            .concept(&id.into())
            .map(|c| c.names.clone())
            .ok_or_else(|| value_err(format!("unknown concept {id}")))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// `(concept_id, text)` descriptions sampled from the graph.
#[pyfunction]
fn generate_descriptions(
    py: Python<'_>,
    graph: &PyOntology,
    count: usize,
    seed: u64,
) -> PyResult<Vec<(String, String)>> {
    let corpus = py
        .detach(|| generate_corpus(&graph.inner, count, seed, &VerbLexicon::default()))
        .map_err(value_err)?;
    Ok(corpus
        .into_iter()
        .map(|d| (d.concept_id.0, d.text))
        .collect())
}

/// `(anchor, positive, concept_id, kind)` training pairs.
#[pyfunction]
#[pyo3(signature = (graph, total, seed, descriptions = 20_000, def_fraction = 0.15, def_cap = 50))]
fn sample_pairs(
    py: Python<'_>,
    graph: &PyOntology,
    total: usize,
    seed: u64,
    descriptions: usize,
    def_fraction: f64,
    def_cap: usize,
) -> PyResult<Vec<(String, String, String, String)>> {
    let pairs = py.detach(|| -> PyResult<Vec<TrainingPair>> {
        let corpus: Vec<StoredDescription> =
            generate_corpus(&graph.inner, descriptions, seed, &VerbLexicon::default())
                .map_err(value_err)?
                .iter()
                .map(StoredDescription::from)
                .collect();
        let cfg = PairConfig {
            def_fraction,
            def_repeat_cap: def_cap,
            ..PairConfig::new(total, seed)
        };
        Ok(build_pairs(&graph.inner, &corpus, &cfg).map_err(value_err)?.0)
    })?;
    Ok(pairs.into_iter().map(tuple_of).collect())
}

/// Pairs from a `pairs.tsv` file.
#[pyfunction]
fn load_pairs(path: PathBuf) -> PyResult<Vec<(String, String, String, String)>> {
    let file = File::open(&path).map_err(io_err)?;
    let pairs = read_pairs(BufReader::new(file)).map_err(value_err)?;
    Ok(pairs.into_iter().map(tuple_of).collect())
}

fn tuple_of(p: TrainingPair) -> (String, String, String, String) {
    let kind = match p.kind {
        PairKind::Definition => "definition",
        PairKind::Description => "description",
    };
    (p.anchor, p.positive, p.concept_id.0, kind.to_owned())
}

fn pairs_of(rows: Vec<(String, String)>) -> Vec<TrainingPair> {
    rows.into_iter()
        .map(|(anchor, positive)| TrainingPair {
            anchor,
            positive,
            concept_id: "".into(),
            kind: PairKind::Description,
        })
        .collect()
}

/// Train a fresh encoder on `(anchor, positive)` pairs.
#[pyfunction]
#[pyo3(signature = (pairs, seed, batch_size = 64, lr = 2e-5, warmup = 0.05, weight_decay = 0.01, epochs = 1, dim = 64, buckets = 1 << 15))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    pairs: Vec<(String, String)>,
    seed: u64,
    batch_size: usize,
    lr: f64,
    warmup: f64,
    weight_decay: f64,
    epochs: usize,
    dim: usize,
    buckets: usize,
) -> PyResult<(PyEncoder, Vec<f64>)> {
    let pairs = pairs_of(pairs);
    let cfg = TrainConfig {
        batch_size,
        learning_rate: lr,
        warmup_fraction: warmup,
        weight_decay,
        epochs,
        dim,
        buckets,
        ..TrainConfig::new(seed)
    };
    let outcome = py.detach(|| trainer::train(&pairs, &cfg)).map_err(value_err)?;
    let losses = outcome.curve.iter().map(|p| p.loss).collect();
    Ok((PyEncoder { inner: outcome.encoder }, losses))
}

/// In-batch positive-retrieval accuracy over consecutive batches.
#[pyfunction]
#[pyo3(signature = (encoder, pairs, batch_size = 64))]
fn batch_accuracy(
    py: Python<'_>,
    encoder: &PyEncoder,
    pairs: Vec<(String, String)>,
    batch_size: usize,
) -> PyResult<f64> {
    let pairs = pairs_of(pairs);
    py.detach(|| in_batch_accuracy(&encoder.inner, &pairs, batch_size))
        .map_err(value_err)
}

/// Exact top-k cosine index over unit vectors.
#[pyclass(name = "EmbeddingIndex", module = "ontorep._ontorep")]
struct PyIndex {
    inner: EmbeddingMatrix,
}

#[pymethods]
impl PyIndex {
    #[new]
    fn new(ids: Vec<String>, vectors: Vec<Vec<f32>>) -> PyResult<Self> {
        let inner = EmbeddingMatrix::from_rows(ids, vectors).map_err(value_err)?;
        Ok(PyIndex { inner })
    }

    /// Canonical names (and synonyms if asked) of every concept.
    #[staticmethod]
    #[pyo3(signature = (encoder, graph, synonyms = false))]
    fn from_ontology(py: Python<'_>, encoder: &PyEncoder, graph: &PyOntology, synonyms: bool) -> PyResult<Self> {
        let index = py
            .detach(|| build_concept_index(&encoder.inner, &graph.inner, synonyms))
            .map_err(value_err)?;
        Ok(PyIndex { inner: index.matrix })
    }

    #[pyo3(signature = (query, k = 10))]
    fn topk(&self, py: Python<'_>, query: Vec<f32>, k: usize) -> PyResult<Vec<(String, f32)>> {
        let hits = py.detach(|| self.inner.topk(&query, k)).map_err(value_err)?;
        Ok(hits.hits.into_iter().map(|h| (h.id, h.score)).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    evalsuite::spearman(&x, &y).map_err(value_err)
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    evalsuite::pearson(&x, &y).map_err(value_err)
}

/// Leaf-to-parent ranking metrics on the graph.
#[pyfunction]
#[pyo3(signature = (encoder, graph, ancestors = false, synonyms = false, k_miss = DEFAULT_K_MISS))]
fn evaluate_l2p(
    py: Python<'_>,
    encoder: &PyEncoder,
    graph: &PyOntology,
    ancestors: bool,
    synonyms: bool,
    k_miss: usize,
) -> PyResult<BTreeMap<String, f64>> {
    let options = L2pOptions {
        parents: if ancestors {
            ParentMode::Ancestors
        } else {
            ParentMode::Direct
        },
        synonyms,
    };
    py.detach(|| {
        let bench = build_l2p(&graph.inner, &options).map_err(value_err)?;
        eval_l2p(&encoder.inner, &bench, k_miss).map_err(value_err)
    })
    .map(metrics)
}

/// Spearman and Pearson against `(first, second, score)` rows, scores in [0, 5].
#[pyfunction]
fn evaluate_sts(py: Python<'_>, encoder: &PyEncoder, rows: Vec<(String, String, f64)>) -> PyResult<BTreeMap<String, f64>> {
    let pairs: Vec<StsPair> = rows
        .into_iter()
        .map(|(first, second, score)| StsPair { first, second, score })
        .collect();
    py.detach(|| eval_sts(&encoder.inner, &pairs))
        .map(metrics)
        .map_err(value_err)
}

/// Accuracy on `(premise, entailed, contradicted)` triplets.
#[pyfunction]
fn evaluate_nli(py: Python<'_>, encoder: &PyEncoder, rows: Vec<(String, String, String)>) -> PyResult<BTreeMap<String, f64>> {
    let triplets = rows
        .iter()
        .map(|(p, e, c)| NliTriplet::new(p, e, c).map_err(value_err))
        .collect::<PyResult<Vec<_>>>()?;
    py.detach(|| eval_nli_triplets(&encoder.inner, &triplets))
        .map(metrics)
        .map_err(value_err)
}

/// Linking accuracy on `(mention, sentence, gold_id)` rows.
#[pyfunction]
#[pyo3(signature = (encoder, graph, rows, synonyms = false))]
fn evaluate_nel(
    py: Python<'_>,
    encoder: &PyEncoder,
    graph: &PyOntology,
    rows: Vec<(String, String, String)>,
    synonyms: bool,
) -> PyResult<BTreeMap<String, f64>> {
    let mentions: Vec<NelMention> = rows
        .into_iter()
        .map(|(mention, sentence, gold)| NelMention {
            mention,
            sentence,
            gold: gold.into(),
        })
        .collect();
    py.detach(|| {
        let index = build_concept_index(&encoder.inner, &graph.inner, synonyms).map_err(value_err)?;
        eval_nel(&encoder.inner, &mentions, &index).map_err(value_err)
    })
    .map(metrics)
}

#[pymodule]
fn _ontorep(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyEncoder>()?;
    m.add_class::<PyOntology>()?;
    m.add_class::<PyIndex>()?;
    m.add_function(wrap_pyfunction!(generate_descriptions, m)?)?;
    m.add_function(wrap_pyfunction!(sample_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(load_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(batch_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_l2p, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_sts, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_nli, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_nel, m)?)?;
    Ok(())
}
