use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ontorep::descgen::{
    generate_corpus_with_depth, parse_description_line, write_corpus, VerbLexicon,
};
use ontorep::evalsuite::{
    build_concept_index, build_l2p, eval_concept_similarity, eval_l2p, eval_nel,
    eval_nli_triplets, eval_sts, parse_concept_pairs, parse_nel, parse_nli, parse_sts,
    similarity_matrix_report, CandidateIndex, Distance, EvalReport, L2pBenchmark, L2pOptions,
    LabeledTerm, ParentMode, Scale,
};
use ontorep::ontograph::{DuplicatePolicy, KindTable, LoadOptions, OntologyGraph};
use ontorep::pairset::{build_pairs, pairs_to_bytes, parse_weights, read_pairs, split, PairConfig};
use ontorep::synth::{synth_benchmarks, synth_ontology, SynthConfig};
use ontorep::trainer::{
    curve_to_csv, finetune_sts, in_batch_accuracy, train, train_from, Encoder, FinetuneConfig,
    TrainConfig,
};
use ontorep::vecindex::EmbeddingMatrix;
use serde::Serialize;
use serde_json::json;

use crate::config::render_resolved;
use crate::run::Run;
use crate::*;

pub const CONCEPTS_FILE: &str = "concepts.jsonl";
pub const EDGES_FILE: &str = "edges.jsonl";

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(&a),
        Command::GenDesc(a) => gen_desc(&a),
        Command::SamplePairs(a) => sample_pairs(&a),
        Command::Split(a) => split_cmd(&a),
        Command::Train(a) => train_cmd(&a),
        Command::FinetuneSts(a) => finetune_cmd(&a),
        Command::Embed(a) => embed(&a),
        Command::EvalSim(a) => eval_sim(&a),
        Command::BuildL2p(a) => build_l2p_cmd(&a),
        Command::EvalL2p(a) => eval_l2p_cmd(&a),
        Command::EvalSts(a) => eval_sts_cmd(&a),
        Command::EvalNli(a) => eval_nli_cmd(&a),
        Command::EvalNel(a) => eval_nel_cmd(&a),
        Command::SimMatrix(a) => sim_matrix(&a),
        Command::Search(a) => search(&a),
        Command::Synth(a) => synth(&a),
    }
}

fn read_text(run: &mut Run, role: &str, path: &Path) -> Result<String> {
    let path = input_path(path);
    run.input(role, &path)?;
    fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
}

fn load_graph(run: &mut Run, dir: &Path) -> Result<OntologyGraph> {
    let dir = input_path(dir);
    let (c, e) = (dir.join(CONCEPTS_FILE), dir.join(EDGES_FILE));
    run.input("concepts", &c)?;
    run.input("edges", &e)?;
    let g = OntologyGraph::load(&c, &e, &LoadOptions::default())?;
    log::info!("graph: {:?}", g.stats());
    Ok(g)
}

fn load_model(run: &mut Run, path: &Path) -> Result<Encoder<f32>> {
    let path = input_path(path);
    run.input("model", &path)?;
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Encoder::read_checkpoint(BufReader::new(file))?)
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializes");
    s.push('\n');
    s.into_bytes()
}

fn emit_report(run: &mut Run, report: &EvalReport) -> Result<()> {
    print!("{}", report.to_text());
    run.output("report.json", format!("{}\n", report.to_json()).as_bytes())?;
    run.output("report.txt", report.to_text().as_bytes())?;
    Ok(())
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let mut run = Run::create("ingest", &a.out)?;
    let concepts = input_path(&a.concepts);
    let edges = input_path(&a.edges);
    run.input("concepts", &concepts)?;
    run.input("edges", &edges)?;
    let kinds = match &a.kinds {
        Some(p) => KindTable::parse(&read_text(&mut run, "kinds", p)?)
            .map_err(|m| anyhow::anyhow!("kinds file: {m}"))?,
        None => KindTable::default(),
    };
    let options = LoadOptions {
        kinds,
        duplicates: if a.merge_duplicates {
            DuplicatePolicy::Merge
        } else {
            DuplicatePolicy::Error
        },
    };
    let g = OntologyGraph::load(&concepts, &edges, &options)?;
    let mut buf = Vec::new();
    g.write_concepts(&mut buf)?;
    run.output(CONCEPTS_FILE, &buf)?;
    buf.clear();
    g.write_edges(&mut buf)?;
    run.output(EDGES_FILE, &buf)?;
    let stats = g.stats();
    println!("{}", serde_json::to_string(&stats)?);
    run.output("stats.json", &json_bytes(&stats))?;
    run.finish(&render_resolved(a))
}

fn gen_desc(a: &GenDescArgs) -> Result<()> {
    let mut run = Run::create("gen-desc", &a.out)?;
    let g = load_graph(&mut run, &a.graph)?;
    let lexicon = match &a.lexicon {
        Some(p) => VerbLexicon::parse(&read_text(&mut run, "lexicon", p)?)?,
        None => VerbLexicon::default(),
    };
    let corpus = generate_corpus_with_depth(&g, a.count, a.seed, &lexicon, a.max_depth)?;
    let mut buf = Vec::new();
    write_corpus(&corpus, &mut buf)?;
    run.output("descriptions.jsonl", &buf)?;
    run.finish(&render_resolved(a))
}

fn sample_pairs(a: &SamplePairsArgs) -> Result<()> {
    let mut run = Run::create("sample-pairs", &a.out)?;
    let g = load_graph(&mut run, &a.graph)?;
    let text = read_text(&mut run, "descriptions", &a.descriptions)?;
    let mut descriptions = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        descriptions.push(
            parse_description_line(line)
                .map_err(|m| anyhow::anyhow!("descriptions line {}: {m}", i + 1))?,
        );
    }
    let concept_weights = match &a.weights {
        Some(p) => Some(parse_weights(&read_text(&mut run, "weights", p)?)?),
        None => None,
    };
    let config = PairConfig {
        total: a.total,
        def_fraction: a.def_fraction,
        def_repeat_cap: a.def_cap,
        seed: a.seed,
        concept_weights,
    };
    let (pairs, mut manifest) = build_pairs(&g, &descriptions, &config)?;
    manifest.inputs.insert(
        "descriptions".into(),
        ontorep::digest::sha256_hex(text.as_bytes()),
    );
    run.output("pairs.tsv", &pairs_to_bytes(&pairs))?;
    run.output("dataset.json", &json_bytes(&manifest))?;
    println!(
        "{} pairs, definition fraction {:.4}",
        manifest.total_pairs, manifest.definition_fraction
    );
    run.finish(&render_resolved(a))
}

fn read_pair_file(run: &mut Run, role: &str, path: &Path) -> Result<Vec<ontorep::TrainingPair>> {
    let path = input_path(path);
    run.input(role, &path)?;
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_pairs(BufReader::new(file))?)
}

fn split_cmd(a: &SplitArgs) -> Result<()> {
    let mut run = Run::create("split", &a.out)?;
    let pairs = read_pair_file(&mut run, "pairs", &a.pairs)?;
    let (train, dev) = split(&pairs, a.dev_fraction, a.seed)?;
    run.output("train.tsv", &pairs_to_bytes(&train))?;
    run.output("dev.tsv", &pairs_to_bytes(&dev))?;
    println!("{} train, {} dev", train.len(), dev.len());
    run.finish(&render_resolved(a))
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    let mut run = Run::create("train", &a.out)?;
    let pairs = read_pair_file(&mut run, "pairs", &a.pairs)?;
    let dev = match &a.dev {
        Some(p) => Some(read_pair_file(&mut run, "dev", p)?),
        None => None,
    };
    let config = TrainConfig {
        batch_size: a.batch_size,
        learning_rate: a.lr,
        warmup_fraction: a.warmup,
        weight_decay: a.weight_decay,
        epochs: a.epochs,
        seed: a.seed,
        temperature: a.temperature as f32,
        buckets: a.buckets,
        dim: a.dim,
        init_scale: a.init_scale,
    };
    let start = match &a.init {
        Some(p) => Some(load_model(&mut run, p)?),
        None => None,
    };
    let before = match (&dev, &start) {
        (Some(d), Some(e)) => Some(in_batch_accuracy(e, d, a.batch_size)?),
        (Some(d), None) => {
            let e = Encoder::new(a.buckets, a.dim, a.temperature as f32, a.init_scale, a.seed);
            Some(in_batch_accuracy(&e, d, a.batch_size)?)
        }
        _ => None,
    };
    let outcome = match start {
        Some(e) => train_from(e, &pairs, &config)?,
        None => train(&pairs, &config)?,
    };
    let after = match &dev {
        Some(d) => Some(in_batch_accuracy(&outcome.encoder, d, a.batch_size)?),
        None => None,
    };
    run.output("model.ckpt", &outcome.encoder.to_checkpoint_bytes())?;
    run.output("curve.csv", curve_to_csv(&outcome.curve).as_bytes())?;
    let last = outcome.curve.last().map(|c| c.loss);
    let metrics = json!({
        "steps": outcome.curve.len(),
        "final_loss": last,
        "dev_acc_at_1_before": before,
        "dev_acc_at_1_after": after,
        "model_sha256": outcome.encoder.checksum(),
    });
    println!("{}", serde_json::to_string(&metrics)?);
    run.output("metrics.json", &json_bytes(&metrics))?;
    run.finish(&render_resolved(a))
}

fn finetune_cmd(a: &FinetuneArgs) -> Result<()> {
    let mut run = Run::create("finetune-sts", &a.out)?;
    let encoder = load_model(&mut run, &a.model)?;
    let train_pairs = parse_sts(&read_text(&mut run, "train", &a.train)?)?;
    let dev = parse_sts(&read_text(&mut run, "dev", &a.dev)?)?;
    let config = FinetuneConfig {
        batch_size: a.batch_size,
        learning_rate: a.lr,
        warmup_fraction: a.warmup,
        weight_decay: a.weight_decay,
        epochs: a.epochs,
        seed: a.seed,
        select_best: !a.keep_last,
    };
    let outcome = finetune_sts(encoder, &train_pairs, &dev, &config)?;
    run.output("model.ckpt", &outcome.encoder.to_checkpoint_bytes())?;
    let history = json!({ "best_epoch": outcome.best_epoch, "epochs": outcome.history });
    println!("best epoch {}", outcome.best_epoch);
    run.output("history.json", &json_bytes(&history))?;
    run.finish(&render_resolved(a))
}

fn embed(a: &EmbedArgs) -> Result<()> {
    let mut run = Run::create("embed", &a.out)?;
    let encoder = load_model(&mut run, &a.model)?;
    let g = load_graph(&mut run, &a.graph)?;
    let index = build_concept_index(&encoder, &g, a.synonyms)?;
    let mut buf = Vec::new();
    index.matrix.write(&mut buf)?;
    run.output("embeddings.orem", &buf)?;
    println!("{} rows, dim {}", index.matrix.len(), index.matrix.dim());
    run.finish(&render_resolved(a))
}

fn eval_sim(a: &EvalSimArgs) -> Result<()> {
    let mut run = Run::create("eval-sim", &a.out)?;
    let encoder = load_model(&mut run, &a.model)?;
    let scale = match (a.scale_min, a.scale_max) {
        (Some(min), Some(max)) => Some(Scale { min, max }),
        (None, None) => None,
        _ => bail!(UsageError("--scale-min and --scale-max go together".into())),
    };
    let name = a
        .pairs
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "pairs".into());
    let bench = parse_concept_pairs(&name, &read_text(&mut run, "pairs", &a.pairs)?, scale)?;
    let distances: Vec<Distance> = if a.distance == "all" {
        Distance::ALL.to_vec()
    } else {
        vec![a.distance.parse().map_err(UsageError)?]
    };
    let mut reports = Vec::new();
    for d in distances {
        let r = eval_concept_similarity(&encoder, &bench, d)?;
        print!("{}", r.to_text());
        reports.push(r);
    }
    run.output("report.json", &json_bytes(&reports))?;
    let text: String = reports.iter().map(EvalReport::to_text).collect();
    run.output("report.txt", text.as_bytes())?;
    run.finish(&render_resolved(a))
}

fn l2p_options(ancestors: bool, synonyms: bool) -> L2pOptions {
    L2pOptions {
        parents: if ancestors {
            ParentMode::Ancestors
        } else {
            ParentMode::Direct
        },
        synonyms,
    }
}

fn build_l2p_cmd(a: &BuildL2pArgs) -> Result<()> {
    let mut run = Run::create("build-l2p", &a.out)?;
    let g = load_graph(&mut run, &a.graph)?;
    let b = build_l2p(&g, &l2p_options(a.ancestors, a.synonyms))?;
    println!("{} queries, {} candidates", b.queries.len(), b.candidates.len());
    run.output("l2p.json", format!("{}\n", b.to_json()).as_bytes())?;
    run.finish(&render_resolved(a))
}

fn eval_l2p_cmd(a: &EvalL2pArgs) -> Result<()> {
    let mut run = Run::create("eval-l2p", &a.out)?;
    let encoder = load_model(&mut run, &a.model)?;
    let bench = match (&a.benchmark, &a.graph) {
        (Some(p), None) => L2pBenchmark::from_json(&read_text(&mut run, "benchmark", p)?)?,
        (None, Some(dir)) => {
            let g = load_graph(&mut run, dir)?;
            build_l2p(&g, &l2p_options(a.ancestors, a.synonyms))?
        }
        _ => bail!(UsageError("give exactly one of --benchmark and --graph".into())),
    };
    let report = eval_l2p(&encoder, &bench, a.k_miss)?;
    emit_report(&mut run, &report)?;
    run.finish(&render_resolved(a))
}

fn eval_sts_cmd(a: &EvalStsArgs) -> Result<()> {
    let mut run = Run::create("eval-sts", &a.out)?;
    let encoder = load_model(&mut run, &a.model)?;
    let pairs = parse_sts(&read_text(&mut run, "pairs", &a.pairs)?)?;
    let report = eval_sts(&encoder, &pairs)?;
    emit_report(&mut run, &report)?;
    run.finish(&render_resolved(a))
}

fn eval_nli_cmd(a: &EvalNliArgs) -> Result<()> {
    let mut run = Run::create("eval-nli", &a.out)?;
    let encoder = load_model(&mut run, &a.model)?;
    let triplets = parse_nli(&read_text(&mut run, "triplets", &a.triplets)?)?;
    let report = eval_nli_triplets(&encoder, &triplets)?;
    emit_report(&mut run, &report)?;
    run.finish(&render_resolved(a))
}

fn read_index(run: &mut Run, path: &Path) -> Result<EmbeddingMatrix> {
    let path = input_path(path);
    run.input("index", &path)?;
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    Ok(EmbeddingMatrix::read(BufReader::new(file))?)
}

fn eval_nel_cmd(a: &EvalNelArgs) -> Result<()> {
    let mut run = Run::create("eval-nel", &a.out)?;
    let encoder = load_model(&mut run, &a.model)?;
    let mentions = parse_nel(&read_text(&mut run, "mentions", &a.mentions)?)?;
    let index = match (&a.index, &a.graph) {
        (Some(p), None) => CandidateIndex::from_matrix(read_index(&mut run, p)?),
        (None, Some(dir)) => {
            let g = load_graph(&mut run, dir)?;
            build_concept_index(&encoder, &g, a.synonyms)?
        }
        _ => bail!(UsageError("give exactly one of --index and --graph".into())),
    };
    let report = eval_nel(&encoder, &mentions, &index)?;
    emit_report(&mut run, &report)?;
    run.finish(&render_resolved(a))
}

fn sim_matrix(a: &SimMatrixArgs) -> Result<()> {
    let mut run = Run::create("sim-matrix", &a.out)?;
    let encoder = load_model(&mut run, &a.model)?;
    let terms = LabeledTerm::parse_list(&read_text(&mut run, "terms", &a.terms)?);
    let m = similarity_matrix_report(&encoder, &terms)?;
    for d in &m.duplicates {
        log::warn!("duplicate term: {d}");
    }
    let text = m.render_text();
    print!("{text}");
    run.output("matrix.txt", text.as_bytes())?;
    run.output("matrix.csv", m.to_csv().as_bytes())?;
    let summary = json!({
        "terms": m.len(),
        "group_means": m.group_means(),
        "between_group_mean": m.between_group_mean(),
        "duplicates": m.duplicates,
        "model": encoder.checksum(),
    });
    run.output("summary.json", &json_bytes(&summary))?;
    run.finish(&render_resolved(a))
}

fn search(a: &SearchArgs) -> Result<()> {
    let scratch;
    let dir = match &a.out {
        Some(d) => d.as_path(),
        None => {
            scratch = std::env::temp_dir().join(format!("ontorep-search-{}", std::process::id()));
            scratch.as_path()
        }
    };
    let mut run = Run::create("search", dir)?;
    let encoder = load_model(&mut run, &a.model)?;
    let index = read_index(&mut run, &a.index)?;
    let mut results = Vec::new();
    for q in &a.queries {
        let v = encoder.encode(q)?;
        let ranked = index.topk(&v, a.k)?;
        println!("{q}");
        for (i, h) in ranked.hits.iter().enumerate() {
            println!("  {:>3}. {:<24} {:.4}", i + 1, h.id, h.score);
        }
        results.push(json!({
            "query": q,
            "clamped": ranked.clamped,
            "hits": ranked.hits.iter().map(|h| json!({"id": h.id, "score": h.score})).collect::<Vec<_>>(),
        }));
    }
    if a.out.is_some() {
        run.output("hits.json", &json_bytes(&results))?;
        run.finish(&render_resolved(a))?;
    } else {
        let _ = fs::remove_dir_all(dir);
    }
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<()> {
    let mut run = Run::create("synth", &a.out)?;
    let g = synth_ontology(&SynthConfig::new(a.leaves, a.non_leaves, a.seed))?;
    let mut buf = Vec::new();
    g.write_concepts(&mut buf)?;
    run.output(CONCEPTS_FILE, &buf)?;
    buf.clear();
    g.write_edges(&mut buf)?;
    run.output(EDGES_FILE, &buf)?;
    if a.benchmarks > 0 {
        let b = synth_benchmarks(&g, a.benchmarks, a.seed);
        run.output("concept_pairs.tsv", b.concept_pairs_tsv().as_bytes())?;
        run.output("sts.tsv", b.sts_tsv().as_bytes())?;
        run.output("nli.tsv", b.nli_tsv().as_bytes())?;
        run.output("nel.tsv", b.nel_tsv().as_bytes())?;
    }
    println!("{}", serde_json::to_string(&g.stats())?);
    run.finish(&render_resolved(a))
}
