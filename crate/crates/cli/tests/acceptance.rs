//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ontorep::descgen::{generate_corpus, verbalize_relation, StoredDescription, VerbLexicon, BLANK};
use ontorep::digest::{file_sha256, sha256_hex};
use ontorep::evalsuite::{
    build_l2p, eval_l2p, eval_nli_triplets, midranks, pearson, spearman, EvalReport, L2pBenchmark,
    L2pOptions, NliTriplet, ParentMode, DEFAULT_K_MISS,
};
use ontorep::ontograph::{ConceptId, EdgeKind, OntologyGraph};
use ontorep::pairset::{build_pairs, pairs_to_bytes, split, PairConfig, PairKind};
use ontorep::synth::{synth_ontology, SynthConfig};
use ontorep::trainer::{in_batch_accuracy, infonce_loss, train, Encoder, Matrix, TrainConfig};
use ontorep::vecindex::EmbeddingMatrix;
use ontorep::SeededRng;
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn unit_rows(rng: &mut SeededRng, n: usize, d: usize) -> Matrix<f64> {
    let mut m = Matrix::zeros(n, d);
    for i in 0..n {
        let row = m.row_mut(i);
        for x in row.iter_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        row.iter_mut().for_each(|x| *x /= norm);
    }
    m
}

fn gradient_oracle() -> Outcome {
    const STEP: f64 = 1e-4;
    let start = Instant::now();
    let mut rng = SeededRng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = unit_rows(&mut rng, 8, 16);
        let b = unit_rows(&mut rng, 8, 16);
        let out = infonce_loss(&a, &b, 0.05).map_err(|e| e.to_string())?;
        for (which, grad) in [(0, &out.grad_anchors), (1, &out.grad_positives)] {
            for k in 0..a.as_slice().len() {
                let bump = |delta: f64| {
                    let (mut a2, mut b2) = (a.clone(), b.clone());
                    let t = if which == 0 { &mut a2 } else { &mut b2 };
                    t.as_mut_slice()[k] += delta;
                    infonce_loss(&a2, &b2, 0.05).unwrap().loss
                };
                let numeric = (bump(STEP) - bump(-STEP)) / (2.0 * STEP);
                worst = worst.max(rel_err(grad.as_slice()[k], numeric));
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(worst < 1e-4, || format!("max relative error {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("max relative error {worst:.2e} in {:.2}s", elapsed.as_secs_f64()))
}

fn two_pass_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn counting_midranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

fn correlation_oracles() -> Outcome {
    let mut rng = SeededRng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for round in 0..1000 {
        let tied = round % 2 == 0;
        let mut draw = || -> f64 {
            if tied {
                rng.random_range(0..12) as f64
            } else {
                rng.random_range(-10.0..10.0)
            }
        };
        let x: Vec<f64> = (0..100).map(|_| draw()).collect();
        let y: Vec<f64> = (0..100).map(|_| draw()).collect();
        let p = pearson(&x, &y).map_err(|e| e.to_string())?;
        let s = spearman(&x, &y).map_err(|e| e.to_string())?;
        ensure(midranks(&x) == counting_midranks(&x), || format!("midranks differ in round {round}"))?;
        let sp_oracle = two_pass_pearson(&counting_midranks(&x), &counting_midranks(&y));
        worst = worst.max((p - two_pass_pearson(&x, &y)).abs()).max((s - sp_oracle).abs());
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;

    let pts = (3usize..80).prop_flat_map(|n| {
        (
            prop::collection::vec(-100.0f64..100.0, n),
            prop::collection::vec(-100.0f64..100.0, n),
            0.1f64..10.0,
            -50.0f64..50.0,
        )
    });
    let mut runner = TestRunner::new(PropConfig {
        cases: 512,
        failure_persistence: None,
        ..PropConfig::default()
    });
    runner
        .run(&pts, |(x, y, a, b)| {
            prop_assume!(pearson(&x, &y).is_ok());
            let sp = spearman(&x, &y).unwrap();
            let tx: Vec<f64> = x.iter().map(|v| (v / 50.0).exp()).collect();
            let ty: Vec<f64> = y.iter().map(|v| v * v * v + 3.0 * v).collect();
            prop_assert!((spearman(&tx, &ty).unwrap() - sp).abs() < 1e-12);
            let pe = pearson(&x, &y).unwrap();
            let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let ay: Vec<f64> = y.iter().map(|v| a * v - b).collect();
            prop_assert!((pearson(&ax, &ay).unwrap() - pe).abs() < 1e-9);
            Ok(())
        })
        .map_err(|e| format!("invariance property failed: {e}"))?;
    Ok(format!("1000 instances, max deviation {worst:.1e}; 512 invariance cases"))
}

fn brute_topk(m: &EmbeddingMatrix, q: &[f32], k: usize) -> Vec<(String, f32)> {
    let mut all: Vec<(String, f32)> = (0..m.len())
        .map(|i| {
            let mut s = 0.0f32;
            for (a, b) in m.row(i).iter().zip(q) {
                s += a * b;
            }
            (m.ids()[i].clone(), s)
        })
        .collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

fn index_exactness() -> Outcome {
    let mut rng = SeededRng::seed_from_u64(303);
    let pools: Vec<rayon::ThreadPool> = [1, 2, 8]
        .iter()
        .map(|&t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap())
        .collect();
    let (n, d, k) = (10_000, 64, 50);
    let mut worst = 0.0f32;
    for inst in 0..100 {
        let data: Vec<f32> = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ids = (0..n).map(|i| format!("c{:05}", (i * 7919) % n)).collect();
        let m = EmbeddingMatrix::build(ids, d, data).map_err(|e| e.to_string())?;
        let q: Vec<f32> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let want = brute_topk(&m, &q, k);
        let runs: Vec<_> = pools
            .iter()
            .map(|p| p.install(|| m.topk(&q, k)).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        for r in &runs[1..] {
            ensure(r == &runs[0], || format!("thread counts disagree on instance {inst}"))?;
        }
        let got = &runs[0].hits;
        ensure(got.len() == k, || format!("{} hits", got.len()))?;
        for (h, (id, s)) in got.iter().zip(&want) {
            ensure(&h.id == id, || format!("instance {inst}: {} vs {id}", h.id))?;
            worst = worst.max((h.score - s).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("score deviation {worst:e}"))?;
    Ok(format!("100 instances identical at 1/2/8 threads, max score deviation {worst:.1e}"))
}

fn dataset_composition() -> Outcome {
    let g = synth_ontology(&SynthConfig::new(700, 300, 404)).map_err(|e| e.to_string())?;
    let corpus: Vec<StoredDescription> = generate_corpus(&g, 200_000, 404, &VerbLexicon::default())
        .map_err(|e| e.to_string())?
        .iter()
        .map(StoredDescription::from)
        .collect();
    let cfg = PairConfig::new(1_000_000, 404);
    let (pairs, manifest) = build_pairs(&g, &corpus, &cfg).map_err(|e| e.to_string())?;
    ensure(pairs.len() == 1_000_000, || format!("{} pairs", pairs.len()))?;
    let frac = manifest.definition_fraction;
    ensure((frac - 0.15).abs() <= 0.005, || format!("manifest fraction {frac}"))?;

    let mut per_def: HashMap<(&ConceptId, &str), HashMap<&str, usize>> = HashMap::new();
    for p in pairs.iter().filter(|p| p.kind == PairKind::Definition) {
        *per_def
            .entry((&p.concept_id, p.positive.as_str()))
            .or_default()
            .entry(p.anchor.as_str())
            .or_default() += 1;
    }
    let counted: usize = per_def.values().flat_map(|a| a.values()).sum();
    let scanned = counted as f64 / pairs.len() as f64;
    ensure((scanned - 0.15).abs() <= 0.005, || format!("scanned fraction {scanned}"))?;
    let mut max_use = 0;
    for ((id, _), anchors) in &per_def {
        let names = g.concept(id).ok_or("unknown concept")?.names.len();
        let uses: usize = anchors.values().sum();
        max_use = max_use.max(uses);
        ensure(uses <= 50, || format!("definition of {id} used {uses} times"))?;
        // all names appear before any repeats, so counts differ by at most one
        ensure(anchors.len() == uses.min(names), || format!("{id}: names not exhausted first"))?;
        let (lo, hi) = (uses / names, uses.div_ceil(names));
        ensure(anchors.values().all(|&c| c == lo || c == hi), || format!("{id}: uneven anchors"))?;
    }
    let definitions = per_def.len();
    drop(per_def);
    let digest = sha256_hex(&pairs_to_bytes(&pairs));
    drop(pairs);
    let (again, _) = build_pairs(&g, &corpus, &cfg).map_err(|e| e.to_string())?;
    ensure(sha256_hex(&pairs_to_bytes(&again)) == digest, || "rebuild differs".into())?;
    Ok(format!(
        "fraction {frac:.4}, {definitions} definitions, max use {max_use}, rebuild {}",
        &digest[..12]
    ))
}

fn bfs_ancestors(up: &HashMap<&ConceptId, Vec<&ConceptId>>, id: &ConceptId) -> BTreeSet<ConceptId> {
    let mut out = BTreeSet::new();
    let mut frontier = vec![id];
    for _ in 0..ontorep::ontograph::DEFAULT_MAX_DEPTH {
        let mut next = Vec::new();
        for node in frontier {
            for &p in up.get(node).map(Vec::as_slice).unwrap_or(&[]) {
                if p != id && out.insert(p.clone()) {
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    out
}

fn description_grounding() -> Outcome {
    let g = synth_ontology(&SynthConfig::new(700, 300, 505)).map_err(|e| e.to_string())?;
    ensure(g.len() == 1000, || format!("{} concepts", g.len()))?;
    let lex = VerbLexicon::default();
    let corpus = generate_corpus(&g, 100_000, 505, &lex).map_err(|e| e.to_string())?;
    let mut up: HashMap<&ConceptId, Vec<&ConceptId>> = HashMap::new();
    for e in g.edges().iter().filter(|e| e.kind == EdgeKind::Hierarchical) {
        up.entry(&e.source).or_default().push(&e.target);
    }
    let mut pools: HashMap<&ConceptId, HashSet<String>> = HashMap::new();
    let mut blanks = 0usize;
    for d in &corpus {
        let c = g.concept(&d.concept_id).ok_or("unknown anchor concept")?;
        let pool = pools.entry(&c.id).or_insert_with(|| {
            let mut pool: HashSet<String> = bfs_ancestors(&up, &c.id)
                .iter()
                .flat_map(|a| g.concept(a).unwrap().names.clone())
                .collect();
            pool.extend(c.semantic_types.iter().cloned());
            pool.insert(BLANK.to_owned());
            pool
        });
        let generic = d.slots.generic.clone().unwrap_or_else(|| BLANK.to_owned());
        blanks += usize::from(d.slots.generic.is_none());
        ensure(pool.contains(&generic), || format!("generic {generic:?} not grounded for {}", c.id))?;
        let target = g.concept(&d.related_id).ok_or("unknown related concept")?;
        ensure(target.names.contains(&d.slots.related), || format!("{:?} not a name of {}", d.slots.related, target.id))?;
        ensure(
            g.edges().iter().any(|e| {
                e.source == c.id
                    && e.target == d.related_id
                    && verbalize_relation(&e.label, &lex) == d.slots.relation
            }),
            || format!("no edge {} -> {} verbalized {:?}", c.id, d.related_id, d.slots.relation),
        )?;
        let rebuilt = format!("{} which {} {}", generic, d.slots.relation, d.slots.related);
        ensure(rebuilt == d.text, || format!("{:?} != {:?}", rebuilt, d.text))?;
    }
    Ok(format!("{} descriptions grounded ({blanks} blank generics)", corpus.len()))
}

fn l2p_fixture() -> (OntologyGraph, L2pBenchmark) {
    let g = synth_ontology(&SynthConfig::new(550, 150, 606)).expect("fixture graph");
    let b = build_l2p(&g, &L2pOptions::default()).expect("fixture benchmark");
    (g, b)
}

fn check_mrr(report: &EvalReport) -> Result<(f64, f64), String> {
    let mrr = report.value("mrr").ok_or("no mrr")?;
    let acc = report.value("acc_at_1").ok_or("no acc_at_1")?;
    ensure(mrr >= acc, || format!("mrr {mrr} < acc@1 {acc}"))?;
    Ok((mrr, acc))
}

fn l2p_construction() -> Outcome {
    let (g, _) = l2p_fixture();
    let mut has_child: HashSet<&ConceptId> = HashSet::new();
    for e in g.edges().iter().filter(|e| e.kind == EdgeKind::Hierarchical) {
        has_child.insert(&e.target);
    }
    let leaves = g.concepts().iter().filter(|c| !has_child.contains(&c.id)).count();
    ensure(leaves == 550 && has_child.len() == 150, || format!("{leaves} leaves, {} non-leaves", has_child.len()))?;
    let mut runs = 0;
    for parents in [ParentMode::Direct, ParentMode::Ancestors] {
        for synonyms in [false, true] {
            let b = build_l2p(&g, &L2pOptions { parents, synonyms }).map_err(|e| e.to_string())?;
            let cands = b.candidate_ids();
            ensure(cands.iter().all(|id| has_child.contains(id)), || "leaf among candidates".into())?;
            ensure(cands.len() == 150, || format!("{} candidates", cands.len()))?;
            for q in &b.queries {
                ensure(!q.parents.is_empty() && q.parents.is_subset(&cands), || format!("bad parents for {}", q.leaf))?;
            }
            for seed in 0..3 {
                let e = Encoder::<f32>::new(1 << 12, 16, 0.05, 0.5, seed);
                check_mrr(&eval_l2p(&e, &b, DEFAULT_K_MISS).map_err(|e| e.to_string())?)?;
                runs += 1;
            }
        }
    }
    Ok(format!("150 candidates, 0 leaves, MRR >= Acc@1 on {runs} runs"))
}

fn learning_signal() -> Outcome {
    let start = Instant::now();
    let (g, bench) = l2p_fixture();
    let corpus: Vec<StoredDescription> = generate_corpus(&g, 60_000, 707, &VerbLexicon::default())
        .map_err(|e| e.to_string())?
        .iter()
        .map(StoredDescription::from)
        .collect();
    let (pairs, _) = build_pairs(&g, &corpus, &PairConfig::new(55_000, 707)).map_err(|e| e.to_string())?;
    let (train_set, dev) = split(&pairs, 1.0 / 11.0, 707).map_err(|e| e.to_string())?;
    ensure(train_set.len() == 50_000 && dev.len() == 5_000, || {
        format!("split {} / {}", train_set.len(), dev.len())
    })?;
    let cfg = TrainConfig::new(707);
    ensure(cfg.dim == 64 && cfg.buckets == 1 << 15 && cfg.batch_size == 64, || "shape defaults".into())?;
    let untrained = Encoder::<f32>::new(cfg.buckets, cfg.dim, cfg.temperature, cfg.init_scale, cfg.seed);
    let before = in_batch_accuracy(&untrained, &dev, cfg.batch_size).map_err(|e| e.to_string())?;
    let (mrr0, _) = check_mrr(&eval_l2p(&untrained, &bench, DEFAULT_K_MISS).map_err(|e| e.to_string())?)?;
    let model = train(&train_set, &cfg).map_err(|e| e.to_string())?.encoder;
    let after = in_batch_accuracy(&model, &dev, cfg.batch_size).map_err(|e| e.to_string())?;
    let (mrr1, _) = check_mrr(&eval_l2p(&model, &bench, DEFAULT_K_MISS).map_err(|e| e.to_string())?)?;
    let elapsed = start.elapsed();
    ensure(after - before >= 0.20, || format!("dev acc {before:.4} -> {after:.4}"))?;
    ensure(mrr1 > mrr0, || format!("L2P MRR {mrr0:.4} -> {mrr1:.4}"))?;
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "dev acc {before:.4} -> {after:.4}, L2P MRR {mrr0:.4} -> {mrr1:.4}, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn random_word(rng: &mut SeededRng) -> String {
    let len = rng.random_range(4..10);
    (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect()
}

fn random_phrase(rng: &mut SeededRng, seen: &mut HashSet<String>) -> String {
    loop {
        let n = rng.random_range(2..5);
        let s = (0..n).map(|_| random_word(rng)).collect::<Vec<_>>().join(" ");
        if seen.insert(s.clone()) {
            return s;
        }
    }
}

fn nli_sanity() -> Outcome {
    let (g, _) = l2p_fixture();
    let texts: Vec<&str> = g
        .concepts()
        .iter()
        .flat_map(|c| c.definitions.iter().map(String::as_str))
        .collect();
    let mut rng = SeededRng::seed_from_u64(808);
    let mut verbatim = Vec::with_capacity(1000);
    for i in 0..1000 {
        let p = texts[i % texts.len()];
        let mut c = texts[rng.random_range(0..texts.len())];
        while c == p {
            c = texts[rng.random_range(0..texts.len())];
        }
        verbatim.push(NliTriplet::new(p, p, c)?);
    }
    let e = Encoder::<f32>::new(1 << 15, 64, 0.05, 0.5, 808);
    let acc_verbatim = eval_nli_triplets(&e, &verbatim)
        .map_err(|e| e.to_string())?
        .value("accuracy")
        .ok_or("no accuracy")?;
    ensure(acc_verbatim == 1.0, || format!("verbatim accuracy {acc_verbatim}"))?;

    let mut seen = HashSet::new();
    let mut random = Vec::with_capacity(1000);
    for _ in 0..1000 {
        let p = random_phrase(&mut rng, &mut seen);
        let en = random_phrase(&mut rng, &mut seen);
        let c = random_phrase(&mut rng, &mut seen);
        random.push(NliTriplet::new(&p, &en, &c)?);
    }
    let r = Encoder::<f32>::new(1 << 15, 64, 0.05, 0.5, 809);
    let acc_random = eval_nli_triplets(&r, &random)
        .map_err(|e| e.to_string())?
        .value("accuracy")
        .ok_or("no accuracy")?;
    ensure((acc_random - 0.5).abs() <= 0.05, || format!("random accuracy {acc_random}"))?;
    Ok(format!("verbatim {acc_verbatim:.3}, random {acc_random:.3}"))
}

fn cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ontorep"))
        .current_dir(dir)
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("ONTOREP_DATA_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim())
    })
}

fn digests(root: &Path) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, file_sha256(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

fn cli_chain(dir: &Path) -> Result<(), String> {
    cli(dir, &["synth", "--leaves", "550", "--non-leaves", "150", "--seed", "9", "--out", "graph"])?;
    cli(dir, &["gen-desc", "--graph", "graph", "--count", "20000", "--seed", "9", "--out", "desc"])?;
    cli(
        dir,
        &[
            "sample-pairs", "--graph", "graph", "--descriptions", "desc/descriptions.jsonl",
            "--total", "20000", "--seed", "9", "--out", "pairs",
        ],
    )?;
    cli(dir, &["train", "--pairs", "pairs/pairs.tsv", "--seed", "9", "--out", "model"])?;
    cli(dir, &["eval-l2p", "--model", "model/model.ckpt", "--graph", "graph", "--out", "l2p"])
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let mut sums = Vec::new();
    for dir in [&a, &b] {
        fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        cli_chain(dir)?;
        sums.push(digests(dir)?);
    }
    ensure(sums[0].len() > 10, || format!("only {} artifacts", sums[0].len()))?;
    for (name, d) in &sums[0] {
        ensure(sums[1].get(name) == Some(d), || format!("{name} differs between runs"))?;
    }
    ensure(sums[0].len() == sums[1].len(), || "artifact sets differ".into())?;
    Ok(format!("{} artifacts identical across two runs", sums[0].len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("gradient oracle", gradient_oracle),
        ("correlation oracles", correlation_oracles),
        ("index exactness", index_exactness),
        ("dataset composition", dataset_composition),
        ("description grounding", description_grounding),
        ("L2P construction", l2p_construction),
        ("end-to-end learning signal", learning_signal),
        ("NLI triplet sanity", nli_sanity),
        ("CLI determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {why} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
