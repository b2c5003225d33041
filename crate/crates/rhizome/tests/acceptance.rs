//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rhizome::agent::{LlmProvider, ProviderError, ProviderReply, ProviderRequest};
use rhizome::cartography::Cartography;
use rhizome::lenses::{generate_lenses, LensError};
use rhizome::pipeline::{run_inline, EventKind, PhaseId, PipelineEvent, RunConfig, Services};
use rhizome::sources::{ingest, FetchQuery, FixtureTransport, RetryPolicy, SourceClients};
use rhizome::topography::{compute_topography, EmbeddingConfig, TopographyOutcome};
use rhizome_core::{
    assign_ranks, centralization_risk, dedupe, dice, marginalization, LensSetRules, PaperRecord, SourceKind,
    TokenUsage, TopographyMap, TopographyParams,
};

const ZONE: &str = "energy-information nexus";

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("energy-information-nexus")
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap()
}

struct Run {
    cartography: Cartography,
    events: Vec<PipelineEvent>,
}

fn fixture_run(rt: &tokio::runtime::Runtime) -> Run {
    rt.block_on(async {
        let config = RunConfig::fixture(ZONE, fixture_dir());
        let services = Services::from_config(&config).expect("fixture services");
        let (handle, ok) = run_inline(config, services).await;
        assert!(ok, "fixture run failed: {:?}", handle.snapshot().error);
        Run { cartography: (*handle.cartography().unwrap()).clone(), events: handle.events.snapshot() }
    })
}

// ---------------------------------------------------------------- criterion 1

fn oracle_dice(a: &str, b: &str) -> f64 {
    fn grams(s: &str) -> HashSet<String> {
        let lowered: String = s.chars().flat_map(|c| c.to_lowercase()).collect();
        let spaced: String = lowered.chars().map(|c| if c.is_alphanumeric() { c } else { ' ' }).collect();
        let norm = spaced.split_whitespace().collect::<Vec<_>>().join(" ");
        let cs: Vec<char> = norm.chars().collect();
        match cs.len() {
            0 => HashSet::new(),
            1 | 2 => HashSet::from([norm]),
            _ => (0..cs.len() - 2).map(|i| cs[i..i + 3].iter().collect()).collect(),
        }
    }
    let (ga, gb) = (grams(a), grams(b));
    if ga.is_empty() && gb.is_empty() {
        return 1.0;
    }
    2.0 * ga.intersection(&gb).count() as f64 / (ga.len() + gb.len()) as f64
}

fn record(id: &str, title: &str) -> PaperRecord {
    PaperRecord {
        id: id.into(),
        source: SourceKind::OpenAlex,
        doi: None,
        title: title.into(),
        abstract_text: None,
        authors: vec![],
        venue: None,
        year: Some(2020),
        cited_by_count: 0,
        referenced_ids: vec![],
        abs_rank: None,
        heterodox_flag: false,
        rigor_weight: 1.0,
    }
}

fn union_find_partition(recs: &[PaperRecord], threshold: f64) -> BTreeSet<BTreeSet<String>> {
    let mut parent: Vec<usize> = (0..recs.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            p[x] = find(p, p[x]);
        }
        p[x]
    }
    for i in 0..recs.len() {
        for j in i + 1..recs.len() {
            if oracle_dice(&recs[i].title, &recs[j].title) >= threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for i in 0..recs.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().insert(recs[i].id.clone());
    }
    groups.into_values().collect()
}

fn criterion_1() {
    let mut rng = StdRng::seed_from_u64(1);
    let alphabet: Vec<char> = "abcdeAB  -.1é\n".chars().collect();
    let text = |rng: &mut StdRng| -> String {
        (0..rng.gen_range(0..24)).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
    };
    for _ in 0..1000 {
        let a = text(&mut rng);
        let b = if rng.gen_bool(0.5) {
            let mut cs: Vec<char> = a.chars().collect();
            if !cs.is_empty() {
                let i = rng.gen_range(0..cs.len());
                cs[i] = 'z';
            }
            cs.into_iter().collect()
        } else {
            text(&mut rng)
        };
        assert_eq!(dice(&a, &b), oracle_dice(&a, &b), "{a:?} / {b:?}");
    }

    let syllables = ["ka", "lo", "mi", "ru", "te", "vo", "si", "pa", "ne", "do"];
    let vocab: Vec<String> =
        (0..300).map(|i| format!("{}{}{}", syllables[i % 10], syllables[(i / 10) % 10], syllables[i / 100])).collect();
    let mut bases: Vec<String> = Vec::new();
    while bases.len() < 80 {
        let t = (0..8).map(|_| vocab[rng.gen_range(0..vocab.len())].as_str()).collect::<Vec<_>>().join(" ");
        if bases.iter().all(|b| oracle_dice(b, &t) < 0.85) {
            bases.push(t);
        }
    }
    let mut recs: Vec<PaperRecord> = bases.iter().enumerate().map(|(i, t)| record(&format!("w{i:03}"), t)).collect();
    let mut planted = 0;
    while planted < 20 {
        let mut tokens: Vec<String> = bases[planted].split(' ').map(String::from).collect();
        let i = rng.gen_range(0..tokens.len());
        tokens[i].push('s');
        let t = tokens.join(" ");
        if oracle_dice(&bases[planted], &t) >= 0.85 {
            recs.push(record(&format!("d{planted:03}"), &t));
            planted += 1;
        }
    }
    assert_eq!(recs.len(), 100);
    let expected = union_find_partition(&recs, 0.85);
    let outcome = dedupe(recs, 0.85).unwrap();
    assert_eq!(outcome.corpus.len(), 80);
    let mut got: BTreeSet<BTreeSet<String>> = outcome
        .clusters
        .iter()
        .map(|c| c.member_ids.iter().cloned().chain([c.canonical_id.clone()]).collect())
        .collect();
    let clustered: BTreeSet<String> = got.iter().flatten().cloned().collect();
    for r in &outcome.corpus {
        if !clustered.contains(&r.id) {
            got.insert(BTreeSet::from([r.id.clone()]));
        }
    }
    assert_eq!(got, expected);

    let (a, b) = ("abcdefghijklmnopqrstuv", "abcdefghijklmnopqrswxy");
    assert_eq!(oracle_dice(a, b), 0.85);
    let merged = dedupe(vec![record("a", a), record("b", b)], 0.85).unwrap();
    assert_eq!(merged.corpus.len(), 1);
    let (c, d) = ("abcdefghijklmnopqrstuv", "abcdefghijklmnopqrwxyz");
    assert!(oracle_dice(c, d) < 0.85);
    assert_eq!(dedupe(vec![record("c", c), record("d", d)], 0.85).unwrap().corpus.len(), 2);
}

// ---------------------------------------------------------------- criterion 2

fn oracle_fraction(n: usize, edges: &[(usize, usize)], k_fraction: f64) -> f64 {
    let mut degree = vec![0usize; n];
    for &(a, b) in edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let k = ((k_fraction * n as f64).ceil() as usize).max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(a.cmp(&b)));
    let hubs = &order[..k.min(n)];
    if edges.is_empty() {
        return 0.0;
    }
    edges.iter().filter(|(a, b)| hubs.contains(a) || hubs.contains(b)).count() as f64 / edges.len() as f64
}

fn check_graph(n: usize, edges: &[(usize, usize)], k_fraction: f64) {
    let name = |i: usize| format!("n{i:02}");
    let nodes: Vec<String> = (0..n).map(name).collect();
    let named: Vec<(String, String)> = edges.iter().map(|&(a, b)| (name(a), name(b))).collect();
    let report = centralization_risk(&nodes, &named, 0.40, k_fraction);
    let want = oracle_fraction(n, edges, k_fraction);
    assert_eq!(report.incident_fraction, want, "n={n} edges={edges:?}");
    assert_eq!(report.triggered, want > 0.40);
}

fn criterion_2() {
    for n in 1..=6usize {
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        for mask in 0u32..(1 << slots.len()) {
            let edges: Vec<(usize, usize)> =
                slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
            check_graph(n, &edges, 0.05);
            check_graph(n, &edges, 0.34);
        }
    }
    let mut rng = StdRng::seed_from_u64(2);
    for n in 7..=12usize {
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        for _ in 0..2000 {
            let p: f64 = rng.gen_range(0.0..1.0);
            let edges: Vec<(usize, usize)> = slots.iter().copied().filter(|_| rng.gen_bool(p)).collect();
            check_graph(n, &edges, 0.05);
            check_graph(n, &edges, 0.25);
        }
    }
    for _ in 0..100 {
        let n = rng.gen_range(2..=60usize);
        let edges: Vec<(usize, usize)> = (0..rng.gen_range(0..=3 * n))
            .map(|_| (if rng.gen_bool(0.3) { 0 } else { rng.gen_range(0..n) }, rng.gen_range(0..n)))
            .filter(|(a, b)| a != b)
            .collect();
        check_graph(n, &edges, 0.05);
    }

    let ids = |n: usize| (0..n).map(|i| format!("v{i:02}")).collect::<Vec<_>>();
    let pairs =
        |es: &[(usize, usize)]| es.iter().map(|&(a, b)| (format!("v{a:02}"), format!("v{b:02}"))).collect::<Vec<_>>();
    let star: Vec<(usize, usize)> = (1..=10).map(|i| (0, i)).collect();
    assert!(centralization_risk(&ids(11), &pairs(&star), 0.40, 0.05).triggered);
    let cycle: Vec<(usize, usize)> = (0..20).map(|i| (i, (i + 1) % 20)).collect();
    assert!(!centralization_risk(&ids(20), &pairs(&cycle), 0.40, 0.05).triggered);
    let boundary = [(0, 1), (0, 2), (3, 4), (5, 6), (7, 8)];
    let r = centralization_risk(&ids(9), &pairs(&boundary), 0.40, 0.05);
    assert_eq!(r.incident_fraction, 0.40);
    assert!(!r.triggered);
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3(run: &Run) {
    let c = &run.cartography;
    let triggered = c.centralization_checks.iter().filter(|k| k.report.triggered).count();
    assert!(triggered > c.ruptures.len(), "fixture must trigger past the budget");
    assert_eq!(c.ruptures.len(), 2, "halts at max_reentries");
    assert_eq!(c.refused_triggers.len(), triggered - 2, "every trigger is one re-entry or one refusal");
    assert!(c.refused_triggers.iter().all(|r| r.reentries_done == 2 && r.max_reentries == 2));
    let indices: Vec<u32> = c.ruptures.iter().map(|r| r.reentry_index).collect();
    assert_eq!(indices, [1, 2]);
    let rupture_events = run.events.iter().filter(|e| e.kind == EventKind::RuptureTriggered).count();
    assert_eq!(rupture_events, 2);

    let papers: BTreeMap<&str, &PaperRecord> = c.corpus.papers.iter().map(|p| (p.id.as_str(), p)).collect();
    assert_eq!(papers.len(), c.corpus.papers.len(), "duplicate ids in corpus");
    assert_eq!(c.ruptures[0].injected_paper_ids.len(), 8);
    let mut injected = BTreeSet::new();
    for r in &c.ruptures {
        for id in &r.injected_paper_ids {
            let p = papers[id.as_str()];
            assert!(p.heterodox_flag && p.source == SourceKind::HeterodoxReentry, "{id} not heterodox");
            injected.insert(id.clone());
        }
    }
    assert_eq!(c.corpus.papers.len(), 35 + injected.len());
    assert_eq!(c.corpus.papers.len(), 49);

    // the pre-rupture corpus, rebuilt independently, must survive untouched
    let base = runtime().block_on(async {
        let transport = FixtureTransport::load(&fixture_dir().join("sources")).unwrap();
        let clients = SourceClients::new(std::sync::Arc::new(transport), RetryPolicy::immediate());
        let (records, _) = ingest(&FetchQuery::new(ZONE, 25), &clients).await;
        let mut corpus = dedupe(records, 0.85).unwrap().corpus;
        let table = rhizome::abs::load_abs_table(&fixture_dir().join("abs.csv")).unwrap();
        assign_ranks(&mut corpus, &table, &Default::default()).unwrap();
        corpus
    });
    assert_eq!(base.len(), 35);
    for p in &base {
        assert!(!injected.contains(&p.id));
        assert_eq!(papers[p.id.as_str()], p, "{} was modified", p.id);
    }
}

// ---------------------------------------------------------------- criterion 4

struct FixedLenses(usize);

#[async_trait::async_trait]
impl LlmProvider for FixedLenses {
    async fn complete(&self, _: &ProviderRequest) -> Result<ProviderReply, ProviderError> {
        let lenses: Vec<_> = (0..self.0)
            .map(|i| {
                serde_json::json!({
                    "name": format!("Lens {i}"),
                    "description": "d",
                    "signal_vocabulary": (0..5).map(|t| format!("t{i}x{t}")).collect::<Vec<_>>(),
                    "rationale": "r",
                })
            })
            .collect();
        let content = serde_json::json!({ "lenses": lenses, "confidence": 0.5 }).to_string();
        Ok(ProviderReply { content, usage: TokenUsage::default() })
    }
}

fn criterion_4(run: &Run) {
    let c = &run.cartography;
    assert!((3..=5).contains(&c.lenses.len()));
    for (i, a) in c.lenses.iter().enumerate() {
        for b in &c.lenses[i + 1..] {
            let sa: BTreeSet<&String> = a.signal_vocabulary.iter().collect();
            let sb: BTreeSet<&String> = b.signal_vocabulary.iter().collect();
            let j = sa.intersection(&sb).count() as f64 / sa.union(&sb).count() as f64;
            assert!(j <= 0.2, "{} / {}: {j}", a.name, b.name);
        }
    }
    let mut seen = BTreeSet::new();
    for r in &c.readings {
        assert!(seen.insert((r.lens_name.clone(), r.paper_id.clone())), "second reading {r:?}");
    }
    assert_eq!(seen.len(), c.lenses.len() * c.corpus.papers.len());

    let rt = runtime();
    for count in [2usize, 6] {
        let runtime = rhizome::agent::AgentRuntime::new(std::sync::Arc::new(FixedLenses(count)), 1);
        runtime.declare("epistemology");
        let result = rt.block_on(generate_lenses(&runtime, ZONE, &LensSetRules::default(), 3));
        assert!(matches!(result, Err(LensError::Rejected { attempts: 3, .. })), "{count} lenses: {result:?}");
    }
    let runtime = rhizome::agent::AgentRuntime::new(std::sync::Arc::new(FixedLenses(4)), 1);
    runtime.declare("epistemology");
    assert_eq!(rt.block_on(generate_lenses(&runtime, ZONE, &LensSetRules::default(), 3)).unwrap().len(), 4);
}

// ---------------------------------------------------------------- criterion 5

fn oracle_marginalization(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    let centroid: Vec<f64> = (0..rows[0].len()).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let d: Vec<f64> =
        rows.iter().map(|r| r.iter().zip(&centroid).map(|(x, c)| (x - c).powi(2)).sum::<f64>().sqrt()).collect();
    let max = d.iter().cloned().fold(0.0, f64::max);
    d.iter().map(|x| if max == 0.0 { 0.0 } else { x / max }).collect()
}

fn topo_paper(id: &str, text: &str) -> PaperRecord {
    let mut p = record(id, text);
    p.abstract_text = Some(text.into());
    p
}

/// Writes `rows` as an injected matrix and maps the corpus through it.
fn injected_map(dir: &Path, name: &str, corpus: &[PaperRecord], rows: &[Vec<f64>]) -> TopographyMap {
    let path = dir.join(format!("{name}.csv"));
    let mut w = csv::Writer::from_path(&path).unwrap();
    let mut header = vec!["paper_id".to_string()];
    header.extend((0..rows[0].len()).map(|j| format!("d{j}")));
    w.write_record(&header).unwrap();
    for (p, r) in corpus.iter().zip(rows) {
        let mut line = vec![p.id.clone()];
        line.extend(r.iter().map(|x| format!("{x:?}")));
        w.write_record(&line).unwrap();
    }
    w.flush().unwrap();
    let config = EmbeddingConfig::Injected { path };
    let outcome = runtime().block_on(compute_topography(corpus, &config, &TopographyParams::default(), 7)).unwrap();
    match outcome {
        TopographyOutcome::Ready { map, model_name, .. } => {
            assert_eq!(model_name, format!("injected:{name}"));
            map
        }
        other => panic!("topography not ready: {other:?}"),
    }
}

fn blob_rows(rng: &mut StdRng, centres: &[f64], per: usize, dim: usize) -> Vec<Vec<f64>> {
    centres
        .iter()
        .flat_map(|c| {
            (0..per)
                .map(|_| (0..dim).map(|j| if j == 0 { *c } else { 0.0 } + rng.gen_range(-0.2..0.2)).collect())
                .collect::<Vec<Vec<f64>>>()
        })
        .collect()
}

fn criterion_5() {
    let mut rng = StdRng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..12).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
    let got = marginalization(&rows);
    for (g, w) in got.iter().zip(oracle_marginalization(&rows)) {
        assert!((g - w).abs() <= 1e-9 * w.abs(), "{g} vs {w}");
    }
    for _ in 0..20 {
        let shift: f64 = rng.gen_range(-100.0..100.0);
        let scale: f64 = rng.gen_range(0.01..100.0);
        let moved: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| (x + shift) * scale).collect()).collect();
        for (a, b) in got.iter().zip(marginalization(&moved)) {
            assert!((a - b).abs() <= 1e-9, "shift {shift} scale {scale}: {a} vs {b}");
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let texts =
        ["entropy exergy metabolism dissipation throughput", "algorithm platform governance surveillance protocol"];
    let corpus: Vec<PaperRecord> =
        (0..12).map(|i| topo_paper(&format!("b{i:02}"), &format!("{} doc{i}", texts[i / 6]))).collect();
    let map = injected_map(dir.path(), "two-blobs", &corpus, &blob_rows(&mut rng, &[0.0, 40.0], 6, 16));
    assert_eq!(map.clusters.len(), 2);
    assert!(!map.voids.is_empty(), "two far blobs, no void");

    let third = "cable archive signal storage obsolescence";
    let corpus: Vec<PaperRecord> = (0..15)
        .map(|i| topo_paper(&format!("c{i:02}"), &format!("{} doc{i}", [texts[0], third, texts[0]][i / 5])))
        .collect();
    let map = injected_map(dir.path(), "three-blobs", &corpus, &blob_rows(&mut rng, &[0.0, 10.0, 50.0], 5, 16));
    assert_eq!(map.clusters.len(), 3);
    assert!(!map.isolations.is_empty(), "shared vocabulary at a distance, no isolation");

    let corpus: Vec<PaperRecord> = (0..8).map(|i| topo_paper(&format!("s{i}"), texts[0])).collect();
    let map = injected_map(dir.path(), "one-blob", &corpus, &blob_rows(&mut rng, &[3.0], 8, 16));
    assert_eq!(map.clusters.len(), 1);
    assert!(map.voids.is_empty());
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6(first: &Run, second: &Run) {
    assert_eq!(first.cartography.canonical(), second.cartography.canonical());

    let phase_marks: Vec<(EventKind, PhaseId)> = first
        .events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::PhaseStarted | EventKind::PhaseCompleted))
        .map(|e| (e.kind, e.phase))
        .collect();
    let expected: Vec<(EventKind, PhaseId)> =
        PhaseId::ALL.iter().flat_map(|p| [(EventKind::PhaseStarted, *p), (EventKind::PhaseCompleted, *p)]).collect();
    assert_eq!(phase_marks, expected);
    assert_eq!(first.events.last().unwrap().kind, EventKind::RunCompleted);

    let meta = &first.cartography.metadata;
    let (mut calls, mut input, mut output) = (0u64, 0u64, 0u64);
    for c in &meta.calls {
        calls += 1;
        input += c.usage.input_tokens;
        output += c.usage.output_tokens;
    }
    assert_eq!(meta.totals.calls, calls);
    assert_eq!(meta.totals.input_tokens, input);
    assert_eq!(meta.totals.output_tokens, output);
    assert!(calls > 0);

    let out = tempfile::tempdir().unwrap();
    let path = out.path().join("cartography.json");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_rhizome"))
        .args(["run", "--zone", ZONE, "--llm", "fixture", "--fixtures"])
        .arg(fixture_dir())
        .arg("--out")
        .arg(&path)
        .env("RUST_LOG", "off")
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "CLI exit {status}");
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["graph"]["edges"].as_array().unwrap().len(), first.cartography.graph.edges.len());
}

// ---------------------------------------------------------------- criterion 7

fn criterion_7(run: &Run) {
    let allowed: BTreeMap<&str, (&[&str], &str)> = BTreeMap::from([
        ("constructive", (&["extends", "builds-on", "borrows-method"][..], "solid")),
        ("critical", (&["contradicts", "problematizes", "challenges"][..], "dashed")),
        ("rhizomatic", (&["paradigm-rupture"][..], "neon")),
    ]);
    let doc = serde_json::to_value(&run.cartography).unwrap();
    let edges = doc["graph"]["edges"].as_array().unwrap();
    assert!(!edges.is_empty());
    let mut classes = BTreeSet::new();
    for e in edges {
        let class = e["edge_class"].as_str().unwrap();
        let (subtypes, hint) = allowed[class];
        assert!(subtypes.contains(&e["subtype"].as_str().unwrap()), "{e}");
        assert_eq!(e["render_hint"].as_str().unwrap(), hint, "{e}");
        classes.insert(class);
    }
    assert_eq!(classes.len(), 3, "fixture should exercise every class");
    run.cartography.graph.validate().unwrap();
}

// ----------------------------------------------------------------------------

fn main() {
    let rt = runtime();
    let mut runs: Option<(Run, Run)> = None;
    let mut results = Vec::new();

    let mut record = |n: u32, title: &str, limit: Option<Duration>, f: &mut dyn FnMut()| {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f));
        let elapsed = started.elapsed();
        let mut note = String::new();
        let mut pass = outcome.is_ok();
        if let Err(e) = &outcome {
            note = e
                .downcast_ref::<String>()
                .cloned()
                .or(e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
        }
        if let Some(limit) = limit.filter(|l| elapsed > *l) {
            pass = false;
            note = format!("took {elapsed:.2?}, limit {limit:?}");
        }
        let line = format!(
            "criterion {n} {:<4} {title} ({elapsed:.2?}){}",
            if pass { "PASS" } else { "FAIL" },
            if note.is_empty() { String::new() } else { format!(": {note}") }
        );
        results.push((n, pass, line));
    };

    record(1, "dice and dedupe match the union-find oracle", Some(Duration::from_secs(5)), &mut criterion_1);
    record(2, "centralization matches the degree-sort oracle", Some(Duration::from_secs(10)), &mut criterion_2);
    // criterion 6 times the two full runs and the CLI run together
    record(6, "fixture runs reproduce canonically", Some(Duration::from_secs(60)), &mut || {
        let first = fixture_run(&rt);
        let second = fixture_run(&rt);
        criterion_6(&first, &second);
        runs = Some((first, second));
    });
    let run = runs.as_ref().map(|r| &r.0);
    record(3, "rupture loop re-enters once per trigger up to the budget", None, &mut || {
        criterion_3(run.expect("fixture run unavailable"))
    });
    record(4, "lens count, orthogonality and one reading per pair", None, &mut || {
        criterion_4(run.expect("fixture run unavailable"))
    });
    record(5, "topography on injected matrices", Some(Duration::from_secs(5)), &mut criterion_5);
    record(7, "edge taxonomy and render hints", None, &mut || criterion_7(run.expect("fixture run unavailable")));

    results.sort_by_key(|r| r.0);
    for (_, _, line) in &results {
        println!("{line}");
    }
    let failed = results.iter().filter(|r| !r.1).count();
    println!("\n{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
