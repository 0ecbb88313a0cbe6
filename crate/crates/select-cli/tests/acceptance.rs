//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers. Run with
//! `cargo test -p select-cli --test acceptance -- --nocapture`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use select_core::nalgebra::DMatrix;
use select_core::{
    harmonic_mean_ho, loss_eval, make_planted_model, mine_anchor, raise_ratio, solve_closed_form,
    solve_gradient_oracle, stage1_filter, stage2_select, train_ngram, Category, Concept,
    ConceptHierarchy, EditProblem, GenerationConfig, NullClock, PromptLibrary, ScoringBackend,
    SelectionPolicy,
};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn pass(number: u32, name: &str, detail: &str) {
    println!("ACCEPTANCE {number} ({name}): PASS: {detail}");
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["select".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = select_cli::run_cli(&argv, &mut stdout, &mut stderr);
    (
        code,
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

// Published object-erasure rows: (concept, acc_e%, acc_g%, acc_s%, printed H_o%).
const OBJECT_ROWS: [(&str, f64, f64, f64, f64); 10] = [
    ("cat", 0.83, 14.6, 99.67, 94.26),
    ("dog", 0.01, 19.0, 99.63, 92.64),
    ("pig", 0.03, 38.61, 97.78, 82.15),
    ("corgi", 0.1, 0.66, 99.59, 99.61),
    ("pikachu", 3.33, 41.25, 98.02, 79.86),
    ("garbage truck", 1.75, 43.33, 96.93, 78.66),
    ("banana", 0.05, 10.33, 97.08, 95.37),
    ("bird", 21.67, 49.18, 97.17, 70.2),
    ("lesser panda", 3.33, 29.8, 96.71, 85.89),
    ("eiffel tower", 5.04, 9.37, 97.6, 94.32),
];

#[test]
fn acceptance_01_ho_reproduction() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for (concept, acc_e, acc_g, acc_s, printed) in OBJECT_ROWS {
        let ho = harmonic_mean_ho(acc_e / 100.0, acc_s / 100.0, acc_g / 100.0)
            .unwrap()
            .value()
            * 100.0;
        let diff = (ho - printed).abs();
        worst = worst.max(diff);
        assert!(
            diff <= 0.02,
            "{concept}: computed {ho:.4}, printed {printed}, |diff| {diff:.4} > 0.02"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    pass(
        1,
        "overall-score reproduction",
        &format!("10/10 concepts within ±0.02 (worst {worst:.4}), {elapsed:?}"),
    );
}

// Published activation rows: (concept, related, neutral, printed ratio).
const ACTIVATION_ROWS: [(&str, f64, f64, f64); 8] = [
    ("car", 53.65, 9.85, 5.44),
    ("bird", 327.24, 5.14, 63.64),
    ("cat", 180.08, 5.68, 31.66),
    ("knife", 140.76, 2.213, 63.6),
    ("hellokitty", 0.102, 0.123, 0.831),
    ("snoopy", 0.019, 0.156, 0.125),
    ("corgi", 0.03, 0.191, 0.158),
    ("pikachu", 0.247, 0.38, 0.649),
];

#[test]
fn acceptance_02_crr_reproduction() {
    let started = Instant::now();
    let mut worst_rel = 0.0f64;
    for (concept, related, neutral, printed) in ACTIVATION_ROWS {
        let (crr, degenerate) = raise_ratio(related, neutral);
        assert!(!degenerate);
        // The published inputs are themselves rounded to a few digits, so
        // the reproduction tolerance is 0.01 absolute or 1% relative,
        // whichever is larger at the printed value's scale.
        let tolerance = 0.01f64.max(0.01 * printed.abs());
        let diff = (crr - printed).abs();
        worst_rel = worst_rel.max(diff / printed.abs());
        assert!(
            diff <= tolerance,
            "{concept}: computed {crr:.4}, printed {printed}, |diff| {diff:.4} > {tolerance:.4}"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    pass(
        2,
        "context-raise-ratio reproduction",
        &format!("8/8 concepts (worst relative error {worst_rel:.5}), {elapsed:?}"),
    );
}

const LAMBDA_LADDER: [f64; 5] = [0.0, 0.01, 0.1, 1.0, 10.0];

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // Box-Muller over the seeded stream keeps the instances fixed without
    // extra dependencies.
    DMatrix::from_fn(rows, cols, |_, _| {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    })
}

fn random_problem(rng: &mut ChaCha8Rng, lambda: f64) -> EditProblem {
    let d_out = rng.gen_range(2..=8);
    let d_in = rng.gen_range(2..=16);
    let n1 = rng.gen_range(1..=3);
    let n0 = rng.gen_range(0..=5);
    EditProblem::new(
        random_matrix(rng, d_out, d_in),
        random_matrix(rng, d_in, n1),
        random_matrix(rng, d_in, n1),
        random_matrix(rng, d_in, n0),
        lambda,
    )
    .unwrap()
}

fn oracle_learning_rate(p: &EditProblem) -> f64 {
    let normal = &p.target * p.target.transpose() + p.lambda * (&p.retain * p.retain.transpose());
    let max_eigen = normal.symmetric_eigen().eigenvalues.max();
    1.0 / (2.05 * max_eigen.max(1e-9))
}

#[test]
fn acceptance_03_closed_form_matches_gradient_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1ec7);
    let mut worst_gap = 0.0f64;
    for instance in 0..50 {
        let lambda = LAMBDA_LADDER[instance % LAMBDA_LADDER.len()];
        let problem = random_problem(&mut rng, lambda);
        let closed = solve_closed_form(&problem).unwrap();
        let zero = DMatrix::zeros(problem.weights.nrows(), problem.weights.ncols());
        let scale = 1.0 + problem.gradient(&zero).norm();
        let oracle_delta = solve_gradient_oracle(
            &problem,
            oracle_learning_rate(&problem),
            2_000_000,
            1e-9 * scale,
        )
        .unwrap_or_else(|e| panic!("instance {instance} oracle failed: {e}"));
        let (oracle_loss, _, _) = loss_eval(&problem, &oracle_delta).unwrap();
        let gap = (closed.total_loss - oracle_loss).abs();
        worst_gap = worst_gap.max(gap);
        assert!(gap <= 1e-6, "instance {instance}: |loss gap| {gap:.3e}");
        assert!(
            closed.total_loss <= oracle_loss + 1e-9,
            "instance {instance}: closed {:.6e} > oracle {oracle_loss:.6e} + 1e-9",
            closed.total_loss
        );
        let gradient_norm = problem.gradient(&closed.delta_matrix().unwrap()).norm();
        let bound = 1e-8 * (1.0 + problem.weights.norm());
        assert!(
            gradient_norm <= bound,
            "instance {instance}: stationarity {gradient_norm:.3e} > {bound:.3e}"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    pass(
        3,
        "closed form vs gradient oracle",
        &format!("50/50 instances (worst loss gap {worst_gap:.3e}), {elapsed:?}"),
    );
}

#[test]
fn acceptance_04_lambda_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11ce);
    let mut violations = 0usize;
    for instance in 0..10 {
        let d_in = rng.gen_range(3..=6);
        let d_out = rng.gen_range(2..=6);
        let n1 = rng.gen_range(2..=3);
        let n0 = rng.gen_range(3..=5);
        let weights = random_matrix(&mut rng, d_out, d_in);
        let target = random_matrix(&mut rng, d_in, n1);
        let anchor = random_matrix(&mut rng, d_in, n1);
        let retain = random_matrix(&mut rng, d_in, n0);
        let mut previous: Option<(f64, f64)> = None;
        for lambda in LAMBDA_LADDER {
            let problem = EditProblem::new(
                weights.clone(),
                target.clone(),
                anchor.clone(),
                retain.clone(),
                lambda,
            )
            .unwrap();
            let solved = solve_closed_form(&problem).unwrap();
            if let Some((prev_e1, prev_e0)) = previous {
                let slack_e0 = 1e-9 * (1.0 + prev_e0);
                let slack_e1 = 1e-9 * (1.0 + solved.e1);
                if solved.e0 > prev_e0 + slack_e0 {
                    violations += 1;
                    eprintln!(
                        "instance {instance} lambda {lambda}: e0 rose {prev_e0:.6e} -> {:.6e}",
                        solved.e0
                    );
                }
                if solved.e1 + slack_e1 < prev_e1 {
                    violations += 1;
                    eprintln!(
                        "instance {instance} lambda {lambda}: e1 fell {prev_e1:.6e} -> {:.6e}",
                        solved.e1
                    );
                }
            }
            previous = Some((solved.e1, solved.e0));
        }
    }
    assert_eq!(violations, 0, "{violations} monotonicity violations");
    pass(
        4,
        "lambda monotonicity",
        "10 instances x 5-step ladder, zero violations",
    );
}

#[test]
fn acceptance_05_selection_determinism_and_ranking_invariance() {
    // Byte-identical run records across repeated invocations.
    let dir = tempfile::tempdir().unwrap();
    let corpus = data("toy_corpus.txt");
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for out in [&out_a, &out_b] {
        let (code, _, stderr) = run_cli(&[
            "mine",
            "--target",
            "cat",
            "--backend",
            "ngram",
            "--corpus",
            corpus.to_str().unwrap(),
            "--num-candidates",
            "4",
            "--num-related-words",
            "3",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {stderr}");
    }
    let bytes_a = std::fs::read(&out_a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&out_b).unwrap());

    // Ranking invariance over randomized score tables: strictly increasing
    // transforms leave the stage-one survivor list and the stage-two
    // argmax unchanged.
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd5);
    let increasing: [fn(f64) -> f64; 3] = [|x| 3.0 * x + 0.5, |x| x.exp(), |x| (x + 1.0).powi(3)];
    for table_index in 0..100 {
        let count = rng.gen_range(2..=9);
        let mut table = Vec::with_capacity(count);
        for i in 0..count {
            // Grid-valued scores keep transformed comparisons exact.
            let uc = rng.gen_range(1..=300) as f64 / 100.0;
            let cos = rng.gen_range(1..=300) as f64 / 100.0;
            let mut candidate = support::scored(&format!("c{i:02}"), uc, 0.01);
            candidate = support::with_cos(candidate, cos);
            table.push(candidate);
        }
        let policy = SelectionPolicy::default();
        let survivors = stage1_filter(&table, &policy).unwrap();
        let baseline: Vec<String> = survivors
            .iter()
            .map(|c| c.candidate.concept.name.clone())
            .collect();
        let winner = stage2_select(&survivors).unwrap().candidate.concept.name;

        for transform in increasing {
            let transformed: Vec<_> = table
                .iter()
                .cloned()
                .map(|mut c| {
                    c.uc.value = transform(c.uc.value);
                    c
                })
                .collect();
            let policy_t = SelectionPolicy {
                uc_threshold: transform(policy.uc_threshold),
                stage1_top_k: policy.stage1_top_k,
            };
            let survivors_t = stage1_filter(&transformed, &policy_t).unwrap();
            let names: Vec<String> = survivors_t
                .iter()
                .map(|c| c.candidate.concept.name.clone())
                .collect();
            assert_eq!(names, baseline, "table {table_index} uc transform");

            let recos: Vec<_> = survivors
                .iter()
                .cloned()
                .map(|mut c| {
                    let coherence = c.coherence.as_mut().unwrap();
                    coherence.cos = transform(coherence.cos);
                    c
                })
                .collect();
            let winner_t = stage2_select(&recos).unwrap().candidate.concept.name;
            assert_eq!(winner_t, winner, "table {table_index} cos transform");
        }
    }
    pass(
        5,
        "selection determinism and ranking invariance",
        "byte-identical reruns; 100 tables x 3 transforms invariant",
    );
}

#[test]
fn acceptance_06_blood_fixture_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let fixture = data("blood_fixture.json");
    let (code, _, stderr) = run_cli(&[
        "mine",
        "--target",
        "blood",
        "--backend",
        "fixture",
        "--fixture",
        fixture.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(record["result"]["optimal_anchor"]["name"], "sap");
    let retain: Vec<&str> = record["result"]["retain_set"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(retain, ["juice", "paint", "red liquid", "water"]);
    // Retain set = candidate set minus the anchor.
    let mut with_anchor: BTreeSet<&str> = retain.iter().copied().collect();
    with_anchor.insert("sap");
    let scored: BTreeSet<&str> = record["result"]["all_scores"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["candidate"]["concept"]["name"].as_str().unwrap())
        .collect();
    assert_eq!(with_anchor, scored);
    pass(
        6,
        "blood fixture end to end",
        "anchor `sap`, retain [juice, paint, red liquid, water]",
    );
}

#[test]
fn acceptance_07_planted_causal_tracing() {
    let started = Instant::now();
    let prompts: Vec<String> = (0..4).map(|i| format!("probe prompt {i}")).collect();
    let mut single_hits = 0usize;
    let mut pair_hits = 0usize;
    let mut singles = 0usize;
    let mut pairs = 0usize;
    for seed in 0..20u64 {
        for layers in [4usize, 8, 16] {
            let target = (seed as usize) % layers;
            let fixture = make_planted_model(layers, &BTreeSet::from([target]), seed).unwrap();
            let trace = select_core::trace_layers(
                &fixture.base,
                &fixture.edited,
                &fixture.scorer,
                &fixture.concept,
                &prompts,
            )
            .unwrap();
            singles += 1;
            if trace.argmax() == Some(target) {
                single_hits += 1;
            }

            let second = (target + 1 + (seed as usize * 7) % (layers - 1)) % layers;
            let planted = BTreeSet::from([target, second]);
            assert_eq!(planted.len(), 2);
            let fixture = make_planted_model(layers, &planted, seed + 1000).unwrap();
            let trace = select_core::trace_layers(
                &fixture.base,
                &fixture.edited,
                &fixture.scorer,
                &fixture.concept,
                &prompts,
            )
            .unwrap();
            pairs += 1;
            let top: BTreeSet<usize> = trace.top_k(2).into_iter().collect();
            if top == planted {
                pair_hits += 1;
            }
        }
    }
    assert_eq!(single_hits, singles, "single-layer recovery below 100%");
    assert_eq!(pair_hits, pairs, "two-layer recovery below 100%");
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    pass(
        7,
        "planted causal tracing",
        &format!("{singles}/{singles} single and {pairs}/{pairs} pair recoveries, {elapsed:?}"),
    );
}

mod remote {
    use super::*;
    use select_cli::http::{HttpResponse, Transport};
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    /// Deterministic scripted scorer behind the wire format, mirroring the
    /// blood fixture table.
    pub struct AnsweringTransport {
        pub calls: Arc<AtomicUsize>,
    }

    const FILLS: [(&str, f64, f64); 6] = [
        ("red liquid", 0.029417142857142857, 0.010582857142857143),
        ("blood", 0.024, 0.010),
        ("sap", 0.01824, 0.00576),
        ("water", 0.03768, 0.01032),
        ("paint", 0.04577142857142857, 0.016_228_571_428_571_43),
        ("juice", 0.06109714285714286, 0.022_902_857_142_857_14),
    ];

    impl Transport for AnsweringTransport {
        fn post(
            &self,
            _url: &str,
            _api_key: &str,
            body: &str,
            _timeout: Duration,
        ) -> Result<HttpResponse, String> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            let payload: serde_json::Value =
                serde_json::from_str(body).map_err(|e| e.to_string())?;
            let text = payload["text"].as_str().unwrap_or_default().to_lowercase();
            let reply = match payload["mode"].as_str() {
                Some("complete") => {
                    let completion = if text.contains("candidates") {
                        "sap, red liquid, water, paint, juice"
                    } else {
                        "taste, color"
                    };
                    serde_json::json!({"ok": true, "text": completion})
                }
                Some("fill") => {
                    let word = payload["word"].as_str().unwrap_or_default();
                    let mut value = 0.001;
                    for (name, taste, color) in FILLS {
                        if text.contains(name) {
                            value = match word {
                                "taste" => taste,
                                "color" => color,
                                _ => 0.001,
                            };
                            break;
                        }
                    }
                    serde_json::json!({"ok": true, "value": value})
                }
                Some("ppl") => {
                    let value = if text.contains("sap") {
                        2.5
                    } else if text.contains("blood") {
                        4.0
                    } else {
                        10.0
                    };
                    serde_json::json!({"ok": true, "value": value})
                }
                _ => serde_json::json!({"ok": false, "error": "unknown mode"}),
            };
            Ok(HttpResponse {
                status: 200,
                body: reply.to_string(),
            })
        }
    }
}

#[test]
fn acceptance_08_backend_contracts() {
    // Conditional distributions sum to one for every context.
    let corpus = "the cat chases the mouse while the dog chases the ball and \
                  birds sing over the quiet park as rain falls on the warm roof";
    let model = train_ngram(corpus).unwrap();
    for context in model.vocabulary() {
        let sum: f64 = model
            .vocabulary()
            .iter()
            .map(|w| model.conditional(context, w))
            .sum();
        assert!((sum - 1.0).abs() <= 1e-9, "context {context}: {sum}");
    }

    // In-order text beats a scrambled permutation on ten corpora.
    let subjects = [
        "cat", "dog", "bird", "fox", "bear", "wolf", "hare", "deer", "mole", "crow",
    ];
    for (index, subject) in subjects.iter().enumerate() {
        let sentence = format!("the {subject} walks across the field and the {subject} rests");
        let corpus = format!("{sentence} {sentence} {sentence}");
        let model = train_ngram(&corpus).unwrap();
        let mut tokens = select_core::tokenize(&corpus);
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + index as u64);
        tokens.shuffle(&mut rng);
        let scrambled = tokens.join(" ");
        let in_order = model.perplexity(&corpus).unwrap().value();
        let shuffled = model.perplexity(&scrambled).unwrap().value();
        assert!(
            in_order < shuffled,
            "corpus {index}: {in_order} vs {shuffled}"
        );
    }

    // Remote backend: an immediate re-run is answered fully from cache.
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;
    let cache_dir = tempfile::tempdir().unwrap();
    let blood = Concept::new("blood", Category::General).unwrap();
    let mine_once = |calls: Arc<AtomicUsize>| {
        let config = select_cli::http::RemoteBackendConfig {
            base_url: "https://scorer.test".into(),
            api_key: "key".into(),
            timeout_ms: 1000,
            max_retries: 1,
            model_id: "mock".into(),
        };
        let cache = select_cli::cache::ResponseCache::new(cache_dir.path()).unwrap();
        let backend = select_cli::http::HttpScoringBackend::new(
            config,
            remote::AnsweringTransport { calls },
            cache,
        )
        .unwrap();
        let result = mine_anchor(
            &blood,
            &GenerationConfig::new(Category::General),
            &SelectionPolicy::default(),
            &backend,
            &PromptLibrary::default(),
            &ConceptHierarchy::empty(),
            &BTreeSet::new(),
            &NullClock,
        )
        .unwrap();
        (serde_json::to_string(&result).unwrap(), backend.stats())
    };

    let first_calls = Arc::new(AtomicUsize::new(0));
    let (first_result, first_stats) = mine_once(Arc::clone(&first_calls));
    // Repeated payloads inside one run are already served from cache, so
    // the network sees each unique payload at most once.
    assert!(first_calls.load(Ordering::SeqCst) > 0);
    assert_eq!(
        first_stats.network_calls as usize,
        first_calls.load(Ordering::SeqCst)
    );

    let second_calls = Arc::new(AtomicUsize::new(0));
    let (second_result, second_stats) = mine_once(Arc::clone(&second_calls));
    assert_eq!(
        second_calls.load(Ordering::SeqCst),
        0,
        "re-run made network calls"
    );
    assert!(second_stats.cache_hits > 0);
    assert_eq!(first_result, second_result);

    pass(
        8,
        "backend contracts",
        &format!(
            "distributions sum to 1; 10/10 corpora ordered; re-run hit cache {} times with 0 network calls",
            second_stats.cache_hits
        ),
    );
}

#[test]
fn acceptance_09_fixture_mining_time_bound() {
    // Image-level evaluations (classifier accuracies, detector counts,
    // image quality scores) need a diffusion model and external
    // classifiers, so they are out of scope here; the property suites in
    // this file stand in for them. The end-to-end timing claim is checked
    // against the offline fixtures.
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let fixture = data("blood_fixture.json");
    let (code, _, stderr) = run_cli(&[
        "mine",
        "--target",
        "blood",
        "--backend",
        "fixture",
        "--fixture",
        fixture.to_str().unwrap(),
        "--out",
        dir.path().join("blood.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let blood_elapsed = started.elapsed();
    assert!(
        blood_elapsed < Duration::from_secs(5),
        "took {blood_elapsed:?}"
    );

    let started = Instant::now();
    let corpus = data("toy_corpus.txt");
    let (code, _, stderr) = run_cli(&[
        "mine",
        "--target",
        "cat",
        "--backend",
        "ngram",
        "--corpus",
        corpus.to_str().unwrap(),
        "--num-candidates",
        "4",
        "--num-related-words",
        "3",
        "--out",
        dir.path().join("cat.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let ngram_elapsed = started.elapsed();
    assert!(
        ngram_elapsed < Duration::from_secs(5),
        "took {ngram_elapsed:?}"
    );

    pass(
        9,
        "offline stand-ins and timing bound",
        &format!(
            "fixture mine {blood_elapsed:?}, ngram mine {ngram_elapsed:?}, both under 5 s (image-level metrics out of scope)"
        ),
    );
}

mod support {
    use select_core::activation::{ActivationReport, WordActivation};
    use select_core::concept::Provenance;
    use select_core::generate::RelatedWord;
    use select_core::{
        Category, CoherenceReport, Concept, ScoredCandidate, SiblingCandidate, UcScore,
    };

    pub fn scored(name: &str, uc_value: f64, ws: f64) -> ScoredCandidate {
        let concept = Concept::new(name, Category::General).unwrap();
        ScoredCandidate {
            candidate: SiblingCandidate {
                concept: concept.clone(),
                sibling_ok: true,
                exclusive_ok: true,
                provenance: Provenance::Fixture,
            },
            activation: ActivationReport {
                concept: concept.clone(),
                per_word: vec![WordActivation {
                    word: RelatedWord {
                        word: "w".into(),
                        source_template: "t".into(),
                    },
                    template: "t".into(),
                    probability: ws,
                }],
                ws,
                related_context_score: 0.0,
                neutral_context_score: 0.0,
                crr: 0.0,
                crr_degenerate: false,
            },
            uc: UcScore {
                anchor: concept.clone(),
                target: Concept::new("target", Category::General).unwrap(),
                value: uc_value,
                per_word_ratios: vec![("w".into(), uc_value)],
            },
            coherence: None,
        }
    }

    pub fn with_cos(mut candidate: ScoredCandidate, cos: f64) -> ScoredCandidate {
        candidate.coherence = Some(CoherenceReport {
            anchor: candidate.candidate.concept.clone(),
            per_prompt: Vec::new(),
            cos,
        });
        candidate
    }
}
