//! Acceptance gate: every criterion prints one PASS/FAIL line, then the test
//! fails if any criterion did.

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arise_core::config::RunConfig;
use arise_core::dataset::{dataset_stats, load_dataset, CsvOptions, Dataset};
use arise_core::encoding::{
    attention_pool, attention_weights, export_stub_bundle, mean_pool, Bundle, TokenMatrix,
    TokenSource,
};
use arise_core::eval::{acc, ari, nmi, run_trials};
use arise_core::fusion::{default_grid, run_arise, silhouette_exact, ClusterParams};
use arise_core::matrix::Matrix;
use arise_core::result::ResultDocument;
use arise_core::scaling::{run_scaling, Axis, ScalingConfig};
use arise_core::semantics::{amortization_ratio, DescriptionCache};
use arise_core::Execution;

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn zoo() -> Dataset {
    load_dataset(fixture("datasets/zoo.csv"), &CsvOptions::with_label("class"), 7).unwrap()
}

fn seeds() -> Vec<u64> {
    (0..10).collect()
}

fn ohk_params() -> ClusterParams {
    ClusterParams {
        grid: vec![0.0],
        ..ClusterParams::default()
    }
}

fn ohk_zoo() -> Outcome {
    let start = Instant::now();
    let r = run_trials(&zoo(), None, &ohk_params(), &seeds()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    check(
        (0.45..=0.75).contains(&r.ari.mean) && r.ari.std <= 0.20 && secs < 10.0,
        format!(
            "Zoo one-hot k-means ARI {:.3}±{:.3} over {} seeds in {secs:.2}s (band [0.45, 0.75], std <= 0.20, < 10 s)",
            r.ari.mean, r.ari.std, r.count
        ),
    )
}

fn bc_without_semantics() -> Outcome {
    let start = Instant::now();
    let ds = load_dataset(
        fixture("datasets/breast_cancer.csv"),
        &CsvOptions::with_label("class"),
        2,
    )
    .map_err(|e| e.to_string())?;
    let r = run_trials(&ds, None, &ohk_params(), &seeds()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    check(
        r.ari.mean.abs() <= 0.05 && secs < 10.0,
        format!(
            "Breast Cancer alpha = 0 ARI {:.4}±{:.3} in {secs:.2}s (|mean| <= 0.05, < 10 s)",
            r.ari.mean, r.ari.std
        ),
    )
}

fn fixture_run() -> Outcome {
    let ds = zoo();
    let cache = DescriptionCache::open(fixture("zoo/descriptions.jsonl")).map_err(|e| e.to_string())?;
    let bundle = Bundle::open(fixture("zoo/bundle")).map_err(|e| e.to_string())?;
    bundle.validate().map_err(|e| e.to_string())?;

    // the checked-in bundle must be exactly what the stub exporter produces
    let tmp = tempfile::tempdir().unwrap();
    export_stub_bundle(&cache.unique_values(None), tmp.path(), bundle.dim()).map_err(|e| e.to_string())?;
    for entry in &bundle.manifest().entries {
        let a = std::fs::read(fixture("zoo/bundle").join(&entry.file)).unwrap();
        let b = std::fs::read(tmp.path().join(&entry.file)).unwrap();
        if a != b {
            return Err(format!("bundle file {} is stale", entry.file));
        }
    }

    let grid = default_grid();
    let params = ClusterParams::default();
    let one = run_arise(&ds, Some(&bundle), &params).map_err(|e| e.to_string())?;
    let labels_ok = one.labels.len() == ds.n() && one.labels.iter().all(|&l| l < ds.k);
    let full = run_trials(&ds, Some(&bundle), &params, &seeds()).map_err(|e| e.to_string())?;
    let alphas_ok = full.trials.iter().all(|t| grid.contains(&t.alpha_star));
    let base = run_trials(&ds, None, &ohk_params(), &seeds()).map_err(|e| e.to_string())?;
    check(
        labels_ok && alphas_ok && grid.contains(&one.alpha_star) && full.ari.mean >= base.ari.mean - 0.05,
        format!(
            "Zoo with hand-written descriptions + stub bundle: ARI {:.3} vs alpha = 0 baseline {:.3} (floor {:.3}); alpha* in grid: {alphas_ok}; labels valid: {labels_ok}",
            full.ari.mean,
            base.ari.mean,
            base.ari.mean - 0.05
        ),
    )
}

fn random_tokens(rng: &mut ChaCha8Rng) -> (Vec<Vec<f32>>, Vec<bool>) {
    let len = rng.random_range(1..=12);
    let dim = rng.random_range(1..=16);
    let rows: Vec<Vec<f32>> = (0..len)
        .map(|_| (0..dim).map(|_| rng.random_range(-6.0f32..6.0)).collect())
        .collect();
    let mut special: Vec<bool> = (0..len).map(|_| rng.random_bool(0.25)).collect();
    let keep = rng.random_range(0..len);
    special[keep] = false;
    (rows, special)
}

fn token_matrix(rows: &[Vec<f32>], special: &[bool]) -> TokenMatrix {
    let dim = rows[0].len();
    let states = rows.iter().flatten().copied().collect();
    TokenMatrix::new(rows.len(), dim, states, special.to_vec(), None).unwrap()
}

/// Rows that are permutations of one dyadic base row, so every row mean is
/// the same number exactly.
fn uniform_score_rows(rng: &mut ChaCha8Rng) -> Vec<Vec<f32>> {
    let len = rng.random_range(1..=10);
    let dim = rng.random_range(1..=16);
    let base: Vec<f32> = (0..dim).map(|_| rng.random_range(-64i32..64) as f32 / 16.0).collect();
    (0..len)
        .map(|_| {
            let mut r = base.clone();
            for i in (1..r.len()).rev() {
                r.swap(i, rng.random_range(0..=i));
            }
            r
        })
        .collect()
}

fn pooling_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut sum_err, mut uni_err, mut shift_err, mut oracle_err) = (0f64, 0f64, 0f64, 0f64);
    for _ in 0..1000 {
        let (rows, special) = random_tokens(&mut rng);
        let tm = token_matrix(&rows, &special);
        let w = attention_weights(&tm).unwrap();
        sum_err = sum_err.max((w.iter().sum::<f64>() - 1.0).abs());
        let (w_ref, pooled_ref) = attention_naive(&rows, &special);
        let pooled = attention_pool(&tm).unwrap().vector;
        for (a, b) in w.iter().zip(&w_ref).chain(pooled.iter().zip(&pooled_ref)) {
            oracle_err = oracle_err.max((a - b).abs());
        }

        let uni = uniform_score_rows(&mut rng);
        let none = vec![false; uni.len()];
        let tm = token_matrix(&uni, &none);
        let a = attention_pool(&tm).unwrap().vector;
        let m = mean_pool(&tm).unwrap().vector;
        for (x, y) in a.iter().zip(&m) {
            uni_err = uni_err.max((x - y).abs());
        }

        // dyadic entries and shift keep every f32 operation exact
        let dyadic: Vec<Vec<f32>> = rows
            .iter()
            .map(|r| r.iter().map(|x| (x * 16.0).round() / 16.0).collect())
            .collect();
        let c = rng.random_range(-160i32..160) as f32 / 16.0;
        let shifted: Vec<Vec<f32>> = dyadic.iter().map(|r| r.iter().map(|x| x + c).collect()).collect();
        let w0 = attention_weights(&token_matrix(&dyadic, &special)).unwrap();
        let w1 = attention_weights(&token_matrix(&shifted, &special)).unwrap();
        for (x, y) in w0.iter().zip(&w1) {
            shift_err = shift_err.max((x - y).abs());
        }
    }
    check(
        sum_err <= 1e-12 && uni_err <= 1e-9 && shift_err <= 1e-9 && oracle_err <= 1e-9,
        format!(
            "1000 random token matrices: |sum w - 1| <= {sum_err:.1e}, attention vs mean on uniform scores {uni_err:.1e}, shift invariance {shift_err:.1e}, vs direct softmax {oracle_err:.1e}"
        ),
    )
}

fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let c = rng.random_range(1..=5);
    (0..n).map(|_| rng.random_range(0..c) * 3 + 1).collect()
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut e_ari, mut e_nmi, mut e_acc) = (0f64, 0f64, 0f64);
    for _ in 0..1000 {
        let n = rng.random_range(2..=12);
        let t = random_labels(&mut rng, n);
        let p = random_labels(&mut rng, n);
        e_ari = e_ari.max((ari(&t, &p).unwrap() - ari_pairs(&t, &p)).abs());
        e_nmi = e_nmi.max((nmi(&t, &p).unwrap() - nmi_entropy(&t, &p)).abs());
        e_acc = e_acc.max((acc(&t, &p).unwrap() - acc_enumerate(&t, &p)).abs());
    }
    let ex_ari = ari(&[0, 0, 0, 1, 1, 1], &[0, 0, 1, 1, 1, 1]).unwrap();
    let ex_acc = acc(&[0, 0, 1, 2], &[1, 1, 2, 2]).unwrap();
    let z = Matrix::from_vec(4, 1, vec![0.0, 1.0, 10.0, 11.0]).unwrap();
    let ex_sil = silhouette_exact(&z, &[0, 0, 1, 1], Execution::Sequential)
        .unwrap()
        .score()
        .unwrap();
    let worked = (ex_ari - 0.324324).abs() <= 1e-6
        && (ex_acc - 0.75).abs() <= 1e-6
        && (ex_sil - 0.899749).abs() <= 1e-6;
    check(
        e_ari <= 1e-9 && e_nmi <= 1e-9 && e_acc <= 1e-9 && worked,
        format!(
            "1000 random instances: max |ARI - pairs| {e_ari:.1e}, |NMI - entropy sums| {e_nmi:.1e}, |ACC - enumeration| {e_acc:.1e}; worked ARI {ex_ari:.6}, ACC {ex_acc:.6}, silhouette {ex_sil:.6}"
        ),
    )
}

fn amortization() -> Outcome {
    let mut worst = 0f64;
    for (_, n, m, v) in PUBLISHED_SIZES {
        let direct = 1.0 - v as f64 / (n as f64 * m as f64);
        worst = worst.max((amortization_ratio(n, m, v).unwrap() - direct).abs());
    }
    let zo = amortization_ratio(101, 16, 36).unwrap();
    let mu = amortization_ratio(8124, 22, 126).unwrap();
    let mut fixtures = Vec::new();
    for (file, code) in [("zoo", "ZO"), ("lymphography", "LY"), ("car", "CA")] {
        let ds = load_dataset(
            fixture(&format!("datasets/{file}.csv")),
            &CsvOptions::with_label("class"),
            2,
        )
        .map_err(|e| e.to_string())?;
        let st = dataset_stats(&ds);
        let row = PUBLISHED_SIZES.iter().find(|r| r.0 == code).unwrap();
        fixtures.push(((st.n, st.m, st.vocab_size) == (row.1, row.2, row.3), code, st.n, st.m, st.vocab_size));
    }
    check(
        worst <= 1e-6
            && (zo - 0.977723).abs() <= 1e-6
            && (mu - 0.999295).abs() <= 1e-6
            && fixtures.iter().all(|f| f.0),
        format!(
            "8 dataset rows: max deviation {worst:.1e}; ZO {zo:.6}, MU {mu:.6}; fixtures (n, m, |V|) {}",
            fixtures
                .iter()
                .map(|f| format!("{} ({}, {}, {})", f.1, f.2, f.3, f.4))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn scaling() -> Outcome {
    let start = Instant::now();
    let rows = run_scaling(&ScalingConfig::default()).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = rows
        .windows(2)
        .map(|w| w[1].online_seconds / w[0].online_seconds)
        .collect();
    let vocab_rows = run_scaling(&ScalingConfig {
        axis: Axis::V,
        values: vec![3, 6, 12],
        n: 300,
        repeats: 1,
        ..ScalingConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let queries_ok = rows.iter().chain(&vocab_rows).all(|r| r.queries == r.vocab);
    let secs = start.elapsed().as_secs_f64();
    check(
        ratios.iter().all(|&r| r <= 2.5) && queries_ok && secs < 120.0,
        format!(
            "N = {:?}: online {:?} s, ratios per doubling {:?} (<= 2.5); queries = |V|: {queries_ok}; sweep {secs:.1}s (< 120 s)",
            rows.iter().map(|r| r.n).collect::<Vec<_>>(),
            rows.iter().map(|r| format!("{:.3}", r.online_seconds)).collect::<Vec<_>>(),
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>(),
        ),
    )
}

fn determinism() -> Outcome {
    let base = fixture("");
    let cfg = RunConfig::from_toml_str(
        r#"
        dataset = "datasets/zoo.csv"
        bundle = "zoo/bundle"
        seed = 3
        "#,
    )
    .map_err(|e| e.to_string())?;
    let run = |cfg: &RunConfig| -> String {
        let ds = cfg.load_dataset(&base).unwrap();
        let bundle = cfg.open_bundle(&base).unwrap();
        let r = run_arise(&ds, bundle.as_ref().map(|b| b as &dyn TokenSource), &cfg.cluster_params()).unwrap();
        ResultDocument::new(&r, cfg.echo()).to_json()
    };
    let a = run(&cfg);
    let b = run(&cfg);
    let mut seq = cfg.clone();
    seq.execution = Execution::Sequential;
    let c: serde_json::Value = serde_json::from_str(&run(&seq)).unwrap();
    let mut c_doc: ResultDocument = serde_json::from_value(c).unwrap();
    c_doc.config_echo = cfg.echo();
    check(
        a == b && a == c_doc.to_json(),
        format!(
            "two runs with one config: {} bytes, identical: {}; sequential execution gives the same result: {}",
            a.len(),
            a == b,
            a == c_doc.to_json()
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("one-hot baseline on Zoo", ohk_zoo),
        ("no-semantics ablation on Breast Cancer", bc_without_semantics),
        ("fixture-driven end-to-end run", fixture_run),
        ("pooling identities", pooling_identities),
        ("metric oracle equivalence", metric_oracles),
        ("amortization ratio", amortization),
        ("runtime scaling in N", scaling),
        ("byte-identical results", determinism),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stderr().lock();
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>())));
        let took = Duration::from_secs_f64(start.elapsed().as_secs_f64());
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        writeln!(out, "{tag} {name}: {detail} [{took:.2?}]").unwrap();
        if outcome.is_err() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
