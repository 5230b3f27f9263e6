//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `cargo test -p cirsense --test acceptance -- --nocapture`
//! to see them all).

use std::path::{Path, PathBuf};
use std::time::Instant;

use cirsense::commands::{cmd_pipeline, event_cases};
use cirsense::conf::RunConfig;
use cirsense::exports::parse_matrix_csv;
use cirsense::framefile;
use cirsense_core::channel::{propagate, Event, MultipathChannel, Scenario, Tap};
use cirsense_core::dataset;
use cirsense_core::estimator::estimate_cir;
use cirsense_core::gsm::{modulate_bits, training_sequence};
use cirsense_core::linalg::{svd, Mat};
use cirsense_core::pca::pca;
use cirsense_core::report::{average_correct, format_pct, ConfusionMatrix};
use cirsense_core::rng::SeededRng;
use cirsense_core::svm::{objective, oracle_train, train_binary, SvmConfig};
use cirsense_core::CirFrame;
use num_complex::Complex64;

fn check(criterion: u8, name: &str, passed: bool, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    eprintln!("[acceptance] criterion {criterion} ({name}): {verdict} - {detail}");
    assert!(passed, "criterion {criterion} ({name}) failed: {detail}");
}

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn gaussian_mat(rng: &mut SeededRng, rows: usize, cols: usize) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.gaussian_pair().0;
        }
    }
    m
}

#[test]
fn criterion_1_estimation_fidelity() {
    let start = Instant::now();
    let truth = [
        (0usize, Complex64::new(0.8, 0.0)),
        (2, Complex64::new(0.3, -0.1)),
        (5, Complex64::new(0.0, 0.1)),
    ];
    let channel = MultipathChannel::new(
        truth.iter().map(|&(d, g)| Tap::fixed(d, g)).collect(),
        f64::INFINITY,
        0,
    )
    .unwrap();
    let sounding = modulate_bits(training_sequence(0).unwrap().bits(), 1).unwrap();
    let received = propagate(&sounding, &channel, 0);
    let estimate = estimate_cir(&received, 0, 20, 0).unwrap();
    let mut max_err = 0.0f64;
    for (idx, tap) in estimate.taps.iter().enumerate() {
        let expected = truth
            .iter()
            .find(|&&(d, _)| d == idx)
            .map(|&(_, g)| g)
            .unwrap_or_else(|| Complex64::new(0.0, 0.0));
        max_err = max_err.max((tap - expected).norm());
    }
    let elapsed = start.elapsed();
    check(
        1,
        "estimation fidelity",
        max_err < 1e-6 && elapsed.as_secs_f64() < 1.0,
        &format!("max tap error {max_err:.3e} (< 1e-6), runtime {elapsed:.2?} (< 1 s)"),
    );
}

#[test]
fn criterion_2_svd_pca_contract() {
    let start = Instant::now();
    let mut rng = SeededRng::new(&[0xACCE_2]);
    let mut worst_recon = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut worst_fav = 0.0f64;
    for _ in 0..100 {
        let a = gaussian_mat(&mut rng, 64, 40);
        let dec = svd(&a).unwrap();
        worst_recon = worst_recon.max(dec.reconstruct().max_abs_diff(&a));

        let p = pca(&a).unwrap();
        let sum: f64 = p.explained_pct.iter().sum();
        worst_sum = worst_sum.max((sum - 100.0).abs());
        for w in p.explained_pct.windows(2) {
            assert!(w[0] >= w[1] - 1e-12, "explained percentages not sorted");
        }
        // F = (centered A) * V
        let mean = a.col_means();
        let mut centered = a.clone();
        for i in 0..centered.rows() {
            for (v, m) in centered.row_mut(i).iter_mut().zip(&mean) {
                *v -= m;
            }
        }
        worst_fav = worst_fav.max(p.components.max_abs_diff(&centered.matmul(&p.rotation)));
    }
    let elapsed = start.elapsed();
    check(
        2,
        "svd/pca",
        worst_recon < 1e-8
            && worst_sum < 1e-6
            && worst_fav < 1e-8
            && elapsed.as_secs_f64() < 10.0,
        &format!(
            "over 100 random 64x40: reconstruction {worst_recon:.2e} (< 1e-8), \
             sum deviation {worst_sum:.2e} (< 1e-6), F vs AV {worst_fav:.2e} (< 1e-8), \
             runtime {elapsed:.2?} (< 10 s)"
        ),
    );
}

#[test]
fn criterion_3_scree_dominant_directions() {
    // Twelve dominant covariance directions (dominance >= 50x) must carry
    // at least 98% of the information, across five seeds.
    let d = 40;
    let mut worst_cum = f64::INFINITY;
    for seed in 0..5u64 {
        let mut rng = SeededRng::new(&[0xACCE_3, seed]);
        // Random orthogonal basis via Gram-Schmidt.
        let g = gaussian_mat(&mut rng, d, d);
        let mut q = Mat::zeros(d, d);
        for j in 0..d {
            let mut col: Vec<f64> = (0..d).map(|i| g[(i, j)]).collect();
            for prev in 0..j {
                let proj: f64 = (0..d).map(|i| col[i] * q[(i, prev)]).sum();
                for i in 0..d {
                    col[i] -= proj * q[(i, prev)];
                }
            }
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            for i in 0..d {
                q[(i, j)] = col[i] / norm;
            }
        }
        // Variances: 12 dominant (100 down to 45), residual 0.02 each;
        // dominance ratio 45 / 0.02 = 2250 >= 50.
        let n = 1500;
        let mut latent = gaussian_mat(&mut rng, n, d);
        for i in 0..n {
            for j in 0..d {
                let sd = if j < 12 {
                    (100.0 - 5.0 * j as f64).sqrt()
                } else {
                    0.02f64.sqrt()
                };
                latent[(i, j)] *= sd;
            }
        }
        let data = latent.matmul(&q.transpose());
        let p = pca(&data).unwrap();
        let cum: f64 = p.explained_pct[..12].iter().sum();
        worst_cum = worst_cum.min(cum);
    }
    check(
        3,
        "scree dominant directions",
        worst_cum >= 98.0,
        &format!("worst cumulative explained variance of first 12 components {worst_cum:.3}% (>= 98%)"),
    );
}

#[test]
fn criterion_4_svm_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = SeededRng::new(&[0xACCE_4]);
    let mut worst_gap = 0.0f64;
    let mut worst_kkt = 0.0f64;
    for trial in 0..50usize {
        let n = 4 + trial % 9; // up to 12 points
        let d = 1 + trial % 3;
        let c = [0.1, 1.0, 10.0][trial % 3];
        let mut x = Mat::zeros(n, d);
        let mut y = vec![0i8; n];
        loop {
            for i in 0..n {
                for j in 0..d {
                    x[(i, j)] = 2.5 * rng.gaussian_pair().0;
                }
                y[i] = if rng.uniform() < 0.5 { -1 } else { 1 };
            }
            if y.contains(&1) && y.contains(&-1) {
                break;
            }
        }
        let config = SvmConfig {
            c,
            ..SvmConfig::default()
        };
        let solver = train_binary(&x, &y, &config).unwrap();
        let oracle = oracle_train(&x, &y, c).unwrap();
        worst_gap = worst_gap.max((solver.objective - oracle.objective).abs());
        assert!(
            (objective(&oracle.weights, oracle.bias, &x, &y, c) - oracle.objective).abs() < 1e-12
        );

        // KKT of the oracle: box feasibility, equality feasibility, and
        // complementary slackness on the margins.
        let feas: f64 = oracle
            .alphas
            .iter()
            .zip(&y)
            .map(|(&a, &yi)| a * yi as f64)
            .sum();
        worst_kkt = worst_kkt.max(feas.abs());
        for i in 0..n {
            let a = oracle.alphas[i];
            assert!((-1e-9..=c + 1e-9).contains(&a), "alpha out of box");
            let margin: f64 = y[i] as f64
                * (x.row(i)
                    .iter()
                    .zip(&oracle.weights)
                    .map(|(xi, wi)| xi * wi)
                    .sum::<f64>()
                    + oracle.bias);
            let violation = if a <= 1e-6 * c {
                (1.0 - margin).max(0.0)
            } else if a >= c * (1.0 - 1e-6) {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            };
            worst_kkt = worst_kkt.max(violation);
        }
    }
    let elapsed = start.elapsed();
    check(
        4,
        "svm oracle equivalence",
        worst_gap <= 1e-3 && worst_kkt <= 1e-6 && elapsed.as_secs_f64() < 30.0,
        &format!(
            "over 50 instances: worst objective gap {worst_gap:.2e} (<= 1e-3), \
             worst oracle KKT violation {worst_kkt:.2e} (<= 1e-6), runtime {elapsed:.2?} (< 30 s)"
        ),
    );
}

fn diag_matrix(diags: [f64; 3], case_id: u32, names: [&str; 3]) -> ConfusionMatrix {
    let mut entries = vec![0.0; 9];
    for (k, d) in diags.iter().enumerate() {
        for p in 0..3 {
            entries[k * 3 + p] = if p == k { *d } else { (100.0 - d) / 2.0 };
        }
    }
    ConfusionMatrix {
        classes: vec![0, 1, 2],
        names: names.iter().map(|s| s.to_string()).collect(),
        entries,
        row_counts: vec![4000; 3],
        case_id,
    }
}

#[test]
fn criterion_5_table_arithmetic_replay() {
    // Person-detection table: per-case diagonals by true class.
    let a = [
        diag_matrix([86.000, 71.925, 83.550], 1, ["ps", "np", "pm"]),
        diag_matrix([85.725, 82.500, 89.950], 2, ["ps", "np", "pm"]),
        diag_matrix([86.125, 77.950, 82.975], 3, ["ps", "np", "pm"]),
    ];
    let avg_a = average_correct(&a).unwrap();
    let got_a: Vec<String> = avg_a.iter().map(|(_, v)| format_pct(*v)).collect();

    // Weapon-detection table.
    let b = [
        diag_matrix([91.675, 92.475, 98.550], 4, ["cw", "nw", "vw"]),
        diag_matrix([95.850, 97.875, 99.025], 5, ["cw", "nw", "vw"]),
        diag_matrix([98.100, 97.675, 98.200], 6, ["cw", "nw", "vw"]),
    ];
    let avg_b = average_correct(&b).unwrap();
    let got_b: Vec<String> = avg_b.iter().map(|(_, v)| format_pct(*v)).collect();

    let want_a = ["85.950", "77.458", "85.491"];
    let want_b = ["95.208", "96.008", "98.591"];
    let ok = got_a == want_a && got_b == want_b;
    check(
        5,
        "table arithmetic replay",
        ok,
        &format!("rendered averages {got_a:?} and {got_b:?} (expected {want_a:?} / {want_b:?})"),
    );
}

fn desk_config(event: Event, scenario_file: &str, out: &Path) -> RunConfig {
    RunConfig {
        event,
        scenario_file: repo_path(scenario_file),
        out_dir: out.to_path_buf(),
        frames_per_set: 650,
        seeds: [1001, 2002, 3003],
        snr_db: Some(20.0),
        svm_c: 1.0,
        svm_tolerance: 1e-6,
        svm_max_iterations: 2_000_000,
        svm_gamma: None,
        pca_n: 300,
        pca_k: 3,
        tsc_index: 0,
    }
}

fn case_matrices(cfg: &RunConfig) -> Vec<ConfusionMatrix> {
    event_cases(cfg.event)
        .iter()
        .map(|case| {
            let path = cfg.out_dir.join(format!("case{case}_confusion.csv"));
            parse_matrix_csv(&std::fs::read_to_string(&path).unwrap()).unwrap()
        })
        .collect()
}

#[test]
fn criterion_6_desk_scale_experiment() {
    let start = Instant::now();
    // Separated scenarios: every matrix diagonally dominant, mean diagonal
    // per event at least 75%.
    let mut event_means = Vec::new();
    for event in [Event::A, Event::B] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = desk_config(event, "config/scenarios.conf", dir.path());
        cmd_pipeline(&cfg).unwrap();
        let mut diags = Vec::new();
        for m in case_matrices(&cfg) {
            for t in 0..3 {
                for p in 0..3 {
                    if p != t {
                        assert!(
                            m.entry(t, t) > m.entry(t, p),
                            "case {} row {t} not diagonally dominant",
                            m.case_id
                        );
                    }
                }
                diags.push(m.entry(t, t));
            }
        }
        event_means.push(diags.iter().sum::<f64>() / diags.len() as f64);
    }

    // Null scenarios (all identical): chance-level classification.
    let mut null_means = Vec::new();
    for event in [Event::A, Event::B] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = desk_config(event, "config/scenarios_null.conf", dir.path());
        cmd_pipeline(&cfg).unwrap();
        let mut diags = Vec::new();
        for m in case_matrices(&cfg) {
            for t in 0..3 {
                diags.push(m.entry(t, t));
            }
        }
        null_means.push(diags.iter().sum::<f64>() / diags.len() as f64);
    }

    let elapsed = start.elapsed();
    let separated_ok = event_means.iter().all(|&m| m >= 75.0);
    let null_ok = null_means.iter().all(|&m| (m - 100.0 / 3.0).abs() <= 5.0);
    check(
        6,
        "desk-scale experiment",
        separated_ok && null_ok && elapsed.as_secs_f64() < 300.0,
        &format!(
            "mean diagonals a/b {:.2}%/{:.2}% (>= 75%), null {:.2}%/{:.2}% (33.3 +- 5), \
             runtime {elapsed:.2?} (< 5 min)",
            event_means[0], event_means[1], null_means[0], null_means[1]
        ),
    );
}

#[test]
fn criterion_7_pipeline_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = desk_config(Event::A, "config/scenarios.conf", dir.path());
    cmd_pipeline(&cfg).unwrap();
    let snapshot: Vec<(PathBuf, Vec<u8>)> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    assert!(snapshot.len() >= 21, "expected a full output set");

    // Rerun with the identical config into the same directory.
    cmd_pipeline(&cfg).unwrap();
    let mut mismatched = Vec::new();
    for (path, before) in &snapshot {
        let after = std::fs::read(path).unwrap();
        if &after != before {
            mismatched.push(path.display().to_string());
        }
    }
    check(
        7,
        "pipeline determinism",
        mismatched.is_empty(),
        &format!(
            "{} artifacts bitwise identical across reruns{}",
            snapshot.len(),
            if mismatched.is_empty() {
                String::new()
            } else {
                format!("; mismatched: {mismatched:?}")
            }
        ),
    );
}

#[test]
fn criterion_8_format_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.csns");
    let mut rng = SeededRng::new(&[0xACCE_8]);
    let frames: Vec<CirFrame> = (0..10_000u32)
        .map(|k| CirFrame {
            values: (0..40).map(|_| rng.gaussian_pair().0 as f32).collect(),
            label: Scenario::PersonMoving,
            set_id: 3,
            burst_index: k,
        })
        .collect();
    framefile::write_frames(&frames, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), framefile::file_size(10_000, 40));
    let back = framefile::read_frames(&path).unwrap();
    let round_trip_ok = back == frames && framefile::encode_frames(&back).unwrap() == bytes;

    // Corrupted magic.
    let mut corrupt = bytes.clone();
    corrupt[0] = b'Z';
    let bad_magic = dir.path().join("bad_magic.csns");
    std::fs::write(&bad_magic, &corrupt).unwrap();
    let magic_err = match framefile::read_frames(&bad_magic) {
        Err(e) => e.exit_code() == 3 && format!("{e}").contains("magic"),
        Ok(_) => false,
    };

    // Truncated payload.
    let truncated = dir.path().join("truncated.csns");
    std::fs::write(&truncated, &bytes[..bytes.len() - 17]).unwrap();
    let trunc_err = match framefile::read_frames(&truncated) {
        Err(e) => e.exit_code() == 3 && format!("{e}").contains("truncated"),
        Ok(_) => false,
    };

    // frame_len 39.
    let mut weird = bytes.clone();
    weird[6] = 39;
    weird[7] = 0;
    let bad_len = dir.path().join("bad_len.csns");
    std::fs::write(&bad_len, &weird).unwrap();
    let len_err = match framefile::read_frames(&bad_len) {
        Err(e) => e.exit_code() == 3 && format!("{e}").contains("frame_len"),
        Ok(_) => false,
    };

    check(
        8,
        "format round trip",
        round_trip_ok && magic_err && trunc_err && len_err,
        &format!(
            "10000-frame round trip bitwise exact: {round_trip_ok}; \
             magic/truncation/frame_len errors raised: {magic_err}/{trunc_err}/{len_err}"
        ),
    );
}
