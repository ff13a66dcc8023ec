use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dirne_cli::error::{EXIT_CONFIG, EXIT_NO_EXPANSION, EXIT_NUMERICAL};
use dirne_cli::{CliError, RunConfig};
use serde_json::Value;
use tempfile::TempDir;

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn dirne(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirne"))
        .current_dir(dir)
        .args(args)
        .env_remove("DIRNE_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad report ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn certify_reference_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = repo("configs/paper_run.toml");
    let out = dirne(
        tmp.path(),
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--oracle-check",
            "certify",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    let hmin = f(&r["certificate"]["hmin_lower"]);
    assert!((6.496e9..=6.70e9).contains(&hmin), "{hmin}");
    assert!((f(&r["rand_in_bits"]) / 6.233e9 - 1.0).abs() < 0.01);
    let net = f(&r["net_bits"]);
    assert!(net > 0.0 && (net / 2.63e8 - 1.0).abs() < 0.4, "{net}");
    assert_eq!(r["config"]["protocol"]["n_rounds"], 3_168_000_000_000u64);
    assert_eq!(f(&r["soundness"]), 5.74e-8);
    // the listed terms re-sum to the certificate
    let b = &r["breakdown"];
    let total = f(&b["rate_term"]) - f(&b["smoothing_penalty"]) + f(&b["inner_term"])
        - f(&b["second_order_term"]);
    assert_eq!(total, hmin);
    assert_eq!(f(&b["hmin_lower"]), hmin);
}

#[test]
fn classical_score_does_not_expand() {
    let tmp = TempDir::new().unwrap();
    let cfg = repo("configs/paper_run.toml");
    let out = dirne(
        tmp.path(),
        &[
            "--config",
            cfg.to_str().unwrap(),
            "certify",
            "--omega-exp",
            "0.75",
        ],
    );
    assert_eq!(code(&out), EXIT_NO_EXPANSION);
    let r = json(&out);
    // the tangent bound is non-positive wherever the rate function vanishes
    assert!(f(&r["certificate"]["threshold_rate"]) <= 0.0);
    assert!(f(&r["certificate"]["hmin_lower"]) < 0.0);
    assert!(f(&r["net_bits"]) < 0.0);
    assert_eq!(r["expansion"], false);
}

#[test]
fn certify_from_count_table() {
    let tmp = TempDir::new().unwrap();
    let cfg = repo("configs/paper_run.toml");
    let tally = repo("data/experimental_counts.txt");
    let out = dirne(
        tmp.path(),
        &[
            "--config",
            cfg.to_str().unwrap(),
            "certify",
            "--tally",
            tally.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&out), 0);
    let t = &json(&out)["tally"];
    assert_eq!(t["passed"], true);
    assert_eq!(t["rounds"], 3_167_998_487_757u64);
    assert!((f(&t["observed_score"]) - 0.750805).abs() < 5e-7);
}

#[test]
fn plan_table_rows() {
    let tmp = TempDir::new().unwrap();
    for (eps_s, eps_c, n_paper) in [("1e-6", "1e-6", 2.647e12), ("1e-9", "1e-9", 4.053e12)] {
        let out = dirne(
            tmp.path(),
            &[
                "plan",
                "--omega-exp",
                "0.750809",
                "--eps-s",
                eps_s,
                "--eps-c",
                eps_c,
            ],
        );
        assert_eq!(code(&out), 0);
        let r = json(&out);
        assert!(
            (f(&r["n_min"]) / n_paper - 1.0).abs() < 0.05,
            "{}",
            r["n_min"]
        );
        assert!((f(&r["gamma_opt"]) / 1.010e-4 - 1.0).abs() < 0.1);
        assert!(f(&r["net_bits"]) > 0.0);
    }
}

#[test]
fn plan_reports_infeasibility() {
    let tmp = TempDir::new().unwrap();
    let out = dirne(
        tmp.path(),
        &[
            "plan",
            "--omega-exp",
            "0.75001",
            "--eps-s",
            "1e-9",
            "--eps-c",
            "1e-9",
        ],
    );
    assert_eq!(code(&out), EXIT_NO_EXPANSION);
    let r = json(&out);
    assert_eq!(r["feasible"], false);
    assert_eq!(f(&r["n_max_rounds"]), 1e18);
}

#[test]
fn plan_writes_gamma_sweep() {
    let tmp = TempDir::new().unwrap();
    let out = dirne(
        tmp.path(),
        &[
            "plan",
            "--omega-exp",
            "0.8",
            "--eps-s",
            "1e-6",
            "--eps-c",
            "1e-6",
            "--sweep-out",
            "sweep.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "gamma,delta,hmin_lower,output_bits,input_bits,net_bits,net_per_round"
    );
    assert_eq!(lines.count(), 25);
}

fn simulate(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", "--tally-out", "run.tally"];
    args.extend_from_slice(extra);
    dirne(dir, &args)
}

#[test]
fn simulation_is_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = [
        "--bernoulli",
        "0.8",
        "--n-rounds",
        "300000",
        "--gamma",
        "0.1",
        "--delta",
        "0.02",
        "--seed",
        "5",
    ];
    let ra = simulate(a.path(), &args);
    let rb = simulate(b.path(), &args);
    assert_eq!(code(&ra), 0);
    assert_eq!(ra.stdout, rb.stdout);
    let ta = std::fs::read(a.path().join("run.tally")).unwrap();
    assert_eq!(ta, std::fs::read(b.path().join("run.tally")).unwrap());
    // the tally file scores the same as the report
    let score = dirne(a.path(), &["score", "run.tally"]);
    assert_eq!(json(&score)["score"], json(&ra)["empirical_score"]);
}

#[test]
fn simulated_score_statistics() {
    let tmp = TempDir::new().unwrap();
    let out = simulate(
        tmp.path(),
        &[
            "--bernoulli",
            "0.750809",
            "--n-rounds",
            "10000000",
            "--gamma",
            "0.01",
            "--delta",
            "0.01",
            "--oracle-check",
        ],
    );
    assert_eq!(code(&out), 0);
    let r = json(&out);
    let tests = f(&r["test_rounds"]);
    let wins = f(&r["wins"]);
    let p = 0.750809;
    assert!((wins / tests - p).abs() < 3.0 * (p * (1.0 - p) / tests).sqrt());

    let out = simulate(
        tmp.path(),
        &[
            "--quantum-reference",
            "--n-rounds",
            "2000000",
            "--gamma",
            "0.5",
            "--delta",
            "0.01",
        ],
    );
    let r = json(&out);
    assert!(f(&r["empirical_score"]) > 0.75);
    assert!((f(&r["model_score"]) - 0.7633089865114572).abs() < 1e-12);
}

#[test]
fn score_tables() {
    let tmp = TempDir::new().unwrap();
    let training = repo("data/training_counts.txt");
    let experimental = repo("data/experimental_counts.txt");
    let r = json(&dirne(tmp.path(), &["score", training.to_str().unwrap()]));
    assert_eq!(r["score_6dp"], "0.750809");
    let r = json(&dirne(
        tmp.path(),
        &["score", experimental.to_str().unwrap()],
    ));
    assert_eq!(r["score_6dp"], "0.750805");
    std::fs::write(
        tmp.path().join("wins.txt"),
        "0 0 0 0 5\n0 0 1 1 5\n0 1 0 0 3\n0 1 1 1 4\n1 0 1 1 9\n1 1 0 1 2\n1 1 1 0 7\n",
    )
    .unwrap();
    let r = json(&dirne(tmp.path(), &["score", "wins.txt"]));
    assert_eq!(f(&r["score"]), 1.0);
}

#[test]
fn miniature_pipeline() {
    let tmp = TempDir::new().unwrap();
    std::fs::copy(repo("configs/miniature.toml"), tmp.path().join("run.toml")).unwrap();
    let sim = dirne(tmp.path(), &["--config", "run.toml", "simulate"]);
    assert_eq!(code(&sim), 0);
    let sim = json(&sim);
    assert_eq!(sim["abort"], false);
    let cert = json(&dirne(tmp.path(), &["--config", "run.toml", "certify"]));
    let ext = dirne(
        tmp.path(),
        &[
            "--config",
            "run.toml",
            "--oracle-check",
            "extract",
            "--seed-out",
            "seed.bits",
        ],
    );
    assert_eq!(code(&ext), 0, "{}", String::from_utf8_lossy(&ext.stderr));
    let ext = json(&ext);
    let s = &ext["summary"];
    let hmin = f(&cert["certificate"]["hmin_lower"]);
    assert_eq!(f(&s["k_min_entropy"]), hmin);
    let m = f(&s["m_bits"]);
    assert_eq!(
        m,
        (hmin - 2.0 * (1.0 / f(&ext["eps_ext_target"])).log2()).floor()
    );
    assert!(f(&s["eps_ext"]) <= f(&ext["eps_ext_target"]));
    assert_eq!(s["n_bits"], sim["extractor_input_bits"]);
    assert_eq!(ext["oracle_rows_checked"], 256);
    let out = std::fs::read(tmp.path().join("miniature.out")).unwrap();
    assert_eq!(u64::from_le_bytes(out[..8].try_into().unwrap()), m as u64);
    assert_eq!(out.len(), 8 + (m as usize).div_ceil(8));
    let seed = std::fs::read(tmp.path().join("seed.bits")).unwrap();
    assert_eq!(
        u64::from_le_bytes(seed[..8].try_into().unwrap()),
        m as u64 + f(&s["n_bits"]) as u64 - 1
    );

    // reusing the saved seed reproduces the output
    std::fs::rename(
        tmp.path().join("miniature.out"),
        tmp.path().join("first.out"),
    )
    .unwrap();
    let again = dirne(
        tmp.path(),
        &[
            "--config",
            "run.toml",
            "extract",
            "--seed-file",
            "seed.bits",
        ],
    );
    assert_eq!(code(&again), 0);
    assert_eq!(
        std::fs::read(tmp.path().join("miniature.out")).unwrap(),
        out
    );
}

#[test]
fn extract_checks_seed_length_before_writing() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    // 64 input bits, 16 output bits: the seed needs 79 bits
    let mut input = 64u64.to_le_bytes().to_vec();
    input.extend([0xA5u8; 8]);
    std::fs::write(d.join("in.bits"), &input).unwrap();
    let mut seed = 78u64.to_le_bytes().to_vec();
    seed.extend([0x3Cu8; 10]);
    std::fs::write(d.join("seed.bits"), &seed).unwrap();
    let args = [
        "extract",
        "--input",
        "in.bits",
        "--seed-file",
        "seed.bits",
        "--output",
        "out.bits",
        "--m-bits",
        "16",
        "--k-bits",
        "60",
    ];
    let out = dirne(d, &args);
    assert_eq!(code(&out), EXIT_CONFIG);
    assert!(String::from_utf8_lossy(&out.stderr).contains("expected 79"));
    assert!(!d.join("out.bits").exists());

    let mut seed = 79u64.to_le_bytes().to_vec();
    seed.extend([0x3Cu8; 10]);
    std::fs::write(d.join("seed.bits"), &seed).unwrap();
    let mut with_check = vec!["--oracle-check"];
    with_check.extend_from_slice(&args);
    let out = dirne(d, &with_check);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["oracle_rows_checked"], 16);
    assert_eq!(f(&r["summary"]["eps_ext"]), 2f64.powi(-22));
}

#[test]
fn extract_without_entropy_margin_reports_no_expansion() {
    let tmp = TempDir::new().unwrap();
    let out = dirne(
        tmp.path(),
        &[
            "extract",
            "--input",
            "missing.bits",
            "--seed-rng",
            "1",
            "--k-bits",
            "50",
            "--eps-s",
            "1e-6",
            "--eps-c",
            "1e-6",
        ],
    );
    assert_eq!(code(&out), EXIT_NO_EXPANSION);
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|x| x.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

#[test]
fn score_curve_is_monotone() {
    let tmp = TempDir::new().unwrap();
    let out = dirne(
        tmp.path(),
        &[
            "curve", "--kind", "score", "--points", "7", "--eps-s", "5.74e-8", "--eps-c", "1e-6",
        ],
    );
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("omega_exp,n_min,gamma,delta,net_bits\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 7);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
}

#[test]
fn rounds_curve_approaches_the_asymptote() {
    let tmp = TempDir::new().unwrap();
    let out = dirne(
        tmp.path(),
        &[
            "--report",
            "curve.json",
            "curve",
            "--kind",
            "rounds",
            "--omega-exp",
            "0.78",
            "--gamma",
            "0.01",
            "--eps-s",
            "1e-6",
            "--eps-c",
            "1e-6",
            "--start",
            "1e8",
            "--stop",
            "1e16",
            "--points",
            "9",
            "--out",
            "rate.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let report: Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("curve.json")).unwrap()).unwrap();
    assert_eq!(report["rows"], 9);
    let rows = csv_rows(&std::fs::read_to_string(tmp.path().join("rate.csv")).unwrap());
    let asymptote = rows[0][4];
    assert!(rows.windows(2).all(|w| w[1][3] > w[0][3]));
    assert!(rows.iter().all(|r| r[3] < asymptote));
    assert!(rows.last().unwrap()[3] > 0.95 * asymptote);
}

#[test]
fn gamma_curve_has_interior_maximum() {
    let tmp = TempDir::new().unwrap();
    let out = dirne(
        tmp.path(),
        &[
            "curve",
            "--kind",
            "gamma",
            "--omega-exp",
            "0.750809",
            "--n-rounds",
            "3168000000000",
            "--eps-s",
            "5.74e-8",
            "--eps-c",
            "1e-6",
            "--start",
            "2e-5",
            "--stop",
            "1e-3",
            "--points",
            "15",
        ],
    );
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let net: Vec<f64> = rows.iter().map(|r| r[5]).collect();
    let best = net
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert!(best > 0 && best < net.len() - 1);
    assert!(net[best] > 0.0);
    // rises to the peak and falls after it
    assert!(net[..=best].windows(2).all(|w| w[1] > w[0]));
    assert!(net[best..].windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn spacetime_reference_layout() {
    let tmp = TempDir::new().unwrap();
    let cfg = repo("configs/quantum_reference.toml");
    let r = json(&dirne(
        tmp.path(),
        &["--config", cfg.to_str().unwrap(), "spacetime"],
    ));
    assert_eq!(r["all_satisfied"], true);
    let r = json(&dirne(tmp.path(), &["spacetime"]));
    assert_eq!(r["all_satisfied"], true);
}

#[test]
fn config_errors_exit_with_config_status() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("bad.toml"),
        "[protocol]\nn_rounds = 10\nomega = 0.8\n",
    )
    .unwrap();
    assert_eq!(
        code(&dirne(d, &["--config", "bad.toml", "certify"])),
        EXIT_CONFIG
    );
    std::fs::write(d.join("bad.toml"), "[spacetime]\nsa_km = 1.0\n").unwrap();
    assert_eq!(
        code(&dirne(d, &["--config", "bad.toml", "spacetime"])),
        EXIT_CONFIG
    );
    // missing budget
    assert_eq!(
        code(&dirne(
            d,
            &[
                "certify",
                "--n-rounds",
                "1000",
                "--gamma",
                "0.5",
                "--omega-exp",
                "0.8"
            ]
        )),
        EXIT_CONFIG
    );
    // gamma outside (0, 1)
    assert_eq!(
        code(&dirne(
            d,
            &[
                "certify",
                "--n-rounds",
                "1000",
                "--gamma",
                "2",
                "--omega-exp",
                "0.8",
                "--eps-s",
                "1e-6",
                "--eps-c",
                "1e-6"
            ]
        )),
        EXIT_CONFIG
    );
    assert_eq!(code(&dirne(d, &["score", "nowhere.txt"])), 1);
    let out = Command::new(env!("CARGO_BIN_EXE_dirne"))
        .current_dir(d)
        .args(["spacetime"])
        .env("DIRNE_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), EXIT_CONFIG);
}

#[test]
fn worker_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let args = [
        "simulate",
        "--bernoulli",
        "0.8",
        "--n-rounds",
        "500000",
        "--gamma",
        "0.2",
        "--delta",
        "0.02",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_dirne"))
        .current_dir(tmp.path())
        .args(args)
        .env("DIRNE_WORKERS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_dirne"))
        .current_dir(tmp.path())
        .args(args)
        .env("DIRNE_WORKERS", "4")
        .output()
        .unwrap();
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn exit_codes_for_guards() {
    let precision = CliError::Core(dirne_core::Error::Precision {
        value: 0.5,
        distance: 0.5,
    });
    assert_eq!(precision.exit_code(), EXIT_NUMERICAL);
    assert_eq!(
        CliError::Core(dirne_core::Error::Overflow { log2_k: 2000.0 }).exit_code(),
        EXIT_NUMERICAL
    );
    assert_eq!(
        CliError::OracleMismatch("x".into()).exit_code(),
        EXIT_NUMERICAL
    );
    assert_eq!(
        CliError::Core(dirne_core::Error::Infeasible { n_max: 1e18 }).exit_code(),
        EXIT_NO_EXPANSION
    );
}

#[test]
fn config_files_parse() {
    for name in ["paper_run", "miniature", "quantum_reference"] {
        RunConfig::load(&repo(&format!("configs/{name}.toml"))).unwrap();
    }
    let cfg = RunConfig::from_toml("[device]\nkind = \"bernoulli\"\nomega = 0.8\n").unwrap();
    assert!(cfg.device.is_some());
    assert!(
        RunConfig::from_toml("[device]\nkind = \"bernoulli\"\nomega = 0.8\nextra = 1\n").is_err()
    );
    assert!(RunConfig::from_toml("[budget]\neps_s = \"small\"\n").is_err());
}
