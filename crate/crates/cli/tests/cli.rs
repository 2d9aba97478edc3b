use std::process::{Command, Output};

use approx::assert_abs_diff_eq;
use serde_json::Value;

const TRIAL: [&str; 8] = [
    "--events", "102", "--n1", "288", "--events0", "75", "--n2", "277",
];

fn ancred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ancred"))
        .args(args)
        .env_remove("ANCRED_SEED")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = ancred(&all);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let envelope: Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(envelope["schema_version"], "1");
    envelope
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn with<'a>(base: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    base.iter().chain(extra).copied().collect()
}

fn csv_rows(out: &Output) -> (Vec<String>, Vec<Vec<f64>>) {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn analyse_running_example() {
    let env = json(&with(&["analyse"], &with(&TRIAL, &["--exp"])));
    assert_eq!(env["command"], "analyse");
    let r = &env["results"];
    assert_abs_diff_eq!(f(&r["p"]), 0.034, epsilon = 1e-3);
    assert_abs_diff_eq!(f(&r["p_intrinsic"]), 0.13, epsilon = 5e-3);
    assert_abs_diff_eq!(f(&r["sceptical_prior"]["sceptical_limit"]), 0.605, epsilon = 5e-3);
    assert_abs_diff_eq!(f(&r["exp"]["sceptical_limit"]), 1.83, epsilon = 5e-3);
    assert_abs_diff_eq!(f(&r["sceptical_prior"]["tau"]), 0.31, epsilon = 5e-3);
    assert_abs_diff_eq!(f(&r["credibility_ratio"]["ratio"]), 25.6, epsilon = 0.15);
    assert_eq!(r["credibility_ratio"]["credible"], false);
    assert_eq!(r["variance_verdict"]["credible"], false);
    assert_eq!(r["intrinsically_credible"], false);
    assert_abs_diff_eq!(f(&r["exp"]["estimate"]), 1.31, epsilon = 5e-3);
    assert_abs_diff_eq!(f(&r["intrinsic_threshold"]), 0.0056, epsilon = 1e-4);
}

#[test]
fn analyse_human_output_uses_four_digits() {
    let out = ancred(&with(&["analyse"], &TRIAL));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("p:                     0.03406"), "{text}");
    assert!(text.contains("sceptical limit S:     0.6036"), "{text}");
    assert!(text.contains("intrinsically credible at 95%: no"), "{text}");
}

#[test]
fn p_value_of_one_has_intrinsic_p_of_one() {
    let r = &json(&["analyse", "--p", "1.0"])["results"];
    assert_eq!(f(&r["p_intrinsic"]), 1.0);
    assert!(r["sceptical_prior"].is_null());
    assert!(r["absent"]["sceptical_prior"].is_string());
}

#[test]
fn credibility_ratio_boundary() {
    let r = &json(&["analyse", "--ci", "1.0,5.828427", "--level", "0.95", "--scale", "additive"])
        ["results"];
    assert_abs_diff_eq!(f(&r["credibility_ratio"]["ratio"]), 5.828427, epsilon = 1e-9);
    assert_eq!(r["credibility_ratio"]["credible"], true);
    assert_eq!(r["variance_verdict"]["credible"], true);
    assert_eq!(r["intrinsically_credible"], true);
}

#[test]
fn extrinsic_running_example() {
    let args = with(&["extrinsic"], &with(&TRIAL, &["--ext-ci", "1.31,2.02"]));
    let r = &json(&args)["results"];
    assert_abs_diff_eq!(f(&r["p_extrinsic"]), 0.062, epsilon = 2e-3);
    assert_abs_diff_eq!(f(&r["box_test"]["statistic"]), 1.49, epsilon = 0.01);
    assert_abs_diff_eq!(f(&r["box_test"]["tail"]), 0.14, epsilon = 5e-3);
    assert_eq!(r["matthews_extrinsic_credible"], false);
    assert!(r["compatibility"]["tail"].is_number());
    assert_abs_diff_eq!(f(&r["report"]["p_extrinsic"]), f(&r["p_extrinsic"]));
}

#[test]
fn extrinsic_box_tail_drops_at_lower_level() {
    let base = with(&["extrinsic"], &with(&TRIAL, &["--ext-ci", "1.31,2.02"]));
    let at95 = f(&json(&base)["results"]["box_test"]["tail"]);
    let at90 = f(&json(&with(&base, &["--level", "0.9"]))["results"]["box_test"]["tail"]);
    assert!(at90 < at95);
}

#[test]
fn identical_studies_reduce_to_intrinsic_p() {
    let est = ["--estimate", "0.5", "--se", "0.2"];
    let ext = ["--ext-estimate", "0.5", "--ext-se", "0.2"];
    let r = &json(&with(&with(&["extrinsic"], &est), &ext))["results"];
    let intrinsic = &json(&with(&["analyse"], &est))["results"];
    assert_eq!(f(&r["c"]), 1.0);
    assert_abs_diff_eq!(f(&r["p_extrinsic"]), f(&intrinsic["p_intrinsic"]), epsilon = 1e-9);
}

#[test]
fn p_value_inputs_need_c() {
    let out = ancred(&["extrinsic", "--p", "0.03", "--ext-p", "0.001"]);
    assert_eq!(out.status.code(), Some(2));
    let r = &json(&["extrinsic", "--p", "0.03", "--ext-p", "0.001", "--c", "1.3"])["results"];
    assert!(r["p_extrinsic"].is_number());
    assert!(r["compatibility"].is_null());
    assert!(r["sceptical_prior"].is_null());
    assert!(r["box_test"]["tail"].is_number());

    let out = ancred(&with(&["extrinsic", "--ext-p", "0.001", "--c", "2"], &["--p", "0.03"]));
    assert!(out.status.success());
    let both = with(&["extrinsic", "--c", "1"], &with(&TRIAL, &["--ext-ci", "1.31,2.02"]));
    assert_eq!(ancred(&both).status.code(), Some(2));
}

#[test]
fn null_external_effect() {
    let args = with(&["extrinsic"], &with(&TRIAL, &["--ext-estimate", "0", "--ext-se", "0.2"]));
    let r = &json(&args)["results"];
    assert_eq!(f(&r["box_test"]["tail"]), 1.0);
    assert!(r["p_extrinsic"].is_null());
    assert_eq!(r["absent"]["p_extrinsic"], "no solution below 1");

    let out = ancred(&args);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("no solution below 1"));
}

#[test]
fn not_significant_internal_keeps_p_e() {
    let args = ["extrinsic", "--ci", "0.9,1.5", "--ext-ci", "1.31,2.02"];
    let r = &json(&args)["results"];
    assert!(r["p_extrinsic"].is_number());
    assert!(r["box_test"].is_null());
    assert!(r["matthews_extrinsic_credible"].is_null());
    assert!(r["absent"]["box_test"].as_str().unwrap().contains("not significant"));
}

#[test]
fn prior_command() {
    let r = &json(&with(&["prior"], &TRIAL))["results"];
    assert_abs_diff_eq!(f(&r["sceptical_limit"]), 0.6036, epsilon = 1e-4);
    assert_abs_diff_eq!(f(&r["tau2"]), f(&r["tau"]).powi(2), epsilon = 1e-15);
    assert_eq!(f(&r["critical_interval"][0]), -f(&r["sceptical_limit"]));
}

#[test]
fn exit_codes() {
    assert_eq!(ancred(&["prior", "--ci", "0.9,1.5"]).status.code(), Some(4));
    assert_eq!(ancred(&["analyse", "--p", "0.1", "--ci", "1,2"]).status.code(), Some(2));
    assert_eq!(ancred(&["analyse"]).status.code(), Some(2));
    assert_eq!(ancred(&["analyse", "--p", "1.5"]).status.code(), Some(3));
    assert_eq!(ancred(&["analyse", "--ci", "-1,2"]).status.code(), Some(3));
    assert_eq!(ancred(&["simulate", "--c", "-1", "--n", "10"]).status.code(), Some(3));
    assert_eq!(ancred(&["figure-data", "nonsense"]).status.code(), Some(2));
    assert_eq!(ancred(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn json_errors_are_enveloped() {
    let out = ancred(&["--json", "prior", "--ci", "0.9,1.5"]);
    assert_eq!(out.status.code(), Some(4));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(err["schema_version"], "1");
    assert_eq!(err["error"]["kind"], "not-significant");

    let out = ancred(&["analyse", "--json", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(err["error"]["kind"], "usage");
}

#[test]
fn degenerate_table_names_the_cell() {
    let out = ancred(&["analyse", "--events", "10", "--n1", "10", "--events0", "3", "--n2", "20"]);
    assert_eq!(out.status.code(), Some(5));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("non-events in the treatment group"), "{msg}");
}

#[test]
fn ratio_and_additive_scales_agree() {
    let (lo, hi) = (1.31f64, 2.02f64);
    let logged = format!("{},{}", lo.ln(), hi.ln());
    let ratio = json(&["analyse", "--ci", "1.31,2.02"]);
    let additive = json(&["analyse", "--ci", &logged, "--scale", "additive"]);
    assert_eq!(ratio["results"], additive["results"]);
}

#[test]
fn negative_effects_mirror_positive_ones() {
    let pos = json(&["analyse", "--ci", "0.2,0.9", "--scale", "additive"]);
    let neg = json(&["analyse", "--ci", "-0.9,-0.2", "--scale", "additive"]);
    for key in ["p", "p_intrinsic", "intrinsically_credible", "credibility_ratio", "sceptical_prior"] {
        assert_eq!(pos["results"][key], neg["results"][key], "{key}");
    }
}

#[test]
fn seeded_runs_are_byte_identical() {
    for args in [
        vec!["simulate", "--c", "1", "--n", "50000", "--seed", "42"],
        vec!["--json", "simulate", "--c", "0.5", "--n", "5000", "--seed", "7"],
        vec!["figure-data", "null-histograms", "--n", "3000", "--seed", "9"],
    ] {
        let a = ancred(&args);
        let b = ancred(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_can_come_from_the_environment() {
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ancred"));
        cmd.args(["simulate", "--n", "2000"]);
        match seed {
            Some(s) => cmd.env("ANCRED_SEED", s),
            None => cmd.env_remove("ANCRED_SEED"),
        };
        cmd.output().unwrap().stdout
    };
    let explicit = ancred(&["simulate", "--n", "2000", "--seed", "5"]).stdout;
    assert_eq!(run(Some("5")), explicit);
    assert_ne!(run(None), explicit);
}

#[test]
fn simulate_small_c_follows_beta_law() {
    let env = json(&["simulate", "--c", "0.000001", "--n", "50000"]);
    let rows = env["results"]["histogram"]["rows"].as_array().unwrap();
    let total: f64 = rows.iter().map(|r| f(&r[3])).sum();
    let below_half: f64 = rows
        .iter()
        .filter(|r| f(&r[1]) <= 0.5)
        .map(|r| f(&r[3]))
        .sum();
    assert_eq!(total, 50_000.0);
    assert_abs_diff_eq!(below_half / total, 0.25, epsilon = 0.01);
}

#[test]
fn simulate_respects_tail_bound() {
    let env = json(&["simulate", "--c", "1", "--n", "50000"]);
    let tails = env["results"]["tails"].as_array().unwrap();
    assert_eq!(tails.len(), 3);
    let at05 = tails.iter().find(|t| f(&t["alpha"]) == 0.05).unwrap();
    assert!(f(&at05["empirical"]) <= 0.0025 + 3.0 * (0.0025f64 / 50_000.0).sqrt());
    assert_eq!(at05["within_bound"], true);
}

#[test]
fn simulate_writes_csv_file() {
    let dir = std::env::temp_dir().join(format!("ancred-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("hist.csv");
    let out = ancred(&["simulate", "--n", "1000", "--csv", path.to_str().unwrap()]);
    assert!(out.status.success());
    let written = std::fs::read_to_string(&path).unwrap();
    let stdout = ancred(&["simulate", "--n", "1000"]).stdout;
    assert_eq!(written.as_bytes(), stdout.as_slice());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn thresholds_figure() {
    let (header, rows) = csv_rows(&ancred(&["figure-data", "thresholds"]));
    assert_eq!(header, ["alpha", "alpha_i", "matthews_alpha_i"]);
    let row = rows.iter().find(|r| (r[0] - 0.05).abs() < 1e-12).expect("0.05 row");
    assert_abs_diff_eq!(row[1], 0.0056, epsilon = 1e-4);
    assert_abs_diff_eq!(row[2], 0.0127, epsilon = 2e-4);
    assert!(rows.iter().all(|r| r[0] > 0.0 && r[0] <= 0.1 + 1e-15));
}

#[test]
fn calibration_figure() {
    let (header, rows) = csv_rows(&ancred(&["figure-data", "calibration"]));
    assert_eq!(header, ["p", "p_i"]);
    let row = rows.iter().find(|r| (r[0] - 0.034).abs() < 1e-12).expect("0.034 row");
    assert_abs_diff_eq!(row[1], 0.134, epsilon = 5e-4);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
}

#[test]
fn null_density_figure_integrates_to_one() {
    let (header, rows) = csv_rows(&ancred(&["figure-data", "null-density"]));
    assert_eq!(header, ["x", "f_p", "f_p_i"]);
    let trapezoid = |col: usize| -> f64 {
        rows.windows(2)
            .map(|w| 0.5 * (w[1][0] - w[0][0]) * (w[0][col] + w[1][col]))
            .sum()
    };
    assert_abs_diff_eq!(trapezoid(2), 1.0, epsilon = 0.01);
    assert_abs_diff_eq!(trapezoid(1), 1.0, epsilon = 1e-12);
}

#[test]
fn null_histograms_figure() {
    let out = ancred(&["figure-data", "null-histograms", "--n", "4000", "--bins", "10"]);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header.len(), 9);
    assert_eq!(rows.len(), 4 * 10);
    for c in [0.001, 0.5, 1.0, 2.0] {
        let count: f64 = rows.iter().filter(|r| r[0] == c).map(|r| r[4]).sum();
        assert_eq!(count, 4000.0);
    }
}

#[test]
fn pe_contours_figure() {
    let out = ancred(&["figure-data", "pe-contours", "--points", "5", "--c-grid", "0.5,2"]);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["c", "p", "p0", "p_e"]);
    assert_eq!(rows.len(), 2 * 25);
    for r in &rows {
        assert!(r[3] > r[1].max(r[2]) && r[3] < 1.0);
    }
}

#[test]
fn figure_json_wraps_columns_and_rows() {
    let env = json(&["figure-data", "calibration", "--points", "10"]);
    assert_eq!(env["results"]["columns"][1], "p_i");
    assert_eq!(env["results"]["rows"].as_array().unwrap().len(), 10);
}
