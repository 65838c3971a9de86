use std::process::{Command, Output};

use serde_json::Value;

fn distill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distill"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(output: &Output) -> Value {
    let text = String::from_utf8_lossy(&output.stdout);
    let value: Value = serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("bad json ({e}): {text}"));
    assert_eq!(value["schema"], 1);
    value
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn rational(s: &str) -> f64 {
    match s.split_once('/') {
        Some((p, q)) => p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap(),
        None => s.parse().unwrap(),
    }
}

#[test]
fn identities_pass_and_reject_small_d() {
    for d in ["3", "5"] {
        let out = distill(&["identities", "--d", d]);
        assert_eq!(code(&out), 0);
        let r = report(&out);
        assert_eq!(r["pass"], true);
        assert!(r["results"]["max_deviation"].as_f64().unwrap() <= 1e-12);
    }
    assert_eq!(code(&distill(&["identities", "--d", "1"])), 64);
}

#[test]
fn coefficient_corners() {
    let out = distill(&["coeffs", "--d", "3", "--eps", "1", "--n", "1"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    let coeffs = r["results"]["coefficients"].as_array().unwrap();
    let find = |x: &str| {
        let e = coeffs.iter().find(|e| e["x"] == x).unwrap();
        format!("{}/{}", e["num"].as_str().unwrap(), e["den"].as_str().unwrap())
    };
    assert_eq!(find("00"), "26/1");
    assert_eq!(find("11"), "7/2");
    assert_eq!(find("01"), "-1/1");
}

#[test]
fn two_copy_coefficients_pass() {
    let out = distill(&["coeffs", "--d", "3", "--eps", "1/10", "--n", "2"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["pass"], true);
    assert_eq!(r["results"]["coefficients"].as_array().unwrap().len(), 16);
    assert_eq!(r["results"]["checks"]["lower_bound"]["holds"], true);
}

#[test]
fn zero_epsilon_kills_mixed_pairs() {
    let out = distill(&["coeffs", "--d", "3", "--eps", "0", "--n", "3"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    for entry in r["results"]["coefficients"].as_array().unwrap() {
        let x = entry["x"].as_str().unwrap().as_bytes();
        let mixed = x.chunks(2).any(|pair| pair[0] != pair[1]);
        if mixed {
            assert_eq!(entry["num"], "0", "word {entry}");
        }
    }
}

#[test]
fn coefficient_budget_exits_two() {
    let out = distill(&["coeffs", "--d", "3", "--eps", "1", "--n", "3", "--max-terms", "16"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn decimal_rationals_are_usage_errors() {
    assert_eq!(code(&distill(&["coeffs", "--d", "3", "--eps", "0.1", "--n", "1"])), 64);
}

#[test]
fn epsilon_threshold_single_and_two_copies() {
    let one = report(&distill(&["epsilon", "--d", "3", "--n", "1"]));
    assert_eq!(one["pass"], true);
    let star = one["results"]["epsilon_star_f64"].as_f64().unwrap();
    assert!((star - 6.0 / 71.0).abs() < 1e-6);
    assert_eq!(one["results"]["exact_single_copy"]["root"], "6/71");
    let exact = rational(one["results"]["epsilon_star"].as_str().unwrap());
    assert!((exact - star).abs() < 1e-12);

    let two = report(&distill(&["epsilon", "--d", "3", "--n", "2"]));
    assert_eq!(two["pass"], true);
    assert!(two["results"]["epsilon_star_f64"].as_f64().unwrap() < star);
}

#[test]
fn werner_witnesses() {
    let out = distill(&["witness", "werner", "--d", "3", "--alpha", "4", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert!(r["results"]["best_value"].as_f64().unwrap() <= -0.25 + 1e-6);
    assert_eq!(r["results"]["certificate_found"], true);
    assert!(r["results"]["witness"]["certificate"].is_object());
    assert_eq!(r["seed"], 5);

    let out = distill(&["witness", "werner", "--d", "3", "--alpha", "2", "--restarts", "100", "--seed", "5"]);
    let r = report(&out);
    assert!(r["results"]["best_value"].as_f64().unwrap() >= -1e-6);
    assert_eq!(r["results"]["certificate_found"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no certificate found"));
}

#[test]
fn alpha_state_witness_reaches_normalised_canonical_value() {
    let out = distill(&["witness", "alpha-state", "--d", "3", "--alpha", "5", "--restarts", "2", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["results"]["normalization"], "unit vector");
    assert!(r["results"]["best_value"].as_f64().unwrap() <= -0.5 + 1e-6);
}

#[test]
fn witness_errors() {
    assert_eq!(code(&distill(&["witness", "rho", "--d", "10", "--eps", "1", "--seed", "1"])), 2);
    assert_eq!(code(&distill(&["witness", "nope", "--d", "3", "--seed", "1"])), 64);
    assert_eq!(code(&distill(&["witness", "werner", "--d", "3", "--seed", "1"])), 64);
    assert_eq!(
        code(&distill(&["witness", "werner", "--d", "3", "--alpha", "4", "--method", "nope", "--seed", "1"])),
        64
    );
}

#[test]
fn operator_dump_is_written() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("werner_dump.json");
    let out = distill(&[
        "witness",
        "werner",
        "--d",
        "3",
        "--alpha",
        "4",
        "--restarts",
        "2",
        "--seed",
        "1",
        "--dump-operator",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let dump: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(dump["dim"], 9);
    assert_eq!(dump["entries"].as_array().unwrap().len(), 81);
}

#[test]
fn simulate_terminates_and_certifies() {
    let out = distill(&["simulate", "--d", "3", "--eps", "1", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["results"]["k_needed"], 1);
    let run = &r["results"]["run"];
    assert_eq!(run["terminated"], true);
    assert_eq!(run["final_alpha"], 3.125);
    assert!(run["final_witness_value"].as_f64().unwrap() < 0.0);
    assert_eq!(run["trajectory"].as_array().unwrap().len() as u64, run["rounds"].as_u64().unwrap());
}

#[test]
fn simulate_is_deterministic_given_seed() {
    let args = ["simulate", "--d", "3", "--eps", "1", "--seed", "11", "--trials", "50"];
    let a = distill(&args);
    let b = distill(&args);
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    let stats = &r["results"]["statistics"];
    assert_eq!(stats["terminated"], 50);
    assert!(stats["standard_error"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_rejects_zero_epsilon() {
    assert_eq!(code(&distill(&["simulate", "--d", "3", "--eps", "0"])), 64);
    assert_eq!(code(&distill(&["simulate", "--d", "2", "--eps", "1"])), 64);
}

#[test]
fn unterminated_runs_warn_but_succeed() {
    let out = distill(&[
        "simulate", "--d", "3", "--eps", "1/10", "--trials", "20", "--max-rounds", "500", "--seed", "3",
    ]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let r = report(&out);
    assert_eq!(r["results"]["k_needed"], 16);
    assert_eq!(r["results"]["statistics"]["terminated"], 0);
}

#[test]
fn omitted_seed_is_drawn_and_printed() {
    let out = distill(&["simulate", "--d", "3", "--eps", "1"]);
    assert_eq!(code(&out), 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let r = report(&out);
    let seed = r["seed"].as_u64().unwrap();
    assert!(stderr.contains(&format!("seed: {seed}")));
}

#[test]
fn config_file_and_run_lines() {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    let config = dir.join("protocol.json");
    let runs = dir.join("runs.jsonl");
    std::fs::write(&config, r#"{"d": 3, "epsilon": "1", "master_seed": 9}"#).unwrap();
    let out = distill(&[
        "--workers",
        "2",
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--trials",
        "10",
        "--runs",
        runs.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["seed"], 9);
    let lines: Vec<Value> = std::fs::read_to_string(&runs)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 10);
    for (i, line) in lines.iter().enumerate() {
        assert_eq!(line["run"], i);
        let copies = line["copies_consumed"].as_u64().unwrap();
        let rounds = line["rounds"].as_u64().unwrap();
        let restarts = line["restarts"].as_u64().unwrap();
        assert_eq!(copies, 1 + rounds + restarts);
    }
}

#[test]
fn reports_round_trip() {
    let out = distill(&["epsilon", "--d", "4", "--n", "1"]);
    let first = report(&out);
    let again: Value = serde_json::from_str(&serde_json::to_string(&first).unwrap()).unwrap();
    assert_eq!(first, again);
}

#[test]
fn help_and_usage_codes() {
    assert_eq!(code(&distill(&["--help"])), 0);
    assert_eq!(code(&distill(&["--version"])), 0);
    assert_eq!(code(&distill(&["bogus"])), 64);
    assert_eq!(code(&distill(&["identities"])), 64);
}
