use std::fs;
use std::io::Write;

use num_rational::BigRational;
use serde_json::json;

use distill_core::families::{projector_set, verify_pt_relations, FamilyParams, FamilyRegistry};
use distill_core::pq::{n_copy_pt_coeffs, DEFAULT_DENSE_BUDGET};
use distill_core::protocol::{analytic_expected_copies, expected_copies, simulate_run, ProtocolConfig, RunStats};
use distill_core::rational::{format_rational, int, pow, to_f64};
use distill_core::tensor::Party;
use distill_core::witness::{
    epsilon_threshold, evaluate_witness, n_copy_bound, BoundParams, DenseCut, SearchOptions, SearchRegistry,
};
use distill_core::Error;

use crate::report::CommandReport;
use crate::{Failure, SimulateArgs, WitnessArgs};

const IDENTITY_TOL: f64 = 1e-12;

pub fn identities(d: usize) -> Result<CommandReport, Failure> {
    if !(2..=6).contains(&d) {
        return Err(Failure::usage(format!("--d must be between 2 and 6, got {d}")));
    }
    let mut checks = verify_pt_relations(d)?;
    checks.extend(projector_set(d)?.invariant_report()?);
    let mut report = CommandReport::new("identities").param("d", d);
    for check in &checks.checks {
        report.row(
            &check.name,
            format!("{:.2e} (tol {:.0e}) {}", check.deviation, check.tolerance, if check.pass { "ok" } else { "FAIL" }),
        );
    }
    report.pass = Some(checks.passed() && checks.max_deviation() <= IDENTITY_TOL);
    report.results = json!({
        "checks": checks.checks,
        "max_deviation": checks.max_deviation(),
        "tolerance": IDENTITY_TOL,
    });
    Ok(report)
}

pub fn coeffs(d: usize, eps: BigRational, n: u32, max_terms: usize) -> Result<CommandReport, Failure> {
    let map = n_copy_pt_coeffs(d, &eps, n, max_terms)?;
    let check = map.check()?;
    let entries = map.entries();
    let zero_words = map.alpha.iter().filter(|a| **a == int(0)).count();
    let ml = distill_core::pq::mu_lambda(d, &eps)?;

    let mut report = CommandReport::new("coeffs")
        .param("d", d)
        .param("eps", format_rational(&eps))
        .param("n", n)
        .param("max_terms", max_terms);
    report.row("words", entries.len());
    report.row("mu^n", format_rational(&pow(&ml.mu, n)));
    report.row("lambda^n", format_rational(&pow(&ml.lambda, n)));
    report.row("eps*mu^(n-1)", &check.bound);
    report.row("corners exact", check.corners_hold());
    report.row("alpha(x) >= -eps*mu^(n-1)", check.lower_bound_holds());
    report.row(
        "|alpha(x)| <= eps*mu^(n-1)",
        match &check.first_abs_violation {
            None => "holds".to_string(),
            Some((x, v)) => format!("{} violations, e.g. alpha({x}) = {v}", check.abs_bound_violations),
        },
    );
    report.row("zero coefficients", zero_words);
    report.pass = Some(check.lower_bound_holds());
    report.results = json!({
        "exact": true,
        "mu_n": format_rational(&pow(&ml.mu, n)),
        "lambda_n": format_rational(&pow(&ml.lambda, n)),
        "bound": check.bound,
        "checks": {
            "mu_corner": check.mu_corner,
            "lambda_corner": check.lambda_corner,
            "lower_bound": {
                "holds": check.lower_bound_holds(),
                "violations": check.lower_bound_violations,
                "first": check.first_lower_violation,
            },
            "two_sided_bound": {
                "holds": check.abs_bound_holds(),
                "violations": check.abs_bound_violations,
                "first": check.first_abs_violation,
            },
        },
        "zero_coefficients": zero_words,
        "coefficients": entries,
    });
    Ok(report)
}

/// Root of the single-copy bound, `2d(d−2)² / (4d²(d−1) − (d−2)²)`.
fn single_copy_threshold(d: usize) -> BigRational {
    let d = int(d as i64);
    let gap = &d - int(2);
    let numerator = int(2) * &d * &gap * &gap;
    let denominator = int(4) * &d * &d * (&d - int(1)) - &gap * &gap;
    numerator / denominator
}

pub fn epsilon(d: usize, n: u32, precision: BigRational) -> Result<CommandReport, Failure> {
    let threshold = epsilon_threshold(d, n, &precision)?;
    let bound = |eps: &BigRational| n_copy_bound(&BoundParams::new(d, n, eps.clone())?);
    let above = &threshold + &precision;
    let bracketed = bound(&threshold)? > int(0) && bound(&above)? <= int(0);

    let mut report = CommandReport::new("epsilon")
        .param("d", d)
        .param("n", n)
        .param("precision", format_rational(&precision));
    report.row("eps*", format!("{:.12} ({})", to_f64(&threshold), format_rational(&threshold)));
    report.row("sign change bracketed", bracketed);

    let mut samples = Vec::new();
    for eps in [int(0), &threshold / int(2), threshold.clone(), above.clone(), &threshold * int(2)] {
        let b = bound(&eps)?;
        report.row(format!("B(eps={:.10})", to_f64(&eps)), format!("{:.6e}", to_f64(&b)));
        samples.push(json!({
            "eps": format_rational(&eps),
            "bound": format_rational(&b),
            "bound_f64": to_f64(&b),
        }));
    }

    let mut pass = bracketed;
    let mut exact = serde_json::Value::Null;
    if n == 1 {
        let root = single_copy_threshold(d);
        let gap = num_traits::Signed::abs(&(&threshold - &root));
        let matches = gap <= precision;
        report.row("exact root", format_rational(&root));
        report.row("matches exact root", matches);
        pass &= matches && bound(&root)? == int(0);
        exact = json!({
            "root": format_rational(&root),
            "gap": to_f64(&gap),
            "within_precision": matches,
        });
    }
    report.pass = Some(pass);
    report.results = json!({
        "epsilon_star": format_rational(&threshold),
        "epsilon_star_f64": to_f64(&threshold),
        "tolerance": format_rational(&precision),
        "bracketed": bracketed,
        "samples": samples,
        "exact_single_copy": exact,
    });
    Ok(report)
}

fn draw_seed() -> u64 {
    let seed = rand::random::<u64>();
    eprintln!("seed: {seed}");
    seed
}

pub fn witness(args: WitnessArgs) -> Result<CommandReport, Failure> {
    let families = FamilyRegistry::default();
    let family = families.get(&args.family)?;
    let strategies = SearchRegistry::default();
    let strategy = strategies.get(&args.method)?;
    let params = FamilyParams {
        d: args.d,
        alpha: args.alpha,
        epsilon: args.eps.clone(),
    };
    let dimension = family.dimension(&params);
    if dimension > DEFAULT_DENSE_BUDGET {
        return Err(Error::DenseBudget {
            budget: DEFAULT_DENSE_BUDGET,
            dimension,
        }
        .into());
    }
    let seed = args.seed.unwrap_or_else(draw_seed);
    let state = family.build(&params)?;
    let transposed = state.partial_transpose(Party::Alice);
    if let Some(path) = &args.dump_operator {
        let text = serde_json::to_string(&transposed.to_dump()).expect("serializable dump");
        fs::write(path, text).map_err(|e| Failure::io("writing operator dump", e))?;
    }
    let cut = DenseCut::by_party(&transposed)?;
    let opts = SearchOptions {
        restarts: args.restarts,
        max_iters: args.max_iters,
        seed,
        ..SearchOptions::default()
    };
    let result = strategy.search(&cut, &opts)?;
    let record = result.record();
    let verified = match result.certificate() {
        Some(vector) => Some(evaluate_witness(&state, vector, Party::Alice)?),
        None => None,
    };

    let mut report = CommandReport::new("witness")
        .param("family", family.name())
        .param("d", args.d)
        .param("alpha", args.alpha)
        .param("eps", args.eps.as_ref().map(format_rational))
        .param("restarts", args.restarts)
        .param("method", strategy.name())
        .param("max_iters", args.max_iters);
    report.seed = Some(seed);
    report.row("family", family.description());
    report.row("best value", format!("{:.12}", result.best_value));
    report.row(
        "certificate",
        match verified {
            Some(v) => format!("found, re-evaluated value {v:.12}"),
            None => "no certificate found".to_string(),
        },
    );
    report.row("converged", result.converged);
    report.results = json!({
        "normalization": "unit vector",
        "best_value": result.best_value,
        "certificate_found": verified.is_some(),
        "verified_value": verified,
        "witness": record,
        "restart_values": result.restart_values,
    });
    Ok(report)
}

fn protocol_config(args: &SimulateArgs) -> Result<ProtocolConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("reading {}: {e}", path.display())))?;
            serde_json::from_str::<ProtocolConfig>(&text)
                .map_err(|e| Failure::usage(format!("parsing {}: {e}", path.display())))?
        }
        None => {
            let d = args.d.ok_or_else(|| Failure::usage("--d is required without --config"))?;
            let epsilon = args.eps.clone().ok_or_else(|| Failure::usage("--eps is required without --config"))?;
            ProtocolConfig {
                d,
                epsilon,
                target: int(3),
                master_seed: 0,
                max_rounds: 1_000_000,
                record_trajectory: true,
            }
        }
    };
    if let Some(d) = args.d {
        config.d = d;
    }
    if let Some(eps) = &args.eps {
        config.epsilon = eps.clone();
    }
    if let Some(target) = &args.target {
        config.target = target.clone();
    }
    if let Some(rounds) = args.max_rounds {
        config.max_rounds = rounds;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    config.validate()?;
    if args.seed.is_none() && args.config.is_none() {
        config.master_seed = draw_seed();
    }
    Ok(config)
}

fn write_runs(path: &std::path::Path, runs: &[RunStats]) -> Result<(), Failure> {
    let mut file = std::io::BufWriter::new(fs::File::create(path).map_err(|e| Failure::io("creating runs file", e))?);
    for run in runs {
        let line = serde_json::to_string(run).expect("serializable run");
        writeln!(file, "{line}").map_err(|e| Failure::io("writing runs file", e))?;
    }
    file.flush().map_err(|e| Failure::io("writing runs file", e))
}

pub fn simulate(args: SimulateArgs) -> Result<CommandReport, Failure> {
    if args.trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let config = protocol_config(&args)?;
    let k = distill_core::protocol::k_threshold(config.d, &config.epsilon, &config.target)?;
    let analytic = analytic_expected_copies(&config)?;

    let mut report = CommandReport::new("simulate")
        .param("config", &config)
        .param("trials", args.trials)
        .param("rng", "chacha20, stream = run index");
    report.seed = Some(config.master_seed);
    report.row("k needed", k);
    report.row("expected copies (closed form)", format!("{analytic:.6e}"));

    let (results, runs) = if args.trials == 1 {
        let run = simulate_run(&config, 0)?;
        report.row("rounds", run.rounds);
        report.row("copies consumed", run.copies_consumed);
        report.row("final alpha", run.final_alpha);
        match run.final_witness_value {
            Some(v) => report.row("final witness value", format!("{v:.12}")),
            None => report.row("final witness value", "unterminated"),
        }
        let results = json!({
            "k_needed": k,
            "expected_copies_closed_form": analytic,
            "terminated": run.terminated,
            "run": run,
        });
        (results, vec![run])
    } else {
        let (stats, runs) = expected_copies(&config, args.trials)?;
        let certified = runs
            .iter()
            .filter(|r| r.final_witness_value.is_some_and(|v| v < 0.0))
            .count();
        report.row("terminated", format!("{}/{}", stats.terminated, stats.trials));
        report.row("certified", certified);
        report.row("mean copies", format!("{:.6} +/- {:.6}", stats.mean, stats.standard_error));
        let results = json!({
            "k_needed": k,
            "statistics": stats,
            "certified": certified,
        });
        (results, runs)
    };
    let unterminated = runs.iter().filter(|r| !r.terminated).count();
    if unterminated > 0 {
        eprintln!(
            "warning: {unterminated} run(s) hit max_rounds = {} before {k} consecutive successes",
            config.max_rounds
        );
    }
    if let Some(path) = &args.runs {
        write_runs(path, &runs)?;
    }
    report.results = results;
    Ok(report)
}
