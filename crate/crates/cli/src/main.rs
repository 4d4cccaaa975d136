//! `circunit`: prospecting, field building, distribution sweeps, certification.
//!
//! Exit codes: 0 success, 1 a mathematical check failed, 2 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use circunit::arith::is_prime;
use circunit::certifier::{certify, CertifyOptions, Certificate, FailureReport, Outcome};
use circunit::cyclotomic::{distribution_sweep, DEFAULT_CONDUCTOR_CAP};
use circunit::fields::build_counterexample_field;
use circunit::prospector::prospect;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "circunit", version, about = "Circular units and Λ-freeness: search, build, verify, certify")]
struct Cli {
    /// TOML file with defaults for any numeric option; command-line flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for good (p+1)-tuples of primes below a bound
    Prospect(ProspectArgs),
    /// Build the (Z/p)^2 field of a tuple and check its conditions
    BuildField(FieldArgs),
    /// Check the distribution relations for all r | s with 2 < r < s <= max-s
    VerifyDist(DistArgs),
    /// Run the non-freeness chain and write a certificate
    Certify(CertifyArgs),
    /// Summarize a certificate or failure report
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct ProspectArgs {
    /// odd prime [default: 3]
    #[arg(long)]
    p: Option<u64>,
    /// all tuple entries lie below this bound [default: 20000]
    #[arg(long)]
    bound: Option<u64>,
    /// stop after this many tuples [default: 1]
    #[arg(long)]
    max_results: Option<usize>,
    /// write JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FieldArgs {
    /// odd prime [default: 3]
    #[arg(long)]
    p: Option<u64>,
    /// comma-separated primes, e.g. 139,199,661,1303
    #[arg(long, value_delimiter = ',', required = true)]
    tuple: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DistArgs {
    /// largest s of the sweep [default: 120]
    #[arg(long)]
    max_s: Option<u64>,
    /// conductor cap [default: 512]
    #[arg(long)]
    cap: Option<u64>,
    /// perturb every left side (negative control)
    #[arg(long, hide = true)]
    inject_corruption: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// odd prime [default: 3]
    #[arg(long)]
    p: Option<u64>,
    /// comma-separated tuple of p+1 primes
    #[arg(long, value_delimiter = ',', conflicts_with = "auto")]
    tuple: Option<Vec<u64>>,
    /// take the first tuple found below --bound
    #[arg(long)]
    auto: bool,
    /// search bound for --auto [default: 20000]
    #[arg(long)]
    bound: Option<u64>,
    /// p-adic precision [default: 8]
    #[arg(long)]
    k: Option<u32>,
    /// T-adic truncation before the division by T [default: 16]
    #[arg(long)]
    d: Option<usize>,
    /// tower levels 0..=levels for the descent experiment, 0 to skip [default: 3]
    #[arg(long)]
    levels: Option<u32>,
    /// coset generator lifts tried per line, 0 to skip [default: all]
    #[arg(long)]
    basis_lifts: Option<usize>,
    /// certificate path [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// print the plan without computing
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// certificate or failure report
    path: PathBuf,
}

/// Optional defaults read from `--config`.
#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    p: Option<u64>,
    bound: Option<u64>,
    max_results: Option<usize>,
    max_s: Option<u64>,
    cap: Option<u64>,
    k: Option<u32>,
    d: Option<usize>,
    levels: Option<u32>,
    basis_lifts: Option<usize>,
    tuple: Option<Vec<u64>>,
}

enum Failure {
    /// a mathematical check failed
    Math(String),
    Usage(String),
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn math(e: circunit::Error) -> Failure {
    match e {
        circunit::Error::NotOddPrime(p) => usage(format!("p = {p} must be an odd prime")),
        e => Failure::Math(e.to_string()),
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))
}

fn odd_prime(p: u64) -> Result<u64, Failure> {
    if p == 2 || !is_prime(p) {
        return Err(usage(format!("p = {p} must be an odd prime")));
    }
    Ok(p)
}

fn emit(text: &str, out: Option<&Path>) -> CmdResult {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("plain data") + "\n"
}

fn run_prospect(a: ProspectArgs, cfg: &FileConfig) -> CmdResult {
    let p = odd_prime(a.p.or(cfg.p).unwrap_or(3))?;
    let bound = a.bound.or(cfg.bound).unwrap_or(20_000);
    let max = a.max_results.or(cfg.max_results).unwrap_or(1);
    let found = prospect(p, bound, max).map_err(math)?;
    emit(&pretty(&found), a.out.as_deref())
}

fn run_build_field(a: FieldArgs, cfg: &FileConfig) -> CmdResult {
    let p = odd_prime(a.p.or(cfg.p).unwrap_or(3))?;
    let field = build_counterexample_field(&a.tuple, p).map_err(math)?;
    field.verify().map_err(math)?;
    let report = json!({
        "p": p,
        "tuple": field.primes,
        "conductor": field.field.conductor(),
        "degree": field.field.degree(),
        "field": field.field,
        "line_vectors": field.vectors,
        "subfields": field.subfields.iter().zip(&field.primes).map(|(s, &l)| json!({
            "unramified_prime": l,
            "conductor": s.conductor(),
            "degree": s.degree(),
            "field": s,
        })).collect::<Vec<_>>(),
        "conditions": "verified",
    });
    emit(&pretty(&report), a.out.as_deref())
}

fn run_verify_dist(a: DistArgs, cfg: &FileConfig) -> CmdResult {
    let max_s = a.max_s.or(cfg.max_s).unwrap_or(120);
    let cap = a.cap.or(cfg.cap).unwrap_or(DEFAULT_CONDUCTOR_CAP);
    if max_s < 4 {
        return Err(usage("--max-s must be at least 4"));
    }
    let cases = distribution_sweep(max_s, cap, a.inject_corruption).map_err(|e| match e {
        circunit::Error::ModulusTooLarge { .. } => usage(e.to_string()),
        e => math(e),
    })?;
    let failures: Vec<_> = cases.iter().filter(|c| !c.holds).collect();
    let report = json!({
        "max_s": max_s,
        "pairs": cases.len(),
        "failures": failures,
        "verdict": if failures.is_empty() { "pass" } else { "fail" },
    });
    emit(&pretty(&report), a.out.as_deref())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Math(format!("{} of {} distribution relations failed", failures.len(), cases.len())))
    }
}

fn run_certify(a: CertifyArgs, cfg: &FileConfig) -> CmdResult {
    let p = odd_prime(a.p.or(cfg.p).unwrap_or(3))?;
    let opts = CertifyOptions {
        k: a.k.or(cfg.k).unwrap_or(circunit::padic::DEFAULT_PRECISION),
        d: a.d.or(cfg.d).unwrap_or(16),
        levels: a.levels.or(cfg.levels).unwrap_or(3),
        basis_lifts: a.basis_lifts.or(cfg.basis_lifts),
        corrupt_unit: None,
    };
    if opts.k == 0 || p.checked_pow(opts.k).is_none_or(|q| q > 1 << 62) {
        return Err(usage(format!("k = {} is out of range for p = {p}", opts.k)));
    }
    if opts.d < 3 {
        return Err(usage("--d must be at least 3"));
    }
    let bound = a.bound.or(cfg.bound).unwrap_or(20_000);
    let tuple_source = match (a.tuple, a.auto) {
        (Some(t), _) => Some(t),
        (None, true) => None,
        (None, false) => Some(cfg.tuple.clone().ok_or_else(|| usage("give --tuple or --auto"))?),
    };
    if a.dry_run {
        let plan = json!({
            "p": p,
            "tuple": tuple_source.as_ref().map_or(json!(format!("first good tuple below {bound}")), |t| json!(t)),
            "k": opts.k,
            "d": opts.d,
            "working_truncation": opts.d - 1,
            "tower_levels": opts.levels,
            "basis_lifts_per_line": opts.basis_lifts.map_or(json!("all"), |n| json!(n)),
            "steps": [
                "field_conditions", "presentation", "formal_identity", "derive_R3_R4", "sfree_basis",
                "Q_nonzero", "torsion_order_p", "not_free_local", "basis_choice_invariance", "descent_tower"
            ],
            "out": a.out.as_ref().map(|p| p.display().to_string()),
        });
        print!("{}", pretty(&plan));
        return Ok(());
    }
    let tuple = match tuple_source {
        Some(t) => t,
        None => prospect(p, bound, 1)
            .map_err(math)?
            .into_iter()
            .next()
            .ok_or_else(|| Failure::Math(format!("no good tuple below {bound}")))?
            .primes,
    };
    let outcome = certify(&tuple, p, &opts).map_err(math)?;
    emit(&outcome.to_json(), a.out.as_deref())?;
    match outcome {
        Outcome::Certified(_) => Ok(()),
        Outcome::Failed(f) => Err(Failure::Math(format!("check {} failed: {}", f.first_failed, f.reason))),
    }
}

fn run_report(a: ReportArgs) -> CmdResult {
    let text = std::fs::read_to_string(&a.path).map_err(|e| usage(format!("cannot read {}: {e}", a.path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| usage(format!("not JSON: {e}")))?;
    if value.get("status").is_some() {
        let f: FailureReport = serde_json::from_value(value).map_err(|e| usage(format!("not a failure report: {e}")))?;
        println!("FAILED  p={} tuple={:?} k={} d={}", f.p, f.tuple, f.k, f.d);
        for c in &f.checks {
            println!("  {:<24} {}", c.name, if c.verdict { "pass" } else { "FAIL" });
        }
        println!("first failed check: {} ({})", f.first_failed, f.reason);
        return Err(Failure::Math(format!("certificate records a failure at {}", f.first_failed)));
    }
    let c: Certificate = serde_json::from_value(value).map_err(|e| usage(format!("not a certificate: {e}")))?;
    println!("{}  p={} tuple={:?} k={} d={}", c.schema, c.p, c.tuple, c.k, c.d);
    for check in &c.checks {
        let d = check.precision.d.map_or("-".to_string(), |d| d.to_string());
        println!("  {:<24} {}  (k={}, d={}; {})", check.name, if check.verdict { "pass" } else { "FAIL" }, check.precision.k, d, check.soundness);
    }
    println!("verdict: {}", c.verdict);
    if c.checks.iter().all(|c| c.verdict) {
        Ok(())
    } else {
        Err(Failure::Math("certificate contains a failed check".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = load_config(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::Prospect(a) => run_prospect(a, &cfg),
        Command::BuildField(a) => run_build_field(a, &cfg),
        Command::VerifyDist(a) => run_verify_dist(a, &cfg),
        Command::Certify(a) => run_certify(a, &cfg),
        Command::Report(a) => run_report(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Math(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
