//! Command-line front end. `run` parses arguments, dispatches, and renders
//! one report; the binary only forwards its exit code.
//!
//! Exit codes: 0 certificate or affirmative answer, 1 verified negative or
//! refusal with a diagnostic, 2 usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{
    bbs_conclusion, certify_gene, certify_morphism, erdos, scan_ideal_inclusion, scan_support_inclusion, BbsOptions,
    Check, Diagnostic, ErdosReport, MorphismOptions, ProblemInstance,
};
use crate::arith::{FactorConfig, PrimeSet};
use crate::counting::{
    counting_function, geometric_grid, growth_fit, parse_real, unreduced_count, CountingConfig, LatticeZeroSet,
};
use crate::laurent::{stabilizer, LaurentPoly};
use crate::lattice::{rank, IntMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "torusdiv", version, about = "Divisibility certificates for values of Laurent polynomials along torus orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value = "text")]
    output: OutputFormat,
    /// Comma-separated primes replacing the instance's S.
    #[arg(long, global = true, value_delimiter = ',')]
    s_primes: Option<Vec<u64>>,
    /// Digits after the point for floats in text output.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,
    /// Seed for Pollard rho.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct InstanceArg {
    /// Problem instance as JSON.
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ideal and support inclusion for n in 1..=n_max.
    Scan {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value_t = 100)]
        n_max: u64,
    },
    /// Reconstruct a monomial map carrying D1 into D2.
    Certify {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value_t = 50)]
        n_max: u64,
        #[arg(long, default_value_t = 0.8)]
        threshold: f64,
        #[arg(long, default_value_t = 12)]
        replay: u64,
    },
    /// Build the intermediate torus and divisor.
    Gene {
        #[command(flatten)]
        instance: InstanceArg,
    },
    /// Conclude a power relation between the points from support inclusion.
    Bbs {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value_t = 1)]
        n_min: u64,
        #[arg(long, default_value_t = 50)]
        n_max: u64,
        #[arg(long, default_value_t = 1.0)]
        threshold: f64,
        #[arg(long, default_value_t = 6)]
        unity_order: u64,
    },
    /// Prime support of x^n - 1 inside that of y^n - 1.
    Erdos {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: u64,
        #[arg(long, default_value_t = 100)]
        n_max: u64,
        #[arg(long)]
        rho_iterations: Option<u64>,
        #[arg(long)]
        max_bits: Option<u64>,
        #[arg(long)]
        trial_bound: Option<u32>,
    },
    /// Stabilizer of F = 0 as (dimension, invariant factors).
    Stabilizer {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        dim: usize,
    },
    /// Counting functions and growth fits for lattice zero sets.
    Counting {
        /// Zero set as JSON.
        #[arg(long, conflicts_with = "config")]
        zero_set: Option<PathBuf>,
        #[arg(long, value_enum)]
        config: Option<Builder>,
        /// Lattice parameter for `ce`, as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
        /// Slope for `ctex`, a decimal or `a/b`.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = 10.0)]
        r_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        r_max: f64,
        #[arg(long, default_value_t = 13)]
        points: usize,
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Also report n(t) and N(t) at this radius.
        #[arg(long)]
        radius: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Builder {
    Ce,
    Ctex,
}

/// Settings shared by every subcommand, echoed in each report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub instance: Option<String>,
    pub n_max: Option<u64>,
    pub threshold: Option<f64>,
    pub output: OutputFormat,
    pub precision: usize,
    pub seed: u64,
}

impl RunConfig {
    fn validate(&self) -> Result<(), String> {
        if self.n_max == Some(0) {
            return Err("n_max must be at least 1".into());
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t <= 1.0) {
                return Err(format!("threshold {t} outside (0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Certified,
    Refused,
    Affirmative,
    Negative,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Certified | Status::Affirmative => 0,
            Status::Refused | Status::Negative => 1,
        }
    }
}

/// The JSON report. `result` holds the command-specific payload and
/// `verification` every replayed invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub exit_code: i32,
    pub config: RunConfig,
    pub result: Option<Value>,
    pub diagnostic: Option<Diagnostic>,
    pub verification: Vec<Check>,
}

struct Outcome {
    status: Status,
    result: Option<Value>,
    diagnostic: Option<Diagnostic>,
    verification: Vec<Check>,
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("plain data")
}

/// Certificates carry their own verification list; lift it to the report.
fn certificate(mut v: Value) -> (Value, Vec<Check>) {
    let checks = v
        .as_object_mut()
        .and_then(|o| o.remove("verification"))
        .and_then(|c| serde_json::from_value(c).ok())
        .unwrap_or_default();
    (v, checks)
}

fn from_certificate<T: Serialize>(r: Result<T, Diagnostic>) -> Outcome {
    match r {
        Ok(cert) => {
            let (v, checks) = certificate(to_value(cert));
            let status = if checks.iter().all(|c| c.passed) { Status::Certified } else { Status::Refused };
            Outcome {
                status,
                result: Some(v),
                diagnostic: None,
                verification: checks,
            }
        }
        Err(d) => Outcome {
            status: Status::Refused,
            result: None,
            diagnostic: Some(d),
            verification: Vec::new(),
        },
    }
}

fn load_instance(path: &PathBuf, s: &Option<PrimeSet>) -> Result<ProblemInstance, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut inst = ProblemInstance::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(s) = s {
        inst.s = s.clone();
    }
    Ok(inst)
}

fn scan_outcome(inst: &ProblemInstance, n_max: u64) -> Result<Outcome, String> {
    let ideal = scan_ideal_inclusion(inst, n_max).map_err(|e| e.to_string())?;
    let support = scan_support_inclusion(inst, n_max).map_err(|e| e.to_string())?;
    let within = ideal.iter().all(|n| support.binary_search(n).is_ok());
    let checks = vec![Check::new(
        "ideal_hits_within_support_hits",
        within,
        format!("{} ideal, {} support", ideal.len(), support.len()),
    )];
    Ok(Outcome {
        status: if within { Status::Affirmative } else { Status::Negative },
        result: Some(serde_json::json!({
            "n_max": n_max,
            "s_primes": inst.s,
            "ideal_hits": ideal,
            "support_hits": support,
        })),
        diagnostic: None,
        verification: checks,
    })
}

/// Replays the claims of an Erdős report with plain big-integer arithmetic.
fn erdos_checks(r: &ErdosReport) -> Vec<Check> {
    let mut out = vec![Check::new("radical_scan_agrees", r.radical_scan_agrees, format!("n <= {}", r.verified_up_to))];
    if let Some(k) = r.k {
        let ok = BigUint::from(r.y) == Pow::pow(BigUint::from(r.x), k);
        out.push(Check::new("y_is_power_of_x", ok, format!("y = x^{k}")));
    }
    if let Some(v) = &r.violation {
        let ok = v.prime.parse::<BigUint>().is_ok_and(|p| {
            let minus_one = |b: u64| (BigUint::from(b).modpow(&BigUint::from(v.n), &p) + &p - BigUint::one()) % &p;
            minus_one(r.x).is_zero() && !minus_one(r.y).is_zero()
        });
        out.push(Check::new("witness_divides_only_x_side", ok, format!("{} at n = {}", v.prime, v.n)));
    }
    out
}

fn stabilizer_outcome(poly: &str, dim: usize) -> Result<Outcome, String> {
    let f = LaurentPoly::parse(poly, dim).map_err(|e| e.to_string())?;
    let info = stabilizer(&f).map_err(|e| e.to_string())?;
    let supp = f.support();
    let rows: Vec<Vec<BigInt>> = supp[1..]
        .iter()
        .map(|u| u.iter().zip(&supp[0]).map(|(a, b)| BigInt::from(a - b)).collect())
        .collect();
    let r = rank(&IntMatrix::from_rows_with_cols(rows, dim));
    let factors: Vec<String> = info.invariant_factors.iter().map(ToString::to_string).collect();
    let checks = vec![
        Check::new("dimension_is_corank", info.dimension + r == dim, format!("support rank {r}")),
        Check::new("factors_divide_in_chain", info.invariant_factors.windows(2).all(|w| (&w[1] % &w[0]).is_zero()), ""),
    ];
    Ok(Outcome {
        status: Status::Affirmative,
        result: Some(serde_json::json!({
            "poly": f.to_string(),
            "dimension": info.dimension,
            "invariant_factors": factors,
            "trivial": info.is_trivial(),
            "summary": format!("({},[{}])", info.dimension, factors.join(",")),
        })),
        diagnostic: None,
        verification: checks,
    })
}

fn parse_pair(s: &str) -> Result<Complex64, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected re,im but got {s:?}"))?;
    Ok(Complex64::new(parse_real(a).map_err(|e| e.to_string())?, parse_real(b).map_err(|e| e.to_string())?))
}

#[allow(clippy::too_many_arguments)]
fn counting_outcome(
    zero_set: &Option<PathBuf>,
    builder: Option<Builder>,
    tau: &Option<String>,
    alpha: &Option<String>,
    grid: (f64, f64, usize),
    budget: u64,
    radius: Option<f64>,
) -> Result<Outcome, String> {
    let sets: Vec<(String, LatticeZeroSet)> = match (zero_set, builder) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            vec![("Z".into(), LatticeZeroSet::from_json(&text).map_err(|e| e.to_string())?)]
        }
        (None, Some(Builder::Ce)) => {
            let tau = parse_pair(tau.as_deref().ok_or("ce needs --tau")?)?;
            let (a, b) = LatticeZeroSet::ce(tau).map_err(|e| e.to_string())?;
            vec![("f1^*D1".into(), a), ("f2^*D2".into(), b)]
        }
        (None, Some(Builder::Ctex)) => {
            let alpha = parse_real(alpha.as_deref().ok_or("ctex needs --alpha")?).map_err(|e| e.to_string())?;
            let (a, b) = LatticeZeroSet::ctex(alpha).map_err(|e| e.to_string())?;
            vec![("f1^*D1".into(), a), ("f2^*D2".into(), b)]
        }
        (None, None) => return Err("give --zero-set or --config".into()),
    };
    let cfg = CountingConfig { point_budget: budget };
    let radii = geometric_grid(grid.0, grid.1, grid.2).map_err(|e| e.to_string())?;
    let mut fits = Vec::new();
    let mut checks = Vec::new();
    for (name, z) in &sets {
        let fit = growth_fit(z, &radii, &cfg).map_err(|e| e.to_string())?;
        let monotone = fit.values.windows(2).all(|w| w[1] >= w[0]);
        checks.push(Check::new(&format!("{name}_nondecreasing"), monotone, ""));
        let mut entry = serde_json::json!({ "name": name, "zero_set": z.to_wire(), "fit": fit });
        if let Some(t) = radius {
            let n = unreduced_count(z, t, &cfg).map_err(|e| e.to_string())?;
            let big_n = if t > 1.0 { Some(counting_function(z, t, &cfg).map_err(|e| e.to_string())?) } else { None };
            entry["at_radius"] = serde_json::json!({ "t": t, "n": n, "N": big_n });
        }
        fits.push(entry);
    }
    Ok(Outcome {
        status: Status::Affirmative,
        result: Some(serde_json::json!({ "radii": radii, "sets": fits })),
        diagnostic: None,
        verification: checks,
    })
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, String> {
    let s = match &cli.s_primes {
        Some(v) => Some(PrimeSet::new(v.iter().copied()).map_err(|e| e.to_string())?),
        None => None,
    };
    let err = |e: crate::analysis::AnalysisError| e.to_string();
    match &cli.command {
        Command::Scan { instance, n_max } => scan_outcome(&load_instance(&instance.instance, &s)?, *n_max),
        Command::Certify {
            instance,
            n_max,
            threshold,
            replay,
        } => {
            let inst = load_instance(&instance.instance, &s)?;
            let opts = MorphismOptions {
                n_max: *n_max,
                threshold: *threshold,
                replay: *replay,
            };
            Ok(from_certificate(certify_morphism(&inst, &opts).map_err(err)?))
        }
        Command::Gene { instance } => {
            let inst = load_instance(&instance.instance, &s)?;
            Ok(from_certificate(certify_gene(&inst).map_err(err)?))
        }
        Command::Bbs {
            instance,
            n_min,
            n_max,
            threshold,
            unity_order,
        } => {
            let inst = load_instance(&instance.instance, &s)?;
            let opts = BbsOptions {
                n_min: *n_min,
                n_max: *n_max,
                threshold: *threshold,
                unity_order: *unity_order,
            };
            Ok(from_certificate(bbs_conclusion(&inst, &opts).map_err(err)?))
        }
        Command::Erdos {
            x,
            y,
            n_max,
            rho_iterations,
            max_bits,
            trial_bound,
        } => {
            let mut fc = FactorConfig {
                seed: cfg.seed,
                ..FactorConfig::default()
            };
            if let Some(r) = rho_iterations {
                fc.rho_iterations = *r;
            }
            if let Some(b) = max_bits {
                fc.max_bits = *b;
            }
            if let Some(t) = trial_bound {
                fc.trial_bound = *t;
            }
            let report = erdos(*x, *y, *n_max, &fc).map_err(err)?;
            let checks = erdos_checks(&report);
            let status = if report.inclusion_holds() && checks.iter().all(|c| c.passed) {
                Status::Affirmative
            } else {
                Status::Negative
            };
            Ok(Outcome {
                status,
                result: Some(to_value(&report)),
                diagnostic: None,
                verification: checks,
            })
        }
        Command::Stabilizer { poly, dim } => stabilizer_outcome(poly, *dim),
        Command::Counting {
            zero_set,
            config,
            tau,
            alpha,
            r_min,
            r_max,
            points,
            budget,
            radius,
        } => counting_outcome(zero_set, *config, tau, alpha, (*r_min, *r_max, *points), *budget, *radius),
    }
}

fn run_config(cli: &Cli) -> RunConfig {
    let (name, instance, n_max, threshold) = match &cli.command {
        Command::Scan { instance, n_max } => ("scan", Some(&instance.instance), Some(*n_max), None),
        Command::Certify {
            instance,
            n_max,
            threshold,
            ..
        } => ("certify", Some(&instance.instance), Some(*n_max), Some(*threshold)),
        Command::Gene { instance } => ("gene", Some(&instance.instance), None, None),
        Command::Bbs {
            instance,
            n_max,
            threshold,
            ..
        } => ("bbs", Some(&instance.instance), Some(*n_max), Some(*threshold)),
        Command::Erdos { n_max, .. } => ("erdos", None, Some(*n_max), None),
        Command::Stabilizer { .. } => ("stabilizer", None, None, None),
        Command::Counting { .. } => ("counting", None, None, None),
    };
    RunConfig {
        subcommand: name.into(),
        instance: instance.map(|p| p.display().to_string()),
        n_max,
        threshold,
        output: cli.output,
        precision: cli.precision,
        seed: cli.seed,
    }
}

fn is_term(v: &Value) -> bool {
    v.as_object().is_some_and(|o| o.len() == 2 && o.contains_key("exponents") && o.contains_key("coeff"))
}

fn text_value(v: &Value, precision: usize) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format!("{:.*}", precision, n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) if !items.is_empty() && items.iter().all(is_term) => {
            serde_json::from_value::<LaurentPoly>(v.clone()).map_or_else(|_| v.to_string(), |p| p.to_string())
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(|x| text_value(x, precision)).collect();
            format!("[{}]", parts.join(", "))
        }
        Value::Object(map) => {
            let parts: Vec<String> = map.iter().map(|(k, x)| format!("{k}: {}", text_value(x, precision))).collect();
            format!("{{{}}}", parts.join(", "))
        }
        other => other.to_string(),
    }
}

fn render_text(r: &Report, out: &mut dyn Write) -> std::io::Result<()> {
    let precision = r.config.precision;
    writeln!(out, "{}: {}", r.command, serde_json::to_value(r.status).unwrap().as_str().unwrap_or(""))?;
    if let Some(Value::Object(map)) = &r.result {
        for (k, v) in map {
            writeln!(out, "  {k} = {}", text_value(v, precision))?;
        }
    }
    if let Some(d) = &r.diagnostic {
        writeln!(out, "  diagnostic = {d}")?;
    }
    if !r.verification.is_empty() {
        writeln!(out, "verification:")?;
        for c in &r.verification {
            let mark = if c.passed { "pass" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(out, "  {mark} {}", c.name)?;
            } else {
                writeln!(out, "  {mark} {} ({})", c.name, c.detail)?;
            }
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TORUSDIV_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("TORUSDIV_THREADS must be a positive integer, got {v:?}"))?;
    // a pool built earlier in the same process stays in place
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one command line, writing the report to `out` and errors to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return 2;
    }
    let cfg = run_config(&cli);
    if let Err(e) = cfg.validate() {
        let _ = writeln!(err, "error: {e}");
        return 2;
    }
    let outcome = match dispatch(&cli, &cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let report = Report {
        command: cfg.subcommand.clone(),
        status: outcome.status,
        exit_code: outcome.status.exit_code(),
        config: cfg,
        result: outcome.result,
        diagnostic: outcome.diagnostic,
        verification: outcome.verification,
    };
    let written = match report.config.output {
        OutputFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("plain data")),
        OutputFormat::Text => render_text(&report, out),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return 2;
    }
    report.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["torusdiv"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn stabilizer_example() {
        let (code, out, _) = run_str(&["stabilizer", "--poly", "X1^2 - 1", "--dim", "1"]);
        assert_eq!(code, 0);
        assert!(out.contains("summary = (0,[2])"), "{out}");
        assert!(out.contains("pass dimension_is_corank"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&["certify", "--instance", "missing.json"]).0, 2);
        assert_eq!(run_str(&["bogus"]).0, 2);
        assert_eq!(run_str(&["stabilizer", "--poly", "X1^", "--dim", "1"]).0, 2);
        assert_eq!(run_str(&["erdos", "--x", "2", "--y", "4", "--n-max", "0"]).0, 2);
        assert_eq!(run_str(&["--help"]).0, 0);
    }

    #[test]
    fn erdos_codes() {
        let (code, out, _) = run_str(&["erdos", "--x", "2", "--y", "4", "--n-max", "30", "--output", "json"]);
        assert_eq!(code, 0);
        let r: Report = serde_json::from_str(&out).unwrap();
        assert_eq!(r.result.unwrap()["k"], 2);
        let (code, out, _) = run_str(&["erdos", "--x", "2", "--y", "3", "--n-max", "10", "--output", "json"]);
        assert_eq!(code, 1);
        let r: Report = serde_json::from_str(&out).unwrap();
        assert!(r.verification.iter().all(|c| c.passed));
        assert_eq!(r.result.unwrap()["violation"]["prime"], "3");
    }

    #[test]
    fn counting_builders() {
        let (code, out, err) = run_str(&["counting", "--config", "ce", "--tau", "-0.5,1.25", "--r-max", "1000", "--output", "json"]);
        assert_eq!(code, 0, "{err}");
        let r: Report = serde_json::from_str(&out).unwrap();
        let sets = &r.result.unwrap()["sets"];
        assert_eq!(sets[0]["fit"]["rounded_exponent"], 1);
        assert_eq!(sets[1]["fit"]["rounded_exponent"], 2);
        assert_eq!(run_str(&["counting", "--config", "ctex"]).0, 2);
        assert_eq!(run_str(&["counting", "--config", "ctex", "--alpha", "1.4142135623730950488", "--r-max", "50"]).0, 2);
    }
}
