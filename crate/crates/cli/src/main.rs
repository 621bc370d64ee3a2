//! Command line surface over the nscurves library. Every subcommand
//! prints a key = value table by default and a stable JSON document with
//! --json; degrees and Sha orders stay exact integers in both forms.
//!
//! Exit codes: 0 success, 1 domain error (invalid u, composite p, bad
//! flags, unwritable output), 2 internal cross-check failure (the exact
//! and numeric degree routes disagreeing, a certified enclosure too wide
//! to round, or a theorem-grade prediction contradicted).

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use num_bigint::BigInt;

use nscurves::analytic::{bsd_sha, height_compare, lvalue_rank0, AnalyticError};
use nscurves::arith::{exact_sqrt, factor_u64};
use nscurves::modsym::{modular_degree, ModSymError};
use nscurves::ns::{construct_pair, normalize_u, predict_two_valuation, NSPair, Parity, Provenance, TwoValuation};
use nscurves::survey::{
    run_parity_survey, run_sha_survey, survey_to_json, table_to_csv, SurveyConfig, SurveyError,
    SurveyMode,
};
use nscurves::WeierstrassModel;
use serde_json::{Map, Number, Value};

#[derive(Parser)]
#[command(
    name = "nscurves",
    version,
    about = "Arithmetic of the Neumann-Setzer elliptic curve family",
    after_help = "Set NSCURVES_CACHE_DIR to cache modular symbol spaces between runs."
)]
struct Cli {
    /// Emit a JSON document instead of the table form.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct the curve pair for u and print both models' invariants.
    Curve {
        #[arg(long, allow_hyphen_values = true)]
        u: i64,
    },
    /// Predicted parity and 2-adic valuation of the modular degree.
    Parity {
        #[arg(long, allow_hyphen_values = true)]
        u: i64,
    },
    /// Exact modular degree with the certified numeric cross-check.
    Moddeg {
        #[arg(long, allow_hyphen_values = true, conflicts_with = "p", required_unless_present = "p")]
        u: Option<i64>,
        /// The conductor instead of u; must be u^2 + 64 for some u.
        #[arg(long)]
        p: Option<u64>,
    },
    /// L(E,1) with a certified error bound.
    Lfun {
        #[arg(long, allow_hyphen_values = true)]
        u: i64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
        curve: u8,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Conjectural order of Sha from the BSD quotient.
    Sha {
        #[arg(long, allow_hyphen_values = true)]
        u: i64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
        curve: u8,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// List the admissible positive u up to a bound.
    Sieve {
        #[arg(long = "u-max")]
        u_max: u64,
    },
    /// Compute exact degrees and check them against the predictions.
    VerifyParity {
        #[arg(long = "u-max")]
        u_max: u64,
    },
    /// Sha divisibility survey over u <= u-max, written as CSV (or JSON
    /// with --json) to --out.
    SurveySha {
        #[arg(long = "u-max")]
        u_max: u64,
        #[arg(long)]
        out: PathBuf,
        /// Checkpoint file to append completed ranges to and resume from.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn domain(msg: impl Into<String>) -> Self {
        CliError {
            code: 1,
            msg: msg.into(),
        }
    }

    fn internal(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            msg: msg.into(),
        }
    }
}

impl From<nscurves::NsError> for CliError {
    fn from(e: nscurves::NsError) -> Self {
        CliError::domain(e.to_string())
    }
}

impl From<nscurves::CurveError> for CliError {
    fn from(e: nscurves::CurveError) -> Self {
        CliError::domain(e.to_string())
    }
}

impl From<ModSymError> for CliError {
    fn from(e: ModSymError) -> Self {
        match e {
            ModSymError::DegreeMismatch { .. } | ModSymError::NumericPrecision(_) => {
                CliError::internal(e.to_string())
            }
            other => CliError::domain(other.to_string()),
        }
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::ResidualTooLarge { .. } => CliError::internal(e.to_string()),
            other => CliError::domain(other.to_string()),
        }
    }
}

impl From<SurveyError> for CliError {
    fn from(e: SurveyError) -> Self {
        CliError::domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::domain(e.to_string())
    }
}

/// Exact integer as a JSON number of arbitrary size.
fn big_num(n: &BigInt) -> Value {
    let num: Number = serde_json::from_str(&n.to_string()).expect("integer literal parses");
    Value::Number(num)
}

fn model_json(e: &WeierstrassModel) -> Value {
    Value::Array(
        [&e.a1, &e.a2, &e.a3, &e.a4, &e.a6]
            .iter()
            .map(|a| big_num(a))
            .collect(),
    )
}

fn model_table(e: &WeierstrassModel) -> String {
    format!("[{}, {}, {}, {}, {}]", e.a1, e.a2, e.a3, e.a4, e.a6)
}

/// The pair for a u given in either sign class.
fn pair_for(u: i64) -> Result<NSPair, CliError> {
    let n = normalize_u(&BigInt::from(u))?;
    Ok(construct_pair(&n)?)
}

struct Report {
    lines: Vec<(String, String)>,
    json: Map<String, Value>,
}

impl Report {
    fn new() -> Self {
        Report {
            lines: Vec::new(),
            json: Map::new(),
        }
    }

    fn push(&mut self, key: &str, table: String, json: Value) {
        self.lines.push((key.to_string(), table));
        self.json.insert(key.to_string(), json);
    }

    fn print(self, as_json: bool) {
        if as_json {
            println!(
                "{}",
                serde_json::to_string_pretty(&Value::Object(self.json)).expect("report serializes")
            );
        } else {
            for (k, v) in &self.lines {
                println!("{k} = {v}");
            }
        }
    }
}

/// Normalized parameter echo plus conductor, common to every per-curve
/// command.
fn base_report(pair: &NSPair) -> Report {
    let mut r = Report::new();
    let u = pair.parameter.u();
    let p = BigInt::from(pair.parameter.p().clone());
    r.push("u", u.to_string(), big_num(u));
    r.push("p", p.to_string(), big_num(&p));
    r
}

fn factored(m: u64) -> String {
    let f = factor_u64(m);
    if f.is_empty() {
        return m.to_string();
    }
    let parts: Vec<String> = f
        .iter()
        .map(|&(q, e)| {
            if e == 1 {
                q.to_string()
            } else {
                format!("{q}^{e}")
            }
        })
        .collect();
    format!("{} = {}", m, parts.join(" * "))
}

fn cmd_curve(u: i64, as_json: bool) -> Result<(), CliError> {
    let pair = pair_for(u)?;
    let mut r = base_report(&pair);
    r.push(
        "model0",
        model_table(&pair.e0),
        model_json(&pair.e0),
    );
    r.push(
        "model1",
        model_table(&pair.e1),
        model_json(&pair.e1),
    );
    let i0 = &pair.invariants0;
    let i1 = &pair.invariants1;
    r.push(
        "c4",
        format!("[{}, {}]", i0.c4, i1.c4),
        Value::Array(vec![big_num(&i0.c4), big_num(&i1.c4)]),
    );
    r.push(
        "c6",
        format!("[{}, {}]", i0.c6, i1.c6),
        Value::Array(vec![big_num(&i0.c6), big_num(&i1.c6)]),
    );
    r.push(
        "delta",
        format!("[{}, {}]", i0.delta, i1.delta),
        Value::Array(vec![big_num(&i0.delta), big_num(&i1.delta)]),
    );
    r.print(as_json);
    Ok(())
}

fn cmd_parity(u: i64, as_json: bool) -> Result<(), CliError> {
    let pair = pair_for(u)?;
    let pred = predict_two_valuation(pair.parameter.u())?;
    let mut r = base_report(&pair);
    let parity = match pred.parity {
        Parity::Odd => "odd",
        Parity::Even => "even",
    };
    let val = match pred.two_adic {
        TwoValuation::ExactlyZero => "0",
        TwoValuation::ExactlyOne => "1",
        TwoValuation::AtLeastTwo => ">=2",
    };
    let strength = match pred.provenance {
        Provenance::Theorem => "theorem",
        Provenance::Conjecture => "conjecture",
    };
    r.push("parity", parity.into(), Value::String(parity.into()));
    r.push("two_valuation", val.into(), Value::String(val.into()));
    r.push("strength", strength.into(), Value::String(strength.into()));
    r.print(as_json);
    Ok(())
}

fn u_from_conductor(p: u64) -> Result<i64, CliError> {
    let rem = BigInt::from(p) - BigInt::from(64);
    let u = exact_sqrt(&rem)
        .filter(|u| u > &BigInt::from(0))
        .ok_or_else(|| CliError::domain(format!("{p} is not of the form u^2 + 64")))?;
    i64::try_from(&u).map_err(|_| CliError::domain("conductor out of range"))
}

fn cmd_moddeg(u: Option<i64>, p: Option<u64>, as_json: bool) -> Result<(), CliError> {
    let u = match (u, p) {
        (Some(u), None) => u,
        (None, Some(p)) => u_from_conductor(p)?,
        _ => unreachable!("clap enforces exactly one of --u/--p"),
    };
    let pair = pair_for(u)?;
    let result = modular_degree(&pair)?;
    let mut r = base_report(&pair);
    r.push(
        "degree",
        result.m.to_string(),
        Value::Number(Number::from(result.m)),
    );
    r.push(
        "degree_factored",
        factored(result.m),
        Value::String(factored(result.m)),
    );
    let parity = if result.m % 2 == 1 { "odd" } else { "even" };
    r.push("parity", parity.into(), Value::String(parity.into()));
    if let Some((lo, hi)) = result.numeric {
        r.push(
            "numeric_check",
            format!("[{lo}, {hi}]"),
            serde_json::json!([lo, hi]),
        );
    }
    r.print(as_json);
    Ok(())
}

fn cmd_lfun(u: i64, curve: u8, tol: f64, as_json: bool) -> Result<(), CliError> {
    let pair = pair_for(u)?;
    let e = if curve == 0 { &pair.e0 } else { &pair.e1 };
    let lv = lvalue_rank0(e, tol)?;
    let mut r = base_report(&pair);
    r.push(
        "curve",
        curve.to_string(),
        Value::Number(Number::from(curve)),
    );
    r.push(
        "l_value",
        format!("{}", lv.value.mid_f64()),
        serde_json::json!(lv.value.mid_f64()),
    );
    r.push(
        "l_bounds",
        format!("[{}, {}]", lv.value.lo().to_f64(), lv.value.hi().to_f64()),
        serde_json::json!([lv.value.lo().to_f64(), lv.value.hi().to_f64()]),
    );
    r.push(
        "terms",
        lv.terms.to_string(),
        Value::Number(Number::from(lv.terms)),
    );
    r.push(
        "tail_bound",
        format!("{:e}", lv.tail_bound),
        serde_json::json!(lv.tail_bound),
    );
    r.print(as_json);
    Ok(())
}

fn cmd_sha(u: i64, curve: u8, tol: f64, as_json: bool) -> Result<(), CliError> {
    let pair = pair_for(u)?;
    let bsd = bsd_sha(&pair, curve, tol)?;
    let hc = height_compare(&pair, 96)?;
    let mut r = base_report(&pair);
    r.push(
        "curve",
        curve.to_string(),
        Value::Number(Number::from(curve)),
    );
    r.push(
        "sha",
        bsd.sha.to_string(),
        Value::Number(Number::from(bsd.sha)),
    );
    r.push(
        "square",
        bsd.square.to_string(),
        Value::Bool(bsd.square),
    );
    r.push(
        "residual",
        format!("{:e}", bsd.residual),
        serde_json::json!(bsd.residual),
    );
    r.push(
        "torsion",
        bsd.torsion_order.to_string(),
        Value::Number(Number::from(bsd.torsion_order)),
    );
    r.push(
        "tamagawa",
        bsd.tamagawa_product.to_string(),
        Value::Number(Number::from(bsd.tamagawa_product)),
    );
    r.push(
        "l_value",
        format!("{}", bsd.l_value.value.mid_f64()),
        serde_json::json!(bsd.l_value.value.mid_f64()),
    );
    let omega = if curve == 0 { &hc.omega0 } else { &hc.omega1 };
    r.push(
        "omega",
        format!("{}", omega.mid_f64()),
        serde_json::json!(omega.mid_f64()),
    );
    r.print(as_json);
    Ok(())
}

fn cmd_sieve(u_max: u64, as_json: bool) -> Result<(), CliError> {
    if u_max >= (1 << 31) {
        return Err(CliError::domain("u-max exceeds the sieve range"));
    }
    let us = nscurves::survey::sieve_ns_u(u_max);
    if as_json {
        let mut r = Report::new();
        r.push(
            "u_max",
            u_max.to_string(),
            Value::Number(Number::from(u_max)),
        );
        r.push(
            "count",
            us.len().to_string(),
            Value::Number(Number::from(us.len())),
        );
        r.push(
            "u",
            String::new(),
            Value::Array(us.iter().map(|&u| Value::Number(Number::from(u))).collect()),
        );
        r.print(true);
    } else {
        for u in us {
            println!("{u}");
        }
    }
    Ok(())
}

fn cmd_verify_parity(u_max: u64, as_json: bool) -> Result<(), CliError> {
    let report = run_parity_survey(&SurveyConfig::new(u_max, SurveyMode::Parity))?;
    let theorem_broken: Vec<u64> = report
        .rows
        .iter()
        .filter(|row| Some(&row.parity_predicted) != row.parity_observed.as_ref())
        .map(|row| row.u)
        .collect();
    if as_json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        for row in &report.rows {
            println!(
                "u={} p={} degree={} predicted={} observed={}",
                row.u,
                row.p,
                row.degree.unwrap_or(0),
                row.parity_predicted,
                row.parity_observed.as_deref().unwrap_or("-")
            );
        }
        println!(
            "matches = {}/{}",
            report.matches,
            report.matches + report.mismatches
        );
        println!("conjectural rows = {}", report.conjecture_flagged);
        println!("odd fraction = {:.3}", report.odd_fraction);
        if !report.excluded.is_empty() {
            println!("excluded = {:?}", report.excluded);
        }
    }
    if !theorem_broken.is_empty() {
        return Err(CliError::internal(format!(
            "parity theorem contradicted at u = {theorem_broken:?}"
        )));
    }
    Ok(())
}

fn cmd_survey_sha(
    u_max: u64,
    out: &PathBuf,
    resume: Option<PathBuf>,
    workers: usize,
    as_json: bool,
) -> Result<(), CliError> {
    let mut cfg = SurveyConfig::new(u_max, SurveyMode::Sha);
    cfg.workers = workers;
    cfg.checkpoint_path = resume;
    let result = run_sha_survey(&cfg)?;
    let bytes = if as_json {
        survey_to_json(&result)
    } else {
        table_to_csv(&result.table)
    };
    std::fs::write(out, bytes)?;
    let total = &result.table.total;
    println!(
        "{} curves surveyed up to u = {u_max}; output written to {}",
        total.count,
        out.display()
    );
    if !result.table.excluded.is_empty() {
        println!(
            "{} parameters excluded after failures: {:?}",
            result.table.excluded.len(),
            result.table.excluded
        );
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match cli.cmd {
        Cmd::Curve { u } => cmd_curve(u, cli.json),
        Cmd::Parity { u } => cmd_parity(u, cli.json),
        Cmd::Moddeg { u, p } => cmd_moddeg(u, p, cli.json),
        Cmd::Lfun { u, curve, tol } => cmd_lfun(u, curve, tol, cli.json),
        Cmd::Sha { u, curve, tol } => cmd_sha(u, curve, tol, cli.json),
        Cmd::Sieve { u_max } => cmd_sieve(u_max, cli.json),
        Cmd::VerifyParity { u_max } => cmd_verify_parity(u_max, cli.json),
        Cmd::SurveySha {
            u_max,
            out,
            resume,
            workers,
        } => cmd_survey_sha(u_max, &out, resume, workers, cli.json),
    }
}

fn main() {
    // A panic in the computational core means an internal consistency
    // assertion fired; that is exit code 2, distinct from domain errors.
    let code = match std::panic::catch_unwind(run) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("nscurves: {}", e.msg);
            e.code
        }
        Err(_) => {
            eprintln!("nscurves: internal cross-check failed");
            2
        }
    };
    std::process::exit(code);
}
