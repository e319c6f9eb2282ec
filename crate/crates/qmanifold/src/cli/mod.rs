//! Command-line jobs: argument parsing, input resolution, dispatch to the
//! library pipelines and artifact writing.
//!
//! Every flag can also be set through an environment variable named
//! `QMANIFOLD_<FLAG>`. Numeric defaults: seed 7, `--K` 1000, `--ap` 2,
//! cover samples 100000, verify-all cover samples 20000.

pub mod fixtures;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{parse_poly, parse_tuple, rat, AlgebraError, ParseError, Poly, QuadTuple, Rational};
use crate::covering::{cover_sublevel, CoveringConfig, CoveringError};
use crate::exponents::{
    conjectured_wellcurved, critical_p_good, critical_p_maxcodim, critical_p_paraboloid, dec_exp_codim2_slice,
    dec_exp_paraboloid_slice, tomas_stein_wellcurved, verify_with_table, CriticalP, DecSliceFn, ExponentError,
};
use crate::invariants::{
    d_table, d_table_csv, good_weak_condition, is_good, is_well_curved, x_invariant, x_table, x_table_csv,
    GoodManifoldSpec, InvariantError, XConfig, XTable,
};
use crate::pencil::{RankConfig, RankStatus};
use crate::semialg::Confidence;

pub use verify::{verify_all, Check};

pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Covering(#[from] CoveringError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Paraboloid,
    Good,
    Maxcodim,
    WellCurved,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// 𝔡 table of a tuple.
    DTable,
    /// X table of a tuple for one `k`, or one entry with `--m`.
    XTable,
    /// Critical exponent of a family; with `--input --k --p`, checks both
    /// exponent conditions against the computed X table.
    Exponents {
        #[arg(long, value_enum, env = "QMANIFOLD_FAMILY")]
        family: Family,
        #[arg(long, env = "QMANIFOLD_D")]
        d: Option<usize>,
    },
    /// Good-manifold and well-curvedness predicates of a tuple.
    Classify,
    /// Covering of the sublevel set `{|P| < 1/K}` in the unit cube.
    Cover {
        /// Polynomial file or fixture, `d=<int>; <polynomial>`.
        #[arg(long, env = "QMANIFOLD_POLY")]
        poly: String,
        #[arg(long = "K", default_value_t = 1000.0, env = "QMANIFOLD_SCALE")]
        scale: f64,
        #[arg(long, default_value_t = 2.0, env = "QMANIFOLD_AP")]
        ap: f64,
    },
    /// Fast pass over the shipped fixtures.
    VerifyAll,
}

/// One invocation.
#[derive(Clone, Debug, Parser)]
#[command(
    name = "qmanifold",
    version,
    about = "Invariants and restriction exponents of quadratic manifolds"
)]
pub struct JobConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Tuple file, fixture name, or inline text `d=<int>; form; …`.
    #[arg(long, global = true, env = "QMANIFOLD_INPUT")]
    pub input: Option<String>,
    #[arg(long, global = true, env = "QMANIFOLD_K")]
    pub k: Option<usize>,
    #[arg(long, global = true, env = "QMANIFOLD_M")]
    pub m: Option<usize>,
    /// Exponent as `a/b` or an integer.
    #[arg(long, global = true, env = "QMANIFOLD_P")]
    pub p: Option<String>,
    /// Multistart count for rank search, η candidates for X.
    #[arg(long, global = true, env = "QMANIFOLD_BUDGET")]
    pub budget: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED, env = "QMANIFOLD_SEED")]
    pub seed: u64,
    #[arg(long, global = true, env = "QMANIFOLD_SAMPLES")]
    pub samples: Option<usize>,
    /// Relative residual accepted by the numeric dimension oracle.
    #[arg(long, global = true, env = "QMANIFOLD_TOL")]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, env = "QMANIFOLD_FORMAT")]
    pub format: Option<Format>,
    #[arg(long, global = true, env = "QMANIFOLD_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Complete,
    /// Some entry is Inconclusive, or a check failed; artifacts are still written.
    Inconclusive,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Complete => 0,
            Status::Inconclusive => 2,
        }
    }

    fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Complete
        } else {
            Status::Inconclusive
        }
    }
}

/// Input errors exit with 1.
pub fn exit_code(result: &Result<Status, CliError>) -> u8 {
    match result {
        Ok(s) => s.code(),
        Err(_) => 1,
    }
}

/// File contents, fixture text, or the argument itself when it starts with `d=`.
pub fn load_text(source: &str) -> Result<String, CliError> {
    let path = Path::new(source);
    if path.is_file() {
        return fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        });
    }
    if let Some(text) = fixtures::fixture(source) {
        return Ok(text.to_string());
    }
    if source.trim_start().starts_with("d=") {
        return Ok(source.to_string());
    }
    Err(CliError::Input(format!("{source}: no such file or fixture")))
}

pub fn load_tuple(source: &str) -> Result<QuadTuple, CliError> {
    Ok(parse_tuple(&load_text(source)?)?)
}

/// `d=<int>; <polynomial>`.
pub fn parse_poly_text(text: &str) -> Result<Poly, CliError> {
    let bad = || CliError::Input("polynomial text must read `d=<int>; <polynomial>`".into());
    let (head, body) = text.split_once(';').ok_or_else(bad)?;
    let d: usize = head
        .trim()
        .strip_prefix("d=")
        .ok_or_else(bad)?
        .trim()
        .parse()
        .map_err(|_| bad())?;
    Ok(parse_poly(body.trim(), d)?)
}

fn parse_p(text: &str) -> Result<Rational, CliError> {
    rat::parse(text).ok_or_else(|| CliError::Input(format!("--p {text}: expected an integer or a/b")))
}

impl JobConfig {
    fn tuple(&self) -> Result<QuadTuple, CliError> {
        let spec = self
            .input
            .as_deref()
            .ok_or_else(|| CliError::Input("--input is required".into()))?;
        load_tuple(spec)
    }

    fn rank_config(&self) -> RankConfig {
        let mut cfg = RankConfig::default();
        if let Some(b) = self.budget {
            cfg.starts = b;
        }
        cfg
    }

    fn x_config(&self) -> XConfig {
        let mut cfg = XConfig::default();
        if let Some(b) = self.budget {
            cfg.slice.budget = b;
        }
        if let Some(t) = self.tol {
            cfg.slice.dim.tol = t;
        }
        cfg
    }

    fn x_table(&self, t: &QuadTuple) -> Result<XTable, CliError> {
        let k = self.k.ok_or_else(|| CliError::Input("--k is required".into()))?;
        Ok(x_table(t, k, &self.x_config(), self.seed)?)
    }
}

/// Runs one job, writing the primary artifact to `--out` or `stdout`.
pub fn run(cfg: &JobConfig, stdout: &mut dyn Write) -> Result<Status, CliError> {
    let mut sink = Sink { cfg, stdout };
    match &cfg.command {
        Command::DTable => {
            let t = cfg.tuple()?;
            let table = d_table(&t, &cfg.rank_config(), cfg.seed)?;
            let body = match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => d_table_csv(&table),
                Format::Json => to_json(&table),
            };
            sink.primary(&body)?;
            Ok(Status::from_ok(
                table
                    .entries
                    .iter()
                    .all(|e| e.decision.status != RankStatus::Inconclusive),
            ))
        }
        Command::XTable => {
            let t = cfg.tuple()?;
            let table = match cfg.m {
                Some(m) => {
                    let k = cfg.k.ok_or_else(|| CliError::Input("--k is required".into()))?;
                    XTable {
                        tuple: t.to_string(),
                        k,
                        seed: cfg.seed,
                        entries: vec![x_invariant(&t, k, m, &cfg.x_config(), cfg.seed)?],
                    }
                }
                None => cfg.x_table(&t)?,
            };
            let body = match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => x_table_csv(&table),
                Format::Json => to_json(&table),
            };
            sink.primary(&body)?;
            Ok(Status::from_ok(table.confidence() != Confidence::Inconclusive))
        }
        Command::Exponents { family, d } => {
            let value = exponents_job(cfg, *family, *d)?;
            let ok = value["check"]["confidence"] != json!(Confidence::Inconclusive.as_str());
            sink.json_or_flat(&value)?;
            Ok(Status::from_ok(ok))
        }
        Command::Classify => {
            let value = classify_job(cfg)?;
            sink.json_or_flat(&value)?;
            Ok(Status::Complete)
        }
        Command::Cover { poly, scale, ap } => {
            let p = parse_poly_text(&load_text(poly)?)?;
            let samples = cfg.samples.unwrap_or(100_000);
            let c = cover_sublevel(&p, *scale, *ap, samples, cfg.seed, &CoveringConfig::default())?;
            let r = &c.report;
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => sink.primary(&to_json(r))?,
                Format::Csv => sink.primary(&c.audit_csv())?,
            }
            if let Some(out) = &cfg.out {
                if let Some(svg) = c.svg(3000) {
                    write_file(&out.with_extension("svg"), &svg)?;
                }
                if cfg.format != Some(Format::Csv) {
                    write_file(&out.with_extension("audit.csv"), &c.audit_csv())?;
                }
            }
            Ok(Status::from_ok(
                r.coverage.fraction >= 1.0 && r.coverage.overlap_ok && r.audit.all_pass(),
            ))
        }
        Command::VerifyAll => {
            let checks = verify_all(cfg.seed, cfg.samples.unwrap_or(20_000));
            let ok = checks.iter().all(|c| c.pass);
            let value = json!({ "seed": cfg.seed, "all_pass": ok, "checks": checks });
            sink.json_or_flat(&value)?;
            Ok(Status::from_ok(ok))
        }
    }
}

fn critical_json(c: &CriticalP) -> Value {
    json!({
        "p_c": rat::format(&c.value),
        "k_star": c.argmin_k,
        "per_k": c.per_k.iter().map(|(k, v)| (k.to_string(), json!(rat::format(v)))).collect::<serde_json::Map<_, _>>(),
    })
}

fn exponents_job(cfg: &JobConfig, family: Family, d: Option<usize>) -> Result<Value, CliError> {
    let tuple = cfg.input.as_deref().map(load_tuple).transpose()?;
    let d = d
        .or(tuple.as_ref().map(QuadTuple::d))
        .ok_or_else(|| CliError::Input("--d or --input is required".into()))?;
    let mut value = match family {
        Family::Paraboloid => critical_json(&critical_p_paraboloid(d)?),
        Family::Good => critical_json(&critical_p_good(d)?),
        Family::Maxcodim => json!({ "p_c": rat::format(&critical_p_maxcodim(d)), "k_star": d + 1 }),
        Family::WellCurved => json!({
            "p_c": rat::format(&tomas_stein_wellcurved(d)?),
            "conjectured": rat::format(&conjectured_wellcurved(d)?),
        }),
    };
    value["family"] = json!(format!("{family:?}").to_lowercase());
    value["d"] = json!(d);
    value["seed"] = json!(cfg.seed);
    if let Some(p) = &cfg.p {
        let p = parse_p(p)?;
        let t = tuple.ok_or_else(|| CliError::Input("--p needs --input and --k".into()))?;
        let table = cfg.x_table(&t)?;
        let dec: DecSliceFn = match family {
            Family::Good | Family::WellCurved => dec_exp_codim2_slice,
            Family::Paraboloid | Family::Maxcodim => dec_exp_paraboloid_slice,
        };
        let report = verify_with_table(dec, &table, t.d(), t.n(), &p)?;
        value["check"] = json!({
            "tuple": t.to_string(),
            "k": table.k,
            "p": rat::format(&p),
            "x_values": table.values(),
            "confidence": table.confidence().as_str(),
            "report": report,
        });
    }
    Ok(value)
}

fn classify_job(cfg: &JobConfig) -> Result<Value, CliError> {
    let t = cfg.tuple()?;
    let good = GoodManifoldSpec::from_tuple(&t).map(|spec| {
        json!({
            "is_good": is_good(&spec),
            "weak_condition": good_weak_condition(&spec),
        })
    });
    let well_curved = match t.forms() {
        [p, q] => Some(is_well_curved(p, q)?),
        _ => None,
    };
    Ok(json!({
        "tuple": t.to_string(),
        "d": t.d(),
        "n": t.n(),
        "seed": cfg.seed,
        "good": good,
        "well_curved": well_curved,
    }))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifacts serialize");
    s.push('\n');
    s
}

/// `key,value` rows, keys as dotted paths.
fn flatten_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
        let join = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| walk(&join(k), x, rows)),
            Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => a
                .iter()
                .enumerate()
                .for_each(|(i, x)| walk(&join(&i.to_string()), x, rows)),
            Value::Array(a) => rows.push((prefix.to_string(), a.iter().map(scalar).collect::<Vec<_>>().join(" "))),
            _ => rows.push((prefix.to_string(), scalar(v))),
        }
    }
    fn scalar(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).expect("in-memory writer");
    for (k, x) in rows {
        w.write_record([k, x]).expect("in-memory writer");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

struct Sink<'a> {
    cfg: &'a JobConfig,
    stdout: &'a mut dyn Write,
}

impl Sink<'_> {
    fn primary(&mut self, body: &str) -> Result<(), CliError> {
        match &self.cfg.out {
            Some(path) => write_file(path, body),
            None => self
                .stdout
                .write_all(body.as_bytes())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                }),
        }
    }

    fn json_or_flat(&mut self, v: &Value) -> Result<(), CliError> {
        match self.cfg.format.unwrap_or(Format::Json) {
            Format::Json => self.primary(&to_json(v)),
            Format::Csv => self.primary(&flatten_csv(v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(args: &[&str]) -> JobConfig {
        JobConfig::try_parse_from(std::iter::once("qmanifold").chain(args.iter().copied())).unwrap()
    }

    fn run_str(args: &[&str]) -> (Result<Status, CliError>, String) {
        let mut out = Vec::new();
        let r = run(&job(args), &mut out);
        (r, String::from_utf8(out).unwrap())
    }

    #[test]
    fn poly_text() {
        let p = parse_poly_text("d=2; x1^2 + x2^2 - 1/4").unwrap();
        assert_eq!(p.nvars(), 2);
        assert!(parse_poly_text("x1^2").is_err());
        assert!(parse_poly_text("d=1; x2").is_err());
    }

    #[test]
    fn paraboloid_exponent() {
        let (r, out) = run_str(&["exponents", "--family", "paraboloid", "--d", "2"]);
        assert_eq!(r.unwrap(), Status::Complete);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["p_c"], "10/3");
        assert_eq!(v["k_star"], 3);
    }

    #[test]
    fn x_table_csv_for_paraboloid() {
        let (r, out) = run_str(&["x-table", "--input", "paraboloid_d3.qt", "--k", "3"]);
        assert_eq!(r.unwrap(), Status::Complete);
        let values: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
        assert_eq!(values, ["0", "1", "2", "2", "3"]);
    }

    #[test]
    fn input_errors() {
        let (r, _) = run_str(&["x-table", "--input", "no_such_fixture", "--k", "3"]);
        assert_eq!(exit_code(&r), 1);
        let (r, _) = run_str(&["classify", "--input", "d=2; x1^3"]);
        assert!(matches!(r, Err(CliError::Parse(_))));
        let (r, _) = run_str(&["exponents", "--family", "good"]);
        assert_eq!(exit_code(&r), 1);
    }

    #[test]
    fn classify_flat_csv() {
        let (r, out) = run_str(&["classify", "--input", "hyperbolic_tensor", "--format", "csv"]);
        r.unwrap();
        assert!(out.contains("good.is_good,false"));
        assert!(out.contains("well_curved.value,true"));
    }
}
