//! The `finsler` command line.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::builtins;
use crate::classify::{classify, DEFAULT_CLASS_TOL};
use crate::dsl::{MetricSpec, PointState};
use crate::error::{FinslerError, Result};
use crate::geometry::{compute, default_orders, parse_orders, Convention, TensorKind, ORDERS_ENV};
use crate::jet::Orders;
use crate::nullity::{subspace, to_ttm, CurvatureKind, Mode, DEFAULT_RANK_TOL};
use crate::report::{format_float, join_floats, to_value, write_csv, Report};
use crate::reproduce::{reproduce, ReproduceOptions};
use crate::sampling::sample_points;
use crate::scan::{grid_scan, Grid, ScanOptions};
use crate::tensor::Tensor;
use crate::verify::{verify, DEFAULT_IDENTITY_TOL};

/// Exit code for completed runs whose checks failed.
pub const EXIT_CHECK_FAILED: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "finsler",
    version,
    about = "Curvature, nullity and identity checks for Finsler metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the metric, connection and curvature tensors at a point.
    Tensors(TensorsArgs),
    /// Nullity or kernel space of a curvature tensor at a point.
    Nullity(NullityArgs),
    /// Scan nullity indices over a grid and check structural properties.
    Scan(ScanArgs),
    /// Check curvature identities at random in-domain points.
    Verify(VerifyArgs),
    /// Classify as Berwald, Landsberg-not-Berwald or non-Landsberg.
    Classify(ClassifyArgs),
    /// Run the golden suite on the built-in example metrics.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// Built-in metric name (euclid<n>, riem-hyperbolic, ex1, ex2, ex3) or path to a metric file.
    #[arg(long)]
    pub metric: String,
    /// Jet orders "Dx,Dy" (default from FINSLER_DEFAULT_ORDERS, else 2,6).
    #[arg(long)]
    pub orders: Option<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the machine-readable report to this file.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write a CSV table to this file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TensorsArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Point "x=…;y=…".
    #[arg(long)]
    pub point: String,
    /// Comma-separated tensor names to compute (default: all).
    #[arg(long)]
    pub tensor: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct NullityArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long)]
    pub point: String,
    /// chern-h, chern-hv, barthel or cartan-h.
    #[arg(long, default_value = "chern-h")]
    pub tensor: String,
    /// nullity or kernel.
    #[arg(long, default_value = "nullity")]
    pub mode: String,
    /// Relative singular-value threshold.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Axes "x1=lo:hi:count,y3=value,…".
    #[arg(long)]
    pub grid: String,
    /// Base point for coordinates not on the grid (default: sampling-box center).
    #[arg(long)]
    pub point: Option<String>,
    /// Comma-separated curvature tensors to report (default: all four).
    #[arg(long)]
    pub tensor: Option<String>,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    /// Threshold on the Landsberg ratio used by the Landsberg check.
    #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_IDENTITY_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub orders: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Sign applied to the h-curvature; -1 deliberately breaks calibration.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub rs_sign: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn orders(arg: &Option<String>) -> Result<Orders> {
    match arg {
        Some(s) => parse_orders(s),
        None => default_orders(),
    }
}

fn load(args: &MetricArgs) -> Result<(MetricSpec, Orders)> {
    Ok((builtins::load(&args.metric)?, orders(&args.orders)?))
}

fn list<T: std::str::FromStr<Err = FinslerError>>(s: &Option<String>) -> Result<Vec<T>> {
    s.iter()
        .flat_map(|s| s.split(','))
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

fn positive(v: f64, flag: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(FinslerError::InvalidArgument(format!(
            "--{flag} must be a positive number"
        )))
    }
}

fn one_based(idx: &[usize]) -> String {
    idx.iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn finish(
    report: &Report,
    out: &OutputArgs,
    header: &[&str],
    rows: Vec<Vec<String>>,
) -> Result<()> {
    if let Some(p) = &out.json {
        report.write_json(p)?;
    }
    if let Some(p) = &out.csv {
        write_csv(p, header, &rows)?;
    }
    Ok(())
}

fn tensor_lines(name: &str, t: &Tensor, text: &mut String) {
    let nonzero: Vec<(Vec<usize>, f64)> = t
        .indices()
        .zip(t.data())
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i, *v))
        .collect();
    if nonzero.is_empty() {
        let _ = writeln!(text, "{name}: all zero");
        return;
    }
    let _ = writeln!(text, "{name}:");
    for (i, v) in nonzero {
        let _ = writeln!(text, "  [{}] {}", one_based(&i), format_float(v));
    }
}

fn cmd_tensors(a: &TensorsArgs) -> Result<i32> {
    let (spec, orders) = load(&a.metric)?;
    let p = PointState::parse(&a.point, spec.dim)?;
    let kinds: Vec<TensorKind> = list(&a.tensor)?;
    let kinds = if kinds.is_empty() {
        TensorKind::ALL.to_vec()
    } else {
        kinds
    };
    let b = compute(&spec, &p, orders, &kinds, Convention::default())?;

    let mut text = String::new();
    let _ = writeln!(text, "point {p}  orders {orders}");
    let _ = writeln!(
        text,
        "F = {}  E = {}  cond(g) = {:.3e}",
        format_float(b.finsler),
        format_float(b.energy),
        b.condition
    );
    let mut tensors = serde_json::Map::new();
    let mut rows = Vec::new();
    for (name, t) in b.tensors() {
        tensor_lines(name, t, &mut text);
        tensors.insert(name.to_string(), to_value(t)?);
        for (i, v) in t.indices().zip(t.data()) {
            rows.push(vec![name.to_string(), one_based(&i), format_float(*v)]);
        }
    }
    print!("{text}");

    let mut report = Report::new("tensors", Some(&spec));
    report.points = vec![p];
    report.tensors = serde_json::Value::Object(tensors);
    report.summary = json!({
        "orders": [orders.dx, orders.dy],
        "energy": b.energy,
        "finsler": b.finsler,
        "condition": b.condition,
        "y_lower": b.y_lower,
    });
    finish(&report, &a.output, &["tensor", "index", "value"], rows)?;
    Ok(0)
}

fn cmd_nullity(a: &NullityArgs) -> Result<i32> {
    let (spec, orders) = load(&a.metric)?;
    let p = PointState::parse(&a.point, spec.dim)?;
    let kind: CurvatureKind = a.tensor.parse()?;
    let mode: Mode = a.mode.parse()?;
    let rank_tol = positive(a.rank_tol, "rank-tol")?;
    let b = compute(
        &spec,
        &p,
        orders,
        &[kind.tensor(), TensorKind::Connection],
        Convention::default(),
    )?;
    let s = subspace(&b, kind, mode, rank_tol)?;
    let ttm: Vec<Vec<f64>> = s
        .basis
        .iter()
        .map(|v| to_ttm(&b, v))
        .collect::<Result<_>>()?;

    println!(
        "{} space of {kind} at {p}",
        if mode == Mode::Nullity {
            "nullity"
        } else {
            "kernel"
        }
    );
    println!("mu = {}", s.rank);
    for v in &s.basis {
        println!(
            "  ({})",
            v.iter()
                .map(|c| format!("{c:.12}"))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    let gap = |o: Option<f64>| o.map_or("-".to_string(), |v| format!("{v:.3e}"));
    println!(
        "residual {:.3e} ({})  smallest kept {}  largest dropped {}",
        s.residual,
        if s.residual_ok { "ok" } else { "HIGH" },
        gap(s.lowest_retained),
        gap(s.highest_discarded)
    );

    let mut report = Report::new("nullity", Some(&spec));
    report.points = vec![p];
    report.subspaces = json!([{
        "tensor": kind,
        "mode": mode,
        "mu": s.rank,
        "subspace": to_value(&s)?,
        "ttm_basis": ttm,
    }]);
    report.residuals =
        json!([{ "name": "subspace", "value": s.residual, "passed": s.residual_ok }]);
    let rows = s
        .basis
        .iter()
        .enumerate()
        .map(|(i, v)| {
            vec![
                kind.name().into(),
                a.mode.clone(),
                s.rank.to_string(),
                i.to_string(),
                join_floats(v),
            ]
        })
        .collect();
    finish(
        &report,
        &a.output,
        &["tensor", "mode", "mu", "vector", "components"],
        rows,
    )?;
    Ok(0)
}

/// Human output lists every record only for grids up to this size.
const SCAN_TABLE_LIMIT: usize = 200;

fn cmd_scan(a: &ScanArgs) -> Result<i32> {
    let (spec, orders) = load(&a.metric)?;
    let grid = Grid::parse(&a.grid, spec.dim)?;
    let base = a
        .point
        .as_deref()
        .map(|s| PointState::parse(s, spec.dim))
        .transpose()?;
    let kinds: Vec<CurvatureKind> = list(&a.tensor)?;
    let opts = ScanOptions {
        orders,
        rank_tol: positive(a.rank_tol, "rank-tol")?,
        class_tol: positive(a.tol, "tol")?,
    };
    let r = grid_scan(&spec, &grid, base.as_ref(), &kinds, opts)?;

    println!(
        "{} grid points, {} scanned, {} outside the domain, {} on a boundary",
        r.total,
        r.records.len(),
        r.skipped_domain,
        r.skipped_boundary
    );
    if r.records.len() <= SCAN_TABLE_LIMIT {
        for rec in &r.records {
            let mus: Vec<String> = rec
                .nullity
                .iter()
                .map(|t| format!("{}={}", t.tensor, t.mu))
                .collect();
            let fails = rec.checks.failures();
            let status = if fails.is_empty() {
                "ok".to_string()
            } else {
                format!("FAIL {}", fails.join(","))
            };
            println!(
                "  #{:<5} {}  {}  {status}",
                rec.index,
                rec.point,
                mus.join(" ")
            );
        }
    }
    for s in &r.summary {
        let counts: Vec<String> = s
            .counts
            .iter()
            .map(|(mu, c)| format!("mu={mu}: {c}"))
            .collect();
        println!(
            "{}: {}; {} transitions",
            s.tensor,
            counts.join(", "),
            s.transitions.len()
        );
        for t in &s.transitions {
            println!(
                "  {} #{} -> #{}: {} -> {}",
                t.axis, t.from_index, t.to_index, t.from_mu, t.to_mu
            );
        }
    }
    let failed = r.failed_records().count();
    println!(
        "structural checks: {}",
        if failed == 0 {
            "all pass".to_string()
        } else {
            format!("{failed} points FAIL")
        }
    );

    let mut report = Report::new("scan", Some(&spec));
    report.points = r.records.iter().map(|rec| rec.point.clone()).collect();
    report.subspaces = to_value(&r.records)?;
    report.summary = to_value(&json!({
        "grid": r.grid,
        "base": r.base,
        "total": r.total,
        "skipped_domain": r.skipped_domain,
        "skipped_boundary": r.skipped_boundary,
        "indices": r.summary,
        "checks_passed": r.checks_passed,
    }))?;
    let mut rows = Vec::new();
    for rec in &r.records {
        for t in &rec.nullity {
            rows.push(vec![
                rec.index.to_string(),
                rec.point.to_string(),
                t.tensor.name().into(),
                t.mu.to_string(),
                rec.checks.all_pass().to_string(),
            ]);
        }
    }
    finish(
        &report,
        &a.output,
        &["index", "point", "tensor", "mu", "checks_passed"],
        rows,
    )?;
    Ok(if r.checks_passed {
        0
    } else {
        EXIT_CHECK_FAILED
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let (spec, orders) = load(&a.metric)?;
    let tol = positive(a.tol, "tol")?;
    let r = verify(&spec, a.points, a.seed, orders, tol)?;
    for i in &r.identities {
        println!(
            "{:<26} {:>4} pts  max {:.3e}  {}",
            i.name,
            i.points,
            i.max_residual,
            if i.passed { "pass" } else { "FAIL" }
        );
    }
    println!(
        "{}",
        if r.passed {
            "all identities pass"
        } else {
            "identity check FAILED"
        }
    );

    let mut report = Report::new("verify", Some(&spec));
    report.points = r.points.clone();
    report.residuals = to_value(&r.identities)?;
    report.summary = json!({ "tolerance": r.tolerance, "seed": r.seed, "passed": r.passed });
    let rows = r
        .identities
        .iter()
        .map(|i| {
            vec![
                i.name.into(),
                i.points.to_string(),
                format_float(i.max_residual),
                i.passed.to_string(),
                i.worst_point
                    .as_ref()
                    .map(|p| p.to_string())
                    .unwrap_or_default(),
            ]
        })
        .collect();
    finish(
        &report,
        &a.output,
        &[
            "identity",
            "points",
            "max_residual",
            "passed",
            "worst_point",
        ],
        rows,
    )?;
    Ok(if r.passed { 0 } else { EXIT_CHECK_FAILED })
}

fn cmd_classify(a: &ClassifyArgs) -> Result<i32> {
    let (spec, orders) = load(&a.metric)?;
    if a.points == 0 {
        return Err(FinslerError::InvalidArgument(
            "--points must be at least 1".into(),
        ));
    }
    let tol = positive(a.tol, "tol")?;
    let points = sample_points(&spec, a.points, a.seed)?;
    let c = classify(&spec, &points, orders, tol)?;
    for p in &c.points {
        println!(
            "{}  max|Gb| {:.3e}  max|L| {:.3e}  ratios {:.3e} {:.3e}  {}",
            p.point, p.max_berwald, p.max_landsberg, p.berwald_ratio, p.landsberg_ratio, p.verdict
        );
    }
    println!("consensus: {}", c.consensus);

    let mut report = Report::new("classify", Some(&spec));
    report.points = points;
    report.verdicts = to_value(&c.points)?;
    report.summary = json!({ "tolerance": c.tolerance, "consensus": c.consensus });
    let rows = c
        .points
        .iter()
        .map(|p| {
            vec![
                p.point.to_string(),
                format_float(p.max_berwald),
                format_float(p.max_landsberg),
                format_float(p.berwald_ratio),
                format_float(p.landsberg_ratio),
                p.verdict.to_string(),
            ]
        })
        .collect();
    finish(
        &report,
        &a.output,
        &[
            "point",
            "max_berwald",
            "max_landsberg",
            "berwald_ratio",
            "landsberg_ratio",
            "verdict",
        ],
        rows,
    )?;
    Ok(0)
}

fn cmd_reproduce(a: &ReproduceArgs) -> Result<i32> {
    if a.points == 0 {
        return Err(FinslerError::InvalidArgument(
            "--points must be at least 1".into(),
        ));
    }
    let opts = ReproduceOptions {
        orders: orders(&a.orders)?,
        convention: Convention { rs_sign: a.rs_sign },
        points: a.points,
        seed: a.seed,
    };
    let r = reproduce(&opts);
    for i in &r.items {
        println!(
            "[{}] {} {}: {}",
            if i.passed { "pass" } else { "FAIL" },
            i.id,
            i.name,
            i.detail
        );
    }
    let mut report = Report::new("reproduce", None);
    report.verdicts = to_value(&r.items)?;
    report.summary =
        json!({ "passed": r.passed, "orders": [opts.orders.dx, opts.orders.dy], "seed": a.seed });
    let rows = r
        .items
        .iter()
        .map(|i| {
            vec![
                i.id.to_string(),
                i.name.into(),
                i.passed.to_string(),
                i.detail.clone(),
            ]
        })
        .collect();
    finish(
        &report,
        &a.output,
        &["item", "name", "passed", "detail"],
        rows,
    )?;
    Ok(if r.passed { 0 } else { EXIT_CHECK_FAILED })
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Tensors(a) => cmd_tensors(a),
        Command::Nullity(a) => cmd_nullity(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    }
}

/// Entry point: parses arguments, runs, and maps errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, FinslerError::InsufficientOrders { .. }) {
                eprintln!("hint: pass --orders or set {ORDERS_ENV}");
            }
            e.exit_code()
        }
    }
}
