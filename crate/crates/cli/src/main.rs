//! `zygmund`: batch driver for the regularity experiments.
//!
//! Every subcommand writes one payload `{"config": …, "result": …}` (or a CSV
//! table) that depends only on its arguments. Wall-clock data goes to a
//! separate `<output>.meta.json` written next to the payload.

// `!(a < b)` is used on purpose so that NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use zygmund::corpus::{AnalyticFn, Regularity};
use zygmund::curvelab::{boman_test, BomanConfig};
use zygmund::identities::run_identity_suite;
use zygmund::output::{format_float, to_canonical_json, to_csv};
use zygmund::seminorm::{
    classify_box, classify_with, estimate_exponent, holder_seminorm, lambda_norm, lip_norm, sample_box,
    sample_fn_with_derivatives, zygmund_seminorm, ClassifyOptions, Criterion, ModulusSpec, RegularityReport,
    ScaleSet, SupResult,
};
use zygmund::stencil::{Stencil, StencilKind};
use zygmund::superposition::{classify_superposition, SuperpositionExperiment};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "ZYGMUND_OUT_DIR";
/// Largest number of samples accepted for a box grid.
const MAX_BOX_SAMPLES: usize = 1 << 24;

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_MISMATCH: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "zygmund", version, about = "Finite-difference regularity experiments")]
struct Cli {
    /// Worker threads for data-parallel loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file. Defaults to `$ZYGMUND_OUT_DIR/<subcommand>.<format>`, or stdout when unset.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact-rational derivative stencil of order m.
    Stencil {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "zygmund")]
        kind: String,
    },
    /// One seminorm or norm of a sampled corpus function.
    Seminorm(SeminormArgs),
    /// Regularity exponent from the decay of n-th differences.
    Estimate {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Zygmund, Lipschitz and Hölder verdicts checked against the corpus label.
    Classify {
        #[command(flatten)]
        grid: GridArgs,
        /// Derivative order; defaults to the order at which the label is sharp.
        #[arg(long)]
        m: Option<usize>,
        /// Hölder exponents to test, comma separated.
        #[arg(long, value_delimiter = ',')]
        holder: Option<Vec<f64>>,
    },
    /// Direct verdict on a box against composites with a family of curves.
    Boman {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// zygmund | lipschitz | holder:<alpha>
        #[arg(long, default_value = "zygmund")]
        criterion: String,
        /// Cube `[lo, hi]^d` as `lo,hi`.
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        domain: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        curves: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Superposition operator experiment for an outer function.
    Superpose {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Exact and floating checks of the difference-calculus identities.
    Identities {
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Function in the spec mini-language, e.g. `weierstrass:depth=20`.
    #[arg(long = "fn")]
    function: String,
    /// Interval `lo,hi`.
    #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
    interval: String,
    /// Number of grid points (per axis for functions on a box).
    #[arg(long, default_value_t = 65537)]
    grid: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NormKind {
    Zygmund,
    Holder,
    Lambda,
    Lip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Scales {
    Dyadic,
    All,
}

#[derive(Args, Debug)]
struct SeminormArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = NormKind::Zygmund)]
    kind: NormKind,
    /// Exponent of the power modulus for `holder`.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// `power` (uses --alpha) or `tlog`.
    #[arg(long, default_value = "power")]
    modulus: String,
    /// Smoothness index for `lambda` and `lip`.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, value_enum, default_value_t = Scales::All)]
    scales: Scales,
}

/// A finished run: the deterministic payload and whether the predicted
/// verdict was reproduced.
struct Outcome {
    config: Value,
    result: Value,
    csv: String,
    matched: bool,
}

type AnyResult<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn to_value<T: serde::Serialize>(v: &T) -> AnyResult<Value> {
    serde_json::to_value(v).map_err(err)
}

fn parse_pair(s: &str, what: &str) -> AnyResult<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || format!("{what} must be `lo,hi` with lo < hi, got `{s}`");
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_function(spec: &str) -> AnyResult<AnalyticFn> {
    spec.parse().map_err(|e| format!("--fn `{spec}`: {e}"))
}

fn grid_config(sub: &str, g: &GridArgs, f: &AnalyticFn) -> AnyResult<(Value, (f64, f64))> {
    let (lo, hi) = parse_pair(&g.interval, "--interval")?;
    if g.grid < 2 {
        return Err(format!("--grid needs at least 2 points, got {}", g.grid));
    }
    let spacing = (hi - lo) / (g.grid - 1) as f64;
    let config = json!({
        "subcommand": sub,
        "function": f.to_string(),
        "interval": [lo, hi],
        "grid": g.grid,
        "spacing": spacing,
        "seed": Value::Null,
    });
    Ok((config, (lo, hi)))
}

fn sup_csv(name: &str, value: f64, witness: Option<zygmund::seminorm::Witness>) -> AnyResult<String> {
    let cell = |w: Option<f64>| w.map_or(String::new(), format_float);
    to_csv(
        &["quantity", "value", "witness_x", "witness_h"],
        &[vec![
            name.to_string(),
            format_float(value),
            cell(witness.map(|w| w.x)),
            cell(witness.map(|w| w.h)),
        ]],
    )
    .map_err(err)
}

fn run_stencil(m: usize, kind: &str) -> AnyResult<Outcome> {
    let kind: StencilKind = kind.parse().map_err(err)?;
    let stencil = Stencil::new(m, kind).map_err(err)?;
    let record = stencil.to_record();
    let rows: Vec<Vec<String>> = record
        .coefficients
        .iter()
        .zip(stencil.coefficients_f64())
        .enumerate()
        .map(|(j, (c, v))| vec![j.to_string(), c.clone(), format_float(v)])
        .collect();
    Ok(Outcome {
        config: json!({ "subcommand": "stencil", "m": m, "kind": record.kind, "seed": Value::Null }),
        result: to_value(&record)?,
        csv: to_csv(&["j", "coefficient", "value"], &rows).map_err(err)?,
        matched: stencil.moments_hold(),
    })
}

fn run_seminorm(a: &SeminormArgs) -> AnyResult<Outcome> {
    let f = parse_function(&a.grid.function)?;
    if f.dim() != 1 {
        return Err("seminorm works on one-dimensional functions".into());
    }
    let (mut config, (lo, hi)) = grid_config("seminorm", &a.grid, &f)?;
    let scales = match a.scales {
        Scales::Dyadic => ScaleSet::Dyadic,
        Scales::All => ScaleSet::All,
    };
    let modulus = match a.modulus.as_str() {
        "power" => ModulusSpec::Power(a.alpha),
        "tlog" => ModulusSpec::TLog,
        other => return Err(format!("unknown modulus `{other}` (power | tlog)")),
    };
    let derivatives = match a.kind {
        NormKind::Lambda | NormKind::Lip if a.s > 1.0 => a.s.ceil() as usize - 1,
        _ => 0,
    };
    let samples = sample_fn_with_derivatives(&f, lo, hi, a.grid.grid, derivatives).map_err(err)?;
    let (name, sup) = match a.kind {
        NormKind::Zygmund => ("zygmund_seminorm", zygmund_seminorm(&samples, (lo, hi), scales).map_err(err)?),
        NormKind::Holder => (
            "holder_seminorm",
            holder_seminorm(&samples, modulus, (lo, hi), scales).map_err(err)?,
        ),
        NormKind::Lambda => (
            "lambda_norm",
            SupResult {
                value: lambda_norm(&samples, a.s, scales).map_err(err)?,
                witness: None,
            },
        ),
        NormKind::Lip => {
            if a.s.fract() != 0.0 || a.s < 1.0 {
                return Err(format!("lip norm needs an integer s >= 1, got {}", a.s));
            }
            (
                "lip_norm",
                SupResult {
                    value: lip_norm(&samples, a.s as usize, scales).map_err(err)?,
                    witness: None,
                },
            )
        }
    };
    let obj = config.as_object_mut().expect("config is an object");
    obj.insert("kind".into(), json!(name));
    obj.insert("scales".into(), to_value(&scales)?);
    match a.kind {
        NormKind::Holder => {
            obj.insert("modulus".into(), to_value(&modulus)?);
        }
        NormKind::Lambda | NormKind::Lip => {
            obj.insert("s".into(), json!(a.s));
        }
        NormKind::Zygmund => {}
    }
    Ok(Outcome {
        config,
        result: to_value(&sup)?,
        csv: sup_csv(name, sup.value, sup.witness)?,
        matched: true,
    })
}

fn run_estimate(g: &GridArgs, n: usize) -> AnyResult<Outcome> {
    let f = parse_function(&g.function)?;
    if f.dim() != 1 {
        return Err("estimate works on one-dimensional functions".into());
    }
    let (mut config, (lo, hi)) = grid_config("estimate", g, &f)?;
    config["n"] = json!(n);
    let samples = sample_fn_with_derivatives(&f, lo, hi, g.grid, 0).map_err(err)?;
    let mut report = estimate_exponent(&samples, n, (lo, hi)).map_err(err)?;
    report.function = Some(f.to_string());
    Ok(Outcome {
        config,
        result: to_value(&report)?,
        csv: report.to_csv().map_err(err)?,
        matched: true,
    })
}

fn default_holder(label: Regularity) -> Vec<f64> {
    match label {
        Regularity::Holder { alpha, .. } if alpha + 0.1 <= 1.0 => vec![alpha, (alpha * 10.0 + 1.0).round() / 10.0],
        Regularity::Holder { alpha, .. } => vec![alpha],
        _ => vec![0.5],
    }
}

/// Whether every difference-route verdict equals the label's prediction.
fn verdicts_match(report: &RegularityReport, label: Regularity, m: usize, holder: &[f64]) -> bool {
    let Some(v) = &report.verdicts else {
        return false;
    };
    let mut criteria = vec![Criterion::Zygmund, Criterion::Lipschitz];
    criteria.extend(holder.iter().map(|&a| Criterion::Holder(a)));
    criteria
        .into_iter()
        .all(|c| v.get(c) == Some(label.expected(m, c)))
}

fn run_classify(g: &GridArgs, m: Option<usize>, holder: Option<Vec<f64>>) -> AnyResult<Outcome> {
    let f = parse_function(&g.function)?;
    let (mut config, (lo, hi)) = grid_config("classify", g, &f)?;
    let label = f.label();
    let m = m.unwrap_or_else(|| label.order().unwrap_or(0));
    let holder = holder.unwrap_or_else(|| default_holder(label));
    let options = ClassifyOptions {
        holder_exponents: holder.clone(),
        ..ClassifyOptions::default()
    };
    let mut report = if f.dim() == 1 {
        let derivatives = f.max_exact_derivative_order().map_or(m, |b| b.min(m));
        let samples = sample_fn_with_derivatives(&f, lo, hi, g.grid, derivatives).map_err(err)?;
        classify_with(&samples, m, (lo, hi), &options).map_err(err)?
    } else {
        let total = g.grid.checked_pow(f.dim() as u32).unwrap_or(usize::MAX);
        if total > MAX_BOX_SAMPLES {
            return Err(format!(
                "a {}-dimensional grid of {} points per axis exceeds {MAX_BOX_SAMPLES} samples; lower --grid",
                f.dim(),
                g.grid
            ));
        }
        let samples = sample_box(&f, lo, hi, g.grid).map_err(err)?;
        classify_box(&samples, m, &options).map_err(err)?
    };
    report.function = Some(f.to_string());
    let matched = verdicts_match(&report, label, m, &holder);
    config["m"] = json!(m);
    config["holder"] = json!(holder);
    let result = json!({
        "label": label.to_string(),
        "matches_label": matched,
        "report": to_value(&report)?,
    });
    Ok(Outcome {
        config,
        result,
        csv: report.criteria_csv().map_err(err)?,
        matched,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_boman(
    function: &str,
    m: usize,
    criterion: &str,
    domain: &str,
    seed: u64,
    curves: usize,
    degree: usize,
) -> AnyResult<Outcome> {
    let criterion: Criterion = criterion.parse().map_err(err)?;
    let (lo, hi) = parse_pair(domain, "--domain")?;
    let f = parse_function(function)?;
    let mut config = BomanConfig::new(&f.to_string(), m, criterion, [lo, hi], seed);
    config.curves = curves;
    config.degree = degree;
    let report = boman_test(&config).map_err(err)?;
    let rows: Vec<Vec<String>> = report
        .composites
        .iter()
        .map(|c| {
            vec![
                c.id.clone(),
                c.kind.clone(),
                c.assessment.verdict.to_string(),
                c.assessment.growth.map_or(String::new(), format_float),
            ]
        })
        .collect();
    let mut cfg = to_value(&config)?;
    cfg.as_object_mut()
        .expect("config is an object")
        .shift_insert(0, "subcommand".into(), json!("boman"));
    Ok(Outcome {
        config: cfg,
        matched: report.agreement && report.direct.verdict == report.expected,
        result: to_value(&report)?,
        csv: to_csv(&["id", "kind", "verdict", "growth"], &rows).map_err(err)?,
    })
}

fn run_superpose(function: &str, m: usize, k: usize) -> AnyResult<Outcome> {
    let f = parse_function(function)?;
    let exp = SuperpositionExperiment::new(&f.to_string(), m, k);
    let verdict = classify_superposition(&exp).map_err(err)?;
    let mut rows = Vec::new();
    let tables = verdict
        .ratio_test
        .operator_ratios
        .iter()
        .map(|t| ("operator_ratio", t))
        .chain(std::iter::once(("mixed", &verdict.ratio_test.mixed)));
    for (name, t) in tables {
        for r in &t.rows {
            rows.push(vec![name.to_string(), format_float(r.h), format_float(r.statistic)]);
        }
    }
    let mut cfg = to_value(&exp)?;
    let obj = cfg.as_object_mut().expect("config is an object");
    obj.shift_insert(0, "subcommand".into(), json!("superpose"));
    obj.insert("seed".into(), Value::Null);
    Ok(Outcome {
        config: cfg,
        matched: verdict.agreement,
        result: to_value(&verdict)?,
        csv: to_csv(&["table", "t", "statistic"], &rows).map_err(err)?,
    })
}

fn run_identities(m: usize, trials: usize, seed: u64) -> AnyResult<Outcome> {
    let report = run_identity_suite(m, trials, seed).map_err(err)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.identity.clone(),
                r.instances.to_string(),
                r.exact_failures.to_string(),
                format_float(r.max_float_relative),
                r.passed.to_string(),
            ]
        })
        .collect();
    Ok(Outcome {
        config: json!({ "subcommand": "identities", "m": m, "trials": trials, "seed": seed }),
        matched: report.passed,
        result: to_value(&report)?,
        csv: to_csv(
            &["identity", "instances", "exact_failures", "max_float_relative", "passed"],
            &rows,
        )
        .map_err(err)?,
    })
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Stencil { .. } => "stencil",
        Command::Seminorm(_) => "seminorm",
        Command::Estimate { .. } => "estimate",
        Command::Classify { .. } => "classify",
        Command::Boman { .. } => "boman",
        Command::Superpose { .. } => "superpose",
        Command::Identities { .. } => "identities",
    }
}

fn execute(cli: &Cli) -> AnyResult<Outcome> {
    match &cli.command {
        Command::Stencil { m, kind } => run_stencil(*m, kind),
        Command::Seminorm(a) => run_seminorm(a),
        Command::Estimate { grid, n } => run_estimate(grid, *n),
        Command::Classify { grid, m, holder } => run_classify(grid, *m, holder.clone()),
        Command::Boman {
            function,
            m,
            criterion,
            domain,
            seed,
            curves,
            degree,
        } => run_boman(function, *m, criterion, domain, *seed, *curves, *degree),
        Command::Superpose { function, m, k } => run_superpose(function, *m, *k),
        Command::Identities { m, trials, seed } => run_identities(*m, *trials, *seed),
    }
}

fn output_path(cli: &Cli) -> Option<PathBuf> {
    cli.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| Path::new(&d).join(format!("{}.{}", subcommand_name(&cli.command), cli.format.extension())))
    })
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn write_artifacts(cli: &Cli, outcome: &Outcome, argv: &[String], elapsed: f64) -> AnyResult<()> {
    let payload = match cli.format {
        Format::Json => {
            to_canonical_json(&json!({ "config": outcome.config, "result": outcome.result })).map_err(err)?
        }
        Format::Csv => outcome.csv.clone(),
    };
    let Some(path) = output_path(cli) else {
        print!("{payload}");
        return Ok(());
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;
    }
    fs::write(&path, payload).map_err(|e| format!("writing {}: {e}", path.display()))?;
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "argv": argv,
        "timestamp_unix": now,
        "elapsed_seconds": elapsed,
        "config": outcome.config,
        "matched": outcome.matched,
    });
    let meta_file = meta_path(&path);
    fs::write(&meta_file, to_canonical_json(&meta).map_err(err)?)
        .map_err(|e| format!("writing {}: {e}", meta_file.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_ERROR);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    let start = std::time::Instant::now();
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    if let Err(e) = write_artifacts(&cli, &outcome, &argv, start.elapsed().as_secs_f64()) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_ERROR);
    }
    if outcome.matched {
        ExitCode::from(EXIT_OK)
    } else {
        eprintln!("verdict mismatch: the predicted verdict was not reproduced");
        ExitCode::from(EXIT_MISMATCH)
    }
}
