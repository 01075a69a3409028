//! `rreach`: exact growth constants, exact expectation curves, Monte Carlo
//! estimates and brute-force checks for band-restricted common subsequences.

mod manifest;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use rreach::lattice::{lcs_length, rreach_string_length, StringSeq};
use rreach::montecarlo::{
    fit_extrapolation, read_curve_csv, run_trials, s_statistic, write_curve_csv, McConfig, McCurve,
    McFitRecord, McModel,
};
use rreach::oracle::{bernoulli_expectation_with, realizability_census_with, string_expectation_with};
use rreach::propagation::{affine_tail_fit, exact_curve_with, transition_pair, ExactCurve};
use rreach::rational::{to_decimal, to_string_pair};
use rreach::string_model::gamma_string_exact;
use rreach::transfer::{gamma_exact_with, ChainModel};
use rreach::{Error, Limits, Rational};

use manifest::RunManifest;

const CAPS_HELP: &str = "\
Resource caps (environment overrides):
  RREACH_MAX_R        largest reach for dense transition matrices (default 5)
  RREACH_MAX_GAMMA_R  largest reach for exact growth constants (default 3)
  RREACH_MAX_ENUM     largest number of string pairs the oracle enumerates (default 100000000)
  RREACH_MAX_CELLS    largest number of band cells the Bernoulli oracle enumerates (default 25)

Exit codes: 0 success, 2 usage error, 3 resource cap, 4 internal assertion, 1 other failure.";

/// Significant digits used when rendering exact fractions as decimals.
const DIGITS: usize = 10;

#[derive(Parser)]
#[command(name = "rreach", version, about, after_help = CAPS_HELP)]
struct Cli {
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    Bernoulli,
    String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleMode {
    Strings,
    Bernoulli,
    Realizability,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TableKind {
    GammaExact,
    McSummary,
    Comparison,
}

#[derive(Subcommand)]
enum Command {
    /// Exact growth constant as a fraction, with the stationary vector.
    ExactGamma {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: usize,
        /// Carry the center match bit in the state (Bernoulli only).
        #[arg(long)]
        augmented: bool,
        /// Write matrices, slices and the stationary vector as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Exact expected lengths for n = 1..=n-max, plus an affine tail fit.
    Propagate {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        n_max: usize,
        /// Fit window A:B; defaults to 50:n-max (or 1:n-max for short curves).
        #[arg(long)]
        fit_window: Option<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Where to write the fit JSON (defaults to the CSV path with `.fit.json`).
        #[arg(long)]
        fit_json: Option<PathBuf>,
    },
    /// Monte Carlo estimates of the expected length for n = 1..=n-max.
    Mc {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Affine extrapolation of a Monte Carlo curve CSV.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Window A:B.
        #[arg(long)]
        window: String,
        /// Seed recorded in the fit JSON (the CSV does not carry it).
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Brute-force expectations and the realizability census.
    Oracle {
        #[arg(long, value_enum)]
        mode: OracleMode,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long)]
        n: usize,
        /// Reach; omit for the unrestricted length (strings mode).
        #[arg(long)]
        r: Option<usize>,
    },
    /// Lengths of one pair of ASCII strings (letters mapped to a dense alphabet).
    Length {
        u: String,
        v: String,
        #[arg(long)]
        r: Option<usize>,
    },
    /// Summary tables as CSV.
    Table {
        #[arg(long, value_enum)]
        which: TableKind,
        /// Reaches, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        rs: Vec<usize>,
        /// Alphabet sizes for gamma-exact, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        ks: Vec<u32>,
        #[arg(long, value_enum, default_value = "bernoulli")]
        model: Model,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1000)]
        mc_n_max: usize,
        #[arg(long, default_value = "50:1000")]
        mc_window: String,
        #[arg(long, default_value_t = 2000)]
        exact_n_max: usize,
        #[arg(long, default_value = "50:2000")]
        exact_window: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory of cached Monte Carlo curves; missing ones are computed and stored.
        #[arg(long)]
        mc_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures with their exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Cap(String),
    Assertion(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Cap(_) => 3,
            Failure::Assertion(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Cap(m) | Failure::Assertion(m) | Failure::Other(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::ResourceCap { .. } | Error::Unsupported(_) => Failure::Cap(msg),
            Error::InvalidArgument(_)
            | Error::LengthMismatch { .. }
            | Error::AlphabetMismatch { .. }
            | Error::SymbolOutOfRange { .. }
            | Error::OutOfBand { .. }
            | Error::ModelMismatch(_) => Failure::Usage(msg),
            _ => Failure::Other(msg),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command, &Limits::from_env()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command, limits: &Limits) -> CliResult<()> {
    match command {
        Command::ExactGamma {
            model,
            k,
            r,
            augmented,
            json,
        } => cmd_exact_gamma(model, k, r, augmented, json, limits),
        Command::Propagate {
            model,
            k,
            r,
            n_max,
            fit_window,
            csv,
            fit_json,
        } => cmd_propagate(model, k, r, n_max, fit_window, csv, fit_json, limits),
        Command::Mc {
            model,
            k,
            r,
            n_max,
            trials,
            seed,
            csv,
        } => cmd_mc(model, k, r, n_max, trials, seed, &csv),
        Command::Fit {
            input,
            window,
            seed,
            json,
        } => cmd_fit(&input, &window, seed, json),
        Command::Oracle { mode, k, n, r } => cmd_oracle(mode, k, n, r, limits),
        Command::Length { u, v, r } => cmd_length(&u, &v, r),
        Command::Table {
            which,
            rs,
            ks,
            model,
            trials,
            mc_n_max,
            mc_window,
            exact_n_max,
            exact_window,
            seed,
            mc_dir,
            out,
        } => {
            let opts = TableOpts {
                rs,
                ks,
                model,
                trials,
                mc_n_max,
                mc_window: parse_window(&mc_window)?,
                exact_n_max,
                exact_window: parse_window(&exact_window)?,
                seed,
                mc_dir,
            };
            cmd_table(which, &opts, out, limits)
        }
    }
}

fn parse_window(s: &str) -> CliResult<(usize, usize)> {
    let bad = || Failure::Usage(format!("window {s:?} is not of the form A:B"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a >= b {
        return Err(Failure::Usage(format!("window {s:?} needs 1 <= A < B")));
    }
    Ok((a, b))
}

fn chain_model(model: Model, k: u32, r: usize, augmented: bool) -> CliResult<ChainModel> {
    match model {
        Model::Bernoulli if augmented => Ok(ChainModel::BernoulliAugmented),
        Model::Bernoulli => Ok(ChainModel::Bernoulli),
        Model::String => {
            if k != 2 || r != 1 {
                return Err(Failure::Cap(format!(
                    "string model supports k=2, r=1 only (got k={k}, r={r})"
                )));
            }
            Ok(ChainModel::StringAugmented)
        }
    }
}

fn mc_model(model: Model) -> McModel {
    match model {
        Model::Bernoulli => McModel::Bernoulli,
        Model::String => McModel::String,
    }
}

fn model_name(model: Model) -> &'static str {
    mc_model(model).name()
}

fn fraction(x: &Rational) -> String {
    let [n, d] = to_string_pair(x);
    format!("{n}/{d}")
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Other(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_exact_gamma(
    model: Model,
    k: u32,
    r: usize,
    augmented: bool,
    json_path: Option<PathBuf>,
    limits: &Limits,
) -> CliResult<()> {
    let chain = chain_model(model, k, r, augmented)?;
    let pair = transition_pair(chain, k, r, limits)?;
    let g = if chain == ChainModel::StringAugmented {
        gamma_string_exact()?
    } else {
        gamma_exact_with(&pair, limits)?
    };
    println!("gamma = {} ≈ {}", fraction(&g.gamma), to_decimal(&g.gamma, 12));
    let stationary: Vec<String> = g.stationary.iter().map(fraction).collect();
    println!("stationary = ({})", stationary.join(", "));

    if let Some(path) = json_path {
        let mut value = pair.to_json();
        let poly = |p: &rreach::rational::UniPolynomial| -> Vec<[String; 2]> {
            p.coefficients().iter().map(to_string_pair).collect()
        };
        value["model"] = json!(chain.name());
        value["gamma"] = json!(to_string_pair(&g.gamma));
        value["stationary"] = json!(g.stationary.iter().map(to_string_pair).collect::<Vec<_>>());
        value["char_slice_lambda"] = json!(poly(&g.char_slice_lambda));
        value["char_slice_b"] = json!(poly(&g.char_slice_b));
        write_json(&path, &value)?;
        RunManifest::new(
            "exact-gamma",
            json!({"model": chain.name(), "k": k, "r": r}),
            None,
        )
        .write_beside(&[&path])?;
    }
    Ok(())
}

fn default_window(n_max: usize) -> (usize, usize) {
    if n_max >= 100 {
        (50, n_max)
    } else {
        (1, n_max)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_propagate(
    model: Model,
    k: u32,
    r: usize,
    n_max: usize,
    fit_window: Option<String>,
    csv_path: Option<PathBuf>,
    fit_json: Option<PathBuf>,
    limits: &Limits,
) -> CliResult<()> {
    let chain = chain_model(model, k, r, false)?;
    let (a, b) = match fit_window {
        Some(w) => parse_window(&w)?,
        None => default_window(n_max),
    };
    let curve = exact_curve_with(chain, k, r, n_max, limits)?;
    let fit = affine_tail_fit(&curve, a, b)?;
    println!("EL_{n_max} = {}", to_decimal(curve.el(n_max), DIGITS));
    println!("fit {a}:{b}: gamma_hat = {:.10}  A_hat = {:.6}", fit.gamma_hat, fit.a_hat);

    let params = json!({
        "model": chain.name(), "k": k, "r": r, "n_max": n_max, "fit_window": [a, b],
    });
    let fit_value = json!({
        "model": chain.name(), "k": k, "r": r,
        "gamma_hat": fit.gamma_hat, "a_hat": fit.a_hat, "n_min": a, "n_max": b,
    });
    let mut outputs = Vec::new();
    if let Some(path) = &csv_path {
        let mut w = create(path)?;
        curve.write_csv(&mut w)?;
        w.flush()?;
        outputs.push(path.clone());
    }
    let fit_path = fit_json.or_else(|| csv_path.as_ref().map(|p| p.with_extension("fit.json")));
    if let Some(path) = fit_path {
        write_json(&path, &fit_value)?;
        outputs.push(path);
    }
    if !outputs.is_empty() {
        let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
        RunManifest::new("propagate", params, None).write_beside(&refs)?;
    }
    Ok(())
}

fn cmd_mc(model: Model, k: u32, r: usize, n_max: usize, trials: u64, seed: u64, csv: &Path) -> CliResult<()> {
    let config = McConfig {
        model: mc_model(model),
        k,
        r,
        n_max,
        trials,
        seed,
    };
    let curve = run_trials(&config)?;
    let mut w = create(csv)?;
    write_curve_csv(&curve, &mut w)?;
    w.flush()?;
    println!(
        "EL_{n_max} ≈ {:.6} ± {:.6} ({trials} trials)",
        curve.mean(n_max),
        curve.stderr[n_max - 1]
    );
    RunManifest::new("mc", serde_json::to_value(config).expect("config serialises"), Some(seed))
        .write_beside(&[csv])?;
    Ok(())
}

fn cmd_fit(input: &Path, window: &str, seed: u64, json_path: Option<PathBuf>) -> CliResult<()> {
    let (a, b) = parse_window(window)?;
    let curve = read_curve_csv(BufReader::new(File::open(input)?), seed)?;
    let fit = fit_extrapolation(&curve, a, b)?;
    let record = McFitRecord::new(&curve, &fit);
    println!("fit {a}:{b}: gamma_hat = {:.6}  A_hat = {:.4}", fit.gamma_hat, fit.a_hat);
    if let Some(path) = json_path {
        write_json(&path, &serde_json::to_value(&record).expect("record serialises"))?;
        RunManifest::new(
            "fit",
            json!({"input": input.display().to_string(), "window": [a, b]}),
            Some(seed),
        )
        .write_beside(&[&path])?;
    }
    Ok(())
}

fn cmd_oracle(mode: OracleMode, k: u32, n: usize, r: Option<usize>, limits: &Limits) -> CliResult<()> {
    match mode {
        OracleMode::Strings => {
            let res = string_expectation_with(k, n, r, limits)?;
            println!("{}", fraction(&res.expectation));
            eprintln!("{} pairs enumerated", res.enumeration_count);
        }
        OracleMode::Bernoulli => {
            let r = r.ok_or_else(|| Failure::Usage("bernoulli mode needs --r".into()))?;
            let res = bernoulli_expectation_with(k, n, r, limits)?;
            println!("{}", fraction(&res.expectation));
            // Cross-check against exact propagation whenever it is available.
            match exact_curve_with(ChainModel::Bernoulli, k, r, n.max(r), limits) {
                Ok(curve) => {
                    let propagated = curve.el(n);
                    if propagated != &res.expectation {
                        return Err(Failure::Assertion(format!(
                            "enumeration gives {} but propagation gives {}",
                            fraction(&res.expectation),
                            fraction(propagated)
                        )));
                    }
                    println!("propagated value agrees: {}", fraction(propagated));
                }
                Err(Error::ResourceCap { .. }) => println!("propagation skipped (beyond cap)"),
                Err(e) => return Err(e.into()),
            }
        }
        OracleMode::Realizability => {
            let census = realizability_census_with(n, limits)?;
            let weights: Vec<String> = census
                .weight_counts
                .iter()
                .map(|(w, c)| format!("weight {w}: {c}"))
                .collect();
            println!("{} configurations ({})", census.configurations, weights.join(", "));
            if !census.passed() {
                return Err(Failure::Assertion(format!(
                    "{} configurations disagree with the window criterion",
                    census.mismatches
                )));
            }
            println!("all configurations have weight 0 or 2: OK");
        }
    }
    Ok(())
}

fn cmd_length(u: &str, v: &str, r: Option<usize>) -> CliResult<()> {
    let (a, b) = StringSeq::encode_pair(u, v);
    println!("lcs = {}", lcs_length(&a, &b)?);
    if let Some(r) = r {
        println!("reach {r} = {}", rreach_string_length(&a, &b, r)?);
    }
    Ok(())
}

struct TableOpts {
    rs: Vec<usize>,
    ks: Vec<u32>,
    model: Model,
    trials: u64,
    mc_n_max: usize,
    mc_window: (usize, usize),
    exact_n_max: usize,
    exact_window: (usize, usize),
    seed: u64,
    mc_dir: Option<PathBuf>,
}

/// Runs (or loads from the cache directory) one Monte Carlo curve.
fn mc_curve(opts: &TableOpts, model: McModel, r: usize) -> CliResult<McCurve> {
    let config = McConfig {
        model,
        k: 2,
        r,
        n_max: opts.mc_n_max,
        trials: opts.trials,
        seed: opts.seed,
    };
    let Some(dir) = &opts.mc_dir else {
        return Ok(run_trials(&config)?);
    };
    let path = dir.join(format!(
        "{}_k2_r{r}_n{}_t{}_s{}.csv",
        model.name(),
        opts.mc_n_max,
        opts.trials,
        opts.seed
    ));
    if path.exists() {
        let curve = read_curve_csv(BufReader::new(File::open(&path)?), opts.seed)?;
        if curve.config != config {
            return Err(Failure::Usage(format!(
                "cached curve {} does not match the requested run",
                path.display()
            )));
        }
        return Ok(curve);
    }
    let curve = run_trials(&config)?;
    let mut w = create(&path)?;
    write_curve_csv(&curve, &mut w)?;
    w.flush()?;
    RunManifest::new("mc", serde_json::to_value(config).expect("config serialises"), Some(opts.seed))
        .write_beside(&[&path])?;
    Ok(curve)
}

fn or_dash<T>(value: Result<T, Error>, render: impl Fn(T) -> String) -> CliResult<String> {
    match value {
        Ok(v) => Ok(render(v)),
        Err(Error::ResourceCap { .. }) | Err(Error::Unsupported(_)) => Ok("−".into()),
        Err(e) => Err(e.into()),
    }
}

fn cmd_table(which: TableKind, opts: &TableOpts, out: Option<PathBuf>, limits: &Limits) -> CliResult<()> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let header: Vec<&str> = match which {
        TableKind::GammaExact => {
            for &k in &opts.ks {
                for &r in &opts.rs {
                    let pair = transition_pair(ChainModel::Bernoulli, k, r, limits)?;
                    let g = gamma_exact_with(&pair, limits)?;
                    rows.push(vec![
                        k.to_string(),
                        r.to_string(),
                        fraction(&g.gamma),
                        to_decimal(&g.gamma, DIGITS),
                    ]);
                }
            }
            vec!["k", "r", "gamma", "gamma_decimal"]
        }
        TableKind::McSummary => {
            for &r in &opts.rs {
                let mut row = vec![r.to_string()];
                for model in [McModel::Bernoulli, McModel::String] {
                    let curve = mc_curve(opts, model, r)?;
                    let fit = fit_extrapolation(&curve, opts.mc_window.0, opts.mc_window.1)?;
                    row.push(format!("{:.5}", fit.gamma_hat));
                    row.push(format!("{:.4}", fit.a_hat));
                }
                rows.push(row);
            }
            vec!["r", "gamma_bernoulli", "a_bernoulli", "gamma_string", "a_string"]
        }
        TableKind::Comparison => {
            let (model, k) = (opts.model, 2);
            for &r in &opts.rs {
                let curve = mc_curve(opts, mc_model(model), r)?;
                let mc = fit_extrapolation(&curve, opts.mc_window.0, opts.mc_window.1)?;
                let exact: Result<ExactCurve, Error> = chain_model(model, k, r, false)
                    .map_err(|f| Error::Unsupported(f.message().to_string()))
                    .and_then(|chain| exact_curve_with(chain, k, r, opts.exact_n_max, limits));
                let (propagated, s_stat) = match &exact {
                    Ok(c) => {
                        let fit = affine_tail_fit(c, opts.exact_window.0, opts.exact_window.1)?;
                        (format!("{:.10}", fit.gamma_hat), format!("{:.3e}", s_statistic(&curve, c)?))
                    }
                    Err(Error::ResourceCap { .. }) | Err(Error::Unsupported(_)) => ("−".into(), "−".into()),
                    Err(e) => return Err(Failure::Other(e.to_string())),
                };
                let exact_gamma = match model {
                    Model::String => or_dash(
                        if r == 1 { gamma_string_exact() } else { Err(Error::Unsupported(String::new())) },
                        |g| fraction(&g.gamma),
                    )?,
                    Model::Bernoulli => or_dash(
                        transition_pair(ChainModel::Bernoulli, k, r, limits)
                            .and_then(|p| gamma_exact_with(&p, limits)),
                        |g| fraction(&g.gamma),
                    )?,
                };
                rows.push(vec![r.to_string(), format!("{:.5}", mc.gamma_hat), propagated, exact_gamma, s_stat]);
            }
            vec!["r", "mc_gamma", "propagated_gamma", "exact_fraction_gamma", "s_statistic"]
        }
    };

    let sink: Box<dyn Write> = match &out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| Failure::Other(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for row in &rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    drop(w);

    if let Some(path) = &out {
        let params = json!({
            "which": format!("{which:?}"), "rs": opts.rs, "ks": opts.ks, "model": model_name(opts.model),
            "trials": opts.trials, "mc_n_max": opts.mc_n_max, "mc_window": [opts.mc_window.0, opts.mc_window.1],
            "exact_n_max": opts.exact_n_max, "exact_window": [opts.exact_window.0, opts.exact_window.1],
        });
        RunManifest::new("table", params, Some(opts.seed)).write_beside(&[path])?;
    }
    Ok(())
}
