//! Command-line surface: classic expansions, path simulation to CSV, and
//! verification suites to JSON reports. Every run writes a manifest that
//! records the resolved configuration, seed, and output files, so any
//! artifact can be reproduced from its manifest alone.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use oppenheim_core::config::ModelConfig;
use oppenheim_core::expansions::{expand, reconstruct, Scheme};
use oppenheim_core::model::OppenheimModel;
use oppenheim_core::mori::{centering, Normalizer};
use oppenheim_core::rational::{format_rational, parse_rational};
use oppenheim_core::sampler::{Backend, PathStream};
use oppenheim_core::stats::{CheckpointRecord, TrimAccumulator};
use oppenheim_core::verify::{run_suite, Suite, VerifyConfig};
use oppenheim_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "oppenheim",
    version,
    about = "Simulation and statistical verification for generalized Oppenheim expansions"
)]
struct Cli {
    /// Worker threads; defaults to OPPENHEIM_THREADS or all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a rational in (0, 1) into series digits.
    Expand {
        /// Expansion scheme: luroth, engel, or sylvester.
        #[arg(long)]
        scheme: String,
        /// The value to expand, as a rational like "3/10".
        #[arg(long)]
        x: String,
        /// Digit budget for non-terminating expansions.
        #[arg(long, default_value_t = 24)]
        max_digits: usize,
    },
    /// Run sample paths and write per-checkpoint statistics as CSV.
    Simulate {
        /// Model description file (TOML).
        #[arg(long)]
        model: PathBuf,
        /// Sampling backend: exact or lattice.
        #[arg(long, default_value = "lattice")]
        backend: String,
        /// Terminal path length.
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        /// Number of independent paths.
        #[arg(long, default_value_t = 30)]
        paths: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Trimming depth r.
        #[arg(long, default_value_t = 2)]
        trim: usize,
        /// Power exponent p for the vanishing statistic.
        #[arg(long, default_value_t = 2.5)]
        power: f64,
        /// Comma-separated checkpoint list; defaults to the decades of n.
        #[arg(long)]
        checkpoints: Option<String>,
        /// Cutoff constant in the centering integral.
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Output directory for checkpoints.csv and manifest.json.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run a verification suite and write a JSON report.
    Verify {
        /// Model description file (TOML).
        #[arg(long)]
        model: PathBuf,
        /// Suite: domination, lattice-identity, joint, independence, th1,
        /// conv, mori, or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value = "lattice")]
        backend: String,
        /// Terminal tracking length.
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long, default_value_t = 30)]
        paths: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        trim: usize,
        #[arg(long, default_value_t = 2.5)]
        power: f64,
        /// Sample count for the distribution-identity suites.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1e-3)]
        significance: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Terminal tolerance for the tracking comparator.
        #[arg(long, default_value_t = 0.2)]
        tolerance: f64,
        #[arg(long)]
        checkpoints: Option<String>,
        /// Output directory for report.json and manifest.json.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Report file path; defaults to <out-dir>/report.json.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_class(&e))
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("OPPENHEIM_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// 2 for configuration problems, 1 for runtime failures.
fn exit_class(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::InvalidConfig(_)) | Some(CoreError::Domain(_)) => 2,
        _ => 1,
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Expand {
            scheme,
            x,
            max_digits,
        } => cmd_expand(&scheme, &x, max_digits),
        Command::Simulate {
            model,
            backend,
            n,
            paths,
            seed,
            trim,
            power,
            checkpoints,
            tau,
            out_dir,
        } => cmd_simulate(SimulateArgs {
            model,
            backend,
            n,
            paths,
            seed,
            trim,
            power,
            checkpoints,
            tau,
            out_dir,
        }),
        Command::Verify {
            model,
            suite,
            backend,
            n,
            paths,
            seed,
            trim,
            power,
            samples,
            significance,
            tau,
            tolerance,
            checkpoints,
            out_dir,
            report,
        } => cmd_verify(VerifyArgs {
            model,
            suite,
            backend,
            n,
            paths,
            seed,
            trim,
            power,
            samples,
            significance,
            tau,
            tolerance,
            checkpoints,
            out_dir,
            report,
        }),
    }
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn load_model(path: &PathBuf) -> Result<(ModelConfig, OppenheimModel)> {
    let text = fs::read_to_string(path).map_err(|e| {
        CoreError::InvalidConfig(format!("cannot read model file {}: {e}", path.display()))
    })?;
    let config = ModelConfig::from_toml_str(&text)?;
    let model = config.build()?;
    Ok((config, model))
}

fn parse_checkpoints(arg: &Option<String>, n: u64) -> Result<Vec<u64>> {
    match arg {
        Some(text) => {
            let mut out = Vec::new();
            for part in text.split(',') {
                let v: u64 = part.trim().parse().map_err(|_| {
                    CoreError::InvalidConfig(format!("bad checkpoint {part:?}"))
                })?;
                out.push(v);
            }
            if out.last() != Some(&n) {
                return Err(CoreError::InvalidConfig(format!(
                    "checkpoints must end at n = {n}"
                ))
                .into());
            }
            Ok(out)
        }
        None => {
            // Decades below n, at most three checkpoints, none below 10.
            let mut out = vec![n];
            let mut c = n;
            while out.len() < 3 && c / 10 >= 10 {
                c /= 10;
                out.push(c);
            }
            out.reverse();
            Ok(out)
        }
    }
}

fn write_manifest(
    out_dir: &Path,
    command: &str,
    started: u64,
    args: Value,
    model: Value,
    outputs: Vec<String>,
    notes: Value,
) -> Result<PathBuf> {
    let manifest = json!({
        "schema_version": 1,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "started_unix": started,
        "finished_unix": now_unix(),
        "args": args,
        "model": model,
        "outputs": outputs,
        "notes": notes,
    });
    let path = out_dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn cmd_expand(scheme: &str, x: &str, max_digits: usize) -> Result<u8> {
    let scheme: Scheme = scheme.parse::<Scheme>().map_err(anyhow::Error::from)?;
    let value = parse_rational(x)?;
    let expansion = expand(scheme, &value, max_digits)?;
    println!("scheme: {}", scheme.name());
    println!("x = {}", format_rational(&value));
    for k in 1..=expansion.digits.len() {
        let partial = reconstruct(scheme, &expansion.digits[..k])?;
        let error = &value - &partial;
        println!(
            "digit {:>3}: {}  partial = {}  error = {}",
            k,
            expansion.digits[k - 1],
            format_rational(&partial),
            format_rational(&error),
        );
    }
    if expansion.terminated {
        println!("terminated: yes ({} digits)", expansion.digits.len());
    } else {
        println!(
            "terminated: no (remainder {} after {} digits)",
            format_rational(&expansion.remainder),
            expansion.digits.len()
        );
    }
    Ok(0)
}

struct SimulateArgs {
    model: PathBuf,
    backend: String,
    n: u64,
    paths: u64,
    seed: u64,
    trim: usize,
    power: f64,
    checkpoints: Option<String>,
    tau: f64,
    out_dir: PathBuf,
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8> {
    let started = now_unix();
    let backend: Backend = args.backend.parse::<Backend>()?;
    let (config, model) = load_model(&args.model)?;
    let checkpoints = parse_checkpoints(&args.checkpoints, args.n)?;
    if checkpoints.is_empty() || checkpoints[0] < 2 {
        return Err(CoreError::InvalidConfig("checkpoints must start at 2 or later".into()).into());
    }
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::InvalidConfig("checkpoints must strictly increase".into()).into());
    }
    if args.trim == 0 {
        return Err(CoreError::InvalidConfig("trim depth must be >= 1".into()).into());
    }
    if !(args.power > 0.0) {
        return Err(CoreError::InvalidConfig("power must be positive".into()).into());
    }
    if backend == Backend::Exact {
        if let Some(limit) = model.exact_envelope() {
            if args.n > limit {
                return Err(CoreError::EnvelopeExceeded {
                    requested: args.n,
                    limit,
                    hint: "switch to the lattice backend for long chains".into(),
                }
                .into());
            }
        }
    }

    let norm = Normalizer::new();
    let centerings: Vec<f64> = checkpoints
        .iter()
        .map(|&n| match model.dist().identical_kind() {
            Ok(kind) => centering(n, kind, args.tau).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        })
        .collect();

    let model = Arc::new(model);
    let per_path: Vec<std::result::Result<Vec<CheckpointRecord>, CoreError>> = (0..args.paths)
        .into_par_iter()
        .map(|path_id| {
            let mut stream = PathStream::spawn(model.clone(), backend, args.seed, path_id);
            let mut acc = TrimAccumulator::new(args.trim)?;
            let mut records = Vec::with_capacity(checkpoints.len());
            let mut next = 0usize;
            for n in 1..=args.n {
                let value = match backend {
                    Backend::Exact => stream.next()?.ratio_f64(),
                    Backend::Lattice => stream.next_lattice()? as f64,
                };
                acc.observe(value)?;
                if n == checkpoints[next] {
                    records.push(CheckpointRecord::from_accumulator(
                        &acc,
                        path_id,
                        &norm,
                        args.power,
                        centerings[next],
                    )?);
                    next += 1;
                    if next == checkpoints.len() {
                        break;
                    }
                }
            }
            Ok(records)
        })
        .collect();

    let mut csv = String::from(CheckpointRecord::csv_header());
    csv.push('\n');
    let mut rows = 0u64;
    let mut first_error: Option<CoreError> = None;
    for result in per_path {
        match result {
            Ok(records) => {
                for record in records {
                    csv.push_str(&record.to_csv_row());
                    csv.push('\n');
                    rows += 1;
                }
            }
            Err(e) => {
                if first_error.is_none() {
                    first_error = Some(e);
                }
            }
        }
    }

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let csv_path = args.out_dir.join("checkpoints.csv");
    fs::write(&csv_path, &csv).with_context(|| format!("writing {}", csv_path.display()))?;

    let args_echo = json!({
        "backend": backend.name(),
        "n": args.n,
        "paths": args.paths,
        "seed": args.seed,
        "trim": args.trim,
        "power": args.power,
        "checkpoints": checkpoints,
        "tau": args.tau,
    });
    let model_echo = json!({
        "path": args.model.display().to_string(),
        "config": config.echo_json(),
    });
    let notes = match &first_error {
        Some(e) => json!({ "partial": true, "error": e.to_string() }),
        None => json!({ "partial": false }),
    };
    write_manifest(
        &args.out_dir,
        "simulate",
        started,
        args_echo,
        model_echo,
        vec!["checkpoints.csv".into()],
        notes,
    )?;

    println!(
        "wrote {rows} checkpoint rows for {} paths to {}",
        args.paths,
        csv_path.display()
    );
    match first_error {
        Some(e) => {
            eprintln!("error: {e} (partial output flagged in the manifest)");
            Ok(1)
        }
        None => Ok(0),
    }
}

struct VerifyArgs {
    model: PathBuf,
    suite: String,
    backend: String,
    n: u64,
    paths: u64,
    seed: u64,
    trim: usize,
    power: f64,
    samples: u64,
    significance: f64,
    tau: f64,
    tolerance: f64,
    checkpoints: Option<String>,
    out_dir: PathBuf,
    report: Option<PathBuf>,
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let started = now_unix();
    let suite: Suite = args.suite.parse::<Suite>()?;
    let backend: Backend = args.backend.parse::<Backend>()?;
    let (config, model) = load_model(&args.model)?;
    let checkpoints = parse_checkpoints(&args.checkpoints, args.n)?;
    let cfg = VerifyConfig {
        backend,
        checkpoints,
        paths: args.paths,
        r: args.trim,
        p: args.power,
        seed: args.seed,
        samples: args.samples,
        significance: args.significance,
        tau: args.tau,
        terminal_tolerance: args.tolerance,
    };
    cfg.validate()?;
    let model = Arc::new(model);
    let report = run_suite(&model, suite, &cfg)?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.out_dir.join("report.json"));
    fs::write(
        &report_path,
        serde_json::to_string_pretty(&report)? + "\n",
    )
    .with_context(|| format!("writing {}", report_path.display()))?;

    let model_echo = json!({
        "path": args.model.display().to_string(),
        "config": config.echo_json(),
    });
    write_manifest(
        &args.out_dir,
        "verify",
        started,
        json!({
            "suite": suite.name(),
            "config": serde_json::to_value(&cfg)?,
        }),
        model_echo,
        vec![report_path.display().to_string()],
        json!({}),
    )?;

    for test in &report.tests {
        println!(
            "TEST {}: {}",
            test.name,
            if test.pass { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "VERDICT: {} ({} tests, {:.1}s) -> {}",
        report.verdict,
        report.tests.len(),
        report.runtime_seconds,
        report_path.display()
    );
    Ok(if report.passed() { 0 } else { 1 })
}
