use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use corrspec::corrnet::{compute_gamma, correlation_matrix, signal_power, standardize};
use corrspec::embed::{ase, naive_embed, pca_embed};
use corrspec::harness::config::{Preset, SweepConfig};
use corrspec::harness::{render_plot, render_report, run_sweep, summarize};
use corrspec::io::{read_matrix, write_atomic, write_matrix, CsvHeader};
use corrspec::metrics::evaluate;
use corrspec::synth::{generate_noise, generate_signals, signal_rank};
use corrspec::{
    CorrelationNetwork, Error, Method, NoiseFamily, NoiseSpec, Normalization, Provenance, RowScaling, SignalSpec,
};
use serde_json::json;

/// Correlation-network embeddings of time series: synthetic data,
/// embeddings, evaluation and experiment sweeps.
#[derive(Parser, Debug)]
#[command(name = "corrspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw Fourier-sparse signals and a noisy observation of them.
    Generate(GenerateArgs),
    /// Embed a series matrix or a correlation matrix.
    Embed(EmbedArgs),
    /// Compare an estimate with a target after Procrustes alignment.
    Evaluate(EvaluateArgs),
    /// Run a sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Run one of the built-in experiment presets.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_count)]
    n: usize,
    #[arg(long = "T", value_parser = parse_count)]
    t: usize,
    #[arg(long, value_parser = parse_count)]
    d0: usize,
    #[arg(long, default_value_t = 0.0)]
    nu: f64,
    /// Variance factor for one randomly chosen row.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = FamilyArg::Gaussian)]
    family: FamilyArg,
    #[arg(long, value_enum, default_value_t = ScalingArg::ScaledByRowNorm)]
    row_scaling: ScalingArg,
    #[arg(long, value_enum, default_value_t = NormalizationArg::FrobeniusSqrtN)]
    normalization: NormalizationArg,
    #[arg(long, env = "CORRSPEC_SEED", value_parser = parse_seed, default_value_t = 0)]
    seed: u64,
    /// Directory for `zstar.csv`, `z.csv` and `meta.json`.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Path for the true signals; `.cnm` or `.bin` selects the binary format.
    #[arg(long)]
    zstar_out: Option<PathBuf>,
    #[arg(long)]
    z_out: Option<PathBuf>,
    #[arg(long)]
    meta_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Ase)]
    method: MethodArg,
    /// Embedding dimension (ignored by `naive`).
    #[arg(long, value_parser = parse_count)]
    d: Option<usize>,
    /// How to read the input; `auto` treats a valid correlation matrix as a network.
    #[arg(long, value_enum, default_value_t = InputKind::Auto)]
    input_kind: InputKind,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    estimate: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Center and unit-normalize the rows of the truth before comparing.
    #[arg(long)]
    standardize_truth: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, value_parser = parse_count)]
    workers: Option<usize>,
    /// Master seed override.
    #[arg(long, env = "CORRSPEC_SEED", value_parser = parse_seed)]
    seed: Option<u64>,
    /// Monte Carlo trials per cell override.
    #[arg(long, value_parser = parse_count)]
    trials: Option<usize>,
    /// Skip the SVG plots.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// Preset id.
    #[arg(value_parser = parse_preset)]
    id: Preset,
    /// Use the large grid instead of the reduced default.
    #[arg(long)]
    full: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    Gaussian,
    Laplacian,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScalingArg {
    ScaledByRowNorm,
    Constant,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NormalizationArg {
    FrobeniusSqrtN,
    RowsStandardized,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Ase,
    Pca,
    Naive,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ase => Method::Ase,
            MethodArg::Pca => Method::Pca,
            MethodArg::Naive => Method::Naive,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum InputKind {
    Auto,
    Series,
    Network,
}

/// Integer flag that also accepts integral scientific notation (`2e3`).
fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v >= 0.0 && v.fract() == 0.0 && v <= 9.007_199_254_740_992e15 {
        Ok(v as usize)
    } else {
        Err(format!("'{s}' is not a non-negative integer"))
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    parse_count(s).map(|v| v as u64)
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse::<Preset>().map_err(|e| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) => 2,
        Error::Io { .. } | Error::Parse(_) => 3,
        Error::DegenerateSeries { .. } | Error::RankDeficient { .. } | Error::Numeric { .. } => 4,
        Error::Integrity(_) => 1,
    }
}

fn workers(requested: Option<usize>) -> usize {
    requested
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn generate(a: GenerateArgs) -> corrspec::Result<()> {
    let signals = generate_signals(&SignalSpec {
        n: a.n,
        t: a.t,
        d0: a.d0,
        normalization: match a.normalization {
            NormalizationArg::FrobeniusSqrtN => Normalization::FrobeniusSqrtN,
            NormalizationArg::RowsStandardized => Normalization::RowsStandardized,
        },
        seed: corrspec::rng::split_seed(a.seed, 0),
    })?;
    let noise = generate_noise(
        &signals.zstar,
        &NoiseSpec {
            family: match a.family {
                FamilyArg::Gaussian => NoiseFamily::Gaussian,
                FamilyArg::Laplacian => NoiseFamily::Laplacian,
            },
            nu: a.nu,
            row_scaling: match a.row_scaling {
                ScalingArg::ScaledByRowNorm => RowScaling::ScaledByRowNorm,
                ScalingArg::Constant => RowScaling::Constant,
            },
            inflation: (a.alpha != 1.0).then_some(a.alpha),
            seed: corrspec::rng::split_seed(a.seed, 1),
        },
    )?;
    let z = &signals.zstar + &noise.noise;
    let gamma = if a.nu > 0.0 {
        compute_gamma(&signal_power(&signals.zstar), &noise.nu)?
    } else {
        f64::INFINITY
    };
    let zstar_path = a.zstar_out.unwrap_or_else(|| a.out_dir.join("zstar.csv"));
    let z_path = a.z_out.unwrap_or_else(|| a.out_dir.join("z.csv"));
    let meta_path = a.meta_out.unwrap_or_else(|| a.out_dir.join("meta.json"));
    let meta = json!({
        "n": a.n,
        "T": a.t,
        "d0": a.d0,
        "seed": a.seed,
        "support": signals.support,
        "rank": signal_rank(&signals.zstar)?,
        "redraws": signals.redraws,
        "nu": a.nu,
        "alpha": a.alpha,
        "inflated_row": noise.inflated_row,
        "nu_i": noise.nu,
        "gamma": if gamma.is_finite() { json!(gamma) } else { json!("inf") },
    });
    write_matrix(&zstar_path, &signals.zstar, CsvHeader::ColumnIndices)?;
    write_matrix(&z_path, &z, CsvHeader::ColumnIndices)?;
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    write_atomic(&meta_path, format!("{text}\n").as_bytes())?;
    println!("zstar={}", zstar_path.display());
    println!("z={}", z_path.display());
    println!("meta={}", meta_path.display());
    Ok(())
}

fn embed(a: EmbedArgs) -> corrspec::Result<()> {
    let m = read_matrix(&a.input)?;
    let network = match a.input_kind {
        InputKind::Series => None,
        InputKind::Network => Some(CorrelationNetwork::from_matrix(m.clone(), Provenance::Observed).map_err(|e| {
            Error::Domain(format!("input is not a correlation matrix: {e}"))
        })?),
        InputKind::Auto => CorrelationNetwork::from_matrix(m.clone(), Provenance::Observed).ok(),
    };
    let need_d = || a.d.ok_or_else(|| Error::Domain(format!("--d is required for {}", Method::from(a.method))));
    let emb = match (a.method, network) {
        (MethodArg::Ase, Some(r)) => ase(r.matrix(), need_d()?)?,
        (MethodArg::Ase, None) => ase(correlation_matrix(&m, Provenance::Observed)?.matrix(), need_d()?)?,
        (MethodArg::Pca | MethodArg::Naive, Some(_)) => {
            return Err(Error::Domain(format!(
                "{} needs a time-series matrix, but the input is a correlation matrix (use --input-kind series to override)",
                Method::from(a.method)
            )))
        }
        (MethodArg::Pca, None) => pca_embed(&m, need_d()?)?,
        (MethodArg::Naive, None) => naive_embed(&m)?,
    };
    for w in &emb.warnings {
        eprintln!("warning: {w}");
    }
    write_matrix(&a.out, &emb.x, CsvHeader::Embedding)?;
    println!("method={}", emb.method);
    println!("n={}", emb.n());
    println!("d={}", emb.d());
    println!("out={}", a.out.display());
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> corrspec::Result<()> {
    let est = read_matrix(&a.estimate)?;
    let mut truth = read_matrix(&a.truth)?;
    if a.standardize_truth {
        truth = standardize(&truth)?;
    }
    let e = evaluate(&est, &truth)?;
    println!("error_2inf={}", corrspec::io::fmt_f64(e.error_2inf));
    println!("error_fro={}", corrspec::io::fmt_f64(e.error_fro));
    if let Some(s) = e.sin_theta {
        println!("sin_theta={}", corrspec::io::fmt_f64(s));
    }
    Ok(())
}

fn run(mut cfg: SweepConfig, args: &RunArgs) -> corrspec::Result<()> {
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    let out = &args.out_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.clone(),
        source: e,
    })?;
    let table = run_sweep(&cfg, workers(args.workers))?;
    let csv = out.join(format!("{}.csv", cfg.experiment));
    table.write_csv(&csv, true)?;
    write_atomic(&out.join(format!("{}_config.json", cfg.experiment)), cfg.to_json().as_bytes())?;
    println!("results={}", csv.display());
    let summary = summarize(&table)?;
    if !args.no_plots {
        for p in render_plot(&summary, &cfg.plot, &cfg.experiment, out)? {
            println!("plot={}", p.display());
        }
    }
    print!("{}", render_report(&cfg.experiment, &summary, &cfg.plot));
    Ok(())
}

fn dispatch(cli: Cli) -> corrspec::Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Embed(a) => embed(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Sweep(a) => run(SweepConfig::load(Path::new(&a.config))?, &a.run),
        Command::Reproduce(a) => run(SweepConfig::preset(a.id, a.full), &a.run),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
