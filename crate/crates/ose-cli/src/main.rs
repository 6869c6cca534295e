//! `ose`: generate sketching matrices, check subspace embeddings against the
//! hard distributions, run the adversarial pair finder, and drive threshold
//! sweeps — all reproducible from a 64-bit seed.
//!
//! Exit status: 0 on success, 1 on parse/precondition errors, 2 on
//! infeasible parameter combinations. Every data output embeds the fully
//! resolved configuration in a `# config ...` header; files are written to a
//! temp path and renamed so failed runs leave nothing behind.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use ose_core::adversary::{anticoncentration_prob, build_witness, find_colliding_pairs,
    find_colliding_pairs_general};
use ose_core::constructions::{gen_gaussian, ConstructionKind, ConstructionSpec};
use ose_core::embedcheck::{estimate_failure_prob, HardFamily};
use ose_core::error::Error as CoreError;
use ose_core::experiments::{
    collision_pair_stats, demo_hadamard_tightness, heavy_entry_audit, threshold_sweep, MGrid,
    SweepConfig,
};
use ose_core::formats;
use ose_core::hardinstances::sample_d_beta;
use ose_core::sparsemat::SketchMatrix;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser, Serialize)]
#[command(name = "ose", version, about = "sparse oblivious subspace embedding toolkit")]
struct Cli {
    /// Cap on worker threads (outputs do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
enum Command {
    /// Generate a sketching matrix and write it as OSE1 (or OSE1D).
    Gen(GenArgs),
    /// Estimate the embedding failure probability of a sketch file.
    Check(CheckArgs),
    /// Find colliding good column pairs and emit a witness certificate.
    Adversary(AdversaryArgs),
    /// Threshold sweep over a grid of target dimensions, with scaling fits.
    Sweep(SweepArgs),
    /// Heavy-entry ladder audit of a sketch file.
    Audit(AuditArgs),
    /// Block-Hadamard zero-distortion demonstration.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum KindArg {
    Countsketch,
    Osnap,
    Gaussian,
    #[value(alias = "hadamard_block")]
    Hadamard,
}

impl From<KindArg> for ConstructionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Countsketch => ConstructionKind::CountSketch,
            KindArg::Osnap => ConstructionKind::Osnap,
            KindArg::Gaussian => ConstructionKind::Gaussian,
            KindArg::Hadamard => ConstructionKind::HadamardBlock,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum FamilyArg {
    #[value(alias = "d_beta")]
    Dbeta,
    #[value(alias = "mix_s1")]
    MixS1,
    #[value(alias = "mix_general")]
    MixGeneral,
}

impl FamilyArg {
    fn resolve(self, r: usize) -> HardFamily {
        match self {
            FamilyArg::Dbeta => HardFamily::DBeta { r },
            FamilyArg::MixS1 => HardFamily::MixS1,
            FamilyArg::MixGeneral => HardFamily::MixGeneral,
        }
    }
}

/// Accepts plain decimals and exact fractions like `1/32`.
fn parse_real(text: &str) -> Result<f64, String> {
    if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| format!("bad numerator {num:?}"))?;
        let den: f64 = den.trim().parse().map_err(|_| format!("bad denominator {den:?}"))?;
        if den == 0.0 {
            return Err("zero denominator".into());
        }
        Ok(num / den)
    } else {
        text.parse().map_err(|_| format!("bad real {text:?}"))
    }
}

#[derive(Debug, Args, Serialize)]
struct GenArgs {
    #[arg(long)]
    kind: KindArg,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Column sparsity (osnap only).
    #[arg(long, default_value_t = 1)]
    s: usize,
    /// Distortion parameter (hadamard only; accepts fractions like 1/32).
    #[arg(long, value_parser = parse_real)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct CheckArgs {
    /// Input sketch (OSE1 or OSE1D).
    #[arg(long)]
    sketch: PathBuf,
    #[arg(long)]
    family: FamilyArg,
    /// Block size for the dbeta family (power of two).
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, value_parser = parse_real)]
    eps: f64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct AdversaryArgs {
    #[arg(long)]
    sketch: PathBuf,
    #[arg(long)]
    d: usize,
    #[arg(long, value_parser = parse_real)]
    eps: f64,
    /// Collision-rate cutoff constant.
    #[arg(long, value_parser = parse_real, default_value = "3")]
    eta: f64,
    /// Run the rescaled variant with heaviness level ell, block level ell-prime.
    #[arg(long, default_value_t = false)]
    general: bool,
    #[arg(long, default_value_t = 1)]
    ell: u32,
    #[arg(long, default_value_t = 0)]
    ell_prime: u32,
    /// Monte Carlo budget for anti-concentration above the exhaustive cap.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Optional line-per-event trace dump.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Use a stored OSEINST instance instead of sampling one.
    #[arg(long)]
    inst: Option<PathBuf>,
    /// Write the instance that was analyzed as OSEINST.
    #[arg(long)]
    inst_out: Option<PathBuf>,
    /// Also summarize pair statistics over this many instance seeds.
    #[arg(long, default_value_t = 0)]
    stat_runs: u64,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    #[arg(long)]
    kind: KindArg,
    #[arg(long, default_value_t = 1)]
    s: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_real, required = true)]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_real, required = true)]
    delta: Vec<f64>,
    /// Explicit grid of target dimensions (overrides the geometric spec).
    #[arg(long, value_delimiter = ',')]
    m_grid: Option<Vec<usize>>,
    #[arg(long)]
    m_lo: Option<usize>,
    #[arg(long)]
    m_hi: Option<usize>,
    #[arg(long, value_parser = parse_real, default_value = "1.3")]
    m_factor: f64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value = "dbeta")]
    family: FamilyArg,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Cap the auto-sized ambient dimension.
    #[arg(long)]
    n_cap: Option<usize>,
    #[arg(long, default_value_t = false)]
    force_large_n: bool,
    /// CSV output; the JSON summary lands next to it with a .json extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct AuditArgs {
    #[arg(long)]
    sketch: PathBuf,
    #[arg(long, value_parser = parse_real)]
    eps: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct DemoArgs {
    #[arg(long, value_parser = parse_real)]
    eps: f64,
    #[arg(long)]
    d: usize,
    /// Target dimension (a multiple of both d*d and the block order works).
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_real, default_value = "0.05")]
    delta: f64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

enum CliError {
    Core(CoreError),
    Io(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

fn io_err<'a, E: std::fmt::Display>(
    what: &'a str,
    path: &'a Path,
) -> impl Fn(E) -> CliError + 'a {
    move |e| CliError::Io(format!("{what} {}: {e}", path.display()))
}

/// Write-then-rename so validation failures never leave partial files.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).map_err(io_err("writing", &tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err("renaming to", path))?;
    Ok(())
}

fn read_sketch(path: &Path) -> Result<SketchMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err("reading", path))?;
    if text.trim_start().starts_with("OSE1D") {
        let dense = formats::parse_dense(&text)?;
        // dense matrices check as fully populated sparse columns
        let columns = (0..dense.cols())
            .map(|c| {
                (0..dense.rows())
                    .filter_map(|r| {
                        let v = dense.get(r, c);
                        (v != 0.0).then_some((r, v))
                    })
                    .collect()
            })
            .collect();
        Ok(SketchMatrix::new(dense.rows(), dense.cols(), dense.rows(), columns)?)
    } else {
        Ok(formats::parse_sketch(&text)?)
    }
}

fn config_header(cli: &Cli) -> String {
    let json = serde_json::to_string(&cli.command).expect("config serializes");
    let threads = cli
        .threads
        .map(|t| t.to_string())
        .unwrap_or_else(|| "auto".into());
    format!("# config {json}\n# threads {threads}\n")
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen(args) => {
            let spec = ConstructionSpec {
                kind: args.kind.into(),
                m: args.m,
                n: args.n,
                s: args.s,
                eps: args.eps.unwrap_or(0.0),
                seed: args.seed,
            };
            spec.validate()?;
            let text = match spec.kind {
                ConstructionKind::Gaussian => {
                    formats::encode_dense(&gen_gaussian(args.m, args.n, args.seed)?)
                }
                _ => {
                    let pi = ose_core::constructions::ColumnSampler::new(spec)?.materialize()?;
                    formats::encode_sketch(&pi)
                }
            };
            write_atomic(&args.out, &text)?;
            println!("{}", config_header(cli).trim_end().replace('\n', " | "));
            Ok(())
        }
        Command::Check(args) => {
            let pi = read_sketch(&args.sketch)?;
            let family = args.family.resolve(args.r);
            let est =
                estimate_failure_prob(&pi, family, args.d, args.eps, args.trials, args.seed)?;
            let mut out = config_header(cli);
            let _ = writeln!(out, "{}", formats::ESTIMATE_CSV_HEADER);
            let _ = writeln!(
                out,
                "{}",
                formats::estimate_csv_row(
                    pi.rows(),
                    pi.cols(),
                    args.d,
                    &family.csv_token(),
                    args.eps,
                    &est,
                    args.seed,
                )
            );
            write_atomic(&args.out, &out)
        }
        Command::Adversary(args) => {
            let pi = read_sketch(&args.sketch)?;
            let r = if args.general { 1usize << args.ell_prime } else { 1 };
            let inst = match &args.inst {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(io_err("reading", path))?;
                    let inst = formats::parse_instance(&text)?;
                    if inst.n() != pi.cols() || inst.d() != args.d || inst.r() != r {
                        return Err(CoreError::DimensionMismatch(format!(
                            "stored instance is (n={}, d={}, r={}), run expects (n={}, d={}, r={r})",
                            inst.n(),
                            inst.d(),
                            inst.r(),
                            pi.cols(),
                            args.d
                        ))
                        .into());
                    }
                    inst
                }
                None => sample_d_beta(pi.cols(), args.d, r, args.seed)?,
            };
            if let Some(path) = &args.inst_out {
                write_atomic(path, &formats::encode_instance(&inst))?;
            }
            let finding = if args.general {
                find_colliding_pairs_general(
                    &pi, &inst, args.eps, args.ell, args.ell_prime, args.eta, args.seed,
                )?
            } else {
                find_colliding_pairs(&pi, &inst, args.eps, args.eta, args.seed)?
            };

            let mut out = config_header(cli);
            let _ = writeln!(out, "good_columns: {}", finding.good_column_count);
            let _ = writeln!(out, "good_selectors: {}", finding.good_selector_count);
            let _ = writeln!(out, "budget: {}", finding.params.budget);
            let _ = writeln!(out, "pairs_found: {}", finding.pairs.len());
            for (i, (a, b)) in finding.pairs.iter().enumerate() {
                let _ = writeln!(out, "pair_{i}: {a} {b}");
            }
            if let Some(&(a, b)) = finding.pairs.first() {
                let mut cert = build_witness(&pi, &inst, a, b, finding.params.theta)?;
                anticoncentration_prob(&pi, &inst, &mut cert, args.eps, args.trials, args.seed)?;
                out.push_str(&formats::certificate_text(&cert, finding.trace.len()));
            }
            if args.stat_runs > 0 && !args.general {
                let seeds: Vec<u64> = (0..args.stat_runs).map(|i| args.seed ^ i).collect();
                let stats =
                    collision_pair_stats(&pi, &seeds, args.d, args.eps, args.eta, 3.0)?;
                let _ = writeln!(out, "stat_runs: {}", stats.runs);
                let _ = writeln!(out, "stat_success_fraction: {}", stats.success_fraction);
                let _ = writeln!(
                    out,
                    "stat_mean_shared_heavy_rows: {}",
                    stats
                        .mean_shared_heavy_rows
                        .map(|v| v.to_string())
                        .unwrap_or_else(|| "none".into())
                );
                let _ = writeln!(
                    out,
                    "stat_population_shared_heavy_rows: {}",
                    stats
                        .population_shared_heavy_rows
                        .map(|v| v.to_string())
                        .unwrap_or_else(|| "none".into())
                );
            }
            if let Some(trace_path) = &args.trace_out {
                write_atomic(trace_path, &formats::trace_lines(&finding.trace))?;
            }
            write_atomic(&args.out, &out)
        }
        Command::Sweep(args) => {
            let m_grid = match (&args.m_grid, args.m_lo, args.m_hi) {
                (Some(grid), _, _) => MGrid::Explicit(grid.clone()),
                (None, Some(lo), Some(hi)) => {
                    MGrid::Geometric { lo, hi, factor: args.m_factor }
                }
                _ => {
                    return Err(CoreError::InvalidParameter(
                        "provide --m-grid or both --m-lo and --m-hi".into(),
                    )
                    .into())
                }
            };
            let cfg = SweepConfig {
                kind: args.kind.into(),
                s: args.s,
                d_list: args.d.clone(),
                eps_list: args.eps.clone(),
                delta_list: args.delta.clone(),
                m_grid,
                trials_per_point: args.trials,
                family: args.family.resolve(args.r),
                seed: args.seed,
                n_cap: args.n_cap,
                force_large_n: args.force_large_n,
            };
            let result = threshold_sweep(&cfg)?;

            let mut csv = config_header(cli);
            let _ = writeln!(csv, "{}", formats::ESTIMATE_CSV_HEADER);
            for row in &result.rows {
                let _ = writeln!(
                    csv,
                    "{}",
                    formats::estimate_csv_row(
                        row.m,
                        row.n,
                        row.d,
                        &cfg.family.csv_token(),
                        row.eps,
                        &row.estimate,
                        args.seed,
                    )
                );
            }
            write_atomic(&args.out, &csv)?;

            let summary = serde_json::json!({
                "config": &cli.command,
                "m_star": result.thresholds,
                "fit": result.fit,
            });
            let json_path = args.out.with_extension("json");
            write_atomic(&json_path, &format!("{summary:#}\n"))
        }
        Command::Audit(args) => {
            let pi = read_sketch(&args.sketch)?;
            let report = heavy_entry_audit(&pi, args.eps)?;
            let mut out = config_header(cli);
            let _ = writeln!(out, "ell,theta,avg_heavy");
            for row in &report.rows {
                let _ = writeln!(out, "{},{},{}", row.ell, row.theta, row.avg_heavy);
            }
            let _ = writeln!(out, "# ladder_depth {}", report.ladder_depth);
            let _ = writeln!(out, "# pi_prime_columns {}", report.pi_prime_columns);
            let _ = writeln!(out, "# pi_prime_empty {}", report.pi_prime_empty);
            let _ = writeln!(out, "# implied_sq_norm_bound {}", report.implied_sq_norm_bound);
            let _ = writeln!(out, "# actual_avg_sq_norm {}", report.actual_avg_sq_norm);
            write_atomic(&args.out, &out)
        }
        Command::Demo(args) => {
            let report =
                demo_hadamard_tightness(args.eps, args.d, args.m, args.n, args.delta, args.trials, args.seed)?;
            let mut out = config_header(cli);
            let _ = writeln!(out, "{}", formats::ESTIMATE_CSV_HEADER);
            let _ = writeln!(
                out,
                "{}",
                formats::estimate_csv_row(
                    args.m,
                    args.n,
                    args.d,
                    "1",
                    args.eps,
                    &report.estimate,
                    args.seed,
                )
            );
            let _ = writeln!(out, "# distortion_tolerance {}", report.distortion_tolerance);
            let _ = writeln!(out, "# max_eps_effective {}", report.max_eps_effective);
            let _ = writeln!(
                out,
                "# exact_duplicate_prob {}",
                report
                    .exact_duplicate_prob
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "n/a".into())
            );
            let _ = writeln!(out, "# delta {}", report.delta);
            let _ = writeln!(out, "# within_delta {}", report.within_delta);
            write_atomic(&args.out, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first_line = e.to_string().lines().next().unwrap_or("bad arguments").to_string();
            eprintln!("error: {first_line}");
            return ExitCode::from(1);
        }
    };
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Core(CoreError::Infeasible(_)) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
