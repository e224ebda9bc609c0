//! `sepnmf`: command-line front end for the column-selection LPs, the
//! baselines and the benchmark harness.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sepnmf_core::analysis::{index_recovery, l1_residual_measure};
use sepnmf_core::bench::{emit_plots, run_algorithm, run_benchmark, run_swimmer, Algorithm, BenchConfig};
use sepnmf_core::instances::{gen_example1, gen_swimmer};
use sepnmf_core::lp_build::{
    build_absolute_lp, build_hottopixx, build_relative_lp, build_rho_lp, export_mps, objective_near_one,
    objective_randn,
};
use sepnmf_core::matcore::normalize_columns_l1;
use sepnmf_core::{solve_spec, Engine, Instance, LpModel, Rng, SolveOptions, SyntheticModel};

#[derive(Parser)]
#[command(name = "sepnmf", version, about = "Robust near-separable NMF by linear programming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it to a directory.
    Gen(GenArgs),
    /// Solve one LP on an instance and print the diagonal of X.
    Solve(SolveArgs),
    /// Run one extraction algorithm on an instance.
    Extract(ExtractArgs),
    /// Run a synthetic benchmark sweep.
    Bench(BenchArgs),
    /// Compare algorithms on the swimmer data set.
    Swimmer(SwimmerArgs),
    /// Render SVG plots from a records CSV.
    Plot(PlotArgs),
}

#[derive(Args)]
struct EngineArg {
    /// LP engine: simplex, pdhg or auto.
    #[arg(long, default_value = "auto", value_parser = parse_engine)]
    engine: Engine,
}

fn parse_engine(s: &str) -> std::result::Result<Engine, String> {
    s.parse::<Engine>().map_err(|e| e.to_string())
}

#[derive(Args)]
struct GenArgs {
    /// Data model: one of the six synthetic tags (e.g. `dirichlet_dense`),
    /// `example1` or `swimmer`.
    #[arg(long, default_value = "dirichlet_dense")]
    model: String,
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    r: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance directory written by `gen`.
    instance: PathBuf,
    /// LP model: rho_lp, hottopixx, relative_lp or absolute_lp.
    #[arg(long, default_value = "rho_lp")]
    lp: String,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Noise level; defaults to the instance's own.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Rank for Hottopixx; defaults to the instance's.
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    engine: EngineArg,
    /// Also write the assembled LP in MPS format to this file.
    #[arg(long)]
    mps: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    instance: PathBuf,
    /// Algorithm tag: hottopixx, spa, xray, rho_lp(ρ) or relative_lp(ρ).
    #[arg(long, default_value = "rho_lp(1)")]
    algorithm: String,
    /// Shorthand for `--algorithm rho_lp(<rho>)`.
    #[arg(long, conflicts_with = "algorithm")]
    rho: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    engine: EngineArg,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON configuration; missing fields take the desk-scale defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_engine)]
    engine: Option<Engine>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SwimmerArgs {
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Comma-separated algorithm tags.
    #[arg(long, default_value = "spa,xray,hottopixx,relative_lp(1)")]
    algorithms: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// LP engine; the full swimmer LPs are large, so pdhg is the default.
    #[arg(long, default_value = "pdhg", value_parser = parse_engine)]
    engine: Engine,
    /// Directory for `swimmer.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Records CSV written by `bench`.
    records: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Swimmer(a) => cmd_swimmer(a),
        Command::Plot(a) => cmd_plot(a),
    }
}

fn one_based(k: &[usize]) -> Vec<usize> {
    k.iter().map(|i| i + 1).collect()
}

fn load(dir: &Path) -> Result<Instance> {
    Instance::read_dir(dir).with_context(|| format!("reading instance from {}", dir.display()))
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let inst = match a.model.as_str() {
        "example1" => gen_example1(a.r)?,
        "swimmer" => gen_swimmer(4, 4)?,
        tag => SyntheticModel::from_tag(tag)?.generate(a.m, a.n, a.r, a.epsilon, &mut Rng::new(a.seed))?,
    };
    inst.write_dir(&a.out)?;
    println!(
        "wrote {} x {} instance ({}, r = {}) to {}",
        inst.m(),
        inst.n(),
        a.model,
        inst.r(),
        a.out.display()
    );
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let inst = load(&a.instance)?;
    let model: LpModel = a.lp.parse()?;
    let eps = a.epsilon.unwrap_or(inst.epsilon);
    let r = a.r.unwrap_or(inst.r());
    let n = inst.n();
    let mut rng = Rng::new(a.seed);
    let spec = match model {
        LpModel::Hottopixx => {
            let (mn, _) = normalize_columns_l1(&inst.m_tilde);
            build_hottopixx(&mn, r, eps, &objective_randn(n, &mut rng))?
        }
        LpModel::RhoLp => build_rho_lp(&inst.m_tilde, a.rho, eps, &objective_near_one(n, 1e-3, &mut rng))?,
        LpModel::RelativeLp => {
            build_relative_lp(&inst.m_tilde, a.rho, eps, &objective_near_one(n, 1e-3, &mut rng))?
        }
        LpModel::AbsoluteLp => {
            build_absolute_lp(&inst.m_tilde, a.rho, eps, &objective_near_one(n, 1e-3, &mut rng))?
        }
    };
    if let Some(path) = &a.mps {
        export_mps(&spec.assemble(), path)?;
    }
    let sol = solve_spec(&spec, &SolveOptions::with_engine(a.engine.engine))?;
    println!("status: {}", sol.status.tag());
    println!("objective: {:.10}", sol.objective);
    println!("iterations: {}", sol.stats.iterations);
    let diag: Vec<String> = sol.diag().iter().map(|d| format!("{d:.6}")).collect();
    println!("diag: {}", diag.join(" "));
    if !sol.is_optimal() {
        bail!("solver finished with status {}", sol.status.tag());
    }
    Ok(())
}

fn cmd_extract(a: ExtractArgs) -> Result<()> {
    let inst = load(&a.instance)?;
    let alg = match a.rho {
        Some(rho) => Algorithm::RhoLp { rho },
        None => Algorithm::from_tag(&a.algorithm)?,
    };
    let eps = a.epsilon.unwrap_or(inst.epsilon);
    let r = a.r.unwrap_or(inst.r());
    let out = run_algorithm(
        &alg,
        &inst.m_tilde,
        r,
        eps,
        &SolveOptions::with_engine(a.engine.engine),
        &mut Rng::new(a.seed),
    )?;
    println!("algorithm: {}", alg.tag());
    println!("status: {}", out.status.tag());
    println!("indices: {:?}", one_based(&out.indices));
    if !inst.true_indices.is_empty() {
        println!("index_recovery: {:.4}", index_recovery(&out.indices, &inst.true_indices)?);
    }
    if !out.indices.is_empty() {
        println!("l1_residual: {:.6}", l1_residual_measure(&inst.m_tilde, &out.indices)?);
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            BenchConfig::from_json(&text)?
        }
        None => BenchConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(engine) = a.engine {
        cfg.solver.engine = engine;
    }
    if let Some(out) = a.out {
        cfg.output_dir = out;
    }
    cfg.validate()?;
    let summary = run_benchmark(&cfg)?;
    println!("records: {}", summary.records_path.display());
    println!("model,algorithm,tipping_point");
    for t in &summary.tipping {
        let eps = t.epsilon.map_or("none".to_string(), |e| format!("{e:.5}"));
        println!("{},{},{}", t.model, t.algorithm, eps);
    }
    for path in emit_plots(&summary.records_path, &cfg.output_dir)? {
        println!("plot: {}", path.display());
    }
    Ok(())
}

fn cmd_swimmer(a: SwimmerArgs) -> Result<()> {
    let algs = a
        .algorithms
        .split(',')
        .map(|t| Algorithm::from_tag(t.trim()))
        .collect::<sepnmf_core::Result<Vec<_>>>()?;
    let report = run_swimmer(a.epsilon, &algs, &SolveOptions::with_engine(a.engine), a.seed)?;
    println!("{:<16} {:>8} {:>10} {:>10}  status", "algorithm", "columns", "error", "ms");
    for e in &report.entries {
        println!("{:<16} {:>8} {:>10.4} {:>10.0}  {}", e.algorithm, e.indices.len(), e.error, e.solve_ms, e.status);
    }
    if let Some(dir) = a.out {
        std::fs::create_dir_all(&dir)?;
        let path = dir.join("swimmer.json");
        std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
        println!("report: {}", path.display());
    }
    Ok(())
}

fn cmd_plot(a: PlotArgs) -> Result<()> {
    for path in emit_plots(&a.records, &a.out)? {
        println!("plot: {}", path.display());
    }
    Ok(())
}
