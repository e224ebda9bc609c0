//! Experiment harness: noise sweeps over the synthetic data models, the
//! swimmer comparison and SVG line charts of the results.
//!
//! Records are written to `records.csv` with the header
//! `model,epsilon,trial,seed,algorithm,index_recovery,l1_residual,solve_ms,status`.
//! Besides one row per (model, ε, trial, algorithm) the file holds one
//! `true_k` row per instance: the residual measure of the planted index set,
//! drawn as the reference line of the plots.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{index_recovery, l1_residual_measure};
use crate::baselines::{spa, xray_max};
use crate::error::{pre_err, Error, Result};
use crate::extract::{extract_hybrid, extract_threshold};
use crate::instances::{gen_swimmer, Instance, SyntheticModel};
use crate::lp_build::{
    build_absolute_lp, build_hottopixx, build_relative_lp, nonzero_columns, objective_near_one, objective_randn,
};
use crate::lp_solve::{solve_spec, SolveOptions, Status};
use crate::matcore::{derive_seed, normalize_columns_l1, DenseMatrix, Rng};
use crate::nnls::nnls_fro;

pub const CSV_HEADER: &str = "model,epsilon,trial,seed,algorithm,index_recovery,l1_residual,solve_ms,status";

/// Algorithm tag of the planted-index reference rows.
pub const TRUE_K: &str = "true_k";

/// Mean recovery at or above this counts as recovered.
pub const TIPPING_LEVEL: f64 = 0.99;

/// Spread of the positive LP objective around one.
const P_SPREAD: f64 = 1e-3;

/// One extraction algorithm of the comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Algorithm {
    /// Trace-constrained LP on column-normalized data, hybrid extraction.
    Hottopixx,
    Spa,
    Xray,
    /// Rank-free LP with absolute error `rho * eps` on the raw data.
    RhoLp { rho: f64 },
    /// Rank-free LP with per-column relative error (swimmer only).
    RelativeLp { rho: f64 },
}

impl Algorithm {
    pub fn tag(&self) -> String {
        match self {
            Algorithm::Hottopixx => "hottopixx".into(),
            Algorithm::Spa => "spa".into(),
            Algorithm::Xray => "xray".into(),
            Algorithm::RhoLp { rho } => format!("rho_lp({rho})"),
            Algorithm::RelativeLp { rho } => format!("relative_lp({rho})"),
        }
    }

    /// Inverse of [`Algorithm::tag`]; `rho_lp` alone means ρ = 1.
    pub fn from_tag(tag: &str) -> Result<Self> {
        let parse_rho = |rest: &str| -> Result<f64> {
            if rest.is_empty() {
                return Ok(1.0);
            }
            let inner = rest
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| Error::Precondition(format!("malformed algorithm tag `{tag}`")))?;
            inner.parse::<f64>().map_err(|_| Error::Precondition(format!("bad rho in `{tag}`")))
        };
        match tag {
            "hottopixx" => Ok(Algorithm::Hottopixx),
            "spa" => Ok(Algorithm::Spa),
            "xray" => Ok(Algorithm::Xray),
            t if t.starts_with("rho_lp") => Ok(Algorithm::RhoLp { rho: parse_rho(&t[6..])? }),
            t if t.starts_with("relative_lp") => Ok(Algorithm::RelativeLp { rho: parse_rho(&t[11..])? }),
            other => pre_err(format!("unknown algorithm `{other}`")),
        }
    }

    fn is_lp(&self) -> bool {
        !matches!(self, Algorithm::Spa | Algorithm::Xray)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    /// Data model tags such as `dirichlet_dense`.
    pub models: Vec<String>,
    pub eps_grid: Vec<f64>,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    pub solver: SolveOptions,
    pub seed: u64,
    pub output_dir: PathBuf,
}

/// `count` points from `lo` to `hi`, evenly spaced in log scale.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect()
}

impl Default for BenchConfig {
    /// Desk scale: 20 x 40, rank 5, ten trials, twelve noise levels.
    fn default() -> Self {
        Self {
            m: 20,
            n: 40,
            r: 5,
            models: SyntheticModel::ALL.iter().map(|m| m.tag()).collect(),
            eps_grid: log_grid(1e-4, 0.5, 12),
            trials: 10,
            algorithms: vec![
                Algorithm::Hottopixx,
                Algorithm::Spa,
                Algorithm::Xray,
                Algorithm::RhoLp { rho: 1.0 },
                Algorithm::RhoLp { rho: 2.0 },
            ],
            solver: SolveOptions::default(),
            seed: 0,
            output_dir: PathBuf::from("bench_out"),
        }
    }
}

impl BenchConfig {
    /// 50 x 100, rank 10, 25 trials. Each LP has 15 000 variables.
    pub fn full_scale() -> Self {
        Self { m: 50, n: 100, r: 10, trials: 25, ..Self::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: BenchConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return pre_err("trials must be at least 1");
        }
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return pre_err("the noise grid must be nonempty, finite and nonnegative");
        }
        if self.eps_grid.windows(2).any(|w| w[0] >= w[1]) {
            return pre_err("the noise grid must be strictly increasing");
        }
        if self.r == 0 || self.r > self.n || self.r > self.m {
            return pre_err(format!("rank {} incompatible with {} x {}", self.r, self.m, self.n));
        }
        if self.algorithms.is_empty() {
            return pre_err("no algorithms selected");
        }
        for a in &self.algorithms {
            if let Algorithm::RhoLp { rho } | Algorithm::RelativeLp { rho } = a {
                if !(*rho > 0.0 && rho.is_finite()) {
                    return pre_err(format!("{} needs a positive rho", a.tag()));
                }
            }
        }
        for t in &self.models {
            SyntheticModel::from_tag(t)?;
        }
        Ok(())
    }

    pub fn num_instances(&self) -> usize {
        self.models.len() * self.eps_grid.len() * self.trials
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub model: String,
    pub epsilon: f64,
    pub trial: usize,
    pub seed: u64,
    pub algorithm: String,
    pub index_recovery: f64,
    pub l1_residual: f64,
    pub solve_ms: f64,
    pub status: String,
}

fn tag_hash(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x1000_0000_01b3))
}

/// Seed of the instance `(model, epsilon, trial)` of a sweep.
pub fn instance_seed(base: u64, model: &str, epsilon: f64, trial: usize) -> u64 {
    derive_seed(base, &[tag_hash(model), epsilon.to_bits(), trial as u64])
}

/// Index set found by one algorithm and the status of its LP, if any.
pub struct RunOutcome {
    pub indices: Vec<usize>,
    pub status: Status,
    pub lp_iterations: usize,
}

/// Runs one algorithm with the benchmark conventions. `r` is used by the
/// baselines and by hybrid post-processing.
pub fn run_algorithm(
    alg: &Algorithm,
    m_tilde: &DenseMatrix,
    r: usize,
    epsilon: f64,
    solver: &SolveOptions,
    rng: &mut Rng,
) -> Result<RunOutcome> {
    let n = m_tilde.cols();
    let done = |indices| Ok(RunOutcome { indices, status: Status::Optimal, lp_iterations: 0 });
    match alg {
        Algorithm::Spa => done(spa(&normalize_columns_l1(m_tilde).0, r)?.indices),
        Algorithm::Xray => done(xray_max(m_tilde, r, rng)?.indices),
        Algorithm::Hottopixx => {
            let (mn, _) = normalize_columns_l1(m_tilde);
            let p = objective_randn(n, rng);
            let sol = solve_spec(&build_hottopixx(&mn, r, epsilon, &p)?, solver)?;
            let k = extract_hybrid(&mn, &sol.diag(), epsilon, r)?;
            Ok(RunOutcome { indices: k.indices, status: sol.status, lp_iterations: sol.stats.iterations })
        }
        Algorithm::RhoLp { rho } => {
            let p = objective_near_one(n, P_SPREAD, rng);
            let sol = solve_spec(&build_absolute_lp(m_tilde, *rho, epsilon, &p)?, solver)?;
            let k = extract_hybrid(m_tilde, &sol.diag(), epsilon, r)?;
            Ok(RunOutcome { indices: k.indices, status: sol.status, lp_iterations: sol.stats.iterations })
        }
        Algorithm::RelativeLp { rho } => {
            let p = objective_near_one(n, P_SPREAD, rng);
            let sol = solve_spec(&build_relative_lp(m_tilde, *rho, epsilon, &p)?, solver)?;
            let k = extract_hybrid(m_tilde, &sol.diag(), epsilon, r)?;
            Ok(RunOutcome { indices: k.indices, status: sol.status, lp_iterations: sol.stats.iterations })
        }
    }
}

fn evaluate_instance(cfg: &BenchConfig, model: &str, epsilon: f64, trial: usize) -> Vec<BenchRecord> {
    let seed = instance_seed(cfg.seed, model, epsilon, trial);
    let record = |algorithm: String, rec: f64, res: f64, ms: f64, status: &str| BenchRecord {
        model: model.to_string(),
        epsilon,
        trial,
        seed,
        algorithm,
        index_recovery: rec,
        l1_residual: res,
        solve_ms: ms,
        status: status.to_string(),
    };
    let inst: Instance = match SyntheticModel::from_tag(model)
        .and_then(|sm| sm.generate(cfg.m, cfg.n, cfg.r, epsilon, &mut Rng::new(seed)))
    {
        Ok(inst) => inst,
        Err(_) => {
            return cfg.algorithms.iter().map(|a| record(a.tag(), 0.0, 0.0, 0.0, "generation_error")).collect();
        }
    };
    let mut out = Vec::with_capacity(cfg.algorithms.len() + 1);
    for alg in &cfg.algorithms {
        let tag = alg.tag();
        let mut rng = Rng::new(derive_seed(seed, &[tag_hash(&tag)]));
        let t0 = Instant::now();
        let outcome = run_algorithm(alg, &inst.m_tilde, cfg.r, epsilon, &cfg.solver, &mut rng);
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        let row = match outcome {
            Ok(o) => {
                let rec = index_recovery(&o.indices, &inst.true_indices).unwrap_or(0.0);
                let res = if o.indices.is_empty() { Ok(0.0) } else { l1_residual_measure(&inst.m_tilde, &o.indices) };
                let status = if alg.is_lp() { o.status.tag() } else { "ok" };
                match res {
                    Ok(res) => record(tag, rec, res, ms, status),
                    Err(_) => record(tag, rec, 0.0, ms, "metric_error"),
                }
            }
            Err(_) => record(tag, 0.0, 0.0, ms, "solver_error"),
        };
        out.push(row);
    }
    let reference = l1_residual_measure(&inst.m_tilde, &inst.true_indices);
    out.push(match reference {
        Ok(res) => record(TRUE_K.into(), 1.0, res, 0.0, "ok"),
        Err(_) => record(TRUE_K.into(), 1.0, 0.0, 0.0, "metric_error"),
    });
    out
}

/// Mean measures of one (model, ε, algorithm) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub model: String,
    pub epsilon: f64,
    pub algorithm: String,
    pub runs: usize,
    pub index_recovery: f64,
    pub l1_residual: f64,
    pub solve_ms: f64,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TippingPoint {
    pub model: String,
    pub algorithm: String,
    /// Largest grid level up to which every level has mean recovery of at
    /// least [`TIPPING_LEVEL`]; `None` when the smallest level already fails.
    pub epsilon: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BenchSummary {
    pub records: Vec<BenchRecord>,
    pub means: Vec<MeanRow>,
    pub tipping: Vec<TippingPoint>,
    pub records_path: PathBuf,
}

impl BenchSummary {
    pub fn tipping_point(&self, model: &str, algorithm: &str) -> Option<f64> {
        self.tipping.iter().find(|t| t.model == model && t.algorithm == algorithm).and_then(|t| t.epsilon)
    }
}

fn is_failure(status: &str) -> bool {
    !(status == "ok" || status == "optimal")
}

/// Means per (model, ε, algorithm) in first-appearance order.
pub fn mean_rows(records: &[BenchRecord]) -> Vec<MeanRow> {
    let mut order: Vec<(String, u64, String)> = Vec::new();
    let mut acc: BTreeMap<(String, u64, String), MeanRow> = BTreeMap::new();
    for r in records {
        let key = (r.model.clone(), r.epsilon.to_bits(), r.algorithm.clone());
        let row = acc.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            MeanRow {
                model: r.model.clone(),
                epsilon: r.epsilon,
                algorithm: r.algorithm.clone(),
                runs: 0,
                index_recovery: 0.0,
                l1_residual: 0.0,
                solve_ms: 0.0,
                failures: 0,
            }
        });
        row.runs += 1;
        row.index_recovery += r.index_recovery;
        row.l1_residual += r.l1_residual;
        row.solve_ms += r.solve_ms;
        row.failures += is_failure(&r.status) as usize;
    }
    order
        .into_iter()
        .map(|k| {
            let mut row = acc.remove(&k).expect("key recorded");
            let c = row.runs as f64;
            row.index_recovery /= c;
            row.l1_residual /= c;
            row.solve_ms /= c;
            row
        })
        .collect()
}

/// Tipping point of every (model, algorithm) pair: the largest noise level
/// whose mean index recovery is at least [`TIPPING_LEVEL`]. Reference rows
/// are excluded.
pub fn tipping_points(means: &[MeanRow]) -> Vec<TippingPoint> {
    let mut groups: Vec<((String, String), Vec<(f64, f64)>)> = Vec::new();
    for row in means.iter().filter(|r| r.algorithm != TRUE_K) {
        let key = (row.model.clone(), row.algorithm.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push((row.epsilon, row.index_recovery)),
            None => groups.push((key, vec![(row.epsilon, row.index_recovery)])),
        }
    }
    groups
        .into_iter()
        .map(|((model, algorithm), mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let epsilon = pts.iter().filter(|(_, rec)| *rec >= TIPPING_LEVEL).last().map(|(e, _)| *e);
            TippingPoint { model, algorithm, epsilon }
        })
        .collect()
}

fn record_key(r: &BenchRecord) -> (String, u64, usize, String) {
    (r.model.clone(), r.epsilon.to_bits(), r.trial, r.algorithm.clone())
}

/// Reads a records CSV, reporting the first malformed line.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>> {
    let text = fs::read_to_string(path)?;
    parse_records(&text)
}

pub fn parse_records(text: &str) -> Result<Vec<BenchRecord>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        None => return Err(Error::Parse { line: 1, msg: "empty file".into() }),
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((i, _)) => return Err(Error::Parse { line: i + 1, msg: format!("expected header `{CSV_HEADER}`") }),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
        let rec = rdr
            .records()
            .next()
            .ok_or_else(|| Error::Parse { line: line_no, msg: "empty record".into() })?
            .map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
        if rec.len() != 9 {
            return Err(Error::Parse { line: line_no, msg: format!("expected 9 fields, found {}", rec.len()) });
        }
        let real = |k: usize, name: &str| -> Result<f64> {
            rec[k].trim().parse::<f64>().map_err(|_| Error::Parse { line: line_no, msg: format!("bad {name} `{}`", &rec[k]) })
        };
        let int = |k: usize, name: &str| -> Result<u64> {
            rec[k].trim().parse::<u64>().map_err(|_| Error::Parse { line: line_no, msg: format!("bad {name} `{}`", &rec[k]) })
        };
        let r = BenchRecord {
            model: rec[0].to_string(),
            epsilon: real(1, "epsilon")?,
            trial: int(2, "trial")? as usize,
            seed: int(3, "seed")?,
            algorithm: rec[4].to_string(),
            index_recovery: real(5, "index_recovery")?,
            l1_residual: real(6, "l1_residual")?,
            solve_ms: real(7, "solve_ms")?,
            status: rec[8].to_string(),
        };
        for (v, name) in [(r.index_recovery, "index_recovery"), (r.l1_residual, "l1_residual")] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parse { line: line_no, msg: format!("{name} {v} outside [0, 1]") });
            }
        }
        out.push(r);
    }
    Ok(out)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], append: bool) -> Result<()> {
    let file = fs::OpenOptions::new().create(true).write(true).append(append).truncate(!append).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(!append).from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep. Existing rows of `records.csv` in the output directory
/// are kept and their keys skipped, so an interrupted sweep resumes; new
/// rows are appended in grid order. Writes `means.csv` and
/// `tipping_points.csv` next to it.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchSummary> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let records_path = cfg.output_dir.join("records.csv");
    let existing = if records_path.exists() { read_records(&records_path)? } else { Vec::new() };
    let done: HashSet<(String, u64, usize, String)> = existing.iter().map(record_key).collect();
    let mut algs: Vec<String> = cfg.algorithms.iter().map(|a| a.tag()).collect();
    algs.push(TRUE_K.into());

    let mut jobs = Vec::new();
    for model in &cfg.models {
        for &eps in &cfg.eps_grid {
            for trial in 0..cfg.trials {
                let complete =
                    algs.iter().all(|a| done.contains(&(model.clone(), eps.to_bits(), trial, a.clone())));
                if !complete {
                    jobs.push((model.clone(), eps, trial));
                }
            }
        }
    }
    let fresh: Vec<BenchRecord> = jobs
        .par_iter()
        .map(|(model, eps, trial)| evaluate_instance(cfg, model, *eps, *trial))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .filter(|r| !done.contains(&record_key(r)))
        .collect();
    write_csv(&records_path, &fresh, !existing.is_empty())?;

    let mut records = existing;
    records.extend(fresh);
    let mut wanted: BTreeSet<(String, u64, usize, String)> = BTreeSet::new();
    for m in &cfg.models {
        for e in &cfg.eps_grid {
            for t in 0..cfg.trials {
                for a in &algs {
                    wanted.insert((m.clone(), e.to_bits(), t, a.clone()));
                }
            }
        }
    }
    let in_grid: Vec<BenchRecord> = records.iter().filter(|r| wanted.contains(&record_key(r))).cloned().collect();
    let means = mean_rows(&in_grid);
    let tipping = tipping_points(&means);
    write_csv(&cfg.output_dir.join("means.csv"), &means, false)?;
    let tip_rows: Vec<(String, String, String)> = tipping
        .iter()
        .map(|t| (t.model.clone(), t.algorithm.clone(), t.epsilon.map_or("none".into(), |e| e.to_string())))
        .collect();
    let mut text = String::from("model,algorithm,tipping_point\n");
    for (m, a, e) in tip_rows {
        let _ = writeln!(text, "{m},{a},{e}");
    }
    fs::write(cfg.output_dir.join("tipping_points.csv"), text)?;
    Ok(BenchSummary { records: in_grid, means, tipping, records_path })
}

/// One algorithm's result on the swimmer images.
#[derive(Clone, Debug, Serialize)]
pub struct SwimmerEntry {
    pub algorithm: String,
    /// Extracted columns, 0-based.
    pub indices: Vec<usize>,
    /// `||M - M(:,K) H*||_F` with `H*` the Frobenius NNLS weights.
    pub error: f64,
    /// Rows of `H*`, one per extracted column.
    pub weights: Vec<Vec<f64>>,
    pub status: String,
    pub solve_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SwimmerReport {
    pub epsilon: f64,
    pub limbs: usize,
    pub positions: usize,
    pub entries: Vec<SwimmerEntry>,
}

impl SwimmerReport {
    pub fn entry(&self, tag: &str) -> Option<&SwimmerEntry> {
        self.entries.iter().find(|e| e.algorithm == tag)
    }
}

/// Runs the comparison on the default swimmer images.
pub fn run_swimmer(epsilon: f64, algorithms: &[Algorithm], solver: &SolveOptions, seed: u64) -> Result<SwimmerReport> {
    run_swimmer_with(4, 4, epsilon, algorithms, solver, seed)
}

/// Swimmer comparison on `limbs x positions` images. SPA and Hottopixx see
/// the column-normalized matrix, XRAY the raw one, and the rank-free models
/// the nonzero columns with threshold extraction.
pub fn run_swimmer_with(
    limbs: usize,
    positions: usize,
    epsilon: f64,
    algorithms: &[Algorithm],
    solver: &SolveOptions,
    seed: u64,
) -> Result<SwimmerReport> {
    let inst = gen_swimmer(limbs, positions)?;
    let m = &inst.m_tilde;
    let r = inst.r();
    let (mn, _) = normalize_columns_l1(m);
    let mut entries = Vec::new();
    for alg in algorithms {
        let tag = alg.tag();
        let mut rng = Rng::new(derive_seed(seed, &[tag_hash(&tag)]));
        let t0 = Instant::now();
        let (indices, status) = match alg {
            Algorithm::Spa => (spa(&mn, r)?.indices, "ok".to_string()),
            Algorithm::Xray => (xray_max(m, r, &mut rng)?.indices, "ok".to_string()),
            Algorithm::Hottopixx => {
                let p = objective_randn(m.cols(), &mut rng);
                let sol = solve_spec(&build_hottopixx(&mn, r, epsilon, &p)?, solver)?;
                (extract_hybrid(&mn, &sol.diag(), epsilon, r)?.indices, sol.status.tag().to_string())
            }
            Algorithm::RhoLp { rho } | Algorithm::RelativeLp { rho } => {
                let nz = nonzero_columns(m);
                let sub = m.select_columns(&nz)?;
                let p = objective_near_one(nz.len(), P_SPREAD, &mut rng);
                let spec = match alg {
                    Algorithm::RhoLp { .. } => build_absolute_lp(&sub, *rho, epsilon, &p)?,
                    _ => build_relative_lp(&sub, *rho, epsilon, &p)?,
                };
                let sol = solve_spec(&spec, solver)?;
                let k = extract_threshold(&sol.x_matrix, *rho)?;
                (k.indices.iter().map(|&i| nz[i]).collect(), sol.status.tag().to_string())
            }
        };
        let solve_ms = t0.elapsed().as_secs_f64() * 1e3;
        let (error, weights) = if indices.is_empty() {
            (crate::matcore::norm_fro(m)?, Vec::new())
        } else {
            let fit = nnls_fro(m, &m.select_columns(&indices)?)?;
            (fit.residual, (0..indices.len()).map(|a| fit.h.row(a)).collect())
        };
        entries.push(SwimmerEntry { algorithm: tag, indices, error, weights, status, solve_ms });
    }
    Ok(SwimmerReport { epsilon, limbs, positions, entries })
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn svg_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One line chart: x is the noise level, y a mean measure in [0, 1].
pub fn render_svg(title: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let xs: Vec<f64> = series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)).collect();
    let log_x = !xs.is_empty() && xs.iter().all(|x| *x > 0.0);
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let (mut lo, mut hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(tx(x)), b.max(tx(x))));
    if !(lo < hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    let px = |x: f64| left + (tx(x) - lo) / (hi - lo) * pw;
    let py = |y: f64| top + (1.0 - y.clamp(0.0, 1.0)) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, left + pw / 2.0, svg_escape(title));
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=5 {
        let y = k as f64 / 5.0;
        let _ = writeln!(s, r##"<line x1="{left}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#dddddd"/>"##, py(y), left + pw, py(y));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{:.1}</text>"#, left - 6.0, py(y) + 4.0, y);
    }
    let mut ticks: Vec<f64> = xs.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    let stride = ticks.len().div_ceil(6).max(1);
    for x in ticks.iter().step_by(stride) {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{:.3}</text>"#, px(*x), top + ph + 16.0, x);
    }
    let x_label = if log_x { "noise level (log scale)" } else { "noise level" };
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{x_label}</text>"#, left + pw / 2.0, h - 18.0);
    let _ = writeln!(s, r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#, top + ph / 2.0, top + ph / 2.0, svg_escape(y_label));
    let mut color = 0;
    for (k, (name, pts)) in series.iter().enumerate() {
        let reference = name == TRUE_K;
        let stroke = if reference { "#000000" } else { let c = PALETTE[color % PALETTE.len()]; color += 1; c };
        let dash = if reference { r#" stroke-dasharray="6 4""# } else { "" };
        let mut sorted = pts.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = sorted.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{stroke}" stroke-width="2"{dash} points="{}"/>"#, path.join(" "));
        let ly = top + 14.0 + 18.0 * k as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{stroke}" stroke-width="2"{dash}/>"#, lx + 22.0);
        let label = if reference { "true K" } else { name.as_str() };
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">{}</text>"#, lx + 28.0, ly + 4.0, svg_escape(label));
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<model>_index_recovery.svg` and `<model>_l1_residual.svg` for
/// every model in the records file and returns the written paths.
pub fn emit_plots(csv_path: impl AsRef<Path>, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let records = read_records(csv_path)?;
    if records.is_empty() {
        return Err(Error::Parse { line: 2, msg: "no records".into() });
    }
    let means = mean_rows(&records);
    fs::create_dir_all(&out_dir)?;
    let mut models: Vec<String> = Vec::new();
    for r in &means {
        if !models.contains(&r.model) {
            models.push(r.model.clone());
        }
    }
    let mut written = Vec::new();
    for model in &models {
        for (measure, label) in [("index_recovery", "index recovery"), ("l1_residual", "relative l1 residual")] {
            let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
            for row in means.iter().filter(|r| &r.model == model) {
                let y = if measure == "index_recovery" { row.index_recovery } else { row.l1_residual };
                match series.iter_mut().find(|(a, _)| *a == row.algorithm) {
                    Some((_, pts)) => pts.push((row.epsilon, y)),
                    None => series.push((row.algorithm.clone(), vec![(row.epsilon, y)])),
                }
            }
            let svg = render_svg(&format!("{model}: {label}"), label, &series);
            let path = out_dir.as_ref().join(format!("{model}_{measure}.svg"));
            fs::write(&path, svg)?;
            written.push(path);
        }
    }
    Ok(written)
}
