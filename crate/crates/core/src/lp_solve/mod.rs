//! LP engines behind one interface: an exact simplex for small
//! problems (and as a test oracle) and a first-order primal-dual method for
//! larger ones.

mod certificate;
mod lu;
mod pdhg;
mod simplex;

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use certificate::{
    check_feasibility_certificate, check_feasibility_certificate_with, BoundCheck, CertificateContext,
    CertificateReport, FamilyViolation,
};

use crate::error::{pre_err, Error, Result};
use crate::lp_build::{LpSpec, StandardLp, VarLayout};
use crate::matcore::DenseMatrix;

/// Variable count up to which `Engine::Auto` picks the simplex.
pub const AUTO_SIMPLEX_MAX_VARS: usize = 2500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Simplex,
    Pdhg,
    Auto,
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplex" => Ok(Engine::Simplex),
            "pdhg" => Ok(Engine::Pdhg),
            "auto" => Ok(Engine::Auto),
            other => pre_err(format!("unknown engine `{other}` (expected simplex, pdhg or auto)")),
        }
    }
}

/// Solver configuration. Unset tolerances take the engine defaults
/// (simplex: feasibility 1e-7, gap 1e-9; pdhg: feasibility 1e-6, gap 1e-5).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub engine: Engine,
    pub feas_tol: Option<f64>,
    pub gap_tol: Option<f64>,
    pub max_iters: Option<usize>,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { engine: Engine::Auto, feas_tol: None, gap_tol: None, max_iters: None, time_limit: None }
    }
}

impl SolveOptions {
    pub fn with_engine(engine: Engine) -> Self {
        Self { engine, ..Self::default() }
    }

    pub fn simplex() -> Self {
        Self::with_engine(Engine::Simplex)
    }

    pub fn pdhg() -> Self {
        Self::with_engine(Engine::Pdhg)
    }

    pub fn feas_tol_for(&self, engine: Engine) -> f64 {
        self.feas_tol.unwrap_or(match engine {
            Engine::Pdhg => 1e-6,
            _ => 1e-7,
        })
    }

    pub fn gap_tol_for(&self, engine: Engine) -> f64 {
        self.gap_tol.unwrap_or(match engine {
            Engine::Pdhg => 1e-5,
            _ => 1e-9,
        })
    }

    /// The engine actually used for `lp`.
    pub fn resolve_engine(&self, lp: &StandardLp) -> Engine {
        match self.engine {
            Engine::Auto if lp.num_vars() <= AUTO_SIMPLEX_MAX_VARS => Engine::Simplex,
            Engine::Auto => Engine::Pdhg,
            e => e,
        }
    }

    fn validate(&self) -> Result<()> {
        for t in [self.feas_tol, self.gap_tol].into_iter().flatten() {
            if !(t > 0.0) {
                return pre_err("solver tolerances must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    IterationLimit,
    TimeLimit,
}

impl Status {
    pub fn tag(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::IterationLimit => "iteration_limit",
            Status::TimeLimit => "time_limit",
        }
    }
}

/// One logged solver iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogEntry {
    pub iter: usize,
    pub obj: f64,
    pub primal_res: f64,
    pub gap: f64,
}

/// Renders a solver log as CSV with header `iter,obj,primal_res,gap`.
pub fn log_to_csv(log: &[LogEntry]) -> String {
    let mut s = String::from("iter,obj,primal_res,gap\n");
    for e in log {
        let _ = writeln!(s, "{},{:e},{:e},{:e}", e.iter, e.obj, e.primal_res, e.gap);
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveStats {
    pub engine: Engine,
    pub iterations: usize,
    /// Seconds.
    pub runtime: f64,
    /// Largest absolute constraint or bound violation of the returned point.
    pub primal_residual: f64,
    /// Relative duality gap estimate (zero for the simplex).
    pub gap: f64,
    pub log: Vec<LogEntry>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    /// The `n x n` weight block for matrix layouts, otherwise the full
    /// solution as a single column.
    pub x_matrix: DenseMatrix,
    /// All variables, slacks included.
    pub x_full: Vec<f64>,
    pub objective: f64,
    pub status: Status,
    pub stats: SolveStats,
}

impl LpSolution {
    pub fn diag(&self) -> Vec<f64> {
        if self.x_matrix.rows() == self.x_matrix.cols() {
            self.x_matrix.diag()
        } else {
            Vec::new()
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

pub(crate) struct RawSolution {
    pub x: Vec<f64>,
    pub status: Status,
    pub iterations: usize,
    pub primal_res: f64,
    pub gap: f64,
    pub log: Vec<LogEntry>,
    pub runtime: f64,
}

/// Solves `lp`. Infeasibility is reported through the status; only
/// numerical breakdown produces an error.
pub fn solve(lp: &StandardLp, opts: &SolveOptions) -> Result<LpSolution> {
    opts.validate()?;
    let start = Instant::now();
    let engine = opts.resolve_engine(lp);
    let raw = match engine {
        Engine::Simplex => simplex::solve(lp, opts, start)?,
        Engine::Pdhg => pdhg::solve(lp, opts, start)?,
        Engine::Auto => unreachable!("auto is resolved above"),
    };
    if raw.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver(format!("{engine:?} produced non-finite values")));
    }
    let x_matrix = match lp.layout {
        VarLayout::Matrix { .. } => lp.x_block(&raw.x).expect("matrix layout"),
        VarLayout::Generic => DenseMatrix::new(raw.x.len(), 1, raw.x.clone())?,
    };
    Ok(LpSolution {
        objective: lp.objective_value(&raw.x),
        x_matrix,
        x_full: raw.x,
        status: raw.status,
        stats: SolveStats {
            engine,
            iterations: raw.iterations,
            runtime: raw.runtime,
            primal_residual: raw.primal_res,
            gap: raw.gap,
            log: raw.log,
        },
    })
}

/// Solves a structured model after removing its zero data columns, and
/// reports the solution in the original `n x n` coordinates.
pub fn solve_spec(spec: &LpSpec, opts: &SolveOptions) -> Result<LpSolution> {
    if spec.zero_columns().is_empty() {
        return solve(&spec.assemble(), opts);
    }
    let pre = spec.assemble_presolved()?;
    let sol = solve(&pre.lp, opts)?;
    let (x_matrix, x_full) = pre.expand(spec, &sol.x_full);
    Ok(LpSolution { objective: spec.objective_value(&x_matrix), x_matrix, x_full, ..sol })
}

/// Outcome of solving one LP with two configurations.
#[derive(Clone, Debug)]
pub struct CrossValidation {
    pub a: LpSolution,
    pub b: LpSolution,
    pub objective_rel_diff: f64,
    pub diag_max_diff: f64,
    pub objective_tol: f64,
    pub passed: bool,
    pub message: String,
}

/// Solves with both option sets and compares status, objective (relative,
/// within `max(1e-4, 10 * gap_tol)`) and diagonal (absolute, within 1e-3).
pub fn cross_validate(lp: &StandardLp, opts_a: &SolveOptions, opts_b: &SolveOptions) -> Result<CrossValidation> {
    let a = solve(lp, opts_a)?;
    let b = solve(lp, opts_b)?;
    let gap_tol = opts_a
        .gap_tol_for(opts_a.resolve_engine(lp))
        .max(opts_b.gap_tol_for(opts_b.resolve_engine(lp)));
    let objective_tol = (1e-4f64).max(10.0 * gap_tol);
    let objective_rel_diff = (a.objective - b.objective).abs() / a.objective.abs().max(b.objective.abs()).max(1.0);
    let diag_max_diff = a
        .diag()
        .iter()
        .zip(b.diag())
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    let (passed, message) = if a.status != b.status {
        (false, format!("status mismatch: {} vs {}", a.status.tag(), b.status.tag()))
    } else if a.status == Status::Infeasible {
        (true, "both infeasible".to_string())
    } else if a.status != Status::Optimal {
        (false, format!("neither run reached optimality ({})", a.status.tag()))
    } else if objective_rel_diff > objective_tol {
        (false, format!("objective mismatch {:.3e} > {:.1e}", objective_rel_diff, objective_tol))
    } else {
        // diagonals of degenerate LPs may legitimately differ
        let msg = if diag_max_diff > 1e-3 {
            format!("objectives agree; diagonals differ by {diag_max_diff:.3e} (alternative optimum)")
        } else {
            "agree".to_string()
        };
        (true, msg)
    };
    Ok(CrossValidation { a, b, objective_rel_diff, diag_max_diff, objective_tol, passed, message })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_build::{Row, Sense};

    #[test]
    fn one_dimensional_lp() {
        let lp = StandardLp::new(
            vec![1.0],
            vec![Row { coeffs: vec![(0, -1.0)], sense: Sense::Le, rhs: -0.3 }],
            vec![0.0],
            vec![1.0],
        )
        .unwrap();
        for opts in [SolveOptions::simplex(), SolveOptions::pdhg()] {
            let sol = solve(&lp, &opts).unwrap();
            assert_eq!(sol.status, Status::Optimal);
            assert!((sol.x_full[0] - 0.3).abs() < 1e-5, "{:?}", sol.x_full);
        }
    }

    #[test]
    fn infeasible_box_lp() {
        // x1 + x2 >= 3 with both in [0, 1]
        let lp = StandardLp::new(
            vec![1.0, 1.0],
            vec![Row { coeffs: vec![(0, -1.0), (1, -1.0)], sense: Sense::Le, rhs: -3.0 }],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        for opts in [SolveOptions::simplex(), SolveOptions::pdhg()] {
            assert_eq!(solve(&lp, &opts).unwrap().status, Status::Infeasible);
        }
    }

    #[test]
    fn equality_and_upper_bounds() {
        // min -x1 - 2 x2 s.t. x1 + x2 = 1.5, x in [0,1]^2 -> (0.5, 1)
        let lp = StandardLp::new(
            vec![-1.0, -2.0],
            vec![Row { coeffs: vec![(0, 1.0), (1, 1.0)], sense: Sense::Eq, rhs: 1.5 }],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let sol = solve(&lp, &SolveOptions::simplex()).unwrap();
        assert!((sol.objective + 2.5).abs() < 1e-12);
        let sol = solve(&lp, &SolveOptions::pdhg()).unwrap();
        assert!((sol.objective + 2.5).abs() < 1e-4);
    }

    #[test]
    fn auto_engine_threshold() {
        let small = StandardLp::new(vec![1.0; 10], vec![], vec![0.0; 10], vec![1.0; 10]).unwrap();
        assert_eq!(SolveOptions::default().resolve_engine(&small), Engine::Simplex);
        let big = StandardLp::new(vec![1.0; 2501], vec![], vec![0.0; 2501], vec![1.0; 2501]).unwrap();
        assert_eq!(SolveOptions::default().resolve_engine(&big), Engine::Pdhg);
    }

    #[test]
    fn presolve_matches_full_model() {
        use crate::lp_build::{build_hottopixx, build_rho_lp};
        use crate::matcore::Rng;
        let mut rng = Rng::new(12);
        let mut m = DenseMatrix::from_fn(4, 7, |_, _| rng.uniform());
        for j in [1, 4] {
            m.col_mut(j).iter_mut().for_each(|v| *v = 0.0);
        }
        let (m, _) = crate::matcore::normalize_columns_l1(&m);
        let p: Vec<f64> = (0..7).map(|_| rng.normal()).collect();
        let pos: Vec<f64> = (0..7).map(|_| 1.0 + 0.1 * rng.uniform()).collect();
        let specs = [build_hottopixx(&m, 3, 0.05, &p).unwrap(), build_rho_lp(&m, 1.0, 0.05, &pos).unwrap()];
        for spec in specs {
            let full = solve(&spec.assemble(), &SolveOptions::simplex()).unwrap();
            let pre = solve_spec(&spec, &SolveOptions::simplex()).unwrap();
            assert!(pre.is_optimal());
            assert!((full.objective - pre.objective).abs() < 1e-9, "{} vs {}", full.objective, pre.objective);
            assert!(spec.assemble().max_violation(&pre.x_full) < 1e-9);
        }
    }

    #[test]
    fn log_csv_header() {
        let csv = log_to_csv(&[LogEntry { iter: 64, obj: 1.0, primal_res: 0.5, gap: 0.25 }]);
        assert!(csv.starts_with("iter,obj,primal_res,gap\n64,"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn bad_tolerance_is_rejected() {
        let lp = StandardLp::new(vec![1.0], vec![], vec![0.0], vec![1.0]).unwrap();
        let opts = SolveOptions { feas_tol: Some(0.0), ..SolveOptions::simplex() };
        assert!(solve(&lp, &opts).is_err());
    }
}
