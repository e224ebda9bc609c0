//! Robust near-separable nonnegative matrix factorization by linear
//! programming.
//!
//! The crate provides the column-selection LP models, two LP engines, the
//! index extraction procedures built on top of them, the SPA and XRAY
//! baselines, synthetic instance generators, conditioning measures and a
//! benchmark harness.
//!
//! ```
//! use sepnmf_core::analysis::l1_residual_measure;
//! use sepnmf_core::extract::extract_threshold;
//! use sepnmf_core::lp_build::{build_rho_lp, objective_near_one};
//! use sepnmf_core::{solve_spec, HModel, NoisePattern, Rng, SolveOptions, SyntheticModel};
//!
//! let mut rng = Rng::new(0);
//! let model = SyntheticModel { h_model: HModel::MiddlePoints, pattern: NoisePattern::Dense };
//! let inst = model.generate(8, 14, 3, 0.0, &mut rng)?;
//! let p = objective_near_one(inst.n(), 1e-3, &mut rng);
//! let sol = solve_spec(&build_rho_lp(&inst.m_tilde, 1.0, 0.0, &p)?, &SolveOptions::simplex())?;
//! let picked = extract_threshold(&sol.x_matrix, 1.0)?.indices;
//! // one column per generator; exact duplicates of a vertex are equally valid
//! assert_eq!(picked.len(), 3);
//! assert!(l1_residual_measure(&inst.m_tilde, &picked)? > 1.0 - 1e-9);
//! # Ok::<(), sepnmf_core::Error>(())
//! ```

pub mod analysis;
pub mod baselines;
pub mod bench;
pub mod error;
pub mod extract;
pub mod instances;
pub mod lp_build;
pub mod lp_solve;
pub mod matcore;
pub mod nnls;

pub use error::{Error, Result};
pub use extract::ExtractionResult;
pub use instances::{HModel, Instance, ModelDescriptor, NoisePattern, SyntheticModel};
pub use lp_build::{LpModel, LpSpec, StandardLp};
pub use lp_solve::{solve, solve_spec, Engine, LpSolution, SolveOptions, Status};
pub use matcore::{DenseMatrix, Rng};
