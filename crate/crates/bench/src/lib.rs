//! Fixed problem fixtures shared by the criterion benchmarks.

use sepnmf_core::lp_build::{build_hottopixx, build_rho_lp, objective_near_one, objective_randn};
use sepnmf_core::matcore::normalize_columns_l1;
use sepnmf_core::{DenseMatrix, Instance, LpSpec, NoisePattern, Rng, SyntheticModel};

/// Noisy Dirichlet instance of the given size, seeded for repeatability.
pub fn dirichlet_instance(m: usize, n: usize, r: usize, epsilon: f64) -> Instance {
    let model = SyntheticModel { h_model: sepnmf_core::HModel::Dirichlet, pattern: NoisePattern::Dense };
    model.generate(m, n, r, epsilon, &mut Rng::new(42)).expect("valid fixture size")
}

/// Column-normalized data of `inst`.
pub fn normalized(inst: &Instance) -> DenseMatrix {
    normalize_columns_l1(&inst.m_tilde).0
}

pub fn rho_lp_fixture(m: usize, n: usize, r: usize, epsilon: f64) -> LpSpec {
    let inst = dirichlet_instance(m, n, r, epsilon);
    let p = objective_near_one(n, 1e-3, &mut Rng::new(7));
    build_rho_lp(&inst.m_tilde, 1.0, epsilon, &p).expect("valid fixture")
}

pub fn hottopixx_fixture(m: usize, n: usize, r: usize, epsilon: f64) -> LpSpec {
    let inst = dirichlet_instance(m, n, r, epsilon);
    let p = objective_randn(n, &mut Rng::new(7));
    build_hottopixx(&normalized(&inst), r, epsilon, &p).expect("valid fixture")
}
