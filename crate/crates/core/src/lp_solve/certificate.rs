//! Feasibility reports for candidate weight matrices, together with the
//! a-priori bounds every feasible (or optimal) solution must obey.

use serde::Serialize;

use crate::lp_build::{LpModel, LpSpec};
use crate::matcore::{norm1_induced, DenseMatrix};

/// Largest violation within one constraint family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyViolation {
    pub family: &'static str,
    pub max_violation: f64,
}

/// A computed quantity compared against its theoretical bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

impl BoundCheck {
    fn upper(value: f64, bound: f64, tol: f64) -> Self {
        Self { value, bound, holds: value <= bound + tol }
    }

    fn lower(value: f64, bound: f64, tol: f64) -> Self {
        Self { value, bound, holds: value >= bound - tol }
    }
}

/// Ground truth available to the bound checks.
#[derive(Clone, Copy, Debug, Default)]
pub struct CertificateContext<'a> {
    /// Noiseless data with unit ℓ1 columns.
    pub m_true: Option<&'a DenseMatrix>,
    /// Indices of the columns of `W` in the data.
    pub true_indices: Option<&'a [usize]>,
    pub kappa: Option<f64>,
    pub beta: Option<f64>,
    /// Lower bound on the diagonal at true indices; defaults to the observed
    /// minimum.
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub families: Vec<FamilyViolation>,
    pub feasible: bool,
    /// `||X||_1 <= 1 + eps (rho+2)/(1-eps)`.
    pub x_norm: Option<BoundCheck>,
    /// `||M - MX||_1 <= eps (rho+2)/(1-eps)` against the noiseless data.
    pub true_residual: Option<BoundCheck>,
    /// `min_{j in K} X(j,j) >= 1 - 2 eps (rho+2) / (kappa (1-beta)(1-eps))`.
    pub diag_lower: Option<BoundCheck>,
    /// `max_{j not in K} X(j,j) <= 1 - min(gamma, rho/2)` (optimal solutions).
    pub diag_upper: Option<BoundCheck>,
}

impl CertificateReport {
    /// Feasible and every evaluated bound holds.
    pub fn all_hold(&self) -> bool {
        self.feasible
            && [self.x_norm, self.true_residual, self.diag_lower, self.diag_upper]
                .iter()
                .flatten()
                .all(|b| b.holds)
    }

    /// Families whose violation exceeds the tolerance used for the report.
    pub fn offending(&self, tol: f64) -> Vec<&'static str> {
        self.families.iter().filter(|f| f.max_violation > tol).map(|f| f.family).collect()
    }
}

/// Checks `x` against every constraint family of `spec` with tolerance
/// `slack_tol`. When the data itself is nonnegative with unit columns the
/// norm bound on `X` is evaluated as well.
pub fn check_feasibility_certificate(spec: &LpSpec, x: &DenseMatrix, slack_tol: f64) -> CertificateReport {
    check_feasibility_certificate_with(spec, x, slack_tol, &CertificateContext::default())
}

pub fn check_feasibility_certificate_with(
    spec: &LpSpec,
    x: &DenseMatrix,
    slack_tol: f64,
    ctx: &CertificateContext<'_>,
) -> CertificateReport {
    let n = spec.n();
    assert_eq!(x.shape(), (n, n), "certificate check needs an n x n matrix");
    let mut bounds = 0.0f64;
    let mut dom = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let v = x[(i, j)];
            bounds = bounds.max(-v).max(v - spec.x_upper(i, j));
            if i != j {
                let (a, b) = spec.domination_coeffs(i, j);
                dom = dom.max(a * v - b * x[(i, i)]);
            }
        }
    }
    let resid = spec.residual_norms(x).expect("square matrix");
    let budget = (0..n).map(|j| resid[j] - spec.column_budget(j)).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let mut families = vec![
        FamilyViolation { family: "bounds", max_violation: bounds },
        FamilyViolation { family: "domination", max_violation: dom },
        FamilyViolation { family: "column_residual", max_violation: budget },
    ];
    if let (LpModel::Hottopixx, Some(r)) = (spec.model, spec.r) {
        let tr: f64 = x.diag().iter().sum();
        families.push(FamilyViolation { family: "trace", max_violation: (tr - r as f64).abs() });
    }
    let feasible = families.iter().all(|f| f.max_violation <= slack_tol);

    let normalized_model = matches!(spec.model, LpModel::Hottopixx | LpModel::RhoLp);
    let eps = spec.epsilon;
    let rho = spec.rho_value();
    let mut report = CertificateReport {
        families,
        feasible,
        x_norm: None,
        true_residual: None,
        diag_lower: None,
        diag_upper: None,
    };
    if !normalized_model || eps >= 1.0 {
        return report;
    }
    let growth = eps * (rho + 2.0) / (1.0 - eps);
    let data_is_clean = spec.data.as_slice().iter().all(|v| *v >= 0.0)
        && crate::lp_build::is_column_normalized(&spec.data, 1e-9);
    let m_ref = ctx.m_true.or(if data_is_clean { Some(&spec.data) } else { None });
    if let Some(m) = m_ref {
        let xn = norm1_induced(x).unwrap_or(0.0);
        report.x_norm = Some(BoundCheck::upper(xn, 1.0 + growth, slack_tol));
        if ctx.m_true.is_some() {
            let mx = m.matmul(x).expect("shapes match");
            let r = norm1_induced(&m.sub(&mx).expect("shapes match")).unwrap_or(0.0);
            report.true_residual = Some(BoundCheck::upper(r, growth, slack_tol));
        }
    }
    if let Some(k) = ctx.true_indices {
        let d = x.diag();
        let min_true = k.iter().map(|&j| d[j]).fold(f64::INFINITY, f64::min);
        if let (Some(kappa), Some(beta)) = (ctx.kappa, ctx.beta) {
            if kappa > 0.0 && beta < 1.0 {
                let bound = 1.0 - 2.0 * growth / (kappa * (1.0 - beta));
                report.diag_lower = Some(BoundCheck::lower(min_true, bound, slack_tol));
            }
        }
        if spec.model == LpModel::RhoLp {
            let gamma = ctx.gamma.unwrap_or(min_true).clamp(0.0, 1.0);
            let max_other = (0..n).filter(|j| !k.contains(j)).map(|j| d[j]).fold(f64::NEG_INFINITY, f64::max);
            if max_other.is_finite() {
                report.diag_upper = Some(BoundCheck::upper(max_other, 1.0 - gamma.min(rho / 2.0), slack_tol));
            }
        }
    }
    report
}
