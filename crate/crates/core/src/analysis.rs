//! Conditioning measures of the factor `W`, closed-form noise bounds and
//! the two quality metrics used by the benchmark.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, pre_err, Error, Result};
use crate::instances::Instance;
use crate::matcore::{l1, norm_sum, DenseMatrix};
use crate::nnls::{l1_fit, nnls_l1};

/// `min_k min_{x >= 0} ||W(:,k) - W(:,others) x||_1`. By convention a single
/// column has conditioning 1.
pub fn kappa(w: &DenseMatrix) -> Result<f64> {
    let r = w.cols();
    if r == 0 {
        return dim_err("kappa needs at least one column");
    }
    if r == 1 {
        return Ok(1.0);
    }
    let mut best = f64::INFINITY;
    for k in 0..r {
        let others: Vec<usize> = (0..r).filter(|&c| c != k).collect();
        let a = w.select_columns(&others)?;
        let (_, v) = l1_fit(&a, w.col(k), &vec![0.0; r - 1], &vec![f64::INFINITY; r - 1])?;
        best = best.min(v);
    }
    Ok(best.max(0.0))
}

/// Smallest pairwise ℓ1 distance between columns.
pub fn omega(w: &DenseMatrix) -> Result<f64> {
    let r = w.cols();
    if r < 2 {
        return pre_err("omega needs at least two columns");
    }
    let mut best = f64::INFINITY;
    for i in 0..r {
        for j in i + 1..r {
            let d: f64 = w.col(i).iter().zip(w.col(j)).map(|(a, b)| (a - b).abs()).sum();
            best = best.min(d);
        }
    }
    Ok(best)
}

/// Outlier-model conditioning `(eta, delta)`.
///
/// `eta` is the smallest distance between the cone of `T` (with one fixed
/// unit weight) and the column space of `W`; it is `+inf` when `T` is empty.
/// `delta` is, over the columns `k` of `W`, the smallest value of the
/// largest distance from a data point (other than `W(:,k)` itself) to the
/// cone of `T` and the remaining columns of `W`.
pub fn outlier_conditions(w: &DenseMatrix, t_mat: &DenseMatrix, m: &DenseMatrix) -> Result<(f64, f64)> {
    let rows = w.rows();
    if t_mat.rows() != rows || m.rows() != rows {
        return dim_err("outlier conditions: row counts differ");
    }
    let (r, t) = (w.cols(), t_mat.cols());
    let mut eta = f64::INFINITY;
    if t > 0 {
        // b - A z with b = 0 and A = [-T, W, -W] gives T x - W (y+ - y-)
        let a = t_mat.scaled(-1.0).hcat(w)?.hcat(&w.scaled(-1.0))?;
        let zeros = vec![0.0; rows];
        for k in 0..t {
            let mut lo = vec![0.0; t + 2 * r];
            let mut up = vec![f64::INFINITY; t + 2 * r];
            lo[k] = 1.0;
            up[k] = 1.0;
            let (_, v) = l1_fit(&a, &zeros, &lo, &up)?;
            eta = eta.min(v);
        }
    }
    let mut delta = f64::INFINITY;
    for k in 0..r {
        let others: Vec<usize> = (0..r).filter(|&c| c != k).collect();
        let a = t_mat.hcat(&w.select_columns(&others)?)?;
        let nv = a.cols();
        let mut worst = 0.0f64;
        for j in 0..m.cols() {
            let diff: Vec<f64> = m.col(j).iter().zip(w.col(k)).map(|(x, y)| x - y).collect();
            if l1(&diff) <= 1e-12 {
                continue;
            }
            let (_, v) = l1_fit(&a, m.col(j), &vec![0.0; nv], &vec![f64::INFINITY; nv])?;
            worst = worst.max(v);
        }
        delta = delta.min(worst);
    }
    if r == 0 {
        delta = 0.0;
    }
    Ok((eta.max(0.0), delta.max(0.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Sufficient noise level for threshold extraction.
    Thm1,
    Thm1Improved,
    /// Above this level the adversarial construction defeats extraction.
    Thm1bNecessary,
    /// Sufficient level for the clustering post-processing.
    Thm2,
    /// Sufficient level for the outlier extraction.
    Thm3,
    /// The same with the row-sum refinement.
    Thm3Refined,
    HottopixxNecessary,
    HottopixxSufficient,
}

/// Parameters of the closed-form bounds; each bound reads only what it needs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub kappa: Option<f64>,
    pub beta: Option<f64>,
    pub rho: Option<f64>,
    pub r: Option<f64>,
    pub n: Option<f64>,
    pub t: Option<f64>,
    pub omega: Option<f64>,
    pub nu: Option<f64>,
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => pre_err(format!("parameter {name} = {x} is not finite")),
        None => Err(Error::MissingParam(name)),
    }
}

fn unit(v: Option<f64>, name: &'static str) -> Result<f64> {
    let x = need(v, name)?;
    if !(0.0..=1.0).contains(&x) {
        return pre_err(format!("parameter {name} = {x} must lie in [0, 1]"));
    }
    Ok(x)
}

fn positive(v: Option<f64>, name: &'static str) -> Result<f64> {
    let x = need(v, name)?;
    if x <= 0.0 {
        return pre_err(format!("parameter {name} = {x} must be positive"));
    }
    Ok(x)
}

fn at_least(v: Option<f64>, name: &'static str, lo: f64) -> Result<f64> {
    let x = need(v, name)?;
    if x < lo {
        return pre_err(format!("parameter {name} = {x} must be at least {lo}"));
    }
    Ok(x)
}

/// Closed-form noise bound of the given kind.
pub fn thm_bounds(kind: BoundKind, p: &BoundParams) -> Result<f64> {
    let margin = |p: &BoundParams| -> Result<f64> { Ok(unit(p.kappa, "kappa")? * (1.0 - unit(p.beta, "beta")?)) };
    Ok(match kind {
        BoundKind::Thm1 => {
            let rho = positive(p.rho, "rho")?;
            margin(p)? * rho.min(1.0) / (5.0 * (rho + 2.0))
        }
        BoundKind::Thm1Improved => {
            let rho = positive(p.rho, "rho")?;
            let a = margin(p)? * rho.min(1.0);
            a / (4.0 * (rho + 2.0) + a)
        }
        BoundKind::Thm1bNecessary => {
            let rho = positive(p.rho, "rho")?;
            margin(p)? * rho.min(1.0) / (2.0 * rho)
        }
        BoundKind::Thm2 => {
            let r = at_least(p.r, "r", 1.0)?;
            need(p.omega, "omega")?.max(0.0) * unit(p.kappa, "kappa")? / (99.0 * (r + 1.0))
        }
        BoundKind::Thm3 => {
            let n = at_least(p.n, "n", 2.0)?;
            need(p.nu, "nu")?.max(0.0) * (1.0 - unit(p.beta, "beta")?) / (20.0 * (n - 1.0))
        }
        BoundKind::Thm3Refined => {
            let rt = at_least(p.r, "r", 1.0)? + at_least(p.t, "t", 0.0)?;
            if rt < 2.0 {
                return pre_err("r + t must be at least 2");
            }
            need(p.nu, "nu")?.max(0.0) * (1.0 - unit(p.beta, "beta")?) / (20.0 * (rt - 1.0))
        }
        BoundKind::HottopixxNecessary => {
            let r = at_least(p.r, "r", 1.0)?;
            let beta = unit(p.beta, "beta")?;
            margin(p)? / ((r - 1.0) * (1.0 - beta) + 1.0)
        }
        BoundKind::HottopixxSufficient => {
            let r = at_least(p.r, "r", 1.0)?;
            margin(p)? / (9.0 * (r + 1.0))
        }
    })
}

/// Fraction of `truth` present in `found`.
pub fn index_recovery(found: &[usize], truth: &[usize]) -> Result<f64> {
    if truth.is_empty() {
        return pre_err("index recovery needs a nonempty ground truth");
    }
    let f: BTreeSet<usize> = found.iter().copied().collect();
    let t: BTreeSet<usize> = truth.iter().copied().collect();
    Ok(f.intersection(&t).count() as f64 / t.len() as f64)
}

/// `1 - min_{H >= 0} ||M - M(:,K) H||_s / ||M||_s` with the entrywise sum norm.
pub fn l1_residual_measure(m_tilde: &DenseMatrix, k: &[usize]) -> Result<f64> {
    if k.is_empty() {
        return pre_err("the index set must be nonempty");
    }
    let total = norm_sum(m_tilde)?;
    if total == 0.0 {
        return Ok(1.0);
    }
    let basis = m_tilde.select_columns(k)?;
    let fit = nnls_l1(m_tilde, &basis)?;
    let resid: f64 = fit.column_residuals.iter().sum();
    Ok((1.0 - resid / total).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditioningReport {
    pub kappa: f64,
    pub omega: Option<f64>,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub nu: f64,
    pub beta: f64,
}

impl ConditioningReport {
    /// Conditioning of an instance computed from its ground truth. For
    /// outlier instances `kappa` refers to `[W, T]`.
    pub fn for_instance(inst: &Instance) -> Result<Self> {
        let r = inst.r();
        let w = inst.w_true.select_columns(&(0..r).collect::<Vec<_>>())?;
        let kappa = kappa(&inst.w_true)?;
        let omega = if r >= 2 { Some(omega(&w)?) } else { None };
        let special: BTreeSet<usize> = inst.true_indices.iter().chain(&inst.outlier_indices).copied().collect();
        let beta = (0..inst.n())
            .filter(|j| !special.contains(j))
            .flat_map(|j| inst.h_true.col(j).to_vec())
            .fold(0.0, f64::max);
        let (eta, delta) = if inst.outlier_indices.is_empty() {
            (None, None)
        } else {
            let t = inst.w_true.select_columns(&(r..inst.w_true.cols()).collect::<Vec<_>>())?;
            let (e, d) = outlier_conditions(&w, &t, &inst.m_clean())?;
            (Some(e), Some(d))
        };
        let nu = [Some(kappa), eta, delta].iter().flatten().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { kappa, omega, eta, delta, nu, beta })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_identity_and_duplicate() {
        assert!((kappa(&DenseMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-12);
        let w = DenseMatrix::from_rows(&[&[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
        assert!(kappa(&w).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bound_values() {
        let p = BoundParams { kappa: Some(1.0), beta: Some(0.0), rho: Some(1.0), ..Default::default() };
        assert!((thm_bounds(BoundKind::Thm1, &p).unwrap() - 1.0 / 15.0).abs() < 1e-15);
        assert!((thm_bounds(BoundKind::Thm1bNecessary, &p).unwrap() - 0.5).abs() < 1e-15);
        let p2 = BoundParams { rho: Some(2.0), ..p };
        assert!((thm_bounds(BoundKind::Thm1, &p2).unwrap() - 0.05).abs() < 1e-15);
        assert!(matches!(thm_bounds(BoundKind::Thm3, &p), Err(Error::MissingParam("n"))));
    }

    #[test]
    fn recovery_counts() {
        assert!((index_recovery(&[0, 1, 2], &[0, 1, 3]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(index_recovery(&[1], &[]).is_err());
    }

    #[test]
    fn omega_identity() {
        assert_eq!(omega(&DenseMatrix::identity(2)).unwrap(), 2.0);
    }

    #[test]
    fn eta_orthogonal_outlier() {
        let w = DenseMatrix::from_rows(&[&[1.0], &[0.0]]).unwrap();
        let t = DenseMatrix::from_rows(&[&[0.0], &[1.0]]).unwrap();
        let (eta, _) = outlier_conditions(&w, &t, &w.hcat(&t).unwrap()).unwrap();
        assert!((eta - 1.0).abs() < 1e-9);
    }
}
