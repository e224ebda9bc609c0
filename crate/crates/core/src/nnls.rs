//! Nonnegative regression: Frobenius NNLS by an active-set method on the
//! Gram matrix, and nonnegative ℓ1 regression by per-column linear programs.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{dim_err, Error, Result};
use crate::lp_build::{Row, Sense, StandardLp};
use crate::lp_solve::{self, SolveOptions, Status};
use crate::matcore::{l1, DenseMatrix};

/// KKT tolerance on the Frobenius gradient.
pub const KKT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct NnlsResult {
    /// `k x n` nonnegative coefficients.
    pub h: DenseMatrix,
    /// Frobenius norm for [`nnls_fro`], induced ℓ1 norm for [`nnls_l1`].
    pub residual: f64,
    /// Per-column residual in the same norm.
    pub column_residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `min_{H >= 0} ||M - W H||_F`, solved column by column with the
/// Lawson–Hanson active-set method using a shared Gram matrix.
pub fn nnls_fro(m: &DenseMatrix, w: &DenseMatrix) -> Result<NnlsResult> {
    if m.rows() != w.rows() {
        return dim_err(format!("nnls: data has {} rows, basis has {}", m.rows(), w.rows()));
    }
    let k = w.cols();
    let n = m.cols();
    let wn = w.to_nalgebra();
    let gram = wn.transpose() * &wn;
    let scale = gram.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let cols: Vec<(Vec<f64>, usize)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let c: Vec<f64> = (0..k).map(|a| crate::matcore::dot(w.col(a), m.col(j))).collect();
            lawson_hanson(&gram, &c, scale)
        })
        .collect();
    let mut h = DenseMatrix::zeros(k, n);
    let mut iterations = 0;
    for (j, (hj, it)) in cols.into_iter().enumerate() {
        h.col_mut(j).copy_from_slice(&hj);
        iterations += it;
    }
    let wh = w.matmul(&h)?;
    let mut column_residuals = Vec::with_capacity(n);
    let mut converged = true;
    for j in 0..n {
        let r: Vec<f64> = m.col(j).iter().zip(wh.col(j)).map(|(a, b)| a - b).collect();
        column_residuals.push(r.iter().map(|v| v * v).sum::<f64>().sqrt());
        for a in 0..k {
            // gradient of the half squared residual is -W' r
            let g = -crate::matcore::dot(w.col(a), &r);
            let ok = if h[(a, j)] > 0.0 { g.abs() <= KKT_TOL * scale.max(1.0) } else { g >= -KKT_TOL * scale.max(1.0) };
            converged &= ok;
        }
    }
    let residual = column_residuals.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(NnlsResult { h, residual, column_residuals, iterations, converged })
}

/// Least squares on the passive set through an SVD, robust to rank loss.
fn passive_solve(gram: &DMatrix<f64>, c: &[f64], passive: &[usize]) -> Vec<f64> {
    let p = passive.len();
    let g = DMatrix::from_fn(p, p, |a, b| gram[(passive[a], passive[b])]);
    let rhs = DVector::from_iterator(p, passive.iter().map(|&a| c[a]));
    let svd = g.svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, v| a.max(*v));
    let tol = smax * 1e-13 * p as f64;
    svd.solve(&rhs, tol).map(|v| v.iter().copied().collect()).unwrap_or_else(|_| vec![0.0; p])
}

fn lawson_hanson(gram: &DMatrix<f64>, c: &[f64], scale: f64) -> (Vec<f64>, usize) {
    let k = c.len();
    let mut x = vec![0.0; k];
    let mut in_p = vec![false; k];
    let tol = 1e-12 * scale * (1.0 + c.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    let max_outer = 3 * k + 10;
    let mut it = 0;
    while it < max_outer {
        // gradient of -(c - G x)
        let grad: Vec<f64> = (0..k).map(|a| c[a] - (0..k).map(|b| gram[(a, b)] * x[b]).sum::<f64>()).collect();
        let mut best = None;
        for a in 0..k {
            if !in_p[a] && grad[a] > tol && best.is_none_or(|b: usize| grad[a] > grad[b]) {
                best = Some(a);
            }
        }
        let Some(enter) = best else { break };
        in_p[enter] = true;
        it += 1;
        loop {
            let passive: Vec<usize> = (0..k).filter(|&a| in_p[a]).collect();
            let z = passive_solve(gram, c, &passive);
            if z.iter().all(|v| *v > 0.0) {
                for (idx, &a) in passive.iter().enumerate() {
                    x[a] = z[idx];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            let mut blocking = passive[0];
            for (idx, &a) in passive.iter().enumerate() {
                if z[idx] <= 0.0 {
                    let denom = x[a] - z[idx];
                    let t = if denom > 0.0 { x[a] / denom } else { 0.0 };
                    if t < alpha {
                        alpha = t;
                        blocking = a;
                    }
                }
            }
            for (idx, &a) in passive.iter().enumerate() {
                x[a] += alpha * (z[idx] - x[a]);
                if a == blocking || x[a] <= 1e-15 * scale {
                    x[a] = 0.0;
                    in_p[a] = false;
                }
            }
            it += 1;
            if it > 10 * max_outer {
                break;
            }
        }
    }
    (x, it)
}

/// `min_{z >= 0} ||b - A z||_1` as an epigraph LP solved with the simplex
/// engine. Returns the minimizer and the optimal value.
pub(crate) fn l1_fit(a: &DenseMatrix, b: &[f64], lower: &[f64], upper: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (m, k) = a.shape();
    if b.len() != m || lower.len() != k || upper.len() != k {
        return dim_err("l1 fit: inconsistent sizes");
    }
    let nv = k + m;
    let mut objective = vec![0.0; nv];
    objective[k..].iter_mut().for_each(|v| *v = 1.0);
    let mut rows = Vec::with_capacity(2 * m);
    for i in 0..m {
        // b_i - A_i z <= s_i and A_i z - b_i <= s_i
        let mut plus: Vec<(usize, f64)> = (0..k).filter(|&c| a[(i, c)] != 0.0).map(|c| (c, -a[(i, c)])).collect();
        plus.push((k + i, -1.0));
        let minus: Vec<(usize, f64)> = plus.iter().map(|&(c, v)| if c == k + i { (c, v) } else { (c, -v) }).collect();
        rows.push(Row { coeffs: plus, sense: Sense::Le, rhs: -b[i] });
        rows.push(Row { coeffs: minus, sense: Sense::Le, rhs: b[i] });
    }
    let mut lo = lower.to_vec();
    lo.extend(std::iter::repeat(0.0).take(m));
    let mut up = upper.to_vec();
    up.extend(std::iter::repeat(f64::INFINITY).take(m));
    let lp = StandardLp::new(objective, rows, lo, up)?;
    let sol = lp_solve::solve(&lp, &SolveOptions::simplex())?;
    if sol.status != Status::Optimal {
        return Err(Error::Solver(format!("l1 regression ended with status {}", sol.status.tag())));
    }
    let z = sol.x_full[..k].to_vec();
    let r: Vec<f64> = (0..m).map(|i| b[i] - (0..k).map(|c| a[(i, c)] * z[c]).sum::<f64>()).collect();
    Ok((z, l1(&r)))
}

/// `min_{Z >= 0} ||M - W Z||_1`; the induced norm is minimized by making
/// every column optimal, so columns are solved independently.
pub fn nnls_l1(m: &DenseMatrix, w: &DenseMatrix) -> Result<NnlsResult> {
    if m.rows() != w.rows() {
        return dim_err(format!("nnls: data has {} rows, basis has {}", m.rows(), w.rows()));
    }
    let k = w.cols();
    let lower = vec![0.0; k];
    let upper = vec![f64::INFINITY; k];
    let cols: Vec<(Vec<f64>, f64)> =
        (0..m.cols()).into_par_iter().map(|j| l1_fit(w, m.col(j), &lower, &upper)).collect::<Result<_>>()?;
    let mut h = DenseMatrix::zeros(k, m.cols());
    let mut column_residuals = Vec::with_capacity(m.cols());
    for (j, (z, r)) in cols.into_iter().enumerate() {
        for (a, v) in z.into_iter().enumerate() {
            h[(a, j)] = v.max(0.0);
        }
        column_residuals.push(r);
    }
    let residual = column_residuals.iter().copied().fold(0.0, f64::max);
    Ok(NnlsResult { h, residual, column_residuals, iterations: m.cols(), converged: true })
}
