//! Index selection from the diagonal (or rows) of an LP solution: top-r,
//! threshold, cluster post-processing, the hybrid of the two, and the
//! outlier rules.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{dim_err, pre_err, Result};
use crate::matcore::DenseMatrix;
use crate::nnls::{nnls_fro, nnls_l1};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Postprocess {
    TopR,
    Threshold,
    Cluster,
    Hybrid,
    OutlierRowsum,
    /// Baselines that select columns directly.
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractionResult {
    /// Selected columns (0-based).
    pub indices: Vec<usize>,
    pub method: String,
    pub diag_used: Vec<f64>,
    pub postprocess: Postprocess,
    pub aux: BTreeMap<String, f64>,
}

impl ExtractionResult {
    pub(crate) fn new(indices: Vec<usize>, method: &str, diag_used: Vec<f64>, postprocess: Postprocess) -> Self {
        Self { indices, method: method.to_string(), diag_used, postprocess, aux: BTreeMap::new() }
    }

    pub(crate) fn with(mut self, key: &str, value: f64) -> Self {
        self.aux.insert(key.to_string(), value);
        self
    }

    /// JSON with 1-based indices.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "indices": self.indices.iter().map(|k| k + 1).collect::<Vec<_>>(),
            "method": self.method,
            "postprocess": self.postprocess,
            "aux": self.aux,
        })
    }
}

fn check_square(x: &DenseMatrix) -> Result<()> {
    if x.rows() != x.cols() {
        return dim_err(format!("expected a square matrix, got {:?}", x.shape()));
    }
    Ok(())
}

/// Indices of the `r` largest entries, ties to the lower index, sorted.
pub fn top_r(values: &[f64], r: usize) -> Result<Vec<usize>> {
    if r > values.len() {
        return dim_err(format!("cannot pick {r} of {} entries", values.len()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut k = order[..r].to_vec();
    k.sort_unstable();
    Ok(k)
}

/// The `r` largest diagonal entries.
pub fn extract_hottopixx(x_star: &DenseMatrix, r: usize) -> Result<ExtractionResult> {
    check_square(x_star)?;
    let d = x_star.diag();
    Ok(ExtractionResult::new(top_r(&d, r)?, "hottopixx", d, Postprocess::TopR))
}

/// Diagonal entries above `1 - min(1, rho)/2`.
pub fn extract_threshold(x_star: &DenseMatrix, rho: f64) -> Result<ExtractionResult> {
    check_square(x_star)?;
    if !(rho > 0.0) {
        return pre_err(format!("rho must be positive, got {rho}"));
    }
    let t = 1.0 - rho.min(1.0) / 2.0;
    let d = x_star.diag();
    let k: Vec<usize> = (0..d.len()).filter(|&j| d[j] > t).collect();
    Ok(ExtractionResult::new(k, "threshold", d, Postprocess::Threshold).with("threshold", t).with("rho", rho))
}

fn l1_distances(m: &DenseMatrix) -> Vec<Vec<f64>> {
    let n = m.cols();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = m.col(i).iter().zip(m.col(j)).map(|(a, b)| (a - b).abs()).sum();
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

fn argmax_low(w: &[f64]) -> usize {
    let mut k = 0;
    for i in 1..w.len() {
        if w[i] > w[k] {
            k = i;
        }
    }
    k
}

/// Cluster post-processing of diagonal weights: returns `r` centroid
/// indices whose `nu`-neighbourhoods carry large weight. When `r` is absent
/// it is taken as the rounded-up total weight. Results are sorted.
pub fn cluster_postprocess(m_tilde: &DenseMatrix, x_diag: &[f64], epsilon: f64, r: Option<usize>) -> Result<Vec<usize>> {
    let n = m_tilde.cols();
    if x_diag.len() != n {
        return dim_err(format!("{} weights for {n} columns", x_diag.len()));
    }
    if x_diag.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return pre_err("weights must be finite and nonnegative");
    }
    let dist = l1_distances(m_tilde);
    let total: f64 = x_diag.iter().sum();
    let (r, x): (usize, Vec<f64>) = match r {
        None => ((total - 1e-9).ceil().max(0.0) as usize, x_diag.to_vec()),
        Some(r) => {
            if r > n {
                return dim_err(format!("cannot pick {r} of {n} columns"));
            }
            let x = if total > 0.0 { x_diag.iter().map(|v| r as f64 * v / total).collect() } else { x_diag.to_vec() };
            (r, x)
        }
    };
    if r == 0 {
        return Ok(Vec::new());
    }
    let level = r as f64 / (r as f64 + 1.0);
    let mut k_best: Vec<usize> = (0..n).filter(|&k| x[k] > level).collect();
    let mut k_cur = k_best.clone();
    let dmax = dist.iter().flat_map(|row| row.iter().copied()).fold(0.0, f64::max);
    let dmin_pos = dist.iter().flat_map(|row| row.iter().copied()).filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    let mut nu = if dmin_pos.is_finite() { (2.0 * epsilon).max(dmin_pos) } else { 2.0 * epsilon };
    let mut nu_star = nu;
    let neighbourhoods = |nu: f64| -> Vec<Vec<bool>> {
        (0..n).map(|i| (0..n).map(|j| dist[i][j] <= nu).collect()).collect()
    };
    while k_cur.len() < r && nu < dmax {
        let s = neighbourhoods(nu);
        let mut w: Vec<f64> = (0..n).map(|i| (0..n).filter(|&j| s[i][j]).map(|j| x[j]).sum()).collect();
        k_cur.clear();
        while w.iter().copied().fold(f64::NEG_INFINITY, f64::max) > level {
            let k = argmax_low(&w);
            k_cur.push(k);
            // remove the picked cluster's weight from every overlapping
            // neighbourhood (including its own)
            for i in 0..n {
                let shared: f64 = (0..n).filter(|&j| s[k][j] && s[i][j]).map(|j| x[j]).sum();
                w[i] -= shared;
            }
        }
        if k_cur.len() > k_best.len() {
            k_best = k_cur.clone();
            nu_star = nu;
        }
        nu *= 2.0;
    }
    if k_best.len() < r {
        let d = dmax;
        let s = neighbourhoods(nu_star);
        let mut w: Vec<f64> = (0..n).map(|i| (0..n).filter(|&j| s[i][j]).map(|j| x[j]).sum()).collect();
        k_best.clear();
        while k_best.len() < r {
            let k = argmax_low(&w);
            k_best.push(k);
            for i in 0..n {
                let shared: f64 = (0..n)
                    .filter(|&j| s[k][j] && s[i][j])
                    .map(|j| {
                        let damp = if d > 0.0 { ((d - dist[i][j]) / d).max(0.0).powf(0.1) } else { 1.0 };
                        damp * x[j]
                    })
                    .sum();
                w[i] -= shared;
            }
            w[k] = f64::NEG_INFINITY;
            for &kk in &k_best {
                w[kk] = f64::NEG_INFINITY;
            }
        }
    }
    k_best.truncate(r);
    k_best.sort_unstable();
    k_best.dedup();
    Ok(k_best)
}

/// Cluster post-processing of the diagonal of an LP solution, with the
/// number of columns inferred from the total weight.
pub fn extract_with_cluster(m_tilde: &DenseMatrix, x_star: &DenseMatrix, epsilon: f64) -> Result<ExtractionResult> {
    check_square(x_star)?;
    let d = x_star.diag();
    let k = cluster_postprocess(m_tilde, &d, epsilon, None)?;
    Ok(ExtractionResult::new(k, "cluster", d, Postprocess::Cluster).with("epsilon", epsilon))
}

/// Better (by Frobenius NNLS residual) of the top-r set and the clustered
/// set; ties go to the top-r set.
pub fn extract_hybrid(m_tilde: &DenseMatrix, x_diag: &[f64], epsilon: f64, r: usize) -> Result<ExtractionResult> {
    if r > m_tilde.cols() {
        return dim_err(format!("cannot pick {r} of {} columns", m_tilde.cols()));
    }
    let k1 = top_r(x_diag, r)?;
    let k2 = cluster_postprocess(m_tilde, x_diag, epsilon, Some(r))?;
    let res = |k: &[usize]| -> Result<f64> { Ok(nnls_fro(m_tilde, &m_tilde.select_columns(k)?)?.residual) };
    let r1 = res(&k1)?;
    let (k, r2) = if k2 == k1 { (k1.clone(), r1) } else { (k2.clone(), res(&k2)?) };
    let (chosen, which, resid) = if r2 < r1 { (k, 2.0, r2) } else { (k1, 1.0, r1) };
    Ok(ExtractionResult::new(chosen, "hybrid", x_diag.to_vec(), Postprocess::Hybrid)
        .with("residual_top_r", r1)
        .with("residual_cluster", r2)
        .with("residual", resid)
        .with("chosen", which))
}

/// Rows with diagonal at least 1/2 and off-diagonal row sum at least 1/2.
pub fn extract_outliers(x_star: &DenseMatrix) -> Result<ExtractionResult> {
    check_square(x_star)?;
    let d = x_star.diag();
    let n = d.len();
    let k: Vec<usize> = (0..n)
        .filter(|&i| {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| x_star[(i, j)]).sum();
            d[i] >= 0.5 && off >= 0.5
        })
        .collect();
    Ok(ExtractionResult::new(k, "outliers", d, Postprocess::OutlierRowsum))
}

/// Refines a candidate set by nonnegative ℓ1 regression of all columns on
/// the candidates, keeping those whose coefficient row sum (excluding the
/// column itself) is at least 1/2.
pub fn refine_outliers_rowsum(m_tilde: &DenseMatrix, candidate_k: &[usize]) -> Result<ExtractionResult> {
    if candidate_k.iter().any(|&k| k >= m_tilde.cols()) {
        return dim_err("candidate index out of range");
    }
    if candidate_k.is_empty() {
        return Ok(ExtractionResult::new(Vec::new(), "outliers_refined", Vec::new(), Postprocess::OutlierRowsum));
    }
    let z = nnls_l1(m_tilde, &m_tilde.select_columns(candidate_k)?)?;
    let mut sums = Vec::with_capacity(candidate_k.len());
    let mut kept = Vec::new();
    for (a, &k) in candidate_k.iter().enumerate() {
        let s: f64 = (0..m_tilde.cols()).filter(|&j| j != k).map(|j| z.h[(a, j)]).sum();
        sums.push(s);
        if s >= 0.5 {
            kept.push(k);
        }
    }
    kept.sort_unstable();
    Ok(ExtractionResult::new(kept, "outliers_refined", sums, Postprocess::OutlierRowsum))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { 0.0 })
    }

    #[test]
    fn top_r_ties() {
        assert_eq!(extract_hottopixx(&diag(&[0.9, 0.1, 0.8]), 2).unwrap().indices, vec![0, 2]);
        assert_eq!(extract_hottopixx(&diag(&[0.5, 0.5, 0.1]), 1).unwrap().indices, vec![0]);
        assert!(extract_hottopixx(&diag(&[0.5]), 2).is_err());
    }

    #[test]
    fn thresholds() {
        let r = extract_threshold(&diag(&[0.6, 0.4]), 1.0).unwrap();
        assert_eq!(r.indices, vec![0]);
        assert_eq!(r.aux["threshold"], 0.5);
        assert_eq!(extract_threshold(&diag(&[0.6]), 0.5).unwrap().aux["threshold"], 0.75);
    }

    #[test]
    fn cluster_initial_threshold() {
        let m = DenseMatrix::from_fn(5, 5, |i, j| if i == j { 1.0 } else { 0.0 });
        let k = cluster_postprocess(&m, &[0.9, 0.0, 0.0, 0.95, 0.0], 0.1, Some(2)).unwrap();
        assert_eq!(k, vec![0, 3]);
    }

    #[test]
    fn cluster_duplicates() {
        let m = DenseMatrix::from_rows(&[&[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
        let k = cluster_postprocess(&m, &[0.5, 0.5, 0.0], 0.0, Some(1)).unwrap();
        assert!(k == vec![0] || k == vec![1]);
    }

    #[test]
    fn cluster_infers_r() {
        let m = DenseMatrix::identity(4);
        let k = cluster_postprocess(&m, &[0.8, 0.8, 0.7, 0.0], 0.0, None).unwrap();
        assert_eq!(k.len(), 3);
    }

    #[test]
    fn outlier_rule() {
        let mut x = diag(&[0.9, 0.95]);
        x[(0, 1)] = 2.1;
        x[(1, 0)] = 0.01;
        assert_eq!(extract_outliers(&x).unwrap().indices, vec![0]);
    }
}
