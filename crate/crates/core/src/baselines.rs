//! Comparison algorithms: the successive projection algorithm and the
//! `max` variant of XRAY.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, pre_err, Result};
use crate::extract::{ExtractionResult, Postprocess};
use crate::matcore::{dot, DenseMatrix, Rng};
use crate::nnls::nnls_fro;

/// Squared column norms at or below this count as zero.
pub const SPA_ZERO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineOptions {
    pub r: usize,
    #[serde(default)]
    pub tie_break: TieBreak,
    /// Weights of the XRAY denominator; all ones when absent.
    #[serde(default)]
    pub xray_p: Option<Vec<f64>>,
}

impl BaselineOptions {
    pub fn new(r: usize) -> Self {
        Self { r, tie_break: TieBreak::LowestIndex, xray_p: None }
    }
}

/// Successive projection: pick the column of largest ℓ2 norm, project all
/// columns onto its orthogonal complement, repeat. Stops early (with
/// `aux["stopped_early"] = 1`) once every residual column vanishes.
pub fn spa(m_tilde: &DenseMatrix, r: usize) -> Result<ExtractionResult> {
    let (m, n) = m_tilde.shape();
    if r == 0 || r > n {
        return dim_err(format!("SPA needs 1 <= r <= {n}, got {r}"));
    }
    let mut res = m_tilde.clone();
    let mut picked = Vec::with_capacity(r);
    let mut early = false;
    for _ in 0..r {
        let norms: Vec<f64> = (0..n).map(|j| dot(res.col(j), res.col(j))).collect();
        let mut k = 0;
        for j in 1..n {
            if norms[j] > norms[k] {
                k = j;
            }
        }
        if norms[k] <= SPA_ZERO {
            early = true;
            break;
        }
        picked.push(k);
        let u: Vec<f64> = res.col(k).iter().map(|v| v / norms[k].sqrt()).collect();
        for j in 0..n {
            let c = dot(&u, res.col(j));
            if c != 0.0 {
                for (v, ui) in res.col_mut(j).iter_mut().zip(&u) {
                    *v -= c * ui;
                }
            }
        }
        debug_assert_eq!(u.len(), m);
    }
    let count = picked.len() as f64;
    Ok(ExtractionResult::new(picked, "spa", Vec::new(), Postprocess::None)
        .with("stopped_early", if early { 1.0 } else { 0.0 })
        .with("extracted", count))
}

/// XRAY(max): at each step take the column `i*` with the largest residual
/// norm and select, among unselected columns with positive weighted mass,
/// a maximizer of `R(:,i*)' M(:,j) / p' M(:,j)`, breaking ties uniformly at
/// random. The residual is refit by Frobenius NNLS after every pick.
pub fn xray_max(m_o: &DenseMatrix, r: usize, rng: &mut Rng) -> Result<ExtractionResult> {
    xray_max_with(m_o, &BaselineOptions::new(r), rng)
}

pub fn xray_max_with(m_o: &DenseMatrix, opts: &BaselineOptions, rng: &mut Rng) -> Result<ExtractionResult> {
    let (m, n) = m_o.shape();
    let r = opts.r;
    if r == 0 || r > n {
        return dim_err(format!("XRAY needs 1 <= r <= {n}, got {r}"));
    }
    let p = match &opts.xray_p {
        Some(p) if p.len() != m => return dim_err(format!("p has length {}, expected {m}", p.len())),
        Some(p) => p.clone(),
        None => vec![1.0; m],
    };
    if p.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return pre_err("XRAY weights must be positive");
    }
    let mass: Vec<f64> = (0..n).map(|j| dot(&p, m_o.col(j))).collect();
    let scale = m_o.max_abs().max(f64::MIN_POSITIVE);
    let mut picked: Vec<usize> = Vec::with_capacity(r);
    let mut res = m_o.clone();
    let mut early = false;
    let mut ties_seen = 0.0;
    while picked.len() < r {
        let rn: Vec<f64> = (0..n).map(|j| dot(res.col(j), res.col(j))).collect();
        let mut istar = 0;
        for j in 1..n {
            if rn[j] > rn[istar] {
                istar = j;
            }
        }
        if rn[istar].sqrt() <= 1e-12 * scale * (m as f64).sqrt() {
            early = true;
            break;
        }
        let anchor = res.col(istar).to_vec();
        let crit: Vec<Option<f64>> = (0..n)
            .map(|j| {
                if picked.contains(&j) || mass[j] <= 1e-12 * scale {
                    None
                } else {
                    Some(dot(&anchor, m_o.col(j)) / mass[j])
                }
            })
            .collect();
        let best = crit.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(best > 0.0) {
            early = true;
            break;
        }
        let tol = 1e-10 * best.abs();
        let ties: Vec<usize> = (0..n).filter(|&j| crit[j].is_some_and(|c| c >= best - tol)).collect();
        if ties.len() > 1 {
            ties_seen += 1.0;
        }
        let k = ties[rng.below(ties.len())];
        picked.push(k);
        let basis = m_o.select_columns(&picked)?;
        let fit = nnls_fro(m_o, &basis)?;
        res = m_o.sub(&basis.matmul(&fit.h)?)?;
    }
    let count = picked.len() as f64;
    Ok(ExtractionResult::new(picked, "xray", Vec::new(), Postprocess::None)
        .with("stopped_early", if early { 1.0 } else { 0.0 })
        .with("extracted", count)
        .with("tie_steps", ties_seen))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spa_identity() {
        let k = spa(&DenseMatrix::identity(3), 3).unwrap();
        let mut idx = k.indices.clone();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn spa_midpoint() {
        let m = DenseMatrix::from_rows(&[&[1.0, 0.0, 0.5], &[0.0, 1.0, 0.5]]).unwrap();
        let mut k = spa(&m, 2).unwrap().indices;
        k.sort_unstable();
        assert_eq!(k, vec![0, 1]);
    }

    #[test]
    fn xray_cone() {
        let m = DenseMatrix::from_rows(&[&[1.0, 0.0, 0.5], &[0.0, 1.0, 0.5]]).unwrap();
        for seed in 0..10 {
            let mut k = xray_max(&m, 2, &mut Rng::new(seed)).unwrap().indices;
            k.sort_unstable();
            assert_eq!(k, vec![0, 1]);
        }
    }
}
