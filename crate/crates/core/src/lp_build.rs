//! The four column-selection LP models and their assembly into a sparse
//! standard form shared by both solver engines.
//!
//! All models optimize over an `n x n` matrix `X` (called `Y` for the
//! unnormalized models) and bound a column-wise ℓ1 residual. The residual is
//! expressed through epigraph slacks `S(i, j)` with
//! `-S <= data - data * X <= S` and one budget row `sum_i S(i, j) <= b_j` per
//! column, which gives `n^2 + m*n` variables in total.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{dim_err, pre_err, Error, Result};
use crate::matcore::{l1, DenseMatrix, Rng};

/// Which LP model an [`LpSpec`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpModel {
    /// Trace-constrained model with budget `2 eps` on normalized data.
    Hottopixx,
    /// Budget `rho * eps` on normalized data, no trace row.
    RhoLp,
    /// Unnormalized data, per-column budget `rho * eps * ||M(:, j)||_1`.
    RelativeLp,
    /// Unnormalized data, uniform budget `rho * eps`.
    AbsoluteLp,
}

impl LpModel {
    pub fn tag(self) -> &'static str {
        match self {
            LpModel::Hottopixx => "hottopixx",
            LpModel::RhoLp => "rho_lp",
            LpModel::RelativeLp => "relative_lp",
            LpModel::AbsoluteLp => "absolute_lp",
        }
    }

    fn uses_scales(self) -> bool {
        matches!(self, LpModel::RelativeLp | LpModel::AbsoluteLp)
    }
}

impl std::str::FromStr for LpModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hottopixx" => Ok(LpModel::Hottopixx),
            "rho" | "rho_lp" => Ok(LpModel::RhoLp),
            "relative" | "relative_lp" => Ok(LpModel::RelativeLp),
            "absolute" | "absolute_lp" => Ok(LpModel::AbsoluteLp),
            other => pre_err(format!("unknown LP model `{other}`")),
        }
    }
}

/// Structured description of one LP instance.
#[derive(Clone, Debug)]
pub struct LpSpec {
    pub model: LpModel,
    pub data: DenseMatrix,
    /// Budget multiplier; `None` for Hottopixx (which uses 2).
    pub rho: Option<f64>,
    pub epsilon: f64,
    /// Target rank, Hottopixx only.
    pub r: Option<usize>,
    pub objective_p: Vec<f64>,
    /// Column ℓ1 norms of the unnormalized data (relative and absolute models).
    pub column_scales: Option<Vec<f64>>,
}

const NORMALIZED_TOL: f64 = 1e-9;

fn check_p(p: &[f64], n: usize) -> Result<()> {
    if p.len() != n {
        return dim_err(format!("objective vector has length {}, expected {}", p.len(), n));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return pre_err("objective vector must be finite");
    }
    Ok(())
}

fn check_positive_p(p: &[f64]) -> Result<()> {
    if let Some(j) = p.iter().position(|v| *v <= 0.0) {
        return pre_err(format!("objective entry p[{}] = {} is not positive", j, p[j]));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return pre_err(format!("noise level must be finite and nonnegative, got {epsilon}"));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return pre_err(format!("rho must be finite and nonnegative, got {rho}"));
    }
    Ok(())
}

/// True when every column has unit absolute sum (or is exactly zero).
pub fn is_column_normalized(m: &DenseMatrix, tol: f64) -> bool {
    (0..m.cols()).all(|j| {
        let s = l1(m.col(j));
        s == 0.0 || (s - 1.0).abs() <= tol
    })
}

fn has_distinct_entries(p: &[f64]) -> bool {
    let mut v = p.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.windows(2).all(|w| w[0] != w[1])
}

/// Trace-constrained model: `min p' diag(X)` with `||M - MX||_1 <= 2 eps`,
/// `tr(X) = r`, `X(i,i) <= 1`, `X(i,j) <= X(i,i)`, `X >= 0`.
pub fn build_hottopixx(m_tilde: &DenseMatrix, r: usize, epsilon: f64, p: &[f64]) -> Result<LpSpec> {
    let n = m_tilde.cols();
    check_p(p, n)?;
    check_epsilon(epsilon)?;
    if r == 0 || r > n {
        return pre_err(format!("rank {r} must lie in 1..={n}"));
    }
    if !is_column_normalized(m_tilde, NORMALIZED_TOL) {
        return pre_err("columns of the input must have unit ℓ1 norm");
    }
    if !has_distinct_entries(p) {
        return pre_err("objective vector entries must be distinct");
    }
    Ok(LpSpec {
        model: LpModel::Hottopixx,
        data: m_tilde.clone(),
        rho: None,
        epsilon,
        r: Some(r),
        objective_p: p.to_vec(),
        column_scales: None,
    })
}

/// Rank-free model on normalized data with budget `rho * eps`.
pub fn build_rho_lp(m_tilde: &DenseMatrix, rho: f64, epsilon: f64, p: &[f64]) -> Result<LpSpec> {
    check_p(p, m_tilde.cols())?;
    check_positive_p(p)?;
    check_epsilon(epsilon)?;
    check_rho(rho)?;
    Ok(LpSpec {
        model: LpModel::RhoLp,
        data: m_tilde.clone(),
        rho: Some(rho),
        epsilon,
        r: None,
        objective_p: p.to_vec(),
        column_scales: None,
    })
}

/// Unnormalized model with relative per-column error `rho * eps * ||M(:, j)||_1`.
/// Zero columns make the relative budget degenerate and are rejected; drop
/// them first with [`nonzero_columns`].
pub fn build_relative_lp(m_o: &DenseMatrix, rho: f64, epsilon: f64, p: &[f64]) -> Result<LpSpec> {
    check_p(p, m_o.cols())?;
    check_positive_p(p)?;
    check_epsilon(epsilon)?;
    check_rho(rho)?;
    let scales = m_o.column_l1_norms();
    if let Some(j) = scales.iter().position(|s| *s == 0.0) {
        return pre_err(format!("column {j} is zero; exclude zero columns for the relative model"));
    }
    Ok(LpSpec {
        model: LpModel::RelativeLp,
        data: m_o.clone(),
        rho: Some(rho),
        epsilon,
        r: None,
        objective_p: p.to_vec(),
        column_scales: Some(scales),
    })
}

/// Unnormalized model with absolute error `||M - MY||_1 <= rho * eps`.
pub fn build_absolute_lp(m_o: &DenseMatrix, rho: f64, epsilon: f64, p: &[f64]) -> Result<LpSpec> {
    check_p(p, m_o.cols())?;
    check_positive_p(p)?;
    check_epsilon(epsilon)?;
    check_rho(rho)?;
    Ok(LpSpec {
        model: LpModel::AbsoluteLp,
        data: m_o.clone(),
        rho: Some(rho),
        epsilon,
        r: None,
        objective_p: p.to_vec(),
        column_scales: Some(m_o.column_l1_norms()),
    })
}

/// Indices of the columns with a nonzero entry.
pub fn nonzero_columns(m: &DenseMatrix) -> Vec<usize> {
    (0..m.cols()).filter(|&j| m.col(j).iter().any(|v| *v != 0.0)).collect()
}

/// Objective `p(i) = 1 + U(-sigma, sigma)` with distinct entries.
pub fn objective_near_one(n: usize, sigma: f64, rng: &mut Rng) -> Vec<f64> {
    let p: Vec<f64> = (0..n).map(|_| 1.0 + rng.uniform_in(-sigma, sigma)).collect();
    make_distinct(p)
}

/// Standard normal objective (the Hottopixx reference choice).
pub fn objective_randn(n: usize, rng: &mut Rng) -> Vec<f64> {
    let p: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    make_distinct(p)
}

/// Nudges colliding entries apart by a few ulps so the vector is distinct.
pub fn make_distinct(mut p: Vec<f64>) -> Vec<f64> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    loop {
        order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap().then(a.cmp(&b)));
        let mut changed = false;
        for w in order.windows(2) {
            if p[w[1]] <= p[w[0]] {
                p[w[1]] = p[w[0]] + p[w[0]].abs().max(1.0) * 1e-12;
                changed = true;
            }
        }
        if !changed {
            return p;
        }
    }
}

/// Direction of [`change_of_variables`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariableChange {
    /// From the unnormalized variable `Y` to the normalized `X`.
    YToX,
    /// From `X` to `Y`.
    XToY,
}

/// `X(i,j) = s_i / s_j * Y(i,j)` and its inverse. Diagonals are unchanged.
pub fn change_of_variables(
    x: &DenseMatrix,
    scales: &[f64],
    direction: VariableChange,
) -> Result<DenseMatrix> {
    let n = x.rows();
    if x.cols() != n || scales.len() != n {
        return dim_err("change of variables needs a square matrix and matching scales");
    }
    if let Some(j) = scales.iter().position(|s| !(*s > 0.0)) {
        return pre_err(format!("scale {j} is not strictly positive"));
    }
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            x[(i, i)]
        } else {
            match direction {
                VariableChange::YToX => scales[i] / scales[j] * x[(i, j)],
                VariableChange::XToY => scales[j] / scales[i] * x[(i, j)],
            }
        }
    }))
}

impl LpSpec {
    pub fn n(&self) -> usize {
        self.data.cols()
    }

    pub fn m(&self) -> usize {
        self.data.rows()
    }

    pub fn rho_value(&self) -> f64 {
        self.rho.unwrap_or(2.0)
    }

    /// Right-hand side of the ℓ1 residual constraint of column `j`.
    pub fn column_budget(&self, j: usize) -> f64 {
        match self.model {
            LpModel::Hottopixx => 2.0 * self.epsilon,
            LpModel::RhoLp | LpModel::AbsoluteLp => self.rho_value() * self.epsilon,
            LpModel::RelativeLp => {
                self.rho_value() * self.epsilon * self.column_scales.as_ref().unwrap()[j]
            }
        }
    }

    /// Coefficients `(a, b)` of the domination row `a X(i,j) - b X(i,i) <= 0`.
    pub fn domination_coeffs(&self, i: usize, j: usize) -> (f64, f64) {
        match &self.column_scales {
            Some(s) if self.model.uses_scales() => (s[i], s[j]),
            _ => (1.0, 1.0),
        }
    }

    /// Upper bound of `X(i, j)` implied by the domination chain.
    pub fn x_upper(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        let (a, b) = self.domination_coeffs(i, j);
        if a > 0.0 {
            (b / a).min(f64::MAX)
        } else {
            // The variable never enters a residual; zero is without loss.
            0.0
        }
    }

    /// Per-column ℓ1 residuals `||data(:,j) - data X(:,j)||_1`.
    pub fn residual_norms(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        let prod = self.data.matmul(x)?;
        Ok((0..self.n())
            .map(|j| self.data.col(j).iter().zip(prod.col(j)).map(|(a, b)| (a - b).abs()).sum())
            .collect())
    }

    pub fn objective_value(&self, x: &DenseMatrix) -> f64 {
        self.objective_p.iter().enumerate().map(|(i, p)| p * x[(i, i)]).sum()
    }

    pub fn num_variables(&self) -> usize {
        self.n() * self.n() + self.m() * self.n()
    }

    /// Assembles the sparse standard form.
    pub fn assemble(&self) -> StandardLp {
        let (m, n) = (self.m(), self.n());
        let xv = |i: usize, j: usize| j * n + i;
        let sv = |i: usize, j: usize| n * n + j * m + i;
        let nvar = n * n + m * n;

        let mut objective = vec![0.0; nvar];
        for i in 0..n {
            objective[xv(i, i)] = self.objective_p[i];
        }
        let mut lower = vec![0.0; nvar];
        let mut upper = vec![0.0; nvar];
        for j in 0..n {
            for i in 0..n {
                upper[xv(i, j)] = self.x_upper(i, j);
            }
            let b = self.column_budget(j);
            for i in 0..m {
                upper[sv(i, j)] = b;
            }
        }
        lower.iter_mut().for_each(|v| *v = 0.0);

        // data rows without zeros, reused for every column block
        let row_nz: Vec<Vec<(usize, f64)>> = (0..m)
            .map(|i| (0..n).filter_map(|k| {
                let v = self.data[(i, k)];
                (v != 0.0).then_some((k, v))
            }).collect())
            .collect();

        let mut rows = Vec::with_capacity(2 * m * n + n + n * (n - 1).max(0) + 1);
        for j in 0..n {
            for (i, nz) in row_nz.iter().enumerate() {
                let mut plus: Vec<(usize, f64)> = nz.iter().map(|&(k, v)| (xv(k, j), v)).collect();
                plus.push((sv(i, j), -1.0));
                let minus: Vec<(usize, f64)> =
                    plus.iter().map(|&(k, v)| if k == sv(i, j) { (k, v) } else { (k, -v) }).collect();
                rows.push(Row { coeffs: plus, sense: Sense::Le, rhs: self.data[(i, j)] });
                rows.push(Row { coeffs: minus, sense: Sense::Le, rhs: -self.data[(i, j)] });
            }
            rows.push(Row {
                coeffs: (0..m).map(|i| (sv(i, j), 1.0)).collect(),
                sense: Sense::Le,
                rhs: self.column_budget(j),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let (a, b) = self.domination_coeffs(i, j);
                    rows.push(Row {
                        coeffs: vec![(xv(i, j), a), (xv(i, i), -b)],
                        sense: Sense::Le,
                        rhs: 0.0,
                    });
                }
            }
        }
        if let (LpModel::Hottopixx, Some(r)) = (self.model, self.r) {
            rows.push(Row {
                coeffs: (0..n).map(|i| (xv(i, i), 1.0)).collect(),
                sense: Sense::Eq,
                rhs: r as f64,
            });
        }

        StandardLp {
            objective,
            rows,
            lower,
            upper,
            layout: VarLayout::Matrix { n, m },
            origin: Some(Arc::new(self.clone())),
        }
    }

    /// Columns of the data that are exactly zero.
    pub fn zero_columns(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.data.col(j).iter().all(|v| *v == 0.0)).collect()
    }

    /// The same model on a subset of the data columns.
    pub fn restrict(&self, cols: &[usize]) -> Result<LpSpec> {
        Ok(LpSpec {
            model: self.model,
            data: self.data.select_columns(cols)?,
            rho: self.rho,
            epsilon: self.epsilon,
            r: self.r,
            objective_p: cols.iter().map(|&j| self.objective_p[j]).collect(),
            column_scales: self.column_scales.as_ref().map(|s| cols.iter().map(|&j| s[j]).collect()),
        })
    }

    /// Assembles the LP with zero data columns removed.
    ///
    /// A weight `X(i,j)` with `i` or `j` a zero column never changes a
    /// residual or the objective, so off-diagonal ones are fixed at zero.
    /// The diagonal weights of zero columns only meet the trace row, so
    /// for Hottopixx they are appended after the slacks; for the other
    /// models they are set by the sign of their cost when expanding.
    pub fn assemble_presolved(&self) -> Result<Presolved> {
        let zero = self.zero_columns();
        let kept: Vec<usize> = (0..self.n()).filter(|j| !zero.contains(j)).collect();
        if kept.is_empty() {
            return pre_err("every data column is zero");
        }
        let reduced = self.restrict(&kept)?;
        let mut lp = reduced.assemble();
        if self.model == LpModel::Hottopixx && self.r.is_some() && !zero.is_empty() {
            let trace = lp.rows.len() - 1;
            for &j in &zero {
                let k = lp.objective.len();
                lp.objective.push(self.objective_p[j]);
                lp.lower.push(0.0);
                lp.upper.push(1.0);
                lp.rows[trace].coeffs.push((k, 1.0));
            }
        }
        Ok(Presolved { lp, kept, zero })
    }

    /// Repairs a nearly feasible iterate in place: clamps to the box, enforces
    /// the domination chain, mixes violating columns toward the identity
    /// column (models without a trace row) and resets the slacks to the
    /// exact residual magnitudes.
    pub fn polish(&self, x: &mut [f64]) {
        let (m, n) = (self.m(), self.n());
        let mut xm = DenseMatrix::from_fn(n, n, |i, j| x[j * n + i].clamp(0.0, 1.0e300));
        for i in 0..n {
            xm[(i, i)] = xm[(i, i)].clamp(0.0, 1.0);
        }
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    let (a, b) = self.domination_coeffs(i, j);
                    let cap = if a > 0.0 { b * xm[(i, i)] / a } else { 0.0 };
                    if xm[(i, j)] > cap {
                        xm[(i, j)] = cap;
                    }
                }
            }
        }
        let mut resid = self.residual_norms(&xm).expect("square iterate");
        if self.model != LpModel::Hottopixx {
            for j in 0..n {
                let b = self.column_budget(j);
                if resid[j] > b && resid[j] > 0.0 {
                    // residual of (1-t) X(:,j) + t e_j scales by (1-t)
                    let t = (1.0 - b / resid[j]).clamp(0.0, 1.0);
                    for i in 0..n {
                        xm[(i, j)] *= 1.0 - t;
                    }
                    xm[(j, j)] += t;
                    xm[(j, j)] = xm[(j, j)].min(1.0);
                }
            }
            // diagonal growth never breaks the domination rows of row j
            resid = self.residual_norms(&xm).expect("square iterate");
        }
        let _ = resid;
        let prod = self.data.matmul(&xm).expect("square iterate");
        x[..n * n].copy_from_slice(xm.as_slice());
        for j in 0..n {
            for i in 0..m {
                x[n * n + j * m + i] = (self.data[(i, j)] - prod[(i, j)]).abs();
            }
        }
    }

    /// Short JSON description for logs and debugging.
    pub fn to_json(&self) -> serde_json::Value {
        let digest = self
            .objective_p
            .iter()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, v| (h ^ v.to_bits()).wrapping_mul(0x1000_0000_01b3));
        serde_json::json!({
            "model": self.model.tag(),
            "m": self.m(),
            "n": self.n(),
            "rho": self.rho,
            "epsilon": self.epsilon,
            "r": self.r,
            "p_digest": format!("{digest:016x}"),
            "p_min": self.objective_p.iter().cloned().fold(f64::INFINITY, f64::min),
            "p_max": self.objective_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// An LP assembled without its zero data columns.
#[derive(Clone, Debug)]
pub struct Presolved {
    pub lp: StandardLp,
    /// Original indices of the columns kept in the reduced model.
    pub kept: Vec<usize>,
    /// Original indices of the zero columns.
    pub zero: Vec<usize>,
}

impl Presolved {
    /// Lifts a solution of the reduced LP to the full `n x n` weight
    /// matrix and the full variable vector (`X` then `S`).
    pub fn expand(&self, spec: &LpSpec, x: &[f64]) -> (DenseMatrix, Vec<f64>) {
        let (n, m) = (spec.n(), spec.m());
        let nk = self.kept.len();
        let mut xm = DenseMatrix::zeros(n, n);
        for (b, &j) in self.kept.iter().enumerate() {
            for (a, &i) in self.kept.iter().enumerate() {
                xm[(i, j)] = x[b * nk + a];
            }
        }
        let extra = nk * nk + m * nk;
        for (t, &j) in self.zero.iter().enumerate() {
            xm[(j, j)] = match x.get(extra + t) {
                Some(v) => *v,
                None if spec.objective_p[j] < 0.0 => 1.0,
                None => 0.0,
            };
        }
        let mut full = vec![0.0; n * n + m * n];
        full[..n * n].copy_from_slice(xm.as_slice());
        for (b, &j) in self.kept.iter().enumerate() {
            for i in 0..m {
                full[n * n + j * m + i] = x[nk * nk + b * m + i];
            }
        }
        (xm, full)
    }
}

/// Row sense in the standard form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

/// One sparse constraint row `coeffs . x (<= | =) rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Variable naming scheme.
#[derive(Clone, Debug, PartialEq)]
pub enum VarLayout {
    /// `X(i,j)` followed by `S(i,j)`, both column-major.
    Matrix { n: usize, m: usize },
    Generic,
}

/// `min c'x` subject to sparse rows and variable bounds.
#[derive(Clone, Debug)]
pub struct StandardLp {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub layout: VarLayout,
    /// The structured model this LP was assembled from, if any.
    pub origin: Option<Arc<LpSpec>>,
}

impl StandardLp {
    /// A generic LP without matrix structure.
    pub fn new(objective: Vec<f64>, rows: Vec<Row>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let nv = objective.len();
        if lower.len() != nv || upper.len() != nv {
            return dim_err("bound vectors must match the objective length");
        }
        for row in &rows {
            if row.coeffs.iter().any(|(k, _)| *k >= nv) {
                return dim_err("row references an unknown variable");
            }
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u || l.is_nan() || u.is_nan()) {
            return pre_err("inconsistent variable bounds");
        }
        Ok(Self { objective, rows, lower, upper, layout: VarLayout::Generic, origin: None })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    pub fn var_name(&self, k: usize) -> String {
        match self.layout {
            VarLayout::Matrix { n, m } => {
                if k < n * n {
                    format!("X_{}_{}", k % n + 1, k / n + 1)
                } else if k >= n * n + m * n {
                    format!("D_{}", k - n * n - m * n + 1)
                } else {
                    let s = k - n * n;
                    format!("S_{}_{}", s % m + 1, s / m + 1)
                }
            }
            VarLayout::Generic => format!("V{}", k + 1),
        }
    }

    /// `n x n` block of a full solution vector (matrix layouts only).
    pub fn x_block(&self, x: &[f64]) -> Option<DenseMatrix> {
        match self.layout {
            VarLayout::Matrix { n, .. } => DenseMatrix::new(n, n, x[..n * n].to_vec()).ok(),
            VarLayout::Generic => None,
        }
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest absolute violation over rows and bounds.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(k, v)| v * x[k]).sum();
            let viol = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for (k, v) in x.iter().enumerate() {
            worst = worst.max(self.lower[k] - v).max(v - self.upper[k]);
        }
        worst
    }

    pub fn to_mps(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "NAME          SEPNMF");
        let _ = writeln!(s, "ROWS");
        let _ = writeln!(s, " N  COST");
        for (i, row) in self.rows.iter().enumerate() {
            let t = match row.sense {
                Sense::Le => 'L',
                Sense::Eq => 'E',
            };
            let _ = writeln!(s, " {}  R{}", t, i + 1);
        }
        // column-wise view of the rows
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.num_vars()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(k, v) in &row.coeffs {
                cols[k].push((i, v));
            }
        }
        let _ = writeln!(s, "COLUMNS");
        for (k, entries) in cols.iter().enumerate() {
            let name = self.var_name(k);
            let mut fields: Vec<(String, f64)> = Vec::new();
            if self.objective[k] != 0.0 {
                fields.push(("COST".to_string(), self.objective[k]));
            }
            fields.extend(entries.iter().map(|&(i, v)| (format!("R{}", i + 1), v)));
            if fields.is_empty() {
                // keep every variable declared
                fields.push(("COST".to_string(), 0.0));
            }
            for pair in fields.chunks(2) {
                let mut line = format!("    {:<8}  {:<8}  {:>12}", name, pair[0].0, mps_number(pair[0].1));
                if let Some((r2, v2)) = pair.get(1) {
                    let _ = write!(line, "   {:<8}  {:>12}", r2, mps_number(*v2));
                }
                let _ = writeln!(s, "{}", line);
            }
        }
        let _ = writeln!(s, "RHS");
        for (i, row) in self.rows.iter().enumerate() {
            if row.rhs != 0.0 {
                let _ = writeln!(s, "    {:<8}  {:<8}  {:>12}", "RHS", format!("R{}", i + 1), mps_number(row.rhs));
            }
        }
        let _ = writeln!(s, "BOUNDS");
        for k in 0..self.num_vars() {
            let (lo, hi) = (self.lower[k], self.upper[k]);
            let name = self.var_name(k);
            if lo == hi {
                let _ = writeln!(s, " FX {:<8}  {:<8}  {:>12}", "BND", name, mps_number(lo));
                continue;
            }
            if lo == f64::NEG_INFINITY {
                let _ = writeln!(s, " MI {:<8}  {:<8}", "BND", name);
            } else if lo != 0.0 {
                let _ = writeln!(s, " LO {:<8}  {:<8}  {:>12}", "BND", name, mps_number(lo));
            }
            if hi.is_finite() {
                let _ = writeln!(s, " UP {:<8}  {:<8}  {:>12}", "BND", name, mps_number(hi));
            }
        }
        let _ = writeln!(s, "ENDATA");
        s
    }
}

/// Formats a number into at most twelve characters (the fixed MPS field width).
fn mps_number(v: f64) -> String {
    let short = format!("{}", v);
    if short.len() <= 12 {
        return short;
    }
    for prec in (0..=10).rev() {
        let t = format!("{:.*e}", prec, v);
        if t.len() <= 12 {
            return t;
        }
    }
    format!("{:.0e}", v)
}

/// Writes the LP as a fixed-format MPS file (objective sense MIN).
pub fn export_mps(lp: &StandardLp, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, lp.to_mps())?;
    Ok(())
}
