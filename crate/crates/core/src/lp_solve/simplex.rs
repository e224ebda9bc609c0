//! Bounded-variable revised primal simplex.
//!
//! Every row gets a slack (`[0, inf)` for `<=` rows, `[0, 0]` for equality
//! rows). Rows violated by the starting point receive an artificial variable
//! and phase one drives their sum to zero. The basis is held as a sparse LU
//! factorization with product-form updates, rebuilt periodically.

use std::time::Instant;

use super::lu::BasisFactor;
use super::{LogEntry, RawSolution, SolveOptions, Status};
use crate::error::{Error, Result};
use crate::lp_build::{Sense, StandardLp, VarLayout};

const PIVOT_TOL: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const BLAND_AFTER: usize = 50;

/// A column of the extended problem (structural, slack or artificial).
enum Column<'a> {
    Sparse(&'a [(usize, f64)]),
    Unit { row: usize, sign: f64 },
}

struct Tableau<'a> {
    nr: usize,
    nv: usize,
    /// CSC columns of the structural part.
    cols: Vec<Vec<(usize, f64)>>,
    art_rows: Vec<(usize, f64)>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    /// Position in the basis or `usize::MAX`.
    pos: Vec<usize>,
    head: Vec<usize>,
    factor: Option<BasisFactor>,
    rhs: Vec<f64>,
    lp: &'a StandardLp,
}

impl<'a> Tableau<'a> {
    fn total(&self) -> usize {
        self.nv + self.nr + self.art_rows.len()
    }

    fn column(&self, j: usize) -> Column<'_> {
        if j < self.nv {
            Column::Sparse(&self.cols[j])
        } else if j < self.nv + self.nr {
            Column::Unit { row: j - self.nv, sign: 1.0 }
        } else {
            let (row, sign) = self.art_rows[j - self.nv - self.nr];
            Column::Unit { row, sign }
        }
    }

    fn is_basic(&self, j: usize) -> bool {
        self.pos[j] != usize::MAX
    }

    /// `B^{-1} a_j`, indexed by basis position.
    fn ftran(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match self.column(j) {
            Column::Sparse(entries) => {
                for &(i, v) in entries {
                    out[i] = v;
                }
            }
            Column::Unit { row, sign } => out[row] = sign,
        }
        let mut scratch = vec![0.0; self.nr];
        self.factor.as_ref().expect("factorized basis").ftran(out, &mut scratch);
    }

    /// Dual prices `y = B^{-T} c_B`.
    fn prices(&self, y: &mut [f64]) {
        for (p, v) in y.iter_mut().enumerate() {
            *v = self.cost[self.head[p]];
        }
        let mut scratch = vec![0.0; self.nr];
        self.factor.as_ref().expect("factorized basis").btran(y, &mut scratch);
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        match self.column(j) {
            Column::Sparse(entries) => self.cost[j] - entries.iter().map(|&(i, v)| y[i] * v).sum::<f64>(),
            Column::Unit { row, sign } => self.cost[j] - sign * y[row],
        }
    }

    /// Refactorizes the basis and recomputes basic values.
    fn refactor(&mut self) -> Result<()> {
        let columns: Vec<Vec<(usize, f64)>> = self
            .head
            .iter()
            .map(|&j| match self.column(j) {
                Column::Sparse(entries) => entries.to_vec(),
                Column::Unit { row, sign } => vec![(row, sign)],
            })
            .collect();
        self.factor = Some(BasisFactor::new(self.nr, &columns)?);
        self.recompute_basics();
        Ok(())
    }

    fn recompute_basics(&mut self) {
        let mut r = self.rhs.clone();
        for j in 0..self.total() {
            if self.is_basic(j) || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            match self.column(j) {
                Column::Sparse(entries) => {
                    for &(i, v) in entries {
                        r[i] -= v * xj;
                    }
                }
                Column::Unit { row, sign } => r[row] -= sign * xj,
            }
        }
        let mut scratch = vec![0.0; self.nr];
        self.factor.as_ref().expect("factorized basis").ftran(&mut r, &mut scratch);
        for (p, v) in r.into_iter().enumerate() {
            let j = self.head[p];
            self.x[j] = v;
        }
    }

    /// Runs simplex iterations on the current cost vector.
    fn optimize(&mut self, opts: &SolveOptions, start: Instant, iters: &mut usize) -> Result<Status> {
        let nr = self.nr;
        let total = self.total();
        let mut y = vec![0.0; nr];
        let mut alpha = vec![0.0; nr];
        let mut since_refactor = 0;
        let mut degenerate = 0;
        let max_iters = opts.max_iters.unwrap_or(1_000_000);
        loop {
            if *iters >= max_iters {
                return Ok(Status::IterationLimit);
            }
            if *iters % 64 == 0 {
                if let Some(limit) = opts.time_limit {
                    if start.elapsed().as_secs_f64() > limit {
                        return Ok(Status::TimeLimit);
                    }
                }
            }
            let bland = degenerate >= BLAND_AFTER;
            self.prices(&mut y);
            let mut enter = None;
            let mut best = 0.0;
            for j in 0..total {
                if self.is_basic(j) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced_cost(j, &y);
                let at_upper = self.x[j] >= self.upper[j] && self.upper[j] > self.lower[j];
                let gain = if at_upper { d } else { -d };
                if gain > OPT_TOL {
                    if bland {
                        enter = Some((j, at_upper));
                        break;
                    }
                    if gain > best {
                        best = gain;
                        enter = Some((j, at_upper));
                    }
                }
            }
            let Some((q, at_upper)) = enter else {
                return Ok(Status::Optimal);
            };
            let dir = if at_upper { -1.0 } else { 1.0 };
            self.ftran(q, &mut alpha);

            // Harris two-pass ratio test
            let ratio = |p: usize, slack: f64| -> Option<f64> {
                let a = dir * alpha[p];
                if a.abs() <= PIVOT_TOL {
                    return None;
                }
                let j = self.head[p];
                if a > 0.0 {
                    Some(((self.x[j] - self.lower[j]).max(0.0) + slack) / a)
                } else if self.upper[j].is_finite() {
                    Some(((self.upper[j] - self.x[j]).max(0.0) + slack) / -a)
                } else {
                    None
                }
            };
            let flip = self.upper[q] - self.lower[q];
            let mut leave: Option<usize> = None;
            let mut step;
            if bland {
                step = f64::INFINITY;
                for p in 0..nr {
                    if let Some(t) = ratio(p, 0.0) {
                        let better = match leave {
                            None => true,
                            Some(l) => t < step - 1e-12 || (t <= step + 1e-12 && self.head[p] < self.head[l]),
                        };
                        if better {
                            step = t.min(step);
                            leave = Some(p);
                        }
                    }
                }
            } else {
                let mut tmax = f64::INFINITY;
                for p in 0..nr {
                    if let Some(t) = ratio(p, HARRIS_TOL) {
                        tmax = tmax.min(t);
                    }
                }
                let mut best_piv = 0.0;
                step = f64::INFINITY;
                for p in 0..nr {
                    if let Some(t) = ratio(p, 0.0) {
                        if t <= tmax && alpha[p].abs() > best_piv {
                            best_piv = alpha[p].abs();
                            leave = Some(p);
                            step = t;
                        }
                    }
                }
            }
            *iters += 1;
            if flip <= step {
                if !flip.is_finite() {
                    return Err(Error::Solver("problem is unbounded".into()));
                }
                // bound flip, basis unchanged
                for p in 0..nr {
                    let j = self.head[p];
                    self.x[j] -= dir * flip * alpha[p];
                }
                self.x[q] = if at_upper { self.lower[q] } else { self.upper[q] };
                degenerate = 0;
                continue;
            }
            let Some(r) = leave else {
                return Err(Error::Solver("problem is unbounded".into()));
            };
            let step = step.max(0.0);
            for p in 0..nr {
                let j = self.head[p];
                self.x[j] -= dir * step * alpha[p];
            }
            self.x[q] += dir * step;
            let out = self.head[r];
            self.x[out] = if dir * alpha[r] > 0.0 { self.lower[out] } else { self.upper[out] };
            self.pos[out] = usize::MAX;
            self.pos[q] = r;
            self.head[r] = q;
            self.factor.as_mut().expect("factorized basis").update(r, &alpha);
            if step <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            since_refactor += 1;
            let etas = self.factor.as_ref().map_or(0, |f| f.eta_nnz());
            if since_refactor >= REFACTOR_EVERY || etas > 20 * nr || alpha[r].abs() < 1e-7 {
                self.refactor()?;
                since_refactor = 0;
            }
        }
    }
}

pub(crate) fn solve(lp: &StandardLp, opts: &SolveOptions, start: Instant) -> Result<RawSolution> {
    let nv = lp.num_vars();
    let nr = lp.num_rows();
    if let Some(k) = lp.lower.iter().position(|l| !l.is_finite()) {
        return Err(Error::Solver(format!(
            "variable {} has an infinite lower bound; split free variables first",
            lp.var_name(k)
        )));
    }
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
    for (i, row) in lp.rows.iter().enumerate() {
        for &(k, v) in &row.coeffs {
            if v != 0.0 {
                cols[k].push((i, v));
            }
        }
    }
    // starting point: lower bounds, except the diagonal of X at its upper
    // bound (the identity is feasible for the rank-free models)
    let mut x0: Vec<f64> = lp.lower.clone();
    if let VarLayout::Matrix { n, .. } = lp.layout {
        for i in 0..n {
            let k = i * n + i;
            if lp.upper[k].is_finite() {
                x0[k] = lp.upper[k];
            }
        }
    }
    let mut residual: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
    for (k, c) in cols.iter().enumerate() {
        if x0[k] != 0.0 {
            for &(i, v) in c {
                residual[i] -= v * x0[k];
            }
        }
    }
    let mut art_rows = Vec::new();
    let mut head = vec![0usize; nr];
    for (i, row) in lp.rows.iter().enumerate() {
        let r = residual[i];
        let slack_ok = match row.sense {
            Sense::Le => r >= 0.0,
            Sense::Eq => r == 0.0,
        };
        if slack_ok {
            head[i] = nv + i;
        } else {
            let sign = if r >= 0.0 { 1.0 } else { -1.0 };
            head[i] = nv + nr + art_rows.len();
            art_rows.push((i, sign));
        }
    }
    let na = art_rows.len();
    let total = nv + nr + na;
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    for row in &lp.rows {
        lower.push(0.0);
        upper.push(if row.sense == Sense::Le { f64::INFINITY } else { 0.0 });
    }
    lower.extend(std::iter::repeat(0.0).take(na));
    upper.extend(std::iter::repeat(f64::INFINITY).take(na));
    let mut x = x0;
    x.extend(std::iter::repeat(0.0).take(nr + na));
    let mut pos = vec![usize::MAX; total];
    for (p, &j) in head.iter().enumerate() {
        pos[j] = p;
    }
    let mut cost = vec![0.0; total];
    for c in cost.iter_mut().skip(nv + nr) {
        *c = 1.0;
    }
    let mut t = Tableau {
        nr,
        nv,
        cols,
        art_rows,
        lower,
        upper,
        cost,
        x,
        pos,
        head,
        factor: None,
        rhs: lp.rows.iter().map(|r| r.rhs).collect(),
        lp,
    };
    t.refactor()?;

    let mut iters = 0;
    let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
    if na > 0 {
        let status = t.optimize(opts, start, &mut iters)?;
        if status != Status::Optimal {
            return Ok(finish(&t, status, iters, start));
        }
        let infeas: f64 = (nv + nr..total).map(|j| t.x[j].max(0.0)).sum();
        if infeas > 1e-8 * scale {
            return Ok(finish(&t, Status::Infeasible, iters, start));
        }
        for j in nv + nr..total {
            t.upper[j] = 0.0;
            if !t.is_basic(j) {
                t.x[j] = 0.0;
            }
        }
    }
    for (j, c) in t.cost.iter_mut().enumerate() {
        *c = if j < nv { lp.objective[j] } else { 0.0 };
    }
    let status = t.optimize(opts, start, &mut iters)?;
    t.refactor()?;
    Ok(finish(&t, status, iters, start))
}

fn finish(t: &Tableau<'_>, status: Status, iterations: usize, start: Instant) -> RawSolution {
    let mut x: Vec<f64> = t.x[..t.nv].to_vec();
    // basic values carry rounding noise; snap them into the box
    for (k, v) in x.iter_mut().enumerate() {
        *v = v.clamp(t.lp.lower[k], t.lp.upper[k]);
    }
    let primal_res = t.lp.max_violation(&x);
    let obj = t.lp.objective_value(&x);
    RawSolution {
        x,
        status,
        iterations,
        primal_res,
        gap: 0.0,
        log: vec![LogEntry { iter: iterations, obj, primal_res, gap: 0.0 }],
        runtime: start.elapsed().as_secs_f64(),
    }
}
