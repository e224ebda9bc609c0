//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! Gaussian elimination picks pivots by a Markowitz rule restricted to the
//! sparsest column, with threshold partial pivoting. Basis changes are
//! appended as eta columns until the next refactorization.

use crate::error::{Error, Result};

const THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-11;
const DROP_TOL: f64 = 1e-14;

pub(crate) struct BasisFactor {
    n: usize,
    /// Pivot row and column (basis position) of each elimination step.
    piv_row: Vec<usize>,
    piv_col: Vec<usize>,
    piv_val: Vec<f64>,
    /// Row multipliers of each step: `b[i] -= l * b[piv_row]`.
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    /// Remaining pivot-row entries of each step, by basis position.
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    /// Product-form updates: position, pivot, other nonzeros.
    etas: Vec<(usize, f64, Vec<(usize, f64)>)>,
    eta_nnz: usize,
}

impl BasisFactor {
    /// Factorizes the square matrix whose column `p` is `columns[p]`
    /// (row index, value pairs).
    pub(crate) fn new(n: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self> {
        assert_eq!(columns.len(), n);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (c, col) in columns.iter().enumerate() {
            for &(i, v) in col {
                if v != 0.0 {
                    rows[i].push((c, v));
                    cols[c].push(i);
                }
            }
        }
        let mut row_active = vec![true; n];
        let mut col_active = vec![true; n];
        let mut f = BasisFactor {
            n,
            piv_row: Vec::with_capacity(n),
            piv_col: Vec::with_capacity(n),
            piv_val: Vec::with_capacity(n),
            l_ptr: vec![0],
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_ptr: vec![0],
            u_idx: Vec::new(),
            u_val: Vec::new(),
            etas: Vec::new(),
            eta_nnz: 0,
        };
        let mut work = vec![0.0; n];
        let mut mark = vec![false; n];
        for _ in 0..n {
            // sparsest active column
            let mut best_c = usize::MAX;
            let mut best_cnt = usize::MAX;
            for c in 0..n {
                if col_active[c] && cols[c].len() < best_cnt {
                    best_cnt = cols[c].len();
                    best_c = c;
                    if best_cnt <= 1 {
                        break;
                    }
                }
            }
            let c = best_c;
            if best_cnt == 0 {
                return Err(Error::Solver("singular basis: empty column".into()));
            }
            let value_in = |rows: &Vec<Vec<(usize, f64)>>, i: usize| -> f64 {
                rows[i].iter().find(|e| e.0 == c).map_or(0.0, |e| e.1)
            };
            let cmax = cols[c].iter().map(|&i| value_in(&rows, i).abs()).fold(0.0, f64::max);
            if cmax < SINGULAR_TOL {
                return Err(Error::Solver("singular basis: negligible column".into()));
            }
            let mut p = usize::MAX;
            let mut p_len = usize::MAX;
            let mut p_abs = 0.0;
            for &i in &cols[c] {
                let a = value_in(&rows, i).abs();
                if a >= THRESHOLD * cmax && (rows[i].len() < p_len || (rows[i].len() == p_len && a > p_abs)) {
                    p = i;
                    p_len = rows[i].len();
                    p_abs = a;
                }
            }
            let pivot = value_in(&rows, p);
            let prow = std::mem::take(&mut rows[p]);
            row_active[p] = false;
            col_active[c] = false;
            for &(cc, _) in &prow {
                cols[cc].retain(|&i| i != p);
            }
            // eliminate column c from the other rows
            let others: Vec<usize> = std::mem::take(&mut cols[c]);
            for i in others {
                let a = value_in(&rows, i);
                if a == 0.0 {
                    continue;
                }
                let l = a / pivot;
                f.l_idx.push(i);
                f.l_val.push(l);
                for &(cc, v) in &rows[i] {
                    work[cc] = v;
                    mark[cc] = true;
                }
                let mut fill = Vec::new();
                for &(cc, v) in &prow {
                    if cc == c {
                        continue;
                    }
                    if mark[cc] {
                        work[cc] -= l * v;
                    } else {
                        work[cc] = -l * v;
                        mark[cc] = true;
                        fill.push(cc);
                    }
                }
                let mut new_row = Vec::with_capacity(rows[i].len() + fill.len());
                for &(cc, _) in rows[i].iter() {
                    if cc != c {
                        new_row.push((cc, work[cc]));
                    }
                    mark[cc] = false;
                }
                for cc in fill {
                    new_row.push((cc, work[cc]));
                    mark[cc] = false;
                    cols[cc].push(i);
                }
                rows[i] = new_row;
            }
            f.l_ptr.push(f.l_idx.len());
            for &(cc, v) in &prow {
                if cc != c && v != 0.0 {
                    f.u_idx.push(cc);
                    f.u_val.push(v);
                }
            }
            f.u_ptr.push(f.u_idx.len());
            f.piv_row.push(p);
            f.piv_col.push(c);
            f.piv_val.push(pivot);
        }
        debug_assert!(row_active.iter().all(|a| !a));
        Ok(f)
    }

    pub(crate) fn eta_nnz(&self) -> usize {
        self.eta_nnz
    }

    /// Solves `B x = b` in place: `b` is indexed by rows on input and by
    /// basis positions on output.
    pub(crate) fn ftran(&self, b: &mut [f64], scratch: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let bp = b[self.piv_row[k]];
            if bp != 0.0 {
                for e in self.l_ptr[k]..self.l_ptr[k + 1] {
                    b[self.l_idx[e]] -= self.l_val[e] * bp;
                }
            }
        }
        let x = scratch;
        for k in (0..n).rev() {
            let mut s = b[self.piv_row[k]];
            for e in self.u_ptr[k]..self.u_ptr[k + 1] {
                s -= self.u_val[e] * x[self.u_idx[e]];
            }
            x[self.piv_col[k]] = s / self.piv_val[k];
        }
        b.copy_from_slice(x);
        for (r, piv, entries) in &self.etas {
            let xr = b[*r] / piv;
            b[*r] = xr;
            if xr != 0.0 {
                for &(i, a) in entries {
                    b[i] -= a * xr;
                }
            }
        }
    }

    /// Solves `B' y = d` in place: `d` is indexed by basis positions on
    /// input and by rows on output.
    pub(crate) fn btran(&self, d: &mut [f64], scratch: &mut [f64]) {
        let n = self.n;
        for (r, piv, entries) in self.etas.iter().rev() {
            let s: f64 = entries.iter().map(|&(i, a)| a * d[i]).sum();
            d[*r] = (d[*r] - s) / piv;
        }
        let z = scratch;
        for k in 0..n {
            let zk = d[self.piv_col[k]] / self.piv_val[k];
            z[self.piv_row[k]] = zk;
            if zk != 0.0 {
                for e in self.u_ptr[k]..self.u_ptr[k + 1] {
                    d[self.u_idx[e]] -= self.u_val[e] * zk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = 0.0;
            for e in self.l_ptr[k]..self.l_ptr[k + 1] {
                s += self.l_val[e] * z[self.l_idx[e]];
            }
            z[self.piv_row[k]] -= s;
        }
        d.copy_from_slice(z);
    }

    /// Records that basis position `r` now holds the column whose FTRAN is
    /// `alpha`.
    pub(crate) fn update(&mut self, r: usize, alpha: &[f64]) {
        let entries: Vec<(usize, f64)> =
            alpha.iter().enumerate().filter(|&(i, a)| i != r && a.abs() > DROP_TOL).map(|(i, &a)| (i, a)).collect();
        self.eta_nnz += entries.len();
        self.etas.push((r, alpha[r], entries));
    }
}
