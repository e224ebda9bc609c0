//! Restarted primal-dual hybrid gradient for `min c'x` subject to
//! `Kx >= q` (inequality rows), `Kx = q` (equality rows) and `l <= x <= u`.
//!
//! The constraint matrix is equilibrated (Ruiz followed by a Pock-Chambolle
//! pass), steps use over-relaxation 1.5 and the iteration restarts from the
//! better of the current and averaged iterate whenever a normalized KKT
//! error has decayed enough. Infeasibility is certified by a dual ray taken
//! from the divergence of the dual iterates.

use std::time::Instant;

use super::{LogEntry, RawSolution, SolveOptions, Status};
use crate::error::Result;
use crate::lp_build::{Sense, StandardLp, VarLayout};

const RELAX: f64 = 1.5;
const CHECK_EVERY: usize = 64;
const RUIZ_ITERS: usize = 10;

struct Sparse {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    row_val: Vec<f64>,
    col_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    col_val: Vec<f64>,
}

impl Sparse {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>, ncols: usize) -> Self {
        let nrows = rows.len();
        let mut row_ptr = vec![0];
        let mut row_idx = Vec::new();
        let mut row_val = Vec::new();
        let mut counts = vec![0usize; ncols];
        for r in &rows {
            for &(k, v) in r {
                row_idx.push(k);
                row_val.push(v);
                counts[k] += 1;
            }
            row_ptr.push(row_idx.len());
        }
        let mut col_ptr = vec![0; ncols + 1];
        for k in 0..ncols {
            col_ptr[k + 1] = col_ptr[k] + counts[k];
        }
        let mut fill = col_ptr.clone();
        let mut col_idx = vec![0; row_idx.len()];
        let mut col_val = vec![0.0; row_idx.len()];
        for i in 0..nrows {
            for e in row_ptr[i]..row_ptr[i + 1] {
                let k = row_idx[e];
                col_idx[fill[k]] = i;
                col_val[fill[k]] = row_val[e];
                fill[k] += 1;
            }
        }
        Self { nrows, ncols, row_ptr, row_idx, row_val, col_ptr, col_idx, col_val }
    }

    fn scale(&mut self, dr: &[f64], dc: &[f64]) {
        for i in 0..self.nrows {
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                self.row_val[e] *= dr[i] * dc[self.row_idx[e]];
            }
        }
        for k in 0..self.ncols {
            for e in self.col_ptr[k]..self.col_ptr[k + 1] {
                self.col_val[e] *= dr[self.col_idx[e]] * dc[k];
            }
        }
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.row_val[e] * x[self.row_idx[e]];
            }
            *o = s;
        }
    }

    fn mul_t(&self, y: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for e in self.col_ptr[k]..self.col_ptr[k + 1] {
                s += self.col_val[e] * y[self.col_idx[e]];
            }
            *o = s;
        }
    }

    fn row_abs<F: Fn(f64, f64) -> f64>(&self, init: f64, f: F) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).fold(init, |a, e| f(a, self.row_val[e].abs())))
            .collect()
    }

    fn col_abs<F: Fn(f64, f64) -> f64>(&self, init: f64, f: F) -> Vec<f64> {
        (0..self.ncols)
            .map(|k| (self.col_ptr[k]..self.col_ptr[k + 1]).fold(init, |a, e| f(a, self.col_val[e].abs())))
            .collect()
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

struct Problem {
    k: Sparse,
    is_eq: Vec<bool>,
    /// scaled data
    c: Vec<f64>,
    q: Vec<f64>,
    l: Vec<f64>,
    u: Vec<f64>,
    dr: Vec<f64>,
    dc: Vec<f64>,
    q_inf: f64,
    c_inf: f64,
}

/// Convergence measures of one primal-dual point.
struct Measures {
    pobj: f64,
    dobj: f64,
    /// relative primal violation (max norm, original units)
    primal_rel: f64,
    /// relative dual violation for infinite bounds
    dual_rel: f64,
    gap_rel: f64,
    /// scaled l2 quantities for restarts
    primal_l2: f64,
    dual_l2: f64,
    gap_abs: f64,
}

impl Problem {
    fn measures(&self, x: &[f64], y: &[f64], kx: &[f64], kty: &[f64]) -> Measures {
        let mut primal_max: f64 = 0.0;
        let mut primal_l2 = 0.0;
        let mut dobj = 0.0;
        for i in 0..self.k.nrows {
            let mut v = self.q[i] - kx[i];
            if !self.is_eq[i] {
                v = v.max(0.0);
            }
            primal_l2 += v * v;
            primal_max = primal_max.max(v.abs() / self.dr[i]);
            dobj += self.q[i] * y[i];
        }
        let mut pobj = 0.0;
        let mut dual_l2 = 0.0;
        let mut dual_max: f64 = 0.0;
        for j in 0..self.k.ncols {
            pobj += self.c[j] * x[j];
            let lam = self.c[j] - kty[j];
            if lam > 0.0 {
                if self.l[j].is_finite() {
                    dobj += lam * self.l[j];
                } else {
                    dual_l2 += lam * lam;
                    dual_max = dual_max.max(lam / self.dc[j]);
                }
            } else if lam < 0.0 {
                if self.u[j].is_finite() {
                    dobj += lam * self.u[j];
                } else {
                    dual_l2 += lam * lam;
                    dual_max = dual_max.max(-lam / self.dc[j]);
                }
            }
        }
        let gap_abs = (pobj - dobj).abs();
        Measures {
            pobj,
            dobj,
            primal_rel: primal_max / (1.0 + self.q_inf),
            dual_rel: dual_max / (1.0 + self.c_inf),
            gap_rel: gap_abs / (1.0 + pobj.abs() + dobj.abs()),
            primal_l2: primal_l2.sqrt(),
            dual_l2: dual_l2.sqrt(),
            gap_abs,
        }
    }

    /// Value of the Farkas functional `q'd - max_{l<=x<=u} d'Kx` per unit of
    /// `||d||`; positive values certify primal infeasibility.
    fn farkas_ratio(&self, d: &[f64]) -> f64 {
        let norm = norm2(d);
        if norm == 0.0 {
            return f64::NEG_INFINITY;
        }
        let mut g = vec![0.0; self.k.ncols];
        self.k.mul_t(d, &mut g);
        let mut f: f64 = self.q.iter().zip(d).map(|(a, b)| a * b).sum();
        for j in 0..self.k.ncols {
            let gj = g[j];
            let best = if gj > 0.0 { self.u[j] * gj } else if gj < 0.0 { self.l[j] * gj } else { 0.0 };
            if !best.is_finite() {
                return f64::NEG_INFINITY;
            }
            f -= best;
        }
        f / norm
    }

    fn kkt(&self, m: &Measures, omega: f64) -> f64 {
        (omega * omega * m.primal_l2 * m.primal_l2
            + m.dual_l2 * m.dual_l2 / (omega * omega)
            + m.gap_abs * m.gap_abs)
            .sqrt()
    }
}

fn build(lp: &StandardLp) -> Problem {
    let nv = lp.num_vars();
    let mut rows = Vec::with_capacity(lp.num_rows());
    let mut q = Vec::with_capacity(lp.num_rows());
    let mut is_eq = Vec::with_capacity(lp.num_rows());
    for row in &lp.rows {
        let coeffs: Vec<(usize, f64)> = row.coeffs.iter().copied().filter(|(_, v)| *v != 0.0).collect();
        match row.sense {
            Sense::Le => {
                rows.push(coeffs.into_iter().map(|(k, v)| (k, -v)).collect());
                q.push(-row.rhs);
                is_eq.push(false);
            }
            Sense::Eq => {
                rows.push(coeffs);
                q.push(row.rhs);
                is_eq.push(true);
            }
        }
    }
    let mut k = Sparse::from_rows(rows, nv);
    let nr = k.nrows;
    let mut dr = vec![1.0; nr];
    let mut dc = vec![1.0; nv];
    for _ in 0..RUIZ_ITERS {
        let rmax = k.row_abs(0.0, f64::max);
        let cmax = k.col_abs(0.0, f64::max);
        let sr: Vec<f64> = rmax.iter().map(|v| if *v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        let sc: Vec<f64> = cmax.iter().map(|v| if *v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        k.scale(&sr, &sc);
        dr.iter_mut().zip(&sr).for_each(|(a, b)| *a *= b);
        dc.iter_mut().zip(&sc).for_each(|(a, b)| *a *= b);
    }
    let rsum = k.row_abs(0.0, |a, b| a + b);
    let csum = k.col_abs(0.0, |a, b| a + b);
    let sr: Vec<f64> = rsum.iter().map(|v| if *v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
    let sc: Vec<f64> = csum.iter().map(|v| if *v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
    k.scale(&sr, &sc);
    dr.iter_mut().zip(&sr).for_each(|(a, b)| *a *= b);
    dc.iter_mut().zip(&sc).for_each(|(a, b)| *a *= b);

    let q_inf = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let c_inf = lp.objective.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Problem {
        c: lp.objective.iter().zip(&dc).map(|(c, d)| c * d).collect(),
        q: q.iter().zip(&dr).map(|(q, d)| q * d).collect(),
        l: lp.lower.iter().zip(&dc).map(|(l, d)| l / d).collect(),
        u: lp.upper.iter().zip(&dc).map(|(u, d)| u / d).collect(),
        k,
        is_eq,
        dr,
        dc,
        q_inf,
        c_inf,
    }
}

fn spectral_norm(k: &Sparse) -> f64 {
    let mut v = vec![1.0 / (k.ncols.max(1) as f64).sqrt(); k.ncols];
    let mut kv = vec![0.0; k.nrows];
    let mut est = 0.0;
    for _ in 0..60 {
        k.mul(&v, &mut kv);
        k.mul_t(&kv, &mut v);
        let nv = norm2(&v);
        if nv == 0.0 {
            return 1.0;
        }
        est = nv.sqrt();
        v.iter_mut().for_each(|a| *a /= nv);
    }
    est.max(1e-12)
}

/// Starting primal point in the original variables.
fn start_point(lp: &StandardLp) -> Vec<f64> {
    let mut x: Vec<f64> = (0..lp.num_vars()).map(|k| 0.0f64.clamp(lp.lower[k], lp.upper[k])).collect();
    if let VarLayout::Matrix { n, .. } = lp.layout {
        for i in 0..n {
            x[i * n + i] = lp.upper[i * n + i].min(1.0);
        }
        if let Some(spec) = &lp.origin {
            spec.polish(&mut x);
        }
    }
    x
}

pub(crate) fn solve(lp: &StandardLp, opts: &SolveOptions, start: Instant) -> Result<RawSolution> {
    let p = build(lp);
    let (nv, nr) = (p.k.ncols, p.k.nrows);
    let feas_tol = opts.feas_tol_for(super::Engine::Pdhg);
    let gap_tol = opts.gap_tol_for(super::Engine::Pdhg);
    let max_iters = opts.max_iters.unwrap_or(400_000);

    let eta = 0.9 / spectral_norm(&p.k);
    let (cn, qn) = (norm2(&p.c), norm2(&p.q));
    let mut omega = if cn > 1e-10 && qn > 1e-10 { cn / qn } else { 1.0 };

    let mut x: Vec<f64> = start_point(lp).iter().zip(&p.dc).map(|(x, d)| x / d).collect();
    let mut y = vec![0.0; nr];
    let mut kx = vec![0.0; nr];
    let mut kty = vec![0.0; nv];
    p.k.mul(&x, &mut kx);

    let mut xn = x.clone();
    let mut yn = y.clone();
    let mut kxn = kx.clone();
    let mut ktyn = kty.clone();
    let mut sum_x = vec![0.0; nv];
    let mut sum_y = vec![0.0; nr];
    let mut sum_kx = vec![0.0; nr];
    let mut sum_kty = vec![0.0; nv];
    let mut count = 0usize;

    let mut restart_x = x.clone();
    let mut restart_y = y.clone();
    let m0 = p.measures(&x, &y, &kx, &kty);
    let mut kkt_restart = p.kkt(&m0, omega);
    let mut kkt_prev_cand = f64::INFINITY;
    let mut epoch_start = 0usize;
    let mut y_check = y.clone();
    let mut farkas_hits = 0;
    let mut log = Vec::new();
    let mut status = Status::IterationLimit;
    let mut best: Option<(Vec<f64>, f64, f64)> = None;

    let mut iter = 0usize;
    while iter < max_iters {
        let tau = eta / omega;
        let sigma = eta * omega;
        for j in 0..nv {
            xn[j] = (x[j] - tau * (p.c[j] - kty[j])).clamp(p.l[j], p.u[j]);
        }
        p.k.mul(&xn, &mut kxn);
        for i in 0..nr {
            let v = y[i] + sigma * (p.q[i] - (2.0 * kxn[i] - kx[i]));
            yn[i] = if p.is_eq[i] { v } else { v.max(0.0) };
        }
        p.k.mul_t(&yn, &mut ktyn);
        for j in 0..nv {
            x[j] += RELAX * (xn[j] - x[j]);
            kty[j] += RELAX * (ktyn[j] - kty[j]);
            sum_x[j] += xn[j];
            sum_kty[j] += ktyn[j];
        }
        for i in 0..nr {
            y[i] += RELAX * (yn[i] - y[i]);
            kx[i] += RELAX * (kxn[i] - kx[i]);
            sum_y[i] += yn[i];
            sum_kx[i] += kxn[i];
        }
        count += 1;
        iter += 1;

        if iter % CHECK_EVERY != 0 {
            continue;
        }
        let inv = 1.0 / count as f64;
        let ax: Vec<f64> = sum_x.iter().map(|v| v * inv).collect();
        let ay: Vec<f64> = sum_y.iter().map(|v| v * inv).collect();
        let akx: Vec<f64> = sum_kx.iter().map(|v| v * inv).collect();
        let akty: Vec<f64> = sum_kty.iter().map(|v| v * inv).collect();
        let mc = p.measures(&xn, &yn, &kxn, &ktyn);
        let ma = p.measures(&ax, &ay, &akx, &akty);
        log.push(LogEntry { iter, obj: mc.pobj, primal_res: mc.primal_rel, gap: mc.gap_rel });

        let done = |m: &Measures| m.primal_rel <= feas_tol && m.dual_rel <= feas_tol && m.gap_rel <= gap_tol;
        if done(&mc) {
            best = Some((xn.clone(), mc.dobj, mc.gap_rel));
            status = Status::Optimal;
            break;
        }
        if done(&ma) {
            best = Some((ax, ma.dobj, ma.gap_rel));
            status = Status::Optimal;
            break;
        }

        // dual ray test
        let mut d: Vec<f64> = yn.iter().zip(&y_check).map(|(a, b)| a - b).collect();
        for (i, di) in d.iter_mut().enumerate() {
            if !p.is_eq[i] {
                *di = di.max(0.0);
            }
        }
        if p.farkas_ratio(&d) > 1e-9 * (1.0 + p.q.iter().fold(0.0f64, |a, v| a.max(v.abs()))) {
            farkas_hits += 1;
            if farkas_hits >= 3 {
                status = Status::Infeasible;
                break;
            }
        } else {
            farkas_hits = 0;
        }
        y_check.copy_from_slice(&yn);

        if let Some(limit) = opts.time_limit {
            if start.elapsed().as_secs_f64() > limit {
                status = Status::TimeLimit;
                break;
            }
        }

        // adaptive restart
        let kc = p.kkt(&mc, omega);
        let ka = p.kkt(&ma, omega);
        let use_avg = ka < kc;
        let cand = kc.min(ka);
        let epoch = iter - epoch_start;
        let restart = cand <= 0.2 * kkt_restart
            || (cand <= 0.8 * kkt_restart && cand > kkt_prev_cand)
            || epoch as f64 >= 0.36 * iter as f64;
        kkt_prev_cand = cand;
        if restart {
            let (cx, cy, ckx, ckty) = if use_avg {
                (ax, ay, akx, akty)
            } else {
                (xn.clone(), yn.clone(), kxn.clone(), ktyn.clone())
            };
            let dx = dist2(&cx, &restart_x);
            let dy = dist2(&cy, &restart_y);
            if dx > 1e-10 && dy > 1e-10 {
                omega = (0.5 * (dy / dx).ln() + 0.5 * omega.ln()).exp();
            }
            x = cx;
            y = cy;
            kx = ckx;
            kty = ckty;
            restart_x.copy_from_slice(&x);
            restart_y.copy_from_slice(&y);
            let mr = p.measures(&x, &y, &kx, &kty);
            kkt_restart = p.kkt(&mr, omega);
            kkt_prev_cand = f64::INFINITY;
            sum_x.iter_mut().for_each(|v| *v = 0.0);
            sum_y.iter_mut().for_each(|v| *v = 0.0);
            sum_kx.iter_mut().for_each(|v| *v = 0.0);
            sum_kty.iter_mut().for_each(|v| *v = 0.0);
            count = 0;
            epoch_start = iter;
        }
    }

    let (xs, dobj) = match best {
        Some((xs, dobj, _)) => (xs, Some(dobj)),
        None => (xn.clone(), None),
    };
    let mut xo: Vec<f64> = xs.iter().zip(&p.dc).map(|(x, d)| x * d).collect();
    for (k, v) in xo.iter_mut().enumerate() {
        *v = v.clamp(lp.lower[k], lp.upper[k]);
    }
    if status != Status::Infeasible {
        if let Some(spec) = &lp.origin {
            spec.polish(&mut xo);
        }
    }
    let obj = lp.objective_value(&xo);
    let gap = match dobj {
        Some(d) => (obj - d).abs() / (1.0 + obj.abs() + d.abs()),
        None => f64::NAN,
    };
    let primal_res = lp.max_violation(&xo);
    Ok(RawSolution { x: xo, status, iterations: iter, primal_res, gap, log, runtime: start.elapsed().as_secs_f64() })
}
