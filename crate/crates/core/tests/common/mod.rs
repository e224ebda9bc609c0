//! Helpers shared by the integration tests.
#![allow(dead_code)]

use sepnmf_core::lp_build::{Row, Sense, StandardLp};
use sepnmf_core::Rng;

/// Optimal value of a box-bounded LP by enumerating every basic solution:
/// choose `k` rows to hold with equality (all equality rows included) and
/// `k` basic variables, put the others at a bound, solve, keep the best
/// feasible point. `None` means infeasible.
pub fn vertex_enumeration(lp: &StandardLp) -> Option<f64> {
    let nv = lp.num_vars();
    let nr = lp.num_rows();
    assert!(lp.lower.iter().chain(&lp.upper).all(|v| v.is_finite()), "oracle needs finite bounds");
    let dense: Vec<Vec<f64>> = lp
        .rows
        .iter()
        .map(|r| {
            let mut a = vec![0.0; nv];
            for &(k, v) in &r.coeffs {
                a[k] += v;
            }
            a
        })
        .collect();
    let eq_rows: Vec<usize> = (0..nr).filter(|&i| lp.rows[i].sense == Sense::Eq).collect();
    let feasible = |x: &[f64]| -> bool {
        for (i, row) in lp.rows.iter().enumerate() {
            let lhs: f64 = dense[i].iter().zip(x).map(|(a, b)| a * b).sum();
            let ok = match row.sense {
                Sense::Le => lhs <= row.rhs + 1e-9,
                Sense::Eq => (lhs - row.rhs).abs() <= 1e-9,
            };
            if !ok {
                return false;
            }
        }
        x.iter().enumerate().all(|(k, v)| *v >= lp.lower[k] - 1e-9 && *v <= lp.upper[k] + 1e-9)
    };
    let mut best: Option<f64> = None;
    for k in 0..=nr.min(nv) {
        for rows in subsets(nr, k) {
            if !eq_rows.iter().all(|e| rows.contains(e)) {
                continue;
            }
            for basic in subsets(nv, k) {
                let nonbasic: Vec<usize> = (0..nv).filter(|v| !basic.contains(v)).collect();
                for mask in 0u64..(1u64 << nonbasic.len()) {
                    let mut x = vec![0.0; nv];
                    for (t, &v) in nonbasic.iter().enumerate() {
                        x[v] = if mask >> t & 1 == 1 { lp.upper[v] } else { lp.lower[v] };
                    }
                    if k > 0 {
                        let mut a: Vec<Vec<f64>> = rows.iter().map(|&i| basic.iter().map(|&v| dense[i][v]).collect()).collect();
                        let mut b: Vec<f64> = rows
                            .iter()
                            .map(|&i| lp.rows[i].rhs - nonbasic.iter().map(|&v| dense[i][v] * x[v]).sum::<f64>())
                            .collect();
                        match solve_dense(&mut a, &mut b) {
                            Some(sol) => {
                                for (t, &v) in basic.iter().enumerate() {
                                    x[v] = sol[t];
                                }
                            }
                            None => continue,
                        }
                    }
                    if feasible(&x) {
                        let obj: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                        best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                    }
                }
            }
        }
    }
    best
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            if f != 0.0 {
                for j in c..n {
                    a[i][j] -= f * a[c][j];
                }
                b[i] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|j| a[c][j] * x[j]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

/// Random LP with `nv` box-bounded variables and `nr` rows. Unless
/// `wild`, the right-hand sides are built around a point of the box so the
/// LP is feasible; wild LPs may be infeasible.
pub fn random_box_lp(nv: usize, nr: usize, wild: bool, rng: &mut Rng) -> StandardLp {
    let lower: Vec<f64> = (0..nv).map(|_| -rng.uniform()).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + 0.5 + 1.5 * rng.uniform()).collect();
    let x0: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| l + (u - l) * rng.uniform()).collect();
    let objective: Vec<f64> = (0..nv).map(|_| rng.normal()).collect();
    let rows = (0..nr)
        .map(|i| {
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for k in 0..nv {
                if rng.bernoulli(0.7) {
                    coeffs.push((k, rng.normal()));
                }
            }
            let ax: f64 = coeffs.iter().map(|&(k, v)| v * x0[k]).sum();
            let eq = i == 0 && nr > 1 && rng.bernoulli(0.3);
            let rhs = if wild { 2.0 * rng.normal() - 1.0 } else if eq { ax } else { ax + rng.uniform() };
            Row { coeffs, sense: if eq && !wild { Sense::Eq } else { Sense::Le }, rhs }
        })
        .collect();
    StandardLp::new(objective, rows, lower, upper).expect("consistent random LP")
}
