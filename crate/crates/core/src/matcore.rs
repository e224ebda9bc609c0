//! Dense column-major matrices, the three matrix norms used throughout the
//! crate, column normalization and the seeded random number generator.

use std::fmt::Write as _;
use std::ops::{Index, IndexMut};
use std::path::Path;

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{dim_err, Error, Result};

/// Real matrix stored in column-major order. Every entry is finite.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl std::fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            let row: Vec<String> = (0..self.cols.min(12))
                .map(|j| format!("{:.4}", self[(i, j)]))
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    /// Builds a matrix from column-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return dim_err(format!(
                "data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos % rows.max(1), col: pos / rows.max(1) });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices (convenient for literals in tests).
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return dim_err("ragged rows");
        }
        let mut data = vec![0.0; r * c];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                data[j * r + i] = *v;
            }
        }
        Self::new(r, c, data)
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return dim_err("column length mismatch");
        }
        Self::new(rows, columns.len(), columns.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return dim_err(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rhs.col(j).iter().enumerate() {
                if b != 0.0 {
                    for (d, a) in dst.iter_mut().zip(self.col(k)) {
                        *d += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return dim_err("vector length does not match column count");
        }
        let mut out = vec![0.0; self.rows];
        for (j, &b) in x.iter().enumerate() {
            if b != 0.0 {
                for (d, a) in out.iter_mut().zip(self.col(j)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return dim_err("shape mismatch in subtraction");
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return dim_err("shape mismatch in addition");
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// Columns `idx` in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            if j >= self.cols {
                return dim_err(format!("column index {} out of range {}", j, self.cols));
            }
            data.extend_from_slice(self.col(j));
        }
        Ok(Self { rows: self.rows, cols: idx.len(), data })
    }

    /// Horizontal concatenation `[self, rhs]`.
    pub fn hcat(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.rows != rhs.rows {
            return dim_err("row mismatch in concatenation");
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(Self { rows: self.rows, cols: self.cols + rhs.cols, data })
    }

    pub fn column_l1_norms(&self) -> Vec<f64> {
        (0..self.cols).map(|j| l1(self.col(j))).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_column_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Result<Self> {
        Self::new(m.nrows(), m.ncols(), m.as_slice().to_vec())
    }

    /// Serializes in the plain text format: a `rows cols` header followed by
    /// one whitespace-separated row per line. Values use the shortest
    /// representation that round-trips exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format!("{:e}", self[(i, j)])).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) =
            lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: hline + 1, msg: e.to_string() })?;
        if dims.len() != 2 {
            return Err(Error::Parse { line: hline + 1, msg: "header must be `rows cols`".into() });
        }
        let (rows, cols) = (dims[0], dims[1]);
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            let (ln, line) = lines
                .next()
                .ok_or(Error::Parse { line: hline + 2 + i, msg: "missing row".into() })?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: ln + 1, msg: e.to_string() })?;
            if vals.len() != cols {
                return Err(Error::Parse {
                    line: ln + 1,
                    msg: format!("expected {} values, found {}", cols, vals.len()),
                });
            }
            for (j, v) in vals.into_iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_text(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

#[inline]
pub(crate) fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn require_nonempty(a: &DenseMatrix) -> Result<()> {
    if a.is_empty() {
        return dim_err("norm of an empty matrix");
    }
    Ok(())
}

/// Induced ℓ1 norm: the largest column absolute sum.
pub fn norm1_induced(a: &DenseMatrix) -> Result<f64> {
    require_nonempty(a)?;
    Ok((0..a.cols()).map(|j| l1(a.col(j))).fold(0.0, f64::max))
}

/// Sum of the absolute values of all entries.
pub fn norm_sum(a: &DenseMatrix) -> Result<f64> {
    require_nonempty(a)?;
    Ok(l1(a.as_slice()))
}

/// Frobenius norm.
pub fn norm_fro(a: &DenseMatrix) -> Result<f64> {
    require_nonempty(a)?;
    Ok(a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Scales every nonzero column to unit absolute sum. Zero columns are kept
/// as they are and reported with a scale of `0.0`.
pub fn normalize_columns_l1(a: &DenseMatrix) -> (DenseMatrix, Vec<f64>) {
    let mut out = a.clone();
    let mut scales = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let s = l1(a.col(j));
        scales.push(s);
        if s > 0.0 {
            out.col_mut(j).iter_mut().for_each(|v| *v /= s);
        }
    }
    (out, scales)
}

/// Indices of columns whose scale (as returned by [`normalize_columns_l1`]) is zero.
pub fn zero_columns(scales: &[f64]) -> Vec<usize> {
    scales.iter().enumerate().filter(|(_, s)| **s == 0.0).map(|(j, _)| j).collect()
}

/// Seeded generator used by every stochastic routine. ChaCha8 keeps the
/// stream identical for a given seed.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child generator for the given stream id.
    pub fn fork(&self, stream: u64) -> Rng {
        Rng::new(derive_seed(self.seed, &[stream]))
    }

    /// Uniform sample in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        for i in (1..v.len()).rev() {
            let j = self.below(i + 1);
            v.swap(i, j);
        }
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }

    /// Logarithm of a Gamma(shape, 1) sample. Shapes below one use the
    /// boost `G(a) = G(a + 1) * U^(1/a)` evaluated in log space so tiny
    /// shapes never underflow to an all-zero Dirichlet draw.
    pub fn log_gamma_sample(&mut self, shape: f64) -> f64 {
        assert!(shape > 0.0, "gamma shape must be positive");
        if shape < 1.0 {
            let g = Gamma::new(shape + 1.0, 1.0).expect("valid gamma").sample(&mut self.inner);
            let u: f64 = 1.0 - self.uniform();
            g.ln() + u.ln() / shape
        } else {
            let g: f64 = Gamma::new(shape, 1.0).expect("valid gamma").sample(&mut self.inner);
            g.ln()
        }
    }

    /// Dirichlet sample via normalized Gamma variates.
    pub fn dirichlet(&mut self, alpha: &[f64]) -> Vec<f64> {
        let logs: Vec<f64> = alpha.iter().map(|&a| self.log_gamma_sample(a)).collect();
        let mx = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - mx).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a sequence of stream identifiers.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, Strategy};

    fn m22() -> DenseMatrix {
        DenseMatrix::from_rows(&[&[1.0, -2.0], &[3.0, 4.0]]).unwrap()
    }

    #[test]
    fn norm1_examples() {
        assert_eq!(norm1_induced(&DenseMatrix::identity(3)).unwrap(), 1.0);
        assert_eq!(norm1_induced(&DenseMatrix::zeros(3, 2)).unwrap(), 0.0);
        // columns: |1|+|3| = 4, |-2|+|4| = 6
        assert_eq!(norm1_induced(&m22()).unwrap(), 6.0);
        assert!(matches!(norm1_induced(&DenseMatrix::zeros(0, 2)), Err(Error::Dimension(_))));
    }

    #[test]
    fn norm_sum_examples() {
        assert_eq!(norm_sum(&DenseMatrix::identity(3)).unwrap(), 3.0);
        assert_eq!(norm_sum(&DenseMatrix::zeros(2, 2)).unwrap(), 0.0);
        assert_eq!(norm_sum(&m22()).unwrap(), 10.0);
    }

    #[test]
    fn norm_fro_examples() {
        assert_eq!(norm_fro(&DenseMatrix::identity(4)).unwrap(), 2.0);
        assert_eq!(norm_fro(&DenseMatrix::zeros(2, 3)).unwrap(), 0.0);
        let a = DenseMatrix::from_rows(&[&[3.0, 0.0], &[4.0, 0.0]]).unwrap();
        assert_eq!(norm_fro(&a).unwrap(), 5.0);
    }

    #[test]
    fn normalize_examples() {
        let (n, s) = normalize_columns_l1(&DenseMatrix::identity(2).scaled(2.0));
        assert_eq!(n, DenseMatrix::identity(2));
        assert_eq!(s, vec![2.0, 2.0]);

        let a = DenseMatrix::from_rows(&[&[1.0, 0.0], &[3.0, 0.0]]).unwrap();
        let (n, s) = normalize_columns_l1(&a);
        assert_eq!(n.col(0), &[0.25, 0.75]);
        assert_eq!(n.col(1), &[0.0, 0.0]);
        assert_eq!(s, vec![4.0, 0.0]);
        assert_eq!(zero_columns(&s), vec![1]);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(matches!(
            DenseMatrix::new(2, 1, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn text_round_trip_and_errors() {
        let a = DenseMatrix::from_rows(&[&[0.1, 1.0 / 3.0, -2e-17], &[1e300, 7.0, 0.0]]).unwrap();
        let b = DenseMatrix::from_text(&a.to_text()).unwrap();
        assert_eq!(a, b);
        let err = DenseMatrix::from_text("2 2\n1 2\n3 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn rng_is_deterministic() {
        let mut a = Rng::new(7);
        let mut b = Rng::new(7);
        let xa: Vec<f64> = (0..16).map(|_| a.normal()).collect();
        let xb: Vec<f64> = (0..16).map(|_| b.normal()).collect();
        assert_eq!(xa, xb);
        assert_ne!(Rng::new(7).fork(1).uniform(), Rng::new(7).fork(2).uniform());
    }

    #[test]
    fn dirichlet_tiny_shapes_sum_to_one() {
        let mut rng = Rng::new(3);
        for _ in 0..200 {
            let d = rng.dirichlet(&[1e-3, 0.01, 0.5, 2.0]);
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(d.iter().all(|v| *v >= 0.0));
        }
    }

    fn arb_matrix() -> impl Strategy<Value = DenseMatrix> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-10.0f64..10.0, r * c)
                .prop_map(move |d| DenseMatrix::new(r, c, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn induced_norm_is_submultiplicative(a in arb_matrix(), seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let x: Vec<f64> = (0..a.cols()).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            let ax = a.matvec(&x).unwrap();
            prop_assert!(l1(&ax) <= norm1_induced(&a).unwrap() * l1(&x) + 1e-12);
        }

        #[test]
        fn normalized_columns_have_unit_sum(a in arb_matrix()) {
            let (n, s) = normalize_columns_l1(&a);
            for j in 0..a.cols() {
                if s[j] > 0.0 {
                    prop_assert!((l1(n.col(j)) - 1.0).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn norms_vanish_only_at_zero(a in arb_matrix()) {
            let zero = a.as_slice().iter().all(|v| *v == 0.0);
            for v in [norm1_induced(&a).unwrap(), norm_sum(&a).unwrap(), norm_fro(&a).unwrap()] {
                prop_assert!(v >= 0.0);
                prop_assert_eq!(v == 0.0, zero);
            }
        }
    }
}
