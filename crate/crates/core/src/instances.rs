//! Generators for every data set used in the experiments: the Dirichlet and
//! middle-point synthetic models with dense, sparse and pointwise noise, the
//! swimmer images, an outlier model and two adversarial constructions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, pre_err, Error, Result};
use crate::matcore::{norm1_induced, normalize_columns_l1, DenseMatrix, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HModel {
    Dirichlet,
    MiddlePoints,
    AdversarialExample1,
    AdversarialThm1b,
    Swimmer,
    Outlier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePattern {
    /// Every entry nonzero.
    Dense,
    /// Each entry kept with probability 1/4.
    Sparse,
    /// One nonzero per nonzero column.
    Pointwise,
    /// The unmasked middle-point direction (same as `Dense` for that model).
    Structural,
    None,
}

impl NoisePattern {
    pub fn tag(self) -> &'static str {
        match self {
            NoisePattern::Dense => "dense",
            NoisePattern::Sparse => "sparse",
            NoisePattern::Pointwise => "pointwise",
            NoisePattern::Structural => "structural",
            NoisePattern::None => "none",
        }
    }
}

/// Which generator produced an instance and with which parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub h_model: HModel,
    pub noise_pattern: NoisePattern,
    pub parameters: BTreeMap<String, f64>,
}

impl ModelDescriptor {
    fn new(h_model: HModel, noise_pattern: NoisePattern) -> Self {
        Self { h_model, noise_pattern, parameters: BTreeMap::new() }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.parameters.get(key).copied()
    }
}

/// A noisy separable matrix with its ground truth. Column `j` of `m_tilde`
/// equals `w_true * h_true(:, j) + noise(:, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub m_tilde: DenseMatrix,
    pub w_true: DenseMatrix,
    pub h_true: DenseMatrix,
    pub noise: DenseMatrix,
    /// Position of each column of `W` in `m_tilde` (0-based).
    pub true_indices: Vec<usize>,
    pub outlier_indices: Vec<usize>,
    pub epsilon: f64,
    pub model: ModelDescriptor,
    pub seed: u64,
}

impl Instance {
    pub fn m(&self) -> usize {
        self.m_tilde.rows()
    }

    pub fn n(&self) -> usize {
        self.m_tilde.cols()
    }

    pub fn r(&self) -> usize {
        self.true_indices.len()
    }

    /// Noiseless data `w_true * h_true`.
    pub fn m_clean(&self) -> DenseMatrix {
        self.w_true.matmul(&self.h_true).expect("consistent instance")
    }

    /// The columns of `W` as they appear in `m_tilde` (noise included).
    pub fn w_observed(&self) -> DenseMatrix {
        self.m_tilde.select_columns(&self.true_indices).expect("valid indices")
    }

    /// Writes the matrices as text files plus `manifest.json` (indices 1-based).
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.m_tilde.write_text(dir.join("m_tilde.txt"))?;
        self.w_true.write_text(dir.join("w_true.txt"))?;
        self.h_true.write_text(dir.join("h_true.txt"))?;
        self.noise.write_text(dir.join("noise.txt"))?;
        let manifest = Manifest {
            model: self.model.clone(),
            epsilon: self.epsilon,
            seed: self.seed,
            true_indices: self.true_indices.iter().map(|k| k + 1).collect(),
            outlier_indices: self.outlier_indices.iter().map(|k| k + 1).collect(),
        };
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
        let to_zero = |v: &[usize]| -> Result<Vec<usize>> {
            v.iter()
                .map(|&k| k.checked_sub(1).ok_or_else(|| Error::Precondition("manifest indices are 1-based".into())))
                .collect()
        };
        let inst = Instance {
            m_tilde: DenseMatrix::read_text(dir.join("m_tilde.txt"))?,
            w_true: DenseMatrix::read_text(dir.join("w_true.txt"))?,
            h_true: DenseMatrix::read_text(dir.join("h_true.txt"))?,
            noise: DenseMatrix::read_text(dir.join("noise.txt"))?,
            true_indices: to_zero(&manifest.true_indices)?,
            outlier_indices: to_zero(&manifest.outlier_indices)?,
            epsilon: manifest.epsilon,
            model: manifest.model,
            seed: manifest.seed,
        };
        if inst.true_indices.iter().chain(&inst.outlier_indices).any(|&k| k >= inst.n()) {
            return dim_err("manifest index out of range");
        }
        Ok(inst)
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    model: ModelDescriptor,
    epsilon: f64,
    seed: u64,
    true_indices: Vec<usize>,
    outlier_indices: Vec<usize>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return pre_err(format!("noise level must be finite and nonnegative, got {epsilon}"));
    }
    Ok(())
}

/// Keeps the entries of `base` selected by `pattern`.
fn apply_pattern(base: &mut DenseMatrix, pattern: NoisePattern, rng: &mut Rng) {
    let (m, n) = base.shape();
    match pattern {
        NoisePattern::Dense | NoisePattern::Structural => {}
        NoisePattern::None => *base = DenseMatrix::zeros(m, n),
        NoisePattern::Sparse => {
            for j in 0..n {
                for v in base.col_mut(j) {
                    if !rng.bernoulli(0.25) {
                        *v = 0.0;
                    }
                }
            }
        }
        NoisePattern::Pointwise => {
            for j in 0..n {
                let nz: Vec<usize> = (0..m).filter(|&i| base[(i, j)] != 0.0).collect();
                if nz.is_empty() {
                    continue;
                }
                let keep = nz[rng.below(nz.len())];
                for i in 0..m {
                    if i != keep {
                        base[(i, j)] = 0.0;
                    }
                }
            }
        }
    }
}

fn scale_to(mut noise: DenseMatrix, epsilon: f64) -> Result<DenseMatrix> {
    if epsilon == 0.0 {
        let (m, n) = noise.shape();
        return Ok(DenseMatrix::zeros(m, n));
    }
    let norm = norm1_induced(&noise)?;
    if norm == 0.0 {
        return Err(Error::Generation("noise pattern left no nonzero entry to scale".into()));
    }
    let s = epsilon / norm;
    for j in 0..noise.cols() {
        noise.col_mut(j).iter_mut().for_each(|v| *v *= s);
    }
    Ok(noise)
}

/// Gaussian noise with the given pattern, zero on `protect`, scaled so that
/// its induced ℓ1 norm equals `epsilon`.
pub fn gen_noise(
    shape: (usize, usize),
    pattern: NoisePattern,
    protect: &[usize],
    epsilon: f64,
    rng: &mut Rng,
) -> Result<DenseMatrix> {
    check_epsilon(epsilon)?;
    let (m, n) = shape;
    if epsilon == 0.0 || pattern == NoisePattern::None {
        if epsilon > 0.0 {
            return pre_err("a positive noise level needs a noise pattern");
        }
        return Ok(DenseMatrix::zeros(m, n));
    }
    let mut base = DenseMatrix::from_fn(m, n, |_, _| rng.normal());
    apply_pattern(&mut base, pattern, rng);
    for &j in protect {
        if j >= n {
            return dim_err(format!("protected column {j} out of range"));
        }
        base.col_mut(j).iter_mut().for_each(|v| *v = 0.0);
    }
    scale_to(base, epsilon)
}

fn random_w(m: usize, r: usize, rng: &mut Rng) -> DenseMatrix {
    let w = DenseMatrix::from_fn(m, r, |_, _| rng.uniform());
    normalize_columns_l1(&w).0
}

fn dirichlet_columns(r: usize, count: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    // parameters in (0, 1], redrawn for every instance
    let alpha: Vec<f64> = (0..r).map(|_| 1.0 - rng.uniform()).collect();
    (0..count).map(|_| rng.dirichlet(&alpha)).collect()
}

/// Permutes columns: column `j` of the output is column `perm[j]` of the input.
fn permute(
    m: &DenseMatrix,
    h: &DenseMatrix,
    noise: &DenseMatrix,
    perm: &[usize],
) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
    Ok((m.select_columns(perm)?, h.select_columns(perm)?, noise.select_columns(perm)?))
}

fn inverse_perm(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (j, &p) in perm.iter().enumerate() {
        inv[p] = j;
    }
    inv
}

fn assemble(
    w: DenseMatrix,
    h_cols: Vec<Vec<f64>>,
    noise: DenseMatrix,
    r_true: usize,
    outliers: std::ops::Range<usize>,
    epsilon: f64,
    model: ModelDescriptor,
    rng: &mut Rng,
    permute_columns: bool,
) -> Result<Instance> {
    let k = w.cols();
    let h = DenseMatrix::from_columns(k, &h_cols)?;
    let clean = w.matmul(&h)?;
    let noisy = clean.add(&noise)?;
    let n = noisy.cols();
    let perm: Vec<usize> = if permute_columns { rng.permutation(n) } else { (0..n).collect() };
    let (m_tilde, h_true, noise) = permute(&noisy, &h, &noise, &perm)?;
    let inv = inverse_perm(&perm);
    Ok(Instance {
        m_tilde,
        w_true: w,
        h_true,
        noise,
        true_indices: (0..r_true).map(|k| inv[k]).collect(),
        outlier_indices: outliers.map(|k| inv[k]).collect(),
        epsilon,
        model,
        seed: rng.seed(),
    })
}

fn identity_columns(r: usize) -> Vec<Vec<f64>> {
    (0..r).map(|k| (0..r).map(|i| if i == k { 1.0 } else { 0.0 }).collect()).collect()
}

fn beta_of(h_cols: &[Vec<f64>], r: usize) -> f64 {
    h_cols[r..].iter().flat_map(|c| c.iter().copied()).fold(0.0, f64::max)
}

/// `W` uniform with unit columns, `H = [I_r, H']` with Dirichlet columns,
/// Gaussian noise of the given pattern, random column order.
pub fn gen_dirichlet(
    m: usize,
    n: usize,
    r: usize,
    epsilon: f64,
    pattern: NoisePattern,
    rng: &mut Rng,
) -> Result<Instance> {
    check_epsilon(epsilon)?;
    if r == 0 || r > m.min(n) {
        return dim_err(format!("rank {r} must lie in 1..=min(m, n) = {}", m.min(n)));
    }
    if pattern == NoisePattern::Structural {
        return pre_err("the structural pattern only applies to the middle-point model");
    }
    let w = random_w(m, r, rng);
    let mut h_cols = identity_columns(r);
    h_cols.extend(dirichlet_columns(r, n - r, rng));
    let noise = gen_noise((m, n), pattern, &[], epsilon, rng)?;
    let beta = beta_of(&h_cols, r);
    let model = ModelDescriptor::new(HModel::Dirichlet, pattern).with("beta", beta);
    assemble(w, h_cols, noise, r, 0..0, epsilon, model, rng, true)
}

/// Like [`gen_dirichlet`] but the first `r(r-1)/2` data columns are the
/// midpoints of pairs of columns of `W`; noise pushes every non-vertex column
/// away from the vertex centroid and leaves the vertices untouched.
pub fn gen_middle_points(
    m: usize,
    n: usize,
    r: usize,
    epsilon: f64,
    pattern: NoisePattern,
    rng: &mut Rng,
) -> Result<Instance> {
    check_epsilon(epsilon)?;
    if r == 0 || r > m {
        return dim_err(format!("rank {r} must lie in 1..={m}"));
    }
    let pairs = r * (r - 1) / 2;
    if n < r + pairs {
        return dim_err(format!("n = {n} is smaller than r + r(r-1)/2 = {}", r + pairs));
    }
    let w = random_w(m, r, rng);
    let mut h_cols = identity_columns(r);
    for a in 0..r {
        for b in a + 1..r {
            let mut c = vec![0.0; r];
            c[a] = 0.5;
            c[b] = 0.5;
            h_cols.push(c);
        }
    }
    h_cols.extend(dirichlet_columns(r, n - r - pairs, rng));
    let h = DenseMatrix::from_columns(r, &h_cols)?;
    let clean = w.matmul(&h)?;
    let wbar: Vec<f64> = (0..m).map(|i| w.row(i).iter().sum::<f64>() / r as f64).collect();
    let mut noise = if epsilon > 0.0 && pattern != NoisePattern::None {
        let mut d = DenseMatrix::from_fn(m, n, |i, j| if j < r { 0.0 } else { clean[(i, j)] - wbar[i] });
        apply_pattern(&mut d, pattern, rng);
        scale_to(d, epsilon)?
    } else {
        if epsilon > 0.0 {
            return pre_err("a positive noise level needs a noise pattern");
        }
        DenseMatrix::zeros(m, n)
    };
    for j in 0..r {
        noise.col_mut(j).iter_mut().for_each(|v| *v = 0.0);
    }
    let beta = beta_of(&h_cols, r);
    let model = ModelDescriptor::new(HModel::MiddlePoints, pattern).with("beta", beta);
    assemble(w, h_cols, noise, r, 0..0, epsilon, model, rng, true)
}

/// Dirichlet-type instance with a margin: every non-vertex column of `H`
/// has entries at most `beta_max` (rejection sampling of Dirichlet(1)
/// draws), dense Gaussian noise on all columns, random column order. The
/// descriptor records `kappa` of `W` and the realized `beta`.
pub fn gen_conditioned(
    m: usize,
    n: usize,
    r: usize,
    beta_max: f64,
    epsilon: f64,
    rng: &mut Rng,
) -> Result<Instance> {
    check_epsilon(epsilon)?;
    if r == 0 || r > m.min(n) {
        return dim_err(format!("rank {r} must lie in 1..=min(m, n) = {}", m.min(n)));
    }
    if !(beta_max > 1.0 / r as f64 && beta_max < 1.0) {
        return pre_err(format!("beta bound must lie in (1/r, 1), got {beta_max}"));
    }
    let w = random_w(m, r, rng);
    let mut h_cols = identity_columns(r);
    let ones = vec![1.0; r];
    while h_cols.len() < n {
        let mut accepted = None;
        for _ in 0..10_000 {
            let h = rng.dirichlet(&ones);
            if h.iter().all(|v| *v <= beta_max) {
                accepted = Some(h);
                break;
            }
        }
        h_cols.push(accepted.ok_or_else(|| Error::Generation("margin rejection sampling stalled".into()))?);
    }
    let noise = gen_noise((m, n), NoisePattern::Dense, &[], epsilon, rng)?;
    let beta = beta_of(&h_cols, r);
    let kappa = crate::analysis::kappa(&w)?;
    let model = ModelDescriptor::new(HModel::Dirichlet, NoisePattern::Dense).with("beta", beta).with("kappa", kappa);
    assemble(w, h_cols, noise, r, 0..0, epsilon, model, rng, true)
}

/// Swimmer-style images: `positions^limbs` images (rows), each limb at one
/// of `positions` locations. Every limb location lights three pixels, a
/// 14-pixel body is always on and 158 background pixels are always off.
/// Columns are ordered as three copies of the limb indicators, then the
/// body, then the background.
pub fn gen_swimmer(limbs: usize, positions: usize) -> Result<Instance> {
    if limbs == 0 || positions < 2 {
        return pre_err("swimmer needs at least one limb and two positions");
    }
    const BODY: usize = 14;
    const BACKGROUND: usize = 158;
    let rows = positions
        .checked_pow(limbs as u32)
        .filter(|v| *v <= 1 << 20)
        .ok_or_else(|| Error::Precondition("too many swimmer images".into()))?;
    let r = limbs * positions;
    // indicator of limb l at position p in image `img`
    let w = DenseMatrix::from_fn(rows, r, |img, k| {
        let (l, p) = (k / positions, k % positions);
        let pos_of_l = (img / positions.pow(l as u32)) % positions;
        if pos_of_l == p {
            1.0
        } else {
            0.0
        }
    });
    let n = 3 * r + BODY + BACKGROUND;
    let mut h_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for _ in 0..3 {
        h_cols.extend(identity_columns(r));
    }
    for _ in 0..BODY {
        h_cols.push(vec![1.0 / limbs as f64; r]);
    }
    for _ in 0..BACKGROUND {
        h_cols.push(vec![0.0; r]);
    }
    let noise = DenseMatrix::zeros(rows, n);
    let model = ModelDescriptor::new(HModel::Swimmer, NoisePattern::None)
        .with("limbs", limbs as f64)
        .with("positions", positions as f64);
    let mut rng = Rng::new(0);
    assemble(w, h_cols, noise, r, 0..0, 0.0, model, &mut rng, false)
}

/// `M = [I_r, e/r]`, noiseless, unpermuted.
pub fn gen_example1(r: usize) -> Result<Instance> {
    if r < 2 {
        return pre_err("the construction needs r >= 2");
    }
    let w = DenseMatrix::identity(r);
    let mut h_cols = identity_columns(r);
    h_cols.push(vec![1.0 / r as f64; r]);
    let model = ModelDescriptor::new(HModel::AdversarialExample1, NoisePattern::None).with("r", r as f64);
    let mut rng = Rng::new(0);
    assemble(w, h_cols, DenseMatrix::zeros(r, r + 1), r, 0..0, 0.0, model, &mut rng, false)
}

/// The tightness construction: `W = [(kappa/2) I_r; (1 - kappa/2) e']`,
/// `H = [I_r, beta I_r + (1-beta)/(r-1) (ee' - I_r)]`, `N = 0`. Also returns
/// the objective `p = (big_k e_r, e_r)` that favours the non-vertex columns.
pub fn gen_thm1b(r: usize, kappa: f64, beta: f64, big_k: f64) -> Result<(Instance, Vec<f64>)> {
    if r < 2 {
        return pre_err("the construction needs r >= 2");
    }
    if !(kappa > 0.0 && kappa <= 1.0) {
        return pre_err(format!("kappa = {kappa} must lie in (0, 1]"));
    }
    if !(beta >= 1.0 / r as f64 && beta < 1.0) {
        return pre_err(format!("beta = {beta} must lie in [1/r, 1)"));
    }
    if !(big_k > 0.0 && big_k.is_finite()) {
        return pre_err("the objective weight must be positive");
    }
    let w = DenseMatrix::from_fn(r + 1, r, |i, k| {
        if i == r {
            1.0 - kappa / 2.0
        } else if i == k {
            kappa / 2.0
        } else {
            0.0
        }
    });
    let off = (1.0 - beta) / (r as f64 - 1.0);
    let mut h_cols = identity_columns(r);
    for k in 0..r {
        h_cols.push((0..r).map(|i| if i == k { beta } else { off }).collect());
    }
    let model = ModelDescriptor::new(HModel::AdversarialThm1b, NoisePattern::None)
        .with("kappa", kappa)
        .with("beta", beta)
        .with("big_k", big_k);
    let mut rng = Rng::new(0);
    let inst = assemble(w, h_cols, DenseMatrix::zeros(r + 1, 2 * r), r, 0..0, 0.0, model, &mut rng, false)?;
    let mut p = vec![big_k; r];
    p.extend(std::iter::repeat(1.0).take(r));
    Ok((inst, p))
}

/// The explicit feasible point of the tightness construction:
/// `X = [(1-a) I, 0; a I, I]` with `a = rho eps / (kappa (1 - beta))`.
pub fn thm1b_feasible_x(r: usize, kappa: f64, beta: f64, rho: f64, epsilon: f64) -> DenseMatrix {
    let a = rho * epsilon / (kappa * (1.0 - beta));
    DenseMatrix::from_fn(2 * r, 2 * r, |i, j| {
        if j < r {
            if i == j {
                1.0 - a
            } else if i == j + r {
                a
            } else {
                0.0
            }
        } else if i == j {
            1.0
        } else {
            0.0
        }
    })
}

/// Separable data with `t` outliers: `M = [W, T, W H']` with `W` a perturbed
/// identity on the first `r` rows, each outlier carrying half of its mass on
/// a private row (so its cone is far from the span of `W`) and interior
/// points drawn from Dirichlet(1). Conditioning parameters are computed and
/// stored in the model descriptor (`kappa`, `eta`, `delta`, `beta`, `nu`).
pub fn gen_outlier_instance(
    m: usize,
    r: usize,
    t: usize,
    n: usize,
    epsilon: f64,
    rng: &mut Rng,
) -> Result<Instance> {
    check_epsilon(epsilon)?;
    if r == 0 || m < r + t {
        return dim_err(format!("need m >= r + t, got m = {m}, r = {r}, t = {t}"));
    }
    if n < r + t + 1 {
        return dim_err(format!("need n >= r + t + 1, got n = {n}"));
    }
    let ones_r = vec![1.0; r];
    let w = DenseMatrix::from_columns(
        m,
        &(0..r)
            .map(|k| {
                let u = rng.dirichlet(&ones_r);
                (0..m).map(|i| if i < r { 0.9 * f64::from(i == k) + 0.1 * u[i] } else { 0.0 }).collect()
            })
            .collect::<Vec<_>>(),
    )?;
    let tm = DenseMatrix::from_columns(
        m,
        &(0..t)
            .map(|k| {
                let v = rng.dirichlet(&ones_r);
                (0..m).map(|i| if i < r { 0.5 * v[i] } else if i == r + k { 0.5 } else { 0.0 }).collect()
            })
            .collect::<Vec<_>>(),
    )?;
    let wt = w.hcat(&tm)?;
    let k = r + t;
    let mut h_cols = identity_columns(k);
    for _ in 0..n - k {
        let d = rng.dirichlet(&ones_r);
        let mut c = d;
        c.extend(std::iter::repeat(0.0).take(t));
        h_cols.push(c);
    }
    let beta = beta_of(&h_cols, k);
    let clean = wt.matmul(&DenseMatrix::from_columns(k, &h_cols)?)?;

    let kappa = crate::analysis::kappa(&wt)?;
    let (eta, delta) = if t > 0 {
        crate::analysis::outlier_conditions(&w, &tm, &clean)?
    } else {
        (f64::INFINITY, crate::analysis::outlier_conditions(&w, &DenseMatrix::zeros(m, 0), &clean)?.1)
    };
    if !(eta > 0.0) || !(delta > 0.0) {
        return Err(Error::Generation(format!(
            "outlier construction failed: eta = {eta:e}, delta = {delta:e}, kappa = {kappa:e}"
        )));
    }
    let noise = gen_noise((m, n), NoisePattern::Dense, &[], epsilon, rng)?;
    let nu = kappa.min(eta).min(delta);
    let mut model = ModelDescriptor::new(HModel::Outlier, NoisePattern::Dense)
        .with("kappa", kappa)
        .with("delta", delta)
        .with("beta", beta)
        .with("nu", nu)
        .with("t", t as f64);
    if eta.is_finite() {
        model = model.with("eta", eta);
    }
    assemble(wt, h_cols, noise, r, r..k, epsilon, model, rng, true)
}

/// The six synthetic data models of the benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SyntheticModel {
    pub h_model: HModel,
    pub pattern: NoisePattern,
}

impl SyntheticModel {
    pub const ALL: [SyntheticModel; 6] = [
        SyntheticModel { h_model: HModel::Dirichlet, pattern: NoisePattern::Dense },
        SyntheticModel { h_model: HModel::Dirichlet, pattern: NoisePattern::Sparse },
        SyntheticModel { h_model: HModel::Dirichlet, pattern: NoisePattern::Pointwise },
        SyntheticModel { h_model: HModel::MiddlePoints, pattern: NoisePattern::Dense },
        SyntheticModel { h_model: HModel::MiddlePoints, pattern: NoisePattern::Sparse },
        SyntheticModel { h_model: HModel::MiddlePoints, pattern: NoisePattern::Pointwise },
    ];

    pub fn tag(&self) -> String {
        let h = match self.h_model {
            HModel::Dirichlet => "dirichlet",
            HModel::MiddlePoints => "middle_points",
            HModel::AdversarialExample1 => "example1",
            HModel::AdversarialThm1b => "thm1b",
            HModel::Swimmer => "swimmer",
            HModel::Outlier => "outlier",
        };
        format!("{}_{}", h, self.pattern.tag())
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|m| m.tag() == tag)
            .copied()
            .ok_or_else(|| Error::Precondition(format!("unknown data model `{tag}`")))
    }

    pub fn generate(&self, m: usize, n: usize, r: usize, epsilon: f64, rng: &mut Rng) -> Result<Instance> {
        match self.h_model {
            HModel::Dirichlet => gen_dirichlet(m, n, r, epsilon, self.pattern, rng),
            HModel::MiddlePoints => gen_middle_points(m, n, r, epsilon, self.pattern, rng),
            other => pre_err(format!("{other:?} is not a synthetic sweep model")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_shape() {
        let inst = gen_example1(5).unwrap();
        assert_eq!(inst.m_tilde.shape(), (5, 6));
        assert!(inst.m_tilde.col(5).iter().all(|v| (*v - 0.2).abs() < 1e-15));
        assert_eq!(inst.true_indices, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn thm1b_columns_sum_to_one() {
        let (inst, p) = gen_thm1b(4, 0.8, 0.3, 1e6).unwrap();
        for j in 0..inst.n() {
            assert!((inst.m_tilde.col(j).iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
        assert_eq!(p, vec![1e6, 1e6, 1e6, 1e6, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn noise_patterns() {
        let mut rng = Rng::new(3);
        let z = gen_noise((4, 5), NoisePattern::Dense, &[], 0.0, &mut rng).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let p = gen_noise((6, 50), NoisePattern::Pointwise, &[0, 1], 0.3, &mut rng).unwrap();
        for j in 0..50 {
            assert!(p.col(j).iter().filter(|v| **v != 0.0).count() <= 1);
        }
        assert!(p.col(0).iter().all(|v| *v == 0.0));
        assert!((norm1_induced(&p).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn all_masked_noise_is_an_error() {
        let mut rng = Rng::new(1);
        let r = gen_noise((3, 2), NoisePattern::Dense, &[0, 1], 0.1, &mut rng);
        assert!(matches!(r, Err(Error::Generation(_))));
    }

    #[test]
    fn conditioned_instances_respect_the_margin() {
        let mut rng = Rng::new(5);
        let inst = gen_conditioned(10, 25, 4, 0.5, 0.02, &mut rng).unwrap();
        let beta = inst.model.param("beta").unwrap();
        assert!(beta <= 0.5 && beta > 0.25);
        assert!(inst.model.param("kappa").unwrap() > 0.0);
        assert!((norm1_induced(&inst.noise).unwrap() - 0.02).abs() < 1e-12);
        let mut k = inst.true_indices.clone();
        k.sort_unstable();
        k.dedup();
        assert_eq!(k.len(), 4);
        assert!(gen_conditioned(10, 25, 2, 0.5, 0.0, &mut rng).is_err());
    }
}
