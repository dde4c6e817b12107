//! Grunsky coefficient matrices and their operator norms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{BivariateSeries, MapClass, TaylorMap};

const SYMMETRY_TOL: f64 = 1e-12;
const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000;
const RESTART_SEED: u64 = 0x0067_7275_6e73_6b79;

/// The `N×N` truncation of `(√(mn) α_{mn})`, complex symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct GrunskyMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for GrunskyMatrix {
    type Error = Error;
    fn try_from(m: MatrixJson) -> Result<Self> {
        let entries = m
            .entries
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        GrunskyMatrix::new(m.n, entries)
    }
}

impl From<GrunskyMatrix> for MatrixJson {
    fn from(g: GrunskyMatrix) -> Self {
        MatrixJson {
            n: g.n,
            entries: g.entries.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

/// Largest `|a_ij - a_ji|` relative to the largest entry (absolute when the matrix is tiny).
fn asymmetry(n: usize, entries: &[Complex64]) -> f64 {
    let scale = entries.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((entries[i * n + j] - entries[j * n + i]).norm());
        }
    }
    worst / scale
}

impl GrunskyMatrix {
    /// Row-major entries; rejects matrices that are not symmetric to 1e-12 and
    /// then symmetrizes exactly.
    pub fn new(n: usize, mut entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        let asym = asymmetry(n, &entries);
        if asym > SYMMETRY_TOL {
            return Err(Error::Symmetry(asym));
        }
        for i in 0..n {
            for j in i + 1..n {
                let avg = (entries[i * n + j] + entries[j * n + i]) * 0.5;
                entries[i * n + j] = avg;
                entries[j * n + i] = avg;
            }
        }
        Ok(GrunskyMatrix { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        GrunskyMatrix {
            n,
            entries: vec![Complex64::default(); n * n],
        }
    }

    /// Diagonal matrix, e.g. `diag(t^m)` for `z + t/z`.
    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut g = GrunskyMatrix::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            g.entries[i * n + i] = d;
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `β_{mn}` with 1-based indices.
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[(m - 1) * self.n + (n - 1)]
    }

    /// Leading `k×k` block.
    pub fn leading(&self, k: usize) -> GrunskyMatrix {
        let k = k.min(self.n);
        let mut entries = Vec::with_capacity(k * k);
        for i in 0..k {
            entries.extend_from_slice(&self.entries[i * self.n..i * self.n + k]);
        }
        GrunskyMatrix { n: k, entries }
    }

    pub fn scaled(&self, c: Complex64) -> GrunskyMatrix {
        GrunskyMatrix {
            n: self.n,
            entries: self.entries.iter().map(|&e| e * c).collect(),
        }
    }
}

/// A point of the unit sphere of `l²`, truncated to `N` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitL2Vector(Vec<Complex64>);

impl UnitL2Vector {
    pub fn new(x: Vec<Complex64>) -> Result<Self> {
        let norm = l2(&x);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Normalization(format!("vector has norm {norm}")));
        }
        Ok(UnitL2Vector(x))
    }

    /// Rescale a nonzero vector onto the sphere.
    pub fn normalized(x: Vec<Complex64>) -> Result<Self> {
        let norm = l2(&x);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Normalization("cannot normalize the zero vector".into()));
        }
        Ok(UnitL2Vector(x.into_iter().map(|c| c / norm).collect()))
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut x = vec![Complex64::default(); n];
        x[k - 1] = Complex64::new(1.0, 0.0);
        UnitL2Vector(x)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn l2(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Grunsky matrix of a normalized map, `N×N`.
///
/// Disk maps need `a_1 … a_{2N+1}`, exterior maps `b_0 … b_{2N-1}`: the
/// entry `(N, N)` sits at total degree `2N` of the bivariate logarithm.
pub fn grunsky_matrix(f: &TaylorMap, n: usize) -> Result<GrunskyMatrix> {
    if n == 0 {
        return Ok(GrunskyMatrix::zeros(0));
    }
    let big_d = 2 * n;
    let mut q = BivariateSeries::zeros(big_d);
    q.set(0, 0, Complex64::new(1.0, 0.0));
    let sign = match f.class() {
        MapClass::DiskS => {
            let needed = 2 * n + 1;
            if f.truncation() < needed {
                return Err(Error::Truncation {
                    needed,
                    available: f.truncation(),
                });
            }
            // (f(z) - f(ζ))/(z - ζ) = Σ_k a_k Σ_{j+l=k-1} z^j ζ^l
            for d in 1..=big_d {
                let a = f.coeff(d + 1);
                for j in 0..=d {
                    q.set(j, d - j, a);
                }
            }
            1.0
        }
        MapClass::ExteriorSigma => {
            let needed = 2 * n - 1;
            if f.truncation() < needed {
                return Err(Error::Truncation {
                    needed,
                    available: f.truncation(),
                });
            }
            // in u = 1/z, v = 1/ζ: 1 - uv Σ_k b_k Σ_{i+j=k-1} u^i v^j
            for d in 2..=big_d {
                let b = -f.coeff(d - 1);
                for j in 1..d {
                    q.set(j, d - j, b);
                }
            }
            -1.0
        }
    };
    let log = q.log()?;
    let mut entries = Vec::with_capacity(n * n);
    for m in 1..=n {
        for k in 1..=n {
            entries.push(log.get(m, k) * (sign * ((m * k) as f64).sqrt()));
        }
    }
    GrunskyMatrix::new(n, entries)
}

fn matvec(n: usize, a: &[Complex64], x: &[Complex64], out: &mut [Complex64]) {
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        out[i] = row.iter().zip(x).map(|(&r, &v)| r * v).sum();
    }
}

fn matvec_adjoint(n: usize, a: &[Complex64], x: &[Complex64], out: &mut [Complex64]) {
    out.iter_mut().for_each(|o| *o = Complex64::default());
    for i in 0..n {
        let xi = x[i];
        for j in 0..n {
            out[j] += a[i * n + j].conj() * xi;
        }
    }
}

fn power_iteration(n: usize, a: &[Complex64], start: Vec<Complex64>) -> f64 {
    let mut x = start;
    let norm = l2(&x);
    if norm == 0.0 {
        return 0.0;
    }
    x.iter_mut().for_each(|c| *c /= norm);
    let mut y = vec![Complex64::default(); n];
    let mut z = vec![Complex64::default(); n];
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITER {
        matvec(n, a, &x, &mut y);
        matvec_adjoint(n, a, &y, &mut z);
        lambda = y.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if lambda == 0.0 {
            return 0.0;
        }
        let residual = z
            .iter()
            .zip(&x)
            .map(|(&zi, &xi)| (zi - xi * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let zn = l2(&z);
        x.iter_mut().zip(&z).for_each(|(xi, &zi)| *xi = zi / zn);
        if residual <= POWER_TOL * lambda {
            // one more Rayleigh quotient with the updated vector
            matvec(n, a, &x, &mut y);
            lambda = lambda.max(y.iter().map(|c| c.norm_sqr()).sum::<f64>());
            break;
        }
    }
    lambda.sqrt()
}

/// Largest singular value of a square matrix given row-major, by power
/// iteration on `AᴴA` from `e_1` plus one seeded random restart.
pub fn largest_singular_value(n: usize, a: &[Complex64]) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut e1 = vec![Complex64::default(); n];
    e1[0] = Complex64::new(1.0, 0.0);
    let first = power_iteration(n, a, e1);
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    let start: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    first.max(power_iteration(n, a, start))
}

/// `sup_{‖x‖=1} |Σ β_{mn} x_m x_n|`, which for a complex symmetric matrix
/// equals its largest singular value (Takagi factorization).
pub fn grunsky_norm(g: &GrunskyMatrix) -> Result<f64> {
    let asym = asymmetry(g.n, &g.entries);
    if asym > SYMMETRY_TOL {
        return Err(Error::Symmetry(asym));
    }
    Ok(largest_singular_value(g.n, &g.entries))
}

/// Norm of `(β_{mn} r^{-m-n})`, the Grunsky norm for maps of the disk `|z| < r`.
pub fn weighted_grunsky_norm(g: &GrunskyMatrix, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let n = g.n;
    let weights: Vec<f64> = (1..=n).map(|m| r.powi(-(m as i32))).collect();
    let mut entries = g.entries.clone();
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] *= weights[i] * weights[j];
        }
    }
    grunsky_norm(&GrunskyMatrix { n, entries })
}

/// `h_x = Σ β_{mn} x_m x_n`.
pub fn bilinear_functional(g: &GrunskyMatrix, x: &UnitL2Vector) -> Result<Complex64> {
    if x.len() != g.n {
        return Err(Error::DimensionMismatch {
            expected: g.n,
            got: x.len(),
        });
    }
    let xs = x.as_slice();
    let mut y = vec![Complex64::default(); g.n];
    matvec(g.n, &g.entries, xs, &mut y);
    Ok(xs.iter().zip(&y).map(|(&a, &b)| a * b).sum())
}
