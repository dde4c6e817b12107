//! Quantities derived from Grunsky and Teichmüller norms, and estimators for
//! the limit norms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grunsky::{grunsky_matrix, grunsky_norm, largest_singular_value, UnitL2Vector};
use crate::quad::gauss_legendre;
use crate::series::TaylorMap;
use crate::transforms::{pullback_beltrami, root_transform, truncate_beltrami, PointField, QuadraticDifferential};

/// `d_T(0, S_f) = tanh⁻¹ k`.
pub fn teich_distance(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("dilatation must lie in [0,1), got {k}")));
    }
    Ok(k.atanh())
}

/// One row of a root-transform table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEntry {
    pub p: usize,
    pub n: usize,
    pub kappa: f64,
}

/// `κ(ℛ_p f)` for a range of `p` at one truncation, with the limit estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub entries: Vec<NormEntry>,
    /// Largest even-`p` value at the largest truncation.
    pub kappa_hat: f64,
    pub k_reference: Option<f64>,
    /// Every κ lies in `[0, 1]`.
    pub within_unit: bool,
    /// The even-`p` values do not decrease with `p`.
    pub even_nondecreasing: bool,
}

impl NormReport {
    pub fn from_entries(entries: Vec<NormEntry>, k_reference: Option<f64>) -> Self {
        let n_max = entries.iter().map(|e| e.n).max().unwrap_or(0);
        let even: Vec<&NormEntry> = entries
            .iter()
            .filter(|e| e.p % 2 == 0 && e.n == n_max)
            .collect();
        let kappa_hat = even.iter().map(|e| e.kappa).fold(0.0, f64::max);
        let even_nondecreasing = even.windows(2).all(|w| w[1].kappa >= w[0].kappa - 1e-12);
        NormReport {
            within_unit: entries.iter().all(|e| (0.0..=1.0).contains(&e.kappa)),
            entries,
            kappa_hat,
            k_reference,
            even_nondecreasing,
        }
    }

    pub fn kappa(&self, p: usize) -> Option<f64> {
        self.entries.iter().rev().find(|e| e.p == p).map(|e| e.kappa)
    }

    /// Columns `p,N,kappa`, then `kappa_hat` and `k_reference` footer rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,N,kappa\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{:.15e}\n", e.p, e.n, e.kappa));
        }
        out.push_str(&format!("kappa_hat,,{:.15e}\n", self.kappa_hat));
        match self.k_reference {
            Some(k) => out.push_str(&format!("k_reference,,{k:.15e}\n")),
            None => out.push_str("k_reference,,\n"),
        }
        out
    }
}

/// `κ(ℛ_p f)` for `p = 1..=p_max` at truncation `n`; `κ̂` from the even orders.
/// The input must carry `2n + 1` coefficients (disk) or `b_0 … b_{2n-1}` (exterior).
pub fn limit_grunsky_estimate(f: &TaylorMap, p_max: usize, n: usize) -> Result<NormReport> {
    if p_max < 2 || !p_max.is_multiple_of(2) {
        return Err(Error::Domain(format!("p_max must be even and at least 2, got {p_max}")));
    }
    let entries = (1..=p_max)
        .into_par_iter()
        .map(|p| {
            let fp = root_transform(f, p)?;
            let kappa = grunsky_norm(&grunsky_matrix(&fp, n)?)?;
            Ok(NormEntry { p, n, kappa })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormReport::from_entries(entries, None))
}

/// `q_L = 2κ̂/(1+κ̂²)` and `Q_L = (1+q_L)/(1-q_L) = ((1+κ̂)/(1-κ̂))²`.
pub fn reflection_coefficient(kappa_hat: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&kappa_hat) {
        return Err(Error::Domain(format!("κ̂ must lie in [0,1), got {kappa_hat}")));
    }
    let q = 2.0 * kappa_hat / (1.0 + kappa_hat * kappa_hat);
    Ok((q, (1.0 + q) / (1.0 - q)))
}

/// `log κ̂`; `-∞` at the base point `κ̂ = 0`.
pub fn green_function(kappa_hat: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&kappa_hat) {
        return Err(Error::Domain(format!("κ̂ must lie in [0,1), got {kappa_hat}")));
    }
    if kappa_hat == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(kappa_hat.ln())
}

/// Budget for the search over normalized quadratic differentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaConfig {
    /// Active coordinates of `x`.
    pub coords: usize,
    pub starts: usize,
    pub seed: u64,
    pub radial: usize,
    pub angular: usize,
}

impl Default for AlphaConfig {
    fn default() -> Self {
        AlphaConfig {
            coords: 32,
            starts: 64,
            seed: 7,
            radial: 512,
            angular: 512,
        }
    }
}

/// Result of the `α` search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    /// Best `|∬ μ ψ_x|` found by the multistart ascent.
    pub alpha: f64,
    /// `σ_max` of the moment matrix: the supremum over the searched subspace.
    pub subspace_sup: f64,
    /// The ascent reached the subspace supremum.
    pub converged: bool,
    /// `‖ψ‖_{L¹}` of the maximizer by the same quadrature.
    pub psi_norm: f64,
    /// Sampled `sup |μ|` on the quadrature nodes.
    pub mu_sup: f64,
    pub maximizer: Vec<[f64; 2]>,
}

/// Polar Gauss–Legendre × trapezoid rule on the unit disk `|w| < 1`, the
/// image of `|z| > 1` under `z = 1/w`.
struct DiskRule {
    rho: Vec<f64>,
    rho_w: Vec<f64>,
    angular: usize,
}

impl DiskRule {
    fn new(radial: usize, angular: usize) -> Self {
        let (x, w) = gauss_legendre(radial);
        DiskRule {
            rho: x.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            rho_w: w.iter().map(|w| 0.5 * w).collect(),
            angular,
        }
    }

    fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.angular as f64
    }

    fn d_theta(&self) -> f64 {
        2.0 * PI / self.angular as f64
    }
}

/// `A_s = ∬_{|z|>1} μ z^{-(s+2)} dA` for `2 ≤ s ≤ 2N`, computed as
/// `∫∫ μ(1/w) ρ^{s-1} e^{i(s+2)θ} dρ dθ`.
fn moments(mu: &PointField, rule: &DiskRule, smax: usize) -> (Vec<Complex64>, f64) {
    let rows: Vec<(Vec<Complex64>, f64)> = (0..rule.rho.len())
        .into_par_iter()
        .map(|i| {
            let rho = rule.rho[i];
            let mut acc = vec![Complex64::default(); smax + 1];
            let mut sup: f64 = 0.0;
            for j in 0..rule.angular {
                let th = rule.theta(j);
                let z = Complex64::from_polar(1.0 / rho, -th);
                let m = mu.eval(z);
                sup = sup.max(m.norm());
                if m.norm() == 0.0 {
                    continue;
                }
                let step = Complex64::from_polar(1.0, th);
                let mut e = Complex64::from_polar(1.0, 4.0 * th);
                for a in acc.iter_mut().skip(2) {
                    *a += m * e;
                    e *= step;
                }
            }
            let w = rule.rho_w[i] * rule.d_theta();
            for (s, a) in acc.iter_mut().enumerate().skip(2) {
                *a *= w * rho.powi(s as i32 - 1);
            }
            (acc, sup)
        })
        .collect();
    let mut total = vec![Complex64::default(); smax + 1];
    let mut sup: f64 = 0.0;
    for (row, s) in rows {
        sup = sup.max(s);
        for (t, r) in total.iter_mut().zip(row) {
            *t += r;
        }
    }
    (total, sup)
}

/// `‖ψ_x‖_{L¹(|z|>1)}` on the same rule.
fn psi_l1(x: &UnitL2Vector, rule: &DiskRule) -> f64 {
    let q = QuadraticDifferential::new(x);
    (0..rule.rho.len())
        .into_par_iter()
        .map(|i| {
            let rho = rule.rho[i];
            let s: f64 = (0..rule.angular)
                .map(|j| {
                    let z = Complex64::from_polar(1.0 / rho, -rule.theta(j));
                    q.eval(z).norm() * rho.powi(-4)
                })
                .sum();
            s * rule.rho_w[i] * rule.d_theta() * rho
        })
        .sum()
}

/// `x ↦ xᵀMx` maximization: multistart fixed-point ascent `x ← conj(Mx)/‖Mx‖`.
fn ascend(n: usize, m: &[Complex64], x0: Vec<Complex64>) -> (f64, Vec<Complex64>) {
    let value = |x: &[Complex64]| -> Complex64 {
        (0..n)
            .map(|i| x[i] * (0..n).map(|j| m[i * n + j] * x[j]).sum::<Complex64>())
            .sum()
    };
    let mut x = x0;
    let mut best = value(&x).norm();
    for _ in 0..2000 {
        let y: Vec<Complex64> = (0..n)
            .map(|i| (0..n).map(|j| m[i * n + j] * x[j]).sum::<Complex64>().conj())
            .collect();
        let norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        let cand: Vec<Complex64> = y.into_iter().map(|c| c / norm).collect();
        let v = value(&cand).norm();
        let done = v <= best * (1.0 + 1e-15);
        if v >= best {
            best = v;
            x = cand;
        }
        if done {
            break;
        }
    }
    (best, x)
}

/// `α(μ) = sup |∬ μ ψ|` over `ψ = ω²`, `ω = π^{-1/2}Σ √m x_m z^{-m-1}`,
/// `‖x‖ = 1` (so `‖ψ‖_{L¹} = 1`). The pairing is the quadratic form of the
/// moment matrix `M_{mn} = (√(mn)/π) A_{m+n}`.
pub fn alpha_functional(mu: &PointField, cfg: &AlphaConfig) -> Result<AlphaReport> {
    let n = cfg.coords.max(1);
    let rule = DiskRule::new(cfg.radial.max(8), cfg.angular.max(8));
    let (a, mu_sup) = moments(mu, &rule, 2 * n);
    let mut m = vec![Complex64::default(); n * n];
    for i in 0..n {
        for j in 0..n {
            let (mi, mj) = ((i + 1) as f64, (j + 1) as f64);
            m[i * n + j] = a[i + j + 2] * ((mi * mj).sqrt() / PI);
        }
    }
    let subspace_sup = largest_singular_value(n, &m);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts: Vec<Vec<Complex64>> = (0..n)
        .take(cfg.starts.max(1).min(n))
        .map(|k| {
            let mut e = vec![Complex64::default(); n];
            e[k] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    while starts.len() < cfg.starts.max(1) {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        starts.push(v.into_iter().map(|c| c / norm).collect());
    }
    // ties go to the earliest start so the result does not depend on scheduling
    let (alpha, _, xbest) = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, x0)| {
            let (v, x) = ascend(n, &m, x0);
            (v, i, x)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, Vec::new()),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    let x = UnitL2Vector::normalized(xbest)?;
    let psi_norm = psi_l1(&x, &rule);
    if (psi_norm - 1.0).abs() > 1e-3 {
        return Err(Error::Normalization(format!(
            "quadratic differential has L1 norm {psi_norm}, expected 1"
        )));
    }
    if alpha > mu_sup + 1e-6 {
        return Err(Error::Quadrature(format!(
            "pairing {alpha} exceeds sup|μ| = {mu_sup}"
        )));
    }
    Ok(AlphaReport {
        alpha,
        subspace_sup,
        converged: (subspace_sup - alpha).abs() <= 1e-9 * subspace_sup.max(1.0),
        psi_norm,
        mu_sup,
        maximizer: x.as_slice().iter().map(|c| [c.re, c.im]).collect(),
    })
}

/// `k(k + a)/(1 + ak)` with `a = α/k ∈ [0, 1]`, the upper bound for `κ`
/// given `α ≤ k`. Equals `k` exactly when `α = k` and `k²` when `α = 0`.
pub fn grunsky_bound_check(k: f64, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("k must lie in [0,1), got {k}")));
    }
    if alpha < 0.0 || alpha > k + 1e-12 {
        return Err(Error::Domain(format!("α = {alpha} must lie in [0, k = {k}]")));
    }
    if k == 0.0 {
        return Ok(0.0);
    }
    let a = (alpha / k).min(1.0);
    Ok(k * (k + a) / (1.0 + a * k))
}

/// One cell of the outer-limit search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterEntry {
    pub rho: f64,
    pub p: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterReport {
    pub value: f64,
    pub entries: Vec<OuterEntry>,
}

/// `sup_{ρ,p} α(ℛ_p^* μ_ρ)` over the given grids. `ρ = 1` stands for the
/// untruncated coefficient.
pub fn outer_limit_estimate(
    mu: &PointField,
    rho_grid: &[f64],
    p_grid: &[usize],
    cfg: &AlphaConfig,
) -> Result<OuterReport> {
    let mut entries = Vec::new();
    for &rho in rho_grid {
        let base = if rho == 1.0 { mu.clone() } else { truncate_beltrami(mu, rho)? };
        for &p in p_grid {
            if p == 0 {
                return Err(Error::Domain("root order must be at least 1".into()));
            }
            let field = if p == 1 { base.clone() } else { pullback_beltrami(&base, p) };
            let value = alpha_functional(&field, cfg)?.alpha;
            entries.push(OuterEntry { rho, p, value });
        }
    }
    let value = entries.iter().map(|e| e.value).fold(0.0, f64::max);
    Ok(OuterReport { value, entries })
}
