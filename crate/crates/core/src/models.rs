//! Closed-form test maps with known norms, and Schwarz–Christoffel maps of
//! unbounded convex polygons.
//!
//! Teichmüller norms in the catalog are taken in the class that fixes `∞`.
//! Maps that send a finite point to `∞` (the Möbius entry) have no such value
//! recorded: their root transforms acquire positive Grunsky norm even though
//! the map itself extends conformally.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beltrami::laurent_coefficients;
use crate::error::{Error, Result};
use crate::grunsky::{grunsky_matrix, grunsky_norm};
use crate::quad::{contour_taylor, integrate};
use crate::series::{Series, TaylorMap};
use crate::transforms::{
    bnorm, map_from_schwarzian, map_series_from_schwarzian, schwarzian_compose, Domain, Mobius,
    PointField, SchwarzianField,
};

/// Relation between `κ(ℛ_p f)` and `k(f)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaFlag {
    EqualToK,
    StrictlyLess,
}

/// Catalog entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelMap {
    /// `z/(1 + tz)²` on the disk.
    KoebeT { t: f64 },
    /// `z/(1 - tz)` on the disk.
    MobiusT { t: f64 },
    /// `z + t/z` on `|z| > 1`, extended by `z + t z̄` into the disk.
    ExteriorDiagT { t: f64 },
    /// Identity outside `|z| = outer`, `z|z|^α / outer^α` on the annulus,
    /// linear inside `|z| = inner`.
    RadialStretch { alpha: f64, inner: f64, outer: f64 },
}

/// Default catalog: `t = 0.5`, `α = 0.5` on `0.5 < |z| < 1.5`.
pub fn catalog() -> Vec<ModelMap> {
    vec![
        ModelMap::KoebeT { t: 0.5 },
        ModelMap::MobiusT { t: 0.5 },
        ModelMap::ExteriorDiagT { t: 0.5 },
        ModelMap::RadialStretch {
            alpha: 0.5,
            inner: 0.5,
            outer: 1.5,
        },
    ]
}

impl ModelMap {
    pub fn name(&self) -> &'static str {
        match self {
            ModelMap::KoebeT { .. } => "koebe_t",
            ModelMap::MobiusT { .. } => "mobius_t",
            ModelMap::ExteriorDiagT { .. } => "exterior_diag_t",
            ModelMap::RadialStretch { .. } => "radial_stretch",
        }
    }

    /// Look up by catalog name; `param` is `t` or `α`.
    pub fn by_name(name: &str, param: f64) -> Result<ModelMap> {
        match name {
            "koebe_t" => Ok(ModelMap::KoebeT { t: param }),
            "mobius_t" => Ok(ModelMap::MobiusT { t: param }),
            "exterior_diag_t" => Ok(ModelMap::ExteriorDiagT { t: param }),
            "radial_stretch" => Ok(ModelMap::RadialStretch {
                alpha: param,
                inner: 0.5,
                outer: 1.5,
            }),
            other => Err(Error::Domain(format!("unknown catalog map {other}"))),
        }
    }

    /// Truncated coefficients: `N` Taylor coefficients for disk maps,
    /// `b_0 … b_N` for exterior maps (the radial stretch is the identity outside its annulus).
    pub fn taylor(&self, n: usize) -> Result<TaylorMap> {
        let n = n.max(1);
        let c = |x: f64| Complex64::new(x, 0.0);
        match *self {
            ModelMap::KoebeT { t } => {
                TaylorMap::disk((1..=n).map(|k| c((-t).powi(k as i32 - 1) * k as f64)).collect())
            }
            ModelMap::MobiusT { t } => TaylorMap::disk((1..=n).map(|k| c(t.powi(k as i32 - 1))).collect()),
            ModelMap::ExteriorDiagT { t } => {
                let mut b = vec![c(0.0); n + 1];
                b[1] = c(t);
                TaylorMap::sigma(b)
            }
            ModelMap::RadialStretch { .. } => TaylorMap::sigma(vec![c(0.0); n + 1]),
        }
    }

    /// Closed-form map (the quasiconformal map itself for the radial stretch).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match *self {
            ModelMap::KoebeT { t } => {
                let d = z * t + 1.0;
                z / (d * d)
            }
            ModelMap::MobiusT { t } => z / (-z * t + 1.0),
            ModelMap::ExteriorDiagT { t } => z + z.inv() * t,
            ModelMap::RadialStretch { alpha, inner, outer } => radial_stretch(z, alpha, inner, outer),
        }
    }

    /// Teichmüller norm among extensions fixing `∞`.
    pub fn known_k(&self) -> Option<f64> {
        match *self {
            ModelMap::KoebeT { t } | ModelMap::ExteriorDiagT { t } => Some(t.abs()),
            ModelMap::MobiusT { .. } | ModelMap::RadialStretch { .. } => None,
        }
    }

    /// Dilatation of the best extension to the sphere with no condition at `∞`.
    pub fn conformal_k(&self) -> Option<f64> {
        match *self {
            ModelMap::MobiusT { .. } => Some(0.0),
            ModelMap::ExteriorDiagT { t } => Some(t.abs()),
            _ => None,
        }
    }

    pub fn kappa_flag(&self, p: usize) -> Option<KappaFlag> {
        match self {
            ModelMap::KoebeT { .. } if p.is_multiple_of(2) => Some(KappaFlag::EqualToK),
            ModelMap::KoebeT { .. } => Some(KappaFlag::StrictlyLess),
            ModelMap::ExteriorDiagT { .. } => Some(KappaFlag::EqualToK),
            _ => None,
        }
    }

    /// Beltrami coefficient of the explicit extension, where one is known.
    pub fn extension_mu(&self) -> Option<PointField> {
        match *self {
            ModelMap::ExteriorDiagT { t } => Some(PointField::new(move |z| {
                if z.norm() < 1.0 {
                    Complex64::new(t, 0.0)
                } else {
                    Complex64::default()
                }
            })),
            ModelMap::RadialStretch { alpha, inner, outer } => {
                let k = alpha / (alpha + 2.0);
                Some(PointField::new(move |z| {
                    let r = z.norm();
                    if r > inner && r < outer {
                        z / z.conj() * k
                    } else {
                        Complex64::default()
                    }
                }))
            }
            _ => None,
        }
    }

    /// The extended map itself.
    pub fn extension_map(&self) -> Option<PointField> {
        match *self {
            ModelMap::ExteriorDiagT { t } => Some(PointField::new(move |z| {
                if z.norm() < 1.0 {
                    z + z.conj() * t
                } else {
                    z + z.inv() * t
                }
            })),
            ModelMap::RadialStretch { alpha, inner, outer } => {
                Some(PointField::new(move |z| radial_stretch(z, alpha, inner, outer)))
            }
            _ => None,
        }
    }

    /// Exact Schwarzian where a closed form is available.
    pub fn schwarzian(&self) -> Option<SchwarzianField> {
        match *self {
            ModelMap::KoebeT { t } => Some(SchwarzianField::new(Domain::UnitDisk, move |z| {
                let d = Complex64::new(1.0, 0.0) - z * z * (t * t);
                Complex64::new(-6.0 * t * t, 0.0) / (d * d)
            })),
            ModelMap::MobiusT { .. } => Some(SchwarzianField::zero(Domain::UnitDisk)),
            ModelMap::ExteriorDiagT { t } => Some(SchwarzianField::new(Domain::ExteriorDisk, move |z| {
                let d = z * z - t;
                Complex64::new(-6.0 * t, 0.0) / (d * d)
            })),
            ModelMap::RadialStretch { .. } => None,
        }
    }
}

fn radial_stretch(z: Complex64, alpha: f64, inner: f64, outer: f64) -> Complex64 {
    let r = z.norm();
    if r >= outer {
        z
    } else if r > inner {
        z * (r / outer).powf(alpha)
    } else {
        z * (inner / outer).powf(alpha)
    }
}

/// Unbounded convex polygon data for the Schwarz–Christoffel integral:
/// exterior angles `π α_j`, prevertices `a_j` on the real line, constants `d₀, d₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonJson", into = "PolygonJson")]
pub struct PolygonSpec {
    alphas: Vec<f64>,
    prevertices: Vec<f64>,
    d0: Complex64,
    d1: Complex64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonJson {
    alphas: Vec<f64>,
    prevertices: Vec<f64>,
    d0: [f64; 2],
    d1: [f64; 2],
}

impl TryFrom<PolygonJson> for PolygonSpec {
    type Error = Error;
    fn try_from(p: PolygonJson) -> Result<Self> {
        PolygonSpec::new(
            p.alphas,
            p.prevertices,
            Complex64::new(p.d0[0], p.d0[1]),
            Complex64::new(p.d1[0], p.d1[1]),
        )
    }
}

impl From<PolygonSpec> for PolygonJson {
    fn from(p: PolygonSpec) -> Self {
        PolygonJson {
            alphas: p.alphas,
            prevertices: p.prevertices,
            d0: [p.d0.re, p.d0.im],
            d1: [p.d1.re, p.d1.im],
        }
    }
}

impl PolygonSpec {
    /// Requires `1 < α_j < 2` and strictly increasing prevertices.
    pub fn new(alphas: Vec<f64>, prevertices: Vec<f64>, d0: Complex64, d1: Complex64) -> Result<Self> {
        if alphas.iter().any(|&a| !(a > 1.0 && a < 2.0)) {
            return Err(Error::Domain("exterior angle parameters must lie in (1, 2)".into()));
        }
        PolygonSpec::unchecked(alphas, prevertices, d0, d1)
    }

    /// Like [`PolygonSpec::new`] but admits any real `α_j` (degenerate oracle cases).
    pub fn unchecked(alphas: Vec<f64>, prevertices: Vec<f64>, d0: Complex64, d1: Complex64) -> Result<Self> {
        if alphas.len() != prevertices.len() || alphas.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: alphas.len(),
                got: prevertices.len(),
            });
        }
        if prevertices.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("prevertices must be strictly increasing".into()));
        }
        Ok(PolygonSpec {
            alphas,
            prevertices,
            d0,
            d1,
        })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn prevertices(&self) -> &[f64] {
        &self.prevertices
    }

    fn betas(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.alphas.iter().map(|a| a - 1.0).zip(self.prevertices.iter().copied())
    }

    /// `b = f''/f' = Σ β_j/(z - a_j)` and `b'`.
    fn log_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let mut b = Complex64::default();
        let mut db = Complex64::default();
        for (beta, a) in self.betas() {
            let u = z - a;
            if u.norm() == 0.0 {
                return Err(Error::Singularity(z));
            }
            let inv = u.inv();
            b += inv * beta;
            db -= inv * inv * beta;
        }
        Ok((b, db))
    }
}

/// `S_{f,t}(z) = t b'(z) - b(z)²/2`; `t = 1` is the Schwarzian.
pub fn polygon_schwarzian_t_at(p: &PolygonSpec, t: f64, z: Complex64) -> Result<Complex64> {
    let (b, db) = p.log_derivative(z)?;
    Ok(db * t - b * b * 0.5)
}

/// `Σ C_j/(z - a_j)² - Σ_{j<l} C_{jl}/((z - a_j)(z - a_l))` with
/// `C_j = -β_j - β_j²/2`, `C_{jl} = β_j β_l`, `β = α - 1`.
pub fn polygon_schwarzian_at(p: &PolygonSpec, z: Complex64) -> Result<Complex64> {
    let terms: Vec<(f64, Complex64)> = p
        .betas()
        .map(|(beta, a)| (beta, z - a))
        .collect();
    if terms.iter().any(|(_, u)| u.norm() == 0.0) {
        return Err(Error::Singularity(z));
    }
    let mut s = Complex64::default();
    for (j, &(bj, uj)) in terms.iter().enumerate() {
        s += (uj * uj).inv() * (-bj - bj * bj / 2.0);
        for &(bl, ul) in &terms[j + 1..] {
            s -= (uj * ul).inv() * (bj * bl);
        }
    }
    Ok(s)
}

/// Schwarzian of the Schwarz–Christoffel map as a field on the lower half-plane.
pub fn polygon_schwarzian(p: &PolygonSpec) -> SchwarzianField {
    let p = p.clone();
    SchwarzianField::new(Domain::LowerHalfPlane, move |z| {
        polygon_schwarzian_at(&p, z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    })
}

/// `S_{f,t}` as a field on the lower half-plane.
pub fn polygon_schwarzian_t(p: &PolygonSpec, t: f64) -> SchwarzianField {
    let p = p.clone();
    SchwarzianField::new(Domain::LowerHalfPlane, move |z| {
        polygon_schwarzian_t_at(&p, t, z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    })
}

/// `(ξ - a)^β` with `arg(ξ - a) ∈ [-π, 0]`, continuous on the closed lower half-plane.
fn lower_power(u: Complex64, beta: f64) -> Complex64 {
    let mut th = u.im.atan2(u.re);
    if th > 0.0 {
        th -= 2.0 * PI;
    }
    Complex64::from_polar(u.norm().powf(beta), beta * th)
}

/// `f(z) = d₁ ∫₀^z Π(ξ - a_j)^{α_j - 1} dξ + d₀` along the segment `[0, z]`.
pub fn sc_map_eval(p: &PolygonSpec, z: Complex64) -> Result<Complex64> {
    if z.im > 0.0 {
        return Err(Error::Domain(format!("{z} is not in the closed lower half-plane")));
    }
    if z.norm() == 0.0 {
        return Ok(p.d0);
    }
    for &a in &p.prevertices {
        // a prevertex on the segment other than its start
        let on_line = z.im == 0.0 && a != 0.0 && (a / z.re) > 0.0 && (a / z.re) <= 1.0;
        if on_line || (z - a).norm() == 0.0 {
            return Err(Error::Singularity(Complex64::new(a, 0.0)));
        }
    }
    // s = u² clusters nodes at the start, where a prevertex at 0 leaves a root singularity
    let integrand = |u: f64| {
        let xi = z * (u * u);
        let mut v = z * (2.0 * u);
        for (beta, a) in p.betas() {
            v *= lower_power(xi - a, beta);
        }
        v
    };
    Ok(p.d1 * integrate(integrand, 0.0, 1.0, 1e-13)? + p.d0)
}

/// Positive root of `½[Σβ² + (Σβ)²] r² - (Σβ) r - 2 = 0`, the double sum
/// running over all ordered pairs.
pub fn r0_root(p: &PolygonSpec) -> Result<f64> {
    let s1: f64 = p.betas().map(|(b, _)| b).sum();
    let s2: f64 = p.betas().map(|(b, _)| b * b).sum();
    let a = 0.5 * (s2 + s1 * s1);
    if !(a > 0.0) {
        return Err(Error::NoRoot);
    }
    let disc = s1 * s1 + 8.0 * a;
    Ok((s1 + disc.sqrt()) / (2.0 * a))
}

/// Settings for the reconstruction of `w_r` from `r S_{f,r₀}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicCheckConfig {
    /// `r = r_factor · r₀`.
    pub r_factor: f64,
    /// Grunsky truncation.
    pub n: usize,
    /// Base point `x₀ - i y₀` of the Cayley map from the disk onto the lower half-plane.
    pub base: [f64; 2],
    /// Radius of the circle on which Taylor coefficients are sampled.
    pub sample_radius: f64,
}

impl Default for HarmonicCheckConfig {
    fn default() -> Self {
        HarmonicCheckConfig {
            r_factor: 0.1,
            n: 24,
            base: [0.0, 1.0],
            sample_radius: 0.9,
        }
    }
}

/// Comparison of the measured Grunsky norm of `w_r` with `(r/2)‖S_{f,r₀}‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCheckReport {
    pub r0: f64,
    pub r: f64,
    /// `‖S_{f,r₀}‖_{B(H*)}`.
    pub s_norm: f64,
    /// `(r/2)‖S_{f,r₀}‖`.
    pub target: f64,
    /// `κ` from coefficients sampled on the ODE solution.
    pub kappa: f64,
    /// `κ` from the power-series solution of the same ODE.
    pub kappa_series: f64,
    /// `|κ - target| / target`.
    pub relative_gap: f64,
    /// Reconstruction residual of the sampled coefficients.
    pub sample_residual: f64,
}

/// Rebuild `w_r` with `S_{w_r} = r S_{f,r₀}` on the lower half-plane, move it
/// to the disk by a Cayley map, and measure its Grunsky norm.
pub fn harmonic_check(p: &PolygonSpec, cfg: &HarmonicCheckConfig) -> Result<HarmonicCheckReport> {
    if cfg.n == 0 || !(cfg.r_factor > 0.0) || !(cfg.sample_radius > 0.0 && cfg.sample_radius < 1.0) {
        return Err(Error::Domain("harmonic check needs n ≥ 1, r_factor > 0 and a radius in (0,1)".into()));
    }
    if !(cfg.base[1] > 0.0) {
        return Err(Error::Domain("Cayley base point must lie in the lower half-plane".into()));
    }
    let r0 = r0_root(p)?;
    let r = cfg.r_factor * r0;
    let s = polygon_schwarzian_t(p, r0);
    let s_norm = bnorm(&s)?.value;
    let target = 0.5 * r * s_norm;

    let tau = Mobius::cayley_lower(cfg.base[0], cfg.base[1]);
    let psi = schwarzian_compose(&s.scaled(r), &tau, Domain::UnitDisk);
    let degree = 2 * cfg.n + 1;

    let w = map_from_schwarzian(&psi)?;
    let laurent = laurent_coefficients(|z| w.eval(z), Complex64::default(), cfg.sample_radius, degree)?;
    let f = laurent.to_disk(degree)?;
    let kappa = grunsky_norm(&grunsky_matrix(&f, cfg.n)?)?;

    let psi_series = Series::new(contour_taylor(|z| psi.eval(z), Complex64::default(), cfg.sample_radius, 8 * degree, degree));
    let fs = map_series_from_schwarzian(&psi_series, degree)?;
    let kappa_series = grunsky_norm(&grunsky_matrix(&fs, cfg.n)?)?;

    Ok(HarmonicCheckReport {
        r0,
        r,
        s_norm,
        target,
        kappa,
        kappa_series,
        relative_gap: (kappa - target).abs() / target,
        sample_residual: laurent.residual,
    })
}
