//! Root transforms, pullbacks of Beltrami coefficients and quadratic
//! differentials, Schwarzian derivatives and their inversion.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grunsky::UnitL2Vector;
use crate::series::{MapClass, Series, TaylorMap};

type Eval = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A pointwise complex field given by a closure (Beltrami coefficient,
/// quadratic differential, or any scalar function of `z`).
#[derive(Clone)]
pub struct PointField(Eval);

impl PointField {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        PointField(Arc::new(f))
    }

    pub fn zero() -> Self {
        PointField::new(|_| Complex64::default())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.0)(z)
    }
}

impl fmt::Debug for PointField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PointField(..)")
    }
}

/// `f_p(z) = f(z^p)^{1/p}` (disk) or `F(z^p)^{1/p}` (exterior), computed on
/// the unit factor so the result keeps every coefficient the input determines.
pub fn root_transform(f: &TaylorMap, p: usize) -> Result<TaylorMap> {
    if p == 0 {
        return Err(Error::Domain("root order must be at least 1".into()));
    }
    if p == 1 {
        return Ok(f.clone());
    }
    let g = f.unit_factor();
    let d = p * g.degree();
    let root = g.substitute_power(p).pow(1.0 / p as f64, d)?;
    TaylorMap::from_unit_factor(f.class(), &root)
}

/// `ℛ_p^*μ(z) = μ(z^p) z̄^{p-1} / z^{p-1}`.
pub fn pullback_beltrami(mu: &PointField, p: usize) -> PointField {
    let mu = mu.clone();
    let e = p as i32 - 1;
    PointField::new(move |z| {
        let zp = z.powi(p as i32);
        let phase = if e == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            (z.conj() / z).powi(e)
        };
        mu.eval(zp) * phase
    })
}

/// Coefficient of `1/F(1/z)` given that of `F`: `μ(1/z) z²/z̄²`. Moves the
/// dilatation of an exterior map's extension into the disk onto `|z| > 1`.
pub fn invert_beltrami(mu: &PointField) -> PointField {
    let mu = mu.clone();
    PointField::new(move |z: Complex64| {
        if z.norm_sqr() == 0.0 {
            return Complex64::default();
        }
        mu.eval(z.inv()) * (z / z.conj()).powi(2)
    })
}

/// `ℛ_p^*ψ(z) = ψ(z^p) p² z^{2p-2}`.
pub fn pullback_quadratic(psi: &PointField, p: usize) -> PointField {
    let psi = psi.clone();
    let p2 = (p * p) as f64;
    PointField::new(move |z| psi.eval(z.powi(p as i32)) * p2 * z.powi(2 * p as i32 - 2))
}

/// `μ_ρ(z) = μ(ρz)`, set to zero wherever `|ρz| ≤ 1`.
pub fn truncate_beltrami(mu: &PointField, rho: f64) -> Result<PointField> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("truncation radius must lie in (0,1), got {rho}")));
    }
    let mu = mu.clone();
    Ok(PointField::new(move |z| {
        let w = z * rho;
        if w.norm() <= 1.0 {
            Complex64::default()
        } else {
            mu.eval(w)
        }
    }))
}

/// `f_r(z) = f(rz)/r` for disk maps (`a_n ↦ a_n r^{n-1}`), `r F(z/r)` for
/// exterior maps (`b_n ↦ b_n r^{n+1}`).
pub fn homotopy_map(f: &TaylorMap, r: f64) -> Result<TaylorMap> {
    check_homotopy_radius(r)?;
    match f.class() {
        MapClass::DiskS => {
            let c = f
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, &a)| a * r.powi(i as i32))
                .collect();
            TaylorMap::disk(c)
        }
        MapClass::ExteriorSigma => {
            let c = f
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, &b)| b * r.powi(k as i32 + 1))
                .collect();
            TaylorMap::sigma(c)
        }
    }
}

/// `φ ↦ r² φ(rz)`, the Schwarzian of the disk homotopy.
pub fn homotopy_schwarzian(phi: &SchwarzianField, r: f64) -> Result<SchwarzianField> {
    check_homotopy_radius(r)?;
    if phi.domain != Domain::UnitDisk {
        return Err(Error::Domain("homotopy acts on disk Schwarzians".into()));
    }
    let inner = phi.clone();
    let series = phi.series.as_ref().map(|s| {
        Series::new(
            s.coeffs()
                .iter()
                .enumerate()
                .map(|(k, &c)| c * r.powi(k as i32 + 2))
                .collect(),
        )
    });
    Ok(SchwarzianField {
        domain: Domain::UnitDisk,
        eval: Arc::new(move |z| inner.eval(z * r) * (r * r)),
        series,
    })
}

fn check_homotopy_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("homotopy radius must lie in (0,1], got {r}")));
    }
    Ok(())
}

/// Domain on which a Schwarzian field is holomorphic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    UnitDisk,
    ExteriorDisk,
    LowerHalfPlane,
}

impl Domain {
    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            Domain::UnitDisk => z.norm() < 1.0,
            Domain::ExteriorDisk => z.norm() > 1.0,
            Domain::LowerHalfPlane => z.im < 0.0,
        }
    }

    /// Image of `ζ ∈ D` under the standard chart of the domain, with `|τ'|`.
    fn chart(&self, zeta: Complex64) -> (Complex64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        match self {
            Domain::UnitDisk => (zeta, one),
            Domain::ExteriorDisk => (zeta.inv(), -(zeta * zeta).inv()),
            Domain::LowerHalfPlane => {
                let m = Mobius::cayley_lower(0.0, 1.0);
                (m.eval(zeta), m.derivative(zeta))
            }
        }
    }
}

/// A holomorphic function tagged with its domain, usually a Schwarzian derivative.
#[derive(Clone)]
pub struct SchwarzianField {
    domain: Domain,
    eval: Eval,
    series: Option<Series>,
}

impl fmt::Debug for SchwarzianField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchwarzianField")
            .field("domain", &self.domain)
            .field("series", &self.series)
            .finish()
    }
}

impl SchwarzianField {
    pub fn new<F>(domain: Domain, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        SchwarzianField {
            domain,
            eval: Arc::new(f),
            series: None,
        }
    }

    pub fn zero(domain: Domain) -> Self {
        SchwarzianField::new(domain, |_| Complex64::default())
    }

    /// Series-backed field on the unit disk.
    pub fn from_series(s: Series) -> Self {
        let t = s.clone();
        SchwarzianField {
            domain: Domain::UnitDisk,
            eval: Arc::new(move |z| t.eval(z)),
            series: Some(s),
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn series(&self) -> Option<&Series> {
        self.series.as_ref()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn scaled(&self, c: f64) -> SchwarzianField {
        let inner = self.eval.clone();
        SchwarzianField {
            domain: self.domain,
            eval: Arc::new(move |z| inner(z) * c),
            series: self.series.as_ref().map(|s| s.scale(Complex64::new(c, 0.0))),
        }
    }

    /// Largest relative Cauchy–Riemann defect `|∂_x φ + i ∂_y φ| / |∂_x φ|`
    /// over the sample points, by centered differences.
    pub fn holomorphy_defect(&self, points: &[Complex64]) -> f64 {
        points
            .iter()
            .map(|&z| {
                let h = 1e-4 * (1.0 + z.norm());
                let dx = (self.eval(z + h) - self.eval(z - h)) / (2.0 * h);
                let dy = (self.eval(z + Complex64::new(0.0, h)) - self.eval(z - Complex64::new(0.0, h)))
                    / (2.0 * h);
                let scale = dx.norm().max(self.eval(z).norm()).max(1e-300);
                (dx + Complex64::i() * dy).norm() / scale
            })
            .fold(0.0, f64::max)
    }
}

fn map_derivatives(f: &TaylorMap, z: Complex64) -> (Complex64, Complex64, Complex64) {
    let zero = Complex64::default();
    match f.class() {
        MapClass::DiskS => {
            let (mut d1, mut d2, mut d3) = (zero, zero, zero);
            for k in (1..=f.truncation()).rev() {
                let a = f.coeff(k);
                let kf = k as f64;
                d1 = d1 * z + a * kf;
                if k >= 2 {
                    d2 = d2 * z + a * (kf * (kf - 1.0));
                }
                if k >= 3 {
                    d3 = d3 * z + a * (kf * (kf - 1.0) * (kf - 2.0));
                }
            }
            (d1, d2, d3)
        }
        MapClass::ExteriorSigma => {
            let u = z.inv();
            let (mut d1, mut d2, mut d3) = (Complex64::new(1.0, 0.0), zero, zero);
            for k in 1..=f.truncation() {
                let b = f.coeff(k);
                let kf = k as f64;
                let uk = u.powi(k as i32 + 1);
                d1 -= b * kf * uk;
                d2 += b * kf * (kf + 1.0) * uk * u;
                d3 -= b * kf * (kf + 1.0) * (kf + 2.0) * uk * u * u;
            }
            (d1, d2, d3)
        }
    }
}

/// `S_f(z)` of the truncated map, exactly for the polynomial (or Laurent polynomial).
pub fn schwarzian_at(f: &TaylorMap, z: Complex64) -> Result<Complex64> {
    let (d1, d2, d3) = map_derivatives(f, z);
    if d1.norm() < 1e-14 {
        return Err(Error::Singularity(z));
    }
    let q = d2 / d1;
    Ok(d3 / d1 - q * q * 1.5)
}

/// Schwarzian field of a truncated map. Disk maps carry the series of
/// `S_f` to degree `N - 3` when `N ≥ 3`.
pub fn schwarzian(f: &TaylorMap) -> Result<SchwarzianField> {
    let domain = match f.class() {
        MapClass::DiskS => Domain::UnitDisk,
        MapClass::ExteriorSigma => Domain::ExteriorDisk,
    };
    let series = if f.class() == MapClass::DiskS && f.truncation() >= 3 {
        let n = f.truncation();
        let fp = Series::new((1..=n).map(|k| f.coeff(k) * k as f64).collect());
        let b = fp.log(n - 1)?.derivative();
        let d = n - 3;
        Some(b.derivative().with_degree(d).sub(&b.mul(&b, d).scale(Complex64::new(0.5, 0.0))))
    } else {
        None
    };
    let g = f.clone();
    Ok(SchwarzianField {
        domain,
        eval: Arc::new(move |z| {
            schwarzian_at(&g, z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        }),
        series,
    })
}

/// A quadratic differential `ψ = ω²` on `|z| > 1` with
/// `ω = π^{-1/2} Σ √m x_m z^{-m-1}`, so `‖ψ‖_{L¹} = ‖x‖² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticDifferential {
    x: Vec<Complex64>,
}

impl QuadraticDifferential {
    pub fn new(x: &UnitL2Vector) -> Self {
        QuadraticDifferential {
            x: x.as_slice().to_vec(),
        }
    }

    pub fn omega(&self, z: Complex64) -> Complex64 {
        let u = z.inv();
        let mut acc = Complex64::default();
        for (i, &xm) in self.x.iter().enumerate().rev() {
            acc = (acc + xm * ((i + 1) as f64).sqrt()) * u;
        }
        acc * u / PI.sqrt()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let w = self.omega(z);
        w * w
    }

    pub fn field(&self) -> PointField {
        let q = self.clone();
        PointField::new(move |z| q.eval(z))
    }
}

/// Hyperbolic sup norm and where it is attained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BNorm {
    pub value: f64,
    pub argmax: Complex64,
}

const BNORM_RTOL: f64 = 1e-4;

/// `sup λ^{-2}|φ|`: `(1-|z|²)²|φ|` on the disk, `(|z|²-1)²|φ|` outside it,
/// `|z - z̄|²|φ|` on the lower half-plane. All three are evaluated in the disk
/// chart, where the weight is invariant.
pub fn bnorm(phi: &SchwarzianField) -> Result<BNorm> {
    let domain = phi.domain;
    let weighted = |zeta: Complex64| -> f64 {
        let (z, dz) = domain.chart(zeta);
        let s = 1.0 - zeta.norm_sqr();
        s * s * (phi.eval(z) * dz * dz).norm()
    };

    let r_min = if domain == Domain::ExteriorDisk { 1.0 / 64.0 } else { 0.0 };
    let mut radii: Vec<f64> = (0..32).map(|k| (k as f64 / 32.0).max(r_min)).collect();
    radii.extend((1..=24).map(|j| 1.0 - 2f64.powi(-j)));
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup();

    let mut m = 64usize;
    let mut previous: Option<f64> = None;
    let best = loop {
        let level = radii
            .par_iter()
            .map(|&r| {
                let count = if r == 0.0 { 1 } else { m };
                let mut local = (f64::NEG_INFINITY, r, 0.0);
                for j in 0..count {
                    let th = 2.0 * PI * j as f64 / m as f64;
                    let v = weighted(Complex64::from_polar(r, th));
                    if !v.is_finite() {
                        return (f64::INFINITY, r, th);
                    }
                    if v > local.0 {
                        local = (v, r, th);
                    }
                }
                local
            })
            .reduce(
                || (f64::NEG_INFINITY, 0.0, 0.0),
                |a, b| if b.0 > a.0 { b } else { a },
            );
        if !level.0.is_finite() {
            let (z, _) = domain.chart(Complex64::from_polar(level.1, level.2));
            return Err(Error::Singularity(z));
        }
        if let Some(prev) = previous {
            if (level.0 - prev).abs() <= BNORM_RTOL * level.0.max(1e-300) || m >= 1 << 14 {
                break level;
            }
        }
        previous = Some(level.0);
        m *= 2;
    };

    // Growth toward the boundary along the best ray means the supremum is infinite.
    let (_, _, theta) = best;
    let profile: Vec<f64> = [12, 16, 20, 24]
        .iter()
        .map(|&j| weighted(Complex64::from_polar(1.0 - 2f64.powi(-j), theta)))
        .collect();
    if profile.windows(2).all(|w| w[1] > w[0]) && profile[3] > 8.0 * profile[0] {
        return Err(Error::UnboundedNorm(profile[3]));
    }

    // Pattern search in (atanh r, θ).
    let mut s = if best.1 > 0.0 { best.1.atanh() } else { 0.0 };
    let mut th = best.2;
    let mut val = best.0;
    let mut ds = 0.05;
    let mut dth = 2.0 * PI / m as f64;
    let eval_st = |s: f64, th: f64| weighted(Complex64::from_polar(s.abs().tanh().min(1.0 - 1e-16), th));
    while ds > 1e-12 || dth > 1e-12 {
        let mut moved = false;
        for (a, b) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let (s2, t2) = (s + a * ds, th + b * dth);
            let v = eval_st(s2, t2);
            if v > val {
                s = s2;
                th = t2;
                val = v;
                moved = true;
                break;
            }
        }
        if !moved {
            ds *= 0.5;
            dth *= 0.5;
        }
    }
    let (z, _) = domain.chart(Complex64::from_polar(s.abs().tanh(), th));
    Ok(BNorm { value: val, argmax: z })
}

/// `z ↦ (az + b)/(cz + d)` with `ad - bc ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        if (a * d - b * c).norm() == 0.0 {
            return Err(Error::Domain("degenerate Möbius coefficients".into()));
        }
        Ok(Mobius { a, b, c, d })
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::default());
        Mobius { a: o, b: z, c: z, d: o }
    }

    /// `z ↦ 1/z`, exchanging the disk and its exterior.
    pub fn inversion() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::default());
        Mobius { a: z, b: o, c: o, d: z }
    }

    /// `ζ ↦ x0 - i y0 (1+ζ)/(1-ζ)`: the disk onto the lower half-plane with `0 ↦ x0 - i y0`.
    pub fn cayley_lower(x0: f64, y0: f64) -> Self {
        Mobius {
            a: Complex64::new(-x0, -y0),
            b: Complex64::new(x0, -y0),
            c: Complex64::new(-1.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = self.c * z + self.d;
        (self.a * self.d - self.b * self.c) / (den * den)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }
}

/// `(φ∘σ)(σ')²`, the Schwarzian of `f∘σ` when `φ = S_f`; `σ` maps `domain` into φ's domain.
pub fn schwarzian_compose(phi: &SchwarzianField, sigma: &Mobius, domain: Domain) -> SchwarzianField {
    let inner = phi.clone();
    let s = *sigma;
    SchwarzianField::new(domain, move |z| {
        let d = s.derivative(z);
        inner.eval(s.eval(z)) * d * d
    })
}

const RK_TOL: f64 = 1e-13;
const RK_MAX_STEPS: usize = 200_000;
const POLE_RATIO: f64 = 1e-7;

/// `w = η₁/η₂` for `η'' + (φ/2)η = 0`, normalized by `w(z₀) = 0`, `w'(z₀) = 1`,
/// `w''(z₀) = 0`, evaluated by integrating along the segment from `z₀`.
#[derive(Clone, Debug)]
pub struct SchwarzianMap {
    phi: SchwarzianField,
    base: Complex64,
}

/// Reconstruct the map with Schwarzian `φ`, based at the domain's natural point
/// (`0` for the disk, `-i` for the lower half-plane).
pub fn map_from_schwarzian(phi: &SchwarzianField) -> Result<SchwarzianMap> {
    let base = match phi.domain {
        Domain::UnitDisk => Complex64::default(),
        Domain::LowerHalfPlane => Complex64::new(0.0, -1.0),
        Domain::ExteriorDisk => {
            return Err(Error::Domain(
                "transplant exterior Schwarzians to the disk before integrating".into(),
            ))
        }
    };
    Ok(SchwarzianMap {
        phi: phi.clone(),
        base,
    })
}

impl SchwarzianMap {
    pub fn with_base(phi: &SchwarzianField, base: Complex64) -> Result<Self> {
        if !phi.domain.contains(base) {
            return Err(Error::Domain(format!("base point {base} outside the domain")));
        }
        Ok(SchwarzianMap {
            phi: phi.clone(),
            base,
        })
    }

    pub fn base(&self) -> Complex64 {
        self.base
    }

    /// `(w(z), w'(z))`.
    pub fn eval_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let [e1, _, e2, _] = self.integrate(z)?;
        if e2.norm() <= POLE_RATIO * e1.norm() {
            return Err(Error::Pole(z));
        }
        Ok((e1 / e2, (e2 * e2).inv()))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.eval_with_derivative(z).map(|(w, _)| w)
    }

    fn rhs(&self, s: f64, dz: Complex64, y: &[Complex64; 4]) -> [Complex64; 4] {
        let q = self.phi.eval(self.base + dz * s) * 0.5;
        [dz * y[1], -dz * q * y[0], dz * y[3], -dz * q * y[2]]
    }

    fn rk4(&self, s: f64, h: f64, dz: Complex64, y: &[Complex64; 4]) -> [Complex64; 4] {
        let add = |y: &[Complex64; 4], k: &[Complex64; 4], c: f64| {
            [y[0] + k[0] * c, y[1] + k[1] * c, y[2] + k[2] * c, y[3] + k[3] * c]
        };
        let k1 = self.rhs(s, dz, y);
        let k2 = self.rhs(s + h / 2.0, dz, &add(y, &k1, h / 2.0));
        let k3 = self.rhs(s + h / 2.0, dz, &add(y, &k2, h / 2.0));
        let k4 = self.rhs(s + h, dz, &add(y, &k3, h));
        let mut out = *y;
        for i in 0..4 {
            out[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        out
    }

    fn integrate(&self, z: Complex64) -> Result<[Complex64; 4]> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::default();
        let mut y = [zero, one, one, zero];
        let dz = z - self.base;
        if dz.norm() == 0.0 {
            return Ok(y);
        }
        let mut s = 0.0;
        let mut h: f64 = 0.05;
        let mut steps = 0;
        while s < 1.0 {
            h = h.min(1.0 - s);
            let full = self.rk4(s, h, dz, &y);
            let half = self.rk4(s, h / 2.0, dz, &y);
            let half = self.rk4(s + h / 2.0, h / 2.0, dz, &half);
            let scale = 1.0 + y.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let err = (0..4).map(|i| (full[i] - half[i]).norm()).fold(0.0, f64::max) / scale;
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite state near {}", self.base + dz * s)));
            }
            if err <= RK_TOL {
                let before = y[2];
                for i in 0..4 {
                    y[i] = half[i] + (half[i] - full[i]) / 15.0;
                }
                // a zero of η₂ crossed within the step turns its argument by about π
                let turn = (y[2] / before).arg().abs();
                if s + h < 1.0 && (turn > 0.5 * PI || y[2].norm() <= POLE_RATIO * y[0].norm()) {
                    return Err(Error::Pole(self.base + dz * (s + 0.5 * h)));
                }
                s += h;
            }
            let factor = if err == 0.0 { 4.0 } else { (0.9 * (RK_TOL / err).powf(0.2)).clamp(0.1, 4.0) };
            h *= factor;
            steps += 1;
            if steps > RK_MAX_STEPS || h < 1e-14 {
                return Err(Error::Integration(format!(
                    "step control failed on the segment to {z}"
                )));
            }
        }
        Ok(y)
    }
}

/// Disk map `w = η₁/η₂` with Schwarzian `φ` given as a series at 0, solved
/// coefficientwise; `w(0) = 0`, `w'(0) = 1`, `w''(0) = 0`.
pub fn map_series_from_schwarzian(phi: &Series, degree: usize) -> Result<TaylorMap> {
    let solve = |e0: f64, e1: f64| {
        let mut eta = vec![Complex64::default(); degree + 1];
        eta[0] = Complex64::new(e0, 0.0);
        if degree >= 1 {
            eta[1] = Complex64::new(e1, 0.0);
        }
        for k in 0..degree.saturating_sub(1) {
            let mut acc = Complex64::default();
            for j in 0..=k {
                acc += phi.coeff(j) * eta[k - j];
            }
            eta[k + 2] = -acc * 0.5 / ((k + 2) * (k + 1)) as f64;
        }
        Series::new(eta)
    };
    let eta1 = solve(0.0, 1.0);
    let eta2 = solve(1.0, 0.0);
    let w = eta1.mul(&eta2.reciprocal(degree)?, degree);
    TaylorMap::disk(w.coeffs()[1..].to_vec())
}

/// Harmonic Beltrami coefficient `μ(z) = -2y²φ(z̄)` on the upper half-plane.
#[derive(Clone, Debug)]
pub struct AhlforsWeill {
    phi: SchwarzianField,
    /// `‖φ‖_{B(H*)}`.
    pub phi_norm: f64,
    /// `sup |μ| = ‖φ‖/2`.
    pub mu_sup: f64,
    /// Whether `‖φ‖ < 1/2` holds.
    pub hypothesis_holds: bool,
}

impl AhlforsWeill {
    pub fn mu(&self, z: Complex64) -> Complex64 {
        if z.im <= 0.0 {
            return Complex64::default();
        }
        self.phi.eval(z.conj()) * (-2.0 * z.im * z.im)
    }

    pub fn field(&self) -> PointField {
        let aw = self.clone();
        PointField::new(move |z| aw.mu(z))
    }
}

/// Build the coefficient; returned even when `‖φ‖ ≥ 1/2`, with the flag cleared.
pub fn ahlfors_weill(phi: &SchwarzianField) -> Result<AhlforsWeill> {
    if phi.domain != Domain::LowerHalfPlane {
        return Err(Error::Domain("Ahlfors–Weill needs a lower half-plane Schwarzian".into()));
    }
    let norm = bnorm(phi)?.value;
    Ok(AhlforsWeill {
        phi: phi.clone(),
        phi_norm: norm,
        mu_sup: norm / 2.0,
        hypothesis_holds: norm < 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn koebe_t(t: f64, n: usize) -> TaylorMap {
        // z/(1+tz)^2 = Σ (-1)^{k-1} k t^{k-1} z^k
        TaylorMap::disk((1..=n).map(|k| c((-t).powi(k as i32 - 1) * k as f64)).collect()).unwrap()
    }

    #[test]
    fn root_transform_of_identity() {
        let f = TaylorMap::identity(6);
        let g = root_transform(&f, 3).unwrap();
        assert!(g.coeffs()[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn root_transform_koebe_square() {
        let t = 0.5;
        let g = root_transform(&koebe_t(t, 12), 2).unwrap();
        // z/(1 + t z^2)
        for k in 1..=23 {
            let expect = if k % 2 == 1 { (-t).powi((k as i32 - 1) / 2) } else { 0.0 };
            assert!((g.coeff(k) - c(expect)).norm() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn root_transform_cubic_leading_terms() {
        let a2 = Complex64::new(0.3, -0.2);
        let f = TaylorMap::disk(vec![c(1.0), a2, c(0.0), c(0.0)]).unwrap();
        let g = root_transform(&f, 3).unwrap();
        assert!((g.coeff(4) - a2 / 3.0).norm() < 1e-15);
        for k in 1..=g.truncation() {
            if k % 3 != 1 {
                assert!(g.coeff(k).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn pullbacks() {
        let t = 0.4;
        let mu = PointField::new(move |z: Complex64| z.conj() / z * t);
        let z = Complex64::new(1.3, 0.7);
        for p in 2..5 {
            assert!((pullback_beltrami(&mu, p).eval(z).norm() - t).abs() < 1e-14);
        }
        let psi = PointField::new(|z: Complex64| z.powi(-4));
        let q = pullback_quadratic(&psi, 2);
        assert!((q.eval(z) - z.powi(-6) * 4.0).norm() < 1e-14);
    }

    #[test]
    fn truncation_examples() {
        let t = 0.3;
        let mu = PointField::new(move |z: Complex64| if z.norm() > 1.0 { c(t) } else { c(0.0) });
        let m = truncate_beltrami(&mu, 0.5).unwrap();
        assert_eq!(m.eval(c(1.5)), c(0.0));
        assert_eq!(m.eval(c(2.5)), c(t));
        assert!(truncate_beltrami(&mu, 1.0).is_err());
        assert!(truncate_beltrami(&mu, 0.0).is_err());
    }

    #[test]
    fn homotopy_examples() {
        let a2 = Complex64::new(0.2, 0.1);
        let f = TaylorMap::disk(vec![c(1.0), a2]).unwrap();
        let g = homotopy_map(&f, 0.5).unwrap();
        assert_eq!(g.coeff(2), a2 * 0.5);
        assert_eq!(homotopy_map(&f, 1.0).unwrap(), f);
        let (t, r) = (0.5, 0.8);
        let phi = SchwarzianField::new(Domain::UnitDisk, move |z| {
            let d = c(1.0) - z * z * (t * t);
            c(-6.0 * t * t) / (d * d)
        });
        let h = homotopy_schwarzian(&phi, r).unwrap();
        assert!((h.eval(c(0.0)) - c(-0.96)).norm() < 1e-14);
    }

    #[test]
    fn schwarzian_examples() {
        let t: f64 = 0.5;
        let mob = TaylorMap::disk((1..=30).map(|k| c(t.powi(k - 1))).collect()).unwrap();
        assert!(schwarzian_at(&mob, Complex64::new(0.2, 0.1)).unwrap().norm() < 1e-12);
        let quad = TaylorMap::disk(vec![c(1.0), c(t)]).unwrap();
        assert!((schwarzian_at(&quad, c(0.0)).unwrap() - c(-1.5)).norm() < 1e-15);
        assert!(matches!(schwarzian_at(&quad, c(-1.0)), Err(Error::Singularity(_))));
        let f = koebe_t(t, 80);
        let s = schwarzian(&f).unwrap();
        for z in [c(0.0), Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4)] {
            let d = c(1.0) - z * z * (t * t);
            let expect = c(-6.0 * t * t) / (d * d);
            assert!((s.eval(z) - expect).norm() < 1e-12);
            assert!((s.series().unwrap().eval(z) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn exterior_schwarzian_matches_contour_derivative() {
        let f = TaylorMap::sigma(vec![c(0.1), Complex64::new(0.2, 0.1), c(-0.05)]).unwrap();
        let s = schwarzian(&f).unwrap();
        let z = Complex64::new(1.6, -0.9);
        let num = crate::quad::contour_schwarzian(|w| f.eval(w), z, 0.2).unwrap();
        assert!((s.eval(z) - num).norm() < 1e-10);
    }

    #[test]
    fn bnorm_examples() {
        let k = Complex64::new(0.3, 0.4);
        let b = bnorm(&SchwarzianField::new(Domain::UnitDisk, move |_| k)).unwrap();
        assert!((b.value - 0.5).abs() < 1e-12);
        assert!(b.argmax.norm() < 1e-6);
        let t = 0.5;
        let phi = SchwarzianField::new(Domain::UnitDisk, move |z| {
            let d = c(1.0) - z * z * (t * t);
            c(-6.0 * t * t) / (d * d)
        });
        assert!((bnorm(&phi).unwrap().value - 1.5).abs() < 1e-10);
        let lower = SchwarzianField::new(Domain::LowerHalfPlane, |z| {
            (z - Complex64::i()).powi(-4)
        });
        let b = bnorm(&lower).unwrap();
        assert!((b.value - 0.25).abs() < 1e-10);
        assert!((b.argmax - Complex64::new(0.0, -1.0)).norm() < 1e-4);
        let flat = SchwarzianField::new(Domain::LowerHalfPlane, |_| c(1.0));
        assert!(matches!(bnorm(&flat), Err(Error::UnboundedNorm(_))));
    }

    #[test]
    fn mobius_algebra() {
        let m = Mobius::cayley_lower(0.3, 2.0);
        assert!((m.eval(c(0.0)) - Complex64::new(0.3, -2.0)).norm() < 1e-15);
        let z = Complex64::new(0.2, -0.5);
        assert!((m.inverse().eval(m.eval(z)) - z).norm() < 1e-14);
        assert!(m.eval(Complex64::from_polar(0.9, 1.0)).im < 0.0);
        let h = 1e-6;
        let fd = (m.eval(z + h) - m.eval(z - h)) / (2.0 * h);
        assert!((fd - m.derivative(z)).norm() < 1e-8);
        let inv = Mobius::inversion();
        assert!((m.compose(&inv).eval(z) - m.eval(z.inv())).norm() < 1e-13);
    }

    #[test]
    fn compose_examples() {
        let sigma = Mobius::cayley_lower(0.0, 1.0);
        let zero = schwarzian_compose(&SchwarzianField::zero(Domain::LowerHalfPlane), &sigma, Domain::UnitDisk);
        assert_eq!(zero.eval(c(0.3)), c(0.0));
        let phi = SchwarzianField::new(Domain::UnitDisk, |z| z * z + 1.0);
        let same = schwarzian_compose(&phi, &Mobius::identity(), Domain::UnitDisk);
        assert_eq!(same.eval(c(0.4)), phi.eval(c(0.4)));
        // φ ≡ 1 is the Schwarzian of tan(z/√2)·√2; compare with a numerical Schwarzian of f∘σ
        let one = SchwarzianField::new(Domain::LowerHalfPlane, |_| c(1.0));
        let composed = schwarzian_compose(&one, &sigma, Domain::UnitDisk);
        let f = move |z: Complex64| {
            let s = 2f64.sqrt();
            (sigma.eval(z) / s).tan() * s
        };
        let z = Complex64::new(0.1, 0.2);
        let num = crate::quad::contour_schwarzian(f, z, 0.05).unwrap();
        assert!((composed.eval(z) - num).norm() < 1e-8 * num.norm().max(1.0));
    }

    #[test]
    fn reconstruction_round_trip() {
        let zero = map_from_schwarzian(&SchwarzianField::zero(Domain::UnitDisk)).unwrap();
        let z = Complex64::new(0.3, 0.4);
        assert!((zero.eval(z).unwrap() - z).norm() < 1e-14);

        let t = 0.5;
        let phi = SchwarzianField::new(Domain::UnitDisk, move |z| {
            let d = c(1.0) - z * z * (t * t);
            c(-6.0 * t * t) / (d * d)
        });
        let w = map_from_schwarzian(&phi).unwrap();
        for z in [Complex64::new(0.5, 0.2), Complex64::new(-0.3, -0.6), c(0.7)] {
            let num = crate::quad::contour_schwarzian(|u| w.eval(u).unwrap(), z, 0.05).unwrap();
            assert!((num - phi.eval(z)).norm() < 1e-6 * phi.eval(z).norm());
        }
        // normalization w(0)=0, w'(0)=1, w''(0)=0 against the series solution
        let series = Series::new((0..40).map(|k| {
            if k % 2 == 0 { c(-6.0 * t * t * (k / 2 + 1) as f64 * (t * t).powi(k / 2)) } else { c(0.0) }
        }).collect());
        let ws = map_series_from_schwarzian(&series, 40).unwrap();
        assert_eq!(ws.coeff(2), c(0.0));
        let z = Complex64::new(0.2, -0.1);
        assert!((ws.eval(z) - w.eval(z).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn reconstruction_reports_poles() {
        // w = tan(z·c) has a pole at π/(2c); its Schwarzian is the constant 2c²
        let cc = 2.0;
        let phi = SchwarzianField::new(Domain::UnitDisk, move |_| c(2.0 * cc * cc));
        let w = map_from_schwarzian(&phi).unwrap();
        let z = Complex64::new(0.3, 0.0);
        assert!((w.eval(z).unwrap() - (z * cc).tan() / cc).norm() < 1e-10);
        assert!(matches!(w.eval(c(0.95)), Err(Error::Pole(_))));
    }

    #[test]
    fn ahlfors_weill_examples() {
        let phi = SchwarzianField::new(Domain::LowerHalfPlane, |z| (z - Complex64::i()).powi(-4));
        let aw = ahlfors_weill(&phi).unwrap();
        assert!((aw.mu(Complex64::i()) - c(-0.125)).norm() < 1e-15);
        assert!(aw.hypothesis_holds);
        let zero = ahlfors_weill(&SchwarzianField::zero(Domain::LowerHalfPlane)).unwrap();
        assert_eq!(zero.mu(Complex64::new(0.2, 0.7)), c(0.0));
        let big = ahlfors_weill(&phi.scaled(2.4)).unwrap();
        assert!((big.phi_norm - 0.6).abs() < 1e-9);
        assert!(!big.hypothesis_holds);
    }

    #[test]
    fn quadratic_differential_basis() {
        let q = QuadraticDifferential::new(&UnitL2Vector::basis(3, 1));
        let z = Complex64::new(1.2, 0.5);
        assert!((q.eval(z) - z.powi(-4) / PI).norm() < 1e-15);
    }
}
