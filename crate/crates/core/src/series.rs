//! Truncated power series in one and two variables.
//!
//! Everything here works on plain coefficient vectors in double precision.
//! Logarithms, powers and reciprocals use the usual coefficient recursions;
//! bivariate series are graded by total degree so the same recursions apply
//! with homogeneous polynomials in place of scalars.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// Univariate series `Σ c_k z^k`, truncated at degree `len - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    coeffs: Vec<Complex64>,
}

impl Series {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Series { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Series::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zeros(degree: usize) -> Self {
        Series::new(vec![Complex64::new(0.0, 0.0); degree + 1])
    }

    pub fn one(degree: usize) -> Self {
        let mut s = Series::zeros(degree);
        s.coeffs[0] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the truncation.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Re-truncate (or zero-extend) to degree `d`.
    pub fn with_degree(&self, d: usize) -> Series {
        Series::new((0..=d).map(|k| self.coeff(k)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Series {
        Series::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn add(&self, other: &Series) -> Series {
        let d = self.degree().max(other.degree());
        Series::new((0..=d).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Series) -> Series {
        let d = self.degree().max(other.degree());
        Series::new((0..=d).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    /// Cauchy product truncated at degree `d`.
    pub fn mul(&self, other: &Series, d: usize) -> Series {
        let mut out = vec![Complex64::default(); d + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(d + 1) {
            if a == Complex64::default() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(d + 1 - i) {
                out[i + j] += a * b;
            }
        }
        Series::new(out)
    }

    pub fn derivative(&self) -> Series {
        if self.degree() == 0 {
            return Series::zeros(0);
        }
        Series::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::default(), |acc, &c| acc * z + c)
    }

    /// `1/s` up to degree `d`.
    pub fn reciprocal(&self, d: usize) -> Result<Series> {
        let c0 = self.coeff(0);
        if c0.norm() == 0.0 {
            return Err(Error::Normalization(
                "reciprocal of a series with zero constant term".into(),
            ));
        }
        let inv0 = c0.inv();
        let mut r = vec![Complex64::default(); d + 1];
        r[0] = inv0;
        for k in 1..=d {
            let mut acc = Complex64::default();
            for j in 1..=k.min(self.degree()) {
                acc += self.coeffs[j] * r[k - j];
            }
            r[k] = -acc * inv0;
        }
        Ok(Series::new(r))
    }

    fn check_unit(&self) -> Result<()> {
        let c0 = self.coeff(0);
        if (c0 - 1.0).norm() > UNIT_TOL {
            return Err(Error::Normalization(format!(
                "constant term must be 1, found {c0}"
            )));
        }
        Ok(())
    }

    /// Principal logarithm of a series with constant term 1.
    pub fn log(&self, d: usize) -> Result<Series> {
        self.check_unit()?;
        let mut l = vec![Complex64::default(); d + 1];
        for k in 1..=d {
            let mut acc = Complex64::default();
            for j in 1..k {
                acc += l[j] * self.coeff(k - j) * j as f64;
            }
            l[k] = self.coeff(k) - acc / k as f64;
        }
        Ok(Series::new(l))
    }

    /// `exp(s)`; the constant term enters as the scalar factor `e^{c_0}`.
    pub fn exp(&self, d: usize) -> Series {
        let mut e = vec![Complex64::default(); d + 1];
        e[0] = self.coeff(0).exp();
        for k in 1..=d {
            let mut acc = Complex64::default();
            for j in 1..=k {
                acc += self.coeff(j) * e[k - j] * j as f64;
            }
            e[k] = acc / k as f64;
        }
        Series::new(e)
    }

    /// Binomial branch `s^e` with value 1 at the origin (J. C. P. Miller recursion).
    pub fn pow(&self, e: f64, d: usize) -> Result<Series> {
        self.check_unit()?;
        let mut r = vec![Complex64::default(); d + 1];
        r[0] = Complex64::new(1.0, 0.0);
        for k in 1..=d {
            let mut acc = Complex64::default();
            for j in 1..=k {
                let s = self.coeff(j);
                if s != Complex64::default() {
                    acc += s * r[k - j] * ((e + 1.0) * j as f64 - k as f64);
                }
            }
            r[k] = acc / k as f64;
        }
        Ok(Series::new(r))
    }

    /// `s(z^p)` truncated at degree `p * degree`.
    pub fn substitute_power(&self, p: usize) -> Series {
        assert!(p >= 1);
        let mut out = vec![Complex64::default(); p * self.degree() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[p * k] = c;
        }
        Series::new(out)
    }
}

/// Bivariate series `Σ q_{jk} z^j ζ^k` truncated at total degree `D`.
///
/// Stored by homogeneous degree: slot `d(d+1)/2 + j` holds `q_{j, d-j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariateSeries {
    degree: usize,
    coeffs: Vec<Complex64>,
}

#[inline]
fn tri(d: usize, j: usize) -> usize {
    d * (d + 1) / 2 + j
}

impl BivariateSeries {
    pub fn zeros(degree: usize) -> Self {
        BivariateSeries {
            degree,
            coeffs: vec![Complex64::default(); tri(degree + 1, 0)],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient of `z^j ζ^k`.
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        if j + k > self.degree {
            return Complex64::default();
        }
        self.coeffs[tri(j + k, j)]
    }

    pub fn set(&mut self, j: usize, k: usize, value: Complex64) {
        assert!(j + k <= self.degree, "coefficient beyond truncation");
        self.coeffs[tri(j + k, j)] = value;
    }

    fn homogeneous(&self, d: usize) -> &[Complex64] {
        &self.coeffs[tri(d, 0)..tri(d + 1, 0)]
    }

    /// Largest `|q_{jk} - q_{kj}|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for d in 0..=self.degree {
            for j in 0..=d {
                worst = worst.max((self.get(j, d - j) - self.get(d - j, j)).norm());
            }
        }
        worst
    }

    pub fn mul(&self, other: &BivariateSeries) -> BivariateSeries {
        let degree = self.degree.min(other.degree);
        let mut out = BivariateSeries::zeros(degree);
        for d1 in 0..=degree {
            let a = self.homogeneous(d1);
            for d2 in 0..=degree - d1 {
                let b = other.homogeneous(d2);
                let base = tri(d1 + d2, 0);
                for (i, &x) in a.iter().enumerate() {
                    if x == Complex64::default() {
                        continue;
                    }
                    for (j, &y) in b.iter().enumerate() {
                        out.coeffs[base + i + j] += x * y;
                    }
                }
            }
        }
        out
    }

    /// Principal logarithm of a series with constant term 1.
    ///
    /// Uses the Euler operator `E = z∂_z + ζ∂_ζ`: from `Q·E(log Q) = E(Q)`,
    /// `d L_d = d Q_d - Σ_{e<d} e L_e Q_{d-e}` on homogeneous parts.
    pub fn log(&self) -> Result<BivariateSeries> {
        let c0 = self.get(0, 0);
        if (c0 - 1.0).norm() > UNIT_TOL {
            return Err(Error::Normalization(format!(
                "constant term must be 1, found {c0}"
            )));
        }
        let big_d = self.degree;
        let mut out = BivariateSeries::zeros(big_d);
        let mut acc = vec![Complex64::default(); big_d + 1];
        for d in 1..=big_d {
            acc[..=d].iter_mut().for_each(|a| *a = Complex64::default());
            for e in 1..d {
                let le = out.homogeneous(e);
                let q = self.homogeneous(d - e);
                let w = e as f64;
                for (i, &x) in le.iter().enumerate() {
                    if x == Complex64::default() {
                        continue;
                    }
                    let xw = x * w;
                    for (j, &y) in q.iter().enumerate() {
                        acc[i + j] += xw * y;
                    }
                }
            }
            let base = tri(d, 0);
            let inv_d = 1.0 / d as f64;
            for i in 0..=d {
                out.coeffs[base + i] = self.coeffs[base + i] - acc[i] * inv_d;
            }
        }
        Ok(out)
    }

    /// `exp(s)` for a series with zero constant term.
    pub fn exp(&self) -> Result<BivariateSeries> {
        if self.get(0, 0).norm() > UNIT_TOL {
            return Err(Error::Normalization(
                "bivariate exp expects a zero constant term".into(),
            ));
        }
        let big_d = self.degree;
        let mut out = BivariateSeries::zeros(big_d);
        out.set(0, 0, Complex64::new(1.0, 0.0));
        for d in 1..=big_d {
            let mut acc = vec![Complex64::default(); d + 1];
            for e in 1..=d {
                let le = self.homogeneous(e);
                let s = out.homogeneous(d - e);
                for (i, &x) in le.iter().enumerate() {
                    for (j, &y) in s.iter().enumerate() {
                        acc[i + j] += x * y * e as f64;
                    }
                }
            }
            let base = tri(d, 0);
            for (i, a) in acc.into_iter().enumerate() {
                out.coeffs[base + i] = a / d as f64;
            }
        }
        Ok(out)
    }
}

/// Which normalization a coefficient vector refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapClass {
    /// `f(z) = z + a_2 z^2 + …` in the unit disk; coefficients `a_1 = 1, a_2, …, a_N`.
    DiskS,
    /// `F(z) = z + b_0 + b_1/z + …` in `|z| > 1`; coefficients `b_0, …, b_N`.
    ExteriorSigma,
}

/// Truncated Taylor (or Laurent, for `ExteriorSigma`) data of a normalized univalent map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorMap {
    class: MapClass,
    coeffs: Vec<Complex64>,
}

impl TaylorMap {
    /// Disk map from `[a_1, a_2, …, a_N]`; `a_1` must be 1.
    pub fn disk(coeffs: Vec<Complex64>) -> Result<Self> {
        match coeffs.first() {
            None => Err(Error::Domain("truncation must be at least 1".into())),
            Some(a1) if (*a1 - 1.0).norm() > UNIT_TOL => Err(Error::Normalization(format!(
                "leading coefficient must be 1, found {a1}"
            ))),
            Some(_) => {
                let mut coeffs = coeffs;
                coeffs[0] = Complex64::new(1.0, 0.0);
                Ok(TaylorMap {
                    class: MapClass::DiskS,
                    coeffs,
                })
            }
        }
    }

    /// Exterior map from `[b_0, b_1, …, b_N]`.
    pub fn sigma(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::Domain("truncation must be at least 1".into()));
        }
        Ok(TaylorMap {
            class: MapClass::ExteriorSigma,
            coeffs,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut c = vec![Complex64::default(); n.max(1)];
        c[0] = Complex64::new(1.0, 0.0);
        TaylorMap {
            class: MapClass::DiskS,
            coeffs: c,
        }
    }

    pub fn class(&self) -> MapClass {
        self.class
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Highest coefficient index `N`.
    pub fn truncation(&self) -> usize {
        match self.class {
            MapClass::DiskS => self.coeffs.len(),
            MapClass::ExteriorSigma => self.coeffs.len() - 1,
        }
    }

    /// `a_k` for disk maps (`k ≥ 1`), `b_k` for exterior maps (`k ≥ 0`); zero past the truncation.
    pub fn coeff(&self, k: usize) -> Complex64 {
        match self.class {
            MapClass::DiskS if k == 0 => Complex64::default(),
            MapClass::DiskS => self.coeffs.get(k - 1).copied().unwrap_or_default(),
            MapClass::ExteriorSigma => self.coeffs.get(k).copied().unwrap_or_default(),
        }
    }

    /// Series `g` with `f(z) = z g(z)` (disk) or `F(z) = z g(1/z)` (exterior).
    pub fn unit_factor(&self) -> Series {
        match self.class {
            MapClass::DiskS => Series::new(self.coeffs.clone()),
            MapClass::ExteriorSigma => {
                let mut g = Vec::with_capacity(self.coeffs.len() + 1);
                g.push(Complex64::new(1.0, 0.0));
                g.extend_from_slice(&self.coeffs);
                Series::new(g)
            }
        }
    }

    /// Inverse of [`TaylorMap::unit_factor`].
    pub fn from_unit_factor(class: MapClass, g: &Series) -> Result<Self> {
        match class {
            MapClass::DiskS => TaylorMap::disk(g.coeffs().to_vec()),
            MapClass::ExteriorSigma => {
                if (g.coeff(0) - 1.0).norm() > UNIT_TOL {
                    return Err(Error::Normalization("unit factor must start with 1".into()));
                }
                TaylorMap::sigma(g.coeffs()[1..].to_vec())
            }
        }
    }

    pub fn truncated(&self, n: usize) -> TaylorMap {
        let len = match self.class {
            MapClass::DiskS => n.max(1),
            MapClass::ExteriorSigma => n.max(1) + 1,
        };
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len, Complex64::default());
        TaylorMap {
            class: self.class,
            coeffs,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self.class {
            MapClass::DiskS => z * self.unit_factor().eval(z),
            MapClass::ExteriorSigma => z * self.unit_factor().eval(z.inv()),
        }
    }

    /// `1/f(1/z)`, switching between the two classes. Both share their
    /// mixed Grunsky coefficients up to the sign convention.
    pub fn invert(&self) -> Result<TaylorMap> {
        let g = self.unit_factor();
        let r = g.reciprocal(g.degree())?;
        match self.class {
            MapClass::DiskS => TaylorMap::from_unit_factor(MapClass::ExteriorSigma, &r),
            MapClass::ExteriorSigma => TaylorMap::from_unit_factor(MapClass::DiskS, &r),
        }
    }
}

/// `f(z^p)` for a disk map, as a series in `z` of degree `p·N`.
pub fn compose_power(f: &TaylorMap, p: usize) -> Result<Series> {
    if p == 0 {
        return Err(Error::Domain("power must be at least 1".into()));
    }
    if f.class() != MapClass::DiskS {
        return Err(Error::Domain("compose_power expects a disk map".into()));
    }
    let n = f.truncation();
    let mut out = vec![Complex64::default(); p * n + 1];
    for k in 1..=n {
        out[p * k] = f.coeff(k);
    }
    Ok(Series::new(out))
}

/// `F(z) = 1/f(1/z)` for a disk map.
pub fn invert_to_sigma(f: &TaylorMap) -> Result<TaylorMap> {
    if f.class() != MapClass::DiskS {
        return Err(Error::Domain("invert_to_sigma expects a disk map".into()));
    }
    f.invert()
}
