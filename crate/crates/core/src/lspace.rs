//! Points of the space of Grunsky coefficient sequences: norm, membership and ray scans.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grunsky::{grunsky_matrix, largest_singular_value};
use crate::series::{invert_to_sigma, MapClass, TaylorMap};

const SYMMETRY_TOL: f64 = 1e-12;

/// Truncated symmetric sequence `c_{mn}`, `1 ≤ m, n ≤ N`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointJson", into = "PointJson")]
pub struct GrunskyPoint {
    n: usize,
    entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointJson {
    n: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<PointJson> for GrunskyPoint {
    type Error = Error;

    fn try_from(j: PointJson) -> Result<Self> {
        GrunskyPoint::new(j.n, j.entries.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<GrunskyPoint> for PointJson {
    fn from(c: GrunskyPoint) -> Self {
        PointJson {
            n: c.n,
            entries: c.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl GrunskyPoint {
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((entries[i * n + j] - entries[j * n + i]).norm() / scale);
            }
        }
        if worst > SYMMETRY_TOL {
            return Err(Error::Symmetry(worst));
        }
        Ok(GrunskyPoint { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        GrunskyPoint {
            n,
            entries: vec![Complex64::default(); n * n],
        }
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut c = GrunskyPoint::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            c.entries[i * n + i] = *d;
        }
        c
    }

    /// The Grunsky coefficients `α_{mn}` of the exterior map `F` at truncation
    /// `n`; a disk map `f` is replaced by `F(ζ) = 1/f(1/ζ)`.
    pub fn from_map(f: &TaylorMap, n: usize) -> Result<Self> {
        let g = match f.class() {
            MapClass::DiskS => grunsky_matrix(&invert_to_sigma(f)?, n)?,
            MapClass::ExteriorSigma => grunsky_matrix(f, n)?,
        };
        let mut entries = g.entries().to_vec();
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] /= (((i + 1) * (j + 1)) as f64).sqrt();
            }
        }
        Ok(GrunskyPoint { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `c_{mn}`, 1-based.
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[(m - 1) * self.n + (n - 1)]
    }

    pub fn scaled(&self, s: Complex64) -> GrunskyPoint {
        GrunskyPoint {
            n: self.n,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, o: &GrunskyPoint) -> Result<GrunskyPoint> {
        if o.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: o.n,
            });
        }
        Ok(GrunskyPoint {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect(),
        })
    }

    fn weighted(&self) -> Vec<Complex64> {
        let n = self.n;
        (0..n * n)
            .map(|k| self.entries[k] * (((k / n + 1) * (k % n + 1)) as f64).sqrt())
            .collect()
    }
}

/// Operator norm of `(√(mn) c_{mn})`.
pub fn kappa(c: &GrunskyPoint) -> f64 {
    if c.n == 0 {
        return 0.0;
    }
    largest_singular_value(c.n, &c.weighted())
}

/// `sup √(mn)|c_{mn}| + ‖(√(mn) c_{mn})‖`.
pub fn lnorm(c: &GrunskyPoint) -> f64 {
    let w = c.weighted();
    let sup = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
    sup + kappa(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub kappa: f64,
    /// `κ < 1`: necessary at every truncation, decided only at this one.
    pub inside: bool,
    pub n: usize,
}

pub fn membership_probe(c: &GrunskyPoint) -> Membership {
    let kappa = kappa(c);
    Membership {
        kappa,
        inside: kappa < 1.0,
        n: c.n,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub t: f64,
    pub kappa: f64,
    pub lnorm: f64,
    pub inside: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentScan {
    pub n: usize,
    pub rows: Vec<ScanRow>,
    /// The inside set along the ray is an initial interval `[0, t*)`.
    pub interval: bool,
}

impl SegmentScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,kappa,lnorm,inside\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:.15e},{:.15e},{}\n", r.t, r.kappa, r.lnorm, r.inside));
        }
        out
    }
}

/// Membership along `{t c : 0 ≤ t ≤ 1}` at `steps` equispaced points.
pub fn segment_scan(c: &GrunskyPoint, steps: usize) -> Result<SegmentScan> {
    if steps < 2 {
        return Err(Error::Domain(format!("a scan needs at least 2 steps, got {steps}")));
    }
    let rows: Vec<ScanRow> = (0..steps)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            let ct = c.scaled(Complex64::new(t, 0.0));
            let m = membership_probe(&ct);
            ScanRow {
                t,
                kappa: m.kappa,
                lnorm: lnorm(&ct),
                inside: m.inside,
            }
        })
        .collect();
    let interval = rows.windows(2).all(|w| w[0].inside || !w[1].inside);
    assert!(interval, "κ-membership along a ray must be an interval");
    Ok(SegmentScan { n: c.n, rows, interval })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag(t: f64, n: usize) -> GrunskyPoint {
        GrunskyPoint::diagonal(&(1..=n).map(|m| c(t.powi(m as i32) / m as f64)).collect::<Vec<_>>())
    }

    #[test]
    fn norm_examples() {
        assert_eq!(lnorm(&GrunskyPoint::zeros(5)), 0.0);
        assert!((lnorm(&diag(0.5, 20)) - 1.0).abs() < 1e-12);
        assert!((lnorm(&GrunskyPoint::diagonal(&[c(0.3)])) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_asymmetry() {
        let e = vec![c(0.0), c(0.1), c(0.2), c(0.0)];
        assert!(matches!(GrunskyPoint::new(2, e), Err(Error::Symmetry(_))));
    }

    #[test]
    fn membership_examples() {
        let z = membership_probe(&GrunskyPoint::zeros(3));
        assert!(z.inside && z.kappa == 0.0 && z.n == 3, "{z:?}");
        let m = membership_probe(&diag(0.5, 10));
        assert!(m.inside && (m.kappa - 0.5).abs() < 1e-12);
        let o = membership_probe(&diag(1.2, 1));
        assert!(!o.inside && (o.kappa - 1.2).abs() < 1e-12);
        // the weighted diagonal is t^m, so beyond N = 1 the norm is t^N
        let o = membership_probe(&diag(1.2, 10));
        assert!((o.kappa - 1.2f64.powi(10)).abs() < 1e-10);
    }

    #[test]
    fn scan_is_linear_on_diagonal() {
        let s = segment_scan(&diag(0.5, 10), 11).unwrap();
        for r in &s.rows {
            assert!((r.kappa - 0.5 * r.t).abs() < 1e-12 && r.inside);
        }
        let far = segment_scan(&diag(1.2, 10), 13).unwrap();
        assert!(far.interval && !far.rows.last().unwrap().inside);
        assert!(segment_scan(&GrunskyPoint::zeros(2), 1).is_err());
        assert!(s.to_csv().starts_with("t,kappa,lnorm,inside\n0,"));
    }

    #[test]
    fn first_column_is_inverse_coefficients() {
        let n = 8;
        let t: f64 = 0.5;
        let f = TaylorMap::disk((1..=2 * n + 1).map(|k| c(k as f64 * (-t).powi(k as i32 - 1))).collect()).unwrap();
        let point = GrunskyPoint::from_map(&f, n).unwrap();
        let sigma = invert_to_sigma(&f).unwrap();
        for m in 1..=n {
            assert!((point.get(m, 1) - sigma.coeff(m)).norm() < 1e-8, "m = {m} {} {}", point.get(m, 1), sigma.coeff(m));
        }
    }

    #[test]
    fn json_round_trip() {
        let p = diag(0.5, 3);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<GrunskyPoint>(&s).unwrap(), p);
        assert!(serde_json::from_str::<GrunskyPoint>(r#"{"n":1,"entries":[[0,0]],"x":1}"#).is_err());
    }
}
