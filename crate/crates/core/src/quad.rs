//! Quadrature rules and contour differentiation shared by the other modules.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss–Kronrod (7/15) integral of a complex integrand over `[a, b]`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Complex64> {
    let (whole, err) = kronrod15(&f, a, b);
    let mut stack = vec![(a, b, whole, err, 0usize)];
    let mut total = Complex64::default();
    let mut evaluations = 0usize;
    let scale = whole.norm().max(1e-300);
    while let Some((lo, hi, value, err, depth)) = stack.pop() {
        let width_share = (hi - lo) / (b - a);
        if err <= rel_tol * scale * width_share.max(1e-3) || err < 1e-15 * value.norm() {
            total += value;
            continue;
        }
        if depth >= 60 || evaluations > 200_000 {
            return Err(Error::Quadrature(format!(
                "no convergence on [{lo}, {hi}] (error {err:.3e})"
            )));
        }
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        evaluations += 30;
        if !(v1.re.is_finite() && v1.im.is_finite() && v2.re.is_finite() && v2.im.is_finite()) {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        stack.push((lo, mid, v1, e1, depth + 1));
        stack.push((mid, hi, v2, e2, depth + 1));
    }
    Ok(total)
}

/// Taylor coefficients `f^{(k)}(z0)/k!` for `k < kmax`, from `n` samples on
/// the circle `|z - z0| = r` (discrete Cauchy integral; aliasing error `O((r/R)^n)`).
pub fn contour_taylor<F: Fn(Complex64) -> Complex64>(
    f: F,
    z0: Complex64,
    r: f64,
    n: usize,
    kmax: usize,
) -> Vec<Complex64> {
    let samples: Vec<Complex64> = (0..n)
        .map(|j| f(z0 + Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64)))
        .collect();
    (0..kmax)
        .map(|k| {
            let s: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64))
                .sum();
            s / (n as f64 * r.powi(k as i32))
        })
        .collect()
}

/// `S = f'''/f' - (3/2)(f''/f')^2` from contour samples around `z0`.
pub fn contour_schwarzian<F: Fn(Complex64) -> Complex64>(f: F, z0: Complex64, r: f64) -> Result<Complex64> {
    let t = contour_taylor(f, z0, r, 32, 4);
    let d1 = t[1];
    let d2 = t[2] * 2.0;
    let d3 = t[3] * 6.0;
    if d1.norm() < 1e-300 {
        return Err(Error::Singularity(z0));
    }
    let q = d2 / d1;
    Ok(d3 / d1 - q * q * 1.5)
}
