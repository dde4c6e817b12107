#![allow(dead_code)]

use grunsky::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random complex symmetric `n×n` matrix with entries in the unit square.
pub fn random_symmetric(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = vec![Complex64::default(); n * n];
    for i in 0..n {
        for j in i..n {
            let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    a
}

fn bilinear(n: usize, a: &[Complex64], x: &[Complex64]) -> f64 {
    let mut s = Complex64::default();
    for i in 0..n {
        for j in 0..n {
            s += a[i * n + j] * x[i] * x[j];
        }
    }
    s.norm()
}

fn normalize(x: &mut [Complex64]) {
    let r = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    x.iter_mut().for_each(|c| *c /= r);
}

/// `sup_{‖x‖=1} |Σ a_{mn} x_m x_n|` by random starts and a shrinking random
/// hill climb; independent of any linear algebra.
pub fn sampled_norm(n: usize, a: &[Complex64], seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..60 {
        let mut x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        normalize(&mut x);
        let mut v = bilinear(n, a, &x);
        let mut step = 0.5;
        while step > 1e-7 {
            let mut improved = false;
            for _ in 0..40 {
                let mut y: Vec<Complex64> = x
                    .iter()
                    .map(|c| c + Complex64::new(rng.gen_range(-step..step), rng.gen_range(-step..step)))
                    .collect();
                normalize(&mut y);
                let w = bilinear(n, a, &y);
                if w > v {
                    x = y;
                    v = w;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.max(v);
    }
    best
}

/// Largest singular value by a dense SVD.
pub fn svd_norm(n: usize, a: &[Complex64]) -> f64 {
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| nalgebra::Complex::new(a[i * n + j].re, a[i * n + j].im));
    m.singular_values().max()
}
