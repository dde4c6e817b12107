//! The pairing functional for a Teichmüller coefficient and for a coefficient
//! supported in an annulus, with the Grunsky bound each one gives.

use grunsky::metrics::{alpha_functional, grunsky_bound_check, AlphaConfig};
use grunsky::transforms::PointField;
use grunsky::Complex64;

fn main() -> grunsky::Result<()> {
    let k = 0.3;
    let cfg = AlphaConfig { coords: 16, starts: 32, radial: 256, angular: 256, ..AlphaConfig::default() };
    let teich = PointField::new(move |z: Complex64| z.powi(4) / z.norm_sqr().powi(2) * k);
    let annulus = PointField::new(move |z: Complex64| {
        if z.norm() < 2.0 { z.conj() / z * k } else { Complex64::default() }
    });
    for (name, mu) in [("teichmuller", teich), ("annulus", annulus)] {
        let r = alpha_functional(&mu, &cfg)?;
        let bound = grunsky_bound_check(k, r.alpha.min(k))?;
        println!(
            "{name:<12} alpha = {:.6}  subspace sup = {:.6}  |psi|_1 = {:.6}  bound = {bound:.6}",
            r.alpha, r.subspace_sup, r.psi_norm
        );
    }
    Ok(())
}
