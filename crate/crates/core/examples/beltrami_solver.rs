//! Solve the Beltrami equation for a constant coefficient on the unit disk and
//! compare with the exact map z + t z̄ inside, z + t/z outside.

use grunsky::beltrami::{beltrami_residual, conformal_coeffs, solve_beltrami, BeltramiGrid, Normalization};
use grunsky::Complex64;

fn main() -> grunsky::Result<()> {
    let t = 0.3;
    let mu = BeltramiGrid::from_fn(4.0, 256, 4, |z| {
        if z.norm() < 1.0 { Complex64::new(t, 0.0) } else { Complex64::default() }
    })?;
    let w = solve_beltrami(&mu, Normalization::Hydrodynamic)?;
    println!("iterations {}", w.residual_history.len());
    for z in [Complex64::new(0.5, 0.2), Complex64::new(1.5, -1.0), Complex64::new(0.0, 2.5)] {
        let exact = if z.norm() < 1.0 { z + z.conj() * t } else { z + z.inv() * t };
        println!("w({z:.2}) = {:.6}   exact {exact:.6}", w.eval(z));
    }
    let l = conformal_coeffs(&w, &mu, 2.0, 8)?;
    println!("b1 = {:.6} (exact {t}), sampling residual {:.1e}", l.get(-1), l.residual);
    println!("relative Beltrami residual {:.2e}", beltrami_residual(&w, &mu, 2)?);
    Ok(())
}
