//! Schwarzian of a two-vertex Schwarz–Christoffel map, its root r₀, and the
//! harmonic-coefficient comparison.

use grunsky::models::{harmonic_check, polygon_schwarzian_at, r0_root, sc_map_eval, HarmonicCheckConfig, PolygonSpec};
use grunsky::quad::contour_schwarzian;
use grunsky::Complex64;

fn main() -> grunsky::Result<()> {
    let p = PolygonSpec::new(vec![1.5, 1.5], vec![-1.0, 1.0], Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))?;
    for z in [Complex64::new(0.0, -1.0), Complex64::new(0.7, -0.3), Complex64::new(-2.0, -0.5)] {
        let exact = polygon_schwarzian_at(&p, z)?;
        let numeric = contour_schwarzian(|u| sc_map_eval(&p, u).unwrap(), z, 0.1)?;
        println!("S({z}) = {exact:.8}   from the map {numeric:.8}");
    }
    println!("r0 = {:.10}", r0_root(&p)?);
    let r = harmonic_check(&p, &HarmonicCheckConfig::default())?;
    println!(
        "kappa = {:.6} (series {:.6}), (r/2)|S| = {:.6}, gap {:.3}",
        r.kappa, r.kappa_series, r.target, r.relative_gap
    );
    Ok(())
}
