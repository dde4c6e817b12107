//! Rebuild a map from its Schwarzian by the linear ODE and check the
//! Ahlfors–Weill extension of a small half-plane Schwarzian.

use grunsky::models::ModelMap;
use grunsky::transforms::{ahlfors_weill, bnorm, map_from_schwarzian, Domain, SchwarzianField};
use grunsky::Complex64;

fn main() -> grunsky::Result<()> {
    let m = ModelMap::KoebeT { t: 0.5 };
    let phi = m.schwarzian().expect("disk map has a Schwarzian");
    let w = map_from_schwarzian(&phi)?;
    // w and f differ by a Möbius map fixing 0 with unit derivative, so
    // 1/f - 1/w is constant
    for z in [Complex64::new(0.3, 0.0), Complex64::new(-0.2, 0.6), Complex64::new(0.1, -0.8)] {
        let (wz, fz) = (w.eval(z)?, m.eval(z));
        println!("w({z}) = {wz:.10}   f(z) = {fz:.10}   1/f - 1/w = {:.10}", fz.inv() - wz.inv());
    }
    println!("|S_f|_B = {:.6}", bnorm(&phi)?.value);

    let small = SchwarzianField::new(Domain::LowerHalfPlane, |z: Complex64| {
        let u = z - Complex64::new(0.0, 1.0);
        u.powi(-2) * 0.2
    });
    let aw = ahlfors_weill(&small)?;
    println!("|phi|_B = {:.6}, sup|mu| = {:.6}, hypothesis {}", aw.phi_norm, aw.mu_sup, aw.hypothesis_holds);
    println!("mu(i) = {:.6}", aw.mu(Complex64::new(0.0, 1.0)));
    Ok(())
}
