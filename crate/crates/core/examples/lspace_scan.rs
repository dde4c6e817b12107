//! Grunsky coefficients of z + t/z and of z/(1 + tz)² as points of the
//! coefficient space, scanned along the ray through the origin.

use grunsky::lspace::{lnorm, segment_scan, GrunskyPoint};
use grunsky::models::ModelMap;

fn main() -> grunsky::Result<()> {
    let n = 16;
    let diag = GrunskyPoint::from_map(&ModelMap::ExteriorDiagT { t: 0.5 }.taylor(2 * n)?, n)?;
    let koebe = GrunskyPoint::from_map(&ModelMap::KoebeT { t: 0.9 }.taylor(2 * n + 1)?, n)?;
    for (name, c) in [("exterior_diag", diag), ("koebe", koebe)] {
        println!("{name}: lnorm {:.6}", lnorm(&c));
        // push the ray past the boundary of the unit ball
        let far = c.scaled(grunsky::Complex64::new(2.5, 0.0));
        print!("{}", segment_scan(&far, 6)?.to_csv());
    }
    Ok(())
}
