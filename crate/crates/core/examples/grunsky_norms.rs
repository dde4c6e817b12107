//! Grunsky norms of the catalog maps at a few truncations.

use grunsky::grunsky::{grunsky_matrix, grunsky_norm};
use grunsky::models::{catalog, ModelMap};

fn main() -> grunsky::Result<()> {
    println!("{:<16} {:>4} {:>14} {:>8}", "map", "N", "kappa", "k");
    for m in catalog() {
        for n in [4, 16, 64] {
            let deg = match m {
                ModelMap::ExteriorDiagT { .. } | ModelMap::RadialStretch { .. } => 2 * n,
                _ => 2 * n + 1,
            };
            let kappa = grunsky_norm(&grunsky_matrix(&m.taylor(deg)?, n)?)?;
            let k = m.known_k().map_or("-".to_string(), |k| format!("{k:.3}"));
            println!("{:<16} {n:>4} {kappa:>14.10} {k:>8}", m.name());
        }
    }
    Ok(())
}
