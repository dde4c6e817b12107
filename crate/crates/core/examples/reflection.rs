//! Reflection coefficient, dilatation, Green function and distance from a limit norm.

use grunsky::metrics::{green_function, reflection_coefficient, teich_distance};

fn main() -> grunsky::Result<()> {
    for kappa in [0.0, 0.1, 0.25, 0.5, 0.9] {
        let (q, big_q) = reflection_coefficient(kappa)?;
        println!(
            "kappa {kappa:.2}  q_L {q:.6}  Q_L {big_q:.6}  green {:.6}  distance {:.6}",
            green_function(kappa)?,
            teich_distance(kappa)?
        );
    }
    Ok(())
}
