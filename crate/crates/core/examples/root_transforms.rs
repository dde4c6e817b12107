//! Norms of the p-th root transforms of z/(1 + tz)²: even p reach |t|, odd p stay below.

use grunsky::metrics::limit_grunsky_estimate;
use grunsky::models::ModelMap;

fn main() -> grunsky::Result<()> {
    let t = 0.5;
    let n = 64;
    let f = ModelMap::KoebeT { t }.taylor(2 * n + 1)?;
    let report = limit_grunsky_estimate(&f, 8, n)?;
    for e in &report.entries {
        let gap = t - e.kappa;
        println!("p = {}  kappa = {:.12}  |t| - kappa = {gap:.3e}", e.p, e.kappa);
    }
    println!("estimated limit norm {:.12}", report.kappa_hat);
    Ok(())
}
