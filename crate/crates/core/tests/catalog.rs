use grunsky::grunsky::{grunsky_matrix, grunsky_norm};
use grunsky::lspace::GrunskyPoint;
use grunsky::metrics::{alpha_functional, grunsky_bound_check, teich_distance, AlphaConfig};
use grunsky::models::{catalog, KappaFlag, ModelMap};
use grunsky::series::{invert_to_sigma, MapClass, TaylorMap};
use grunsky::transforms::{invert_beltrami, root_transform, PointField};
use grunsky::Complex64;

const N: usize = 24;

fn taylor(m: &ModelMap, n: usize) -> TaylorMap {
    let deg = match m {
        ModelMap::ExteriorDiagT { .. } | ModelMap::RadialStretch { .. } => 2 * n,
        _ => 2 * n + 1,
    };
    m.taylor(deg).unwrap()
}

fn kappa_p(m: &ModelMap, p: usize) -> f64 {
    let f = root_transform(&taylor(m, N), p).unwrap();
    grunsky_norm(&grunsky_matrix(&f, N).unwrap()).unwrap()
}

#[test]
fn root_transforms_dominate_and_stay_below_k() {
    for m in catalog() {
        let k1 = kappa_p(&m, 1);
        for p in 1..=8 {
            let kp = kappa_p(&m, p);
            assert!(kp >= k1 - 1e-6, "{} p = {p}", m.name());
            if let Some(k) = m.known_k() {
                assert!(kp <= k + 1e-3, "{} p = {p}", m.name());
            }
            match m.kappa_flag(p) {
                Some(KappaFlag::EqualToK) => assert!((kp - m.known_k().unwrap()).abs() < 1e-6),
                Some(KappaFlag::StrictlyLess) => assert!(kp < m.known_k().unwrap() - 1e-3),
                None => {}
            }
        }
    }
}

#[test]
fn mobius_maps_have_zero_grunsky_matrix() {
    for t in [0.0, 0.3, -0.7, 0.95] {
        let g = grunsky_matrix(&ModelMap::MobiusT { t }.taylor(2 * N + 1).unwrap(), N).unwrap();
        assert!(g.entries().iter().all(|v| v.norm() < 1e-10), "t = {t}");
    }
}

#[test]
fn first_column_matches_inverse_coefficients() {
    for m in catalog() {
        let f = taylor(&m, N);
        let c = GrunskyPoint::from_map(&f, N).unwrap();
        let sigma = match f.class() {
            MapClass::DiskS => invert_to_sigma(&f).unwrap(),
            MapClass::ExteriorSigma => f.clone(),
        };
        for k in 1..=N {
            assert!((c.get(k, 1) - sigma.coeff(k)).norm() < 1e-8, "{} m = {k}", m.name());
        }
    }
}

#[test]
fn grunsky_bound_holds_across_catalog() {
    let cfg = AlphaConfig { coords: 12, starts: 24, radial: 192, angular: 192, ..AlphaConfig::default() };
    for m in catalog() {
        let kappa = kappa_p(&m, 1);
        // exterior maps carry their dilatation in the disk; invert it onto |z| > 1
        let (k, alpha) = match m.extension_mu() {
            Some(mu) => {
                let mu = match taylor(&m, 1).class() {
                    MapClass::ExteriorSigma => invert_beltrami(&mu),
                    MapClass::DiskS => mu,
                };
                let outside = PointField::new(move |z: Complex64| if z.norm() > 1.0 { mu.eval(z) } else { Complex64::default() });
                let r = alpha_functional(&outside, &cfg).unwrap();
                (m.known_k().unwrap_or(r.mu_sup), r.alpha)
            }
            None => (m.known_k().unwrap_or(0.0), 0.0),
        };
        let bound = grunsky_bound_check(k, alpha.min(k)).unwrap();
        assert!(kappa <= bound + 1e-3, "{}: κ = {kappa}, bound {bound}", m.name());
    }
}

#[test]
fn distance_recovers_dilatation() {
    for m in catalog() {
        if let Some(k) = m.known_k() {
            assert!((teich_distance(k).unwrap().tanh() - k).abs() < 1e-15);
        }
    }
}

#[test]
fn catalog_json_round_trip() {
    for m in catalog() {
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<ModelMap>(&s).unwrap(), m);
        assert_eq!(ModelMap::by_name(m.name(), 0.5).unwrap().name(), m.name());
    }
}
