//! Experiment runner: one JSON config per subcommand, JSON and CSV artifacts out.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::beltrami::{
    beltrami_residual, conformal_coeffs, read_grid, solve_beltrami, write_grid, BeltramiGrid, Normalization,
};
use crate::error::Error;
use crate::grunsky::{grunsky_matrix, grunsky_norm};
use crate::lspace::{lnorm, membership_probe, segment_scan, GrunskyPoint};
use crate::metrics::{
    alpha_functional, grunsky_bound_check, green_function, limit_grunsky_estimate, outer_limit_estimate,
    reflection_coefficient, teich_distance, AlphaConfig,
};
use crate::models::{harmonic_check, polygon_schwarzian_at, r0_root, HarmonicCheckConfig, ModelMap, PolygonSpec};
use crate::series::{MapClass, TaylorMap};
use crate::transforms::{invert_beltrami, PointField};

pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "grunsky-lab", about = "Grunsky norms, root transforms and Beltrami solutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Grunsky matrix and norm of one map.
    Grunsky,
    /// Norms of the root transforms and the limit estimate.
    Rootnorm,
    /// Beltrami solve and Laurent coefficients outside the support.
    Solve,
    /// Pairing functional and the Grunsky bound it implies.
    Alpha,
    /// Reflection coefficient, dilatation, Green function and distance.
    Reflect,
    /// Polygon Schwarzian, r₀ and the harmonic-coefficient check.
    Polygon,
    /// Membership scan along a ray of Grunsky coefficients.
    Lscan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Grunsky => "grunsky",
            Command::Rootnorm => "rootnorm",
            Command::Solve => "solve",
            Command::Alpha => "alpha",
            Command::Reflect => "reflect",
            Command::Polygon => "polygon",
            Command::Lscan => "lscan",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Numerical(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "config error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn schema<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Schema(msg.into()))
}

/// Where a map comes from.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSource {
    Identity,
    Catalog(ModelMap),
    /// `[a_1, a_2, …]` (disk) or `[b_0, b_1, …]` (exterior), each `[re, im]`.
    Coefficients { class: CoefficientClass, values: Vec<[f64; 2]> },
    /// A file holding a `coefficients` object.
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientClass {
    Disk,
    Exterior,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientFile {
    class: CoefficientClass,
    values: Vec<[f64; 2]>,
}

impl MapSource {
    /// The map with enough coefficients for a Grunsky truncation `n`.
    fn taylor(&self, n: usize) -> CliResult<TaylorMap> {
        let from_values = |class: CoefficientClass, values: &[[f64; 2]]| -> CliResult<TaylorMap> {
            let v: Vec<Complex64> = values.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
            match class {
                CoefficientClass::Disk => TaylorMap::disk(v),
                CoefficientClass::Exterior => TaylorMap::sigma(v),
            }
            .map_err(|e| CliError::Schema(e.to_string()))
        };
        match self {
            MapSource::Identity => Ok(TaylorMap::identity(2 * n + 1)),
            MapSource::Catalog(m) => {
                let deg = match m {
                    ModelMap::ExteriorDiagT { .. } | ModelMap::RadialStretch { .. } => 2 * n,
                    _ => 2 * n + 1,
                };
                Ok(m.taylor(deg)?)
            }
            MapSource::Coefficients { class, values } => from_values(*class, values),
            MapSource::File(path) => {
                let f: CoefficientFile = read_json(path)?;
                from_values(f.class, &f.values)
            }
        }
    }

    fn known_k(&self) -> Option<f64> {
        match self {
            MapSource::Identity => Some(0.0),
            MapSource::Catalog(m) => m.known_k(),
            _ => None,
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

fn positive(name: &str, v: usize) -> CliResult<()> {
    if v == 0 {
        return schema(format!("{name} must be positive"));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GrunskyConfig {
    map: MapSource,
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RootnormConfig {
    map: MapSource,
    n: usize,
    p_max: usize,
    #[serde(default)]
    k_reference: Option<f64>,
}

/// Beltrami coefficient for `solve`.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum SolveMu {
    /// Constant `value` on `|z| < radius`.
    DiskConstant { value: [f64; 2], radius: f64 },
    /// The explicit extension of a catalog map.
    Catalog(ModelMap),
    /// A grid written by an earlier run.
    Grid(PathBuf),
}

fn default_supersample() -> usize {
    4
}

fn default_normalization() -> Normalization {
    Normalization::Hydrodynamic
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveConfig {
    mu: SolveMu,
    extent: f64,
    resolution: usize,
    #[serde(default = "default_supersample")]
    supersample: usize,
    #[serde(default = "default_normalization")]
    normalization: Normalization,
    /// Circle for the Laurent expansion, outside the support.
    radius: f64,
    coefficients: usize,
}

/// Beltrami coefficient on `|z| > 1` for `alpha`.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum AlphaMu {
    /// `k|ψ₀|/ψ₀` with `ψ₀ ∝ z⁻⁴`.
    Teichmuller { k: f64 },
    /// `k z̄/z` on `1 < |z| < outer`.
    Annulus { k: f64, outer: f64 },
    /// The explicit extension of a catalog map, moved onto `|z| > 1`.
    Catalog(ModelMap),
}

impl AlphaMu {
    fn field(&self) -> CliResult<(PointField, f64)> {
        match *self {
            AlphaMu::Teichmuller { k } => Ok((
                PointField::new(move |z: Complex64| z.powi(4) / z.norm_sqr().powi(2) * k),
                k.abs(),
            )),
            AlphaMu::Annulus { k, outer } => Ok((
                PointField::new(move |z: Complex64| {
                    let r = z.norm();
                    if r > 1.0 && r < outer {
                        z.conj() / z * k
                    } else {
                        Complex64::default()
                    }
                }),
                k.abs(),
            )),
            AlphaMu::Catalog(m) => {
                let Some(mu) = m.extension_mu() else {
                    return schema(format!("{} has no explicit extension", m.name()));
                };
                let k = m.known_k();
                let mu = match m.taylor(1)?.class() {
                    MapClass::ExteriorSigma => invert_beltrami(&mu),
                    MapClass::DiskS => mu,
                };
                let outside = PointField::new(move |z: Complex64| {
                    if z.norm() > 1.0 {
                        mu.eval(z)
                    } else {
                        Complex64::default()
                    }
                });
                Ok((outside, k.unwrap_or(f64::NAN)))
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaRunConfig {
    mu: AlphaMu,
    #[serde(default)]
    search: Option<AlphaSearch>,
    #[serde(default)]
    rho_grid: Vec<f64>,
    #[serde(default)]
    p_grid: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaSearch {
    coords: usize,
    starts: usize,
    radial: usize,
    angular: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReflectConfig {
    kappa_hat: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonConfig {
    polygon: PolygonSpec,
    #[serde(default)]
    check: Option<HarmonicCheckConfig>,
    /// Points in the lower half-plane where the Schwarzian is tabulated.
    #[serde(default)]
    samples: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum LscanSource {
    Point(GrunskyPoint),
    Map { map: MapSource, n: usize },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LscanConfig {
    source: LscanSource,
    steps: usize,
}

/// Files written by one run and the line printed for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub json: PathBuf,
    pub csv: PathBuf,
}

fn write_outputs(out: &Path, stem: &str, seed: u64, mut body: Value, csv: String) -> CliResult<(PathBuf, PathBuf)> {
    fs::create_dir_all(out).map_err(|e| CliError::Numerical(e.into()))?;
    if let Value::Object(map) = &mut body {
        map.insert("seed".into(), json!(seed));
    }
    let json_path = out.join(format!("{stem}.json"));
    let csv_path = out.join(format!("{stem}.csv"));
    let text = serde_json::to_string_pretty(&body).map_err(|e| CliError::Numerical(e.into()))?;
    fs::write(&json_path, text + "\n").map_err(|e| CliError::Numerical(e.into()))?;
    fs::write(&csv_path, csv).map_err(|e| CliError::Numerical(e.into()))?;
    Ok((json_path, csv_path))
}

/// Run one subcommand with the given config path, output directory and seed.
pub fn run(command: Command, config: &Path, out: &Path, seed: u64) -> CliResult<Outcome> {
    let stem = command.name();
    let (summary, body, csv) = match command {
        Command::Grunsky => run_grunsky(read_json(config)?)?,
        Command::Rootnorm => run_rootnorm(read_json(config)?)?,
        Command::Solve => {
            let cfg: SolveConfig = read_json(config)?;
            run_solve(cfg, out)?
        }
        Command::Alpha => run_alpha(read_json(config)?, seed)?,
        Command::Reflect => run_reflect(read_json(config)?)?,
        Command::Polygon => run_polygon(read_json(config)?)?,
        Command::Lscan => run_lscan(read_json(config)?)?,
    };
    let (json, csv) = write_outputs(out, stem, seed, body, csv)?;
    Ok(Outcome { summary, json, csv })
}

/// Parse arguments, configure the thread pool, run, and return the exit code.
pub fn main_with(cli: Cli) -> i32 {
    let Some(config) = cli.config.clone() else {
        eprintln!("config error: --config is required");
        return EXIT_SCHEMA;
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("config error: --threads must be positive");
            return EXIT_SCHEMA;
        }
        // a pool that is already set keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(cli.command, &config, &cli.out, cli.seed) {
        Ok(o) => {
            println!("{}", o.summary);
            println!("wrote {} and {}", o.json.display(), o.csv.display());
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

type Produced = (String, Value, String);

fn run_grunsky(cfg: GrunskyConfig) -> CliResult<Produced> {
    positive("n", cfg.n)?;
    let f = cfg.map.taylor(cfg.n)?;
    let g = grunsky_matrix(&f, cfg.n)?;
    let kappa = grunsky_norm(&g)?;
    let mut csv = String::from("m,n,re,im\n");
    for m in 1..=cfg.n {
        for n in 1..=cfg.n {
            let v = g.get(m, n);
            csv.push_str(&format!("{m},{n},{:.15e},{:.15e}\n", v.re, v.im));
        }
    }
    let body = json!({ "n": cfg.n, "kappa": kappa, "matrix": g });
    Ok((format!("kappa = {kappa:.12} at N = {}", cfg.n), body, csv))
}

fn run_rootnorm(cfg: RootnormConfig) -> CliResult<Produced> {
    positive("n", cfg.n)?;
    if cfg.p_max < 2 || !cfg.p_max.is_multiple_of(2) {
        return schema("p_max must be even and at least 2");
    }
    let f = cfg.map.taylor(cfg.n)?;
    let mut report = limit_grunsky_estimate(&f, cfg.p_max, cfg.n)?;
    report.k_reference = cfg.k_reference.or_else(|| cfg.map.known_k());
    let summary = format!(
        "kappa_hat = {:.12} (N = {}, p ≤ {})",
        report.kappa_hat, cfg.n, cfg.p_max
    );
    let csv = report.to_csv();
    Ok((summary, serde_json::to_value(&report).map_err(|e| CliError::Numerical(e.into()))?, csv))
}

fn run_solve(cfg: SolveConfig, out: &Path) -> CliResult<Produced> {
    positive("resolution", cfg.resolution)?;
    positive("supersample", cfg.supersample)?;
    positive("coefficients", cfg.coefficients)?;
    if !(cfg.extent > 0.0) || !(cfg.radius > 0.0) {
        return schema("extent and radius must be positive");
    }
    let mu = match &cfg.mu {
        SolveMu::DiskConstant { value, radius } => {
            let (v, r) = (Complex64::new(value[0], value[1]), *radius);
            BeltramiGrid::from_fn(cfg.extent, cfg.resolution, cfg.supersample, move |z| {
                if z.norm() < r {
                    v
                } else {
                    Complex64::default()
                }
            })?
        }
        SolveMu::Catalog(m) => {
            let Some(field) = m.extension_mu() else {
                return schema(format!("{} has no explicit extension", m.name()));
            };
            BeltramiGrid::from_field(cfg.extent, cfg.resolution, cfg.supersample, &field)?
        }
        SolveMu::Grid(stem) => {
            let (g, _) = read_grid(stem)?;
            BeltramiGrid::new(g)?
        }
    };
    let w = solve_beltrami(&mu, cfg.normalization)?;
    let laurent = conformal_coeffs(&w, &mu, cfg.radius, cfg.coefficients)?;
    let residual = beltrami_residual(&w, &mu, 2)?;
    fs::create_dir_all(out).map_err(|e| CliError::Numerical(e.into()))?;
    write_grid(&out.join("solve_map"), w.grid(), Some(cfg.normalization))?;
    let n = cfg.coefficients as i64;
    let mut csv = String::from("k,re,im\n");
    let mut coeffs = Vec::new();
    for k in -n..=n {
        let c = laurent.get(k);
        csv.push_str(&format!("{k},{:.15e},{:.15e}\n", c.re, c.im));
        coeffs.push(json!({ "k": k, "re": c.re, "im": c.im }));
    }
    let b1 = laurent.get(-1);
    let body = json!({
        "iterations": w.residual_history.len(),
        "residual_history": w.residual_history,
        "beltrami_residual": residual,
        "laurent_residual": laurent.residual,
        "radius": cfg.radius,
        "b1": [b1.re, b1.im],
        "coefficients": coeffs,
        "map_grid": "solve_map",
    });
    Ok((
        format!("b1 = {:.6}{:+.6}i after {} iterations", b1.re, b1.im, w.residual_history.len()),
        body,
        csv,
    ))
}

fn run_alpha(cfg: AlphaRunConfig, seed: u64) -> CliResult<Produced> {
    let mut acfg = AlphaConfig {
        seed,
        ..AlphaConfig::default()
    };
    if let Some(s) = cfg.search {
        for (name, v) in [("coords", s.coords), ("starts", s.starts), ("radial", s.radial), ("angular", s.angular)] {
            positive(name, v)?;
        }
        acfg.coords = s.coords;
        acfg.starts = s.starts;
        acfg.radial = s.radial;
        acfg.angular = s.angular;
    }
    if cfg.rho_grid.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return schema("rho_grid entries must lie in (0, 1]");
    }
    if cfg.p_grid.contains(&0) {
        return schema("p_grid entries must be positive");
    }
    let (mu, k) = cfg.mu.field()?;
    let report = alpha_functional(&mu, &acfg)?;
    let bound = if k.is_finite() && k < 1.0 {
        Some(grunsky_bound_check(k, report.alpha.min(k))?)
    } else {
        None
    };
    let mut csv = String::from("rho,p,value\n");
    let outer = if !cfg.rho_grid.is_empty() && !cfg.p_grid.is_empty() {
        let o = outer_limit_estimate(&mu, &cfg.rho_grid, &cfg.p_grid, &acfg)?;
        for e in &o.entries {
            csv.push_str(&format!("{},{},{:.15e}\n", e.rho, e.p, e.value));
        }
        Some(o)
    } else {
        csv.push_str(&format!("1,1,{:.15e}\n", report.alpha));
        None
    };
    let summary = match bound {
        Some(b) => format!("alpha = {:.9}, bound = {b:.9}", report.alpha),
        None => format!("alpha = {:.9}", report.alpha),
    };
    let body = json!({ "alpha": report, "k": if k.is_finite() { Some(k) } else { None }, "bound": bound, "outer": outer });
    Ok((summary, body, csv))
}

fn run_reflect(cfg: ReflectConfig) -> CliResult<Produced> {
    if !(0.0..1.0).contains(&cfg.kappa_hat) {
        return schema("kappa_hat must lie in [0, 1)");
    }
    let (q, big_q) = reflection_coefficient(cfg.kappa_hat)?;
    let green = green_function(cfg.kappa_hat)?;
    let dist = teich_distance(cfg.kappa_hat)?;
    let csv = format!(
        "kappa_hat,q_l,dilatation,green,distance\n{:.15e},{q:.15e},{big_q:.15e},{green:.15e},{dist:.15e}\n",
        cfg.kappa_hat
    );
    let body = json!({
        "kappa_hat": cfg.kappa_hat,
        "q_l": q,
        "dilatation": big_q,
        "green": if green.is_finite() { Some(green) } else { None },
        "distance": dist,
    });
    Ok((format!("q_L = {q:.12}, Q_L = {big_q:.12}"), body, csv))
}

fn run_polygon(cfg: PolygonConfig) -> CliResult<Produced> {
    let r0 = r0_root(&cfg.polygon)?;
    let mut csv = String::from("re,im,s_re,s_im\n");
    let mut samples = Vec::new();
    for [x, y] in &cfg.samples {
        if *y >= 0.0 {
            return schema("samples must lie in the lower half-plane");
        }
        let z = Complex64::new(*x, *y);
        let s = polygon_schwarzian_at(&cfg.polygon, z)?;
        csv.push_str(&format!("{x},{y},{:.15e},{:.15e}\n", s.re, s.im));
        samples.push(json!({ "z": [x, y], "s": [s.re, s.im] }));
    }
    let check = harmonic_check(&cfg.polygon, &cfg.check.unwrap_or_default())?;
    let summary = format!(
        "r0 = {r0:.12}; kappa = {:.6} against (r/2)|S| = {:.6}",
        check.kappa, check.target
    );
    let body = json!({ "r0": r0, "samples": samples, "check": check });
    Ok((summary, body, csv))
}

fn run_lscan(cfg: LscanConfig) -> CliResult<Produced> {
    if cfg.steps < 2 {
        return schema("steps must be at least 2");
    }
    let point = match cfg.source {
        LscanSource::Point(p) => p,
        LscanSource::Map { map, n } => {
            positive("n", n)?;
            GrunskyPoint::from_map(&map.taylor(n)?, n)?
        }
    };
    let scan = segment_scan(&point, cfg.steps)?;
    let end = membership_probe(&point);
    let summary = format!(
        "kappa(c) = {:.9}, lnorm(c) = {:.9}, inside = {} at N = {}",
        end.kappa,
        lnorm(&point),
        end.inside,
        end.n
    );
    let csv = scan.to_csv();
    Ok((summary, serde_json::to_value(&scan).map_err(|e| CliError::Numerical(e.into()))?, csv))
}
