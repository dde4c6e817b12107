//! Grid solver for `∂̄w = μ ∂w` built on the Cauchy transform `T` and the
//! Beurling transform `Π`, both applied as zero-padded FFT convolutions.
//!
//! Grids are `M×M` cells covering `[-R, R]²`, stored row-major with rows
//! along `y`. A sample is attached to the cell center
//! `(-R + (i + 1/2)h, -R + (j + 1/2)h)`, `h = 2R/M`, and stands for the cell average.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TaylorMap;
use crate::transforms::PointField;

/// Cells closer than this many widths use exact kernel integrals.
const NEAR_CELLS: f64 = 6.0;
const NEUMANN_TOL: f64 = 1e-10;
const NEUMANN_MAX_ITER: usize = 200;

/// Complex samples on a square grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    extent: f64,
    resolution: usize,
    data: Vec<Complex64>,
}

impl Grid {
    pub fn new(extent: f64, resolution: usize, data: Vec<Complex64>) -> Result<Self> {
        if !(extent > 0.0) || resolution == 0 {
            return Err(Error::Domain("grid needs positive extent and resolution".into()));
        }
        if data.len() != resolution * resolution {
            return Err(Error::DimensionMismatch {
                expected: resolution * resolution,
                got: data.len(),
            });
        }
        Ok(Grid {
            extent,
            resolution,
            data,
        })
    }

    pub fn zeros(extent: f64, resolution: usize) -> Self {
        Grid {
            extent,
            resolution,
            data: vec![Complex64::default(); resolution * resolution],
        }
    }

    /// Cell averages of `f` from `s×s` midpoint subsamples per cell.
    pub fn from_fn<F>(extent: f64, resolution: usize, supersample: usize, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        let s = supersample.max(1);
        let mut g = Grid::zeros(extent, resolution);
        let h = g.h();
        let sub = h / s as f64;
        g.data
            .par_chunks_mut(resolution)
            .enumerate()
            .for_each(|(row, out)| {
                let y0 = -extent + row as f64 * h;
                for (col, v) in out.iter_mut().enumerate() {
                    let x0 = -extent + col as f64 * h;
                    let mut acc = Complex64::default();
                    for a in 0..s {
                        for b in 0..s {
                            acc += f(Complex64::new(
                                x0 + (a as f64 + 0.5) * sub,
                                y0 + (b as f64 + 0.5) * sub,
                            ));
                        }
                    }
                    *v = acc / (s * s) as f64;
                }
            });
        g
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn h(&self) -> f64 {
        2.0 * self.extent / self.resolution as f64
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn center(&self, col: usize, row: usize) -> Complex64 {
        let h = self.h();
        Complex64::new(
            -self.extent + (col as f64 + 0.5) * h,
            -self.extent + (row as f64 + 0.5) * h,
        )
    }

    pub fn get(&self, col: usize, row: usize) -> Complex64 {
        self.data[row * self.resolution + col]
    }

    /// `(center, value)` for every cell.
    pub fn nodes(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let m = self.resolution;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.center(k % m, k / m), v))
    }

    /// `(∬|g|²)^{1/2}` for the piecewise constant field.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt() * self.h()
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn same_geometry(&self, other: &Grid) -> Result<()> {
        if self.resolution != other.resolution || self.extent != other.extent {
            return Err(Error::DimensionMismatch {
                expected: self.resolution,
                got: other.resolution,
            });
        }
        Ok(())
    }
}

/// A Beltrami coefficient sampled on a grid, `‖μ‖_∞ < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BeltramiGrid(Grid);

impl BeltramiGrid {
    pub fn new(grid: Grid) -> Result<Self> {
        let k = grid.sup_norm();
        if !(k < 1.0) {
            return Err(Error::NotQuasiconformal(k));
        }
        Ok(BeltramiGrid(grid))
    }

    pub fn from_fn<F>(extent: f64, resolution: usize, supersample: usize, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        BeltramiGrid::new(Grid::from_fn(extent, resolution, supersample, f))
    }

    pub fn from_field(extent: f64, resolution: usize, supersample: usize, mu: &PointField) -> Result<Self> {
        BeltramiGrid::from_fn(extent, resolution, supersample, |z| mu.eval(z))
    }

    pub fn zeros(extent: f64, resolution: usize) -> Self {
        BeltramiGrid(Grid::zeros(extent, resolution))
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    /// Piecewise constant field on the plane, zero outside the grid.
    pub fn to_field(&self) -> PointField {
        let g = self.0.clone();
        PointField::new(move |z| {
            let h = g.h();
            let col = ((z.re + g.extent) / h).floor();
            let row = ((z.im + g.extent) / h).floor();
            let m = g.resolution as f64;
            if col < 0.0 || row < 0.0 || col >= m || row >= m {
                Complex64::default()
            } else {
                g.get(col as usize, row as usize)
            }
        })
    }

    /// Smallest and largest `|z|` reached by cells where `μ ≠ 0`.
    pub fn support_radii(&self) -> Option<(f64, f64)> {
        let pad = self.0.h() * std::f64::consts::FRAC_1_SQRT_2;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (z, v) in self.0.nodes() {
            if v.norm() > 0.0 {
                lo = lo.min((z.norm() - pad).max(0.0));
                hi = hi.max(z.norm() + pad);
            }
        }
        if hi == 0.0 {
            None
        } else {
            Some((lo, hi))
        }
    }
}

/// `k(f^μ) = ‖μ‖_∞` over the samples.
pub fn dilatation(mu: &BeltramiGrid) -> f64 {
    mu.0.sup_norm()
}

fn corner_sum(h: impl Fn(Complex64) -> Complex64, x0: f64, x1: f64, y0: f64, y1: f64) -> Complex64 {
    h(Complex64::new(x1, y1)) - h(Complex64::new(x0, y1)) - h(Complex64::new(x1, y0))
        + h(Complex64::new(x0, y0))
}

/// `∬_Q du/u` over `[x0,x1]×[y0,y1]`, from `∂x∂y H = g` with `H = -i(u log u - u)`.
fn cell_inv(x0: f64, x1: f64, y0: f64, y1: f64) -> Complex64 {
    if y0 < 0.0 && y1 > 0.0 && x0 < 0.0 {
        if x1 <= 0.0 {
            // odd integrand; the mirrored cell avoids the branch cut
            return -cell_inv(-x1, -x0, -y1, -y0);
        }
        return cell_inv(x0, 0.0, y0, y1) + cell_inv(0.0, x1, y0, y1);
    }
    // a lower cell ending on the negative axis takes arg -π there
    let y1 = if y1 == 0.0 { -0.0 } else { y1 };
    corner_sum(
        |u| {
            if u.norm() == 0.0 {
                Complex64::default()
            } else {
                -Complex64::i() * (u * u.ln() - u)
            }
        },
        x0,
        x1,
        y0,
        y1,
    )
}

/// `∬_Q du/u²` for a cell away from the origin, with `H = i log u`.
fn cell_inv2(x0: f64, x1: f64, y0: f64, y1: f64) -> Complex64 {
    if y0 < 0.0 && y1 > 0.0 && x0 < 0.0 {
        // even integrand
        return cell_inv2(-x1, -x0, -y1, -y0);
    }
    corner_sum(|u| Complex64::i() * u.ln(), x0, x1, y0, y1)
}

/// Kernel weight `(1/π)∬_{cell at e} du/u` for `T`.
fn weight_t(e: Complex64, h: f64) -> Complex64 {
    if e.norm() > NEAR_CELLS * h {
        return e.inv() * (h * h / PI);
    }
    let hh = 0.5 * h;
    cell_inv(e.re - hh, e.re + hh, e.im - hh, e.im + hh) / PI
}

/// Kernel weight `-(1/π)∬_{cell at e} du/u²` for `Π`; the centered cell is a principal value, zero.
fn weight_pi(e: Complex64, h: f64) -> Complex64 {
    if e.norm() < 0.5 * h {
        return Complex64::default();
    }
    if e.norm() > NEAR_CELLS * h {
        return -(e * e).inv() * (h * h / PI);
    }
    let hh = 0.5 * h;
    -cell_inv2(e.re - hh, e.re + hh, e.im - hh, e.im + hh) / PI
}

struct Fft2 {
    p: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(p: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            p,
            forward: planner.plan_fft_forward(p),
            inverse: planner.plan_fft_inverse(p),
        }
    }

    fn rows(&self, data: &mut [Complex64], inverse: bool) {
        let fft = if inverse { &self.inverse } else { &self.forward };
        let scratch_len = fft.get_inplace_scratch_len();
        data.par_chunks_mut(self.p).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    }

    fn transpose(&self, data: &[Complex64], out: &mut [Complex64]) {
        let p = self.p;
        out.par_chunks_mut(p).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                *v = data[i * p + j];
            }
        });
    }

    /// Unnormalized 2-D transform in place.
    fn apply(&self, data: &mut Vec<Complex64>, inverse: bool) {
        let mut buf = vec![Complex64::default(); data.len()];
        self.rows(data, inverse);
        self.transpose(data, &mut buf);
        self.rows(&mut buf, inverse);
        self.transpose(&buf, data);
    }
}

/// Precomputed kernel spectra for `T` and `Π` on one grid geometry.
pub struct ConvolutionPlan {
    extent: f64,
    resolution: usize,
    fft: Fft2,
    t_hat: Vec<Complex64>,
    pi_hat: Vec<Complex64>,
}

impl ConvolutionPlan {
    pub fn new(extent: f64, resolution: usize) -> Self {
        let m = resolution;
        let p = 2 * m;
        let h = 2.0 * extent / m as f64;
        let fft = Fft2::new(p);
        let offset = |k: usize| if k < m { k as f64 } else { k as f64 - p as f64 };
        let build = |w: &(dyn Fn(Complex64, f64) -> Complex64 + Sync)| {
            let mut k = vec![Complex64::default(); p * p];
            k.par_chunks_mut(p).enumerate().for_each(|(row, out)| {
                if row == m {
                    return;
                }
                let b = offset(row);
                for (col, v) in out.iter_mut().enumerate() {
                    if col != m {
                        *v = w(Complex64::new(offset(col) * h, b * h), h);
                    }
                }
            });
            k
        };
        let mut t_hat = build(&weight_t);
        let mut pi_hat = build(&weight_pi);
        fft.apply(&mut t_hat, false);
        fft.apply(&mut pi_hat, false);
        ConvolutionPlan {
            extent,
            resolution,
            fft,
            t_hat,
            pi_hat,
        }
    }

    pub fn for_grid(g: &Grid) -> Self {
        ConvolutionPlan::new(g.extent, g.resolution)
    }

    fn convolve(&self, rho: &[Complex64], kernel_hat: &[Complex64]) -> Vec<Complex64> {
        let m = self.resolution;
        let p = 2 * m;
        let mut buf = vec![Complex64::default(); p * p];
        for row in 0..m {
            buf[row * p..row * p + m].copy_from_slice(&rho[row * m..(row + 1) * m]);
        }
        self.fft.apply(&mut buf, false);
        buf.par_iter_mut().zip(kernel_hat.par_iter()).for_each(|(a, &k)| *a *= k);
        self.fft.apply(&mut buf, true);
        let scale = 1.0 / (p * p) as f64;
        let mut out = vec![Complex64::default(); m * m];
        for row in 0..m {
            for col in 0..m {
                out[row * m + col] = buf[row * p + col] * scale;
            }
        }
        out
    }

    fn check(&self, g: &Grid) -> Result<()> {
        if g.resolution != self.resolution || g.extent != self.extent {
            return Err(Error::DimensionMismatch {
                expected: self.resolution,
                got: g.resolution,
            });
        }
        Ok(())
    }

    pub fn cauchy(&self, rho: &Grid) -> Result<Grid> {
        self.check(rho)?;
        Grid::new(self.extent, self.resolution, self.convolve(&rho.data, &self.t_hat))
    }

    pub fn beurling(&self, rho: &Grid) -> Result<Grid> {
        self.check(rho)?;
        Grid::new(self.extent, self.resolution, self.convolve(&rho.data, &self.pi_hat))
    }
}

/// `Tρ(z) = -(1/π)∬ ρ(ζ)/(ζ - z)` at the cell centers.
pub fn cauchy_transform(rho: &Grid) -> Result<Grid> {
    ConvolutionPlan::for_grid(rho).cauchy(rho)
}

/// `Πρ = ∂_z Tρ` (principal value) at the cell centers.
pub fn beurling_transform(rho: &Grid) -> Result<Grid> {
    ConvolutionPlan::for_grid(rho).beurling(rho)
}

/// `Tρ(z)` at an arbitrary point by direct summation over the nonzero cells.
pub fn cauchy_at(rho: &Grid, z: Complex64) -> Complex64 {
    let h = rho.h();
    rho.nodes()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(c, v)| v * weight_t(z - c, h))
        .sum()
}

/// How the solution is pinned down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `w = z + O(1/z)` at infinity.
    Hydrodynamic,
    /// `w = z + O(1)` at infinity and `w(0) = 0`.
    ZeroFixed,
}

/// Solution samples `w` at the cell centers, together with the density `ρ`
/// with `w = z + Tρ - shift` so the map can be evaluated anywhere.
#[derive(Clone, Debug)]
pub struct MappedGrid {
    w: Grid,
    rho: Grid,
    shift: Complex64,
    normalization: Normalization,
    /// `‖ρ_{k+1} - ρ_k‖_{L²}` per Neumann step.
    pub residual_history: Vec<f64>,
}

impl MappedGrid {
    pub fn grid(&self) -> &Grid {
        &self.w
    }

    pub fn density(&self) -> &Grid {
        &self.rho
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        z + cauchy_at(&self.rho, z) - self.shift
    }

    /// Smallest distance between images of distinct sample nodes on a coarse
    /// sub-lattice (every `stride`-th node), as an injectivity spot check.
    pub fn min_image_separation(&self, stride: usize) -> f64 {
        let m = self.w.resolution;
        let pts: Vec<Complex64> = (0..m)
            .step_by(stride.max(1))
            .flat_map(|r| (0..m).step_by(stride.max(1)).map(move |c| (c, r)))
            .map(|(c, r)| self.w.get(c, r))
            .collect();
        pts.par_iter()
            .enumerate()
            .map(|(i, a)| {
                pts[i + 1..]
                    .iter()
                    .map(|b| (a - b).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min)
    }
}

/// Solve `∂̄w = μ∂w` by the Neumann series `ρ = μ + μΠμ + …`, `w = z + Tρ`.
pub fn solve_beltrami(mu: &BeltramiGrid, normalization: Normalization) -> Result<MappedGrid> {
    let g = &mu.0;
    let k = g.sup_norm();
    if !(k < 1.0) {
        return Err(Error::NotQuasiconformal(k));
    }
    if let Some((_, hi)) = mu.support_radii() {
        if hi > g.extent / 2.0 + g.h() {
            return Err(Error::Domain(format!(
                "support reaches |z| = {hi:.3}, beyond half the grid extent {}",
                g.extent / 2.0
            )));
        }
    }
    let plan = ConvolutionPlan::for_grid(g);
    let mut rho = g.clone();
    let mut history = Vec::new();
    let mut converged = rho.l2_norm() == 0.0;
    for _ in 0..NEUMANN_MAX_ITER {
        if converged {
            break;
        }
        let pr = plan.beurling(&rho)?;
        let next: Vec<Complex64> = g
            .data
            .par_iter()
            .zip(pr.data.par_iter())
            .map(|(&m, &p)| m * (p + 1.0))
            .collect();
        let diff = next
            .iter()
            .zip(&rho.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            * g.h();
        rho.data = next;
        history.push(diff);
        if !diff.is_finite() {
            break;
        }
        converged = diff < NEUMANN_TOL;
    }
    if !converged {
        return Err(Error::Convergence {
            residual: history.last().copied().unwrap_or(f64::NAN),
            iterations: history.len(),
        });
    }
    finish_map(g, &plan, rho, normalization, history)
}

fn finish_map(
    g: &Grid,
    plan: &ConvolutionPlan,
    rho: Grid,
    normalization: Normalization,
    history: Vec<f64>,
) -> Result<MappedGrid> {
    let t = plan.cauchy(&rho)?;
    let shift = match normalization {
        Normalization::Hydrodynamic => Complex64::default(),
        Normalization::ZeroFixed => cauchy_at(&rho, Complex64::default()),
    };
    let m = g.resolution;
    let data = (0..m * m)
        .map(|k| g.center(k % m, k / m) + t.data[k] - shift)
        .collect();
    Ok(MappedGrid {
        w: Grid::new(g.extent, m, data)?,
        rho,
        shift,
        normalization,
        residual_history: history,
    })
}

/// First-order term `z + Tμ(z) - Tμ(0)`, the solution with the remainder dropped.
pub fn first_variation(mu: &BeltramiGrid) -> Result<MappedGrid> {
    let plan = ConvolutionPlan::for_grid(&mu.0);
    finish_map(&mu.0, &plan, mu.0.clone(), Normalization::ZeroFixed, Vec::new())
}

/// Laurent coefficients `c_k`, `-n ≤ k ≤ n`, of a map sampled on a circle.
#[derive(Clone, Debug, PartialEq)]
pub struct Laurent {
    pub n: usize,
    pub center: Complex64,
    pub radius: f64,
    coeffs: Vec<Complex64>,
    /// Largest reconstruction error at the midpoints between samples, relative to `max|w|`.
    pub residual: f64,
}

impl Laurent {
    /// `c_k`, zero outside `-n..=n`.
    pub fn get(&self, k: i64) -> Complex64 {
        let n = self.n as i64;
        if k.abs() > n {
            Complex64::default()
        } else {
            self.coeffs[(k + n) as usize]
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let u = z - self.center;
        let n = self.n as i64;
        (-n..=n).map(|k| self.get(k) * u.powi(k as i32)).sum()
    }

    /// Exterior map `(w - ·)/c_1 = z + b_0 + b_1/z + …` with `b_k = c_{-k}/c_1`.
    pub fn to_sigma(&self, truncation: usize) -> Result<TaylorMap> {
        let c1 = self.get(1);
        if c1.norm() == 0.0 {
            return Err(Error::Normalization("vanishing linear coefficient".into()));
        }
        TaylorMap::sigma((0..=truncation).map(|k| self.get(-(k as i64)) / c1).collect())
    }

    /// Disk map `(w - c_0)/c_1 = z + a_2 z² + …`.
    pub fn to_disk(&self, truncation: usize) -> Result<TaylorMap> {
        let c1 = self.get(1);
        if c1.norm() == 0.0 {
            return Err(Error::Normalization("vanishing linear coefficient".into()));
        }
        TaylorMap::disk((1..=truncation).map(|k| self.get(k as i64) / c1).collect())
    }
}

/// Coefficients of `w` on `|z - center| = radius` by a DFT of `4n` samples.
pub fn laurent_coefficients<F>(w: F, center: Complex64, radius: f64, n: usize) -> Result<Laurent>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let count = 4 * n.max(1);
    let at = |j: f64| center + Complex64::from_polar(radius, 2.0 * PI * j / count as f64);
    let samples: Vec<Complex64> = (0..count)
        .into_par_iter()
        .map(|j| w(at(j as f64)))
        .collect::<Result<_>>()?;
    let n_i = n as i64;
    let coeffs: Vec<Complex64> = (-n_i..=n_i)
        .map(|k| {
            let s: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * j as i64) as f64 / count as f64))
                .sum();
            s / (count as f64 * radius.powi(k as i32))
        })
        .collect();
    let mut out = Laurent {
        n,
        center,
        radius,
        coeffs,
        residual: 0.0,
    };
    let scale = samples.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let check: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|j| {
            let z = at(j as f64 + 0.5);
            w(z).map(|v| (v - out.eval(z)).norm())
        })
        .collect::<Result<_>>()?;
    out.residual = check.into_iter().fold(0.0, f64::max) / scale;
    Ok(out)
}

/// Coefficients of a solver map on a circle around the origin that avoids the support of `μ`.
pub fn conformal_coeffs(w: &MappedGrid, mu: &BeltramiGrid, radius: f64, n: usize) -> Result<Laurent> {
    if let Some((lo, hi)) = mu.support_radii() {
        if radius >= lo && radius <= hi {
            return Err(Error::NotConformalThere(radius));
        }
    }
    laurent_coefficients(|z| Ok(w.eval(z)), Complex64::default(), radius, n)
}

/// `‖∂̄w - μ∂w‖ / ‖μ∂w‖` in `L²` over cells whose `margin`-neighbourhood lies
/// inside the support, with derivatives by centered differences.
pub fn beltrami_residual(w: &MappedGrid, mu: &BeltramiGrid, margin: usize) -> Result<f64> {
    let g = &mu.0;
    g.same_geometry(&w.w)?;
    let m = g.resolution;
    let h = g.h();
    let reach = margin.max(1) as isize;
    let inside = |c: usize, r: usize| -> bool {
        let base = g.get(c, r);
        if base.norm() == 0.0 {
            return false;
        }
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                let (cc, rr) = (c as isize + dc, r as isize + dr);
                if cc < 0 || rr < 0 || cc >= m as isize || rr >= m as isize {
                    return false;
                }
                let v = g.get(cc as usize, rr as usize);
                if v.norm() == 0.0 || (v - base).norm() > 0.25 * base.norm().max(1e-3) * reach as f64 {
                    return false;
                }
            }
        }
        true
    };
    let (num, den) = (1..m - 1)
        .into_par_iter()
        .map(|r| {
            let mut num = 0.0;
            let mut den = 0.0;
            for c in 1..m - 1 {
                if !inside(c, r) {
                    continue;
                }
                let wx = (w.w.get(c + 1, r) - w.w.get(c - 1, r)) / (2.0 * h);
                let wy = (w.w.get(c, r + 1) - w.w.get(c, r - 1)) / (2.0 * h);
                let dz = (wx - Complex64::i() * wy) * 0.5;
                let dzb = (wx + Complex64::i() * wy) * 0.5;
                let mdz = g.get(c, r) * dz;
                num += (dzb - mdz).norm_sqr();
                den += mdz.norm_sqr();
            }
            (num, den)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((num / den).sqrt())
}

#[derive(Serialize, Deserialize)]
struct GridHeader {
    extent: f64,
    resolution: usize,
    normalization: Option<Normalization>,
}

fn sidecar_paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

/// Write `<stem>.json` and `<stem>.bin` (little-endian `f64`, interleaved re/im, row-major).
pub fn write_grid(stem: &Path, grid: &Grid, normalization: Option<Normalization>) -> Result<()> {
    let (json, bin) = sidecar_paths(stem);
    let header = GridHeader {
        extent: grid.extent,
        resolution: grid.resolution,
        normalization,
    };
    fs::write(json, serde_json::to_string_pretty(&header)?)?;
    let mut bytes = Vec::with_capacity(grid.data.len() * 16);
    for c in &grid.data {
        bytes.extend_from_slice(&c.re.to_le_bytes());
        bytes.extend_from_slice(&c.im.to_le_bytes());
    }
    fs::write(bin, bytes)?;
    Ok(())
}

/// Inverse of [`write_grid`].
pub fn read_grid(stem: &Path) -> Result<(Grid, Option<Normalization>)> {
    let (json, bin) = sidecar_paths(stem);
    let header: GridHeader = serde_json::from_str(&fs::read_to_string(json)?)?;
    let bytes = fs::read(bin)?;
    let expected = 16 * header.resolution * header.resolution;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "grid payload has {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(16)
        .map(|b| {
            let re = f64::from_le_bytes(b[..8].try_into().unwrap());
            let im = f64::from_le_bytes(b[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok((Grid::new(header.extent, header.resolution, data)?, header.normalization))
}
