//! Analytic inversion routes.
//!
//! For a constant radius `r` and a target supported in the annulus
//! `d < |x| < r`, each angular harmonic of the data is a generalized Abel
//! transform of the matching harmonic of the target:
//!
//! ```text
//! Rf_l(s) = ∫_s^r (ρ - s)^((n-3)/2) K(ρ, s) f_l(ρ) dρ,   |y| = r + s
//! ```
//!
//! In the plane (`n = 2`), with `f = Σ f_l(ρ) e^{ilξ}`, the kernel is
//! `K = 2r/(r+s) · K₂^(-1/2) · T_l(t)` where `t = cos φ` is the angle
//! between a point at radius `ρ` on the circle and the center direction and
//! `1 - t² = (ρ - s) K₂`. In three dimensions it is `K = 2π rρ/(r+s) P_l(t)`.
//!
//! The rotational Compton geometry is related to an equidistant sphere
//! family by the scaling `y ↦ p y`; [`EquidistantMap`] converts between the
//! two parameterizations.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{linspace, GeometryId, Image, ImageSpec, Sinogram};
use crate::Vec2;

/// Samples of a radial function on a uniform grid over `[d, r]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub d: f64,
    pub r: f64,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(d: f64, r: f64, values: Vec<f64>) -> Result<Self> {
        if !(d > 0.0 && r > d) {
            return Err(Error::InvalidInput(format!("radial grid needs 0 < d < r, got d = {d}, r = {r}")));
        }
        if values.len() < 16 {
            return Err(Error::InvalidInput("radial grid needs at least 16 nodes".into()));
        }
        Ok(Self { d, r, values })
    }

    pub fn from_fn(d: f64, r: f64, m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(d, r, linspace(d, r, m).into_iter().map(f).collect())
    }

    pub fn nodes(&self) -> Vec<f64> {
        linspace(self.d, self.r, self.values.len())
    }

    /// Linear interpolation; zero outside `[d, r]`.
    pub fn eval(&self, rho: f64) -> f64 {
        interp(self.d, self.r, &self.values, rho).unwrap_or(0.0)
    }
}

fn interp(lo: f64, hi: f64, values: &[f64], x: f64) -> Option<f64> {
    if !(x >= lo && x <= hi) {
        return None;
    }
    let m = values.len();
    let f = (x - lo) / (hi - lo) * (m - 1) as f64;
    let k = (f.floor() as usize).min(m - 2);
    let w = f - k as f64;
    Some((1.0 - w) * values[k] + w * values[k + 1])
}

/// Kernel of the radial Abel equation for one harmonic degree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbelKernelSpec {
    /// Ambient dimension, 2 or 3.
    pub n: u32,
    pub l: usize,
    pub r: f64,
    pub d: f64,
}

impl AbelKernelSpec {
    pub fn new(n: u32, l: usize, r: f64, d: f64) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::InvalidInput(format!("dimension {n} is not supported")));
        }
        if !(d > 0.0 && r > d) {
            return Err(Error::InvalidInput("kernel needs 0 < d < r".into()));
        }
        Ok(Self { n, l, r, d })
    }

    /// Cosine of the angle between `ξ` and `ω` for the circle point at radius `ρ`.
    pub fn t(&self, rho: f64, s: f64) -> f64 {
        (rho * rho + s * s + 2.0 * s * self.r) / (2.0 * rho * (s + self.r))
    }

    /// Smaller radius at which the circle meets the ray at cosine `t`.
    pub fn rho(&self, t: f64, s: f64) -> f64 {
        let a = self.r + s;
        a * t - (a * a * t * t - (s * s + 2.0 * self.r * s)).sqrt()
    }

    /// `(1 - t²)/(ρ - s)`, smooth and positive on the triangle `d ≤ s ≤ ρ ≤ r`.
    pub fn k2(&self, rho: f64, s: f64) -> f64 {
        let r = self.r;
        (rho + s) * ((2.0 * r + s).powi(2) - rho * rho) / (4.0 * rho * rho * (s + r).powi(2))
    }

    /// The surface-measure factor evaluated from its square-root definition.
    pub fn k1_sqrt_form(&self, rho: f64, s: f64) -> f64 {
        let (r, t) = (self.r, self.t(rho, s));
        let a = r + s;
        rho.powi(self.n as i32 - 2) * ((t * t * a * a - (s * s + 2.0 * r * s)) / (a * a) + 1.0 - t * t).sqrt()
    }

    /// Closed form `r ρ^(n-2) / (r + s)` of the same factor.
    pub fn k1(&self, rho: f64, s: f64) -> f64 {
        self.r * rho.powi(self.n as i32 - 2) / (self.r + s)
    }

    /// Smooth kernel multiplying `(ρ - s)^((n-3)/2)`.
    pub fn kernel(&self, rho: f64, s: f64) -> f64 {
        let t = self.t(rho, s).clamp(-1.0, 1.0);
        match self.n {
            2 => 2.0 * self.k1(rho, s) / self.k2(rho, s).sqrt() * chebyshev(self.l, t),
            _ => TAU * self.k1(rho, s) * legendre(self.l, t),
        }
    }
}

pub fn chebyshev(l: usize, t: f64) -> f64 {
    (l as f64 * t.clamp(-1.0, 1.0).acos()).cos()
}

pub fn legendre(l: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

const SUBPANELS: usize = 8;

// ∫_a^b (ρ - s)^e K(ρ) g(ρ) dρ for e ∈ {0, -1/2}, s ≤ a, by composite
// Simpson; the singular weight is removed by ρ = s + u².
fn cell_integral(singular: bool, s: f64, a: f64, b: f64, integrand: &dyn Fn(f64) -> f64) -> f64 {
    let n = 2 * SUBPANELS;
    let simpson = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
        let h = (hi - lo) / n as f64;
        let mut acc = f(lo) + f(hi);
        for k in 1..n {
            acc += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    if singular {
        let (ua, ub) = ((a - s).max(0.0).sqrt(), (b - s).max(0.0).sqrt());
        2.0 * simpson(ua, ub, &|u| integrand(s + u * u))
    } else {
        simpson(a, b, integrand)
    }
}

/// Integrates `(ρ - s)^((n-3)/2) K(ρ, s) f(ρ)` over `[s, r]` at every node
/// `s` of the profile grid, with `f` linear between nodes.
pub fn forward_abel(spec: &AbelKernelSpec, f: &RadialProfile) -> Result<Vec<f64>> {
    check_grid(spec, f)?;
    Ok(weighted_integrals(
        spec.n == 2,
        &|rho, s| spec.kernel(rho, s),
        &f.nodes(),
        &f.values,
    ))
}

/// Same quadrature as [`forward_abel`] with an arbitrary smooth kernel.
pub fn weighted_integrals(singular: bool, kernel: &(dyn Fn(f64, f64) -> f64 + Sync), nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    (0..m)
        .into_par_iter()
        .map(|i| {
            let s = nodes[i];
            (i..m - 1)
                .map(|j| {
                    let (a, b) = (nodes[j], nodes[j + 1]);
                    let (fa, fb) = (values[j], values[j + 1]);
                    let lin = |rho: f64| fa + (fb - fa) * (rho - a) / (b - a);
                    cell_integral(singular, s, a, b, &|rho| kernel(rho, s) * lin(rho))
                })
                .sum()
        })
        .collect()
}

fn check_grid(spec: &AbelKernelSpec, f: &RadialProfile) -> Result<()> {
    if (spec.r - f.r).abs() > 1e-12 * spec.r || (spec.d - f.d).abs() > 1e-12 * spec.r {
        return Err(Error::InvalidInput("kernel and profile use different [d, r]".into()));
    }
    Ok(())
}

/// Product-integration matrix: row `i` holds the integrals at `s_i` of the
/// weighted kernel against the hat functions of the node grid. The equation
/// at `s = r` is empty, so there are `m - 1` rows and `m` columns.
pub fn abel_matrix(spec: &AbelKernelSpec, m: usize) -> DMatrix<f64> {
    let nodes = linspace(spec.d, spec.r, m);
    let rows: Vec<Vec<f64>> = (0..m - 1)
        .into_par_iter()
        .map(|i| {
            let s = nodes[i];
            let mut row = vec![0.0; m];
            for j in i..m - 1 {
                let (a, b) = (nodes[j], nodes[j + 1]);
                let h = b - a;
                row[j] += cell_integral(spec.n == 2, s, a, b, &|rho| spec.kernel(rho, s) * (b - rho) / h);
                row[j + 1] += cell_integral(spec.n == 2, s, a, b, &|rho| spec.kernel(rho, s) * (rho - a) / h);
            }
            row
        })
        .collect();
    DMatrix::from_fn(m - 1, m, |i, j| rows[i][j])
}

// Extrapolation weights from the nodes r - h, r - 2h, ... to r for a
// polynomial of the given degree.
fn extrapolation_weights(degree: usize) -> Vec<f64> {
    (0..=degree)
        .map(|k| {
            let xk = (k + 1) as f64;
            (0..=degree)
                .filter(|&j| j != k)
                .map(|j| {
                    let xj = (j + 1) as f64;
                    xj / (xj - xk)
                })
                .product()
        })
        .collect()
}

const BOUNDARY_DEGREE: usize = 3;

/// Recovers `f_l` on the node grid from `Rf_l` sampled at the same nodes.
///
/// With `ridge = 0` the triangular system is solved by back substitution
/// from `s = r` inward; otherwise the regularized normal equations are
/// solved by Cholesky.
pub fn solve_abel(spec: &AbelKernelSpec, data: &[f64], ridge: f64) -> Result<RadialProfile> {
    let m = data.len();
    if m < 16 {
        return Err(Error::InvalidInput("radial grid needs at least 16 nodes".into()));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidInput("ridge must be nonnegative".into()));
    }
    let a = abel_matrix(spec, m);
    let scale = (0..m - 1).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    for i in 0..m - 1 {
        if !(a[(i, i)].abs() > 1e-12 * scale) {
            return Err(Error::ZeroDiagonal(i));
        }
    }
    let values = if ridge > 0.0 {
        // append the boundary closure as one more equation
        let w = extrapolation_weights(BOUNDARY_DEGREE);
        let mut full = a.clone().insert_row(m - 1, 0.0);
        full[(m - 1, m - 1)] = scale;
        for (lag, wk) in w.iter().enumerate() {
            full[(m - 1, m - 2 - lag)] = -scale * wk;
        }
        let mut g = DVector::from_column_slice(data);
        g[m - 1] = 0.0;
        let rhs = full.transpose() * g;
        let normal = full.transpose() * &full + DMatrix::identity(m, m) * ridge;
        let chol = normal
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("regularized system is not positive definite".into()))?;
        chol.solve(&rhs).iter().copied().collect()
    } else {
        // The equation at s = r is empty, so f(r) is tied to the interior by
        // a local polynomial and the last rows are solved together.
        let w = extrapolation_weights(BOUNDARY_DEGREE);
        let k = BOUNDARY_DEGREE + 1;
        let first = m - 1 - k;
        let block = DMatrix::from_fn(k, k, |r, c| {
            let (i, j) = (first + r, first + c);
            // column c is the unknown f_j, j = m-2-(k-1-c)
            let lag = m - 2 - j;
            a[(i, j)] + a[(i, m - 1)] * w[lag]
        });
        let rhs = DVector::from_fn(k, |r, _| data[first + r]);
        let tail = block.lu().solve(&rhs).ok_or(Error::ZeroDiagonal(first))?;
        let mut x = vec![0.0; m];
        for c in 0..k {
            x[first + c] = tail[c];
        }
        x[m - 1] = (0..k).map(|lag| w[lag] * x[m - 2 - lag]).sum();
        for i in (0..first).rev() {
            let tail: f64 = ((i + 1)..m).map(|j| a[(i, j)] * x[j]).sum();
            x[i] = (data[i] - tail) / a[(i, i)];
        }
        x
    };
    RadialProfile::new(spec.d, spec.r, values)
}

/// Angular Fourier coefficients `c_l = (1/N) Σ_k g(θ_k) e^{-ilθ_k}` of each
/// sinogram row, for `l = -L..=L`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularCoefficients {
    /// Center distances `|y|`, one per row.
    pub radii: Vec<f64>,
    pub l_max: usize,
    /// `coeffs[l + L][row]`.
    pub coeffs: Vec<Vec<Complex64>>,
    /// Mean-square of each row not captured by the kept degrees.
    pub tail_energy: Vec<f64>,
}

impl AngularCoefficients {
    pub fn degree(&self, l: i64) -> &[Complex64] {
        &self.coeffs[(l + self.l_max as i64) as usize]
    }

    /// Total discarded mean-square energy relative to the total.
    pub fn tail_fraction(&self, sino: &Sinogram) -> f64 {
        let n2 = sino.axis2.len() as f64;
        let total: f64 = sino.values.iter().map(|v| v * v).sum::<f64>() / n2;
        if total == 0.0 {
            0.0
        } else {
            self.tail_energy.iter().sum::<f64>() / total
        }
    }

    /// Rebuilds row values from the kept degrees.
    pub fn synthesize(&self, angles: &[f64]) -> Vec<f64> {
        let l_max = self.l_max as i64;
        let mut out = Vec::with_capacity(self.radii.len() * angles.len());
        for row in 0..self.radii.len() {
            for &a in angles {
                let v: Complex64 = (-l_max..=l_max)
                    .map(|l| self.degree(l)[row] * Complex64::from_polar(1.0, l as f64 * a))
                    .sum();
                out.push(v.re);
            }
        }
        out
    }
}

/// Per-row angular DFT of a polar sinogram whose angle axis is a uniform full turn.
// rows are filled column by column
#[allow(clippy::needless_range_loop)]
pub fn angular_decompose(sino: &Sinogram, l_max: usize) -> Result<AngularCoefficients> {
    if !sino.geometry.is_polar() || !sino.angle_is_periodic() {
        return Err(Error::InvalidInput(
            "angular decomposition needs a uniform full-turn angle axis".into(),
        ));
    }
    let (n1, n2) = sino.shape();
    if 2 * l_max + 1 > n2 {
        return Err(Error::InvalidInput(format!("{n2} angles cannot resolve degree {l_max}")));
    }
    let fft = FftPlanner::new().plan_fft_forward(n2);
    let a0 = sino.axis2[0];
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); n1]; 2 * l_max + 1];
    let mut tail_energy = Vec::with_capacity(n1);
    for i in 0..n1 {
        let mut buf: Vec<Complex64> = (0..n2).map(|j| Complex64::new(sino.get(i, j), 0.0)).collect();
        fft.process(&mut buf);
        let total: f64 = buf.iter().map(|c| c.norm_sqr()).sum::<f64>() / (n2 * n2) as f64;
        let mut kept = 0.0;
        for l in -(l_max as i64)..=(l_max as i64) {
            let idx = l.rem_euclid(n2 as i64) as usize;
            // samples start at a0, not at angle zero
            let c = buf[idx] / n2 as f64 * Complex64::from_polar(1.0, -(l as f64) * a0);
            kept += c.norm_sqr();
            coeffs[(l + l_max as i64) as usize][i] = c;
        }
        tail_energy.push((total - kept).max(0.0));
    }
    Ok(AngularCoefficients {
        radii: sino.axis1.clone(),
        l_max,
        coeffs,
        tail_energy,
    })
}

/// Settings for [`invert_constant_r`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionOptions {
    pub l_max: usize,
    pub ridge: f64,
    /// Radial grid nodes on `[d, r]`.
    pub m: usize,
    /// Subsamples per pixel side when resynthesizing the image.
    pub supersample: usize,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            l_max: 32,
            ridge: 0.0,
            m: 200,
            supersample: 1,
        }
    }
}

/// Radial harmonics recovered by [`invert_constant_r`].
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicSolution {
    pub d: f64,
    pub r: f64,
    /// `profiles[l]` for `l = 0..=L`; negative degrees are conjugates.
    pub profiles: Vec<Vec<Complex64>>,
    pub tail_fraction: f64,
}

impl HarmonicSolution {
    /// `Σ_l f_l(ρ) e^{ilξ}`, zero outside `d ≤ ρ ≤ r`.
    pub fn eval(&self, x: Vec2) -> f64 {
        let rho = x.norm();
        if !(rho >= self.d && rho <= self.r) {
            return 0.0;
        }
        let m = self.profiles[0].len();
        let f = (rho - self.d) / (self.r - self.d) * (m - 1) as f64;
        let k = (f.floor() as usize).min(m - 2);
        let w = f - k as f64;
        let step = Complex64::from_polar(1.0, x.y.atan2(x.x));
        let mut phase = Complex64::new(1.0, 0.0);
        let mut acc = 0.0;
        for (l, prof) in self.profiles.iter().enumerate() {
            let c = prof[k] * (1.0 - w) + prof[k + 1] * w;
            let term = (c * phase).re;
            acc += if l == 0 { term } else { 2.0 * term };
            phase *= step;
        }
        acc
    }

    /// Pixel averages of [`eval`](Self::eval) over an `n × n` subgrid.
    pub fn render(&self, spec: ImageSpec, n: usize) -> Image {
        let n = n.max(1);
        let (dx, dy) = (spec.dx(), spec.dy());
        let values = spec
            .centers()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(_, c)| {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        let off = Vec2::new(((a as f64 + 0.5) / n as f64 - 0.5) * dx, ((b as f64 + 0.5) / n as f64 - 0.5) * dy);
                        acc += self.eval(c + off);
                    }
                }
                acc / (n * n) as f64
            })
            .collect();
        Image::from_values(spec, values).expect("shape matches spec")
    }
}

/// Inverts constant-radius data on centers `r + d ≤ |y| ≤ 2r` for a target
/// supported in `d < |x| < r`.
pub fn invert_constant_r(sino: &Sinogram, r: f64, d: f64, opts: InversionOptions, image: ImageSpec) -> Result<(Image, HarmonicSolution)> {
    let solution = solve_harmonics(sino, r, d, opts)?;
    let img = solution.render(image, opts.supersample);
    Ok((img, solution))
}

/// Decomposition and per-degree Abel solves, without resynthesis.
pub fn solve_harmonics(sino: &Sinogram, r: f64, d: f64, opts: InversionOptions) -> Result<HarmonicSolution> {
    if sino.geometry != GeometryId::ConstantR {
        return Err(Error::InvalidInput("harmonic inversion needs a constant-radius sinogram".into()));
    }
    if !(d > 0.0 && r > d) {
        return Err(Error::InvalidInput("need 0 < d < r".into()));
    }
    let (lo, hi) = (sino.axis1[0], *sino.axis1.last().unwrap());
    let tol = 1e-9 * r;
    if lo > r + d + tol || hi < 2.0 * r - tol {
        return Err(Error::InsufficientCoverage {
            lo: if lo > r + d + tol { d } else { hi - r },
            hi: if lo > r + d + tol { lo - r } else { r },
        });
    }
    let coeffs = angular_decompose(sino, opts.l_max)?;
    let s_nodes = linspace(d, r, opts.m);
    let profiles = (0..=opts.l_max)
        .into_par_iter()
        .map(|l| {
            let row = coeffs.degree(l as i64);
            let data: Vec<Complex64> = s_nodes
                .iter()
                .map(|&s| {
                    let re: Vec<f64> = row.iter().map(|c| c.re).collect();
                    let im: Vec<f64> = row.iter().map(|c| c.im).collect();
                    Complex64::new(axis_interp(&sino.axis1, &re, r + s), axis_interp(&sino.axis1, &im, r + s))
                })
                .collect();
            let spec = AbelKernelSpec::new(2, l, r, d)?;
            let re = solve_abel(&spec, &data.iter().map(|c| c.re).collect::<Vec<_>>(), opts.ridge)?;
            let im = solve_abel(&spec, &data.iter().map(|c| c.im).collect::<Vec<_>>(), opts.ridge)?;
            Ok(re.values.iter().zip(&im.values).map(|(&a, &b)| Complex64::new(a, b)).collect())
        })
        .collect::<Result<Vec<Vec<Complex64>>>>()?;
    Ok(HarmonicSolution {
        d,
        r,
        profiles,
        tail_fraction: coeffs.tail_fraction(sino),
    })
}

// Linear interpolation on a monotone axis, clamped at the ends.
fn axis_interp(axis: &[f64], values: &[f64], x: f64) -> f64 {
    let n = axis.len();
    if n == 1 || x <= axis[0] {
        return values[0];
    }
    if x >= axis[n - 1] {
        return values[n - 1];
    }
    let k = axis.partition_point(|&a| a <= x).saturating_sub(1).min(n - 2);
    let w = (x - axis[k]) / (axis[k + 1] - axis[k]);
    (1.0 - w) * values[k] + w * values[k + 1]
}

/// Conversion between rotational Compton centers `y = tΘ` and equidistant
/// sphere parameters `(λ, Θ)` with `λ = sqrt(1+α²)/(2t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistantMap {
    pub alpha: f64,
    pub p: f64,
}

/// Equidistant transform samples on a `(λ, Θ)` grid; `λ` increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistantSamples {
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
    /// Factor applied to the Compton data.
    pub scale: f64,
}

impl EquidistantMap {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput("equidistant map needs α > 0".into()));
        }
        Ok(Self {
            alpha,
            p: 1.0 / (1.0 + alpha * alpha).sqrt(),
        })
    }

    /// `p^(n-1)` in the plane.
    pub fn scale(&self) -> f64 {
        self.p
    }

    pub fn lambda_of_t(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("center distance must be positive, got {t}")));
        }
        Ok((1.0 + self.alpha * self.alpha).sqrt() / (2.0 * t))
    }

    pub fn t_of_lambda(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidInput(format!("λ must be positive, got {lambda}")));
        }
        Ok((1.0 + self.alpha * self.alpha).sqrt() / (2.0 * lambda))
    }

    /// Reparameterizes a rotational sinogram and scales it by `p`.
    pub fn map(&self, sino: &Sinogram) -> Result<EquidistantSamples> {
        if sino.geometry != GeometryId::RotationalCst {
            return Err(Error::InvalidInput("equidistant map needs a rotational sinogram".into()));
        }
        let (n1, n2) = sino.shape();
        let lambda = sino.axis1.iter().rev().map(|&t| self.lambda_of_t(t)).collect::<Result<Vec<_>>>()?;
        let scale = self.scale();
        let mut values = Vec::with_capacity(sino.len());
        for i in (0..n1).rev() {
            values.extend((0..n2).map(|j| scale * sino.get(i, j)));
        }
        Ok(EquidistantSamples {
            lambda,
            theta: sino.axis2.clone(),
            values,
            scale,
        })
    }

    pub fn unmap(&self, samples: &EquidistantSamples) -> Result<Sinogram> {
        let (n1, n2) = (samples.lambda.len(), samples.theta.len());
        let axis1 = samples
            .lambda
            .iter()
            .rev()
            .map(|&l| self.t_of_lambda(l))
            .collect::<Result<Vec<_>>>()?;
        let mut values = Vec::with_capacity(samples.values.len());
        for i in (0..n1).rev() {
            values.extend((0..n2).map(|j| samples.values[i * n2 + j] / samples.scale));
        }
        Sinogram::from_values(GeometryId::RotationalCst, axis1, samples.theta.clone(), values)
    }

    /// The level set `{y : (p - y·Θ)/(1 - |y|²) = λ}` as a circle.
    pub fn circle(&self, lambda: f64, theta: f64) -> (Vec2, f64) {
        let dir = Vec2::new(theta.cos(), theta.sin());
        let radius = (1.0 - 4.0 * lambda * self.p + 4.0 * lambda * lambda).sqrt() / (2.0 * lambda);
        (dir / (2.0 * lambda), radius)
    }

    /// `f̃(y) = f(y/p)` as a raster: same values on extents scaled by `p`.
    pub fn scaled_raster(&self, f: &Image) -> Image {
        let s = f.spec;
        let spec = ImageSpec {
            x_min: s.x_min * self.p,
            x_max: s.x_max * self.p,
            y_min: s.y_min * self.p,
            y_max: s.y_max * self.p,
            ..s
        };
        Image {
            spec,
            values: f.values.clone(),
        }
    }

    /// Arc-length integral of a raster over an equidistant circle, by
    /// uniform-angle quadrature with bilinear sampling.
    pub fn equidistant_integral(&self, f_tilde: &Image, lambda: f64, theta: f64, quad: usize) -> f64 {
        let (c, rad) = self.circle(lambda, theta);
        let h = TAU / quad as f64;
        (0..quad)
            .map(|k| {
                let a = (k as f64 + 0.5) * h;
                f_tilde.bilinear_sample(c + rad * Vec2::new(a.cos(), a.sin()))
            })
            .sum::<f64>()
            * rad
            * h
    }
}

/// Half-angle `arccos((s + r)/(2r))` of the cap of directions seen by the circle at `s`.
pub fn cap_half_angle(r: f64, s: f64) -> f64 {
    ((s + r) / (2.0 * r)).clamp(-1.0, 1.0).acos()
}
