//! Reconstruction: Landweber iteration, smoothed total variation by
//! projected gradient descent, and derivative-filtered backprojection.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RadiusModel;
use crate::grid::{dot, l2_norm, GeometryId, Image, ImageSpec, Sinogram};
use crate::projector::{backproject_generic, backproject_linear_cst, CutoffProfile, Projector, SparseOperator};

/// Gradient step size: absolute, or a multiple of `1/σ_max²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Absolute(f64),
    Relative(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fbp,
    Landweber,
    Tv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconConfig {
    pub method: Method,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_step")]
    pub step: Step,
    #[serde(default)]
    pub lambda_tv: f64,
    #[serde(default = "default_beta")]
    pub beta_tv: f64,
    #[serde(default)]
    pub nonneg: bool,
    #[serde(default)]
    pub cutoff: Option<CutoffProfile>,
}

fn default_iterations() -> usize {
    200
}

fn default_step() -> Step {
    Step::Relative(1.0)
}

fn default_beta() -> f64 {
    1e-3
}

impl ReconConfig {
    pub fn landweber(iterations: usize) -> Self {
        Self {
            method: Method::Landweber,
            iterations,
            step: default_step(),
            lambda_tv: 0.0,
            beta_tv: default_beta(),
            nonneg: false,
            cutoff: None,
        }
    }

    pub fn tv(iterations: usize, lambda: f64, beta: f64) -> Self {
        Self {
            method: Method::Tv,
            iterations,
            lambda_tv: lambda,
            beta_tv: beta,
            nonneg: true,
            ..Self::landweber(iterations)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let step_ok = match self.step {
            Step::Absolute(s) | Step::Relative(s) => s > 0.0 && s.is_finite(),
        };
        if !step_ok {
            return Err(Error::Config("step must be positive".into()));
        }
        if self.iterations == 0 && self.method != Method::Fbp {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.method == Method::Tv && !(self.beta_tv > 0.0) {
            return Err(Error::Config("TV needs beta_tv > 0".into()));
        }
        if self.lambda_tv < 0.0 {
            return Err(Error::Config("lambda_tv must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Iterate with its per-iteration log.
#[derive(Clone, Debug, PartialEq)]
pub struct IterOutcome {
    pub x: Vec<f64>,
    /// `(iteration, value)`: residual norm for Landweber, objective for TV.
    pub log: Vec<(usize, f64)>,
    pub step: f64,
    pub sigma_max_sq: f64,
    pub warnings: Vec<String>,
}

const POWER_ITERATIONS: usize = 50;

fn resolve_step(op: &SparseOperator, step: Step, warnings: &mut Vec<String>) -> (f64, f64) {
    let sigma = op.estimate_sigma_max_sq(POWER_ITERATIONS);
    let s = match step {
        Step::Absolute(s) => s,
        Step::Relative(c) if sigma > 0.0 => c / sigma,
        Step::Relative(c) => c,
    };
    if sigma > 0.0 && s >= 2.0 / sigma {
        warnings.push(format!("step {s:e} is outside the stability bound 2/σ² = {:e}", 2.0 / sigma));
    }
    (s, sigma)
}

/// `x ← x + s Aᵀ(b - A x)` from `x = 0`.
pub fn landweber(op: &SparseOperator, b: &[f64], cfg: &ReconConfig) -> Result<IterOutcome> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let (s, sigma) = resolve_step(op, cfg.step, &mut warnings);
    let mut x = vec![0.0; op.n_cols()];
    let mut log = Vec::with_capacity(cfg.iterations + 1);
    for k in 0..=cfg.iterations {
        let ax = op.mul(&x)?;
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        log.push((k, l2_norm(&r)));
        if k == cfg.iterations {
            break;
        }
        let g = op.mul_transpose(&r)?;
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += s * gi;
            if cfg.nonneg && *xi < 0.0 {
                *xi = 0.0;
            }
        }
    }
    Ok(IterOutcome {
        x,
        log,
        step: s,
        sigma_max_sq: sigma,
        warnings,
    })
}

/// Smoothed total variation `Σ sqrt(|∇x|² + β²)` with forward differences
/// and zero-Neumann boundaries.
pub fn smoothed_tv(x: &[f64], nx: usize, ny: usize, beta: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let (gx, gy) = forward_diff(x, nx, ny, i, j);
            total += (gx * gx + gy * gy + beta * beta).sqrt();
        }
    }
    total
}

#[inline]
fn forward_diff(x: &[f64], nx: usize, ny: usize, i: usize, j: usize) -> (f64, f64) {
    let k = j * nx + i;
    let gx = if i + 1 < nx { x[k + 1] - x[k] } else { 0.0 };
    let gy = if j + 1 < ny { x[k + nx] - x[k] } else { 0.0 };
    (gx, gy)
}

/// Gradient of [`smoothed_tv`].
pub fn smoothed_tv_gradient(x: &[f64], nx: usize, ny: usize, beta: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let (gx, gy) = forward_diff(x, nx, ny, i, j);
            let phi = (gx * gx + gy * gy + beta * beta).sqrt();
            let (px, py) = (gx / phi, gy / phi);
            if i + 1 < nx {
                g[k] -= px;
                g[k + 1] += px;
            }
            if j + 1 < ny {
                g[k] -= py;
                g[k + nx] += py;
            }
        }
    }
    g
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Projected gradient descent on `‖Ax - b‖² + λ Σ sqrt(|∇x|² + β²)` with
/// Armijo backtracking. The logged objective is that expression; the
/// gradient step is taken on half of it, so with `λ = 0` and an accepted
/// step the iterates coincide with Landweber's.
pub fn tv_reconstruct(op: &SparseOperator, b: &[f64], image: ImageSpec, cfg: &ReconConfig) -> Result<IterOutcome> {
    cfg.validate()?;
    if op.n_cols() != image.len() {
        return Err(Error::ShapeMismatch {
            expected: image.len(),
            found: op.n_cols(),
        });
    }
    let (nx, ny) = (image.nx, image.ny);
    let (lambda, beta) = (cfg.lambda_tv, cfg.beta_tv);
    let mut warnings = Vec::new();
    let (s_init, sigma) = resolve_step(op, cfg.step, &mut warnings);

    let half_objective = |x: &[f64], ax: &[f64]| {
        let misfit: f64 = ax.iter().zip(b).map(|(a, bi)| (a - bi) * (a - bi)).sum();
        let reg = if lambda > 0.0 { smoothed_tv(x, nx, ny, beta) } else { 0.0 };
        0.5 * misfit + 0.5 * lambda * reg
    };

    let mut x = vec![0.0; op.n_cols()];
    let mut ax = op.mul(&x)?;
    let mut phi = half_objective(&x, &ax);
    let mut log = vec![(0, 2.0 * phi)];
    let mut s = s_init;
    for k in 1..=cfg.iterations {
        let r: Vec<f64> = ax.iter().zip(b).map(|(a, bi)| a - bi).collect();
        let mut g = op.mul_transpose(&r)?;
        if lambda > 0.0 {
            for (gi, ti) in g.iter_mut().zip(smoothed_tv_gradient(&x, nx, ny, beta)) {
                *gi += 0.5 * lambda * ti;
            }
        }
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| {
                    let v = xi - s * gi;
                    if cfg.nonneg && v < 0.0 {
                        0.0
                    } else {
                        v
                    }
                })
                .collect();
            let a_trial = op.mul(&trial)?;
            let phi_trial = half_objective(&trial, &a_trial);
            if !phi_trial.is_finite() {
                return Err(Error::NonFinite(k));
            }
            let decrease: f64 = g.iter().zip(trial.iter().zip(&x)).map(|(gi, (t, xi))| gi * (t - xi)).sum();
            if phi_trial <= phi + ARMIJO * decrease {
                accepted = Some((trial, a_trial, phi_trial));
                break;
            }
            s *= 0.5;
        }
        let Some((trial, a_trial, phi_trial)) = accepted else {
            warnings.push(format!("line search stalled at iteration {k}"));
            break;
        };
        x = trial;
        ax = a_trial;
        phi = phi_trial;
        log.push((k, 2.0 * phi));
        s = s_init.min(2.0 * s);
    }
    Ok(IterOutcome {
        x,
        log,
        step: s_init,
        sigma_max_sq: sigma,
        warnings,
    })
}

/// Landweber or TV on a projector, returning an image.
pub fn reconstruct(proj: &Projector, b: &Sinogram, cfg: &ReconConfig) -> Result<(Image, IterOutcome)> {
    if b.values.len() != proj.op.n_rows() {
        return Err(Error::ShapeMismatch {
            expected: proj.op.n_rows(),
            found: b.values.len(),
        });
    }
    let out = match cfg.method {
        Method::Landweber => landweber(&proj.op, &b.values, cfg)?,
        Method::Tv => tv_reconstruct(&proj.op, &b.values, proj.image, cfg)?,
        Method::Fbp => return Err(Error::Config("filtered backprojection is not iterative".into())),
    };
    Ok((Image::from_values(proj.image, out.x.clone())?, out))
}

/// Central differences along axis2, treating the sinogram as zero beyond
/// its extents. Exact on interior samples of data affine in axis2.
pub fn derivative_axis2(sino: &Sinogram) -> Sinogram {
    let (n1, n2) = sino.shape();
    let a = &sino.axis2;
    let mut out = vec![0.0; sino.len()];
    if n2 < 2 {
        return sino.with_values(out).expect("same shape");
    }
    for i in 0..n1 {
        for j in 0..n2 {
            let (lo, hi) = (j.checked_sub(1), (j + 1 < n2).then_some(j + 1));
            let v = |k: Option<usize>| k.map_or(0.0, |k| sino.get(i, k));
            let span = match (lo, hi) {
                (Some(l), Some(h)) => a[h] - a[l],
                (None, Some(h)) => 2.0 * (a[h] - a[j]),
                (Some(l), None) => 2.0 * (a[j] - a[l]),
                (None, None) => unreachable!(),
            };
            out[sino.index(i, j)] = (v(hi) - v(lo)) / span;
        }
    }
    sino.with_values(out).expect("same shape")
}

/// Five-point Laplacian in index coordinates. The first axis is zero
/// beyond its extents; a full-turn angle axis wraps.
pub fn laplacian_index(sino: &Sinogram) -> Sinogram {
    let (n1, n2) = sino.shape();
    let periodic = sino.angle_is_periodic();
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 || i >= n1 as isize {
            return 0.0;
        }
        let j = if periodic {
            j.rem_euclid(n2 as isize)
        } else if j < 0 || j >= n2 as isize {
            return 0.0;
        } else {
            j
        };
        sino.get(i as usize, j as usize)
    };
    let mut out = vec![0.0; sino.len()];
    for i in 0..n1 as isize {
        for j in 0..n2 as isize {
            out[sino.index(i as usize, j as usize)] = at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j);
        }
    }
    sino.with_values(out).expect("same shape")
}

fn cutoff_along(sino: &Sinogram, cut: Option<&CutoffProfile>, coordinate: crate::projector::CutoffCoordinate) -> Result<Sinogram> {
    match cut {
        Some(c) => crate::projector::apply_cutoff(sino, c, coordinate),
        None => Ok(sino.clone()),
    }
}

/// Sinogram filter of the linear FBP: `h ∂(h b)` along the second center coordinate.
pub fn fbp_filter_linear(b: &Sinogram, cut: Option<&CutoffProfile>) -> Result<Sinogram> {
    use crate::projector::CutoffCoordinate::Y2;
    if b.geometry != GeometryId::LinearCst {
        return Err(Error::InvalidInput("linear FBP needs a linear sinogram".into()));
    }
    cutoff_along(&derivative_axis2(&cutoff_along(b, cut, Y2)?), cut, Y2)
}

/// Sinogram filter of the constant-radius FBP: `h Δ(h b)` with a radial cutoff.
pub fn fbp_filter_constant_r(b: &Sinogram, cut: Option<&CutoffProfile>) -> Result<Sinogram> {
    use crate::projector::CutoffCoordinate::Radial;
    if b.geometry != GeometryId::ConstantR {
        return Err(Error::InvalidInput("constant-radius FBP needs a constant-radius sinogram".into()));
    }
    cutoff_along(&laplacian_index(&cutoff_along(b, cut, Radial)?), cut, Radial)
}

/// Filtered backprojection for the linear geometry: `Aᵀ(h ∂(h b))` with the
/// derivative along the second center coordinate. Without a projector the
/// continuous backprojection replaces `Aᵀ`.
pub fn fbp_linear_cst(
    b: &Sinogram,
    alpha: f64,
    image: ImageSpec,
    cut: Option<&CutoffProfile>,
    proj: Option<&Projector>,
    n_phi: usize,
) -> Result<Image> {
    let filtered = fbp_filter_linear(b, cut)?;
    match proj {
        Some(p) => p.apply_transpose(&filtered),
        None => backproject_linear_cst(&filtered, alpha, image, n_phi),
    }
}

/// Filtered backprojection for constant radius: `R*(h Δ(h b))` with the
/// index-coordinate Laplacian and a radial cutoff.
pub fn fbp_constant_r(
    b: &Sinogram,
    r: f64,
    image: ImageSpec,
    cut: Option<&CutoffProfile>,
    proj: Option<&Projector>,
    n_omega: usize,
) -> Result<Image> {
    let filtered = fbp_filter_constant_r(b, cut)?;
    match proj {
        Some(p) => p.apply_transpose(&filtered),
        None => backproject_generic(&filtered, &RadiusModel::ConstantR { r }, image, n_omega),
    }
}

/// Writes `(iteration, value)` rows as CSV.
pub fn write_log_csv(path: impl AsRef<Path>, value_name: &str, log: &[(usize, f64)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", value_name])?;
    for (k, v) in log {
        w.write_record([k.to_string(), format!("{v:e}")])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Relative residual `‖A x - b‖ / ‖b‖`.
pub fn relative_residual(op: &SparseOperator, x: &[f64], b: &[f64]) -> Result<f64> {
    let ax = op.mul(x)?;
    let r: Vec<f64> = ax.iter().zip(b).map(|(a, bi)| a - bi).collect();
    Ok(l2_norm(&r) / l2_norm(b))
}

/// Least-squares fit `c` minimizing `‖c·x - y‖`.
pub fn best_scale(x: &[f64], y: &[f64]) -> f64 {
    let xx = dot(x, x);
    if xx == 0.0 {
        0.0
    } else {
        dot(x, y) / xx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{full_turn, linspace};
    use crate::projector::{assemble_forward, SinogramLayout};
    use approx::assert_abs_diff_eq;

    fn diag(a: &[f64]) -> SparseOperator {
        let n = a.len();
        SparseOperator::from_csr(n, n, (0..=n).collect(), (0..n as u32).collect(), a.to_vec()).unwrap()
    }

    fn small_problem() -> (Projector, Image) {
        let image = ImageSpec::square(16, -1.0, 1.0).unwrap();
        let layout = SinogramLayout::new(GeometryId::ConstantR, linspace(0.2, 2.0, 24), full_turn(40)).unwrap();
        let p = assemble_forward(&RadiusModel::ConstantR { r: 0.9 }, image, &layout, 128).unwrap();
        let truth = Image::from_fn(image, |q| f64::from((q - crate::Vec2::new(0.2, 0.1)).norm() < 0.5));
        (p, truth)
    }

    #[test]
    fn landweber_on_zero_data_stays_zero() {
        let (p, _) = small_problem();
        let out = landweber(&p.op, &vec![0.0; p.op.n_rows()], &ReconConfig::landweber(20)).unwrap();
        assert!(out.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn landweber_diagonal_recursion() {
        let a = [2.0, 0.5];
        let b = [1.0, 3.0];
        let s = 0.1;
        let cfg = ReconConfig {
            step: Step::Absolute(s),
            ..ReconConfig::landweber(25)
        };
        let out = landweber(&diag(&a), &b, &cfg).unwrap();
        for i in 0..2 {
            // error e_k = (1 - s a²)^k e_0 with e_0 = -b/a
            let exact = b[i] / a[i] * (1.0 - (1.0 - s * a[i] * a[i]).powi(25));
            assert_abs_diff_eq!(out.x[i], exact, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(out.sigma_max_sq, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn oversized_step_warns() {
        let cfg = ReconConfig {
            step: Step::Relative(2.5),
            ..ReconConfig::landweber(3)
        };
        let out = landweber(&diag(&[1.0, 1.0]), &[1.0, 1.0], &cfg).unwrap();
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn landweber_residual_is_monotone_and_converges() {
        let (p, truth) = small_problem();
        let b = p.op.mul(&truth.values).unwrap();
        let cfg = ReconConfig {
            step: Step::Relative(1.8),
            ..ReconConfig::landweber(500)
        };
        let out = landweber(&p.op, &b, &cfg).unwrap();
        assert!(out.log.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12)));
        let rel = relative_residual(&p.op, &out.x, &b).unwrap();
        assert!(rel < 1e-3, "{rel}");
    }

    #[test]
    fn tv_without_penalty_is_landweber() {
        let (p, truth) = small_problem();
        let b = p.op.mul(&truth.values).unwrap();
        let lw = landweber(&p.op, &b, &ReconConfig::landweber(30)).unwrap();
        let cfg = ReconConfig {
            nonneg: false,
            ..ReconConfig::tv(30, 0.0, 1e-3)
        };
        let tv = tv_reconstruct(&p.op, &b, p.image, &cfg).unwrap();
        for (a, c) in lw.x.iter().zip(&tv.x) {
            assert_abs_diff_eq!(a, c, epsilon = 1e-10);
        }
    }

    #[test]
    fn tv_objective_decreases_and_respects_sign() {
        let (p, truth) = small_problem();
        let b = p.op.mul(&truth.values).unwrap();
        let out = tv_reconstruct(&p.op, &b, p.image, &ReconConfig::tv(40, 0.5, 1e-2)).unwrap();
        assert!(out.log.windows(2).all(|w| w[1].1 <= w[0].1));
        assert!(out.x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn tv_gradient_vanishes_on_constants_and_matches_differences() {
        let x = vec![0.7; 30];
        assert!(smoothed_tv_gradient(&x, 6, 5, 0.1).iter().all(|&g| g == 0.0));
        let x: Vec<f64> = (0..30).map(|k| ((k * 7) % 11) as f64 * 0.1).collect();
        let g = smoothed_tv_gradient(&x, 6, 5, 0.1);
        for k in [0, 7, 29] {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += 1e-6;
            xm[k] -= 1e-6;
            let fd = (smoothed_tv(&xp, 6, 5, 0.1) - smoothed_tv(&xm, 6, 5, 0.1)) / 2e-6;
            assert_abs_diff_eq!(g[k], fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn tv_denoises_a_step_with_identity() {
        // brute-force sweep over λ; the best plateau recovery must be within 1e-2
        let n = 64;
        let clean: Vec<f64> = (0..n).map(|k| if k < n / 2 { 0.2 } else { 1.0 }).collect();
        let noisy: Vec<f64> = clean.iter().enumerate().map(|(k, v)| v + 0.05 * (k as f64 * 2.3).sin()).collect();
        let id = diag(&vec![1.0; n]);
        let image = ImageSpec::new(n, 1, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let mut best = f64::INFINITY;
        for lambda in [0.01, 0.03, 0.1, 0.3] {
            let cfg = ReconConfig {
                nonneg: false,
                ..ReconConfig::tv(400, lambda, 1e-4)
            };
            let out = tv_reconstruct(&id, &noisy, image, &cfg).unwrap();
            let plateau = |r: std::ops::Range<usize>| out.x[r.clone()].iter().sum::<f64>() / r.len() as f64;
            let err = (plateau(4..28) - 0.2).abs().max((plateau(36..60) - 1.0).abs());
            best = best.min(err);
        }
        assert!(best < 1e-2, "{best}");
    }

    #[test]
    fn derivative_and_laplacian_basics() {
        let axis2 = linspace(-1.0, 2.0, 7);
        let affine: Vec<f64> = (0..3).flat_map(|i| axis2.iter().map(move |&a| 2.0 * a + i as f64)).collect();
        let s = Sinogram::from_values(GeometryId::LinearCst, vec![0.0, 1.0, 2.0], axis2, affine).unwrap();
        let d = derivative_axis2(&s);
        for i in 0..3 {
            for j in 1..6 {
                assert_abs_diff_eq!(d.get(i, j), 2.0, epsilon = 1e-12);
            }
        }
        let constant = s.with_values(vec![4.0; 21]).unwrap();
        let d = derivative_axis2(&constant);
        assert!((1..6).all(|j| d.get(1, j) == 0.0));

        let grid = Sinogram::from_values(
            GeometryId::ConstantR,
            linspace(1.0, 2.0, 6),
            linspace(0.0, 1.0, 6),
            (0..36).map(|k| (k / 6) as f64 * 0.5 - (k % 6) as f64).collect(),
        )
        .unwrap();
        let l = laplacian_index(&grid);
        for i in 1..5 {
            for j in 1..5 {
                assert_abs_diff_eq!(l.get(i, j), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fbp_is_linear_and_zero_on_zero() {
        let image = ImageSpec::new(10, 10, (-1.0, 1.0), (0.25, 2.25)).unwrap();
        let axis1 = linspace(-3.0, 3.0, 25);
        let axis2 = linspace(-2.0, 3.0, 21);
        let vals: Vec<f64> = (0..25 * 21).map(|k| ((k as f64) * 0.37).sin()).collect();
        let b = Sinogram::from_values(GeometryId::LinearCst, axis1, axis2, vals).unwrap();
        let cut = CutoffProfile::falling(2.0, 2.0).unwrap();
        let x1 = fbp_linear_cst(&b, 1.0, image, Some(&cut), None, 180).unwrap();
        let x3 = fbp_linear_cst(&b.scaled(3.0), 1.0, image, Some(&cut), None, 180).unwrap();
        for (a, c) in x1.values.iter().zip(&x3.values) {
            assert_abs_diff_eq!(3.0 * a, c, epsilon = 1e-12 * (1.0 + c.abs()));
        }
        let z = fbp_linear_cst(&b.scaled(0.0), 1.0, image, None, None, 180).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));

        let polar = Sinogram::zeros(GeometryId::ConstantR, linspace(1.25, 2.5, 8), full_turn(16)).unwrap();
        let img = ImageSpec::new(6, 6, (0.25, 1.25), (-0.5, 0.5)).unwrap();
        let z = fbp_constant_r(&polar, 1.25, img, None, None, 64).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn config_validation() {
        let mut c = ReconConfig::landweber(10);
        c.step = Step::Absolute(0.0);
        assert!(c.validate().is_err());
        let mut c = ReconConfig::tv(10, 0.1, 0.0);
        assert!(c.validate().is_err());
        c.beta_tv = 1e-3;
        c.iterations = 0;
        assert!(c.validate().unwrap_err().is_config_error());
    }
}
