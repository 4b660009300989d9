//! Discrete forward transform, its exact transpose, sinogram cutoffs and the
//! continuous backprojections used by filtered reconstructions.
//!
//! Row `i` of the forward matrix integrates the image over the circle with
//! center `yᵢ` and radius `r(yᵢ)` using `Q` equally spaced angles and
//! bilinear image interpolation at each quadrature node.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RadiusModel;
use crate::grid::{GeometryId, Image, ImageSpec, Sinogram};
use crate::Vec2;

/// Compressed sparse rows with a stored transpose, so products with `A` and
/// `Aᵀ` read the same weights and stay deterministic under parallelism.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    weights: Vec<f64>,
    t_ptr: Vec<usize>,
    t_idx: Vec<u32>,
    t_weights: Vec<f64>,
}

impl SparseOperator {
    pub fn from_csr(n_rows: usize, n_cols: usize, row_ptr: Vec<usize>, col_idx: Vec<u32>, weights: Vec<f64>) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 || row_ptr[0] != 0 || row_ptr.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("row pointers must be nondecreasing from 0".into()));
        }
        let nnz = *row_ptr.last().unwrap();
        if col_idx.len() != nnz || weights.len() != nnz {
            return Err(Error::ShapeMismatch {
                expected: nnz,
                found: col_idx.len().min(weights.len()),
            });
        }
        if col_idx.iter().any(|&c| c as usize >= n_cols) {
            return Err(Error::InvalidInput("column index out of range".into()));
        }
        // counting sort by column; rows stay ascending inside each column
        let mut t_ptr = vec![0usize; n_cols + 1];
        for &c in &col_idx {
            t_ptr[c as usize + 1] += 1;
        }
        for k in 0..n_cols {
            t_ptr[k + 1] += t_ptr[k];
        }
        let mut fill = t_ptr.clone();
        let mut t_idx = vec![0u32; nnz];
        let mut t_weights = vec![0.0; nnz];
        for row in 0..n_rows {
            for k in row_ptr[row]..row_ptr[row + 1] {
                let c = col_idx[k] as usize;
                t_idx[fill[c]] = row as u32;
                t_weights[fill[c]] = weights[k];
                fill[c] += 1;
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            weights,
            t_ptr,
            t_idx,
            t_weights,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    pub fn csr(&self) -> (&[usize], &[u32], &[f64]) {
        (&self.row_ptr, &self.col_idx, &self.weights)
    }

    /// `diag(h) A`, with the transpose rebuilt to match.
    pub fn scale_rows(&self, h: &[f64]) -> Result<Self> {
        if h.len() != self.n_rows {
            return Err(Error::ShapeMismatch {
                expected: self.n_rows,
                found: h.len(),
            });
        }
        let mut weights = self.weights.clone();
        for (row, &hi) in h.iter().enumerate() {
            for w in &mut weights[self.row_ptr[row]..self.row_ptr[row + 1]] {
                *w *= hi;
            }
        }
        Self::from_csr(self.n_rows, self.n_cols, self.row_ptr.clone(), self.col_idx.clone(), weights)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(|(&c, &w)| (c as usize, w))
    }

    /// `A x`.
    pub fn mul(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_cols, x.len())?;
        Ok((0..self.n_rows)
            .into_par_iter()
            .map(|i| {
                let range = self.row_ptr[i]..self.row_ptr[i + 1];
                self.col_idx[range.clone()]
                    .iter()
                    .zip(&self.weights[range])
                    .map(|(&c, &w)| w * x[c as usize])
                    .sum()
            })
            .collect())
    }

    /// `Aᵀ b`.
    pub fn mul_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_rows, b.len())?;
        Ok((0..self.n_cols)
            .into_par_iter()
            .map(|j| {
                let range = self.t_ptr[j]..self.t_ptr[j + 1];
                self.t_idx[range.clone()]
                    .iter()
                    .zip(&self.t_weights[range])
                    .map(|(&r, &w)| w * b[r as usize])
                    .sum()
            })
            .collect())
    }

    /// Largest eigenvalue of `AᵀA` by power iteration from a fixed start.
    pub fn estimate_sigma_max_sq(&self, iterations: usize) -> f64 {
        let mut v = vec![1.0 / (self.n_cols as f64).sqrt(); self.n_cols];
        let mut est = 0.0;
        for _ in 0..iterations {
            let w = self.mul_transpose(&self.mul(&v).expect("shape")).expect("shape");
            let n = crate::grid::l2_norm(&w);
            if n == 0.0 {
                return 0.0;
            }
            est = crate::grid::dot(&v, &w);
            v = w.into_iter().map(|x| x / n).collect();
        }
        est
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected, found })
    }
}

/// Center grid of a sinogram, without values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinogramLayout {
    pub geometry: GeometryId,
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
}

impl SinogramLayout {
    pub fn new(geometry: GeometryId, axis1: Vec<f64>, axis2: Vec<f64>) -> Result<Self> {
        // validation lives in Sinogram
        Sinogram::zeros(geometry, axis1.clone(), axis2.clone())?;
        Ok(Self { geometry, axis1, axis2 })
    }

    pub fn of(sino: &Sinogram) -> Self {
        Self {
            geometry: sino.geometry,
            axis1: sino.axis1.clone(),
            axis2: sino.axis2.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.axis1.len() * self.axis2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn centers(&self) -> Vec<Vec2> {
        self.axis1
            .iter()
            .flat_map(|&a1| self.axis2.iter().map(move |&a2| self.geometry.center(a1, a2)))
            .collect()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Sinogram> {
        Sinogram::from_values(self.geometry, self.axis1.clone(), self.axis2.clone(), values)
    }
}

/// Assembled forward matrix together with the grids it maps between.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    pub op: SparseOperator,
    pub image: ImageSpec,
    pub layout: SinogramLayout,
}

impl Projector {
    pub fn apply(&self, img: &Image) -> Result<Sinogram> {
        if img.spec != self.image {
            return Err(Error::InvalidInput("image grid differs from the operator's".into()));
        }
        self.layout.with_values(self.op.mul(&img.values)?)
    }

    /// Operator for cut-off data: every row multiplied by the profile at its center.
    pub fn with_cutoff(&self, cut: &CutoffProfile, coordinate: CutoffCoordinate) -> Result<Self> {
        let ones = self.layout.with_values(vec![1.0; self.layout.len()])?;
        let h = apply_cutoff(&ones, cut, coordinate)?;
        Ok(Self {
            op: self.op.scale_rows(&h.values)?,
            image: self.image,
            layout: self.layout.clone(),
        })
    }

    pub fn apply_transpose(&self, sino: &Sinogram) -> Result<Image> {
        if sino.axis1 != self.layout.axis1 || sino.axis2 != self.layout.axis2 {
            return Err(Error::InvalidInput("sinogram axes differ from the operator's".into()));
        }
        Image::from_values(self.image, self.op.mul_transpose(&sino.values)?)
    }
}

/// Builds the forward matrix for `model` between `image` and `layout`.
pub fn assemble_forward(model: &RadiusModel, image: ImageSpec, layout: &SinogramLayout, quad_per_circle: usize) -> Result<Projector> {
    image.validate()?;
    if quad_per_circle < 16 {
        return Err(Error::InvalidInput("quad_per_circle must be at least 16".into()));
    }
    if layout.geometry != model.geometry_id() {
        return Err(Error::InvalidInput(format!(
            "{:?} model cannot fill a {:?} sinogram",
            model.family(),
            layout.geometry
        )));
    }
    let centers = layout.centers();
    for &y in &centers {
        model.validate_center(y)?;
    }
    let d_theta = TAU / quad_per_circle as f64;
    let nodes: Vec<Vec2> = (0..quad_per_circle)
        .map(|k| {
            let a = d_theta * k as f64;
            Vec2::new(a.cos(), a.sin())
        })
        .collect();
    let rows: Vec<Vec<(u32, f64)>> = centers
        .par_iter()
        .map(|&y| {
            let r = model.eval(y);
            let w = r * d_theta;
            let mut entries = Vec::new();
            for &u in &nodes {
                if let Some(stencil) = image.bilinear_stencil(y + r * u) {
                    entries.extend(stencil.iter().filter(|e| e.1 > 0.0).map(|&(c, b)| (c as u32, w * b)));
                }
            }
            merge_entries(entries)
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(rows.len() + 1);
    row_ptr.push(0);
    let nnz: usize = rows.iter().map(Vec::len).sum();
    let mut col_idx = Vec::with_capacity(nnz);
    let mut weights = Vec::with_capacity(nnz);
    for row in rows {
        for (c, w) in row {
            col_idx.push(c);
            weights.push(w);
        }
        row_ptr.push(col_idx.len());
    }
    let op = SparseOperator::from_csr(centers.len(), image.len(), row_ptr, col_idx, weights)?;
    Ok(Projector {
        op,
        image,
        layout: layout.clone(),
    })
}

fn merge_entries(mut entries: Vec<(u32, f64)>) -> Vec<(u32, f64)> {
    // stable sort keeps the accumulation order fixed
    entries.sort_by_key(|e| e.0);
    let mut out: Vec<(u32, f64)> = Vec::with_capacity(entries.len() / 2);
    for (c, w) in entries {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += w,
            _ => out.push((c, w)),
        }
    }
    out
}

/// Length of the part of the circle `(y, r)` inside the disk `(c, radius)`.
pub fn circle_disk_arc_length(y: Vec2, r: f64, c: Vec2, radius: f64) -> f64 {
    let d = (y - c).norm();
    if d + r <= radius {
        return TAU * r;
    }
    if d >= r + radius || r >= d + radius {
        return 0.0;
    }
    let cos_half = ((r * r + d * d - radius * radius) / (2.0 * r * d)).clamp(-1.0, 1.0);
    2.0 * r * cos_half.acos()
}

/// Direction of a cutoff ramp.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ramp {
    /// 1 up to `b + ε/4`, 0 from `b + ε/2`.
    Falling,
    /// 0 up to `b - ε/2`, 1 from `b - ε/4`.
    Rising,
}

/// Smooth `[0, 1]`-valued ramp built from the quintic smoothstep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub b: f64,
    pub eps: f64,
    pub ramp: Ramp,
}

impl CutoffProfile {
    pub fn falling(b: f64, eps: f64) -> Result<Self> {
        Self::checked(b, eps, Ramp::Falling)
    }

    pub fn rising(b: f64, eps: f64) -> Result<Self> {
        Self::checked(b, eps, Ramp::Rising)
    }

    /// Falling ramp that is 1 below `lo` and 0 above `hi`.
    pub fn falling_between(lo: f64, hi: f64) -> Result<Self> {
        let eps = 4.0 * (hi - lo);
        Self::falling(lo - eps / 4.0, eps)
    }

    /// Rising ramp that is 0 below `lo` and 1 above `hi`.
    pub fn rising_between(lo: f64, hi: f64) -> Result<Self> {
        let eps = 4.0 * (hi - lo);
        Self::rising(lo + eps / 2.0, eps)
    }

    fn checked(b: f64, eps: f64, ramp: Ramp) -> Result<Self> {
        if !(eps > 0.0 && b.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff needs ε > 0, got {eps}")));
        }
        Ok(Self { b, eps, ramp })
    }

    /// Interval over which the profile changes.
    pub fn transition(&self) -> (f64, f64) {
        match self.ramp {
            Ramp::Falling => (self.b + self.eps / 4.0, self.b + self.eps / 2.0),
            Ramp::Rising => (self.b - self.eps / 2.0, self.b - self.eps / 4.0),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        let (lo, hi) = self.transition();
        let s = smoothstep((u - lo) / (hi - lo));
        match self.ramp {
            Ramp::Falling => 1.0 - s,
            Ramp::Rising => s,
        }
    }
}

/// `6s⁵ - 15s⁴ + 10s³` clamped to `[0, 1]`; twice continuously differentiable.
pub fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

/// Which sinogram coordinate a cutoff reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffCoordinate {
    /// Second center coordinate of a Cartesian layout.
    Y2,
    /// Distance of the center from the origin.
    Radial,
}

/// Multiplies every sample by the profile evaluated at its coordinate.
pub fn apply_cutoff(sino: &Sinogram, cut: &CutoffProfile, coordinate: CutoffCoordinate) -> Result<Sinogram> {
    let (n1, n2) = sino.shape();
    let mut values = sino.values.clone();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let (a1, a2) = (sino.axis1[i1], sino.axis2[i2]);
            let u = match (coordinate, sino.geometry.is_polar()) {
                (CutoffCoordinate::Y2, false) => a2,
                (CutoffCoordinate::Y2, true) => {
                    return Err(Error::InvalidInput("y2 cutoff needs a Cartesian sinogram".into()));
                }
                (CutoffCoordinate::Radial, true) => a1,
                (CutoffCoordinate::Radial, false) => a1.hypot(a2),
            };
            values[sino.index(i1, i2)] *= cut.eval(u);
        }
    }
    sino.with_values(values)
}

/// Distance from `x` to the center `x - tξ(φ)` of the linear-geometry
/// circle through `x` seen in direction `φ`.
pub fn linear_center_distance(phi: f64, x2: f64, alpha: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    (alpha * alpha + x2 * x2) / (x2 * s + (alpha * alpha * c * c + x2 * x2).sqrt())
}

/// Center of the linear-geometry circle through `x` in direction `φ`.
pub fn linear_center(phi: f64, x: Vec2, alpha: f64) -> Vec2 {
    let t = linear_center_distance(phi, x.y, alpha);
    x - t * Vec2::new(phi.cos(), phi.sin())
}

/// Continuous backprojection for the linear geometry: for each pixel, the
/// midpoint rule over `φ ∈ (-π/2, 3π/2)` of the sinogram sampled at the
/// center of the circle through the pixel in direction `φ`. Centers outside
/// the sinogram extents contribute nothing.
pub fn backproject_linear_cst(sino: &Sinogram, alpha: f64, image: ImageSpec, n_phi: usize) -> Result<Image> {
    if sino.geometry != GeometryId::LinearCst {
        return Err(Error::InvalidInput("linear backprojection needs a linear sinogram".into()));
    }
    if image.y_min <= 0.0 {
        return Err(Error::InvalidInput("linear backprojection needs the image in x₂ > 0".into()));
    }
    let dphi = TAU / n_phi as f64;
    let phis: Vec<f64> = (0..n_phi).map(|k| -PI / 2.0 + (k as f64 + 0.5) * dphi).collect();
    let centers: Vec<(usize, Vec2)> = image.centers().collect();
    let values = centers
        .par_iter()
        .map(|&(_, x)| {
            phis.iter()
                .map(|&phi| {
                    let y = linear_center(phi, x, alpha);
                    sino.sample(y.x, y.y)
                })
                .sum::<f64>()
                * dphi
        })
        .collect();
    Image::from_values(image, values)
}

/// Continuous backprojection for any radius model: for each pixel `x`, the
/// rule over `ω` on the full circle of the sinogram sampled at the center
/// `x + tω` with `t = r(x + tω)`. Running `ω` over the whole circle visits
/// the centers on both sides of `x`.
pub fn backproject_generic(sino: &Sinogram, model: &RadiusModel, image: ImageSpec, n_omega: usize) -> Result<Image> {
    if sino.geometry != model.geometry_id() {
        return Err(Error::InvalidInput("sinogram geometry does not match the model".into()));
    }
    let dirs = crate::geometry::directions(n_omega);
    let w = TAU / n_omega as f64;
    let centers: Vec<(usize, Vec2)> = image.centers().collect();
    let values = centers
        .par_iter()
        .map(|&(_, x)| {
            dirs.iter()
                .map(|&u| match forward_center(model, x, u) {
                    Some(y) => sino.sample_center(y),
                    None => 0.0,
                })
                .sum::<f64>()
                * w
        })
        .collect();
    Image::from_values(image, values)
}

fn forward_center(model: &RadiusModel, x: Vec2, u: Vec2) -> Option<Vec2> {
    match model {
        RadiusModel::ConstantR { r } => Some(x + *r * u),
        RadiusModel::RotationalCst { alpha } => crate::geometry::rotational_quadratic_roots(*alpha, x, u)
            .into_iter()
            .filter(|&t| t >= 0.0)
            .map(|t| x + t * u)
            .find(|&y| ((y - x).norm() - model.eval(y)).abs() <= 1e-9 * (1.0 + model.eval(y))),
        _ => crate::geometry::fixed_point_centers(model, x, u, None).ok()?.forward.center(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_scaling_matches_scaled_products() {
        let op = SparseOperator::from_csr(2, 3, vec![0, 2, 3], vec![0, 2, 1], vec![1.0, 2.0, 3.0]).unwrap();
        let scaled = op.scale_rows(&[0.5, -2.0]).unwrap();
        assert_eq!(scaled.mul(&[1.0, 1.0, 1.0]).unwrap(), vec![1.5, -6.0]);
        assert_eq!(scaled.mul_transpose(&[1.0, 1.0]).unwrap(), vec![0.5, -6.0, 1.0]);
        assert!(op.scale_rows(&[1.0]).is_err());
    }
    use crate::grid::{full_turn, linspace};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn small_linear() -> Projector {
        let image = ImageSpec::new(24, 24, (-1.0, 1.0), (0.25, 2.25)).unwrap();
        let layout = SinogramLayout::new(GeometryId::LinearCst, linspace(-3.0, 3.0, 20), linspace(-2.0, 3.0, 18)).unwrap();
        assemble_forward(&RadiusModel::LinearCst { alpha: 1.0 }, image, &layout, 128).unwrap()
    }

    #[test]
    fn full_circle_row_sums_to_circumference() {
        let image = ImageSpec::square(64, -2.0, 2.0).unwrap();
        let layout = SinogramLayout::new(GeometryId::ConstantR, vec![0.3], full_turn(4)).unwrap();
        let p = assemble_forward(&RadiusModel::ConstantR { r: 1.0 }, image, &layout, 2048).unwrap();
        let ones = Image::from_fn(image, |_| 1.0);
        for v in p.apply(&ones).unwrap().values {
            assert!((v - TAU).abs() < 1e-6 * TAU);
        }
    }

    #[test]
    fn disjoint_circle_gives_zero() {
        let image = ImageSpec::square(32, -1.0, 1.0).unwrap();
        let layout = SinogramLayout::new(GeometryId::ConstantR, vec![5.0], vec![0.0]).unwrap();
        let p = assemble_forward(&RadiusModel::ConstantR { r: 1.0 }, image, &layout, 256).unwrap();
        assert_eq!(p.op.nnz(), 0);
        assert_eq!(p.apply(&Image::from_fn(image, |_| 1.0)).unwrap().values, vec![0.0]);
    }

    #[test]
    fn arc_length_oracle_limits() {
        let o = Vec2::zeros();
        assert_abs_diff_eq!(circle_disk_arc_length(o, 0.5, o, 1.0), PI, epsilon = 1e-15);
        assert_eq!(circle_disk_arc_length(Vec2::new(3.0, 0.0), 0.5, o, 1.0), 0.0);
        // unit circle through the center of a unit disk: a third of it lies inside
        assert_abs_diff_eq!(circle_disk_arc_length(Vec2::new(1.0, 0.0), 1.0, o, 1.0), TAU / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn disk_row_matches_arc_length() {
        let image = ImageSpec::square(105, -1.0, 1.0).unwrap();
        let c = Vec2::new(0.1, -0.05);
        let disk = Image::from_fn(image, |p| f64::from((p - c).norm() < 0.5));
        let layout = SinogramLayout::new(GeometryId::ConstantR, vec![0.6], full_turn(8)).unwrap();
        let p = assemble_forward(&RadiusModel::ConstantR { r: 0.4 }, image, &layout, 1024).unwrap();
        let got = p.apply(&disk).unwrap();
        for (k, y) in layout.centers().into_iter().enumerate() {
            let want = circle_disk_arc_length(y, 0.4, c, 0.5);
            assert!((got.values[k] - want).abs() < 0.05 * want, "{} vs {want}", got.values[k]);
        }
    }

    #[test]
    fn adjoint_identity_and_linearity() {
        let p = small_linear();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x: Vec<f64> = (0..p.op.n_cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..p.op.n_rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ax = p.op.mul(&x).unwrap();
            let atb = p.op.mul_transpose(&b).unwrap();
            let lhs = crate::grid::dot(&ax, &b);
            let rhs = crate::grid::dot(&x, &atb);
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()));
        }
        let x: Vec<f64> = (0..p.op.n_cols()).map(|k| (k as f64).sin()).collect();
        let z: Vec<f64> = (0..p.op.n_cols()).map(|k| (k as f64 * 0.3).cos()).collect();
        let mix: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        let lhs = p.op.mul(&mix).unwrap();
        let (ax, az) = (p.op.mul(&x).unwrap(), p.op.mul(&z).unwrap());
        for k in 0..lhs.len() {
            assert_abs_diff_eq!(lhs[k], 2.0 * ax[k] - 0.5 * az[k], epsilon = 1e-12);
        }
        assert!(p.op.mul(&[0.0; 3]).is_err());
    }

    #[test]
    fn weights_are_nonnegative() {
        let p = small_linear();
        assert!(p.op.csr().2.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn rotational_centers_near_origin_are_rejected() {
        let image = ImageSpec::square(8, -1.0, 1.0).unwrap();
        let layout = SinogramLayout::new(GeometryId::RotationalCst, vec![0.2, 0.5], full_turn(4)).unwrap();
        let err = assemble_forward(&RadiusModel::RotationalCst { alpha: 1.0 }, image, &layout, 64);
        assert!(matches!(err, Err(Error::InvalidCenter(..))));
    }

    #[test]
    fn cutoff_profile_shape() {
        let h = CutoffProfile::falling(2.0, 2.0).unwrap();
        assert_eq!(h.eval(2.5), 1.0);
        assert_eq!(h.eval(3.0), 0.0);
        assert_eq!(h.eval(10.0), 0.0);
        let mid = h.eval(2.0 + 3.0 * 2.0 / 8.0);
        assert!(mid > 0.0 && mid < 1.0);
        let up = CutoffProfile::rising_between(1.25, 1.3).unwrap();
        assert_eq!((up.eval(1.2), up.eval(1.31)), (0.0, 1.0));
        // monotone and C² across the ramp
        let f = |u: f64| h.eval(u);
        let step = 1e-3;
        let mut u = 2.3;
        while u < 3.2 {
            assert!(f(u + step) <= f(u));
            let d2 = (f(u + step) - 2.0 * f(u) + f(u - step)) / (step * step);
            let d2n = (f(u + 2.0 * step) - 2.0 * f(u + step) + f(u)) / (step * step);
            // third derivative is bounded, so consecutive estimates differ by O(step)
            assert!((d2 - d2n).abs() < 1e3 * step, "second derivative jumps near {u}");
            u += step;
        }
    }

    #[test]
    fn cutoff_on_sinogram() {
        let sino = Sinogram::from_values(GeometryId::LinearCst, vec![0.0, 1.0], vec![1.0, 2.6, 3.5], vec![1.0; 6]).unwrap();
        let cut = CutoffProfile::falling(2.0, 2.0).unwrap();
        let out = apply_cutoff(&sino, &cut, CutoffCoordinate::Y2).unwrap();
        assert_eq!(out.get(0, 0), 1.0);
        assert!(out.get(1, 1) > 0.0 && out.get(1, 1) < 1.0);
        assert_eq!(out.get(1, 2), 0.0);
        let polar = Sinogram::zeros(GeometryId::ConstantR, vec![1.0], vec![0.0]).unwrap();
        assert!(apply_cutoff(&polar, &cut, CutoffCoordinate::Y2).is_err());
    }

    #[test]
    fn cutoff_commutes_with_projection_where_flat() {
        let p = small_linear();
        let img = Image::from_fn(p.image, |x| (x.x * 2.0).cos() * x.y);
        let cut = CutoffProfile::falling(0.5, 4.0).unwrap();
        let direct = p.apply(&img).unwrap();
        let cutted = apply_cutoff(&direct, &cut, CutoffCoordinate::Y2).unwrap();
        for (i1, _) in p.layout.axis1.iter().enumerate() {
            for (i2, &y2) in p.layout.axis2.iter().enumerate() {
                if cut.eval(y2) == 1.0 {
                    assert_eq!(cutted.get(i1, i2), direct.get(i1, i2));
                }
            }
        }
    }

    #[test]
    fn linear_center_lies_on_its_circle() {
        let m = RadiusModel::LinearCst { alpha: 1.0 };
        let x = Vec2::new(0.3, 0.8);
        for k in 0..50 {
            let phi = -PI / 2.0 + TAU * (k as f64 + 0.5) / 50.0;
            let y = linear_center(phi, x, 1.0);
            assert_abs_diff_eq!((x - y).norm(), m.eval(y), epsilon = 1e-12);
        }
    }

    #[test]
    fn lowest_linear_center_is_straight_below() {
        let (alpha, a) = (1.0, 0.7);
        let x = Vec2::new(0.0, a);
        let min = (0..100_000)
            .map(|k| -PI / 2.0 + TAU * (k as f64 + 0.5) / 100_000.0)
            .map(|phi| linear_center(phi, x, alpha).y)
            .fold(f64::INFINITY, f64::min);
        let closed = a - (alpha * alpha + a * a) / (2.0 * a);
        assert_abs_diff_eq!(min, closed, epsilon = 1e-8);
    }

    #[test]
    fn linear_backprojection_of_ones_is_full_turn() {
        let image = ImageSpec::new(6, 6, (-0.5, 0.5), (0.5, 1.5)).unwrap();
        // the node nearest φ = -π/2 sends the center about 2x₂/δ² away
        let wide = linspace(-1e7, 1e7, 5);
        let sino = Sinogram::from_values(GeometryId::LinearCst, wide.clone(), wide, vec![1.0; 25]).unwrap();
        let bp = backproject_linear_cst(&sino, 1.0, image, 720).unwrap();
        for v in bp.values {
            assert_abs_diff_eq!(v, TAU, epsilon = 1e-9);
        }
    }

    #[test]
    fn linear_backprojection_of_a_spike_concentrates_on_its_circle() {
        let image = ImageSpec::new(21, 21, (-1.0, 1.0), (0.25, 2.25)).unwrap();
        let x0 = image.center(13, 7);
        let phi0: f64 = 0.4;
        let y0 = linear_center(phi0, x0, 1.0);
        let axis1 = linspace(-4.0, 4.0, 161);
        let axis2 = linspace(-2.0, 3.0, 101);
        let bump = |a: f64, b: f64| (-((a - y0.x).powi(2) + (b - y0.y).powi(2)) / 0.01).exp();
        let values = axis1.iter().flat_map(|&a| axis2.iter().map(move |&b| bump(a, b))).collect();
        let sino = Sinogram::from_values(GeometryId::LinearCst, axis1, axis2, values).unwrap();
        let bp = backproject_linear_cst(&sino, 1.0, image, 2000).unwrap();
        // every pixel on S(y0) sees y0 on its center curve, x0 included
        let (kmax, _) = bp
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        let p = image.center(kmax % image.nx, kmax / image.nx);
        let r0 = RadiusModel::LinearCst { alpha: 1.0 }.eval(y0);
        assert!(((p - y0).norm() - r0).abs() < 2.0 * image.diagonal());
        assert!(bp.values[image.index(13, 7)] > 0.3 * bp.min_max().1);
    }

    #[test]
    fn generic_backprojection_constant_r() {
        let image = ImageSpec::square(8, -0.5, 0.5).unwrap();
        let ones = Sinogram::from_values(GeometryId::ConstantR, linspace(0.0, 3.0, 31), full_turn(64), vec![1.0; 31 * 64]).unwrap();
        let m = RadiusModel::ConstantR { r: 1.25 };
        for v in backproject_generic(&ones, &m, image, 256).unwrap().values {
            assert_abs_diff_eq!(v, TAU, epsilon = 1e-12);
        }
        // equals direct quadrature of g(x + rξ)
        let g = |y: Vec2| y.x * y.x + 0.5 * y.y;
        let axis1 = linspace(0.0, 2.0, 201);
        let axis2 = full_turn(720);
        let values = axis1
            .iter()
            .flat_map(|&a| axis2.iter().map(move |&b| g(GeometryId::ConstantR.center(a, b))))
            .collect();
        let sino = Sinogram::from_values(GeometryId::ConstantR, axis1, axis2, values).unwrap();
        let bp = backproject_generic(&sino, &m, image, 400).unwrap();
        for (k, x) in image.centers() {
            let exact: f64 = (0..4000)
                .map(|j| {
                    let a = TAU * j as f64 / 4000.0;
                    g(x + 1.25 * Vec2::new(a.cos(), a.sin()))
                })
                .sum::<f64>()
                * TAU
                / 4000.0;
            assert!((bp.values[k] - exact).abs() < 2e-3 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn rotational_generic_backprojection_visits_valid_centers() {
        let m = RadiusModel::RotationalCst { alpha: 1.0 };
        let image = ImageSpec::square(5, -0.5, 0.5).unwrap();
        let sino = Sinogram::from_values(
            GeometryId::RotationalCst,
            linspace(0.25, 3.0, 56),
            full_turn(90),
            vec![1.0; 56 * 90],
        )
        .unwrap();
        let bp = backproject_generic(&sino, &m, image, 180).unwrap();
        assert!(bp.values.iter().all(|&v| v > 0.0 && v <= TAU + 1e-9));
    }
}
