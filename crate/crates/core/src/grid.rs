//! Raster and sinogram containers shared by every other module.
//!
//! Images are row-major with `values[j * nx + i]` holding pixel column `i`,
//! row `j`. Pixel centers sit at `x_min + (i + 1/2) dx`. Sinograms store
//! `values[i1 * n2 + i2]` for samples `(axis1[i1], axis2[i2])`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec2;

/// Physical extents and pixel counts of a raster, without values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageSpec {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl ImageSpec {
    pub fn new(nx: usize, ny: usize, x_range: (f64, f64), y_range: (f64, f64)) -> Result<Self> {
        let spec = Self {
            nx,
            ny,
            x_min: x_range.0,
            x_max: x_range.1,
            y_min: y_range.0,
            y_max: y_range.1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn square(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(n, n, (lo, hi), (lo, hi))
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidInput("pixel counts must be positive".into()));
        }
        if !(self.x_min < self.x_max && self.y_min < self.y_max) {
            return Err(Error::InvalidInput(format!(
                "degenerate extents x:[{}, {}] y:[{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn pixel_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn diagonal(&self) -> f64 {
        self.dx().hypot(self.dy())
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.x_min + (i as f64 + 0.5) * self.dx(), self.y_min + (j as f64 + 0.5) * self.dy())
    }

    /// Iterator over `(flat index, pixel center)` in storage order.
    pub fn centers(&self) -> impl Iterator<Item = (usize, Vec2)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (self.index(i, j), self.center(i, j))))
    }

    /// Pixel whose half-open cell `[lo, hi)` contains `p`.
    pub fn world_to_pixel(&self, p: Vec2) -> Option<(usize, usize)> {
        let fx = (p.x - self.x_min) / self.dx();
        let fy = (p.y - self.y_min) / self.dy();
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        (i < self.nx && j < self.ny && p.x < self.x_max && p.y < self.y_max).then_some((i, j))
    }

    /// Bilinear interpolation stencil over pixel-center nodes.
    ///
    /// Returns `None` outside the convex hull of pixel centers. Entries with
    /// zero weight may be present; the four weights always sum to one.
    pub fn bilinear_stencil(&self, p: Vec2) -> Option<[(usize, f64); 4]> {
        let (i0, tx) = hull_coordinate(p.x, self.x_min, self.dx(), self.nx)?;
        let (j0, ty) = hull_coordinate(p.y, self.y_min, self.dy(), self.ny)?;
        let i1 = (i0 + 1).min(self.nx - 1);
        let j1 = (j0 + 1).min(self.ny - 1);
        Some([
            (self.index(i0, j0), (1.0 - tx) * (1.0 - ty)),
            (self.index(i1, j0), tx * (1.0 - ty)),
            (self.index(i0, j1), (1.0 - tx) * ty),
            (self.index(i1, j1), tx * ty),
        ])
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

// Locates `v` between pixel-center nodes along one axis. Returns the lower
// node and the fractional offset toward the next one.
fn hull_coordinate(v: f64, lo: f64, step: f64, n: usize) -> Option<(usize, f64)> {
    let f = (v - lo) / step - 0.5;
    let last = (n - 1) as f64;
    if !(f >= 0.0 && f <= last) {
        return None;
    }
    if n == 1 {
        return Some((0, 0.0));
    }
    let k = (f.floor() as usize).min(n - 2);
    Some((k, f - k as f64))
}

/// 2-D raster of density values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Image {
    pub spec: ImageSpec,
    pub values: Vec<f64>,
}

impl Image {
    pub fn zeros(spec: ImageSpec) -> Self {
        Self {
            values: vec![0.0; spec.len()],
            spec,
        }
    }

    pub fn from_values(spec: ImageSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::ShapeMismatch {
                expected: spec.len(),
                found: values.len(),
            });
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn(spec: ImageSpec, f: impl Fn(Vec2) -> f64) -> Self {
        let values = spec.centers().map(|(_, c)| f(c)).collect();
        Self { spec, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    pub fn world_to_pixel(&self, p: Vec2) -> Option<(usize, usize)> {
        self.spec.world_to_pixel(p)
    }

    /// Bilinear interpolation at `p`; zero outside the hull of pixel centers.
    pub fn bilinear_sample(&self, p: Vec2) -> f64 {
        match self.spec.bilinear_stencil(p) {
            Some(stencil) => stencil.iter().map(|&(k, w)| w * self.values[k]).sum(),
            None => 0.0,
        }
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.values)
    }

    /// Sum of values times pixel area.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.pixel_area()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        min_max(&self.values)
    }

    /// Exact area-weighted resampling onto another grid.
    ///
    /// Each target pixel receives the mean of the source raster (as a
    /// piecewise-constant function, zero outside its extents) over its cell.
    pub fn resample_area(&self, target: ImageSpec) -> Image {
        let src = self.spec;
        let wx = overlap_weights(src.x_min, src.dx(), src.nx, target.x_min, target.dx(), target.nx);
        let wy = overlap_weights(src.y_min, src.dy(), src.ny, target.y_min, target.dy(), target.ny);
        let mut out = Image::zeros(target);
        for (tj, row) in wy.iter().enumerate() {
            for (ti, col) in wx.iter().enumerate() {
                let mut acc = 0.0;
                for &(sj, ay) in row {
                    for &(si, ax) in col {
                        acc += ax * ay * self.values[src.index(si, sj)];
                    }
                }
                out.values[target.index(ti, tj)] = acc / target.pixel_area();
            }
        }
        out
    }
}

// For each target cell along one axis, the source cells it overlaps and the
// overlap lengths.
fn overlap_weights(s0: f64, ds: f64, ns: usize, t0: f64, dt: f64, nt: usize) -> Vec<Vec<(usize, f64)>> {
    (0..nt)
        .map(|t| {
            let (a, b) = (t0 + t as f64 * dt, t0 + (t + 1) as f64 * dt);
            let first = ((a - s0) / ds).floor().max(0.0) as usize;
            let mut cells = Vec::new();
            let mut s = first;
            while s < ns {
                let (c, d) = (s0 + s as f64 * ds, s0 + (s + 1) as f64 * ds);
                if c >= b {
                    break;
                }
                let len = d.min(b) - c.max(a);
                if len > 0.0 {
                    cells.push((s, len));
                }
                s += 1;
            }
            cells
        })
        .collect()
}

/// Which transform family produced a sinogram, fixing how its axes map to
/// sphere centers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryId {
    /// axis1 = y₁, axis2 = y₂
    LinearCst,
    /// axis1 = |y|, axis2 = polar angle of y
    RotationalCst,
    /// axis1 = |y|, axis2 = polar angle of y
    ConstantR,
    /// axis1 = y₁, axis2 = y₂
    CustomRadius,
}

impl GeometryId {
    pub fn is_polar(self) -> bool {
        matches!(self, GeometryId::RotationalCst | GeometryId::ConstantR)
    }

    /// Sphere center for axis coordinates `(a1, a2)`.
    pub fn center(self, a1: f64, a2: f64) -> Vec2 {
        if self.is_polar() {
            Vec2::new(a1 * a2.cos(), a1 * a2.sin())
        } else {
            Vec2::new(a1, a2)
        }
    }

    /// Axis coordinates of a sphere center; polar angles land in `[0, 2π)`.
    pub fn axis_coords(self, y: Vec2) -> (f64, f64) {
        if self.is_polar() {
            let mut angle = y.y.atan2(y.x);
            if angle < 0.0 {
                angle += std::f64::consts::TAU;
            }
            (y.norm(), angle)
        } else {
            (y.x, y.y)
        }
    }
}

/// Sampled transform values on a geometry-specific center grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sinogram {
    pub geometry: GeometryId,
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub values: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(geometry: GeometryId, axis1: Vec<f64>, axis2: Vec<f64>) -> Result<Self> {
        let n = axis1.len() * axis2.len();
        Self::from_values(geometry, axis1, axis2, vec![0.0; n])
    }

    pub fn from_values(geometry: GeometryId, axis1: Vec<f64>, axis2: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_monotone(&axis1, "axis1")?;
        check_monotone(&axis2, "axis2")?;
        if values.len() != axis1.len() * axis2.len() {
            return Err(Error::ShapeMismatch {
                expected: axis1.len() * axis2.len(),
                found: values.len(),
            });
        }
        Ok(Self {
            geometry,
            axis1,
            axis2,
            values,
        })
    }

    /// Same axes, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::from_values(self.geometry, self.axis1.clone(), self.axis2.clone(), values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.len(), self.axis2.len())
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.axis2.len() + i2
    }

    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        self.values[self.index(i1, i2)]
    }

    /// Sphere centers in storage order.
    pub fn centers(&self) -> Vec<Vec2> {
        self.axis1
            .iter()
            .flat_map(|&a1| self.axis2.iter().map(move |&a2| self.geometry.center(a1, a2)))
            .collect()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.values)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    /// True when the angle axis of a polar sinogram is uniform and spans a
    /// full turn, so interpolation wraps around.
    pub fn angle_is_periodic(&self) -> bool {
        if !self.geometry.is_polar() || self.axis2.len() < 2 {
            return false;
        }
        let n = self.axis2.len();
        let step = (self.axis2[n - 1] - self.axis2[0]) / (n - 1) as f64;
        (step * n as f64 - std::f64::consts::TAU).abs() < 1e-9
    }

    /// Bilinear interpolation in axis coordinates; zero outside the sampled
    /// extents, except that a full-turn angle axis wraps.
    pub fn sample(&self, a1: f64, a2: f64) -> f64 {
        let Some((i, ti)) = locate(&self.axis1, a1) else {
            return 0.0;
        };
        let (j0, j1, tj) = if self.angle_is_periodic() {
            let n = self.axis2.len();
            let step = std::f64::consts::TAU / n as f64;
            let f = (a2 - self.axis2[0]).rem_euclid(std::f64::consts::TAU) / step;
            let k = (f.floor() as usize).min(n - 1);
            (k, (k + 1) % n, f - k as f64)
        } else {
            match locate(&self.axis2, a2) {
                Some((j, t)) => (j, (j + 1).min(self.axis2.len() - 1), t),
                None => return 0.0,
            }
        };
        let i1 = (i + 1).min(self.axis1.len() - 1);
        (1.0 - ti) * ((1.0 - tj) * self.get(i, j0) + tj * self.get(i, j1)) + ti * ((1.0 - tj) * self.get(i1, j0) + tj * self.get(i1, j1))
    }

    /// Sample at a sphere center.
    pub fn sample_center(&self, y: Vec2) -> f64 {
        let (a1, a2) = self.geometry.axis_coords(y);
        self.sample(a1, a2)
    }
}

// Bracketing node and fraction for a monotone axis; `None` outside.
fn locate(axis: &[f64], v: f64) -> Option<(usize, f64)> {
    let n = axis.len();
    if n == 0 || !(v >= axis[0] && v <= axis[n - 1]) {
        return None;
    }
    if n == 1 {
        return Some((0, 0.0));
    }
    let k = axis.partition_point(|&a| a <= v).saturating_sub(1).min(n - 2);
    Some((k, (v - axis[k]) / (axis[k + 1] - axis[k])))
}

fn check_monotone(axis: &[f64], name: &str) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidInput(format!("{name} is empty")));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!("{name} is not strictly increasing")));
    }
    Ok(())
}

/// `n` evenly spaced samples from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n).map(|k| start + k as f64 * step).collect()
        }
    }
}

/// `n` angles `2πk/n`, a full turn without the endpoint.
pub fn full_turn(n: usize) -> Vec<f64> {
    (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect()
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_square(n: usize) -> ImageSpec {
        ImageSpec::square(n, -1.0, 1.0).unwrap()
    }

    #[test]
    fn world_to_pixel_examples() {
        let spec = unit_square(100);
        assert_eq!(spec.world_to_pixel(Vec2::new(-0.99, -0.99)), Some((0, 0)));
        assert_eq!(spec.world_to_pixel(Vec2::new(1.0, 0.0)), None);
        // direct index arithmetic: (0 - (-1)) / 0.02 = 50
        assert_eq!(spec.world_to_pixel(Vec2::new(0.0, 0.0)), Some((50, 50)));
        assert_eq!(spec.world_to_pixel(Vec2::new(-1.0001, 0.0)), None);
        assert_eq!(spec.world_to_pixel(Vec2::new(f64::NAN, 0.0)), None);
    }

    #[test]
    fn centers_map_back_to_their_pixel() {
        let spec = ImageSpec::new(7, 5, (-0.3, 2.0), (1.0, 1.5)).unwrap();
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                assert_eq!(spec.world_to_pixel(spec.center(i, j)), Some((i, j)));
            }
        }
    }

    #[test]
    fn bilinear_reproduces_constants_and_nodes() {
        let spec = unit_square(9);
        let c = Image::from_fn(spec, |_| 3.25);
        assert_abs_diff_eq!(c.bilinear_sample(Vec2::new(0.123, -0.4)), 3.25, epsilon = 1e-14);
        let img = Image::from_fn(spec, |p| p.x * p.x - 2.0 * p.y);
        for (k, center) in spec.centers() {
            assert_abs_diff_eq!(img.bilinear_sample(center), img.values[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn bilinear_is_exact_on_affine_functions() {
        let spec = unit_square(13);
        let ramp = Image::from_fn(spec, |p| p.x);
        for &(x, y) in &[(0.1, 0.2), (-0.9, 0.7), (0.88, -0.91), (0.0, 0.0)] {
            assert_abs_diff_eq!(ramp.bilinear_sample(Vec2::new(x, y)), x, epsilon = 1e-12);
        }
    }

    #[test]
    fn bilinear_is_zero_outside_center_hull() {
        let spec = unit_square(10);
        let img = Image::from_fn(spec, |_| 1.0);
        // hull of centers is [-0.9, 0.9]^2
        assert_eq!(img.bilinear_sample(Vec2::new(-0.95, 0.0)), 0.0);
        assert_eq!(img.bilinear_sample(Vec2::new(0.0, 0.95)), 0.0);
        assert_abs_diff_eq!(img.bilinear_sample(Vec2::new(0.9, 0.9)), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn area_resampling_preserves_integral() {
        let fine = ImageSpec::square(105, -1.0, 1.0).unwrap();
        let coarse = ImageSpec::square(100, -1.0, 1.0).unwrap();
        let img = Image::from_fn(fine, |p| (3.0 * p.x).sin() + p.y * p.y);
        let down = img.resample_area(coarse);
        assert_abs_diff_eq!(down.integral(), img.integral(), epsilon = 1e-10);
        let same = img.resample_area(fine);
        for (a, b) in same.values.iter().zip(&img.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn sinogram_rejects_non_monotone_axes() {
        let err = Sinogram::zeros(GeometryId::LinearCst, vec![0.0, 1.0, 1.0], vec![0.0]);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
        let err = Sinogram::from_values(GeometryId::LinearCst, vec![0.0, 1.0], vec![0.0], vec![1.0]);
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn periodic_angle_sampling_wraps() {
        let angles = full_turn(8);
        let values: Vec<f64> = angles.iter().map(|a| a.cos()).collect();
        let s = Sinogram::from_values(GeometryId::ConstantR, vec![1.0], angles.clone(), values).unwrap();
        assert!(s.angle_is_periodic());
        let last = angles[7];
        let mid = 0.5 * (last + std::f64::consts::TAU);
        let expected = 0.5 * (last.cos() + 1.0);
        assert_abs_diff_eq!(s.sample(1.0, mid), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(s.sample(1.0, mid - std::f64::consts::TAU), expected, epsilon = 1e-12);
    }

    #[test]
    fn geometry_axis_coordinates_round_trip() {
        let y = Vec2::new(-0.4, -1.1);
        for g in [GeometryId::ConstantR, GeometryId::LinearCst] {
            let (a1, a2) = g.axis_coords(y);
            let back = g.center(a1, a2);
            assert_abs_diff_eq!((back - y).norm(), 0.0, epsilon = 1e-14);
        }
    }
}
