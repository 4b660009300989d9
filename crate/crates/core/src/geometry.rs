//! Radius models and the geometric checks that decide whether a sphere
//! family can be inverted stably: the gradient-norm test, artifact points,
//! preimage centers through a point in a given direction, and audits that
//! combine them over sampled regions.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GeometryId;
use crate::Vec2;

type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;

/// User-supplied radius function with its gradient.
#[derive(Clone)]
pub struct CustomRadius {
    pub name: String,
    eval: ScalarFn,
    grad: VectorFn,
}

impl CustomRadius {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
        grad: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            grad: Arc::new(grad),
        }
    }
}

impl fmt::Debug for CustomRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomRadius").field("name", &self.name).finish_non_exhaustive()
    }
}

/// Sphere radius as a function of the sphere center.
#[derive(Clone, Debug)]
pub enum RadiusModel {
    /// `r(y) = sqrt(y₂² + α²)`: source and detector translated along a line.
    LinearCst {
        alpha: f64,
    },
    /// `r(y) = sqrt(α² + (1 - |y|)²)`: source and detector rotating about the origin.
    RotationalCst {
        alpha: f64,
    },
    /// Fixed radius, as in reflection ultrasound.
    ConstantR {
        r: f64,
    },
    /// `r(y) = sqrt(|y|² + 1)`, whose gradient norm reaches 1 at infinity.
    CounterExample,
    Custom(CustomRadius),
}

/// Serializable name of a model family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    LinearCst,
    RotationalCst,
    ConstantR,
    CounterExample,
    Custom,
}

impl RadiusModel {
    pub fn family(&self) -> Family {
        match self {
            RadiusModel::LinearCst { .. } => Family::LinearCst,
            RadiusModel::RotationalCst { .. } => Family::RotationalCst,
            RadiusModel::ConstantR { .. } => Family::ConstantR,
            RadiusModel::CounterExample => Family::CounterExample,
            RadiusModel::Custom(_) => Family::Custom,
        }
    }

    /// The sinogram layout used for this family.
    pub fn geometry_id(&self) -> GeometryId {
        match self {
            RadiusModel::LinearCst { .. } => GeometryId::LinearCst,
            RadiusModel::RotationalCst { .. } => GeometryId::RotationalCst,
            RadiusModel::ConstantR { .. } => GeometryId::ConstantR,
            RadiusModel::CounterExample | RadiusModel::Custom(_) => GeometryId::CustomRadius,
        }
    }

    pub fn eval(&self, y: Vec2) -> f64 {
        match self {
            RadiusModel::LinearCst { alpha } => y.y.hypot(*alpha),
            RadiusModel::RotationalCst { alpha } => alpha.hypot(1.0 - y.norm()),
            RadiusModel::ConstantR { r } => *r,
            RadiusModel::CounterExample => (y.norm_squared() + 1.0).sqrt(),
            RadiusModel::Custom(c) => (c.eval)(y),
        }
    }

    pub fn grad(&self, y: Vec2) -> Vec2 {
        match self {
            RadiusModel::LinearCst { .. } => Vec2::new(0.0, y.y / self.eval(y)),
            RadiusModel::RotationalCst { .. } => {
                let n = y.norm();
                if n == 0.0 {
                    // not differentiable at the origin; never a valid center
                    return Vec2::zeros();
                }
                -(y / n) * (1.0 - n) / self.eval(y)
            }
            RadiusModel::ConstantR { .. } => Vec2::zeros(),
            RadiusModel::CounterExample => y / self.eval(y),
            RadiusModel::Custom(c) => (c.grad)(y),
        }
    }

    /// Checks that `y` is an admissible sphere center: positive radius and,
    /// for the rotational family, `|y| > α²/4`.
    pub fn validate_center(&self, y: Vec2) -> Result<()> {
        let r = self.eval(y);
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::NonPositiveRadius([y.x, y.y]));
        }
        if let RadiusModel::RotationalCst { alpha } = self {
            let min = alpha * alpha / 4.0;
            if y.norm() <= min {
                return Err(Error::InvalidCenter([y.x, y.y], format!("rotational centers need |y| > {min}")));
            }
        }
        Ok(())
    }

    /// Largest relative gap between `grad` and a central-difference gradient
    /// over the given probes.
    pub fn gradient_consistency(&self, probes: &[Vec2]) -> f64 {
        probes
            .iter()
            .map(|&y| {
                let h = 1e-6 * (1.0 + y.norm());
                let ex = Vec2::new(h, 0.0);
                let ey = Vec2::new(0.0, h);
                let fd = Vec2::new(
                    (self.eval(y + ex) - self.eval(y - ex)) / (2.0 * h),
                    (self.eval(y + ey) - self.eval(y - ey)) / (2.0 * h),
                );
                (fd - self.grad(y)).norm() / (1.0 + self.grad(y).norm())
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfSide {
    Above,
    Below,
}

/// Planar point sets used for reconstruction supports and center sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Rect {
        x: (f64, f64),
        y: (f64, f64),
    },
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
    Ball {
        center: [f64; 2],
        radius: f64,
    },
    HalfPlane {
        axis: Axis,
        threshold: f64,
        side: HalfSide,
    },
    /// Points lying in every member.
    Intersection {
        parts: Vec<Region>,
    },
}

const HALTON_SKIP_RECT: usize = 1;
const HALTON_SKIP_ANNULUS: usize = 101;
const HALTON_SKIP_BALL: usize = 211;
const HALTON_SKIP_INTERSECTION: usize = 307;

impl Region {
    pub fn annulus(center: Vec2, inner: f64, outer: f64) -> Self {
        Region::Annulus {
            center: [center.x, center.y],
            inner,
            outer,
        }
    }

    pub fn ball(center: Vec2, radius: f64) -> Self {
        Region::Ball {
            center: [center.x, center.y],
            radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Region::Rect { x, y } => x.0 < x.1 && y.0 < y.1,
            Region::Annulus { inner, outer, .. } => 0.0 <= *inner && inner < outer,
            Region::Ball { radius, .. } => *radius > 0.0,
            Region::HalfPlane { threshold, .. } => threshold.is_finite(),
            Region::Intersection { parts } => {
                for p in parts {
                    p.validate()?;
                }
                !parts.is_empty()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("degenerate region {self:?}")))
        }
    }

    /// Positive inside, negative outside. Exact distance to the boundary for
    /// interior points of the simple shapes.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match self {
            Region::Rect { x, y } => (p.x - x.0).min(x.1 - p.x).min(p.y - y.0).min(y.1 - p.y),
            Region::Annulus { center, inner, outer } => {
                let rho = (p - Vec2::from(*center)).norm();
                (rho - inner).min(outer - rho)
            }
            Region::Ball { center, radius } => radius - (p - Vec2::from(*center)).norm(),
            Region::HalfPlane { axis, threshold, side } => {
                let v = match axis {
                    Axis::X => p.x,
                    Axis::Y => p.y,
                };
                match side {
                    HalfSide::Above => v - threshold,
                    HalfSide::Below => threshold - v,
                }
            }
            Region::Intersection { parts } => parts.iter().map(|r| r.signed_distance(p)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Open-set membership.
    pub fn contains(&self, p: Vec2) -> bool {
        self.signed_distance(p) > 0.0
    }

    /// Membership after shrinking the region by `1e-6` of its diameter
    /// (an absolute `1e-9` for unbounded regions).
    pub fn contains_eroded(&self, p: Vec2) -> bool {
        let margin = self.diameter().map_or(1e-9, |d| 1e-6 * d);
        self.signed_distance(p) > margin
    }

    /// `None` for unbounded regions.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            Region::Rect { x, y } => Some((x.1 - x.0).hypot(y.1 - y.0)),
            Region::Annulus { outer, .. } => Some(2.0 * outer),
            Region::Ball { radius, .. } => Some(2.0 * radius),
            Region::HalfPlane { .. } => None,
            Region::Intersection { parts } => parts.iter().filter_map(Region::diameter).reduce(f64::min),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.diameter().is_some()
    }

    fn center_hint(&self) -> Option<Vec2> {
        match self {
            Region::Rect { x, y } => Some(Vec2::new(0.5 * (x.0 + x.1), 0.5 * (y.0 + y.1))),
            Region::Annulus { center, .. } | Region::Ball { center, .. } => Some(Vec2::from(*center)),
            Region::HalfPlane { .. } => None,
            Region::Intersection { parts } => parts.iter().find_map(Region::center_hint),
        }
    }

    /// Deterministic low-discrepancy sample of `n` points.
    ///
    /// When the region contains its own center, that point comes first, so
    /// symmetric special points are never missed.
    pub fn sample(&self, n: usize) -> Result<Vec<Vec2>> {
        self.validate()?;
        if !self.is_bounded() {
            return Err(Error::UnboundedRegion);
        }
        let mut out = Vec::with_capacity(n);
        if let Some(c) = self.center_hint().filter(|&c| self.contains(c)) {
            if n > 0 {
                out.push(c);
            }
        }
        match self {
            Region::Intersection { parts } => {
                let proposal = parts
                    .iter()
                    .filter(|p| p.is_bounded())
                    .min_by(|a, b| a.diameter().partial_cmp(&b.diameter()).unwrap())
                    .expect("bounded intersection has a bounded part");
                let limit = 10_000 * n.max(1);
                let mut k = HALTON_SKIP_INTERSECTION;
                while out.len() < n && k < limit + HALTON_SKIP_INTERSECTION {
                    let p = proposal.map_unit(halton(k, 2), halton(k, 3));
                    if self.contains(p) {
                        out.push(p);
                    }
                    k += 1;
                }
            }
            _ => {
                let skip = match self {
                    Region::Rect { .. } => HALTON_SKIP_RECT,
                    Region::Annulus { .. } => HALTON_SKIP_ANNULUS,
                    _ => HALTON_SKIP_BALL,
                };
                let mut k = skip;
                while out.len() < n {
                    out.push(self.map_unit(halton(k, 2), halton(k, 3)));
                    k += 1;
                }
            }
        }
        Ok(out)
    }

    // Maps the unit square onto a bounded simple region, area-uniformly.
    fn map_unit(&self, u: f64, v: f64) -> Vec2 {
        match self {
            Region::Rect { x, y } => Vec2::new(x.0 + u * (x.1 - x.0), y.0 + v * (y.1 - y.0)),
            Region::Annulus { center, inner, outer } => {
                let rho = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
                Vec2::from(*center) + rho * Vec2::new((TAU * v).cos(), (TAU * v).sin())
            }
            Region::Ball { center, radius } => {
                let rho = radius * u.sqrt();
                Vec2::from(*center) + rho * Vec2::new((TAU * v).cos(), (TAU * v).sin())
            }
            _ => unreachable!("only simple bounded regions are mapped"),
        }
    }
}

/// Radical inverse of `k` in the given base.
pub fn halton(mut k: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while k > 0 {
        f /= base as f64;
        r += f * (k % base) as f64;
        k /= base;
    }
    r
}

/// Maximum of `|∇r|` over a sample of `region`, and whether it stays below 1.
pub fn check_norm_inequality(model: &RadiusModel, region: &Region, samples: usize) -> Result<(f64, bool)> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let pts = region.sample(samples)?;
    let max = pts.iter().map(|&y| model.grad(y).norm()).fold(0.0, f64::max);
    Ok((max, max < 1.0))
}

/// Second intersection of the sphere `S(y)` with the line through `x` and
/// `z = y - r(y)∇r(y)`. Singularities at `x` can reappear there after
/// backprojection.
pub fn artifact_point(model: &RadiusModel, y: Vec2, x: Vec2) -> Result<Vec2> {
    let r = model.eval(y);
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius([y.x, y.y]));
    }
    let residual = ((x - y).norm() - r).abs();
    if residual > 1e-9 * r {
        return Err(Error::NotOnSphere { residual });
    }
    let g = model.grad(y);
    if g.norm() >= 1.0 {
        return Err(Error::NormViolated(g.norm()));
    }
    if let RadiusModel::ConstantR { .. } = model {
        return Ok(2.0 * y - x);
    }
    let z = y - r * g;
    let zx = z - x;
    if zx.norm() <= 1e-12 * r {
        return Err(Error::DegenerateArtifactLine);
    }
    let d = zx / zx.norm();
    let hat = x - 2.0 * d.dot(&(x - y)) * d;
    // pull back onto the sphere to remove rounding drift
    let off = hat - y;
    Ok(y + off * (r / off.norm()))
}

/// Outcome of the search for a center on one side of `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SideResult {
    /// Center `x ± tω` in the admissible set.
    Found { center: Vec2, t: f64 },
    /// A center exists but lies outside the admissible set.
    OutsideY { center: Vec2, t: f64 },
    /// No fixed point was reached.
    Diverged,
}

impl SideResult {
    pub fn center(&self) -> Option<Vec2> {
        match self {
            SideResult::Found { center, .. } => Some(*center),
            _ => None,
        }
    }
}

/// Centers `y = x + tω` (forward) and `y = x - tω` (backward) with `x ∈ S(y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preimages {
    pub forward: SideResult,
    pub backward: SideResult,
}

impl Preimages {
    /// Admissible centers, at most two.
    pub fn centers(&self) -> Vec<Vec2> {
        [self.forward.center(), self.backward.center()].into_iter().flatten().collect()
    }
}

const FIXED_POINT_MAX_ITER: usize = 200;
const NEWTON_MAX_ITER: usize = 50;

/// Centers of the spheres through `x` whose centers lie on the line through
/// `x` in direction `ω`, restricted to `y_set` when given.
///
/// Rotational models use the closed-form quadratic; every other model uses
/// fixed-point iteration of `t ↦ r(x ± tω)`.
pub fn preimage_centers(model: &RadiusModel, x: Vec2, omega: Vec2, y_set: Option<&Region>) -> Result<Preimages> {
    check_unit(omega)?;
    match model {
        RadiusModel::RotationalCst { alpha } => Ok(rotational_preimages(*alpha, x, omega, y_set)),
        _ => fixed_point_centers(model, x, omega, y_set),
    }
}

/// Generic solver, also usable on models that have a closed form.
pub fn fixed_point_centers(model: &RadiusModel, x: Vec2, omega: Vec2, y_set: Option<&Region>) -> Result<Preimages> {
    check_unit(omega)?;
    let side = |sign: f64| match solve_side(model, x, sign * omega) {
        Some(t) => classify(model, x + sign * t * omega, t, y_set),
        None => SideResult::Diverged,
    };
    Ok(Preimages {
        forward: side(1.0),
        backward: side(-1.0),
    })
}

fn check_unit(omega: Vec2) -> Result<()> {
    if (omega.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "direction must be a unit vector, |ω| = {}",
            omega.norm()
        )));
    }
    Ok(())
}

// Fixed point of t ↦ r(x + t·dir) on [0, ∞), polished by Newton.
fn solve_side(model: &RadiusModel, x: Vec2, dir: Vec2) -> Option<f64> {
    let mut t = model.eval(x);
    if !t.is_finite() {
        return None;
    }
    for _ in 0..FIXED_POINT_MAX_ITER {
        let next = model.eval(x + t * dir);
        let done = (next - t).abs() < 1e-12 * (1.0 + t);
        t = next;
        if done {
            break;
        }
    }
    // Slow contractions (|∇r| near 1) finish with Newton; a step that keeps
    // growing means no root, so convergence of the step is required.
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let y = x + t * dir;
        let f = t - model.eval(y);
        let df = 1.0 - model.grad(y).dot(&dir);
        if df.abs() < 1e-14 || !f.is_finite() {
            break;
        }
        let step = f / df;
        t -= step;
        if step.abs() < 1e-12 * (1.0 + t.abs()) {
            converged = true;
            break;
        }
    }
    if !converged || t < 0.0 || !t.is_finite() {
        return None;
    }
    let r = model.eval(x + t * dir);
    ((t - r).abs() <= 1e-9 * (1.0 + r)).then_some(t)
}

fn classify(model: &RadiusModel, center: Vec2, t: f64, y_set: Option<&Region>) -> SideResult {
    let admissible = y_set.is_none_or(|y| y.contains(center)) && model.validate_center(center).is_ok();
    if admissible {
        SideResult::Found { center, t }
    } else {
        SideResult::OutsideY { center, t }
    }
}

/// Roots of `4(1-a²)t² + 4a(1-α²-|x|²)t + 4|x|² - (1+α²+|x|²)² = 0` with
/// `a = x·ω`. Centers on the line satisfy it; squaring admits spurious
/// roots, so each is verified against the radius function.
pub fn rotational_quadratic_roots(alpha: f64, x: Vec2, omega: Vec2) -> Vec<f64> {
    let a = x.dot(&omega);
    let x2 = x.norm_squared();
    let c = 1.0 + alpha * alpha + x2;
    let qa = 4.0 * (1.0 - a * a);
    let qb = 4.0 * a * (1.0 - alpha * alpha - x2);
    let qc = 4.0 * x2 - c * c;
    let mut roots = Vec::with_capacity(2);
    if qa.abs() < 1e-14 {
        if qb.abs() > 0.0 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            // cancellation-free form
            let q = -0.5 * (qb + qb.signum() * disc.sqrt());
            let r1 = q / qa;
            let r2 = if q != 0.0 { qc / q } else { -r1 };
            roots.push(r1);
            roots.push(r2);
        }
    }
    roots.sort_by(|p, q| p.partial_cmp(q).unwrap());
    roots
}

fn rotational_preimages(alpha: f64, x: Vec2, omega: Vec2, y_set: Option<&Region>) -> Preimages {
    let model = RadiusModel::RotationalCst { alpha };
    let roots = rotational_quadratic_roots(alpha, x, omega);
    let check = |t: f64| {
        let y = x + t * omega;
        let r = model.eval(y);
        ((x - y).norm() - r).abs() <= 1e-9 * (1.0 + r)
    };
    let pick = |positive: bool| {
        roots
            .iter()
            .copied()
            .filter(|&t| if positive { t >= 0.0 } else { t < 0.0 })
            .find(|&t| check(t))
    };
    let forward = match pick(true) {
        Some(t) => classify(&model, x + t * omega, t, y_set),
        None => SideResult::Diverged,
    };
    let backward = match pick(false) {
        Some(t) => classify(&model, x + t * omega, -t, y_set),
        None => SideResult::Diverged,
    };
    Preimages { forward, backward }
}

/// Unit vectors at angles `2πk/n`.
pub fn directions(n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|k| {
            let a = TAU * k as f64 / n as f64;
            Vec2::new(a.cos(), a.sin())
        })
        .collect()
}

/// Artifact points generated by sampled `x ∈ Ω` and every admissible center
/// in `Y` whose sphere passes through `x`.
pub fn artifact_set_sample(model: &RadiusModel, omega_set: &Region, y_set: &Region, n_x: usize, n_dir: usize) -> Result<Vec<(Vec2, Vec2)>> {
    let xs = omega_set.sample(n_x)?;
    let dirs = directions(n_dir);
    let pairs = xs
        .par_iter()
        .map(|&x| {
            let mut out = Vec::new();
            // ω and -ω give the same line, so half the circle suffices
            for &w in dirs.iter().take(n_dir.div_ceil(2)) {
                let pre = preimage_centers(model, x, w, Some(y_set)).expect("unit direction");
                for y in pre.centers() {
                    if let Ok(hat) = artifact_point(model, y, x) {
                        out.push((x, hat));
                    }
                }
            }
            out
        })
        .collect::<Vec<_>>();
    Ok(pairs.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageWitness {
    pub x: [f64; 2],
    pub omega: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactWitness {
    pub x: [f64; 2],
    pub center: [f64; 2],
    pub artifact: [f64; 2],
}

/// Outcome of a stability audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub family: Family,
    pub max_grad_norm: f64,
    pub norm_ok: bool,
    /// The observed bound `C < 1` on `|∇r|`, when one exists.
    pub strong_norm_constant: Option<f64>,
    /// `(x, x̂)` pairs, truncated to a fixed budget.
    pub artifact_samples: Vec<([f64; 2], [f64; 2])>,
    pub bolker_ok: bool,
    pub coverage_ok: bool,
    pub coverage_witnesses: Vec<CoverageWitness>,
    pub artifact_witnesses: Vec<ArtifactWitness>,
    pub n_x: usize,
    pub n_omega: usize,
    pub notes: String,
}

impl GeometryReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

const WITNESS_BUDGET: usize = 32;
const SAMPLE_BUDGET: usize = 512;

#[derive(Default)]
struct AuditPart {
    uncovered: Vec<CoverageWitness>,
    returns: Vec<ArtifactWitness>,
    samples: Vec<([f64; 2], [f64; 2])>,
    centers: Vec<Vec2>,
    failures: usize,
}

/// Checks visibility (every sampled direction at every sampled `x ∈ Ω` has
/// a sphere center in `Y`) and the artifact condition (no artifact point of
/// a sampled incidence lands in `Ω`).
pub fn weak_stability_audit(model: &RadiusModel, omega_set: &Region, y_set: &Region, n_x: usize, n_omega: usize) -> Result<GeometryReport> {
    if n_x < 4 || n_omega < 4 {
        return Err(Error::InvalidInput("audit needs n_x, n_omega >= 4".into()));
    }
    let xs = omega_set.sample(n_x)?;
    let dirs = directions(n_omega);
    let parts: Vec<AuditPart> = xs
        .par_iter()
        .map(|&x| {
            let mut part = AuditPart::default();
            for &w in &dirs {
                let pre = preimage_centers(model, x, w, Some(y_set)).expect("unit direction");
                let centers = pre.centers();
                if centers.is_empty() {
                    part.uncovered.push(CoverageWitness {
                        x: [x.x, x.y],
                        omega: [w.x, w.y],
                    });
                }
                for y in centers {
                    part.centers.push(y);
                    match artifact_point(model, y, x) {
                        Ok(hat) => {
                            part.samples.push(([x.x, x.y], [hat.x, hat.y]));
                            if omega_set.contains_eroded(hat) {
                                part.returns.push(ArtifactWitness {
                                    x: [x.x, x.y],
                                    center: [y.x, y.y],
                                    artifact: [hat.x, hat.y],
                                });
                            }
                        }
                        Err(_) => part.failures += 1,
                    }
                }
            }
            part
        })
        .collect();

    let grad_probe: Vec<Vec2> = if y_set.is_bounded() {
        y_set.sample(n_x.max(64))?
    } else {
        parts.iter().flat_map(|p| p.centers.iter().copied()).collect()
    };
    let max_grad_norm = grad_probe.iter().map(|&y| model.grad(y).norm()).fold(0.0, f64::max);

    let n_uncovered: usize = parts.iter().map(|p| p.uncovered.len()).sum();
    let n_returns: usize = parts.iter().map(|p| p.returns.len()).sum();
    let n_failures: usize = parts.iter().map(|p| p.failures).sum();
    let mut report = GeometryReport {
        family: model.family(),
        max_grad_norm,
        norm_ok: max_grad_norm < 1.0,
        strong_norm_constant: (max_grad_norm < 1.0).then_some(max_grad_norm),
        artifact_samples: Vec::new(),
        bolker_ok: n_returns == 0,
        coverage_ok: n_uncovered == 0,
        coverage_witnesses: Vec::new(),
        artifact_witnesses: Vec::new(),
        n_x,
        n_omega,
        notes: String::new(),
    };
    for p in parts {
        let room = WITNESS_BUDGET.saturating_sub(report.coverage_witnesses.len());
        report.coverage_witnesses.extend(p.uncovered.into_iter().take(room));
        let room = WITNESS_BUDGET.saturating_sub(report.artifact_witnesses.len());
        report.artifact_witnesses.extend(p.returns.into_iter().take(room));
        let room = SAMPLE_BUDGET.saturating_sub(report.artifact_samples.len());
        report.artifact_samples.extend(p.samples.into_iter().take(room));
    }
    report.notes = format!(
        "{} of {} (x, ω) pairs without an admissible center; {} artifact points inside Ω; {} incidences without an artifact point",
        n_uncovered,
        n_x * n_omega,
        n_returns,
        n_failures
    );
    Ok(report)
}

/// `n` points on the closed half of `S(x)` (radius `r`) facing away from
/// the origin, from one endpoint through the pole to the other.
pub fn hemisphere_centers(x: Vec2, r: f64, n: usize) -> Result<Vec<Vec2>> {
    let norm = x.norm();
    if norm == 0.0 {
        return Err(Error::InvalidInput("hemisphere is undefined at the origin".into()));
    }
    let base = x.y.atan2(x.x);
    let angle = |k: usize| {
        if n == 1 {
            0.0
        } else {
            -PI / 2.0 + PI * k as f64 / (n - 1) as f64
        }
    };
    Ok((0..n)
        .map(|k| {
            let a = base + angle(k);
            x + r * Vec2::new(a.cos(), a.sin())
        })
        .collect())
}
