//! When is reconstruction from circle integrals stable? Checks the gradient
//! bound on the radius, artifact points and coverage for each built-in
//! geometry, plus a radius model that violates the bound.
//!
//! Usage: cargo run --release --example geometry_audit

use spherical_radon::geometry::{artifact_point, check_norm_inequality, preimage_centers, weak_stability_audit, RadiusModel, Region};
use spherical_radon::harness::{GeometryConfig, Preset};
use spherical_radon::{Result, Vec2};

fn main() -> Result<()> {
    for preset in [Preset::LinearCst, Preset::RotationalCst, Preset::ConstantR] {
        let model = preset.config().geometry.model();
        let audit = preset.audit();
        let report = weak_stability_audit(&model, &audit.omega, &audit.centers, 32, 32)?;
        println!(
            "{:<15} max|∇r| {:.3}  norm ok {}  no artifacts in target {}  every direction seen {}",
            preset.name(),
            report.max_grad_norm,
            report.norm_ok,
            report.bolker_ok,
            report.coverage_ok
        );
    }

    // constant radius: the second preimage mirrors x through the center
    let r = match Preset::ConstantR.config().geometry {
        GeometryConfig::ConstantR { r, .. } => r,
        _ => unreachable!(),
    };
    let model = RadiusModel::ConstantR { r };
    let x = Vec2::new(0.4, 0.3);
    let omega = Vec2::new(0.6, 0.8);
    for y in preimage_centers(&model, x, omega, None)?.centers() {
        let hat = artifact_point(&model, y, x)?;
        println!(
            "center {:?}: artifact {:?} = 2y - x {:?}",
            y.as_slice(),
            hat.as_slice(),
            (2.0 * y - x).as_slice()
        );
    }

    // |∇r| tends to 1: the bound fails uniformly on unbounded center sets
    let far = Region::annulus(Vec2::zeros(), 10.0, 1000.0);
    let (max_grad, _) = check_norm_inequality(&RadiusModel::CounterExample, &far, 256)?;
    println!("counterexample sqrt(|y|²+1) on 10 < |y| < 1000: max|∇r| {max_grad:.6}, no C < 1 bounds it on all of R²");
    let none = preimage_centers(&RadiusModel::CounterExample, Vec2::zeros(), omega, None)?;
    println!("centers of circles through the origin along ω: {}", none.centers().len());
    Ok(())
}
