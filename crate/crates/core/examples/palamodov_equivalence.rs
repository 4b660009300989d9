//! Rotational Compton data equal equidistant-circle integrals of a rescaled
//! density: compare both sides at random circles through a disk.
//!
//! Usage: cargo run --release --example palamodov_equivalence

use spherical_radon::geometry::RadiusModel;
use spherical_radon::harmonic::EquidistantMap;
use spherical_radon::harness::{palamodov_check, PhantomSpec};
use spherical_radon::{ImageSpec, Result, Vec2};

fn main() -> Result<()> {
    let map = EquidistantMap::new(1.0)?;
    let model = RadiusModel::RotationalCst { alpha: 1.0 };
    let (t, theta) = (1.2, 0.7);
    let (c, radius) = map.circle(map.lambda_of_t(t)?, theta);
    let y = t * Vec2::new(theta.cos(), theta.sin());
    println!("Compton circle center {:?} radius {:.4}", y.as_slice(), model.eval(y));
    println!(
        "equidistant circle center {:?} radius {:.4} (scaled by p = {:.4})",
        c.as_slice(),
        radius,
        map.p
    );

    let disk = PhantomSpec::disk([0.1, -0.15], 0.4);
    let spec = ImageSpec::square(105, -1.0, 1.0)?;
    for alpha in [0.5, 1.0, 2.0] {
        let check = palamodov_check(alpha, &disk, spec, 200, 1024, 0)?;
        println!(
            "α = {alpha}: relative ℓ² gap {:.2e}, worst sample {:.2e}",
            check.relative_l2, check.max_relative
        );
    }
    Ok(())
}
