//! Source and detector rotating about the target: Landweber and TV
//! reconstructions, and the change of variables to equidistant circles.
//!
//! Usage: cargo run --release --example rotational_cst [out_dir]

use std::path::PathBuf;

use spherical_radon::harmonic::EquidistantMap;
use spherical_radon::harness::{execute, prepare, GeometryConfig, Preset};
use spherical_radon::io::{export_png, export_sinogram_png};
use spherical_radon::Result;

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("srt-examples/rotational_cst"));
    std::fs::create_dir_all(&dir).expect("create output directory");

    let preset = Preset::RotationalCst;
    let cfg = preset.config();
    let prep = prepare(&cfg)?;
    export_png(&prep.truth, dir.join("truth.png"), None)?;
    export_sinogram_png(&prep.clean, dir.join("sinogram.png"), None)?;
    for (label, recon) in [("landweber", cfg.recon.clone()), ("tv", preset.tv())] {
        let out = execute(&prep, 0, &recon, None)?;
        println!("{label:<10} δ = {:.3}", out.report.delta);
        export_png(&out.reconstruction, dir.join(format!("{label}.png")), None)?;
    }

    let GeometryConfig::RotationalCst { alpha } = cfg.geometry else {
        unreachable!()
    };
    let map = EquidistantMap::new(alpha)?;
    let samples = map.map(&prep.clean)?;
    println!(
        "equidistant form: p = {:.4}, λ from {:.3} to {:.3} over {} angles",
        map.p,
        samples.lambda[0],
        samples.lambda.last().unwrap(),
        samples.theta.len()
    );
    Ok(())
}
