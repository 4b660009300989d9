//! Source and detector translated along a line: Landweber and TV
//! reconstructions from noisy data, with and without the smooth cutoff at the
//! sinogram edge.
//!
//! Usage: cargo run --release --example linear_cst_reconstruction [out_dir]

use std::path::PathBuf;

use spherical_radon::harness::{execute, prepare, Preset};
use spherical_radon::io::export_png;
use spherical_radon::Result;

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("srt-examples/linear_cst"));
    std::fs::create_dir_all(&dir).expect("create output directory");

    let preset = Preset::LinearCst;
    let prep = prepare(&preset.config())?;
    for advisory in &prep.advisories {
        println!("advisory: {advisory}");
    }
    export_png(&prep.truth, dir.join("truth.png"), None)?;
    let cutoff = preset.cutoff();
    for (label, recon) in [("landweber", preset.config().recon), ("tv", preset.tv())] {
        for (tag, cut) in [("sharp", None), ("smooth", cutoff.as_ref())] {
            let out = execute(&prep, 0, &recon, cut)?;
            println!("{label:<10} {tag:<7} δ = {:.3}", out.report.delta);
            export_png(&out.reconstruction, dir.join(format!("{label}_{tag}.png")), None)?;
        }
    }
    println!("images in {}", dir.display());
    Ok(())
}
