//! Filtered backprojection with a sharply cropped sinogram draws streaks
//! along the circles at the crop; a smooth cutoff removes them.
//!
//! Usage: cargo run --release --example fbp_artifacts [out_dir]

use std::path::PathBuf;

use spherical_radon::harness::{compare_streaks, execute, prepare, Preset};
use spherical_radon::io::export_png;
use spherical_radon::recon::{Method, ReconConfig};
use spherical_radon::Result;

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("srt-examples/fbp_artifacts"));
    std::fs::create_dir_all(&dir).expect("create output directory");

    let fbp = ReconConfig {
        method: Method::Fbp,
        ..ReconConfig::landweber(1)
    };
    for preset in [Preset::LinearCst, Preset::ConstantR] {
        let mut cfg = preset.config();
        cfg.gamma = 0.0;
        let prep = prepare(&cfg)?;
        let (cutoff, edge) = (preset.cutoff().expect("cutoff"), preset.edge().expect("edge"));
        for (tag, cut) in [("sharp", None), ("smooth", Some(&cutoff))] {
            let out = execute(&prep, 0, &fbp, cut)?;
            export_png(&out.reconstruction, dir.join(format!("{}_{tag}.png", preset.name())), None)?;
        }
        let cmp = compare_streaks(&prep, &cutoff, &edge)?;
        println!(
            "{:<11} share of the image from the crop band: sharp {:.4}, smooth {:.4}, ratio {:.3}",
            preset.name(),
            cmp.sharp,
            cmp.smooth,
            cmp.ratio()
        );
    }
    println!("images in {}", dir.display());
    Ok(())
}
