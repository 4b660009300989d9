//! Fixed-radius circles centered outside the target: iterative
//! reconstruction of the half annulus, and the harmonic inversion of a
//! radial annulus from noiseless data.
//!
//! Usage: cargo run --release --example constant_r_inversion [out_dir]

use std::path::PathBuf;

use spherical_radon::harmonic::InversionOptions;
use spherical_radon::harness::{execute, invert_prepared, prepare, Preset, RADIAL_INVERSION};
use spherical_radon::io::export_png;
use spherical_radon::Result;

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("srt-examples/constant_r"));
    std::fs::create_dir_all(&dir).expect("create output directory");

    let preset = Preset::ConstantR;
    let prep = prepare(&preset.config())?;
    for (label, recon) in [("landweber", preset.config().recon), ("tv", preset.tv())] {
        let out = execute(&prep, 0, &recon, None)?;
        println!("{label:<10} δ = {:.3}", out.report.delta);
        export_png(&out.reconstruction, dir.join(format!("{label}.png")), None)?;
    }

    let radial = prepare(&Preset::ConstantRRadial.config())?;
    export_png(&radial.truth, dir.join("radial_truth.png"), None)?;
    // without regularization high degrees amplify quadrature error
    for opts in [
        InversionOptions {
            l_max: 4,
            ..RADIAL_INVERSION
        },
        InversionOptions {
            l_max: 16,
            ridge: 0.0,
            ..RADIAL_INVERSION
        },
        RADIAL_INVERSION,
    ] {
        let run = invert_prepared(&radial, opts)?;
        println!(
            "harmonic inversion L = {:>2}, ridge {:.0e}: error on annulus {:.4}",
            opts.l_max, opts.ridge, run.error
        );
        if opts == RADIAL_INVERSION {
            export_png(&run.image, dir.join("radial_inversion.png"), None)?;
        }
    }
    Ok(())
}
