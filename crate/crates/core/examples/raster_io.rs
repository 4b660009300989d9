//! Rasterize a phantom, store it in the binary raster format, read it back
//! and render it as PNG.
//!
//! Usage: cargo run --release --example raster_io [out_dir]

use std::path::PathBuf;

use spherical_radon::harness::{make_phantom, PhantomSpec};
use spherical_radon::io::{export_png, read_raster, write_raster, Raster};
use spherical_radon::{ImageSpec, Result};

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("srt-examples/raster_io"));
    std::fs::create_dir_all(&dir).expect("create output directory");

    let spec = ImageSpec::square(105, -1.0, 1.0)?;
    let disk = make_phantom(&PhantomSpec::disk([0.2, -0.1], 0.5), spec)?;
    let exact = std::f64::consts::PI * 0.25;
    println!("disk mass {:.6} (area {:.6})", disk.integral(), exact);

    let half = make_phantom(&PhantomSpec::half_annulus([0.0, 0.0], 0.3, 0.8, [0.0, std::f64::consts::PI]), spec)?;
    let path = dir.join("half_annulus.srk");
    write_raster(&Raster::Image(half.clone()), &path)?;
    let back = read_raster(&path)?.into_image()?;
    assert_eq!(back, half);
    println!("round trip through {} is exact", path.display());

    export_png(&half, dir.join("half_annulus.png"), None)?;
    export_png(&disk, dir.join("disk.png"), Some((0.0, 1.0)))?;
    println!("wrote PNGs to {}", dir.display());
    Ok(())
}
