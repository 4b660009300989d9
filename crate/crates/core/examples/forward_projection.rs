//! Assemble the sparse circle-integral operator for each geometry, check it
//! against closed-form circle/disk arc lengths and verify its transpose.
//!
//! Usage: cargo run --release --example forward_projection [out_dir]

use std::path::PathBuf;

use spherical_radon::grid::dot;
use spherical_radon::harness::{make_phantom, PhantomSpec, Preset};
use spherical_radon::io::export_sinogram_png;
use spherical_radon::projector::{assemble_forward, circle_disk_arc_length};
use spherical_radon::{Result, Vec2};

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("srt-examples/forward_projection"));
    std::fs::create_dir_all(&dir).expect("create output directory");

    for preset in [Preset::LinearCst, Preset::RotationalCst, Preset::ConstantR] {
        let cfg = preset.config();
        let model = cfg.geometry.model();
        let spec = cfg.data_grid.spec()?;
        let layout = cfg.layout()?;
        let proj = assemble_forward(&model, spec, &layout, cfg.quad_data)?;

        // a disk in the middle of the window
        let c = Vec2::new(0.5 * (spec.x_min + spec.x_max), 0.5 * (spec.y_min + spec.y_max));
        let radius = 0.2 * (spec.x_max - spec.x_min);
        let disk = make_phantom(&PhantomSpec::disk([c.x, c.y], radius), spec)?;
        let sino = proj.apply(&disk)?;
        let (mut num, mut den) = (0.0, 0.0);
        for (k, y) in layout.centers().into_iter().enumerate() {
            let exact = circle_disk_arc_length(y, model.eval(y), c, radius);
            num += (sino.values[k] - exact).powi(2);
            den += exact * exact;
        }

        // ⟨Ax, b⟩ = ⟨x, Aᵀb⟩
        let b = sino.scaled(-0.5);
        let lhs = dot(&sino.values, &b.values);
        let rhs = dot(&disk.values, &proj.apply_transpose(&b)?.values);

        println!(
            "{:<15} {} rows, {} nonzeros, arc-length error {:.2e}, adjoint gap {:.1e}",
            preset.name(),
            proj.op.n_rows(),
            proj.op.nnz(),
            (num / den).sqrt(),
            (lhs - rhs).abs() / lhs.abs()
        );
        export_sinogram_png(&sino, dir.join(format!("{}.png", preset.name())), None)?;
    }
    println!("sinograms in {}", dir.display());
    Ok(())
}
