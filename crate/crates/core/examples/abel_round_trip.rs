//! The radial equation behind the constant-radius inversion: forward and
//! inverse Abel-type transforms of one harmonic degree, and how fast noise
//! is amplified as the degree grows.
//!
//! Usage: cargo run --release --example abel_round_trip

use spherical_radon::harmonic::{forward_abel, solve_abel, AbelKernelSpec, RadialProfile};
use spherical_radon::Result;

fn main() -> Result<()> {
    let (r, d, m) = (1.25, 0.25, 200);
    let profile = RadialProfile::from_fn(d, r, m, |s| (-(s - 0.7f64).powi(2) / 0.02).exp())?;
    for n in [2, 3] {
        for l in [0, 2, 4, 8] {
            let spec = AbelKernelSpec::new(n, l, r, d)?;
            let data = forward_abel(&spec, &profile)?;
            let back = solve_abel(&spec, &data, 0.0)?;
            let err = back
                .values
                .iter()
                .zip(&profile.values)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                / profile.values.iter().map(|v| v * v).sum::<f64>().sqrt();

            // response to a unit perturbation of the data at the inner end
            let mut bump = vec![0.0; data.len()];
            bump[0] = 1e-6;
            let gain = solve_abel(&spec, &bump, 0.0)?.values.iter().fold(0.0f64, |a, v| a.max(v.abs())) / 1e-6;
            println!("n = {n}, degree {l}: round-trip error {err:.1e}, noise gain {gain:.1e}");
        }
    }
    Ok(())
}
