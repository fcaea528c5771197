//! Builds the default Gabor bank, prints its layout, and checks which filter
//! responds most strongly to a grating tuned to each filter in turn.
//!
//! ```bash
//! cargo run --release -p mfir --example gabor_bank
//! ```

use std::f64::consts::PI;

use mfir::{build_filter_bank, extract_texture_vector, GaborBankParams, GrayImage};

fn grating(side: usize, freq: f64, angle: f64) -> GrayImage {
    let (sin, cos) = angle.sin_cos();
    GrayImage::from_fn(side, side, |x, y| {
        0.5 + 0.5 * (2.0 * PI * freq * (x as f64 * cos + y as f64 * sin)).cos()
    })
}

fn main() -> anyhow::Result<()> {
    let params = GaborBankParams::default();
    let bank = build_filter_bank(&params)?;
    println!("scale\torient\tfreq\tangle_deg\tsigma_x\tsigma_y\tpeak_filter");
    for kernel in &bank {
        let img = grating(128, kernel.center_frequency, kernel.angle);
        let tv = extract_texture_vector(&img, &bank)?;
        let (best, _) = (0..bank.len())
            .map(|i| (i, tv.as_slice()[2 * i]))
            .fold((0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
        println!(
            "{}\t{}\t{:.4}\t{:.1}\t{:.2}\t{:.2}\t({}, {})",
            kernel.scale,
            kernel.orientation,
            kernel.center_frequency,
            kernel.angle.to_degrees(),
            kernel.sigma_x,
            kernel.sigma_y,
            bank[best].scale,
            bank[best].orientation,
        );
    }
    Ok(())
}
