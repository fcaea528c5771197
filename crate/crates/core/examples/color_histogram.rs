//! Extracts the 72-bin HSV histogram of a few synthetic images and compares
//! them with the histogram divergence.
//!
//! ```bash
//! cargo run --release -p mfir --example color_histogram
//! ```

use mfir::{extract_color_histogram, jsd_distance, RgbImage};

fn split(w: usize, h: usize, left: [f64; 3], right: [f64; 3]) -> mfir::Result<RgbImage> {
    let px = (0..w * h)
        .map(|i| if i % w < w / 2 { left } else { right })
        .collect();
    RgbImage::new(w, h, px)
}

fn main() -> anyhow::Result<()> {
    let red_blue = extract_color_histogram(&split(8, 8, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])?)?;
    let red_green = extract_color_histogram(&split(8, 8, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])?)?;
    let gray = extract_color_histogram(&split(8, 8, [0.5; 3], [0.5; 3])?)?;

    for (name, h) in [
        ("red|blue", &red_blue),
        ("red|green", &red_green),
        ("gray", &gray),
    ] {
        let occupied: Vec<String> = h
            .bins()
            .iter()
            .enumerate()
            .filter(|(_, &b)| b > 0.0)
            .map(|(i, b)| format!("bin {i}={b:.2}"))
            .collect();
        println!("{name:10} {}", occupied.join(", "));
    }
    println!(
        "d(red|blue, red|green) = {:.6}",
        jsd_distance(&red_blue, &red_green)?
    );
    println!(
        "d(red|blue, gray)      = {:.6}",
        jsd_distance(&red_blue, &gray)?
    );
    println!(
        "d(gray, gray)          = {:.6}",
        jsd_distance(&gray, &gray)?
    );
    Ok(())
}
