//! Writes a seeded synthetic corpus of colored gratings, one directory per class.
//!
//! ```bash
//! cargo run --release -p mfir --example synth_corpus -- /tmp/corpus [classes] [per_class] [seed]
//! ```

use mfir::eval_harness::{generate_synthetic_corpus, synthetic_class_style};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "corpus".into());
    let classes: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let per_class: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    generate_synthetic_corpus(classes, per_class, seed, &out)?;
    println!("class\tangle_deg\tfreq\thue_deg");
    for c in 0..classes {
        let (angle, freq, hue) = synthetic_class_style(c, classes);
        println!("{c}\t{:.1}\t{freq:.4}\t{hue:.1}", angle.to_degrees());
    }
    println!("wrote {} images to {out}", classes * per_class);
    Ok(())
}
