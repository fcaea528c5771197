//! Indexes a corpus directory, saves and reloads the index, then queries it
//! with a few of its own images and prints the rankings and overall accuracy.
//!
//! ```bash
//! cargo run --release -p mfir --example synth_corpus -- /tmp/corpus
//! cargo run --release -p mfir --example index_and_query -- /tmp/corpus
//! ```

use std::path::PathBuf;

use mfir::eval_harness::evaluate_queries;
use mfir::index_store::{extract_corpus, scan_corpus, FeatureExtractor, IndexEntry};
use mfir::{build_index, load_index, rank, save_index, GaborBankParams, Weights};

fn main() -> anyhow::Result<()> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    let params = GaborBankParams::default();

    let index = build_index(&root, params, 4)?;
    println!(
        "indexed {} images, {} columns; reduct keeps {} of {} texture columns (gamma {:.3})",
        index.len(),
        index.matrix().cols(),
        index.retained().len(),
        index.texture_len(),
        index.gamma_full()
    );

    let file = std::env::temp_dir().join("mfir-example.idx");
    save_index(&index, &file)?;
    let index = load_index(&file)?;

    let extractor = FeatureExtractor::new(*index.params(), index.scheme())?;
    let files = scan_corpus(&root)?;
    for f in files.iter().step_by(files.len().div_ceil(3).max(1)) {
        let features = extractor.extract_path(&f.path)?;
        println!("\nquery {} ({})", f.relative, f.label);
        for (i, hit) in rank(&features, &index, 5, &Weights::default())?
            .iter()
            .enumerate()
        {
            println!(
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}",
                i + 1,
                hit.fused,
                hit.texture_norm,
                hit.color_norm,
                hit.label,
                hit.path
            );
        }
    }

    let (queries, _): (Vec<IndexEntry>, _) = extract_corpus(&files, &extractor);
    let eval = evaluate_queries(&index, &queries, 10, &Weights::default())?;
    println!(
        "\noverall accuracy {:.3}, mean precision@10 {:.3}",
        eval.overall_accuracy, eval.mean_precision
    );
    Ok(())
}
