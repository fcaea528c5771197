//! Accuracy as a function of training-set and database size on a synthetic
//! corpus, printed as a TSV table.
//!
//! ```bash
//! cargo run --release -p mfir --example training_sweep
//! ```

use mfir::eval_harness::{generate_synthetic_corpus, run_experiment, ExperimentSpec};

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    generate_synthetic_corpus(5, 40, 11, dir.path())?;
    let spec = ExperimentSpec {
        training_sizes: vec![3, 6, 12],
        database_sizes: vec![60, 90],
        ..ExperimentSpec::default()
    };
    print!("{}", run_experiment(&spec, dir.path())?.to_tsv());
    Ok(())
}
