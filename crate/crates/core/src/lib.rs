//! Multi-feature content-based image retrieval.
//!
//! Images are described by two feature channels:
//!
//! - **texture**: mean and standard deviation of Gabor filter-bank response
//!   magnitudes ([`gabor_texture`]), z-scored per column against corpus
//!   statistics and pruned to a rough-set reduct ([`rough_reduct`]);
//! - **color**: a 72-bin HSV histogram ([`color_histogram`]) compared with
//!   the Jensen-Shannon style divergence.
//!
//! Per-channel distances to every indexed image are mapped into `[0, 1]`
//! with a 3-sigma affine transform and fused with a weighted sum
//! ([`fusion_search`]). Indexes persist in the `MFIR1` binary format
//! ([`index_store`]); [`eval_harness`] runs accuracy sweeps over synthetic
//! corpora.
//!
//! The runnable programs under `examples/` walk through each capability:
//!
//! ```bash
//! cargo run --release -p mfir --example synth_corpus -- /tmp/corpus
//! cargo run --release -p mfir --example gabor_bank
//! cargo run --release -p mfir --example color_histogram
//! cargo run --release -p mfir --example rough_reduct
//! cargo run --release -p mfir --example index_and_query -- /tmp/corpus
//! cargo run --release -p mfir --example training_sweep
//! ```

pub mod cli;
pub mod color_histogram;
pub mod error;
pub mod eval_harness;
pub mod fusion_search;
pub mod gabor_texture;
pub mod image_pipeline;
pub mod index_store;
pub mod rough_reduct;

pub use color_histogram::{extract_color_histogram, ColorHistogram, HistogramScheme};
pub use error::{Error, Result};
pub use fusion_search::{
    apply_column_stats, external_normalize, fuse, internal_normalize, jsd_bins, jsd_distance, rank,
    texture_distance, ColumnStats, DistanceProfile, FeatureMatrix, SearchHit, Weights,
};
pub use gabor_texture::{
    build_filter_bank, convolve_response, extract_texture_vector, texture_stats, GaborBankParams,
    GaborKernel, ResponseMap, TextureVector,
};
pub use image_pipeline::{load_grayscale, load_rgb, GrayImage, RgbImage, ANALYSIS_SIDE};
pub use index_store::{build_index, load_index, save_index, ImageFeatures, RetrievalIndex};
pub use rough_reduct::{
    dependency, discretize, exhaustive_reduct, greedy_reduct, indiscernibility_partition,
    lower_approximation, positive_region, InformationSystem, Partition, ReductResult,
};
