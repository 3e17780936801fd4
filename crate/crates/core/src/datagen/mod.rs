//! Experiment data: normal samples with random parameters, Pearson-system
//! samples from random moments, and the fixed palette of alternatives.

pub mod experiment;
pub mod io;
pub mod palette;
pub mod pearson;

pub use experiment::{
    bin_counts, generate_experiment, generate_palette_set, random_moment_spec, sample_normal,
    sample_random_pearson, ExperimentConfig, LabeledSample, LabeledSampleSet, SampleGroup, Split,
    MAX_SAMPLE_LEN,
};
pub use io::{load_samples, read_samples, save_samples, write_samples};
pub use palette::{palette, DistributionSpec, Group};
pub use pearson::{kappa, pearson_type, sample_pearson, MomentSpec, PearsonSampler, PearsonType, REJECTION_BUDGET};
