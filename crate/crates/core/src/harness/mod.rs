//! Games between generators and streams, and the checks run on them.

pub mod bruteforce;
pub mod classify;
pub mod experiment;
pub mod game;
pub mod report;

pub use bruteforce::{bruteforce_incremental, pigeonhole, BruteforceReport, Candidate, Pigeonhole, SuccessCriterion};
pub use classify::{classify_single_example, SingleExampleClass};
pub use experiment::{
    run_experiment, write_artifacts, ExperimentConfig, ExperimentOutcome, Overrides, TranscriptFormat,
};
pub use game::{
    density_profile, detect_convergence, run_game, DensityProfile, DensitySample, GameConfig, GameSummary,
    GameTranscript, IndexValidity, RoundRecord, Sampling,
};
pub use report::{csv_string, density_svg, write_csv};
