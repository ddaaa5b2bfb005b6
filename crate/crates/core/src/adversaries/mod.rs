//! Hard instances, enumeration schedules and adaptive adversaries.

mod adaptive;
mod instances;
mod streams;

pub use adaptive::{
    element_memoryless_adversary, index_pair_adversary, probe_sample, window_staged_adversary, AdversaryCase,
    ElementAdversary, IndexPairAdversary, WindowOutcome, WINDOW_TUPLE_BUDGET,
};
pub use instances::{
    default_generation_counterexample, demo_collection, generation_counterexample, identification_counterexample,
    index_pair_instance, lower_density_instance, sperner_hard_instance, window_hard_instance, zero_density_partition,
    Certificate, HardInstance, Text, ZeroDensityBin, DEMO_COLLECTIONS,
};
pub use streams::{
    bad_point_interleaver, canonical_enumeration, coverage_deadline, finitely_repeating_enumeration,
    window_stage_enumeration, window_stage_start, StreamSpec, DEFAULT_BLOCK,
};
