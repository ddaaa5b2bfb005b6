//! Naturals, set expressions over cell systems, languages and collections,
//! finiteness and density probes, and enumeration streams.

pub mod cells;
mod element;
pub mod language;
pub mod probe;
pub mod registry;
mod runs;
pub mod setexpr;
pub mod stream;

pub use cells::{block_boundary, CellDensity, CellSystem, Core, Density, CELL_BUDGET};
pub use element::Element;
pub use language::{signature, Collection, CountableFamily, Language};
pub use probe::{
    almost_compare, almost_subset, count_below, default_schedule, empirical_density, exact_upper_density, finiteness,
    is_subset, nth_element, AlmostOrder, DensityEstimate, FinitenessVerdict, ProbePolicy, Verdict, DEFAULT_BURN_IN,
    DEFAULT_HORIZON, DEFAULT_WITNESS_COUNT, HORIZON_ENV,
};
pub use runs::RunSet;
pub use setexpr::{OpaqueSet, SetExpr, Structured, CORRECTION_CAP};
pub use stream::{EnumerationStream, RepetitionPolicy, StreamSource};
