//! Zoning and aggregation-error analysis for spatiotemporal demand data.
//!
//! The crate turns a set of located, timestamped demand events into zone
//! partitions (quadrat grids, weighted k-means zones, hierarchical grouped
//! clusters), fits deterministic and stochastic per-zone monthly demand
//! models, and quantifies how much error each aggregation introduces
//! against held-out data.
//!
//! Everything here is pure computation over in-memory collections: the
//! crate is `no_std` (with `alloc`) and all randomized procedures are
//! driven by explicit seeds, so results are a function of inputs alone.
//! File formats, CSV ingestion, and the command-line front end live in the
//! companion `zonal-cli` crate.

#![no_std]

extern crate alloc;

pub mod data;
pub mod demand;
pub mod geo;
pub mod kmeans;
pub mod metrics;
pub mod partition;
pub mod seed;
pub mod synth;

pub use data::{DemandEvent, EventDataset, FilterRules, Month, MonthRange, MonthlySeries};
pub use demand::{DemandModel, SimulationResult, ZoneDemand};
pub use geo::{GeoPoint, LonFrame};
pub use metrics::ErrorReport;
pub use partition::{Partition, PartitionKind, Zone};
pub use synth::SynthSpec;
