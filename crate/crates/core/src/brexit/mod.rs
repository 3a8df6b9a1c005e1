//! A scaled-down referendum experiment on a geographic social network.
//!
//! Region-level vote counts are expanded into a random sub-election of
//! individual voters placed at their region's centroid. Voters connect
//! through [`crate::genesis::sample_geo_graph_attempts`] and perceive the
//! outcome by mixing their neighbourhood's vote shares with a noisy view of
//! the national shares. The output is the fraction of the losing side that
//! believes its candidate won.

mod ingest;
mod sweep;

pub use ingest::{
    ingest, ingest_readers, Coverage, IngestReport, RegionRecord, MAX_MALFORMED_FRACTION,
};
pub use sweep::{
    noisy_global, noisy_global_from, perceive_mixed, run_sweep, sample_subelection,
    write_curve_csv, CurvePoint, ObservationMix, SweepConfig, LEAVE, REMAIN,
};
