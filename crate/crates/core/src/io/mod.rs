//! File formats: numeric CSV tables, the `RSNP1` binary snapshot format,
//! and the `ROMAS1` single-file model archive.
//!
//! All floating-point CSV output uses Rust's shortest round-trip scientific
//! notation, so rerunning a deterministic command rewrites byte-identical
//! files.

pub mod archive;
pub mod csv;
pub mod rsnp;

pub use archive::{load_model, save_model};
pub use csv::{
    read_params_csv, read_snapshot_csv, write_decay_csv, write_eigenvalue_csv,
    write_fold_report_csv, write_mean_report_csv, write_params_csv, write_singular_values_csv,
    write_snapshot_csv, write_summary_csv,
};
pub use rsnp::{read_snapshot_matrix, read_rsnp_file, write_rsnp_file};
