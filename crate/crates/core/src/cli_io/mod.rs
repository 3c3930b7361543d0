//! File formats and command implementations behind the `nseb` binary.

mod commands;
mod config;
mod manifest;
mod selftest;
mod snapshot;
mod tidy;

pub use commands::{
    cmd_analyze, cmd_monitor, cmd_simulate, load_run, snapshot_file_name, MonitorReport,
    OutputFormat, ANALYSIS_DIR, ENERGY_FILE, MONITOR_DIR, SNAPSHOT_DIR,
};
pub use config::{load_json, load_solver_config};
pub use manifest::{
    blob_hash, hash_file, ArtifactEntry, RunManifest, SnapshotEntry, MANIFEST_FILE,
};
pub use selftest::{run_selftest, SelfCheck};
pub use snapshot::{
    read_snapshot, read_snapshot_file, scaled_divergence, write_snapshot, SnapshotFile,
    SnapshotHeader, DIVERGENCE_WARN, MAGIC, VERSION,
};
pub use tidy::{write_rows, Quantity, Row};

/// Runs the self-test suite; equivalent to `nseb selftest`.
pub fn cmd_selftest() -> Vec<SelfCheck> {
    run_selftest()
}
