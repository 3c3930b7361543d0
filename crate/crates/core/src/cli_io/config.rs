//! Strict JSON configuration files.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};
use crate::nse_solver::SolverConfig;

/// Parses a JSON file into `T`; unknown keys are errors for every config type
/// in this crate.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn load_solver_config(path: &Path) -> Result<SolverConfig> {
    let cfg: SolverConfig = load_json(path)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "grid": {"n": 16},
        "nu": 0.05,
        "dt": 0.01,
        "t_end": 0.1,
        "snapshot_interval": 0.05,
        "initial_condition": {"taylor_green": {"amplitude": 1.0}}
    }"#;

    fn load(text: &str) -> Result<SolverConfig> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, text).unwrap();
        load_solver_config(&p)
    }

    #[test]
    fn accepts_valid_config() {
        let c = load(GOOD).unwrap();
        assert_eq!(c.grid.n(), 16);
        assert_eq!(c.snapshot_count().unwrap(), 3);
    }

    #[test]
    fn unknown_keys_are_errors() {
        for bad in [
            GOOD.replace("\"nu\"", "\"viscosity\""),
            GOOD.replace("{\"n\": 16}", "{\"n\": 16, \"m\": 3}"),
            GOOD.replace("\"amplitude\": 1.0", "\"amplitude\": 1.0, \"phase\": 0"),
            GOOD.replace("\"dt\": 0.01,", "\"dt\": 0.01, \"extra\": true,"),
        ] {
            let err = load(&bad).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{err}");
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let err = load(&GOOD.replace("\"n\": 16", "\"n\": 12")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = load(&GOOD.replace("0.05,\n        \"initial", "0.033,\n        \"initial"))
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_solver_config(Path::new("/nonexistent/c.json")).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
