use std::fs;

use nseb::cli_io::{cmd_analyze, cmd_monitor, cmd_simulate, load_run, OutputFormat};
use nseb::flux_analysis::{terms_i_ii_iii, FluxConfig};
use nseb::littlewood_paley::block_norms;
use nseb::oracle;
use nseb::regularity_monitor::{jump_functional, CriterionConfig, History, Verdict};
use nseb::spectral_field::{GridSpec, SpectralField};

fn fixture() -> SpectralField {
    SpectralField::random_solenoidal(GridSpec::new(16).unwrap(), 5, 1.0, 5.0, 1.0).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs()
}

#[test]
fn pinned_terms_on_fixture() {
    let norms = block_norms(&fixture());
    let t = terms_i_ii_iii(&norms, 1, 0.5).unwrap();
    assert!(close(t.i, 3.038498023817533e-1), "{}", t.i);
    assert!(close(t.ii, 1.1855287842183466e-4), "{}", t.ii);
    assert!(close(t.iii, 3.675382135496565e-1), "{}", t.iii);
}

#[test]
fn constant_history_has_zero_jump() {
    let u = fixture().with_nu(0.1);
    let fields = (0..4)
        .map(|i| u.clone().with_time(0.1 * i as f64))
        .collect();
    let history = History::new(fields).unwrap();
    let rep = jump_functional(&history, &CriterionConfig::default()).unwrap();
    assert_eq!(rep.summary, 0.0);
    assert!(rep.series.iter().all(|&j| j == 0.0));
    assert_eq!(rep.verdict, Verdict::Satisfied);
}

fn write_config(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{"grid": {"n": 16}, "nu": 0.1, "dt": 0.005, "t_end": 0.05, "snapshot_interval": 0.025,
            "initial_condition": {"random_band_limited": {"seed": 9, "k_min": 1.0, "k_max": 5.0, "energy": 1.0}}}"#,
    )
    .unwrap();
    path
}

#[test]
fn analyze_matches_direct_evaluation() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    let manifest = cmd_simulate(&write_config(tmp.path()), &run).unwrap();
    assert_eq!(manifest.snapshots.len(), 3);

    let config = FluxConfig::default();
    let reports = cmd_analyze(&run, &config, OutputFormat::Json).unwrap();
    let (_, fields) = load_run(&run).unwrap();
    let history: Vec<_> = fields.iter().map(block_norms).collect();
    let r = oracle::remainder_double_loop(&history, config.big_q, config.eps);
    for (rep, norms) in reports.iter().zip(&history) {
        let (i, ii, iii) = oracle::terms_double_loop(norms, config.big_q, config.eps);
        assert!(close(rep.terms.i, i) && close(rep.terms.ii, ii) && close(rep.terms.iii, iii));
        assert!(close(rep.remainder, r));
        assert!(rep.ratio_iii.is_finite());
    }
    assert!(run.join("analysis/flux.json").exists());
}

#[test]
fn monitor_report_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    cmd_simulate(&write_config(tmp.path()), &run).unwrap();
    let config = CriterionConfig {
        q_tail: 1,
        ..CriterionConfig::default()
    };
    let rep = cmd_monitor(&run, &config, OutputFormat::Json).unwrap();
    let text = fs::read_to_string(run.join("monitor/report.json")).unwrap();
    let back: nseb::cli_io::MonitorReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rep);
    assert!(!run.join("monitor/tail_sup.csv").exists());
    assert!(rep.jump.is_some());
}

#[test]
fn tampered_snapshot_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    let manifest = cmd_simulate(&write_config(tmp.path()), &run).unwrap();
    let path = run.join(&manifest.snapshots[1].file);
    let mut bytes = fs::read(&path).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    fs::write(&path, bytes).unwrap();
    let err = load_run(&run).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}
