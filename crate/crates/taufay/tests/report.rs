use taufay::cli_report::{self, plot_data, ReportError, Suite, SuiteConfig, PLOT_HEADER, SCHEMA_VERSION};

fn cfg(seed: u64) -> SuiteConfig {
    SuiteConfig { seed, ..SuiteConfig::default() }
}

#[test]
fn same_seed_same_bytes_across_thread_counts() {
    let (a, _) = cli_report::run(Suite::FayGenus0, &cfg(11), None).unwrap();
    let (b, _) = cli_report::run(Suite::FayGenus0, &cfg(11), Some(1)).unwrap();
    let (c, _) = cli_report::run(Suite::FayGenus0, &cfg(11), Some(3)).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_json(), c.to_json());
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
}

#[test]
fn seed_changes_the_sample() {
    let (a, _) = cli_report::run(Suite::FayGenus0, &cfg(1), None).unwrap();
    let (b, _) = cli_report::run(Suite::FayGenus0, &cfg(2), None).unwrap();
    let first = |r: &cli_report::Report| r.checks.iter().find(|c| c.id == "fay_genus0/n2/000").unwrap().inputs.clone();
    assert_ne!(first(&a), first(&b));
    assert!(a.all_passed() && b.all_passed());
}

#[test]
fn suite_alone_matches_its_slice_of_all() {
    let (alone, _) = cli_report::run(Suite::Decomposition, &cfg(5), None).unwrap();
    let (all, _) = cli_report::run(Suite::All, &cfg(5), None).unwrap();
    let slice: Vec<_> = all.checks.iter().filter(|c| c.id.starts_with("decomposition/")).cloned().collect();
    assert_eq!(alone.checks, slice);
}

#[test]
fn outputs_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let (rep, timings) = cli_report::run(Suite::ThetaProps, &SuiteConfig::default(), None).unwrap();
    let p = cli_report::write_outputs(&rep, &timings, dir.path()).unwrap();
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p.report_json).unwrap()).unwrap();
    assert_eq!(json["schema_version"], SCHEMA_VERSION);
    assert_eq!(json["config"]["theta_props"]["oracle_radius"], 12);
    let ids: Vec<&str> = json["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    let plot = std::fs::read_to_string(&p.plot_csv).unwrap();
    assert_eq!(plot.lines().next().unwrap(), PLOT_HEADER.join(","));
    assert!(plot.lines().count() > 2);
    let echo = std::fs::read_to_string(&p.config_json).unwrap();
    assert_eq!(SuiteConfig::from_json(&echo).unwrap(), SuiteConfig::default());
    assert!(std::fs::read_to_string(&p.timings_json).unwrap().contains("theta_props"));
}

#[test]
fn plot_data_selects_by_suite() {
    let (rep, _) = cli_report::run(Suite::AiryShift, &SuiteConfig::default(), None).unwrap();
    let csv = plot_data(&rep, Some("airy_shift")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.starts_with("airy_shift,")));
    assert!(matches!(plot_data(&rep, Some("theta_props")), Err(ReportError::MissingSuite(_))));
    let (ops, _) = cli_report::run(Suite::HirotaOps, &SuiteConfig::default(), None).unwrap();
    assert_eq!(plot_data(&ops, None).unwrap().lines().count(), 1);
}

#[test]
fn impossible_tolerance_fails_honestly() {
    let mut c = SuiteConfig::default();
    c.theta_props.tolerance = 1e-30;
    let (rep, _) = cli_report::run(Suite::ThetaProps, &c, None).unwrap();
    assert!(!rep.all_passed());
    assert!(rep.summary.failed > 0);
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let mut c = SuiteConfig::default();
    c.matrix_fay.zts.pop();
    match cli_report::run(Suite::MatrixFay, &c, None) {
        Err(ReportError::Config { pointer, .. }) => assert_eq!(pointer, "/matrix_fay/zts"),
        other => panic!("{:?}", other.map(|r| r.0.summary)),
    }
}
