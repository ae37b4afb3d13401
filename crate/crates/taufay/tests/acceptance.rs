//! Acceptance criteria, run against the default configuration. Each test
//! prints one PASS/FAIL line.

use std::sync::OnceLock;

use taufay::cli_report::{self, CheckRecord, Comparison, Report, Suite, SuiteConfig};

fn report() -> &'static Report {
    static REPORT: OnceLock<Report> = OnceLock::new();
    REPORT.get_or_init(|| cli_report::run(Suite::All, &SuiteConfig::default(), None).expect("suite run").0)
}

fn criterion(n: u32, name: &str, min_checks: usize, select: impl Fn(&str) -> bool) -> Vec<&'static CheckRecord> {
    let sel: Vec<&CheckRecord> = report().checks.iter().filter(|c| select(&c.id)).collect();
    let failed: Vec<&str> = sel.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
    let worst = sel
        .iter()
        .filter(|c| c.comparison == Comparison::Below)
        .filter_map(|c| c.residual)
        .fold(0.0, f64::max);
    let ok = sel.len() >= min_checks && failed.is_empty();
    println!(
        "criterion {n:02} {}: {name} ({} checks, worst residual {worst:.1e})",
        if ok { "PASS" } else { "FAIL" },
        sel.len()
    );
    assert!(sel.len() >= min_checks, "expected at least {min_checks} checks, found {}", sel.len());
    assert!(failed.is_empty(), "failed: {failed:?}");
    sel
}

fn count(sel: &[&CheckRecord], prefix: &str) -> usize {
    sel.iter().filter(|c| c.id.starts_with(prefix)).count()
}

#[test]
fn criterion_01_dmu_goldens() {
    criterion(1, "D_mu canonical forms", 6, |id| id.starts_with("hirota_ops/dmu/"));
}

#[test]
fn criterion_02_kp_derivation() {
    let sel = criterion(2, "KP from D_(0,0,1), bilinear and logarithmic", 4, |id| id.starts_with("hirota_ops/kp/"));
    assert_eq!(count(&sel, "hirota_ops/kp/soliton_first_derivative_variant"), 1);
}

#[test]
fn criterion_03_hirota_on_t1() {
    let sel = criterion(3, "Hirota equations with 1 + sum j mu_j <= 7 and KP on T_1", 31, |id| {
        id.starts_with("hirota_formal/hirota_n1/") || id == "hirota_formal/kp/n1"
    });
    // Partitions of 0..=6.
    assert_eq!(count(&sel, "hirota_formal/hirota_n1/"), 30);
    assert!(sel.iter().all(|c| c.tolerance <= 1e-10));
}

#[test]
fn criterion_04_formal_fay_on_t2() {
    let sel = criterion(4, "two-point Fay on T_2 as a formal series", 2, |id| id.starts_with("hirota_formal/fay_n2/"));
    assert!(sel.iter().any(|c| c.inputs["truncation"] == 4));
    assert!(sel.iter().all(|c| c.tolerance <= 1e-9));
}

#[test]
fn criterion_05_genus_zero_fay() {
    let sel = criterion(5, "seeded genus-0 Fay for n = 2, 3, 4 and the -1/12 case", 62, |id| {
        id.starts_with("fay_genus0/")
    });
    for n in [2, 3, 4] {
        assert_eq!(count(&sel, &format!("fay_genus0/n{n}/")), 20);
    }
    assert_eq!(count(&sel, "fay_genus0/hand/"), 2);
    assert!(sel.iter().all(|c| c.tolerance <= 1e-12));
}

#[test]
fn criterion_06_genus_one_fay() {
    let sel = criterion(6, "genus-1 Fay at tau = i and 0.3+0.8i, zero and integer-residue forms", 24, |id| {
        id.starts_with("fay_genus1/tau") && id.contains("/omega_") && id.contains("/n")
    });
    for tau in 0..2 {
        for omega in ["zero", "integer"] {
            for n in [2, 3] {
                assert!(count(&sel, &format!("fay_genus1/tau{tau}/omega_{omega}/n{n}/")) >= 1);
            }
        }
    }
    let taus = &SuiteConfig::default().fay_genus1.taus;
    assert_eq!((taus[0].re, taus[0].im), (0.0, 1.0));
    assert_eq!((taus[1].re, taus[1].im), (0.3, 0.8));
}

#[test]
fn criterion_07_theta_properties() {
    let sel = criterion(7, "theta parity, quasi-periodicity, odd zero and theta(0; i)", 10, |id| {
        id.starts_with("theta_props/")
    });
    assert_eq!(count(&sel, "theta_props/theta0_at_i/literal"), 1);
}

#[test]
fn criterion_08_szego_monodromy() {
    let sel = criterion(8, "Szego monodromy trivial for integer residues, broken for the control", 3, |id| {
        (id.starts_with("fay_genus1/tau") && id.ends_with("/monodromy")) || id.starts_with("fay_genus1/control/")
    });
    assert_eq!(count(&sel, "fay_genus1/control/"), 1);
}

#[test]
fn criterion_09_decomposition() {
    let sel = criterion(9, "six-component form decomposition round trip", 1, |id| id.starts_with("decomposition/"));
    for c in sel {
        assert_eq!(c.inputs["samples"], 100);
        assert_eq!(c.inputs["form"].as_array().map(|a| a.len()), Some(6));
    }
}

#[test]
fn criterion_10_airy_family() {
    let sel = criterion(10, "shifted Airy curve: series, curve equation, times, radius", 15, |id| {
        id.starts_with("airy_shift/")
    });
    assert_eq!(count(&sel, "airy_shift/job0/series/"), 10);
    let curve: Vec<_> = sel.iter().filter(|c| c.id.ends_with("/curve_equation")).collect();
    assert!(curve.len() >= 2 && curve.iter().all(|c| c.inputs["z_samples"].as_array().map(|a| a.len()) == Some(20)));
    assert_eq!(count(&sel, "airy_shift/job0/radius/outside"), 1);
}

#[test]
fn criterion_11_matrix_model() {
    let sel = criterion(11, "matrix-model Fay for N = 2, 3, Heine against eigenvalues, T_2 = 4 pi", 10, |id| {
        id.starts_with("matrix_fay/")
    });
    for pot in ["gaussian", "quartic"] {
        for n in [2, 3] {
            assert_eq!(count(&sel, &format!("matrix_fay/{pot}/n{n}/fay")), 1);
            assert_eq!(count(&sel, &format!("matrix_fay/{pot}/n{n}/heine_vs_eigenvalues")), 1);
        }
    }
    assert_eq!(count(&sel, "matrix_fay/gaussian_n2_normalization/"), 2);
}

#[test]
fn criterion_12_reproducing_and_wn() {
    let sel = criterion(12, "reproducing kernel (formal and genus-1) and W_n for n = 2, 3", 8, |id| {
        id.starts_with("hirota_formal/reproducing/")
            || id.starts_with("hirota_formal/wn/")
            || (id.starts_with("fay_genus1/") && id.ends_with("/reproducing"))
    });
    assert_eq!(count(&sel, "hirota_formal/reproducing/trunc04"), 1);
    assert_eq!(count(&sel, "hirota_formal/reproducing/trunc08"), 1);
    assert_eq!(count(&sel, "hirota_formal/wn/n2"), 1);
    assert_eq!(count(&sel, "hirota_formal/wn/n3"), 1);
}
