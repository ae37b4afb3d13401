//! Report records and their JSON / CSV renderings.

use serde::{Deserialize, Serialize};

use super::config::SuiteConfig;
use super::ReportError;

pub const SCHEMA_VERSION: &str = "taufay-report/1";

/// Header of the plot-data CSV: suite, series name, abscissa, ordinate.
pub const PLOT_HEADER: [&str; 4] = ["suite", "series", "x", "y"];

/// How a residual is compared with its tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// residual < tolerance.
    Below,
    /// residual > tolerance, used for controls that must fail.
    Above,
    /// residual == 0, used for exact symbolic comparisons.
    Exact,
}

impl Comparison {
    pub fn holds(self, residual: f64, tolerance: f64) -> bool {
        match self {
            Comparison::Below => residual < tolerance,
            Comparison::Above => residual > tolerance,
            Comparison::Exact => residual == 0.0,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Comparison::Below => "below",
            Comparison::Above => "above",
            Comparison::Exact => "exact",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    /// Plain-language name of the identity or property checked.
    pub anchor: String,
    pub inputs: serde_json::Value,
    /// None when the computation itself failed.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckRecord {
    pub fn new<E: std::fmt::Display>(
        id: impl Into<String>,
        anchor: impl Into<String>,
        inputs: serde_json::Value,
        outcome: Result<f64, E>,
        tolerance: f64,
        comparison: Comparison,
    ) -> Self {
        let (residual, error) = match outcome {
            Ok(r) if r.is_nan() => (None, Some("residual is NaN".to_string())),
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = residual.is_some_and(|r| comparison.holds(r, tolerance));
        Self {
            id: id.into(),
            anchor: anchor.into(),
            inputs,
            residual,
            tolerance,
            comparison,
            pass,
            error,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub suite: String,
    pub series: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub suite: String,
    /// Suites actually run, in run order.
    pub suites: Vec<String>,
    pub seed: u64,
    pub config: SuiteConfig,
    pub summary: Summary,
    /// Sorted by id.
    pub checks: Vec<CheckRecord>,
    #[serde(skip)]
    pub plot: Vec<PlotPoint>,
}

impl Report {
    pub fn new(
        suite: &str,
        suites: Vec<String>,
        config: SuiteConfig,
        mut checks: Vec<CheckRecord>,
        plot: Vec<PlotPoint>,
    ) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let passed = checks.iter().filter(|c| c.pass).count();
        Self {
            schema_version: SCHEMA_VERSION.into(),
            suite: suite.into(),
            suites,
            seed: config.seed,
            summary: Summary {
                total: checks.len(),
                passed,
                failed: checks.len() - passed,
            },
            config,
            checks,
            plot,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    /// One row per check: schema_version, id, anchor, comparison, residual,
    /// tolerance, pass, error, inputs (compact JSON).
    pub fn to_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "schema_version",
            "id",
            "anchor",
            "comparison",
            "residual",
            "tolerance",
            "pass",
            "error",
            "inputs",
        ])?;
        for c in &self.checks {
            w.write_record([
                SCHEMA_VERSION,
                &c.id,
                &c.anchor,
                c.comparison.as_str(),
                &c.residual.map(|r| format!("{r:e}")).unwrap_or_default(),
                &format!("{:e}", c.tolerance),
                if c.pass { "true" } else { "false" },
                c.error.as_deref().unwrap_or(""),
                &serde_json::to_string(&c.inputs)?,
            ])?;
        }
        into_string(w)
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String, ReportError> {
    let bytes = w.into_inner().map_err(|e| ReportError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Plot series as CSV with header [`PLOT_HEADER`]. With `suite` set only
/// that suite's rows are kept, and a suite that was not run is an error.
/// A report without plot data yields the header alone.
pub fn plot_data(report: &Report, suite: Option<&str>) -> Result<String, ReportError> {
    if let Some(s) = suite {
        if !report.suites.iter().any(|r| r == s) {
            return Err(ReportError::MissingSuite(s.to_string()));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PLOT_HEADER)?;
    for p in report.plot.iter().filter(|p| suite.is_none_or(|s| p.suite == s)) {
        w.write_record([&p.suite, &p.series, &format!("{:e}", p.x), &format!("{:e}", p.y)])?;
    }
    into_string(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn record(id: &str, r: Result<f64, &str>) -> CheckRecord {
        CheckRecord::new(id, "a", json!({}), r, 1e-3, Comparison::Below)
    }

    #[test]
    fn checks_are_sorted_and_counted() {
        let rep = Report::new(
            "x",
            vec!["x".into()],
            SuiteConfig::default(),
            vec![record("b", Ok(1.0)), record("a", Ok(0.0)), record("c", Err("boom"))],
            vec![],
        );
        let ids: Vec<_> = rep.checks.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(rep.summary, Summary { total: 3, passed: 1, failed: 2 });
        assert!(!rep.all_passed());
        assert_eq!(rep.checks[2].error.as_deref(), Some("boom"));
        let csv = rep.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("schema_version,id,"));
    }

    #[test]
    fn nan_never_passes() {
        let r = CheckRecord::new("n", "a", json!(null), Ok::<f64, String>(f64::NAN), 1.0, Comparison::Above);
        assert!(!r.pass);
    }

    #[test]
    fn empty_plot_is_header_only() {
        let rep = Report::new("x", vec!["x".into()], SuiteConfig::default(), vec![], vec![]);
        assert_eq!(plot_data(&rep, None).unwrap(), "suite,series,x,y\n");
        assert!(matches!(plot_data(&rep, Some("y")), Err(ReportError::MissingSuite(_))));
    }
}
