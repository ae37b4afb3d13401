//! Run configuration. Every section has defaults, unknown keys are rejected,
//! and errors carry the JSON-pointer path of the offending value.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divisors::Divisor;
use crate::riemann_geometry::ComplexRecord;
use crate::spectral_curve::{ShiftJob, ShiftTolerances, DEFAULT_STEPS};

use super::ReportError;

fn c(re: f64, im: f64) -> ComplexRecord {
    ComplexRecord { re, im }
}

/// Full effective configuration; echoed verbatim into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub hirota_ops: HirotaOpsConfig,
    pub hirota_formal: HirotaFormalConfig,
    pub fay_genus0: FayGenus0Config,
    pub fay_genus1: FayGenus1Config,
    pub theta_props: ThetaPropsConfig,
    pub airy_shift: AiryShiftConfig,
    pub matrix_fay: MatrixFayConfig,
    pub decomposition: DecompositionConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_611,
            hirota_ops: Default::default(),
            hirota_formal: Default::default(),
            fay_genus0: Default::default(),
            fay_genus1: Default::default(),
            theta_props: Default::default(),
            airy_shift: Default::default(),
            matrix_fay: Default::default(),
            decomposition: Default::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Golden {
    pub mu: Vec<u32>,
    pub expected: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HirotaOpsConfig {
    pub goldens: Vec<Golden>,
    /// Truncation of the one-soliton series used to tell the KP forms apart.
    pub soliton_truncation: u32,
    pub soliton_tolerance: f64,
    pub variant_threshold: f64,
}

impl Default for HirotaOpsConfig {
    fn default() -> Self {
        let g = |mu: &[u32], e: &str| Golden { mu: mu.to_vec(), expected: e.into() };
        Self {
            goldens: vec![
                g(&[0, 0, 0], "D1"),
                g(&[1, 0, 0], "-2*D2"),
                g(&[0, 1, 0], "-1/6*D1^3 - D3"),
                g(&[2, 0, 0], "-1/6*D1^3 + 2*D3"),
                g(&[0, 0, 1], "-1/36*D1^4 - 1/3*D1^2*D2 + 1/3*D1*D3 - 1/3*D2^2 - 2/3*D4"),
                g(&[2, 1, 0], "-1/60*D1^5 + 1/2*D1^2*D3 - 2*D5"),
            ],
            soliton_truncation: 8,
            soliton_tolerance: 1e-12,
            variant_threshold: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HirotaFormalConfig {
    /// Potential times [t₁, t₂, …] of the matrix model generating the series.
    pub potential: Vec<ComplexRecord>,
    pub moments: usize,
    pub truncation: u32,
    /// Largest 1 + Σ j·μⱼ checked.
    pub max_degree: u32,
    pub fay_truncations: Vec<u32>,
    pub reproducing_truncations: Vec<u32>,
    pub wn_orders: Vec<usize>,
    pub hirota_tolerance: f64,
    pub kp_tolerance: f64,
    pub fay_tolerance: f64,
    pub reproducing_tolerance: f64,
    pub wn_tolerance: f64,
}

impl Default for HirotaFormalConfig {
    fn default() -> Self {
        Self {
            potential: vec![c(0.0, 0.0), c(1.0, 0.0)],
            moments: 14,
            truncation: 8,
            max_degree: 7,
            fay_truncations: vec![4, 8],
            reproducing_truncations: vec![4, 8],
            wn_orders: vec![2, 3],
            hirota_tolerance: 1e-10,
            kp_tolerance: 1e-10,
            fay_tolerance: 1e-9,
            reproducing_tolerance: 1e-10,
            wn_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FayGenus0Config {
    pub n_values: Vec<usize>,
    pub configs_per_n: usize,
    /// Points are drawn uniformly from [−w, w]².
    pub box_half_width: f64,
    pub min_separation: f64,
    pub tolerance: f64,
}

impl Default for FayGenus0Config {
    fn default() -> Self {
        Self {
            n_values: vec![2, 3, 4],
            configs_per_n: 20,
            box_half_width: 2.0,
            min_separation: 0.25,
            tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FayGenus1Config {
    pub taus: Vec<ComplexRecord>,
    pub origin: ComplexRecord,
    pub n_values: Vec<usize>,
    pub configs_per_case: usize,
    /// Points o + s + tτ with s, t ∈ [margin, 1 − margin].
    pub margin: f64,
    pub min_separation: f64,
    /// Lattice coordinates (s, t) of the residue +1 and −1 poles of Ω.
    pub form_poles: [[f64; 2]; 2],
    pub tolerance: f64,
    pub monodromy_tolerance: f64,
    pub reproducing_tolerance: f64,
    /// Residue of the non-integer control form.
    pub control_residue: f64,
    pub control_threshold: f64,
}

impl Default for FayGenus1Config {
    fn default() -> Self {
        Self {
            taus: vec![c(0.0, 1.0), c(0.3, 0.8)],
            origin: c(-0.05, -0.07),
            n_values: vec![2, 3],
            configs_per_case: 3,
            margin: 0.1,
            min_separation: 0.08,
            form_poles: [[0.3, 0.55], [0.7, 0.25]],
            tolerance: 1e-8,
            monodromy_tolerance: 1e-8,
            reproducing_tolerance: 1e-8,
            control_residue: 0.5,
            control_threshold: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThetaPropsConfig {
    pub taus: Vec<ComplexRecord>,
    pub tail: f64,
    pub samples: usize,
    /// u is drawn from x ∈ [−1, 1], y ∈ [−h, h]·Im τ.
    pub sample_height: f64,
    /// Lattice shifts (n, m) for quasi-periodicity.
    pub shifts: Vec<[i64; 2]>,
    /// Truncation |n| ≤ R of the direct-sum oracle.
    pub oracle_radius: i64,
    pub tolerance: f64,
    pub theta0_literal: f64,
    pub literal_tolerance: f64,
}

impl Default for ThetaPropsConfig {
    fn default() -> Self {
        Self {
            taus: vec![c(0.0, 1.0), c(0.3, 0.8)],
            tail: 1e-15,
            samples: 8,
            sample_height: 0.5,
            shifts: vec![[1, 0], [0, 1], [2, -1]],
            oracle_radius: 12,
            tolerance: 1e-12,
            theta0_literal: 1.086_434_81,
            literal_tolerance: 5e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AiryShiftConfig {
    pub jobs: Vec<ShiftJob>,
    /// Series order checked against the Cauchy integral of Newton solutions,
    /// for every job whose divisor is a single point.
    pub k_max: usize,
    /// Radius of the Cauchy circle, as a fraction of the convergence radius.
    pub cauchy_fraction: f64,
    pub cauchy_nodes: usize,
    pub times_k_max: u32,
    /// Fractions of the convergence radius on the imaginary u axis.
    pub inside_fraction: f64,
    pub outside_fraction: f64,
    pub divergence_terms: usize,
    pub solver_tolerance: f64,
    pub fiber_divisor: Divisor,
    pub fiber_u: ComplexRecord,
    pub fiber_point: ComplexRecord,
    pub fiber_step: f64,
    pub fiber_tolerance: f64,
    pub plot_points: usize,
    /// Terms of the partial sums in the plot series.
    pub plot_terms: usize,
}

impl Default for AiryShiftConfig {
    fn default() -> Self {
        let one = Divisor::from_real(&[(Complex64::new(1.0, 0.0), 1.0)]).expect("valid divisor");
        let two = Divisor::from_real(&[(Complex64::new(1.0, 0.0), 1.0), (Complex64::new(-0.6, 0.8), 1.0)])
            .expect("valid divisor");
        let r = crate::spectral_curve::convergence_radius(Complex64::new(1.0, 0.0));
        let z_samples = (0..20)
            .map(|j| Complex64::from_polar(0.3 + 0.1 * j as f64, 0.4 * j as f64))
            .collect();
        Self {
            jobs: vec![
                ShiftJob {
                    divisor: one,
                    u_list: vec![Complex64::new(0.01, 0.0), Complex64::new(0.5 * r, 0.0)],
                    z_samples,
                    tolerances: ShiftTolerances::default(),
                    steps: DEFAULT_STEPS,
                },
                ShiftJob {
                    divisor: two,
                    u_list: vec![Complex64::new(0.03, 0.01)],
                    z_samples: vec![],
                    tolerances: ShiftTolerances::default(),
                    steps: DEFAULT_STEPS,
                },
            ],
            k_max: 10,
            cauchy_fraction: 0.5,
            cauchy_nodes: 64,
            times_k_max: 5,
            inside_fraction: 0.9,
            outside_fraction: 1.1,
            divergence_terms: 400,
            solver_tolerance: 1e-12,
            fiber_divisor: Divisor::from_real(&[(Complex64::new(1.0, 0.0), 1.0), (Complex64::new(-0.6, 0.8), -1.0)])
                .expect("valid divisor"),
            fiber_u: c(0.02, 0.0),
            fiber_point: c(0.4, 0.9),
            fiber_step: 1e-4,
            fiber_tolerance: 1e-8,
            plot_points: 24,
            plot_terms: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedPotential {
    pub name: String,
    pub times: Vec<ComplexRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatrixFayConfig {
    pub sizes: Vec<usize>,
    pub potentials: Vec<NamedPotential>,
    pub zs: Vec<ComplexRecord>,
    pub zts: Vec<ComplexRecord>,
    /// Points where φ_N is compared with eigenvalue quadrature. The tensor
    /// Legendre rule converges slowly for poles near the real axis.
    pub insertion_points: Vec<ComplexRecord>,
    pub nodes: usize,
    pub orthogonality_max: usize,
    /// Triple (ξ, ξ′, ξ″) for the reproducing relation.
    pub reproducing_points: [ComplexRecord; 3],
    pub tolerance: f64,
    pub heine_tolerance: f64,
    pub orthogonality_tolerance: f64,
    pub reproducing_tolerance: f64,
}

impl Default for MatrixFayConfig {
    fn default() -> Self {
        Self {
            sizes: vec![2, 3],
            potentials: vec![
                NamedPotential { name: "gaussian".into(), times: vec![c(0.0, 0.0), c(1.0, 0.0)] },
                NamedPotential {
                    name: "quartic".into(),
                    times: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
                },
            ],
            zs: vec![c(1.0, 1.0), c(2.0, 1.0)],
            zts: vec![c(1.0, 2.0), c(2.0, 2.0)],
            insertion_points: vec![c(0.0, 2.5), c(0.5, -3.0)],
            nodes: 90,
            orthogonality_max: 3,
            reproducing_points: [c(0.4, 0.7), c(-0.3, 1.2), c(1.1, -0.6)],
            tolerance: 1e-6,
            heine_tolerance: 1e-9,
            orthogonality_tolerance: 1e-9,
            reproducing_tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecompositionConfig {
    pub tau: ComplexRecord,
    pub origin: ComplexRecord,
    pub forms: usize,
    pub samples: usize,
    pub margin: f64,
    /// Minimum distance between poles.
    pub min_separation: f64,
    /// Minimum distance from a sample to a pole.
    pub sample_separation: f64,
    pub tolerance: f64,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self {
            tau: c(0.3, 0.8),
            origin: c(-0.05, -0.07),
            forms: 3,
            samples: 100,
            margin: 0.1,
            min_separation: 0.15,
            sample_separation: 0.15,
            tolerance: 1e-9,
        }
    }
}

/// Render a serde_path_to_error path as a JSON pointer.
fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push_str(&key.replace('~', "~0").replace('/', "~1"))
            }
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ReportError {
    ReportError::Config { pointer: path.into(), message: message.into() }
}

impl SuiteConfig {
    pub fn from_json(s: &str) -> Result<Self, ReportError> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let p = pointer(e.path());
            invalid(p, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Semantic checks that serde cannot express.
    pub fn validate(&self) -> Result<(), ReportError> {
        let positive = |p: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(invalid(p, format!("must be a positive number, got {x}")))
            }
        };
        let upper_half = |p: String, t: &ComplexRecord| {
            if t.im > 0.0 && t.re.is_finite() {
                Ok(())
            } else {
                Err(invalid(p, "τ must lie in the upper half plane"))
            }
        };

        let f = &self.hirota_formal;
        for (p, x) in [
            ("/hirota_formal/hirota_tolerance", f.hirota_tolerance),
            ("/hirota_formal/kp_tolerance", f.kp_tolerance),
            ("/hirota_formal/fay_tolerance", f.fay_tolerance),
            ("/hirota_formal/reproducing_tolerance", f.reproducing_tolerance),
            ("/hirota_formal/wn_tolerance", f.wn_tolerance),
        ] {
            positive(p, x)?;
        }
        if f.max_degree > f.truncation {
            return Err(invalid("/hirota_formal/max_degree", "exceeds the truncation"));
        }
        for (i, &t) in f.fay_truncations.iter().enumerate() {
            if t < 4 {
                return Err(invalid(format!("/hirota_formal/fay_truncations/{i}"), "must be at least 4"));
            }
        }
        for (i, &t) in f.reproducing_truncations.iter().enumerate() {
            if t < 3 {
                return Err(invalid(
                    format!("/hirota_formal/reproducing_truncations/{i}"),
                    "must be at least 3",
                ));
            }
        }
        for (i, &n) in f.wn_orders.iter().enumerate() {
            if n == 0 || n as u32 > f.truncation {
                return Err(invalid(format!("/hirota_formal/wn_orders/{i}"), "must lie in 1..=truncation"));
            }
        }

        let g0 = &self.fay_genus0;
        positive("/fay_genus0/tolerance", g0.tolerance)?;
        positive("/fay_genus0/box_half_width", g0.box_half_width)?;
        positive("/fay_genus0/min_separation", g0.min_separation)?;
        for (i, &n) in g0.n_values.iter().enumerate() {
            if n == 0 {
                return Err(invalid(format!("/fay_genus0/n_values/{i}"), "must be at least 1"));
            }
        }

        let g1 = &self.fay_genus1;
        for (i, t) in g1.taus.iter().enumerate() {
            upper_half(format!("/fay_genus1/taus/{i}"), t)?;
        }
        if !(0.0..0.5).contains(&g1.margin) {
            return Err(invalid("/fay_genus1/margin", "must lie in [0, 0.5)"));
        }
        for (i, p) in g1.form_poles.iter().enumerate() {
            if p.iter().any(|x| !(0.0..1.0).contains(x)) {
                return Err(invalid(format!("/fay_genus1/form_poles/{i}"), "lattice coordinates must lie in [0, 1)"));
            }
        }
        positive("/fay_genus1/tolerance", g1.tolerance)?;
        positive("/fay_genus1/monodromy_tolerance", g1.monodromy_tolerance)?;
        positive("/fay_genus1/reproducing_tolerance", g1.reproducing_tolerance)?;
        positive("/fay_genus1/min_separation", g1.min_separation)?;

        let th = &self.theta_props;
        for (i, t) in th.taus.iter().enumerate() {
            upper_half(format!("/theta_props/taus/{i}"), t)?;
        }
        positive("/theta_props/tail", th.tail)?;
        positive("/theta_props/tolerance", th.tolerance)?;
        if th.oracle_radius < 1 {
            return Err(invalid("/theta_props/oracle_radius", "must be at least 1"));
        }

        let a = &self.airy_shift;
        for (i, job) in a.jobs.iter().enumerate() {
            if job.divisor.is_empty() {
                return Err(invalid(format!("/airy_shift/jobs/{i}/divisor"), "divisor is empty"));
            }
        }
        if !(0.0..1.0).contains(&a.cauchy_fraction) || a.cauchy_fraction == 0.0 {
            return Err(invalid("/airy_shift/cauchy_fraction", "must lie in (0, 1)"));
        }
        if a.inside_fraction >= 1.0 || a.outside_fraction <= 1.0 {
            return Err(invalid(
                "/airy_shift/inside_fraction",
                "inside must be below 1 and outside above 1",
            ));
        }

        let m = &self.matrix_fay;
        if m.zs.len() != m.zts.len() || m.zs.is_empty() {
            return Err(invalid("/matrix_fay/zts", "needs as many partners as points"));
        }
        for (i, &n) in m.sizes.iter().enumerate() {
            if n == 0 {
                return Err(invalid(format!("/matrix_fay/sizes/{i}"), "must be at least 1"));
            }
        }
        positive("/matrix_fay/tolerance", m.tolerance)?;
        positive("/matrix_fay/heine_tolerance", m.heine_tolerance)?;

        let d = &self.decomposition;
        upper_half("/decomposition/tau".into(), &d.tau)?;
        positive("/decomposition/tolerance", d.tolerance)?;
        if !(0.0..0.5).contains(&d.margin) {
            return Err(invalid("/decomposition/margin", "must lie in [0, 0.5)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        assert_eq!(SuiteConfig::from_json("{}").unwrap(), SuiteConfig::default());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = SuiteConfig::default();
        assert_eq!(SuiteConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn errors_carry_a_pointer() {
        let e = SuiteConfig::from_json(r#"{"fay_genus1": {"taus": [{"re": 0.0, "im": "x"}]}}"#).unwrap_err();
        match e {
            ReportError::Config { pointer, .. } => assert_eq!(pointer, "/fay_genus1/taus/0/im"),
            other => panic!("{other:?}"),
        }
        let e = SuiteConfig::from_json(r#"{"theta_props": {"bogus": 1}}"#).unwrap_err();
        assert!(matches!(e, ReportError::Config { ref pointer, .. } if pointer.starts_with("/theta_props")), "{e:?}");
        let e = SuiteConfig::from_json(r#"{"decomposition": {"tau": {"re": 0.0, "im": -1.0}}}"#).unwrap_err();
        assert!(matches!(e, ReportError::Config { ref pointer, .. } if pointer == "/decomposition/tau"));
    }
}
