//! The Airy spectral curve x = z², y = 2z²dz and its Sato-shift family
//! 𝒮 + uD.
//!
//! For D = Σα′ᵢ[zᵢ] the shifted curve is x_u = z² + uC_u,
//! y_u = (z + (u/2)Σα′ᵢ/(ζᵢ(z−ζᵢ)))·2z dz, where ζᵢ = ζ_u(zᵢ) and C_u solve
//! ζᵢ² = zᵢ² − uC_u, C_u = Σα′ᵢ/ζᵢ with ζᵢ → zᵢ as u → 0.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::divisors::{Divisor, DivisorError};
use crate::quadrature::{circle_residue, QuadError};

/// Newton stops once the residual is below this.
pub const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 50;
/// Default number of homotopy steps from u = 0.
pub const DEFAULT_STEPS: usize = 8;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("point z = 0 is a ramification point of the Airy curve")]
    RamificationPoint,
    #[error("Newton did not converge at u = {u}: last residual {residual:e}")]
    Divergence { u: Complex64, residual: f64 },
    #[error("u = {0} is at or beyond a branch point of ζ_u")]
    BranchPoint(Complex64),
    #[error("sample z = {0} is a pole of y_u")]
    SampleAtPole(Complex64),
    #[error("{0}")]
    Invalid(String),
    #[error("invalid shift job json: {0}")]
    Json(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
}

/// Solved ζ_u(zᵢ) and C_u.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftSolution {
    pub u: Complex64,
    pub zetas: Vec<Complex64>,
    pub c: Complex64,
    /// Final Newton residual at each homotopy step.
    pub residuals: Vec<f64>,
}

impl ShiftSolution {
    pub fn residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

/// A puncture of y and the order of its pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Puncture {
    Infinity { degree: u32 },
    Finite { at: Complex64, degree: u32 },
}

/// The Airy curve, possibly shifted by u·D.
#[derive(Clone, Debug)]
pub struct SpectralCurve {
    divisor: Divisor,
    shift: Option<ShiftSolution>,
}

fn residual_norm(d: &Divisor, u: Complex64, zeta: &[Complex64], c: Complex64) -> f64 {
    let mut r: f64 = 0.0;
    let mut sum = Complex64::new(0.0, 0.0);
    for (p, &s) in d.points().iter().zip(zeta) {
        r = r.max((s * s - p.z * p.z + u * c).norm());
        sum += p.alpha / s;
    }
    r.max((c - sum).norm())
}

fn newton(
    d: &Divisor,
    u: Complex64,
    zeta: &mut [Complex64],
    c: &mut Complex64,
) -> Result<f64, SpectralError> {
    let l = zeta.len();
    let mut res = residual_norm(d, u, zeta, *c);
    for _ in 0..NEWTON_MAX_ITER {
        if res < NEWTON_TOL {
            return Ok(res);
        }
        let mut j = DMatrix::<Complex64>::zeros(l + 1, l + 1);
        let mut f = DVector::<Complex64>::zeros(l + 1);
        let mut sum = Complex64::new(0.0, 0.0);
        for (i, p) in d.points().iter().enumerate() {
            let s = zeta[i];
            f[i] = s * s - p.z * p.z + u * *c;
            j[(i, i)] = 2.0 * s;
            j[(i, l)] = u;
            j[(l, i)] = p.alpha / (s * s);
            sum += p.alpha / s;
        }
        f[l] = *c - sum;
        j[(l, l)] = Complex64::new(1.0, 0.0);
        let det = j.determinant();
        let scale: f64 = zeta.iter().map(|s| 2.0 * s.norm()).product();
        if det.norm() < 1e-12 * scale.max(1e-300) {
            return Err(SpectralError::BranchPoint(u));
        }
        let step = j.lu().solve(&f).ok_or(SpectralError::BranchPoint(u))?;
        for i in 0..l {
            zeta[i] -= step[i];
        }
        *c -= step[l];
        let next = residual_norm(d, u, zeta, *c);
        if !next.is_finite() {
            return Err(SpectralError::Divergence { u, residual: res });
        }
        res = next;
    }
    if res < 1e3 * NEWTON_TOL {
        return Ok(res);
    }
    Err(SpectralError::Divergence { u, residual: res })
}

fn check_divisor(d: &Divisor) -> Result<(), SpectralError> {
    if d.is_empty() {
        return Err(SpectralError::Invalid("empty divisor".into()));
    }
    if d.points().iter().any(|p| p.z.norm() < 1e-12) {
        return Err(SpectralError::RamificationPoint);
    }
    Ok(())
}

/// Solve for ζ_u(zᵢ), C_u by Newton continuation along u·s/steps, s = 1..steps.
pub fn solve_shift(d: &Divisor, u: Complex64, steps: usize) -> Result<ShiftSolution, SpectralError> {
    check_divisor(d)?;
    let steps = steps.max(1);
    if d.len() == 1 && d.points()[0].alpha == Complex64::new(1.0, 0.0) {
        let r = convergence_radius(d.points()[0].z);
        // ζ² + u/ζ = z₁² has its branch points at |u| = r exactly.
        if ((u.norm() - r).abs() < 1e-12 * r) && branch_direction(d.points()[0].z, u) {
            return Err(SpectralError::BranchPoint(u));
        }
    }
    let mut zeta: Vec<Complex64> = d.points().iter().map(|p| p.z).collect();
    let mut c: Complex64 = d.points().iter().map(|p| p.alpha / p.z).sum();
    let mut residuals = Vec::with_capacity(steps);
    for s in 1..=steps {
        let us = u * (s as f64 / steps as f64);
        residuals.push(newton(d, us, &mut zeta, &mut c)?);
    }
    Ok(ShiftSolution {
        u,
        zetas: zeta,
        c,
        residuals,
    })
}

/// Whether u points at one of the single-point branch points ±2z₁³/(3√3).
fn branch_direction(z1: Complex64, u: Complex64) -> bool {
    let b = 2.0 * z1.powi(3) / (3.0 * 3f64.sqrt());
    (u - b).norm() < 1e-9 * b.norm() || (u + b).norm() < 1e-9 * b.norm()
}

/// 2|z₁|³/(3√3), the radius of convergence of ζ_u(z₁) in u.
pub fn convergence_radius(z1: Complex64) -> f64 {
    2.0 * z1.norm().powi(3) / (3.0 * 3f64.sqrt())
}

/// Coefficients a₁…a_{k_max} of ζ_u(z₁) = z₁ + Σ a_k uᵏ:
/// a_k = −½·Γ(3(k−1)/2+1)/(k!·Γ((k−1)/2+1))·z₁^{1−3k}.
pub fn zeta_series(z1: Complex64, k_max: usize) -> Result<Vec<Complex64>, SpectralError> {
    if z1.norm() < 1e-12 {
        return Err(SpectralError::RamificationPoint);
    }
    Ok((1..=k_max)
        .map(|k| {
            let kf = k as f64;
            let lg = ln_gamma(1.5 * (kf - 1.0) + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(0.5 * (kf - 1.0) + 1.0);
            -0.5 * lg.exp() * z1.powi(1 - 3 * k as i32)
        })
        .collect())
}

/// Partial sum z₁ + Σ_{k≤k_max} a_k uᵏ.
pub fn zeta_partial_sum(z1: Complex64, u: Complex64, k_max: usize) -> Result<Complex64, SpectralError> {
    let a = zeta_series(z1, k_max)?;
    let mut acc = z1;
    let mut p = Complex64::new(1.0, 0.0);
    for ak in a {
        p *= u;
        acc += ak * p;
    }
    Ok(acc)
}

/// Taylor coefficients of the Newton solution ζ_u(z₁), by the Cauchy
/// integral (1/2πi)∮ ζ_u u^{−k−1} du on |u| = r, each ζ_u solved by homotopy.
pub fn newton_taylor(z1: Complex64, k_max: usize, r: f64, nodes: usize) -> Result<Vec<Complex64>, SpectralError> {
    let d = Divisor::from_real(&[(z1, 1.0)])?;
    let mut vals = Vec::with_capacity(nodes);
    for j in 0..nodes {
        let u = Complex64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / nodes as f64);
        vals.push((u, solve_shift(&d, u, DEFAULT_STEPS)?.zetas[0]));
    }
    Ok((1..=k_max)
        .map(|k| {
            vals.iter()
                .map(|&(u, z)| z * u.powi(-(k as i32)))
                .sum::<Complex64>()
                / nodes as f64
        })
        .collect())
}

/// Magnitudes |a_k uᵏ| for k = 1..k_max; growth signals divergence.
pub fn series_terms(z1: Complex64, u: Complex64, k_max: usize) -> Result<Vec<f64>, SpectralError> {
    Ok(zeta_series(z1, k_max)?
        .into_iter()
        .enumerate()
        .map(|(k, a)| a.norm() * u.norm().powi(k as i32 + 1))
        .collect())
}

/// Whether the series terms at u grow over the last half of k ≤ k_max.
pub fn series_diverges(z1: Complex64, u: Complex64, k_max: usize) -> Result<bool, SpectralError> {
    let t = series_terms(z1, u, k_max)?;
    let mid = t[k_max / 2 - 1];
    let last = t[k_max - 1];
    Ok(last > mid && last > 1.0)
}

impl SpectralCurve {
    /// The unshifted Airy curve.
    pub fn airy() -> Self {
        Self {
            divisor: Divisor::new(Vec::new()).expect("empty divisor"),
            shift: None,
        }
    }

    /// 𝒮 + uD.
    pub fn shifted(d: &Divisor, u: Complex64, steps: usize) -> Result<Self, SpectralError> {
        let sol = solve_shift(d, u, steps)?;
        Ok(Self {
            divisor: d.clone(),
            shift: Some(sol),
        })
    }

    pub fn solution(&self) -> Option<&ShiftSolution> {
        self.shift.as_ref()
    }

    pub fn divisor(&self) -> &Divisor {
        &self.divisor
    }

    fn u(&self) -> Complex64 {
        self.shift.as_ref().map_or(Complex64::new(0.0, 0.0), |s| s.u)
    }

    fn poles(&self) -> Vec<(Complex64, Complex64)> {
        match &self.shift {
            None => Vec::new(),
            Some(s) => self
                .divisor
                .points()
                .iter()
                .zip(&s.zetas)
                .map(|(p, &z)| (z, p.alpha))
                .collect(),
        }
    }

    /// x_u(z) = z² + u·C_u.
    pub fn x(&self, z: Complex64) -> Complex64 {
        z * z + self.shift.as_ref().map_or(Complex64::new(0.0, 0.0), |s| s.u * s.c)
    }

    /// Scalar y with y_u = y·dx_u.
    pub fn y(&self, z: Complex64) -> Result<Complex64, SpectralError> {
        let u = self.u();
        let mut acc = z;
        for (s, a) in self.poles() {
            if (z - s).norm() < 1e-14 {
                return Err(SpectralError::SampleAtPole(z));
            }
            acc += 0.5 * u * a / (s * (z - s));
        }
        Ok(acc)
    }

    /// y_u/dz.
    pub fn y_form(&self, z: Complex64) -> Result<Complex64, SpectralError> {
        Ok(self.y(z)? * 2.0 * z)
    }

    pub fn punctures(&self) -> Vec<Puncture> {
        let mut out = vec![Puncture::Infinity { degree: 4 }];
        if self.u().norm() > 0.0 {
            out.extend(self.poles().into_iter().map(|(s, _)| Puncture::Finite { at: s, degree: 1 }));
        }
        out
    }

    fn single_point(&self) -> Result<Option<(Complex64, Complex64)>, SpectralError> {
        match (&self.shift, self.divisor.points()) {
            (None, _) => Ok(None),
            (Some(s), [p]) if p.alpha == Complex64::new(1.0, 0.0) => Ok(Some((p.z, s.zetas[0]))),
            _ => Err(SpectralError::Invalid(
                "the curve equation is stated for D = 1·z₁".into(),
            )),
        }
    }

    fn curve_equation(&self, z: Complex64, sign: f64) -> Result<Complex64, SpectralError> {
        let x = self.x(z);
        let y = self.y(z)?;
        let Some((z1, zeta)) = self.single_point()? else {
            return Ok(y * y - x);
        };
        let u = self.u();
        Ok((y * y - x) * (x - z1 * z1) - u * (y + zeta + sign * u / (4.0 * zeta * zeta)))
    }

    /// (y²−x)(x−X₁) − u(y + ζ + u/(4ζ²)) for a single-point shift; y² − x
    /// on the unshifted curve.
    pub fn curve_equation_residual(&self, z: Complex64) -> Result<Complex64, SpectralError> {
        self.curve_equation(z, 1.0)
    }

    /// The same with −u/(4ζ²); equals u²/(2ζ²) identically.
    pub fn curve_equation_residual_sign_flipped_variant(&self, z: Complex64) -> Result<Complex64, SpectralError> {
        self.curve_equation(z, -1.0)
    }

    /// Times by contour quadrature: Res_{ζᵢ} y_u for each shifted point and
    /// t_{∞,k} = Res_∞ ξᵏ y_u for k = 0..=k_max, with ξ = x_u^{−1/2} ~ 1/z.
    pub fn times(&self, k_max: u32) -> Result<CurveTimes, SpectralError> {
        let poles = self.poles();
        let mut finite = Vec::new();
        for (i, &(s, _)) in poles.iter().enumerate() {
            let mut r = s.norm();
            for (j, &(o, _)) in poles.iter().enumerate() {
                if i != j {
                    r = r.min((o - s).norm());
                }
            }
            let r = 0.4 * r;
            let v = circle_residue(|z| self.y_form(z).unwrap_or(Complex64::new(f64::NAN, 0.0)), s, r, 1e-13)?;
            finite.push((s, v.value));
        }
        let shift = self.x(Complex64::new(0.0, 0.0));
        let big = 2.0 * poles.iter().map(|p| p.0.norm()).fold(1.0, f64::max).max(shift.norm().sqrt());
        let xi = |z: Complex64| 1.0 / (z * (1.0 + shift / (z * z)).sqrt());
        let mut infinity = Vec::new();
        for k in 0..=k_max {
            let v = circle_residue(
                |z| xi(z).powi(k as i32) * self.y_form(z).unwrap_or(Complex64::new(f64::NAN, 0.0)),
                Complex64::new(0.0, 0.0),
                big,
                1e-13,
            )?;
            infinity.push((k, -v.value));
        }
        Ok(CurveTimes { finite, infinity })
    }

    /// Expected times: finite residues α′ᵢu, t_{∞,0} = −(Σα′)u, t_{∞,3} = −2.
    pub fn expected_times(&self, k_max: u32) -> CurveTimes {
        let u = self.u();
        let poles = self.poles();
        let total: Complex64 = poles.iter().map(|p| p.1).sum();
        CurveTimes {
            finite: poles.iter().map(|&(s, a)| (s, a * u)).collect(),
            infinity: (0..=k_max)
                .map(|k| {
                    let v = match k {
                        0 => -total * u,
                        3 => Complex64::new(-2.0, 0.0),
                        _ => Complex64::new(0.0, 0.0),
                    };
                    (k, v)
                })
                .collect(),
        }
    }

    /// ∂_u y at fixed x by central differences, against Σα′ᵢ/(2z(z−ζᵢ)), the
    /// third-kind form of D_u divided by dx. The point z lies on the sheet
    /// continued from the base curve.
    pub fn fiber_derivative_residual(&self, z: Complex64, h: f64, steps: usize) -> Result<f64, SpectralError> {
        let sol = self
            .shift
            .as_ref()
            .ok_or_else(|| SpectralError::Invalid("curve is not shifted".into()))?;
        let x = self.x(z);
        let at = |du: f64| -> Result<Complex64, SpectralError> {
            let c = SpectralCurve::shifted(&self.divisor, sol.u + du, steps)?;
            let s = c.solution().expect("shifted");
            let mut w = (x - s.u * s.c).sqrt();
            if (w - z).norm() > (w + z).norm() {
                w = -w;
            }
            c.y(w)
        };
        let fd = (at(h)? - at(-h)?) / (2.0 * h);
        let form: Complex64 = self
            .poles()
            .iter()
            .map(|&(s, a)| a / (2.0 * z * (z - s)))
            .sum();
        Ok((fd - form).norm())
    }
}

/// Residue times of a curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveTimes {
    pub finite: Vec<(Complex64, Complex64)>,
    pub infinity: Vec<(u32, Complex64)>,
}

impl CurveTimes {
    /// Largest difference between two tables of the same shape.
    pub fn distance(&self, other: &Self) -> f64 {
        let f = self
            .finite
            .iter()
            .zip(&other.finite)
            .map(|(a, b)| (a.1 - b.1).norm());
        let i = self
            .infinity
            .iter()
            .zip(&other.infinity)
            .map(|(a, b)| (a.1 - b.1).norm());
        f.chain(i).fold(0.0, f64::max)
    }
}

/// Tolerances of a shift job.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftTolerances {
    #[serde(default = "default_curve_tol")]
    pub curve: f64,
    #[serde(default = "default_times_tol")]
    pub times: f64,
    #[serde(default = "default_series_tol")]
    pub series: f64,
}

fn default_curve_tol() -> f64 {
    1e-10
}

fn default_times_tol() -> f64 {
    1e-8
}

fn default_series_tol() -> f64 {
    1e-10
}

impl Default for ShiftTolerances {
    fn default() -> Self {
        Self {
            curve: default_curve_tol(),
            times: default_times_tol(),
            series: default_series_tol(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexValue {
    re: f64,
    #[serde(default)]
    im: f64,
}

/// {divisor, u_list, z_samples, tolerances}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftJob {
    pub divisor: Divisor,
    #[serde(with = "complex_list")]
    pub u_list: Vec<Complex64>,
    #[serde(with = "complex_list")]
    pub z_samples: Vec<Complex64>,
    #[serde(default)]
    pub tolerances: ShiftTolerances,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

mod complex_list {
    use super::ComplexValue;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|z| ComplexValue { re: z.re, im: z.im })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<ComplexValue>::deserialize(d)?
            .into_iter()
            .map(|c| Complex64::new(c.re, c.im))
            .collect())
    }
}

impl ShiftJob {
    pub fn from_json(s: &str) -> Result<Self, SpectralError> {
        serde_json::from_str(s).map_err(|e| SpectralError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}
