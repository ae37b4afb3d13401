//! Hermitian one-matrix models at small N.
//!
//! 𝒯_N(𝐭) = ∫ Π dλᵢ Δ(λ)² e^{−ΣV(λᵢ)} = N!·det(m_{i+j}) with the unitary
//! volume dropped. Sato shifts insert Π det(M−zᵢ)^{−αᵢ}, evaluated as
//! modified-weight Hankel determinants.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divisors::{Divisor, DivisorError};
use crate::exec::{self, Exec};
use crate::formal_core::{GradedSeries, Monomial, SeriesError, Var};
use crate::hirota_fay::{fay_numeric, Check, HirotaError, ShiftedTau};
use crate::quadrature::{circle_residue, gauss_hermite, gauss_legendre, integrate, QuadError, Tolerance};

/// e^{−V} (times |x|^j for the largest moment in use) is dropped below e^{−CUT}.
const CUT: f64 = 41.446_531_673_892_82; // ln 10¹⁸
/// Points with negative-weight insertions must sit this far from ℝ.
const AXIS_CLEARANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("potential is not integrable on the real line: {0}")]
    NotIntegrable(String),
    #[error("insertion point {0} lies on the integration contour")]
    InsertionOnContour(Complex64),
    #[error("divisor weight {0} is not an integer")]
    NonIntegerWeight(Complex64),
    #[error("moment matrix is singular")]
    Singular,
    #[error("eigenvalue quadrature supports N ≤ 3, got {0}")]
    OracleSize(usize),
    #[error("invalid potential json: {0}")]
    Json(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
}

impl From<MatrixError> for HirotaError {
    fn from(e: MatrixError) -> Self {
        HirotaError::Backend(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum TimeRecord {
    Real(f64),
    Complex { re: f64, #[serde(default)] im: f64 },
}

/// V(x) = Σₖ (tₖ/k) xᵏ, stored as [t₁, t₂, …].
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    times: Vec<Complex64>,
}

impl PotentialSpec {
    /// Rejects potentials whose leading coefficient is not real positive of
    /// even degree.
    pub fn new(times: Vec<Complex64>) -> Result<Self, MatrixError> {
        let mut times = times;
        while times.last().is_some_and(|t| t.norm() == 0.0) {
            times.pop();
        }
        let d = times.len();
        let lead = *times
            .last()
            .ok_or_else(|| MatrixError::NotIntegrable("V = 0".into()))?;
        if d % 2 == 1 {
            return Err(MatrixError::NotIntegrable(format!("odd degree {d}")));
        }
        if lead.im != 0.0 || lead.re <= 0.0 {
            return Err(MatrixError::NotIntegrable(format!(
                "leading time t_{d} = {lead} is not real positive"
            )));
        }
        Ok(Self { times })
    }

    /// V = x²/2.
    pub fn gaussian() -> Self {
        Self {
            times: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    /// V = x⁴/4 + x²/2.
    pub fn quartic() -> Self {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        Self {
            times: vec![z, one, z, one],
        }
    }

    pub fn times(&self) -> &[Complex64] {
        &self.times
    }

    pub fn degree(&self) -> usize {
        self.times.len()
    }

    pub fn value(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = 1.0;
        for (k, t) in self.times.iter().enumerate() {
            p *= x;
            acc += t * (p / (k + 1) as f64);
        }
        acc
    }

    /// e^{−V(x)}.
    pub fn weight(&self, x: f64) -> Complex64 {
        (-self.value(x)).exp()
    }

    /// Smallest L on a fine grid with Re V(x) − j·ln(1+|x|) ≥ ln 10¹⁸ for
    /// all |x| ≥ L.
    pub fn cutoff(&self, j: usize) -> f64 {
        let d = self.degree();
        let lead = self.times[d - 1].re / d as f64;
        let lower: f64 = self.times[..d - 1]
            .iter()
            .enumerate()
            .map(|(k, t)| t.norm() / (k + 1) as f64)
            .sum::<f64>()
            + j as f64;
        // Beyond r the leading term dominates the rest by a factor 2.
        let r = 1f64
            .max(2.0 * lower / lead)
            .max((2.0 * (CUT + 1.0) / lead).powf(1.0 / d as f64))
            .max(2.0 * (CUT + 1.0) / lead);
        let r = r.min(1e3);
        let steps = 8000;
        let h = r / steps as f64;
        let mut last = 0.0;
        for s in 0..=steps {
            let x = s as f64 * h;
            for y in [x, -x] {
                if self.value(y).re - j as f64 * (1.0 + y.abs()).ln() < CUT {
                    last = x;
                }
            }
        }
        last + h
    }

    /// JSON time list: numbers or {re, im} objects, t₁ first.
    pub fn from_json(s: &str) -> Result<Self, MatrixError> {
        let recs: Vec<TimeRecord> = serde_json::from_str(s).map_err(|e| MatrixError::Json(e.to_string()))?;
        Self::new(
            recs.into_iter()
                .map(|r| match r {
                    TimeRecord::Real(x) => Complex64::new(x, 0.0),
                    TimeRecord::Complex { re, im } => Complex64::new(re, im),
                })
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let recs: Vec<TimeRecord> = self
            .times
            .iter()
            .map(|t| TimeRecord::Complex { re: t.re, im: t.im })
            .collect();
        serde_json::to_string(&recs).expect("serializable")
    }
}

/// Quadrature settings recorded with every result.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureInfo {
    pub tolerance: f64,
    pub cutoff: f64,
    pub evaluations: usize,
}

/// N, V and the moment cache m_j = ∫ xʲ e^{−V} dx on [−L, L].
#[derive(Clone, Debug)]
pub struct MatrixTauContext {
    n: usize,
    potential: PotentialSpec,
    moments: Vec<Complex64>,
    cutoff: f64,
    tol: Tolerance,
    exec: Exec,
    evaluations: usize,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl MatrixTauContext {
    pub fn new(n: usize, potential: PotentialSpec) -> Result<Self, MatrixError> {
        Self::with_moments(n, potential, 2 * n.max(1))
    }

    /// Context with moments cached up to j_max (at least 2N).
    pub fn with_moments(n: usize, potential: PotentialSpec, j_max: usize) -> Result<Self, MatrixError> {
        let j_max = j_max.max(2 * n);
        let cutoff = potential.cutoff(j_max + 2);
        let mut ctx = Self {
            n,
            potential,
            moments: Vec::new(),
            cutoff,
            tol: Tolerance::new(1e-13, 1e-13),
            exec: Exec::default(),
            evaluations: 0,
        };
        let (m, evals) = ctx.weighted_moments(j_max, |_| Complex64::new(1.0, 0.0))?;
        ctx.moments = m;
        ctx.evaluations = evals;
        Ok(ctx)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn moments(&self) -> &[Complex64] {
        &self.moments
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn quadrature_info(&self) -> QuadratureInfo {
        QuadratureInfo {
            tolerance: self.tol.abs,
            cutoff: self.cutoff,
            evaluations: self.evaluations,
        }
    }

    /// Same potential and quadrature at another size.
    pub fn resized(&self, n: usize) -> Result<Self, MatrixError> {
        if 2 * n <= self.moments.len().saturating_sub(1) {
            return Ok(Self { n, ..self.clone() });
        }
        Self::with_moments(n, self.potential.clone(), 2 * n).map(|c| c.with_exec(self.exec))
    }

    /// ∫ xʲ e^{−V(x)} f(x) dx on [−L, L] for j = 0..=j_max.
    fn weighted_moments(
        &self,
        j_max: usize,
        f: impl Fn(f64) -> Complex64 + Sync + Send,
    ) -> Result<(Vec<Complex64>, usize), MatrixError> {
        let l = self.cutoff;
        let out = exec::map_range(self.exec, j_max + 1, |j| {
            integrate(|x| x.powi(j as i32) * self.potential.weight(x) * f(x), -l, l, self.tol)
        });
        let mut m = Vec::with_capacity(out.len());
        let mut evals = 0;
        for r in out {
            let r = r?;
            evals += r.evaluations;
            m.push(r.value);
        }
        Ok((m, evals))
    }

    fn hankel(&self, m: &[Complex64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| m[i + j])
    }

    fn hankel_for(&self, f: impl Fn(f64) -> Complex64 + Sync + Send) -> Result<DMatrix<Complex64>, MatrixError> {
        if self.n == 0 {
            return Ok(DMatrix::zeros(0, 0));
        }
        let (m, _) = self.weighted_moments(2 * self.n - 2, f)?;
        Ok(self.hankel(&m))
    }

    /// N!·det(m_{i+j}).
    pub fn tau_n(&self) -> Complex64 {
        self.hankel(&self.moments).determinant() * factorial(self.n)
    }

    /// Weight factor Π(x−zᵢ)^{−αᵢ} for integer αᵢ.
    fn insertion_factor(d: &Divisor) -> Result<impl Fn(f64) -> Complex64 + Sync + Send, MatrixError> {
        let mut pts = Vec::new();
        for p in d.points() {
            let a = p.alpha;
            if a.im != 0.0 || a.re.fract() != 0.0 {
                return Err(MatrixError::NonIntegerWeight(a));
            }
            let k = a.re as i32;
            if k > 0 && p.z.im.abs() < AXIS_CLEARANCE {
                return Err(MatrixError::InsertionOnContour(p.z));
            }
            pts.push((p.z, -k));
        }
        Ok(move |x: f64| {
            pts.iter()
                .map(|&(z, e)| (Complex64::new(x, 0.0) - z).powi(e))
                .product::<Complex64>()
        })
    }

    /// 𝒯_N(𝐭+[D]) = ∫ e^{−TrV} Π det(M−zᵢ)^{−αᵢ}, as N!·det of modified moments.
    pub fn shifted_tau(&self, d: &Divisor) -> Result<Complex64, MatrixError> {
        if d.is_empty() {
            return Ok(self.tau_n());
        }
        let f = Self::insertion_factor(d)?;
        Ok(self.hankel_for(f)?.determinant() * factorial(self.n))
    }

    /// ψ_N(x) = ⟨det(x−M)⟩/𝒯_N, the monic orthogonal polynomial.
    pub fn psi(&self, x: Complex64) -> Result<Complex64, MatrixError> {
        let h = self.hankel_for(|y| x - y)?;
        Ok(h.determinant() * factorial(self.n) / self.tau_n())
    }

    /// φ_N(x) = ⟨1/det(x−M)⟩/𝒯_N for x off the real axis.
    pub fn phi(&self, x: Complex64) -> Result<Complex64, MatrixError> {
        if x.im.abs() < AXIS_CLEARANCE && x.re.abs() <= self.cutoff {
            return Err(MatrixError::InsertionOnContour(x));
        }
        let h = self.hankel_for(|y| 1.0 / (x - y))?;
        Ok(h.determinant() * factorial(self.n) / self.tau_n())
    }

    /// ⟨Tr f(M)⟩ under the weight modified by `g`: tr(H_g⁻¹ H_{gf}).
    fn trace_average(
        &self,
        g: &(impl Fn(f64) -> Complex64 + Sync + Send),
        f: impl Fn(f64) -> Complex64 + Sync + Send,
    ) -> Result<Complex64, MatrixError> {
        if self.n == 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let h = self.hankel_for(g)?;
        let hp = self.hankel_for(|x| g(x) * f(x))?;
        let lu = h.lu();
        let sol = lu.solve(&hp).ok_or(MatrixError::Singular)?;
        Ok(sol.trace())
    }

    /// Eigenvalue integral ∫ Δ(λ)² Π e^{−V(λᵢ)} g(λ) dλ by a tensor
    /// Gauss–Legendre rule on [−L, L]ᴺ (N ≤ 3), independent of the moments.
    pub fn eigenvalue_integral(
        &self,
        nodes: usize,
        g: impl Fn(&[f64]) -> Complex64 + Sync + Send,
    ) -> Result<Complex64, MatrixError> {
        let n = self.n;
        if n > 3 {
            return Err(MatrixError::OracleSize(n));
        }
        if n == 0 {
            return Ok(g(&[]));
        }
        let (x, w) = gauss_legendre(nodes);
        let l = self.cutoff;
        let xs: Vec<f64> = x.iter().map(|s| s * l).collect();
        let ws: Vec<Complex64> = w
            .iter()
            .zip(&xs)
            .map(|(wi, &xi)| self.potential.weight(xi) * (wi * l))
            .collect();
        let parts = exec::map_range(self.exec, nodes, |i| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut lam = vec![xs[i]; n];
            let mut idx = vec![0usize; n - 1];
            loop {
                let mut wt = ws[i];
                for (k, &j) in idx.iter().enumerate() {
                    lam[k + 1] = xs[j];
                    wt *= ws[j];
                }
                let mut vd = 1.0;
                for a in 0..n {
                    for b in a + 1..n {
                        vd *= lam[a] - lam[b];
                    }
                }
                acc += wt * (vd * vd) * g(&lam);
                // Odometer over the remaining coordinates.
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < nodes {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
            acc
        });
        Ok(parts.into_iter().sum())
    }

    /// Moments by Gauss–Hermite after x = √2·y, as an independent check of
    /// the adaptive moments.
    pub fn gauss_hermite_moments(&self, j_max: usize, nodes: usize) -> Vec<Complex64> {
        let (y, w) = gauss_hermite(nodes);
        let s = std::f64::consts::SQRT_2;
        (0..=j_max)
            .map(|j| {
                y.iter()
                    .zip(&w)
                    .map(|(&yi, &wi)| {
                        let x = s * yi;
                        x.powi(j as i32) * (-self.potential.value(x) + yi * yi).exp() * (wi * s)
                    })
                    .sum()
            })
            .collect()
    }

    /// (1/2πi)∮ ψ_n(x) φ_m(x) dx on a circle enclosing [−L, L] for the
    /// largest cutoff among the contexts involved.
    pub fn pairing(&self, n: usize, m: usize) -> Result<Complex64, MatrixError> {
        let a = self.resized(n)?.with_exec(Exec::Sequential);
        let b = self.resized(m)?.with_exec(Exec::Sequential);
        let err = std::sync::Mutex::new(None);
        let r = circle_residue(
            |x| match a.psi(x).and_then(|p| Ok(p * b.phi(x)?)) {
                Ok(v) => v,
                Err(e) => {
                    *err.lock().expect("poisoned") = Some(e);
                    Complex64::new(f64::NAN, 0.0)
                }
            },
            Complex64::new(0.0, 0.0),
            self.cutoff.max(a.cutoff).max(b.cutoff) + 1.0,
            1e-12,
        );
        if let Some(e) = err.into_inner().expect("poisoned") {
            return Err(e);
        }
        Ok(r?.value)
    }

    /// Pairing minus δ_{m,n+1}.
    pub fn orthogonality_residual(&self, n: usize, m: usize) -> Result<Complex64, MatrixError> {
        let delta = if m == n + 1 { 1.0 } else { 0.0 };
        Ok(self.pairing(n, m)? - delta)
    }

    /// 𝒯_N(𝐭+δ𝐭) as a series in δt₁…δt_trunc, truncated at weight `trunc`.
    ///
    /// e^{−δV} = Σ c_μ x^{|μ|} δ𝐭^μ with c_μ the coefficients of
    /// exp(−Σ δtₖ/k), so each Hankel entry is Σ c_μ m_{i+j+|μ|} δ𝐭^μ.
    pub fn tau_series(&self, trunc: u32) -> Result<GradedSeries<Complex64>, MatrixError> {
        let need = 2 * self.n.saturating_sub(1) + trunc as usize;
        if self.moments.len() <= need {
            return Err(SeriesError::InsufficientTruncation {
                needed: need as u32,
                available: self.moments.len().saturating_sub(1) as u32,
            }
            .into());
        }
        let mut arg = GradedSeries::<Complex64>::zero(trunc);
        for k in 1..=trunc {
            arg = arg.add(&GradedSeries::time(k, trunc).scale(&Complex64::new(-1.0 / k as f64, 0.0)));
        }
        let e = arg.exp()?;
        let entry = |s: usize| {
            GradedSeries::from_terms(
                trunc,
                e.terms()
                    .map(|(mono, c)| (mono.clone(), c * self.moments[s + mono.weight() as usize])),
            )
        };
        let mut cache: BTreeMap<usize, GradedSeries<Complex64>> = BTreeMap::new();
        for s in 0..(2 * self.n).max(1) - 1 {
            cache.insert(s, entry(s));
        }
        let mut total = GradedSeries::zero(trunc);
        for (perm, sign) in permutations(self.n) {
            let mut prod = GradedSeries::constant(Complex64::new(sign * factorial(self.n), 0.0), trunc);
            for (i, &j) in perm.iter().enumerate() {
                prod = prod.mul(&cache[&(i + j)]);
            }
            total = total.add(&prod);
        }
        Ok(total)
    }
}

/// All permutations of 0..n with their signs.
fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out.into_iter()
        .map(|p| {
            let mut inv = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if p[a] > p[b] {
                        inv += 1;
                    }
                }
            }
            (p, if inv % 2 == 0 { 1.0 } else { -1.0 })
        })
        .collect()
}

impl ShiftedTau for MatrixTauContext {
    /// Prime weight times ⟨Π det(M−zᵢ)^{−αᵢ}⟩.
    fn shift_ratio(&self, d: &Divisor) -> Result<Complex64, HirotaError> {
        let w = d.prime_weight()?;
        Ok(w * self.shifted_tau(d)? / self.tau_n())
    }

    /// ⟨Tr (M−ξ)⁻¹⟩_D − ⟨Tr (M−ξ)⁻¹⟩ − Σαᵢ/(zᵢ−ξ).
    fn insertion_log(&self, d: &Divisor, xi: Complex64) -> Result<Complex64, HirotaError> {
        if xi.im.abs() < AXIS_CLEARANCE {
            return Err(MatrixError::InsertionOnContour(xi).into());
        }
        let f = Self::insertion_factor(d)?;
        let g = |x: f64| 1.0 / (x - xi);
        let with_d = self.trace_average(&f, g)?;
        let bare = self.trace_average(&|_| Complex64::new(1.0, 0.0), g)?;
        let pole: Complex64 = d.points().iter().map(|p| p.alpha / (p.z - xi)).sum();
        Ok(with_d - bare - pole)
    }
}

/// 𝒯_N(𝐭+Σ[zᵢ]−[z̃ᵢ])/𝒯_N against det of the two-point ratios.
pub fn fay_matrix_residual(
    ctx: &MatrixTauContext,
    zs: &[Complex64],
    zts: &[Complex64],
) -> Result<Check, HirotaError> {
    fay_numeric(ctx, zs, zts)
}

/// The monomial δtₖ.
pub fn time_monomial(k: u32) -> Monomial {
    Monomial::var(Var::Time(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn potential_validation() {
        assert!(PotentialSpec::new(vec![c(0.0, 0.0), c(-1.0, 0.0)]).is_err());
        assert!(PotentialSpec::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(PotentialSpec::new(vec![c(0.0, 0.0), c(1.0, 0.5)]).is_err());
        assert!(PotentialSpec::new(vec![]).is_err());
        let p = PotentialSpec::from_json("[0.1, {\"re\":1.0,\"im\":0.0}]").unwrap();
        assert_eq!(PotentialSpec::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn gaussian_moments() {
        let ctx = MatrixTauContext::with_moments(1, PotentialSpec::gaussian(), 8).unwrap();
        let s = (2.0 * PI).sqrt();
        let m = ctx.moments();
        for (j, want) in [(0, s), (2, s), (4, 3.0 * s), (6, 15.0 * s), (8, 105.0 * s)] {
            assert!((m[j] - want).norm() < 1e-12 * want, "m{j} = {}", m[j]);
        }
        for j in [1, 3, 5, 7] {
            assert!(m[j].norm() < 1e-13);
        }
        let gh = ctx.gauss_hermite_moments(8, 40);
        for j in 0..=8 {
            assert!((gh[j] - m[j]).norm() < 1e-10 * (1.0 + m[j].norm()));
        }
    }

    #[test]
    fn quartic_mass() {
        let ctx = MatrixTauContext::new(1, PotentialSpec::new(vec![c(0.0, 0.0); 3].into_iter().chain([c(1.0, 0.0)]).collect()).unwrap()).unwrap();
        let want = 2.0 * 2f64.sqrt() * statrs::function::gamma::gamma(1.25);
        assert!((ctx.moments()[0] - want).norm() < 1e-12);
    }

    #[test]
    fn small_n_tau() {
        let g = PotentialSpec::gaussian();
        let t1 = MatrixTauContext::new(1, g.clone()).unwrap().tau_n();
        assert!((t1 - (2.0 * PI).sqrt()).norm() < 1e-12);
        let c2 = MatrixTauContext::new(2, g.clone()).unwrap();
        assert!((c2.tau_n() - 4.0 * PI).norm() < 1e-11);
        let e2 = c2.eigenvalue_integral(80, |_| c(1.0, 0.0)).unwrap();
        assert!((e2 - 4.0 * PI).norm() < 1e-9 * 4.0 * PI);
    }

    #[test]
    fn psi_is_the_monic_orthogonal_polynomial() {
        let ctx = MatrixTauContext::new(2, PotentialSpec::gaussian()).unwrap();
        for x in [c(0.3, 0.0), c(1.5, -0.2), c(-2.0, 1.0)] {
            assert!((ctx.psi(x).unwrap() - (x * x - 1.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn phi_against_eigenvalue_quadrature() {
        let ctx = MatrixTauContext::new(2, PotentialSpec::quartic()).unwrap();
        let x = c(0.0, 1.0);
        let direct = ctx
            .eigenvalue_integral(90, |l| l.iter().map(|&y| 1.0 / (x - y)).product())
            .unwrap()
            / ctx.eigenvalue_integral(90, |_| c(1.0, 0.0)).unwrap();
        assert!((ctx.phi(x).unwrap() - direct).norm() < 1e-9);
        assert!(ctx.phi(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn pairing_has_the_index_shift() {
        let ctx = MatrixTauContext::new(1, PotentialSpec::gaussian()).unwrap();
        for n in 0..=2 {
            for m in 0..=3 {
                let r = ctx.orthogonality_residual(n, m).unwrap();
                assert!(r.norm() < 1e-9, "n={n} m={m}: {r}");
            }
        }
    }

    #[test]
    fn series_constant_and_first_order() {
        let ctx = MatrixTauContext::with_moments(2, PotentialSpec::quartic(), 10).unwrap();
        let s = ctx.tau_series(3).unwrap();
        assert!((s.constant_term() - ctx.tau_n()).norm() < 1e-12);
        // ∂_{t₂}𝒯 = −½⟨Tr M²⟩·𝒯 by finite differences in t₂.
        let h = 1e-4;
        let shifted = |d: f64| {
            let mut t = ctx.potential().times().to_vec();
            t[1] += d;
            MatrixTauContext::new(2, PotentialSpec::new(t).unwrap()).unwrap().tau_n()
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        let coef = s.coeff(&time_monomial(2));
        assert!((coef - fd).norm() < 1e-7 * fd.norm(), "{coef} vs {fd}");
    }

    #[test]
    fn insertion_on_the_axis_is_rejected() {
        let ctx = MatrixTauContext::new(2, PotentialSpec::gaussian()).unwrap();
        let d = Divisor::from_real(&[(c(0.5, 0.0), 1.0), (c(1.0, 1.0), -1.0)]).unwrap();
        assert!(matches!(ctx.shifted_tau(&d), Err(MatrixError::InsertionOnContour(_))));
        let d = Divisor::from_real(&[(c(0.5, 1.0), 0.5), (c(1.0, 1.0), -0.5)]).unwrap();
        assert!(matches!(ctx.shifted_tau(&d), Err(MatrixError::NonIntegerWeight(_))));
    }

    #[test]
    fn matrix_fay_and_reproducing() {
        use crate::hirota_fay::{kernel_leading, reproducing_numeric};
        let zs = [c(1.0, 1.0), c(2.0, 1.0)];
        let zts = [c(1.0, 2.0), c(2.0, 2.0)];
        for (n, v) in [(2, PotentialSpec::gaussian()), (3, PotentialSpec::quartic())] {
            let ctx = MatrixTauContext::new(n, v).unwrap();
            let r = fay_matrix_residual(&ctx, &zs, &zts).unwrap();
            assert!(r.relative() < 1e-6, "N={n} {r:?}");
            let r = reproducing_numeric(&ctx, c(0.4, 0.7), c(-0.3, 1.2), c(1.1, -0.6)).unwrap();
            assert!(r.relative() < 1e-8, "N={n} {r:?}");
            let k = kernel_leading(&ctx, c(0.2, 0.5), c(1e-6, 0.0)).unwrap();
            assert!((k - 1.0).norm() < 1e-5, "{k}");
        }
    }

    #[test]
    fn formal_identities_on_matrix_series() {
        use crate::hirota_fay::{fay_n2_residual, hirota_residual, kp_residual, reproducing_residual, TauContext};
        let t1 = MatrixTauContext::with_moments(1, PotentialSpec::gaussian(), 12).unwrap();
        let s = t1.tau_series(8).unwrap();
        let s = s.scale(&(1.0 / s.constant_term()));
        let ctx = TauContext::new(s.clone()).unwrap();
        for mu in [&[0, 0, 1][..], &[1, 1], &[0, 1, 1], &[2, 0, 1]] {
            let r = hirota_residual(&ctx, mu).unwrap();
            assert!(r.max_abs() < 1e-10, "{mu:?} {}", r.max_abs());
        }
        assert!(kp_residual(&s.log().unwrap()).unwrap().max_abs() < 1e-10);
        let t2 = MatrixTauContext::with_moments(2, PotentialSpec::gaussian(), 14).unwrap();
        let s = t2.tau_series(8).unwrap();
        let ctx = TauContext::new(s.scale(&(1.0 / s.constant_term()))).unwrap();
        let z = |i| Var::Aux(i);
        assert!(fay_n2_residual(&ctx, [z(0), z(1)], [z(2), z(3)]).unwrap().max_abs() < 1e-9);
        assert!(reproducing_residual(&ctx, z(0), z(1), z(2)).unwrap().max_abs() < 1e-10);
    }
}
