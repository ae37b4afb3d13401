//! Laurent objects in local variables ξ₁,…,ξₙ with graded-series coefficients,
//! the insertion operator, residues, potentials and correlators.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::coeff::Coeff;
use super::series::{GradedSeries, Monomial, TimesVector, Var};
use super::SeriesError;

/// Finite Laurent polynomial in one or more local variables whose
/// coefficients are truncated graded series.
///
/// Multi-variable objects are expanded in the region |ξₙ| < … < |ξ₁|.
/// When `differential` is set, the object carries dξ₁⊗…⊗dξₙ.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries<C> {
    vars: Vec<String>,
    trunc: u32,
    differential: bool,
    coeffs: BTreeMap<Vec<i32>, GradedSeries<C>>,
}

impl<C: Coeff> LaurentSeries<C> {
    pub fn new(vars: &[&str], trunc: u32, differential: bool) -> Self {
        Self {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            trunc,
            differential,
            coeffs: BTreeMap::new(),
        }
    }

    /// ξʲ·c (with dξ if `differential`).
    pub fn power(var: &str, j: i32, c: C, trunc: u32, differential: bool) -> Self {
        let mut out = Self::new(&[var], trunc, differential);
        out.insert(vec![j], GradedSeries::constant(c, trunc));
        out
    }

    /// (1 − z/ξ)^{−n} = Σ_m C(n+m−1, m) zᵐ ξ^{−m}, with the sum cut where the
    /// weight of zᵐ exceeds the truncation degree.
    pub fn geometric_pole(var: &str, z: &GradedSeries<C>, n: u32) -> Self {
        let trunc = z.truncation();
        let mut out = Self::new(&[var], trunc, false);
        let mut zpow = GradedSeries::one(trunc);
        let mut binom = C::one();
        for m in 0..=trunc {
            if m > 0 {
                zpow = zpow.mul(z);
                binom = binom
                    .mul(&C::from_int((n + m - 1) as i64))
                    .mul(&C::from_ratio(1, m as i64));
            }
            if n == 0 && m > 0 {
                break;
            }
            out.insert(vec![-(m as i32)], zpow.scale(&binom));
        }
        out
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn truncation(&self) -> u32 {
        self.trunc
    }

    pub fn carries_differential(&self) -> bool {
        self.differential
    }

    pub fn with_differential(mut self, differential: bool) -> Self {
        self.differential = differential;
        self
    }

    /// Add `s·Π ξᵢ^{powers[i]}`; the coefficient is brought to the common degree.
    pub fn insert(&mut self, powers: Vec<i32>, s: GradedSeries<C>) {
        assert_eq!(powers.len(), self.vars.len(), "power vector length");
        let s = s.truncate_to(self.trunc).with_nominal_degree(self.trunc);
        let entry = self
            .coeffs
            .entry(powers.clone())
            .or_insert_with(|| GradedSeries::zero(self.trunc));
        *entry = entry.add(&s);
        if entry.is_empty() {
            self.coeffs.remove(&powers);
        }
    }

    pub fn coefficient(&self, powers: &[i32]) -> GradedSeries<C> {
        self.coeffs
            .get(powers)
            .cloned()
            .unwrap_or_else(|| GradedSeries::zero(self.trunc))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i32>, &GradedSeries<C>)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest power of variable `idx` present (the order of the principal part).
    pub fn min_power(&self, idx: usize) -> Option<i32> {
        self.coeffs.keys().map(|p| p[idx]).min()
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SeriesError> {
        if self.vars != other.vars {
            return Err(SeriesError::VariableMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        if self.differential != other.differential {
            return Err(SeriesError::DifferentialMismatch);
        }
        let mut out = self.clone();
        out.trunc = self.trunc.min(other.trunc);
        for (p, s) in &other.coeffs {
            out.insert(p.clone(), s.clone());
        }
        Ok(out.retruncate())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.scale(&C::one().neg()))
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::new(&[], self.trunc, self.differential);
        out.vars = self.vars.clone();
        for (p, s) in &self.coeffs {
            out.insert(p.clone(), s.scale(c));
        }
        out
    }

    pub fn mul_series(&self, f: &GradedSeries<C>) -> Self {
        let mut out = self.clone();
        out.trunc = self.trunc.min(f.truncation());
        out.coeffs.clear();
        for (p, s) in &self.coeffs {
            out.insert(p.clone(), s.mul(f));
        }
        out
    }

    /// Product of Laurent objects in the same variables. At most one factor may
    /// carry the differential.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        if self.differential && other.differential {
            return Err(SeriesError::DifferentialMismatch);
        }
        let mut out = self.clone();
        out.trunc = self.trunc.min(other.trunc);
        out.differential = self.differential || other.differential;
        out.coeffs.clear();
        for (pa, sa) in &self.coeffs {
            for (pb, sb) in &other.coeffs {
                let p = pa.iter().zip(pb).map(|(a, b)| a + b).collect();
                out.insert(p, sa.mul(sb));
            }
        }
        Ok(out)
    }

    fn retruncate(mut self) -> Self {
        let n = self.trunc;
        let coeffs = std::mem::take(&mut self.coeffs);
        for (p, s) in coeffs {
            self.insert(p, s.truncate_to(n));
        }
        self
    }

    /// Residue of a one-variable differential: the ξ⁻¹ coefficient.
    pub fn residue(&self) -> Result<GradedSeries<C>, SeriesError> {
        if !self.differential {
            return Err(SeriesError::NotADifferential);
        }
        if self.vars.len() != 1 {
            return Err(SeriesError::VariableMismatch);
        }
        Ok(self.coefficient(&[-1]))
    }

    /// Residue in one variable of a multi-variable differential.
    pub fn residue_in(&self, var: &str) -> Result<Self, SeriesError> {
        if !self.differential {
            return Err(SeriesError::NotADifferential);
        }
        let idx = self
            .vars
            .iter()
            .position(|v| v == var)
            .ok_or(SeriesError::VariableMismatch)?;
        let mut vars = self.vars.clone();
        vars.remove(idx);
        let mut out = Self {
            vars,
            trunc: self.trunc,
            differential: true,
            coeffs: BTreeMap::new(),
        };
        for (p, s) in &self.coeffs {
            if p[idx] == -1 {
                let mut q = p.clone();
                q.remove(idx);
                out.insert(q, s.clone());
            }
        }
        Ok(out)
    }

    /// The coefficient series of a Laurent object without variables.
    pub fn into_scalar(self) -> Result<GradedSeries<C>, SeriesError> {
        if !self.vars.is_empty() {
            return Err(SeriesError::VariableMismatch);
        }
        Ok(self.coefficient(&[]))
    }

    /// Apply Δ in a new variable (appended last) to every coefficient.
    pub fn insertion(&self, var: &str) -> Self {
        let mut vars: Vec<&str> = self.vars.iter().map(String::as_str).collect();
        vars.push(var);
        let mut out = Self::new(&vars, self.trunc, true);
        for (p, s) in &self.coeffs {
            for (j, c) in insertion_coefficients(s) {
                let mut q = p.clone();
                q.push(j);
                out.insert(q, c);
            }
        }
        out
    }

    /// Maximal coefficient modulus over all powers.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|s| s.max_abs()).fold(0.0, f64::max)
    }
}

/// Pairs (k−1, k·∂f/∂t_k) for all k ≤ N.
fn insertion_coefficients<C: Coeff>(f: &GradedSeries<C>) -> Vec<(i32, GradedSeries<C>)> {
    let n = f.truncation();
    (1..=n)
        .filter_map(|k| {
            let d = f.derivative(Var::Time(k)).ok()?;
            let d = d.scale(&C::from_int(k as i64));
            (!d.is_empty()).then_some((k as i32 - 1, d))
        })
        .collect()
}

/// f(𝐭 + sign·α[ξ]) as a series in ξ with non-negative powers.
pub fn sato_shift<C: Coeff>(f: &GradedSeries<C>, alpha: &C, sign: i32, var: &str) -> LaurentSeries<C> {
    let n = f.truncation();
    let xi = Var::Aux(u32::MAX);
    let a = if sign < 0 { alpha.neg() } else { alpha.clone() };
    let shifts: BTreeMap<u32, GradedSeries<C>> = (1..=n)
        .map(|k| {
            (
                k,
                GradedSeries::monomial(Monomial::pow(xi, k), a.clone(), n),
            )
        })
        .collect();
    let shifted = f.shift_times(&shifts);
    let mut out = LaurentSeries::new(&[var], n, false);
    for (j, s) in shifted.split_by(xi) {
        out.insert(vec![j as i32], s);
    }
    out
}

/// Δ_ξ f = dξ Σₖ k ξ^{k−1} ∂f/∂tₖ.
pub fn insertion<C: Coeff>(f: &GradedSeries<C>, var: &str) -> LaurentSeries<C> {
    let mut out = LaurentSeries::new(&[var], f.truncation(), true);
    for (j, c) in insertion_coefficients(f) {
        out.insert(vec![j], c);
    }
    out
}

/// V_𝐭(ξ) = Σ (tₖ/k) ξ⁻ᵏ for numeric times.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Potential {
    pub times: TimesVector,
}

impl Potential {
    pub fn new(times: TimesVector) -> Self {
        Self { times }
    }

    pub fn value(&self, xi: Complex64) -> Complex64 {
        self.times
            .iter()
            .map(|(k, t)| t / k as f64 * xi.powi(-(k as i32)))
            .sum()
    }

    /// dV = −Σ tₖ ξ^{−k−1} dξ, with constant coefficients.
    pub fn differential(&self, var: &str, trunc: u32) -> LaurentSeries<Complex64> {
        let mut out = LaurentSeries::new(&[var], trunc, true);
        for (k, t) in self.times.iter() {
            out.insert(vec![-(k as i32) - 1], GradedSeries::constant(-t, trunc));
        }
        out
    }
}

/// dV with the times kept as formal variables: −Σ_{k≤N} tₖ ξ^{−k−1} dξ.
pub fn formal_potential_differential<C: Coeff>(var: &str, trunc: u32) -> LaurentSeries<C> {
    let mut out = LaurentSeries::new(&[var], trunc, true);
    for k in 1..=trunc {
        out.insert(vec![-(k as i32) - 1], GradedSeries::time(k, trunc).neg());
    }
    out
}

/// Whether the correlator includes the −dV and double-pole terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Counterterms {
    Include,
    Omit,
}

/// ln T up to an additive constant (the constant is irrelevant for every
/// derivative and avoids leaving the coefficient field).
pub fn log_up_to_constant<C: Coeff>(t: &GradedSeries<C>) -> Result<GradedSeries<C>, SeriesError> {
    let c0 = t.constant_term();
    let inv = c0.inv().ok_or(SeriesError::LogOfZeroConstant)?;
    t.scale(&inv).log()
}

/// Wₙ(ξ₁,…,ξₙ) = Δ^{⊗n} ln T̂ with, on request, −dV added for n = 1 and
/// dξ₁dξ₂/(ξ₁−ξ₂)² added for n = 2 (expanded in |ξ₂| < |ξ₁| up to k = N).
pub fn correlator<C: Coeff>(
    t: &GradedSeries<C>,
    n: usize,
    counterterms: Counterterms,
) -> Result<LaurentSeries<C>, SeriesError> {
    if n == 0 {
        return Err(SeriesError::VariableMismatch);
    }
    let f = log_up_to_constant(t)?;
    let trunc = f.truncation();
    let names: Vec<String> = (1..=n).map(|i| format!("xi{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut out = LaurentSeries::new(&refs, trunc, true);
    let mut stack: Vec<(Vec<u32>, GradedSeries<C>)> = vec![(Vec::new(), f)];
    while let Some((ks, g)) = stack.pop() {
        if ks.len() == n {
            let factor: i64 = ks.iter().map(|&k| k as i64).product();
            let powers = ks.iter().map(|&k| k as i32 - 1).collect();
            out.insert(powers, g.scale(&C::from_int(factor)).with_nominal_degree(trunc));
            continue;
        }
        for k in 1..=g.truncation() {
            if let Ok(d) = g.derivative(Var::Time(k)) {
                if !d.is_empty() {
                    let mut next = ks.clone();
                    next.push(k);
                    stack.push((next, d));
                }
            }
        }
    }
    if counterterms == Counterterms::Include {
        match n {
            1 => {
                for k in 1..=trunc {
                    out.insert(vec![-(k as i32) - 1], GradedSeries::time(k, trunc));
                }
            }
            2 => {
                for k in 1..=trunc as i32 {
                    out.insert(
                        vec![-k - 1, k - 1],
                        GradedSeries::constant(C::from_int(k as i64), trunc),
                    );
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Π(1/kᵢ) Res…Res Π ξᵢ^{−kᵢ} W for an n-variable differential W.
pub fn miwa_jimbo<C: Coeff>(w: &LaurentSeries<C>, ks: &[u32]) -> Result<GradedSeries<C>, SeriesError> {
    if !w.carries_differential() {
        return Err(SeriesError::NotADifferential);
    }
    if ks.len() != w.vars().len() {
        return Err(SeriesError::VariableMismatch);
    }
    let powers: Vec<i32> = ks.iter().map(|&k| k as i32 - 1).collect();
    let denom: i64 = ks.iter().map(|&k| k as i64).product();
    let weight: u32 = ks.iter().sum();
    let c = w.coefficient(&powers).scale(&C::from_ratio(1, denom));
    Ok(c.truncate_to(w.truncation().saturating_sub(weight)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal_core::coeff::rat;
    use num_rational::BigRational;

    type Q = GradedSeries<BigRational>;
    type L = LaurentSeries<BigRational>;

    #[test]
    fn sato_shift_examples() {
        let n = 4;
        let s = sato_shift(&Q::time(1, n), &rat(1, 1), 1, "xi");
        assert_eq!(s.coefficient(&[0]), Q::time(1, n));
        assert_eq!(s.coefficient(&[1]), Q::one(n));
        let s2 = sato_shift(&Q::time(2, n), &rat(1, 1), 1, "xi");
        assert_eq!(s2.coefficient(&[2]), Q::one(n));
        let s3 = sato_shift(&Q::time(1, n).pow(2), &rat(1, 1), 1, "xi");
        assert_eq!(s3.coefficient(&[0]), Q::time(1, n).pow(2));
        assert_eq!(s3.coefficient(&[1]), Q::time(1, n).scale(&rat(2, 1)));
        assert_eq!(s3.coefficient(&[2]), Q::one(n));
    }

    #[test]
    fn insertion_of_single_times() {
        let d = insertion(&Q::time(3, 4), "xi");
        assert_eq!(d.coefficient(&[2]), Q::constant(rat(3, 1), 4));
        assert_eq!(d.iter().count(), 1);
        assert!(insertion(&Q::constant(rat(5, 1), 4), "xi").is_zero());
    }

    #[test]
    fn insertion_of_potential_gives_double_pole() {
        let n = 5;
        let dv: L = formal_potential_differential("xi1", n);
        let d = dv.insertion("xi2");
        for k in 1..=n as i32 {
            assert_eq!(
                d.coefficient(&[-k - 1, k - 1]),
                Q::constant(rat(-(k as i64), 1), n)
            );
        }
        assert_eq!(d.iter().count(), n as usize);
    }

    #[test]
    fn residue_lemma_examples() {
        let n = 4;
        let z = Q::var(Var::Aux(0), n);
        // Res dξ/ξ (1 − z/ξ)^{-1} ξ² = z²
        let g = L::geometric_pole("xi", &z, 1);
        let f = L::power("xi", 1, rat(1, 1), n, true);
        let r = g.mul(&f).unwrap().residue().unwrap();
        assert_eq!(r, z.pow(2));
        // Res dξ ξ³ = 0
        assert!(L::power("xi", 3, rat(1, 1), n, true).residue().unwrap().is_empty());
        // Res dξ/ξ² ξ³ (1 − z/ξ)^{-2} = 3z²
        let g2 = L::geometric_pole("xi", &z, 2);
        let f2 = L::power("xi", 1, rat(1, 1), n, true);
        let r2 = g2.mul(&f2).unwrap().residue().unwrap();
        assert_eq!(r2, z.pow(2).scale(&rat(3, 1)));
    }

    #[test]
    fn residue_requires_differential() {
        let l = L::power("xi", -1, rat(1, 1), 3, false);
        assert_eq!(l.residue(), Err(SeriesError::NotADifferential));
    }

    #[test]
    fn trivial_tau_correlator_is_minus_dv() {
        let n = 4;
        let w = correlator(&Q::one(n), 1, Counterterms::Include).unwrap();
        for k in 1..=n {
            assert_eq!(w.coefficient(&[-(k as i32) - 1]), Q::time(k, n));
        }
        for k in 1..=n {
            let xik = L::power("xi1", k as i32, rat(1, 1), n, false);
            let r = xik.mul(&w).unwrap().residue().unwrap();
            assert_eq!(r, Q::time(k, n));
        }
    }
}
