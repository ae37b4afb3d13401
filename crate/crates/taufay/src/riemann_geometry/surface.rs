//! Genus-0 sphere and genus-1 flat torus ℂ/(ℤ+τℤ) with marked loops,
//! characteristic, Abel map and prime form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divisors::Divisor;

use super::theta::Theta;
use super::GeometryError;

/// Default tail bound for theta sums.
pub const DEFAULT_TAIL: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<Complex64> for ComplexRecord {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexRecord> for Complex64 {
    fn from(r: ComplexRecord) -> Self {
        Complex64::new(r.re, r.im)
    }
}

/// Half-integer characteristic χ = ½n + ½τm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Characteristic {
    pub n: i32,
    pub m: i32,
}

impl Characteristic {
    pub const ODD: Self = Self { n: 1, m: 1 };

    pub fn is_odd(&self) -> bool {
        (self.n * self.m).rem_euclid(2) == 1
    }

    pub fn value(&self, tau: Complex64) -> Complex64 {
        Complex64::new(0.5 * self.n as f64, 0.0) + tau * (0.5 * self.m as f64)
    }
}

#[derive(Serialize, Deserialize)]
struct SurfaceRecord {
    genus: u32,
    #[serde(default)]
    tau: Option<ComplexRecord>,
    #[serde(default)]
    chi: Option<Characteristic>,
    #[serde(default)]
    origin: Option<ComplexRecord>,
}

/// A genus-0 or genus-1 surface with marked loops.
///
/// At genus 1 the A-loop runs from o to o+1 and the B-loop from o to o+τ in
/// the flat coordinate, and E(z₁,z₂) = Θ(z₁−z₂+χ)/Θ′(χ).
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceContext {
    genus: u32,
    tau: Complex64,
    chi: Characteristic,
    origin: Complex64,
    theta: Option<Theta>,
    theta_prime_chi: Complex64,
}

impl SurfaceContext {
    pub fn sphere(origin: Complex64) -> Self {
        Self {
            genus: 0,
            tau: Complex64::new(0.0, 1.0),
            chi: Characteristic::ODD,
            origin,
            theta: None,
            theta_prime_chi: Complex64::new(1.0, 0.0),
        }
    }

    pub fn torus(tau: Complex64, origin: Complex64) -> Result<Self, GeometryError> {
        Self::torus_with(tau, Characteristic::ODD, origin, DEFAULT_TAIL)
    }

    pub fn torus_with(
        tau: Complex64,
        chi: Characteristic,
        origin: Complex64,
        tail: f64,
    ) -> Result<Self, GeometryError> {
        let theta = Theta::new(tau, tail)?;
        if !chi.is_odd() {
            return Err(GeometryError::Invalid(format!(
                "characteristic ({}, {}) is not odd",
                chi.n, chi.m
            )));
        }
        let tp = theta.gradient(chi.value(tau));
        if tp.norm() < 1e-10 {
            return Err(GeometryError::Invalid("characteristic is singular".into()));
        }
        Ok(Self {
            genus: 1,
            tau,
            chi,
            origin,
            theta: Some(theta),
            theta_prime_chi: tp,
        })
    }

    pub fn from_json(s: &str) -> Result<Self, GeometryError> {
        let rec: SurfaceRecord =
            serde_json::from_str(s).map_err(|e| GeometryError::Invalid(e.to_string()))?;
        let origin = rec.origin.map(Complex64::from).unwrap_or_default();
        match rec.genus {
            0 => Ok(Self::sphere(origin)),
            1 => {
                let tau = rec
                    .tau
                    .ok_or_else(|| GeometryError::Invalid("genus 1 needs tau".into()))?;
                Self::torus_with(
                    tau.into(),
                    rec.chi.unwrap_or(Characteristic::ODD),
                    origin,
                    DEFAULT_TAIL,
                )
            }
            g => Err(GeometryError::UnsupportedGenus(g)),
        }
    }

    pub fn to_json(&self) -> String {
        let rec = SurfaceRecord {
            genus: self.genus,
            tau: (self.genus == 1).then(|| self.tau.into()),
            chi: (self.genus == 1).then_some(self.chi),
            origin: Some(self.origin.into()),
        };
        serde_json::to_string(&rec).expect("surface serializes")
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn origin(&self) -> Complex64 {
        self.origin
    }

    pub fn characteristic(&self) -> Characteristic {
        self.chi
    }

    /// χ as a point of the Jacobian.
    pub fn chi(&self) -> Complex64 {
        self.chi.value(self.tau)
    }

    /// The theta function of a genus-1 surface.
    pub fn theta(&self) -> Result<&Theta, GeometryError> {
        self.theta.as_ref().ok_or(GeometryError::UnsupportedGenus(self.genus))
    }

    /// Same surface with a different base point o.
    pub fn with_origin(&self, origin: Complex64) -> Self {
        let mut out = self.clone();
        out.origin = origin;
        out
    }

    /// 𝔞(z) = ∫ₒᶻ ω′: empty at genus 0, z − o at genus 1.
    pub fn abel(&self, z: Complex64) -> Vec<Complex64> {
        if self.genus == 0 {
            Vec::new()
        } else {
            vec![z - self.origin]
        }
    }

    /// Scalar Abel map (0 at genus 0).
    pub(crate) fn abel1(&self, z: Complex64) -> Complex64 {
        if self.genus == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            z - self.origin
        }
    }

    /// 𝔞(D) = Σ αᵢ 𝔞(zᵢ).
    pub fn abel_divisor(&self, d: &Divisor) -> Complex64 {
        d.points()
            .iter()
            .map(|p| p.alpha * self.abel1(p.z))
            .sum()
    }

    /// Prime form in the flat coordinate.
    pub fn prime_form(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        match &self.theta {
            None => z1 - z2,
            Some(th) => th.eval(z1 - z2 + self.chi()) / self.theta_prime_chi,
        }
    }

    /// g(u) = d/du ln Θ(u+χ), so that d ln E(z,p)/dz = g(z−p).
    /// At genus 0, g(u) = 1/u.
    pub fn log_prime_derivative(&self, u: Complex64) -> Complex64 {
        match &self.theta {
            None => 1.0 / u,
            Some(th) => {
                let d = th.derivatives(u + self.chi(), 1);
                d[1] / d[0]
            }
        }
    }

    /// g⁽ᵏ⁾(u) for k ≥ 0.
    pub fn log_prime_derivative_n(&self, u: Complex64, k: usize) -> Result<Complex64, GeometryError> {
        match &self.theta {
            None => {
                let mut c = 1.0;
                for j in 1..=k {
                    c *= -(j as f64);
                }
                Ok(c / u.powi(k as i32 + 1))
            }
            Some(th) => {
                let b = th.log_taylor(u + self.chi(), k + 1)?;
                let fact: f64 = (1..=k + 1).map(|j| j as f64).product();
                Ok(b[k + 1] * fact)
            }
        }
    }

    /// Π_{i<j} E(zᵢ,zⱼ)^{αᵢαⱼ} in the stored order.
    pub fn prime_weight(&self, d: &Divisor) -> Result<Complex64, GeometryError> {
        Ok(d.prime_weight_with(|a, b| self.prime_form(a, b))?)
    }

    /// Lattice translates p + n + mτ with |n|,|m| ≤ 1 (all of them at genus 1,
    /// just p at genus 0).
    pub fn translates(&self, p: Complex64) -> Vec<Complex64> {
        if self.genus == 0 {
            return vec![p];
        }
        let mut out = Vec::with_capacity(9);
        for m in -1..=1 {
            for n in -1..=1 {
                out.push(p + n as f64 + self.tau * m as f64);
            }
        }
        out
    }

    /// Whether z = o + s + tτ with s, t ∈ (margin, 1 − margin). Always true
    /// at genus 0.
    pub fn in_fundamental_domain(&self, z: Complex64, margin: f64) -> bool {
        if self.genus == 0 {
            return true;
        }
        let w = z - self.origin;
        let t = w.im / self.tau.im;
        let s = w.re - t * self.tau.re;
        s > margin && s < 1.0 - margin && t > margin && t < 1.0 - margin
    }

    /// Reduce z into the fundamental parallelogram {o + s + tτ : s,t ∈ [0,1)}.
    pub fn reduce(&self, z: Complex64) -> Complex64 {
        if self.genus == 0 {
            return z;
        }
        let w = z - self.origin;
        let t = w.im / self.tau.im;
        let s = w.re - t * self.tau.re;
        self.origin + (s - s.floor()) + self.tau * (t - t.floor())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn prime_form_vanishes_linearly() {
        let s = SurfaceContext::torus(c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        let z = c(0.3, 0.2);
        let ratio = |h: f64| s.prime_form(z + h, z) / h;
        // Θ(u+χ) = Θ′(χ)·u·(1 − iπu + O(u²)) in the flat coordinate.
        let h = 1e-4;
        assert!((ratio(h) - c(1.0, -PI * h)).norm() < 1e-6);
        let extrapolated = ratio(h / 2.0) * 2.0 - ratio(h);
        assert!((extrapolated - 1.0).norm() < 1e-6);
        assert_eq!(SurfaceContext::sphere(c(0.0, 0.0)).prime_form(c(2.0, 0.0), c(0.5, 0.0)), c(1.5, 0.0));
    }

    #[test]
    fn prime_form_has_no_zero_off_the_diagonal() {
        let s = SurfaceContext::torus(c(0.3, 0.8), c(0.0, 0.0)).unwrap();
        let w = c(0.1, 0.1);
        for i in 0..12 {
            for j in 0..12 {
                let z = w + (i as f64 + 0.5) / 12.0 + s.tau() * ((j as f64 + 0.5) / 12.0);
                assert!(s.prime_form(z, w).norm() > 1e-3);
            }
        }
    }

    #[test]
    fn abel_monodromy() {
        let s = SurfaceContext::torus(c(0.3, 0.8), c(0.1, 0.1)).unwrap();
        let z = c(0.4, 0.3);
        assert!((s.abel1(z + 1.0) - s.abel1(z) - 1.0).norm() < 1e-15);
        assert!((s.abel1(z + s.tau()) - s.abel1(z) - s.tau()).norm() < 1e-15);
        assert!(s.abel1(s.origin()).norm() == 0.0);
    }

    #[test]
    fn log_derivatives_agree() {
        let s = SurfaceContext::torus(c(0.3, 0.8), c(0.0, 0.0)).unwrap();
        let u = c(0.21, 0.13);
        let g0 = s.log_prime_derivative_n(u, 0).unwrap();
        assert!((g0 - s.log_prime_derivative(u)).norm() < 1e-12);
        let h = 1e-5;
        let fd = (s.log_prime_derivative(u + h) - s.log_prime_derivative(u - h)) / (2.0 * h);
        assert!((fd - s.log_prime_derivative_n(u, 1).unwrap()).norm() < 1e-6);
        let g = SurfaceContext::sphere(c(0.0, 0.0));
        assert!((g.log_prime_derivative_n(c(2.0, 0.0), 2).unwrap() - 2.0 / 8.0).norm() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let s = SurfaceContext::torus(c(0.3, 0.8), c(0.1, -0.2)).unwrap();
        let back = SurfaceContext::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let g0 = SurfaceContext::from_json(r#"{"genus":0}"#).unwrap();
        assert_eq!(g0.genus(), 0);
        assert!(SurfaceContext::from_json(r#"{"genus":2}"#).is_err());
        assert!(SurfaceContext::from_json(r#"{"genus":1,"tau":{"re":0,"im":1},"chi":{"n":0,"m":1}}"#).is_err());
    }
}
