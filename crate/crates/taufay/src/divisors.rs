//! Weighted point sets: degree and support predicates, Sato vectors,
//! screening, genus-0 prime-form weights and permutation signs.
//!
//! A divisor is an *ordered* sequence of points. Everything sign-sensitive
//! (prime weights, Pauli signs) is relative to the stored order.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formal_core::TimesVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DivisorError {
    #[error("points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("the origin is already in the support")]
    OriginInSupport,
    #[error("not a permutation of {0} points")]
    InvalidPermutation(usize),
    #[error("divisor is not supersymmetric")]
    NotSupersymmetric,
    #[error("divisor has degree {0}, expected {1}")]
    WrongDegree(Complex64, Complex64),
    #[error("invalid divisor json: {0}")]
    Json(String),
}

/// Exact-zero tolerance used when classifying weights.
const WEIGHT_EPS: f64 = 1e-12;

/// A point z with weight α.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "PointRecord", into = "PointRecord")]
pub struct DivisorPoint {
    pub z: Complex64,
    pub alpha: Complex64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRecord {
    re: f64,
    im: f64,
    alpha_re: f64,
    #[serde(default)]
    alpha_im: f64,
}

impl From<PointRecord> for DivisorPoint {
    fn from(r: PointRecord) -> Self {
        Self {
            z: Complex64::new(r.re, r.im),
            alpha: Complex64::new(r.alpha_re, r.alpha_im),
        }
    }
}

impl From<DivisorPoint> for PointRecord {
    fn from(p: DivisorPoint) -> Self {
        Self {
            re: p.z.re,
            im: p.z.im,
            alpha_re: p.alpha.re,
            alpha_im: p.alpha.im,
        }
    }
}

/// Predicates of a divisor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DivisorClass {
    pub neutral: bool,
    pub integer: bool,
    pub unitary: bool,
    pub positive: bool,
    pub negative: bool,
    pub supersymmetric: bool,
}

/// Ordered weighted point set with pairwise-distinct points.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Divisor {
    points: Vec<DivisorPoint>,
}

fn is_integer(a: Complex64) -> bool {
    a.im.abs() < WEIGHT_EPS && (a.re - a.re.round()).abs() < WEIGHT_EPS
}

/// zᵖ with exact integer powers and the principal branch otherwise
/// (cut along the negative real axis).
pub fn principal_pow(z: Complex64, p: Complex64) -> Complex64 {
    if is_integer(p) {
        z.powi(p.re.round() as i32)
    } else {
        (p * z.ln()).exp()
    }
}

impl Divisor {
    /// Build a divisor; points must be pairwise distinct.
    pub fn new(points: Vec<DivisorPoint>) -> Result<Self, DivisorError> {
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i].z == points[j].z {
                    return Err(DivisorError::CoincidentPoints(i, j));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn from_pairs(pairs: &[(Complex64, Complex64)]) -> Result<Self, DivisorError> {
        Self::new(
            pairs
                .iter()
                .map(|&(z, alpha)| DivisorPoint { z, alpha })
                .collect(),
        )
    }

    /// Real-weighted convenience constructor.
    pub fn from_real(pairs: &[(Complex64, f64)]) -> Result<Self, DivisorError> {
        Self::new(
            pairs
                .iter()
                .map(|&(z, a)| DivisorPoint {
                    z,
                    alpha: Complex64::new(a, 0.0),
                })
                .collect(),
        )
    }

    /// [z₁]−[z̃₁]+[z₂]−[z̃₂]+… in interleaved order.
    pub fn supersymmetric(zs: &[Complex64], zts: &[Complex64]) -> Result<Self, DivisorError> {
        if zs.len() != zts.len() {
            return Err(DivisorError::NotSupersymmetric);
        }
        let pairs: Vec<(Complex64, f64)> = zs
            .iter()
            .zip(zts)
            .flat_map(|(&z, &zt)| [(z, 1.0), (zt, -1.0)])
            .collect();
        Self::from_real(&pairs)
    }

    pub fn points(&self) -> &[DivisorPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn degree(&self) -> Complex64 {
        self.points.iter().map(|p| p.alpha).sum()
    }

    /// Points with nonzero weight.
    pub fn support(&self) -> Vec<Complex64> {
        self.points
            .iter()
            .filter(|p| p.alpha.norm() > WEIGHT_EPS)
            .map(|p| p.z)
            .collect()
    }

    pub fn classify(&self) -> DivisorClass {
        let neutral = self.degree().norm() < WEIGHT_EPS;
        let integer = self.points.iter().all(|p| is_integer(p.alpha));
        let unitary = self
            .points
            .iter()
            .all(|p| (p.alpha - 1.0).norm() < WEIGHT_EPS || (p.alpha + 1.0).norm() < WEIGHT_EPS);
        let real = self.points.iter().all(|p| p.alpha.im.abs() < WEIGHT_EPS);
        let positive = real && self.points.iter().all(|p| p.alpha.re > 0.0);
        let negative = real && self.points.iter().all(|p| p.alpha.re < 0.0);
        DivisorClass {
            neutral,
            integer,
            unitary,
            positive,
            negative,
            supersymmetric: neutral && unitary,
        }
    }

    /// Dₖ = Σ αᵢ zᵢᵏ for 1 ≤ k ≤ k_max.
    pub fn sato_vector(&self, k_max: u32) -> TimesVector {
        (1..=k_max)
            .map(|k| {
                let v: Complex64 = self.points.iter().map(|p| p.alpha * p.z.powu(k)).sum();
                (k, v)
            })
            .collect()
    }

    /// Append the origin with weight −deg D. Neutral divisors only lose
    /// their weight-zero points.
    pub fn screen(&self) -> Result<Self, DivisorError> {
        if self.support().contains(&Complex64::new(0.0, 0.0)) {
            return Err(DivisorError::OriginInSupport);
        }
        let mut points: Vec<DivisorPoint> = self
            .points
            .iter()
            .copied()
            .filter(|p| p.alpha.norm() > WEIGHT_EPS)
            .collect();
        let d = self.degree();
        if d.norm() > WEIGHT_EPS {
            points.retain(|p| p.z != Complex64::new(0.0, 0.0));
            points.push(DivisorPoint {
                z: Complex64::new(0.0, 0.0),
                alpha: -d,
            });
        }
        Self::new(points)
    }

    /// D + D′, adding weights at coincident points (kept at first occurrence).
    pub fn add(&self, other: &Self) -> Self {
        let mut points = self.points.clone();
        for q in &other.points {
            match points.iter_mut().find(|p| p.z == q.z) {
                Some(p) => p.alpha += q.alpha,
                None => points.push(*q),
            }
        }
        Self { points }
    }

    /// Multiply every weight by `s`.
    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| DivisorPoint {
                    z: p.z,
                    alpha: p.alpha * s,
                })
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// Π_{i<j} (zᵢ−zⱼ)^{αᵢαⱼ} in the stored order.
    pub fn prime_weight(&self) -> Result<Complex64, DivisorError> {
        self.prime_weight_with(|a, b| a - b)
    }

    /// Π_{i<j} E(zᵢ,zⱼ)^{αᵢαⱼ} for a caller-supplied prime form.
    pub fn prime_weight_with(
        &self,
        e: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Complex64, DivisorError> {
        let mut acc = Complex64::new(1.0, 0.0);
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                let (p, q) = (self.points[i], self.points[j]);
                if p.z == q.z {
                    return Err(DivisorError::CoincidentPoints(i, j));
                }
                acc *= principal_pow(e(p.z, q.z), p.alpha * q.alpha);
            }
        }
        Ok(acc)
    }

    fn check_permutation(&self, sigma: &[usize]) -> Result<(), DivisorError> {
        let n = self.points.len();
        let mut seen = vec![false; n];
        if sigma.len() != n {
            return Err(DivisorError::InvalidPermutation(n));
        }
        for &s in sigma {
            if s >= n || seen[s] {
                return Err(DivisorError::InvalidPermutation(n));
            }
            seen[s] = true;
        }
        Ok(())
    }

    /// The divisor with point i moved to position σ(i).
    pub fn permuted(&self, sigma: &[usize]) -> Result<Self, DivisorError> {
        self.check_permutation(sigma)?;
        let mut points = self.points.clone();
        for (i, &s) in sigma.iter().enumerate() {
            points[s] = self.points[i];
        }
        Ok(Self { points })
    }

    /// exp(πi Σ_{i<j, σ(i)>σ(j)} αᵢαⱼ).
    pub fn permutation_sign(&self, sigma: &[usize]) -> Result<Complex64, DivisorError> {
        self.check_permutation(sigma)?;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..sigma.len() {
            for j in i + 1..sigma.len() {
                if sigma[i] > sigma[j] {
                    s += self.points[i].alpha * self.points[j].alpha;
                }
            }
        }
        if is_integer(s) {
            let n = s.re.round() as i64;
            return Ok(Complex64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
        }
        Ok((Complex64::new(0.0, PI) * s).exp())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("divisor serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, DivisorError> {
        let d: Divisor = serde_json::from_str(s).map_err(|e| DivisorError::Json(e.to_string()))?;
        Self::new(d.points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn classify_examples() {
        let d = Divisor::from_real(&[(c(1.0), 1.0), (c(2.0), -1.0)]).unwrap();
        let k = d.classify();
        assert!(k.neutral && k.supersymmetric);

        let h = Divisor::from_real(&[(c(1.0), 0.5), (c(2.0), -0.5), (c(3.0), -0.5), (c(4.0), -0.5)])
            .unwrap();
        assert!((h.degree() - c(-1.0)).norm() < 1e-15);
        assert!(!h.classify().integer);

        let p = Divisor::from_real(&[(c(1.0), 2.0), (c(2.0), 3.0)]).unwrap();
        let k = p.classify();
        assert!(k.positive && k.integer && !k.unitary);
        assert_eq!(p.degree(), c(5.0));
    }

    #[test]
    fn coincident_points_rejected() {
        let e = Divisor::from_real(&[(c(1.0), 1.0), (c(1.0), -1.0)]);
        assert_eq!(e, Err(DivisorError::CoincidentPoints(0, 1)));
    }

    #[test]
    fn sato_vector_examples() {
        let z = Complex64::new(0.5, 0.2);
        let d = Divisor::from_real(&[(z, 1.0)]).unwrap();
        let v = d.sato_vector(4);
        for k in 1..=4 {
            assert!((v.get(k) - z.powu(k)).norm() < 1e-15);
        }
        let o = Divisor::from_real(&[(c(0.0), 1.0)]).unwrap();
        assert_eq!(o.sato_vector(5).max_index(), 0);
        let a = Complex64::new(0.3, 0.4);
        let s = Divisor::from_real(&[(a, 1.0), (-a, 1.0)]).unwrap().sato_vector(4);
        assert!(s.get(1).norm() < 1e-15 && s.get(3).norm() < 1e-15);
        assert!((s.get(2) - 2.0 * a * a).norm() < 1e-15);
        assert!((s.get(4) - 2.0 * a.powu(4)).norm() < 1e-15);
    }

    #[test]
    fn screening() {
        let z = Complex64::new(0.5, 0.2);
        let d = Divisor::from_real(&[(z, 1.0)]).unwrap();
        let s = d.screen().unwrap();
        assert_eq!(s.points()[1].z, c(0.0));
        assert_eq!(s.points()[1].alpha, c(-1.0));
        let n = Divisor::from_real(&[(z, 1.0), (c(2.0), -1.0), (c(3.0), 0.0)]).unwrap();
        assert_eq!(n.screen().unwrap().len(), 2);
        let o = Divisor::from_real(&[(c(0.0), 1.0)]).unwrap();
        assert_eq!(o.screen(), Err(DivisorError::OriginInSupport));
    }

    #[test]
    fn prime_weight_hand_example() {
        let d = Divisor::from_real(&[(c(2.0), 1.0), (c(3.0), 1.0), (c(0.0), -1.0), (c(1.0), -1.0)])
            .unwrap();
        assert!((d.prime_weight().unwrap() - c(1.0 / 12.0)).norm() < 1e-15);
        let a = Divisor::from_real(&[(c(2.0), 1.0), (c(5.0), -1.0)]).unwrap();
        assert!((a.prime_weight().unwrap() - c(-1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn permutation_sign_examples() {
        let d = Divisor::from_real(&[(c(1.0), 1.0), (c(2.0), 1.0), (c(3.0), -1.0)]).unwrap();
        assert_eq!(d.permutation_sign(&[0, 1, 2]).unwrap(), c(1.0));
        assert_eq!(d.permutation_sign(&[1, 0, 2]).unwrap(), c(-1.0));
        let e = Divisor::from_real(&[(c(1.0), 2.0), (c(2.0), 3.0)]).unwrap();
        assert_eq!(e.permutation_sign(&[1, 0]).unwrap(), c(1.0));
        assert!(d.permutation_sign(&[0, 0, 1]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = Divisor::from_pairs(&[(Complex64::new(1.0, 2.0), Complex64::new(0.5, -1.0))]).unwrap();
        let s = d.to_json();
        assert_eq!(s, r#"[{"re":1.0,"im":2.0,"alpha_re":0.5,"alpha_im":-1.0}]"#);
        assert_eq!(Divisor::from_json(&s).unwrap(), d);
        assert!(Divisor::from_json(r#"[{"re":1,"im":0,"alpha_re":1},{"re":1,"im":0,"alpha_re":2}]"#).is_err());
    }
}
