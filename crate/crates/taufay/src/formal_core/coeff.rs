//! Coefficient fields for formal series.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Field operations needed by the series ring.
///
/// Implemented for exact rationals, exact Gaussian rationals and `Complex64`.
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// `exp` of a scalar when it stays in the field.
    fn exp_scalar(&self) -> Option<Self>;
    /// Principal `ln` of a scalar when it stays in the field.
    fn ln_scalar(&self) -> Option<Self>;
    fn to_complex(&self) -> Complex64;
    /// Image of an exact rational.
    fn from_rational(r: &BigRational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul(&i))
    }

    fn pow_u(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if Coeff::is_zero(self) {
            None
        } else {
            Some(self.inv())
        }
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn exp_scalar(&self) -> Option<Self> {
        Some(self.exp())
    }
    fn ln_scalar(&self) -> Option<Self> {
        if Coeff::is_zero(self) {
            None
        } else {
            Some(self.ln())
        }
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(ratio_to_f64(r), 0.0)
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

impl Coeff for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn exp_scalar(&self) -> Option<Self> {
        Zero::is_zero(self).then(One::one)
    }
    fn ln_scalar(&self) -> Option<Self> {
        One::is_one(self).then(Zero::zero)
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(self), 0.0)
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Exact element of ℚ(i).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(BigRational::from_int(re), BigRational::from_int(im))
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl From<BigRational> for GaussianRational {
    fn from(re: BigRational) -> Self {
        Self::new(re, Zero::zero())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Zero::is_zero(&self.im) {
            write!(f, "{}", self.re)
        } else if Zero::is_zero(&self.re) {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Coeff for GaussianRational {
    fn zero() -> Self {
        Self::from_ints(0, 0)
    }
    fn one() -> Self {
        Self::from_ints(1, 0)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn add(&self, other: &Self) -> Self {
        Self::new(&self.re + &other.re, &self.im + &other.im)
    }
    fn sub(&self, other: &Self) -> Self {
        Self::new(&self.re - &other.re, &self.im - &other.im)
    }
    fn mul(&self, other: &Self) -> Self {
        Self::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }
    fn neg(&self) -> Self {
        Self::new(-self.re.clone(), -self.im.clone())
    }
    fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if Zero::is_zero(&n) {
            return None;
        }
        let c = self.conj();
        Some(Self::new(c.re / &n, c.im / n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::from_ratio(num, den).into()
    }
    fn exp_scalar(&self) -> Option<Self> {
        Coeff::is_zero(self).then(Self::one)
    }
    fn ln_scalar(&self) -> Option<Self> {
        (*self == Self::one()).then(Self::zero)
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone().into()
    }
}

/// Rational number `num/den` as a `BigRational`.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::from_ratio(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_inverse_is_exact() {
        let z = GaussianRational::from_ints(3, -4);
        let w = z.inv().unwrap();
        assert_eq!(z.mul(&w), GaussianRational::one());
        assert_eq!(w, GaussianRational::new(rat(3, 25), rat(4, 25)));
    }

    #[test]
    fn rational_scalar_transcendentals_only_at_identity() {
        assert_eq!(rat(0, 1).exp_scalar(), Some(rat(1, 1)));
        assert_eq!(rat(2, 1).exp_scalar(), None);
        assert_eq!(rat(1, 1).ln_scalar(), Some(rat(0, 1)));
        assert_eq!(rat(3, 1).ln_scalar(), None);
    }

    #[test]
    fn complex_round_trip() {
        let z = Complex64::new(0.3, -1.2);
        let back = z.ln_scalar().unwrap().exp_scalar().unwrap();
        assert!((back - z).norm() < 1e-15);
    }
}
