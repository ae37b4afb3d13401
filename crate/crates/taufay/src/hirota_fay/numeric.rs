//! Numeric Fay, kernel and reproducing-kernel checks on any backend that can
//! evaluate shifted Tau ratios.

use num_complex::Complex64;

use crate::divisors::Divisor;

use super::HirotaError;

/// A Tau function known through its shifts.
pub trait ShiftedTau {
    /// 𝒯(𝐭+[D])/𝒯(𝐭), prime weight Π_{i<j}E(zᵢ,zⱼ)^{αᵢαⱼ} included.
    fn shift_ratio(&self, d: &Divisor) -> Result<Complex64, HirotaError>;

    /// Δ_ξ ln(𝒯(𝐭+[D])/𝒯(𝐭)) for a degree-0 divisor D, as the coefficient of dξ:
    /// d/dξ ∂_α [ln ratio(D+α[ξ]) − ln ratio(α[ξ])] at α = 0.
    fn insertion_log(&self, d: &Divisor, xi: Complex64) -> Result<Complex64, HirotaError>;
}

/// Two sides of a numeric identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Check {
    pub lhs: Complex64,
    pub rhs: Complex64,
}

impl Check {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }

    /// Residual relative to the larger side.
    pub fn relative(&self) -> f64 {
        self.residual() / self.lhs.norm().max(self.rhs.norm()).max(f64::MIN_POSITIVE)
    }
}

fn distinct(points: &[Complex64]) -> Result<(), HirotaError> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(HirotaError::Invalid(format!(
                    "points {i} and {j} coincide at {}",
                    points[i]
                )));
            }
        }
    }
    Ok(())
}

fn pair(a: Complex64, b: Complex64) -> Result<Divisor, HirotaError> {
    Ok(Divisor::from_real(&[(a, 1.0), (b, -1.0)])?)
}

/// K(ξ,ξ′) = 𝒯(𝐭+[ξ′]−[ξ])/𝒯(𝐭).
pub fn kernel<T: ShiftedTau + ?Sized>(tau: &T, xi: Complex64, xi_p: Complex64) -> Result<Complex64, HirotaError> {
    distinct(&[xi, xi_p])?;
    tau.shift_ratio(&pair(xi_p, xi)?)
}

/// 𝒯(𝐭+[D])/𝒯(𝐭) against det K(z̃ᵢ,zⱼ) for D = Σ[zᵢ]−[z̃ᵢ] (interleaved).
pub fn fay_numeric<T: ShiftedTau + ?Sized>(
    tau: &T,
    zs: &[Complex64],
    zts: &[Complex64],
) -> Result<Check, HirotaError> {
    if zs.len() != zts.len() || zs.is_empty() {
        return Err(HirotaError::Invalid("Fay needs n points and n partners".into()));
    }
    let all: Vec<Complex64> = zs.iter().chain(zts).copied().collect();
    distinct(&all)?;
    let d = Divisor::supersymmetric(zs, zts)?;
    let lhs = tau.shift_ratio(&d)?;
    let n = zs.len();
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = kernel(tau, zts[i], zs[j])?;
        }
    }
    Ok(Check {
        lhs,
        rhs: m.determinant(),
    })
}

/// Δ_ξ K(ξ′,ξ″) against −K(ξ′,ξ)K(ξ,ξ″).
pub fn reproducing_numeric<T: ShiftedTau + ?Sized>(
    tau: &T,
    xi: Complex64,
    xi_p: Complex64,
    xi_pp: Complex64,
) -> Result<Check, HirotaError> {
    distinct(&[xi, xi_p, xi_pp])?;
    let d = pair(xi_pp, xi_p)?;
    let k = tau.shift_ratio(&d)?;
    let lhs = k * tau.insertion_log(&d, xi)?;
    let rhs = -kernel(tau, xi_p, xi)? * kernel(tau, xi, xi_pp)?;
    Ok(Check { lhs, rhs })
}

/// (ξ′−ξ)·K(ξ,ξ′) at ξ′ = ξ + h.
pub fn kernel_leading<T: ShiftedTau + ?Sized>(tau: &T, xi: Complex64, h: Complex64) -> Result<Complex64, HirotaError> {
    Ok(h * kernel(tau, xi, xi + h)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 𝒯 = 1 at genus 0: ratio = prime weight.
    struct Trivial;

    impl ShiftedTau for Trivial {
        fn shift_ratio(&self, d: &Divisor) -> Result<Complex64, HirotaError> {
            Ok(d.prime_weight()?)
        }

        fn insertion_log(&self, d: &Divisor, xi: Complex64) -> Result<Complex64, HirotaError> {
            Ok(-d.points().iter().map(|p| p.alpha / (p.z - xi)).sum::<Complex64>())
        }
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_tau_kernel_and_fay() {
        let k = kernel(&Trivial, c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!((k - 2.0).norm() < 1e-15);
        let f = fay_numeric(&Trivial, &[c(2.0, 0.0), c(3.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((f.lhs - (-1.0 / 12.0)).norm() < 1e-15);
        assert!((f.rhs - (-1.0 / 12.0)).norm() < 1e-15);
    }

    #[test]
    fn trivial_tau_reproduces() {
        let r = reproducing_numeric(&Trivial, c(0.1, 0.2), c(1.0, -0.3), c(-0.7, 0.4)).unwrap();
        assert!(r.residual() < 1e-14, "{r:?}");
    }

    #[test]
    fn coincident_points_are_rejected() {
        assert!(kernel(&Trivial, c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(fay_numeric(&Trivial, &[c(1.0, 0.0)], &[c(1.0, 0.0)]).is_err());
    }
}
