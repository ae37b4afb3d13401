//! Genus-1 Riemann theta function Θ(u; τ) = Σₙ e^{2πiun + πiτn²}.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::exec::{self, Exec};

use super::GeometryError;

const I: Complex64 = Complex64::new(0.0, 1.0);
const MAX_RADIUS: i64 = 100_000;

/// Theta function with a fixed modulus and tail bound.
///
/// The lattice sum is centered at the index of the largest term and cut at a
/// radius where the Gaussian tail estimate, weighted by |2πn|ʲ for the j-th
/// derivative, falls below `tail` times the largest term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theta {
    tau: Complex64,
    tail: f64,
}

impl Theta {
    pub fn new(tau: Complex64, tail: f64) -> Result<Self, GeometryError> {
        if !(tau.im > 0.0) || !tau.is_finite() {
            return Err(GeometryError::NotSiegel(tau));
        }
        if !(tail > 0.0) {
            return Err(GeometryError::Invalid(format!("tail bound must be positive, got {tail}")));
        }
        Ok(Self { tau, tail })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Center n₀ and radius R of the summation window for derivative order j.
    pub fn window(&self, u: Complex64, order: usize) -> (i64, i64) {
        let s = self.tau.im;
        let n0 = (-u.im / s).round() as i64;
        let weight = |m: i64| {
            let n = (n0.abs() + m.abs()) as f64;
            (2.0 * PI * n).max(1.0).powi(order as i32) * (-PI * s * (m * m - m.abs()) as f64).exp()
        };
        let mut r = 1;
        while r < MAX_RADIUS {
            let tail: f64 = (r + 1..r + 64).map(|m| 2.0 * weight(m)).sum();
            if tail < self.tail {
                break;
            }
            r += 1;
        }
        (n0, r)
    }

    /// Θ and its first `order` derivatives in u.
    pub fn derivatives(&self, u: Complex64, order: usize) -> Vec<Complex64> {
        let (n0, r) = self.window(u, order);
        let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
        for n in n0 - r..=n0 + r {
            let nf = n as f64;
            let term = (2.0 * PI * I * u * nf + PI * I * self.tau * nf * nf).exp();
            let mut fac = Complex64::new(1.0, 0.0);
            for slot in out.iter_mut() {
                *slot += term * fac;
                fac *= 2.0 * PI * I * nf;
            }
        }
        out
    }

    pub fn eval(&self, u: Complex64) -> Complex64 {
        self.derivatives(u, 0)[0]
    }

    pub fn gradient(&self, u: Complex64) -> Complex64 {
        self.derivatives(u, 1)[1]
    }

    /// Taylor coefficients of ln Θ(u + s) in s up to sᵏ (k = `order`),
    /// excluding the constant term (returned as 0).
    pub fn log_taylor(&self, u: Complex64, order: usize) -> Result<Vec<Complex64>, GeometryError> {
        let d = self.derivatives(u, order);
        let mut fact = 1.0;
        let a: Vec<Complex64> = d
            .iter()
            .enumerate()
            .map(|(j, v)| {
                if j > 0 {
                    fact *= j as f64;
                }
                v / fact
            })
            .collect();
        if a[0].norm() == 0.0 {
            return Err(GeometryError::ThetaZero(u));
        }
        let mut b = vec![Complex64::new(0.0, 0.0); order + 1];
        for j in 1..=order {
            let mut acc = a[j];
            for k in 1..j {
                acc -= b[k] * a[j - k] * (k as f64 / j as f64);
            }
            b[j] = acc / a[0];
        }
        Ok(b)
    }

    /// Θ at many arguments.
    pub fn eval_batch(&self, exec: Exec, us: &[Complex64]) -> Vec<Complex64> {
        exec::map(exec, us, |&u| self.eval(u))
    }
}

/// Θ(u; τ) with the given tail bound.
pub fn theta(u: Complex64, tau: Complex64, tail: f64) -> Result<Complex64, GeometryError> {
    Ok(Theta::new(tau, tail)?.eval(u))
}

/// Θ′(u; τ).
pub fn theta_gradient(u: Complex64, tau: Complex64, tail: f64) -> Result<Complex64, GeometryError> {
    Ok(Theta::new(tau, tail)?.gradient(u))
}

/// Θ(u+n+τm) − Θ(u) e^{−2πium} e^{−πiτm²}.
pub fn quasi_periodicity_residual(
    u: Complex64,
    n: i64,
    m: i64,
    tau: Complex64,
    tail: f64,
) -> Result<Complex64, GeometryError> {
    let th = Theta::new(tau, tail)?;
    let mf = m as f64;
    let lhs = th.eval(u + n as f64 + tau * mf);
    let rhs = th.eval(u) * (-2.0 * PI * I * u * mf - PI * I * tau * mf * mf).exp();
    Ok(lhs - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn value_at_zero_for_square_lattice() {
        let direct: f64 = (-10..=10).map(|n: i32| (-PI * (n * n) as f64).exp()).sum();
        let v = theta(c(0.0, 0.0), c(0.0, 1.0), 1e-15).unwrap();
        assert!((v.re - direct).abs() < 1e-14 && v.im.abs() < 1e-14);
        assert!((v.re - 1.086_434_81).abs() < 1e-8);
    }

    #[test]
    fn parity_and_odd_zero() {
        let tau = c(0.3, 0.8);
        let th = Theta::new(tau, 1e-14).unwrap();
        let u = c(0.17, -0.23);
        assert!((th.eval(u) - th.eval(-u)).norm() < 1e-12);
        let chi = c(0.5, 0.0) + tau * 0.5;
        assert!(th.eval(chi).norm() < 1e-12);
        assert!(th.gradient(chi).norm() > 1e-3);
    }

    #[test]
    fn quasi_periodicity() {
        for (n, m) in [(0, 0), (1, 0), (0, 1), (2, -1)] {
            let r = quasi_periodicity_residual(c(0.2, 0.1), n, m, c(0.0, 1.0), 1e-14).unwrap();
            assert!(r.norm() < 1e-12, "{n} {m} {r}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let th = Theta::new(c(0.1, 1.2), 1e-15).unwrap();
        let u = c(0.31, 0.12);
        let d = th.derivatives(u, 2);
        let h = 1e-5;
        let fd = (th.eval(u + h) - th.eval(u - h)) / (2.0 * h);
        assert!((fd - d[1]).norm() < 1e-7 * d[1].norm().max(1.0));
        let lt = th.log_taylor(u, 2).unwrap();
        assert!((lt[1] - d[1] / d[0]).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_modulus() {
        assert!(Theta::new(c(0.0, -1.0), 1e-12).is_err());
        assert!(Theta::new(c(0.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn doubling_radius_changes_little() {
        let th = Theta::new(c(0.0, 1.0), 1e-12).unwrap();
        let u = c(0.3, 0.4);
        let (n0, r) = th.window(u, 0);
        let sum = |rad: i64| -> Complex64 {
            (n0 - rad..=n0 + rad)
                .map(|n| {
                    let nf = n as f64;
                    (2.0 * PI * I * u * nf - PI * nf * nf).exp()
                })
                .sum()
        };
        assert!((sum(r) - sum(2 * r)).norm() < 1e-12);
    }
}
