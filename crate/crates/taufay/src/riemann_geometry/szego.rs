//! The Szegő kernel ψ(D;Ω) and its monodromy checks.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::divisors::Divisor;
use crate::quadrature::{segment, Tolerance};

use super::forms::{FormEvaluator, MeromorphicForm};
use super::surface::{Characteristic, SurfaceContext};
use super::GeometryError;

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);
/// Denominators Θ(ζ+e) below this are rejected.
pub const THETA_FLOOR: f64 = 1e-10;

/// ψ(D;Ω) = Θ(ζ+𝔞(D)+e)/Θ(ζ+e) · Π_{i<j}E(zᵢ,zⱼ)^{αᵢαⱼ} · e^{Σαᵢ∫ₒ^{zᵢ}Ω} · e^{−2πiε𝔞(D)}.
///
/// The theta shift e is χ by default. Any other half-period gives a kernel
/// that still satisfies Fay's identity but picks up a constant B-monodromy.
#[derive(Clone, Debug)]
pub struct SzegoKernel {
    ev: FormEvaluator,
    shift: Complex64,
    zeta: Complex64,
    epsilon: Complex64,
    denominator: Complex64,
}

/// |ψ(z₁+1) − ψ(z₁)| and |ψ(z₁+τ) − ψ(z₁)|, relative to |ψ(z₁)|.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonodromyReport {
    pub psi: Complex64,
    pub a_shift: f64,
    pub b_shift: f64,
}

impl SzegoKernel {
    pub fn new(surface: &SurfaceContext, form: &MeromorphicForm) -> Result<Self, GeometryError> {
        let shift = surface.chi();
        Self::with_shift(surface, form, shift)
    }

    /// Kernel with Θ evaluated around ζ + e for a half-period characteristic.
    pub fn with_characteristic(
        surface: &SurfaceContext,
        form: &MeromorphicForm,
        e: Characteristic,
    ) -> Result<Self, GeometryError> {
        Self::with_shift(surface, form, e.value(surface.tau()))
    }

    pub fn with_shift(
        surface: &SurfaceContext,
        form: &MeromorphicForm,
        shift: Complex64,
    ) -> Result<Self, GeometryError> {
        let ev = FormEvaluator::new(surface, form)?;
        let (zeta, epsilon, denominator) = if surface.genus() == 1 {
            let zeta = ev.zeta()?;
            let eps = ev.epsilon()?;
            let den = surface.theta()?.eval(zeta + shift);
            if den.norm() < THETA_FLOOR {
                return Err(GeometryError::ThetaZero(zeta + shift));
            }
            (zeta, eps, den)
        } else {
            let z = Complex64::new(0.0, 0.0);
            (z, z, Complex64::new(1.0, 0.0))
        };
        Ok(Self {
            ev,
            shift,
            zeta,
            epsilon,
            denominator,
        })
    }

    pub fn evaluator(&self) -> &FormEvaluator {
        &self.ev
    }

    pub fn zeta(&self) -> Complex64 {
        self.zeta
    }

    pub fn epsilon(&self) -> Complex64 {
        self.epsilon
    }

    pub fn shift(&self) -> Complex64 {
        self.shift
    }

    /// ln of the non-theta factors e^{Σαᵢ∫Ω}·e^{−2πiε𝔞(D)} (no prime weight).
    pub fn log_form_factor(&self, d: &Divisor) -> Result<Complex64, GeometryError> {
        let s = self.ev.surface();
        let mut acc = Complex64::new(0.0, 0.0);
        if !self.ev.form().terms.is_empty() {
            for p in d.points() {
                acc += p.alpha * self.ev.integrate(s.origin(), p.z)?.value;
            }
        }
        if s.genus() == 1 {
            acc -= TWO_PI_I * self.epsilon * s.abel_divisor(d);
        }
        Ok(acc)
    }

    /// Θ(ζ+𝔞(D)+e)/Θ(ζ+e) (1 at genus 0).
    pub fn theta_ratio(&self, d: &Divisor) -> Result<Complex64, GeometryError> {
        let s = self.ev.surface();
        if s.genus() == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let th = s.theta()?;
        Ok(th.eval(self.zeta + s.abel_divisor(d) + self.shift) / self.denominator)
    }

    /// ψ(D;Ω) for a divisor of degree 0.
    pub fn eval(&self, d: &Divisor) -> Result<Complex64, GeometryError> {
        let deg = d.degree();
        if deg.norm() > 1e-12 {
            return Err(GeometryError::Invalid(format!(
                "Szegő kernel needs a degree-0 divisor, got degree {deg}"
            )));
        }
        let s = self.ev.surface();
        Ok(self.theta_ratio(d)? * s.prime_weight(d)? * self.log_form_factor(d)?.exp())
    }

    /// ψ([ξ′] − [ξ]; Ω).
    pub fn pair(&self, xi_p: Complex64, xi: Complex64) -> Result<Complex64, GeometryError> {
        let d = Divisor::from_real(&[(xi_p, 1.0), (xi, -1.0)])?;
        self.eval(&d)
    }

    /// Move point `index` of D by 1 and by τ and compare ψ.
    pub fn monodromy(&self, d: &Divisor, index: usize) -> Result<MonodromyReport, GeometryError> {
        let s = self.ev.surface();
        if s.genus() != 1 {
            return Err(GeometryError::UnsupportedGenus(s.genus()));
        }
        let moved = |delta: Complex64| -> Result<Complex64, GeometryError> {
            let mut pts = d.points().to_vec();
            let p = pts
                .get_mut(index)
                .ok_or_else(|| GeometryError::Invalid(format!("no point {index}")))?;
            p.z += delta;
            self.eval(&Divisor::new(pts)?)
        };
        let psi = self.eval(d)?;
        let scale = psi.norm().max(1e-300);
        Ok(MonodromyReport {
            psi,
            a_shift: (moved(Complex64::new(1.0, 0.0))? - psi).norm() / scale,
            b_shift: (moved(s.tau())? - psi).norm() / scale,
        })
    }
}

/// |e^{n∮_AΩ}·e^{−2πiεn} − 1| with ∮_AΩ from adaptive segment quadrature and
/// ε from the trapezoid loop.
pub fn a_cycle_chain(ev: &FormEvaluator, n: i32) -> Result<f64, GeometryError> {
    let s = ev.surface();
    if s.genus() != 1 {
        return Err(GeometryError::UnsupportedGenus(s.genus()));
    }
    let o = s.origin();
    let loop_integral = segment(|z| ev.eval(z), o, o + 1.0, Tolerance::new(1e-14, 1e-13))?.value;
    let eps = ev.epsilon()?;
    Ok((((loop_integral - TWO_PI_I * eps) * n as f64).exp() - 1.0).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann_geometry::forms::Component;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn integer_form() -> MeromorphicForm {
        MeromorphicForm::zero()
            .plus(c(1.0, 0.0), Component::third(c(0.31, 0.22), c(0.62, 0.51)))
            .plus(c(0.4, 0.1), Component::second(c(0.45, 0.35), 1))
    }

    #[test]
    fn genus_zero_reduces_to_prime_weight() {
        let s = SurfaceContext::sphere(c(0.0, 0.0));
        let k = SzegoKernel::new(&s, &MeromorphicForm::zero()).unwrap();
        let d = Divisor::from_real(&[(c(1.0, 0.0), 1.0), (c(2.0, 1.0), 1.0), (c(-1.0, 0.5), -2.0)]).unwrap();
        let w = d.prime_weight().unwrap();
        assert!((k.eval(&d).unwrap() - w).norm() < 1e-14);
    }

    #[test]
    fn pair_behaves_like_cauchy_kernel() {
        let s = SurfaceContext::torus(c(0.0, 1.0), c(-0.05, -0.05)).unwrap();
        let k = SzegoKernel::with_characteristic(&s, &MeromorphicForm::zero(), Characteristic { n: 1, m: 0 }).unwrap();
        let z = c(0.3, 0.4);
        let h = 1e-5;
        let v = k.pair(z + h, z).unwrap() * h;
        assert!((v - 1.0).norm() < 1e-4);
    }

    #[test]
    fn integer_residues_have_no_monodromy() {
        let s = SurfaceContext::torus(c(0.3, 0.8), c(-0.05, -0.07)).unwrap();
        let k = SzegoKernel::new(&s, &integer_form()).unwrap();
        let d = Divisor::from_real(&[(c(0.2, 0.55), 1.0), (c(0.7, 0.15), -1.0)]).unwrap();
        let r = k.monodromy(&d, 0).unwrap();
        assert!(r.a_shift < 1e-8 && r.b_shift < 1e-8, "{r:?}");
        assert!(a_cycle_chain(k.evaluator(), 3).unwrap() < 1e-10);
    }

    #[test]
    fn half_residue_breaks_monodromy() {
        let s = SurfaceContext::torus(c(0.0, 1.0), c(-0.05, -0.05)).unwrap();
        // p lies inside the triangle o, o+1, z₁+1 swept by the straight paths.
        let f = MeromorphicForm::single(c(0.5, 0.0), Component::third(c(0.9, 0.0), c(0.8, 0.7)));
        let k = SzegoKernel::new(&s, &f).unwrap();
        let d = Divisor::from_real(&[(c(0.6, 0.2), 1.0), (c(0.2, 0.6), -1.0)]).unwrap();
        let r = k.monodromy(&d, 0).unwrap();
        assert!(r.a_shift.max(r.b_shift) > 1e-3, "{r:?}");
    }

    #[test]
    fn zero_denominator_is_rejected() {
        let s = SurfaceContext::torus(c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        assert!(matches!(
            SzegoKernel::new(&s, &MeromorphicForm::zero()),
            Err(GeometryError::ThetaZero(_))
        ));
    }
}
