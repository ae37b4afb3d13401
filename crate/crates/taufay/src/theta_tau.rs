//! The reconstruction-formula Tau function 𝒯(Ω) = Θ(ζ+χ)·e^{½Q̃(Ω,Ω)} on
//! meromorphic forms, its ratios under third-kind shifts, and Fay's identity
//! for the Szegő kernel.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::divisors::{principal_pow, Divisor};
use crate::hirota_fay::{Check, HirotaError, ShiftedTau};
use crate::riemann_geometry::forms::{extract_times, PATH_MARGIN, FormEvaluator, FormTimes, MeromorphicForm};
use crate::riemann_geometry::szego::{SzegoKernel, THETA_FLOOR};
use crate::riemann_geometry::{Characteristic, GeometryError, SurfaceContext};

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

/// The pieces of Q(Ω,Ω).
#[derive(Clone, Debug, PartialEq)]
pub struct QForm {
    /// Σ (1/k) t_{p,k} Res_p ξ_p^{−k} Ω.
    pub polar: Complex64,
    /// Σ t_{p,0} ∫ₒᵖ Ω, regularized at p.
    pub third: Complex64,
    /// ε ∮_B Ω.
    pub periods: Complex64,
    pub zeta: Complex64,
    pub epsilon: Complex64,
    pub times: FormTimes,
}

impl QForm {
    pub fn q(&self) -> Complex64 {
        self.polar + self.third + self.periods
    }

    /// Q̃ = Q − 4πiεζ − 2πiτε².
    pub fn q_tilde(&self, tau: Complex64) -> Complex64 {
        self.q()
            - 2.0 * TWO_PI_I * self.epsilon * self.zeta
            - TWO_PI_I * tau * self.epsilon * self.epsilon
    }
}

/// A surface with a fixed pole set 𝒫.
#[derive(Clone, Debug)]
pub struct ThetaTauContext {
    surface: SurfaceContext,
    poles: Vec<Complex64>,
}

impl ThetaTauContext {
    pub fn new(surface: SurfaceContext, poles: Vec<Complex64>) -> Result<Self, GeometryError> {
        let o = surface.origin();
        if poles.iter().any(|p| (p - o).norm() < 1e-12) {
            return Err(GeometryError::Invalid("the base point is in the pole set".into()));
        }
        Ok(Self { surface, poles })
    }

    /// Pole set taken from the forms themselves.
    pub fn unrestricted(surface: SurfaceContext) -> Self {
        Self {
            surface,
            poles: Vec::new(),
        }
    }

    pub fn surface(&self) -> &SurfaceContext {
        &self.surface
    }

    /// Poles must lie in 𝒫 (if given) and, at genus 1, inside the cut
    /// parallelogram at o, where ∫ₒᵖ runs along straight paths.
    fn check_poles(&self, form: &MeromorphicForm) -> Result<(), GeometryError> {
        for (p, _) in form.poles() {
            if !self.surface.in_fundamental_domain(p, PATH_MARGIN) {
                return Err(GeometryError::Invalid(format!(
                    "pole {p} is outside the fundamental domain at the base point"
                )));
            }
            if !self.poles.is_empty() && !self.poles.iter().any(|q| (q - p).norm() < 1e-12) {
                return Err(GeometryError::Invalid(format!("pole {p} is outside the pole set")));
            }
        }
        Ok(())
    }

    pub fn q_form(&self, form: &MeromorphicForm) -> Result<QForm, GeometryError> {
        self.check_poles(form)?;
        let ev = FormEvaluator::new(&self.surface, form)?;
        let times = extract_times(&ev)?;
        let mut polar = Complex64::new(0.0, 0.0);
        let mut third = Complex64::new(0.0, 0.0);
        for (p, ts) in &times.poles {
            for (k, t) in ts.iter().enumerate().skip(1) {
                polar += t * ev.time(*p, -(k as i32))? / k as f64;
            }
            if ts[0].norm() > 1e-14 {
                if ts.len() > 1 && ts[1..].iter().any(|t| t.norm() > 1e-10) {
                    return Err(GeometryError::Invalid(format!(
                        "pole {p} carries both a residue and higher-order times"
                    )));
                }
                third += ts[0] * ev.regularized_integral(*p, &ts[..1])?.value;
            }
        }
        let (periods, zeta, epsilon) = if self.surface.genus() == 1 {
            let eps = times.epsilon;
            (eps * ev.b_period()?, ev.zeta()?, eps)
        } else {
            let z = Complex64::new(0.0, 0.0);
            (z, z, z)
        };
        Ok(QForm {
            polar,
            third,
            periods,
            zeta,
            epsilon,
            times,
        })
    }

    /// ln Θ(ζ+χ) + ½Q̃, or just ½Q at genus 0.
    pub fn log_tau(&self, form: &MeromorphicForm) -> Result<Complex64, GeometryError> {
        let q = self.q_form(form)?;
        let half = 0.5 * q.q_tilde(self.surface.tau());
        if self.surface.genus() == 0 {
            return Ok(0.5 * q.q());
        }
        let th = self.surface.theta()?.eval(q.zeta + self.surface.chi());
        if th.norm() < THETA_FLOOR {
            return Err(GeometryError::ThetaZero(q.zeta + self.surface.chi()));
        }
        Ok(th.ln() + half)
    }

    /// 𝒯(Ω). Vanishes at ζ = 0 on genus 1; reported, never divided by.
    pub fn tau(&self, form: &MeromorphicForm) -> Result<Complex64, GeometryError> {
        let q = self.q_form(form)?;
        if self.surface.genus() == 0 {
            return Ok((0.5 * q.q()).exp());
        }
        let th = self.surface.theta()?.eval(q.zeta + self.surface.chi());
        Ok(th * (0.5 * q.q_tilde(self.surface.tau())).exp())
    }

    /// 𝒯(Ω+ω‴_D)/𝒯(Ω).
    pub fn tau_ratio(&self, form: &MeromorphicForm, d: &Divisor) -> Result<Complex64, GeometryError> {
        let shifted = form.add(&MeromorphicForm::third_kind_of(d));
        Ok((self.log_tau(&shifted)? - self.log_tau(form)?).exp())
    }

    /// Q̃(Ω+ω‴_D) − Q̃(Ω) − [2Σαᵢ∫ₒ^{zᵢ}(Ω − 2πiεω′) + 2Σ_{i<j}αᵢαⱼ ln E(zᵢ,zⱼ) + 2 ln G(D)],
    /// reduced modulo 2πi (ln E is defined up to branch).
    pub fn q_shift_residual(&self, form: &MeromorphicForm, d: &Divisor) -> Result<f64, GeometryError> {
        let tau = self.surface.tau();
        let shifted = form.add(&MeromorphicForm::third_kind_of(d));
        let lhs = self.q_form(&shifted)?.q_tilde(tau) - self.q_form(form)?.q_tilde(tau);
        let kernel = SzegoKernel::with_shift(&self.surface, form, self.surface.chi() + 0.5)?;
        let mut rhs = 2.0 * kernel.log_form_factor(d)?;
        rhs += 2.0 * self.surface.prime_weight(d)?.ln();
        rhs += 2.0 * ratio_gauge(&self.surface, d).ln();
        let k = (lhs - rhs) / TWO_PI_I;
        Ok((k - k.re.round()).norm() * 2.0 * PI)
    }

    /// 𝒯(Ω+ω‴_D)/𝒯(Ω) next to G(D)·ψ(D;Ω).
    pub fn ratio_report(
        &self,
        form: &MeromorphicForm,
        d: &Divisor,
    ) -> Result<RatioReport, GeometryError> {
        let ratio = self.tau_ratio(form, d)?;
        let psi = SzegoKernel::new(&self.surface, form)?.eval(d)?;
        Ok(RatioReport {
            ratio,
            psi,
            gauge: ratio_gauge(&self.surface, d),
        })
    }
}

/// G(D) = Π_{i<j} (−i·e^{πi(zᵢ−zⱼ)})^{αᵢαⱼ} at genus 1, Π (−i)^{αᵢαⱼ} at
/// genus 0.
///
/// Q sums t_{p,0}∫ₒᵖ over every pole, so its third-kind part is
/// Σ_{i≠j} αᵢαⱼ ln E(zᵢ,zⱼ), while ψ carries 2Σ_{i<j}. With
/// E(zⱼ,zᵢ) = −e^{2πi(zᵢ−zⱼ)}E(zᵢ,zⱼ) the two differ by G.
pub fn ratio_gauge(surface: &SurfaceContext, d: &Divisor) -> Complex64 {
    let pts = d.points();
    let mut g = Complex64::new(1.0, 0.0);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let mut base = Complex64::new(0.0, -1.0);
            if surface.genus() == 1 {
                base *= (Complex64::new(0.0, PI) * (pts[i].z - pts[j].z)).exp();
            }
            g *= principal_pow(base, pts[i].alpha * pts[j].alpha);
        }
    }
    g
}

/// A Tau ratio against the Szegő kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioReport {
    pub ratio: Complex64,
    pub psi: Complex64,
    pub gauge: Complex64,
}

impl RatioReport {
    /// |ratio − G·ψ| / |ψ|.
    pub fn residual(&self) -> f64 {
        (self.ratio - self.gauge * self.psi).norm() / self.psi.norm()
    }

    /// As [`Self::residual`], allowing the overall sign of e^{½Q}.
    pub fn residual_up_to_sign(&self) -> f64 {
        let g = self.gauge * self.psi;
        (self.ratio - g).norm().min((self.ratio + g).norm()) / self.psi.norm()
    }
}

pub(crate) fn det(m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
    mat.determinant()
}

impl ShiftedTau for SzegoKernel {
    fn shift_ratio(&self, d: &Divisor) -> Result<Complex64, HirotaError> {
        Ok(self.eval(d)?)
    }

    /// Θ′/Θ(ζ+𝔞(D)+e) − Θ′/Θ(ζ+e) − Σαᵢ g(zᵢ−ξ).
    fn insertion_log(&self, d: &Divisor, xi: Complex64) -> Result<Complex64, HirotaError> {
        let s = self.evaluator().surface();
        let mut acc = Complex64::new(0.0, 0.0);
        for p in d.points() {
            acc -= p.alpha * s.log_prime_derivative(p.z - xi);
        }
        if s.genus() == 1 {
            let th = s.theta()?;
            let lt = |u: Complex64| {
                let v = th.derivatives(u, 1);
                v[1] / v[0]
            };
            let base = self.zeta() + self.shift();
            acc += lt(base + s.abel_divisor(d)) - lt(base);
        }
        Ok(acc)
    }
}

/// Fay's identity for the Szegő kernel of Ω.
pub fn fay_surface_residual(
    kernel: &SzegoKernel,
    zs: &[Complex64],
    zts: &[Complex64],
) -> Result<Check, GeometryError> {
    let d = Divisor::supersymmetric(zs, zts)?;
    let lhs = kernel.eval(&d)?;
    let mut m = vec![vec![Complex64::new(0.0, 0.0); zs.len()]; zs.len()];
    for (i, &z) in zs.iter().enumerate() {
        for (j, &zt) in zts.iter().enumerate() {
            m[i][j] = kernel.pair(z, zt)?;
        }
    }
    Ok(Check { lhs, rhs: det(m) })
}

/// Fay at Ω = 0 on a torus, using the even shift ½ since Θ(χ) = 0.
pub fn fay_surface_residual_zero_form(
    surface: &SurfaceContext,
    zs: &[Complex64],
    zts: &[Complex64],
) -> Result<Check, GeometryError> {
    let kernel = if surface.genus() == 1 {
        SzegoKernel::with_characteristic(surface, &MeromorphicForm::zero(), Characteristic { n: 1, m: 0 })?
    } else {
        SzegoKernel::new(surface, &MeromorphicForm::zero())?
    };
    fay_surface_residual(&kernel, zs, zts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann_geometry::forms::Component;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn torus(tau: Complex64) -> SurfaceContext {
        SurfaceContext::torus(tau, c(-0.05, -0.07)).unwrap()
    }

    #[test]
    fn q_of_zero_and_of_holomorphic() {
        let s = torus(c(0.0, 1.0));
        let ctx = ThetaTauContext::unrestricted(s.clone());
        assert_eq!(ctx.q_form(&MeromorphicForm::zero()).unwrap().q(), c(0.0, 0.0));
        let f = MeromorphicForm::single(TWO_PI_I, Component::Holomorphic);
        let q = ctx.q_form(&f).unwrap().q();
        assert!((q - TWO_PI_I * s.tau()).norm() < 1e-10, "{q}");
    }

    #[test]
    fn genus_zero_cauchy() {
        let s = SurfaceContext::sphere(c(0.0, 0.0));
        let zs = [c(1.0, 0.2), c(-0.5, 1.0), c(2.0, -1.0)];
        let zts = [c(0.3, -0.7), c(1.5, 1.5), c(-1.2, -0.4)];
        let r = fay_surface_residual_zero_form(&s, &zs, &zts).unwrap();
        assert!(r.residual() < 1e-12, "{r:?}");
    }

    #[test]
    fn genus_one_fay() {
        let s = torus(c(0.3, 0.8));
        let zs = [c(0.12, 0.31), c(0.55, 0.12)];
        let zts = [c(0.71, 0.52), c(0.33, 0.66)];
        let r = fay_surface_residual_zero_form(&s, &zs, &zts).unwrap();
        assert!(r.relative() < 1e-10, "{r:?}");
        let f = MeromorphicForm::single(c(1.0, 0.0), Component::third(c(0.2, 0.45), c(0.6, 0.3)));
        let k = SzegoKernel::new(&s, &f).unwrap();
        let zs = [c(0.12, 0.31), c(0.55, 0.12), c(0.9, 0.2)];
        let zts = [c(0.71, 0.52), c(0.33, 0.66), c(0.45, 0.05)];
        let r = fay_surface_residual(&k, &zs, &zts).unwrap();
        assert!(r.relative() < 1e-10, "{r:?}");
    }

    #[test]
    fn tau_ratio_is_gauged_szego() {
        let s = torus(c(0.3, 0.8));
        let f = MeromorphicForm::single(c(1.0, 0.0), Component::third(c(0.2, 0.45), c(0.6, 0.3)))
            .plus(c(0.3, -0.2), Component::Holomorphic);
        let pairs = [(c(0.4, 0.2), c(0.75, 0.5)), (c(0.8, 0.6), c(0.1, 0.1)), (c(0.55, 0.65), c(0.9, 0.05))];
        for g in [s.clone(), SurfaceContext::sphere(s.origin())] {
            let ctx = ThetaTauContext::unrestricted(g.clone());
            let f = if g.genus() == 0 { MeromorphicForm { terms: f.terms[..1].to_vec() } } else { f.clone() };
            for (a, b) in pairs {
                let d = Divisor::from_real(&[(a, 1.0), (b, -1.0)]).unwrap();
                let r = ctx.ratio_report(&f, &d).unwrap();
                assert!(r.residual() < 1e-8, "{r:?}");
                let d = Divisor::from_real(&[(a, 1.0), (c(0.5, 0.35), 1.0), (b, -1.0), (c(0.3, 0.55), -1.0)]).unwrap();
                let r = ctx.ratio_report(&f, &d).unwrap();
                assert!(r.residual_up_to_sign() < 1e-8, "{r:?}");
            }
        }
    }

    #[test]
    fn q_shift_identity_and_cocycle() {
        let s = torus(c(0.0, 1.0));
        let ctx = ThetaTauContext::unrestricted(s);
        let f = MeromorphicForm::single(c(2.0, 0.0), Component::third(c(0.2, 0.45), c(0.6, 0.3)))
            .plus(c(0.5, 0.1), Component::Holomorphic)
            .plus(c(0.2, 0.0), Component::second(c(0.7, 0.7), 1));
        let d1 = Divisor::from_real(&[(c(0.4, 0.2), 1.0), (c(0.75, 0.5), -1.0)]).unwrap();
        let d2 = Divisor::from_real(&[(c(0.3, 0.8), 1.0), (c(0.85, 0.15), -1.0)]).unwrap();
        assert!(ctx.q_shift_residual(&f, &d1).unwrap() < 1e-8);
        let r1 = ctx.tau_ratio(&f, &d1).unwrap();
        let f1 = f.add(&MeromorphicForm::third_kind_of(&d1));
        let r2 = ctx.tau_ratio(&f1, &d2).unwrap();
        let r12 = ctx.tau_ratio(&f, &d1.add(&d2)).unwrap();
        assert!((r1 * r2 / r12 - 1.0).norm() < 1e-8);
    }

    #[test]
    fn poles_outside_the_cut_domain_are_rejected() {
        let s = torus(c(0.3, 0.8));
        let ctx = ThetaTauContext::unrestricted(s);
        let f = MeromorphicForm::single(c(1.0, 0.0), Component::third(c(0.15, 0.65), c(0.6, 0.3)));
        assert!(ctx.q_form(&f).is_err());
    }

    #[test]
    fn szego_reproduces_itself() {
        use crate::hirota_fay::{fay_numeric, reproducing_numeric};
        let s = torus(c(0.3, 0.8));
        let f = MeromorphicForm::single(c(1.0, 0.0), Component::third(c(0.2, 0.45), c(0.6, 0.3)));
        let k = SzegoKernel::new(&s, &f).unwrap();
        let r = reproducing_numeric(&k, c(0.41, 0.27), c(0.12, 0.61), c(0.77, 0.14)).unwrap();
        assert!(r.relative() < 1e-8, "{r:?}");
        let r = fay_numeric(&k, &[c(0.12, 0.31), c(0.55, 0.12)], &[c(0.71, 0.52), c(0.33, 0.66)]).unwrap();
        assert!(r.relative() < 1e-10, "{r:?}");
        let g0 = SzegoKernel::new(&SurfaceContext::sphere(c(0.0, 0.0)), &MeromorphicForm::zero()).unwrap();
        let r = reproducing_numeric(&g0, c(0.1, 0.2), c(1.0, -0.3), c(-0.7, 0.4)).unwrap();
        assert!(r.residual() < 1e-13, "{r:?}");
    }
}
