//! Canonical meromorphic 1-forms, their times and periods, and the canonical
//! decomposition.
//!
//! Forms are written as f(z)dz in the flat coordinate; the local coordinate
//! at a pole p is ξ_p = z − p.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::{circle_residue, gauss_legendre, periodic_trapezoid, polyline, Tolerance};

use super::surface::{ComplexRecord, SurfaceContext};
use super::GeometryError;

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);
/// Minimum distance between an integration path and a pole, in lattice units.
pub const PATH_MARGIN: f64 = 1e-2;
const LOOP_TOL: f64 = 1e-13;

/// A canonical differential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    /// ω′ = dz (genus 1 only).
    Holomorphic,
    /// ω‴_{p,q}: residue +1 at p, −1 at q, zero A-period.
    ThirdKind { p: ComplexRecord, q: ComplexRecord },
    /// ω″_{p,k}: pole ξ_p^{−k−1}dξ_p at p, zero A-period, k ≥ 1.
    SecondKind { p: ComplexRecord, k: u32 },
}

impl Component {
    pub fn third(p: Complex64, q: Complex64) -> Self {
        Self::ThirdKind { p: p.into(), q: q.into() }
    }

    pub fn second(p: Complex64, k: u32) -> Self {
        Self::SecondKind { p: p.into(), k }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormTerm {
    pub coeff: ComplexRecord,
    #[serde(flatten)]
    pub component: Component,
}

/// A finite linear combination of canonical differentials.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeromorphicForm {
    pub terms: Vec<FormTerm>,
}

impl MeromorphicForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(coeff: Complex64, component: Component) -> Self {
        Self::zero().plus(coeff, component)
    }

    pub fn plus(mut self, coeff: Complex64, component: Component) -> Self {
        self.terms.push(FormTerm { coeff: coeff.into(), component });
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().copied());
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = (Complex64::from(t.coeff) * s).into();
        }
        out
    }

    /// Pole locations with the largest order appearing at each.
    pub fn poles(&self) -> Vec<(Complex64, u32)> {
        let mut out: Vec<(Complex64, u32)> = Vec::new();
        let mut push = |p: Complex64, ord: u32| {
            if let Some(e) = out.iter_mut().find(|(q, _)| *q == p) {
                e.1 = e.1.max(ord);
            } else {
                out.push((p, ord));
            }
        };
        for t in &self.terms {
            match t.component {
                Component::Holomorphic => {}
                Component::ThirdKind { p, q } => {
                    push(p.into(), 1);
                    push(q.into(), 1);
                }
                Component::SecondKind { p, k } => push(p.into(), k + 1),
            }
        }
        out
    }

    /// ω‴_D = Σ αᵢ ω‴_{zᵢ,r} for a neutral divisor, with r its last point
    /// (any reference point gives the same form).
    pub fn third_kind_of(d: &crate::divisors::Divisor) -> Self {
        let mut out = Self::zero();
        let Some(r) = d.points().last().map(|p| p.z) else {
            return out;
        };
        for p in &d.points()[..d.len() - 1] {
            out = out.plus(p.alpha, Component::third(p.z, r));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("form serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, GeometryError> {
        serde_json::from_str(s).map_err(|e| GeometryError::Invalid(e.to_string()))
    }
}

/// A form bound to a surface, with A-normalization constants precomputed.
#[derive(Clone, Debug)]
pub struct FormEvaluator {
    surface: SurfaceContext,
    form: MeromorphicForm,
    /// Per term: the constant subtracted to make the A-period vanish.
    shifts: Vec<Complex64>,
}

/// ∮_A g(w − p) dw, an integer multiple of 2πi.
fn a_constant(s: &SurfaceContext, p: Complex64) -> Result<Complex64, GeometryError> {
    check_off_loops(s, p)?;
    let o = s.origin();
    let r = periodic_trapezoid(
        |x| s.log_prime_derivative(o + x - p),
        0.0,
        1.0,
        LOOP_TOL,
    )?;
    let k = (r.value / TWO_PI_I).re.round();
    let rounded = TWO_PI_I * k;
    if (r.value - rounded).norm() > 1e-6 {
        return Err(GeometryError::PoleOnLoop(p));
    }
    Ok(rounded)
}

/// Distance from z to the segment a→b.
fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = ((z - a) * d.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

/// All lifts of p within the lattice-aligned box around the segment a→b.
fn lifts_near(s: &SurfaceContext, p: Complex64, a: Complex64, b: Complex64) -> Vec<Complex64> {
    if s.genus() == 0 {
        return vec![p];
    }
    let tau = s.tau();
    let coords = |z: Complex64| {
        let w = z - p;
        let t = w.im / tau.im;
        (w.re - t * tau.re, t)
    };
    let (sa, ta) = coords(a);
    let (sb, tb) = coords(b);
    let (m0, m1) = (ta.min(tb).floor() as i64 - 1, ta.max(tb).ceil() as i64 + 1);
    let (n0, n1) = (sa.min(sb).floor() as i64 - 2, sa.max(sb).ceil() as i64 + 2);
    let mut out = Vec::new();
    for m in m0..=m1 {
        for n in n0..=n1 {
            out.push(p + n as f64 + tau * m as f64);
        }
    }
    out
}

fn check_off_loops(s: &SurfaceContext, p: Complex64) -> Result<(), GeometryError> {
    if s.genus() == 0 {
        return Ok(());
    }
    let o = s.origin();
    for (a, b) in [(o, o + 1.0), (o, o + s.tau())] {
        for q in lifts_near(s, p, a, b) {
            if segment_distance(q, a, b) < PATH_MARGIN {
                return Err(GeometryError::PoleOnLoop(p));
            }
        }
    }
    Ok(())
}

/// A path integral with the polyline that was used.
#[derive(Clone, Debug, PartialEq)]
pub struct PathIntegral {
    pub value: Complex64,
    pub vertices: Vec<Complex64>,
}

impl FormEvaluator {
    pub fn new(surface: &SurfaceContext, form: &MeromorphicForm) -> Result<Self, GeometryError> {
        let mut shifts = Vec::with_capacity(form.terms.len());
        for t in &form.terms {
            let c = match t.component {
                Component::Holomorphic => {
                    if surface.genus() == 0 {
                        return Err(GeometryError::UnsupportedGenus(0));
                    }
                    Complex64::new(0.0, 0.0)
                }
                Component::ThirdKind { p, q } => {
                    if p == q {
                        return Err(GeometryError::Invalid("ω‴ needs distinct poles".into()));
                    }
                    if surface.genus() == 1 {
                        a_constant(surface, p.into())? - a_constant(surface, q.into())?
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }
                Component::SecondKind { p, k } => {
                    if k == 0 {
                        return Err(GeometryError::Invalid("ω″ needs k ≥ 1".into()));
                    }
                    check_off_loops(surface, p.into())?;
                    Complex64::new(0.0, 0.0)
                }
            };
            shifts.push(c);
        }
        Ok(Self {
            surface: surface.clone(),
            form: form.clone(),
            shifts,
        })
    }

    pub fn surface(&self) -> &SurfaceContext {
        &self.surface
    }

    pub fn form(&self) -> &MeromorphicForm {
        &self.form
    }

    /// Coefficient of dz at z.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let s = &self.surface;
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, shift) in self.form.terms.iter().zip(&self.shifts) {
            let c = Complex64::from(t.coeff);
            let v = match t.component {
                Component::Holomorphic => Complex64::new(1.0, 0.0),
                Component::ThirdKind { p, q } => {
                    s.log_prime_derivative(z - Complex64::from(p))
                        - s.log_prime_derivative(z - Complex64::from(q))
                        - shift
                }
                Component::SecondKind { p, k } => {
                    let gk = s
                        .log_prime_derivative_n(z - Complex64::from(p), k as usize)
                        .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                    let fact: f64 = (1..=k).map(|j| j as f64).product();
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    gk * (sign / fact)
                }
            };
            acc += c * v;
        }
        acc
    }

    fn pole_points(&self) -> Vec<Complex64> {
        self.form.poles().into_iter().map(|(p, _)| p).collect()
    }

    /// ∮_A Ω along o → o+1.
    pub fn a_period(&self) -> Result<Complex64, GeometryError> {
        if self.surface.genus() == 0 {
            return Err(GeometryError::UnsupportedGenus(0));
        }
        for p in self.pole_points() {
            check_off_loops(&self.surface, p)?;
        }
        let o = self.surface.origin();
        Ok(periodic_trapezoid(|x| self.eval(o + x), 0.0, 1.0, LOOP_TOL)?.value)
    }

    /// ∮_B Ω along o → o+τ.
    pub fn b_period(&self) -> Result<Complex64, GeometryError> {
        if self.surface.genus() == 0 {
            return Err(GeometryError::UnsupportedGenus(0));
        }
        for p in self.pole_points() {
            check_off_loops(&self.surface, p)?;
        }
        let o = self.surface.origin();
        let tau = self.surface.tau();
        Ok(periodic_trapezoid(|x| self.eval(o + tau * x) * tau, 0.0, 1.0, LOOP_TOL)?.value)
    }

    /// ε = (1/2πi)∮_A Ω (0 at genus 0).
    pub fn epsilon(&self) -> Result<Complex64, GeometryError> {
        if self.surface.genus() == 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.a_period()? / TWO_PI_I)
    }

    /// ζ = (1/2πi)∮_{B−τA} Ω (0 at genus 0).
    pub fn zeta(&self) -> Result<Complex64, GeometryError> {
        if self.surface.genus() == 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok((self.b_period()? - self.surface.tau() * self.a_period()?) / TWO_PI_I)
    }

    /// A polyline from a to b staying PATH_MARGIN away from every lifted pole.
    pub fn path(&self, a: Complex64, b: Complex64) -> Result<Vec<Complex64>, GeometryError> {
        self.route(a, b, None)
    }

    /// As [`Self::path`], ignoring the single lift `exclude` (an endpoint pole).
    fn route(
        &self,
        a: Complex64,
        b: Complex64,
        exclude: Option<Complex64>,
    ) -> Result<Vec<Complex64>, GeometryError> {
        let poles = self.pole_points();
        let clear = |verts: &[Complex64]| {
            verts.windows(2).all(|w| {
                poles.iter().all(|&p| {
                    lifts_near(&self.surface, p, w[0], w[1])
                        .into_iter()
                        .filter(|&q| Some(q) != exclude)
                        .all(|q| segment_distance(q, w[0], w[1]) >= PATH_MARGIN)
                })
            })
        };
        let direct = vec![a, b];
        if clear(&direct) {
            return Ok(direct);
        }
        let d = b - a;
        let perp = if d.norm() > 0.0 {
            Complex64::new(-d.im, d.re) / d.norm()
        } else {
            Complex64::new(0.0, 1.0)
        };
        let mid = a + d * 0.5;
        for step in 1..=40 {
            for sign in [1.0, -1.0] {
                let off = perp * (sign * 0.03 * step as f64);
                let cand = vec![a, mid + off, b];
                if clear(&cand) {
                    return Ok(cand);
                }
            }
        }
        Err(GeometryError::PathThroughPole(a, b))
    }

    /// ∫_a^b Ω along [`Self::path`].
    pub fn integrate(&self, a: Complex64, b: Complex64) -> Result<PathIntegral, GeometryError> {
        let vertices = self.path(a, b)?;
        let value = polyline(|z| self.eval(z), &vertices, Tolerance::new(1e-14, 1e-13))?.value;
        Ok(PathIntegral { value, vertices })
    }

    /// lim_{z→p} [∫ₒᶻ Ω − t₀ ln(z−p) + Σ_{k≥1} t_k (z−p)^{−k}/k] where
    /// `polar` = [t₀, t₁, …] are the times of Ω at p. The branch of ln(z−p)
    /// is continued along the path from the principal ln(o−p).
    pub fn regularized_integral(
        &self,
        p: Complex64,
        polar: &[Complex64],
    ) -> Result<PathIntegral, GeometryError> {
        let o = self.surface.origin();
        if (o - p).norm() < PATH_MARGIN {
            return Err(GeometryError::PathThroughPole(o, p));
        }
        let vertices = self.route(o, p, Some(p))?;
        let singular = |z: Complex64| {
            let x = z - p;
            polar
                .iter()
                .enumerate()
                .map(|(k, t)| t / x.powi(k as i32 + 1))
                .sum::<Complex64>()
        };
        // The subtraction loses digits next to p, so the final stretch of one
        // residue radius uses a fixed Gauss–Legendre rule whose nodes stay clear.
        let n = vertices.len();
        let prev = vertices[n - 2];
        let len = (p - prev).norm();
        let r = self.residue_radius(p).min(len);
        let cut = p + (prev - p) * (r / len);
        let mut head = vertices[..n - 1].to_vec();
        if r < len {
            head.push(cut);
        }
        let mut regular = if head.len() > 1 {
            polyline(|z| self.eval(z) - singular(z), &head, Tolerance::new(1e-13, 1e-12))?.value
        } else {
            Complex64::new(0.0, 0.0)
        };
        let (nodes, weights) = gauss_legendre(40);
        let half = (p - cut) * 0.5;
        let mid = cut + half;
        for (x, w) in nodes.iter().zip(&weights) {
            let z = mid + half * *x;
            regular += (self.eval(z) - singular(z)) * half * *w;
        }
        let x0 = o - p;
        let mut value = regular - polar.first().copied().unwrap_or_default() * x0.ln();
        for (k, t) in polar.iter().enumerate().skip(1) {
            value += t * x0.powi(-(k as i32)) / k as f64;
        }
        Ok(PathIntegral { value, vertices })
    }

    /// Half the distance from p to the nearest other singularity.
    pub fn residue_radius(&self, p: Complex64) -> f64 {
        let mut best = f64::INFINITY;
        for q in self.pole_points() {
            for lift in self.surface.translates(q) {
                let d = (lift - p).norm();
                if d > 1e-12 {
                    best = best.min(d);
                }
            }
        }
        if best.is_infinite() {
            best = 1.0;
        }
        0.5 * best
    }

    /// Res_p ξ_pᵏ Ω for k ≥ 0 (k = 0 gives the residue).
    pub fn time(&self, p: Complex64, k: i32) -> Result<Complex64, GeometryError> {
        let r = self.residue_radius(p);
        Ok(circle_residue(|z| (z - p).powi(k) * self.eval(z), p, r, 1e-13)?.value)
    }
}

/// Times of a form at its poles and its A-periods.
#[derive(Clone, Debug, PartialEq)]
pub struct FormTimes {
    /// (p, [t_{p,0}, t_{p,1}, …, t_{p,K}]).
    pub poles: Vec<(Complex64, Vec<Complex64>)>,
    pub epsilon: Complex64,
}

/// Extract t_{p,k} = Res_p ξ_pᵏ Ω for 0 ≤ k ≤ order_p − 1 and ε.
pub fn extract_times(ev: &FormEvaluator) -> Result<FormTimes, GeometryError> {
    let mut poles = Vec::new();
    for (p, ord) in ev.form().poles() {
        let mut ts = Vec::with_capacity(ord as usize);
        for k in 0..ord {
            ts.push(ev.time(p, k as i32)?);
        }
        poles.push((p, ts));
    }
    Ok(FormTimes {
        poles,
        epsilon: ev.epsilon()?,
    })
}

/// Ω = Σ t_{p,k} ω″_{p,k} + Σ t_{p,0} ω‴_{p,o} + 2πi ε ω′.
///
/// Since Σ t_{p,0} = 0 the third-kind part is assembled as
/// Σ t_{p,0} ω‴_{p,r} with r the last pole carrying a residue, which is the
/// same form without a pole at o.
pub fn decompose(surface: &SurfaceContext, times: &FormTimes) -> Result<MeromorphicForm, GeometryError> {
    let o = surface.origin();
    let reference = times
        .poles
        .iter()
        .rev()
        .find(|(_, t)| t[0].norm() > 0.0)
        .map(|(p, _)| *p);
    let total: Complex64 = times.poles.iter().map(|(_, t)| t[0]).sum();
    if total.norm() > 1e-8 {
        return Err(GeometryError::Invalid(format!(
            "residues sum to {total}, not zero"
        )));
    }
    let mut out = MeromorphicForm::zero();
    for (p, ts) in &times.poles {
        if *p == o {
            return Err(GeometryError::Invalid("pole at the base point".into()));
        }
        if ts[0].norm() > 0.0 && Some(*p) != reference {
            out = out.plus(ts[0], Component::third(*p, reference.unwrap_or(o)));
        }
        for (k, t) in ts.iter().enumerate().skip(1) {
            if t.norm() > 0.0 {
                out = out.plus(*t, Component::second(*p, k as u32));
            }
        }
    }
    if surface.genus() == 1 && times.epsilon.norm() > 0.0 {
        out = out.plus(TWO_PI_I * times.epsilon, Component::Holomorphic);
    }
    Ok(out)
}

/// Extract times and periods, rebuild the form and return the largest
/// pointwise difference over `samples`.
pub fn round_trip_error(
    surface: &SurfaceContext,
    form: &MeromorphicForm,
    samples: &[Complex64],
) -> Result<f64, GeometryError> {
    let ev = FormEvaluator::new(surface, form)?;
    let rebuilt = decompose(surface, &extract_times(&ev)?)?;
    let ev2 = FormEvaluator::new(surface, &rebuilt)?;
    Ok(samples
        .iter()
        .map(|&z| (ev.eval(z) - ev2.eval(z)).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn torus() -> SurfaceContext {
        SurfaceContext::torus(c(0.3, 0.8), c(-0.05, -0.07)).unwrap()
    }

    #[test]
    fn holomorphic_period_is_one() {
        let s = torus();
        let ev = FormEvaluator::new(&s, &MeromorphicForm::single(c(1.0, 0.0), Component::Holomorphic)).unwrap();
        assert!((ev.a_period().unwrap() - 1.0).norm() < 1e-12);
        assert!((ev.b_period().unwrap() - s.tau()).norm() < 1e-12);
    }

    #[test]
    fn third_kind_normalization_and_residue() {
        let s = torus();
        let (p, q) = (c(0.3, 0.2), c(0.6, 0.5));
        let ev = FormEvaluator::new(&s, &MeromorphicForm::single(c(1.0, 0.0), Component::third(p, q))).unwrap();
        assert!(ev.a_period().unwrap().norm() < 1e-10);
        assert!((ev.time(p, 0).unwrap() - 1.0).norm() < 1e-10);
        assert!((ev.time(q, 0).unwrap() + 1.0).norm() < 1e-10);
        let z = ev.zeta().unwrap();
        assert!((z - (p - q)).norm() < 1e-10, "zeta {z} vs {}", p - q);
    }

    #[test]
    fn second_kind_leading_coefficient() {
        for s in [torus(), SurfaceContext::sphere(c(0.0, 0.0))] {
            let p = c(0.35, 0.3);
            let ev = FormEvaluator::new(&s, &MeromorphicForm::single(c(1.0, 0.0), Component::second(p, 2))).unwrap();
            assert!((ev.time(p, 2).unwrap() - 1.0).norm() < 1e-10);
            assert!(ev.time(p, 0).unwrap().norm() < 1e-10);
            assert!(ev.time(p, 1).unwrap().norm() < 1e-10);
            if s.genus() == 1 {
                assert!(ev.a_period().unwrap().norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pole_on_loop_is_rejected() {
        let s = torus();
        let o = s.origin();
        let f = MeromorphicForm::single(c(1.0, 0.0), Component::third(o + 0.5, c(0.3, 0.3)));
        assert!(matches!(FormEvaluator::new(&s, &f), Err(GeometryError::PoleOnLoop(_))));
    }

    #[test]
    fn paths_avoid_poles() {
        let s = SurfaceContext::sphere(c(0.0, 0.0));
        let f = MeromorphicForm::single(c(1.0, 0.0), Component::third(c(0.5, 0.0), c(3.0, 3.0)));
        let ev = FormEvaluator::new(&s, &f).unwrap();
        let path = ev.path(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(path.len(), 3);
        let v = ev.integrate(c(0.0, 0.0), c(1.0, 0.0)).unwrap().value;
        // The far pole contributes −ln((1−q)/(−q)); the near one ±iπ.
        let q = c(3.0, 3.0);
        let rest = v + ((1.0 - q) / (-q)).ln();
        assert!(rest.re.abs() < 1e-10, "{rest}");
        assert!((rest.im.abs() - PI).abs() < 1e-10, "{rest}");
    }

    #[test]
    fn json_round_trip() {
        let f = MeromorphicForm::zero()
            .plus(c(1.0, 2.0), Component::third(c(0.1, 0.2), c(0.3, 0.4)))
            .plus(c(0.5, 0.0), Component::second(c(0.2, 0.2), 3))
            .plus(c(0.0, 1.0), Component::Holomorphic);
        let back = MeromorphicForm::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn six_component_round_trip() {
        let s = torus();
        let f = MeromorphicForm::zero()
            .plus(c(0.7, 0.2), Component::third(c(0.2, 0.3), c(0.6, 0.5)))
            .plus(c(-0.4, 0.1), Component::third(c(0.45, 0.15), c(0.8, 0.6)))
            .plus(c(0.3, -0.2), Component::second(c(0.35, 0.55), 1))
            .plus(c(0.1, 0.05), Component::second(c(0.7, 0.25), 2))
            .plus(c(0.2, 0.3), Component::second(c(0.55, 0.4), 3))
            .plus(c(0.5, -0.1), Component::Holomorphic);
        let samples: Vec<Complex64> = (0..100)
            .map(|j| c(0.05 + 0.009 * j as f64, 0.1 + 0.007 * j as f64))
            .collect();
        let e = round_trip_error(&s, &f, &samples).unwrap();
        assert!(e < 1e-9, "{e}");
    }
}
