//! Quadrature: adaptive Gauss–Kronrod on segments and polylines, trapezoid
//! rules on circles and periodic intervals, Gauss–Hermite nodes.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge: estimate {value}, error {error:e}")]
    NoConvergence { value: Complex64, error: f64 },
    #[error("integrand is not finite at {0}")]
    NonFinite(f64),
}

/// Absolute and relative targets; convergence when err ≤ max(abs, rel·|I|).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-13, 1e-13)
    }
}

/// Result with error estimate and evaluation count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Result<(Complex64, f64), QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite(c));
    }
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite(c - x));
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite(c + x));
        }
        kron += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let k = kron * h;
    let g = gauss * h;
    Ok((k, (k - g).norm()))
}

/// Globally adaptive G7K15 on [a, b].
pub fn integrate(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Integral, QuadError> {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&f, a, b)?;
    let mut intervals = vec![(a, b, v, e)];
    let mut evals = 15;
    loop {
        let total: Complex64 = intervals.iter().map(|x| x.2).sum();
        let err: f64 = intervals.iter().map(|x| x.3).sum();
        if err <= tol.abs.max(tol.rel * total.norm()) {
            return Ok(Integral {
                value: total,
                error: err,
                evaluations: evals,
            });
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(QuadError::NoConvergence {
                value: total,
                error: err,
            });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid)?;
        let (v2, e2) = gk15(&f, mid, hi)?;
        evals += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// ∫ f(z) dz along the straight segment z0 → z1.
pub fn segment(
    f: impl Fn(Complex64) -> Complex64,
    z0: Complex64,
    z1: Complex64,
    tol: Tolerance,
) -> Result<Integral, QuadError> {
    let d = z1 - z0;
    integrate(|s| f(z0 + d * s) * d, 0.0, 1.0, tol)
}

/// ∫ f(z) dz along a polyline through the given vertices.
pub fn polyline(
    f: impl Fn(Complex64) -> Complex64,
    vertices: &[Complex64],
    tol: Tolerance,
) -> Result<Integral, QuadError> {
    let mut out = Integral {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
        evaluations: 0,
    };
    for w in vertices.windows(2) {
        let r = segment(&f, w[0], w[1], tol)?;
        out.value += r.value;
        out.error += r.error;
        out.evaluations += r.evaluations;
    }
    Ok(out)
}

/// Trapezoid rule for a periodic integrand: ∫_a^{a+L} f(s) ds with node
/// doubling until successive values agree within `tol`, relative to
/// max(1, ∫|f|) so that cancelling integrands stop at the rounding floor.
pub fn periodic_trapezoid(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    period: f64,
    tol: f64,
) -> Result<Integral, QuadError> {
    let mut m = 16usize;
    let eval = |m: usize| -> (Complex64, f64) {
        let h = period / m as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        for j in 0..m {
            let v = f(a + h * j as f64);
            acc += v;
            abs += v.norm();
        }
        (acc * h, abs * h)
    };
    let (mut prev, _) = eval(m);
    let mut evals = m;
    let mut err = f64::INFINITY;
    while m < 1 << 16 {
        m *= 2;
        let (cur, abs) = eval(m);
        evals += m;
        err = (cur - prev).norm();
        if !cur.is_finite() {
            return Err(QuadError::NonFinite(a));
        }
        if err <= tol * cur.norm().max(abs).max(1.0) {
            return Ok(Integral {
                value: cur,
                error: err,
                evaluations: evals,
            });
        }
        prev = cur;
    }
    Err(QuadError::NoConvergence { value: prev, error: err })
}

/// (1/2πi) ∮_{|z−c|=r} f(z) dz, counter-clockwise, by the trapezoid rule.
pub fn circle_residue(
    f: impl Fn(Complex64) -> Complex64,
    center: Complex64,
    radius: f64,
    tol: f64,
) -> Result<Integral, QuadError> {
    let g = |theta: f64| {
        let e = Complex64::from_polar(1.0, theta);
        f(center + e * radius) * e * radius
    };
    let r = periodic_trapezoid(g, 0.0, 2.0 * PI, tol)?;
    Ok(Integral {
        value: r.value / (2.0 * PI),
        error: r.error / (2.0 * PI),
        evaluations: r.evaluations,
    })
}

/// Nodes and weights of the n-point Gauss–Hermite rule for weight e^{−x²}
/// (Golub–Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], 2.0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_gaussian() {
        let r = integrate(
            |x| Complex64::new((-x * x / 2.0).exp(), 0.0),
            -12.0,
            12.0,
            Tolerance::default(),
        )
        .unwrap();
        assert!((r.value.re - (2.0 * PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn circle_residue_of_simple_pole() {
        let p = Complex64::new(0.3, -0.2);
        let r = circle_residue(|z| 2.5 / (z - p), p, 0.1, 1e-13).unwrap();
        assert!((r.value - 2.5).norm() < 1e-13);
        let r2 = circle_residue(|z| (z - p).powi(-3), p, 0.1, 1e-13).unwrap();
        assert!(r2.value.norm() < 1e-13);
    }

    #[test]
    fn hermite_rule_is_exact_on_polynomials() {
        let (x, w) = gauss_hermite(20);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.75 * PI.sqrt()).abs() < 1e-13);
        let (y, v) = gauss_legendre(12);
        let s: f64 = y.iter().zip(&v).map(|(y, v)| v * y.powi(6)).sum();
        assert!((s - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn polyline_path_independence_for_entire_function() {
        let f = |z: Complex64| z * z;
        let a = Complex64::new(0.0, 0.0);
        let b = Complex64::new(1.0, 1.0);
        let direct = segment(f, a, b, Tolerance::default()).unwrap().value;
        let bent = polyline(f, &[a, Complex64::new(1.0, 0.0), b], Tolerance::default())
            .unwrap()
            .value;
        assert!((direct - bent).norm() < 1e-14);
        assert!((direct - b.powi(3) / 3.0).norm() < 1e-14);
    }
}
