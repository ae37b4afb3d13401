//! Seeded point sampling. Each suite draws from its own ChaCha8 stream, so a
//! suite produces the same points whether run alone or inside `all`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ReportError;

const MAX_TRIES: usize = 100_000;

/// FNV-1a of the suite name, mixed into the seed.
pub fn stream(seed: u64, suite: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in suite.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

pub fn unit_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// Draw `n` points from `draw`, each at least `min_sep` from the others and
/// from `avoid`.
pub fn separated(
    rng: &mut ChaCha8Rng,
    n: usize,
    min_sep: f64,
    avoid: &[Complex64],
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Complex64,
) -> Result<Vec<Complex64>, ReportError> {
    let mut out: Vec<Complex64> = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n {
        tries += 1;
        if tries > MAX_TRIES {
            return Err(ReportError::Sampling(format!(
                "could not place {n} points {min_sep} apart"
            )));
        }
        let z = draw(rng);
        if out.iter().chain(avoid).all(|w| (z - w).norm() >= min_sep) {
            out.push(z);
        }
    }
    Ok(out)
}

/// Draw `n` points from `draw`, each at least `min_sep` from `avoid`.
pub fn avoiding(
    rng: &mut ChaCha8Rng,
    n: usize,
    min_sep: f64,
    avoid: &[Complex64],
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Complex64,
) -> Result<Vec<Complex64>, ReportError> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..MAX_TRIES {
        if out.len() == n {
            break;
        }
        let z = draw(rng);
        if avoid.iter().all(|w| (z - w).norm() >= min_sep) {
            out.push(z);
        }
    }
    if out.len() < n {
        return Err(ReportError::Sampling(format!("could not place {n} points {min_sep} away from the poles")));
    }
    Ok(out)
}

/// Uniform on [−w, w]².
pub fn square(w: f64) -> impl FnMut(&mut ChaCha8Rng) -> Complex64 {
    move |rng| Complex64::new(rng.gen_range(-w..=w), rng.gen_range(-w..=w))
}

/// o + s + tτ with s, t uniform on [margin, 1 − margin].
pub fn cell(tau: Complex64, origin: Complex64, margin: f64) -> impl FnMut(&mut ChaCha8Rng) -> Complex64 {
    move |rng| {
        let s = rng.gen_range(margin..=1.0 - margin);
        let t = rng.gen_range(margin..=1.0 - margin);
        origin + s + tau * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = (0..4).map(|_| stream(7, "x").gen()).collect();
        let b: Vec<f64> = (0..4).map(|_| stream(7, "x").gen()).collect();
        assert_eq!(a, b);
        assert_ne!(stream(7, "x").gen::<u64>(), stream(7, "y").gen::<u64>());
    }

    #[test]
    fn separation_is_respected() {
        let mut rng = stream(1, "t");
        let pts = separated(&mut rng, 6, 0.3, &[Complex64::new(0.0, 0.0)], square(1.0)).unwrap();
        for (i, p) in pts.iter().enumerate() {
            assert!(p.norm() >= 0.3);
            for q in &pts[i + 1..] {
                assert!((p - q).norm() >= 0.3);
            }
        }
        assert!(separated(&mut rng, 50, 1.0, &[], square(0.5)).is_err());
    }
}
