//! Hirota bilinear operators in the symbols 𝒟₁, 𝒟₂, … with exact rational
//! coefficients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::formal_core::{rat, GradedSeries, SeriesError};


use super::HirotaError;

/// A monomial Π 𝒟ₖ^{mₖ}, stored as the ascending word of indices
/// (𝒟₁²𝒟₃ ↦ [1,1,3]). Ordered by graded degree, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpMonomial {
    degree: u32,
    word: Vec<u32>,
}

impl OpMonomial {
    pub fn from_word(mut word: Vec<u32>) -> Self {
        word.sort_unstable();
        Self {
            degree: word.iter().sum(),
            word,
        }
    }

    /// From multiplicities m₁, m₂, … (index 0 is 𝒟₁).
    pub fn from_multiplicities(m: &[u32]) -> Self {
        let word = m
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat_n(i as u32 + 1, e as usize))
            .collect();
        Self::from_word(word)
    }

    pub fn one() -> Self {
        Self::from_word(Vec::new())
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Number of 𝒟 factors.
    pub fn order(&self) -> usize {
        self.word.len()
    }

    pub fn word(&self) -> &[u32] {
        &self.word
    }

    /// Multiplicities m₁..m_K with K the largest index present.
    pub fn multiplicities(&self) -> Vec<u32> {
        let k = self.word.last().copied().unwrap_or(0) as usize;
        let mut m = vec![0; k];
        for &i in &self.word {
            m[i as usize - 1] += 1;
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut w = self.word.clone();
        w.extend_from_slice(&other.word);
        Self::from_word(w)
    }
}

impl fmt::Display for OpMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .multiplicities()
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    format!("D{}", i + 1)
                } else {
                    format!("D{}^{}", i + 1, e)
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Polynomial in the Hirota symbols with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BilinearOperator {
    terms: BTreeMap<OpMonomial, BigRational>,
}

impl BilinearOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (OpMonomial, BigRational)>) -> Self {
        let mut out = Self::zero();
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    fn add_term(&mut self, m: OpMonomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpMonomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest graded degree of a term (0 for the zero operator).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree).max().unwrap_or(0)
    }

    /// Terms invariant under 𝒟ₖ → −𝒟ₖ (even number of factors).
    pub fn even_part(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.order() % 2 == 0)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    pub fn odd_part(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.order() % 2 == 1)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }
}

impl fmt::Display for BilinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mono = m.to_string();
            if m.word.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{a}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for BilinearOperator {
    type Err = HirotaError;

    /// Parse the canonical text form, e.g. `-1/6*D1^3 - D3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HirotaError::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "0" {
            return Ok(Self::zero());
        }
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for (i, ch) in compact.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 {
                pieces.push((neg, std::mem::take(&mut cur)));
                neg = ch == '-';
            } else if ch == '-' && i == 0 {
                neg = true;
            } else if ch != '+' {
                cur.push(ch);
            }
        }
        pieces.push((neg, cur));
        let mut out = Self::zero();
        for (neg, body) in pieces {
            if body.is_empty() {
                return Err(bad());
            }
            let mut coeff = BigRational::one();
            let mut word = Vec::new();
            for factor in body.split('*') {
                if let Some(sym) = factor.strip_prefix('D') {
                    let (idx, pow) = match sym.split_once('^') {
                        Some((i, p)) => (i, p.parse::<u32>().map_err(|_| bad())?),
                        None => (sym, 1),
                    };
                    let idx: u32 = idx.parse().map_err(|_| bad())?;
                    if idx == 0 {
                        return Err(bad());
                    }
                    word.extend(std::iter::repeat_n(idx, pow as usize));
                } else {
                    let r = match factor.split_once('/') {
                        Some((n, d)) => {
                            let n: BigInt = n.parse().map_err(|_| bad())?;
                            let d: BigInt = d.parse().map_err(|_| bad())?;
                            if d.is_zero() {
                                return Err(bad());
                            }
                            BigRational::new(n, d)
                        }
                        None => BigRational::from_integer(factor.parse().map_err(|_| bad())?),
                    };
                    coeff *= r;
                }
            }
            if neg {
                coeff = -coeff;
            }
            out.add_term(OpMonomial::from_word(word), coeff);
        }
        Ok(out)
    }
}

/// Polynomial in the 𝒟's with coefficients Laurent in ξ, keyed by (ξ-power, monomial).
type XiPoly = HashMap<(i32, OpMonomial), BigRational>;

fn xi_mul(a: &XiPoly, b: &XiPoly, max_power: i32) -> XiPoly {
    let mut out: XiPoly = HashMap::new();
    for ((pa, ma), ca) in a {
        for ((pb, mb), cb) in b {
            let p = pa + pb;
            if p > max_power {
                continue;
            }
            *out.entry((p, ma.mul(mb))).or_insert_with(BigRational::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// 𝒟_μ = Res dξ/ξ² e^{Σ ξᵏ𝒟ₖ} Π_j (𝒟ⱼ − (2/j)ξ^{−j})^{μⱼ}/μⱼ!, with every
/// term kept (use [`BilinearOperator::even_part`] for the reduced form).
pub fn dmu(mu: &[u32]) -> BilinearOperator {
    let weight: i32 = mu
        .iter()
        .enumerate()
        .map(|(i, &m)| (i as i32 + 1) * m as i32)
        .sum();
    let top = weight + 1;
    // Π_j (𝒟ⱼ − (2/j)ξ^{−j})^{μⱼ}/μⱼ!
    let mut prod: XiPoly = HashMap::from([((0, OpMonomial::one()), BigRational::one())]);
    for (i, &m) in mu.iter().enumerate() {
        let j = i as u32 + 1;
        let factor: XiPoly = HashMap::from([
            ((0, OpMonomial::from_word(vec![j])), BigRational::one()),
            ((-(j as i32), OpMonomial::one()), rat(-2, j as i64)),
        ]);
        for _ in 0..m {
            prod = xi_mul(&prod, &factor, top);
        }
        let inv = BigRational::new(BigInt::one(), factorial(m));
        for c in prod.values_mut() {
            *c *= &inv;
        }
    }
    // e^{Σ ξᵏ𝒟ₖ} = Π_k Σ_a ξ^{ka} 𝒟ₖ^a / a!, cut at ξ^{top}
    let mut expo: XiPoly = HashMap::from([((0, OpMonomial::one()), BigRational::one())]);
    for k in 1..=top.max(1) {
        let mut factor: XiPoly = HashMap::new();
        let mut a = 0;
        while (k * a) <= top {
            factor.insert(
                ((k * a), OpMonomial::from_word(vec![k as u32; a as usize])),
                BigRational::new(BigInt::one(), factorial(a as u32)),
            );
            a += 1;
        }
        expo = xi_mul(&expo, &factor, top);
    }
    let full = xi_mul(&expo, &prod, top);
    BilinearOperator::from_terms(
        full.into_iter()
            .filter(|((p, _), _)| *p == 1)
            .map(|((_, m), c)| (m, c)),
    )
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// f B g where 𝒟ₖ acts as ∂ₖ on the left factor minus ∂ₖ on the right one.
/// The result is truncated at N − deg B.
pub fn apply_bilinear<C: crate::formal_core::Coeff>(
    b: &BilinearOperator,
    f: &GradedSeries<C>,
    g: &GradedSeries<C>,
) -> Result<GradedSeries<C>, HirotaError> {
    if f.truncation() != g.truncation() {
        return Err(SeriesError::DegreeMismatch(f.truncation(), g.truncation()).into());
    }
    let n = f.truncation();
    let deg = b.degree();
    if deg > n {
        return Err(SeriesError::InsufficientTruncation {
            needed: deg,
            available: n,
        }
        .into());
    }
    let mut cache_f: HashMap<Vec<u32>, GradedSeries<C>> = HashMap::new();
    let mut cache_g: HashMap<Vec<u32>, GradedSeries<C>> = HashMap::new();
    let mut out = GradedSeries::zero(n - deg);
    for (mono, c) in b.terms() {
        let m = mono.multiplicities();
        let mut a = vec![0u32; m.len()];
        loop {
            let rest: Vec<u32> = m.iter().zip(&a).map(|(x, y)| x - y).collect();
            let mut weight = C::from_rational(c);
            for (&mk, &ak) in m.iter().zip(&a) {
                let sign = if (mk - ak) % 2 == 0 { 1 } else { -1 };
                weight = weight.mul(&C::from_int(sign * binomial(mk, ak)));
            }
            let df = derivative_cached(&mut cache_f, f, &a)?;
            let dg = derivative_cached(&mut cache_g, g, &rest)?;
            out = out.add(&df.mul(&dg).scale(&weight));
            // next multi-index a ≤ m
            let mut i = 0;
            loop {
                if i == a.len() {
                    break;
                }
                if a[i] < m[i] {
                    a[i] += 1;
                    break;
                }
                a[i] = 0;
                i += 1;
            }
            if i == a.len() {
                break;
            }
        }
    }
    Ok(out.truncate_to(n - deg))
}

fn derivative_cached<C: crate::formal_core::Coeff>(
    cache: &mut HashMap<Vec<u32>, GradedSeries<C>>,
    f: &GradedSeries<C>,
    m: &[u32],
) -> Result<GradedSeries<C>, HirotaError> {
    let mut key = m.to_vec();
    while key.last() == Some(&0) {
        key.pop();
    }
    if let Some(s) = cache.get(&key) {
        return Ok(s.clone());
    }
    let d = f.time_derivatives(&key)?;
    cache.insert(key, d.clone());
    Ok(d)
}

/// ∂²_{t₂}F + (1/12)(∂⁴_{t₁}F + 6(∂²_{t₁}F)²) − ∂_{t₁}∂_{t₃}F, truncated at N − 4.
///
/// This is the logarithmic form of T̂𝒟_{(0,0,1)}T̂ = 0 up to the factor −2/3.
pub fn kp_residual<C: crate::formal_core::Coeff>(f: &GradedSeries<C>) -> Result<GradedSeries<C>, HirotaError> {
    let n = f.truncation();
    if n < 4 {
        return Err(SeriesError::InsufficientTruncation {
            needed: 4,
            available: n,
        }
        .into());
    }
    let f22 = f.time_derivatives(&[0, 2])?;
    let f1111 = f.time_derivatives(&[4])?;
    let f11 = f.time_derivatives(&[2])?;
    let f13 = f.time_derivatives(&[1, 0, 1])?;
    let bracket = f1111.add(&f11.mul(&f11).scale(&C::from_int(6)));
    let out = f22
        .add(&bracket.scale(&C::from_ratio(1, 12)))
        .sub(&f13);
    Ok(out.truncate_to(n - 4))
}

/// The variant with 6(∂_{t₁}F)² in place of 6(∂²_{t₁}F)². It is not implied
/// by the bilinear equation; kept to show that it fails on genuine Tau
/// functions.
pub fn kp_residual_first_derivative_variant<C: crate::formal_core::Coeff>(
    f: &GradedSeries<C>,
) -> Result<GradedSeries<C>, HirotaError> {
    let n = f.truncation();
    if n < 4 {
        return Err(SeriesError::InsufficientTruncation {
            needed: 4,
            available: n,
        }
        .into());
    }
    let f22 = f.time_derivatives(&[0, 2])?;
    let f1111 = f.time_derivatives(&[4])?;
    let f1 = f.time_derivatives(&[1])?;
    let f13 = f.time_derivatives(&[1, 0, 1])?;
    let bracket = f1111.add(&f1.mul(&f1).scale(&C::from_int(6)));
    Ok(f22
        .add(&bracket.scale(&C::from_ratio(1, 12)))
        .sub(&f13)
        .truncate_to(n - 4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal_core::Var;

    type Q = GradedSeries<BigRational>;

    fn op(s: &str) -> BilinearOperator {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_text_round_trip() {
        let b = op("-1/6*D1^3 - D3");
        assert_eq!(b.to_string(), "-1/6*D1^3 - D3");
        let c = op("-2*D5 + 1/2*D3*D1^2 - 1/60*D1^5");
        assert_eq!(c.to_string(), "-1/60*D1^5 + 1/2*D1^2*D3 - 2*D5");
        assert!("D0".parse::<BilinearOperator>().is_err());
        assert!("1/0*D1".parse::<BilinearOperator>().is_err());
    }

    #[test]
    fn small_dmu() {
        assert_eq!(dmu(&[]), op("D1"));
        assert_eq!(dmu(&[1]), op("-2*D2"));
        assert_eq!(dmu(&[0, 1]), op("-1/6*D1^3 - D3"));
    }

    #[test]
    fn dmu_goldens() {
        let cases: [(&[u32], &str); 6] = [
            (&[0, 0, 0], "D1"),
            (&[1, 0, 0], "-2*D2"),
            (&[0, 1, 0], "-1/6*D1^3 - D3"),
            (&[2, 0, 0], "-1/6*D1^3 + 2*D3"),
            (
                &[0, 0, 1],
                "-1/36*D1^4 - 1/3*D1^2*D2 + 1/3*D1*D3 - 1/3*D2^2 - 2/3*D4",
            ),
            (&[2, 1, 0], "-1/60*D1^5 + 1/2*D1^2*D3 - 2*D5"),
        ];
        for (mu, text) in cases {
            assert_eq!(dmu(mu).to_string(), text, "mu = {mu:?}");
        }
        assert_eq!(
            dmu(&[0, 0, 1]).even_part().to_string(),
            "-1/36*D1^4 + 1/3*D1*D3 - 1/3*D2^2"
        );
    }

    #[test]
    fn bilinear_examples() {
        let n = 4;
        let t1 = Q::time(1, n);
        let d1 = op("D1");
        assert!(apply_bilinear(&d1, &t1, &t1).unwrap().is_empty());
        let r = apply_bilinear(&d1, &t1, &Q::one(n)).unwrap();
        assert_eq!(r, Q::one(3));
        // f D1² f = 2(f f'' − f'²)
        let f = Q::one(n).add(&t1.pow(2)).add(&Q::time(2, n));
        let lhs = apply_bilinear(&op("D1^2"), &f, &f).unwrap();
        let f1 = f.derivative(Var::Time(1)).unwrap();
        let f11 = f1.derivative(Var::Time(1)).unwrap();
        let rhs = f.mul(&f11).sub(&f1.mul(&f1)).scale(&rat(2, 1));
        assert_eq!(lhs, rhs.truncate_to(2));
    }

    #[test]
    fn kp_vanishes_on_zero() {
        assert!(kp_residual(&Q::zero(6)).unwrap().is_empty());
        assert!(kp_residual(&Q::zero(3)).is_err());
    }
}
