//! Differential polynomials in the symbols ∂^a T (or ∂^a F), used to turn a
//! bilinear equation T 𝒟 T = 0 into explicit differential equations.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::operator::BilinearOperator;

/// Multi-index a = (a₁, a₂, …) with trailing zeros removed.
pub type MultiIndex = Vec<u32>;

fn trim(mut a: MultiIndex) -> MultiIndex {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn raise(a: &[u32], k: usize) -> MultiIndex {
    let mut b = a.to_vec();
    if b.len() <= k {
        b.resize(k + 1, 0);
    }
    b[k] += 1;
    b
}

/// Polynomial in derivative symbols; each monomial is a sorted list of
/// multi-indices with repetition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffPoly {
    symbol: char,
    terms: BTreeMap<Vec<MultiIndex>, BigRational>,
}

impl DiffPoly {
    pub fn zero(symbol: char) -> Self {
        Self {
            symbol,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(symbol: char) -> Self {
        let mut p = Self::zero(symbol);
        p.add_term(Vec::new(), BigRational::one());
        p
    }

    /// The single symbol ∂^a.
    pub fn derivative_symbol(symbol: char, a: &[u32]) -> Self {
        let mut p = Self::zero(symbol);
        p.add_term(vec![trim(a.to_vec())], BigRational::one());
        p
    }

    pub fn add_term(&mut self, mut mono: Vec<MultiIndex>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        mono.sort();
        let e = self
            .terms
            .entry(mono.clone())
            .or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<MultiIndex>, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &[MultiIndex]) -> BigRational {
        let mut key: Vec<MultiIndex> = mono.iter().cloned().map(trim).collect();
        key.sort();
        self.terms.get(&key).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        let mut out = Self::zero(self.symbol);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.symbol);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = ma.clone();
                m.extend(mb.iter().cloned());
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    /// Total derivative ∂_{t_k} (k ≥ 1), acting by ∂ₖ(∂^a) = ∂^{a+eₖ}.
    pub fn total_derivative(&self, k: u32) -> Self {
        assert!(k >= 1, "times are indexed from 1");
        let idx = k as usize - 1;
        let mut out = Self::zero(self.symbol);
        for (m, c) in &self.terms {
            for i in 0..m.len() {
                let mut mm = m.clone();
                mm[i] = raise(&m[i], idx);
                out.add_term(mm, c.clone());
            }
        }
        out
    }

    /// Divide by the coefficient of `mono`, if nonzero.
    pub fn normalized_by(&self, mono: &[MultiIndex]) -> Option<Self> {
        let c = self.coefficient(mono);
        if c.is_zero() {
            return None;
        }
        Some(self.scale(&(BigRational::one() / c)))
    }
}

fn symbol_name(symbol: char, a: &[u32]) -> String {
    let mut s = symbol.to_string();
    for (i, &e) in a.iter().enumerate() {
        for _ in 0..e {
            s.push_str(&(i + 1).to_string());
        }
    }
    s
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            let mut j = 0;
            while j < m.len() {
                let mut e = 1;
                while j + e < m.len() && m[j + e] == m[j] {
                    e += 1;
                }
                let name = symbol_name(self.symbol, &m[j]);
                factors.push(if e == 1 { name } else { format!("{name}^{e}") });
                j += e;
            }
            let a = c.abs();
            if factors.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{a}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Iterate every multi-index a ≤ m.
fn sub_indices(m: &[u32]) -> Vec<MultiIndex> {
    let mut out = vec![Vec::new()];
    for &mk in m {
        let mut next = Vec::new();
        for a in &out {
            for ak in 0..=mk {
                let mut b = a.clone();
                b.push(ak);
                next.push(b);
            }
        }
        out = next;
    }
    out
}

/// Leibniz weight Π binom(mₖ, aₖ)(−1)^{mₖ−aₖ}.
fn leibniz(m: &[u32], a: &[u32]) -> BigRational {
    let mut w = BigInt::one();
    for (&mk, &ak) in m.iter().zip(a) {
        w *= binomial(mk, ak);
        if (mk - ak) % 2 == 1 {
            w = -w;
        }
    }
    BigRational::from_integer(w)
}

/// T B T written in the derivative symbols of T.
pub fn bilinear_form(b: &BilinearOperator) -> DiffPoly {
    let mut out = DiffPoly::zero('T');
    for (mono, c) in b.terms() {
        let m = mono.multiplicities();
        for a in sub_indices(&m) {
            let rest: Vec<u32> = m.iter().zip(&a).map(|(x, y)| x - y).collect();
            out.add_term(
                vec![trim(a.clone()), trim(rest)],
                c * leibniz(&m, &a),
            );
        }
    }
    out
}

/// e^{−2F} (e^F B e^F) written in the derivative symbols of F.
pub fn log_form(b: &BilinearOperator) -> DiffPoly {
    // Y_a = e^{−F} ∂^a e^{F}, built by Y_{a+eₖ} = ∂ₖY_a + Fₖ Y_a.
    let mut cache: BTreeMap<MultiIndex, DiffPoly> = BTreeMap::new();
    cache.insert(Vec::new(), DiffPoly::one('F'));
    fn y(a: &[u32], cache: &mut BTreeMap<MultiIndex, DiffPoly>) -> DiffPoly {
        let a = trim(a.to_vec());
        if let Some(p) = cache.get(&a) {
            return p.clone();
        }
        let k = a.len() - 1;
        let mut lower = a.clone();
        lower[k] -= 1;
        let prev = y(&lower, cache);
        let fk = DiffPoly::derivative_symbol('F', &raise(&[], k));
        let out = prev.total_derivative(k as u32 + 1).add(&fk.mul(&prev));
        cache.insert(a, out.clone());
        out
    }
    let mut out = DiffPoly::zero('F');
    for (mono, c) in b.terms() {
        let m = mono.multiplicities();
        for a in sub_indices(&m) {
            let rest: Vec<u32> = m.iter().zip(&a).map(|(x, y)| x - y).collect();
            let term = y(&a, &mut cache).mul(&y(&rest, &mut cache));
            out = out.add(&term.scale(&(c * leibniz(&m, &a))));
        }
    }
    out
}

/// The KP bilinear form in T symbols, normalized to have T·∂²_{t₂}T with
/// coefficient 1.
pub fn kp_bilinear_form() -> DiffPoly {
    let b = super::operator::dmu(&[0, 0, 1]).even_part();
    bilinear_form(&b)
        .normalized_by(&[vec![], vec![0, 2]])
        .expect("KP operator contains D2^2")
}

/// The KP equation in F symbols, normalized to have ∂²_{t₂}F with coefficient 1.
pub fn kp_log_form() -> DiffPoly {
    let b = super::operator::dmu(&[0, 0, 1]);
    log_form(&b)
        .normalized_by(&[vec![0, 2]])
        .expect("KP operator contains D2^2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal_core::rat;

    fn sym(s: char, a: &[u32]) -> DiffPoly {
        DiffPoly::derivative_symbol(s, a)
    }

    #[test]
    fn bell_recursion_gives_second_derivative() {
        let b: BilinearOperator = "D1^2".parse().unwrap();
        // e^{-2F}(e^F D1² e^F) = 2 F11
        let lf = log_form(&b);
        assert_eq!(lf, sym('F', &[2]).scale(&rat(2, 1)));
    }

    #[test]
    fn kp_bilinear_terms() {
        let t = |a: &[u32]| sym('T', a);
        let expected = t(&[]).mul(&t(&[0, 2]))
            .sub(&t(&[0, 1]).mul(&t(&[0, 1])))
            .add(
                &t(&[])
                    .mul(&t(&[4]))
                    .sub(&t(&[1]).mul(&t(&[3])).scale(&rat(4, 1)))
                    .add(&t(&[2]).mul(&t(&[2])).scale(&rat(3, 1)))
                    .scale(&rat(1, 12)),
            )
            .sub(&t(&[]).mul(&t(&[1, 0, 1])))
            .add(&t(&[1]).mul(&t(&[0, 0, 1])));
        assert_eq!(kp_bilinear_form(), expected);
    }

    #[test]
    fn odd_part_drops_out_of_symmetric_forms() {
        let b = super::super::operator::dmu(&[0, 0, 1]);
        assert!(bilinear_form(&b.odd_part()).is_zero());
        assert!(log_form(&b.odd_part()).is_zero());
    }

    #[test]
    fn kp_log_terms() {
        let f = |a: &[u32]| sym('F', a);
        let expected = f(&[0, 2])
            .add(&f(&[4]).scale(&rat(1, 12)))
            .add(&f(&[2]).mul(&f(&[2])).scale(&rat(1, 2)))
            .sub(&f(&[1, 0, 1]));
        let got = kp_log_form();
        assert_eq!(got, expected, "{got}");
    }
}
