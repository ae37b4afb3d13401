//! Truncated graded multivariate series.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coeff::Coeff;
use super::SeriesError;

/// A formal variable. `Time(k)` has weight k, `Shift(k)` is an auxiliary
/// copy of the time direction k (weight k), `Aux(i)` is a point variable of
/// weight 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    Time(u32),
    Shift(u32),
    Aux(u32),
}

impl Var {
    pub fn weight(self) -> u32 {
        match self {
            Var::Time(k) | Var::Shift(k) => k,
            Var::Aux(_) => 1,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Time(k) => write!(f, "t{k}"),
            Var::Shift(k) => write!(f, "u{k}"),
            Var::Aux(i) => write!(f, "x{i}"),
        }
    }
}

/// Product of variables with positive exponents, kept sorted by variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Self(vec![(v, 1)])
    }

    pub fn pow(v: Var, e: u32) -> Self {
        if e == 0 {
            Self::one()
        } else {
            Self(vec![(v, e)])
        }
    }

    /// Build from arbitrary pairs; repeated variables are merged, zero exponents dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, u32)>) -> Self {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_default() += e;
        }
        Self(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    /// Monomial Π t_k^{m_k} from a multiplicity vector indexed from k = 1.
    pub fn times(multiplicities: &[u32]) -> Self {
        Self::from_pairs(
            multiplicities
                .iter()
                .enumerate()
                .map(|(i, &m)| (Var::Time(i as u32 + 1), m)),
        )
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().map(|(v, e)| v.weight() * e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self(out)
    }

    /// Split off the power of `v`.
    pub fn split(&self, v: Var) -> (u32, Monomial) {
        let e = self.exponent(v);
        let rest = self.0.iter().copied().filter(|(w, _)| *w != v).collect();
        (e, Self(rest))
    }

    /// Lower the exponent of `v` by one, `None` if absent.
    pub fn lower(&self, v: Var) -> Option<(u32, Monomial)> {
        let e = self.exponent(v);
        if e == 0 {
            return None;
        }
        let rest = self
            .0
            .iter()
            .filter_map(|&(w, f)| {
                if w == v {
                    (f > 1).then_some((w, f - 1))
                } else {
                    Some((w, f))
                }
            })
            .collect();
        Some((e, Self(rest)))
    }

    /// Exchange variables through a map, merging collisions.
    pub fn rename(&self, f: impl Fn(Var) -> Var) -> Self {
        Self::from_pairs(self.0.iter().map(|&(v, e)| (f(v), e)))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Formal series truncated at graded degree `N`: all terms of weight > N are
/// discarded. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedSeries<C> {
    trunc: u32,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> GradedSeries<C> {
    pub fn zero(trunc: u32) -> Self {
        Self {
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(trunc: u32) -> Self {
        Self::constant(C::one(), trunc)
    }

    pub fn constant(c: C, trunc: u32) -> Self {
        Self::monomial(Monomial::one(), c, trunc)
    }

    pub fn var(v: Var, trunc: u32) -> Self {
        Self::monomial(Monomial::var(v), C::one(), trunc)
    }

    pub fn time(k: u32, trunc: u32) -> Self {
        Self::var(Var::Time(k), trunc)
    }

    pub fn monomial(m: Monomial, c: C, trunc: u32) -> Self {
        let mut s = Self::zero(trunc);
        s.add_term(m, c);
        s
    }

    pub fn from_terms(trunc: u32, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut s = Self::zero(trunc);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    /// Add `c·m` in place; ignored above the truncation degree.
    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() || m.weight() > self.trunc {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// Add all terms of `other` in place (terms above N are dropped).
    pub fn absorb(&mut self, other: Self) {
        for (m, c) in other.terms {
            self.add_term(m, c);
        }
    }

    pub fn truncation(&self) -> u32 {
        self.trunc
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::one())
    }

    /// Variables occurring in some stored term.
    pub fn variables(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self
            .terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(v, _)| *v))
            .collect();
        vs.sort();
        vs.dedup();
        vs
    }

    /// Drop terms above `n` and lower the nominal degree.
    pub fn truncate_to(&self, n: u32) -> Self {
        let n = n.min(self.trunc);
        Self {
            trunc: n,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.weight() <= n)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Re-label the nominal truncation degree upward without adding terms.
    /// Only meaningful when the caller knows the missing terms vanish.
    pub fn with_nominal_degree(mut self, n: u32) -> Self {
        if n < self.trunc {
            return self.truncate_to(n);
        }
        self.trunc = n;
        self
    }

    fn check_degree(&self, other: &Self) -> Result<(), SeriesError> {
        if self.trunc != other.trunc {
            Err(SeriesError::DegreeMismatch(self.trunc, other.trunc))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_degree(other)?;
        Ok(self.add(other))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_degree(other)?;
        Ok(self.mul(other))
    }

    /// Sum at the common (minimum) truncation degree.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.trunc.min(other.trunc);
        let mut out = self.truncate_to(n);
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero(self.trunc);
        }
        self.map(|c| c.mul(s))
    }

    fn map(&self, f: impl Fn(&C) -> C) -> Self {
        let mut out = Self::zero(self.trunc);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Product at the common (minimum) truncation degree.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.trunc.min(other.trunc);
        let a = weighted_terms(&self.terms, n);
        let b = weighted_terms(&other.terms, n);
        let mut acc: HashMap<Monomial, C> = HashMap::new();
        for (ma, wa, ca) in &a {
            for (mb, wb, cb) in &b {
                if wa + wb > n {
                    break;
                }
                let m = ma.mul(mb);
                let c = ca.mul(cb);
                match acc.get_mut(&m) {
                    Some(v) => *v = v.add(&c),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Self {
            trunc: n,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.trunc);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// The series without its constant term.
    pub fn without_constant(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&Monomial::one());
        out
    }

    /// Σ_{j≤N} c_j h^j for a series h without constant term.
    fn compose_power_series(h: &Self, coeffs: impl Fn(u32) -> C) -> Self {
        let n = h.trunc;
        let mut out = Self::constant(coeffs(0), n);
        let mut power = Self::one(n);
        for j in 1..=n {
            power = power.mul(h);
            if power.is_empty() {
                break;
            }
            out = out.add(&power.scale(&coeffs(j)));
        }
        out
    }

    /// Exponential. The constant term must have an exponential in the field.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        let c0 = self.constant_term();
        let e0 = c0.exp_scalar().ok_or(SeriesError::ConstantNotRepresentable)?;
        let h = self.without_constant();
        let mut fact = C::one();
        let mut inv_fact = vec![C::one()];
        for j in 1..=self.trunc {
            fact = fact.mul(&C::from_int(j as i64));
            inv_fact.push(fact.inv().expect("nonzero factorial"));
        }
        Ok(Self::compose_power_series(&h, |j| inv_fact[j as usize].clone()).scale(&e0))
    }

    /// Principal logarithm. Requires a nonzero constant term whose logarithm
    /// lies in the field.
    pub fn log(&self) -> Result<Self, SeriesError> {
        let c0 = self.constant_term();
        let inv0 = c0.inv().ok_or(SeriesError::LogOfZeroConstant)?;
        let l0 = c0.ln_scalar().ok_or(SeriesError::ConstantNotRepresentable)?;
        let h = self.without_constant().scale(&inv0);
        let out = Self::compose_power_series(&h, |j| {
            if j == 0 {
                C::zero()
            } else {
                let sign = if j % 2 == 1 { 1 } else { -1 };
                C::from_ratio(sign, j as i64)
            }
        });
        Ok(out.add(&Self::constant(l0, self.trunc)))
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inv(&self) -> Result<Self, SeriesError> {
        let c0 = self.constant_term();
        let inv0 = c0.inv().ok_or(SeriesError::NotInvertible)?;
        let h = self.without_constant().scale(&inv0);
        let out = Self::compose_power_series(&h, |j| {
            if j % 2 == 0 {
                C::one()
            } else {
                C::one().neg()
            }
        });
        Ok(out.scale(&inv0))
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        Ok(self.mul(&other.inv()?))
    }

    /// ∂/∂v. The result is truncated at N − weight(v).
    pub fn derivative(&self, v: Var) -> Result<Self, SeriesError> {
        let w = v.weight();
        if w > self.trunc {
            return Err(SeriesError::InsufficientTruncation {
                needed: w,
                available: self.trunc,
            });
        }
        let mut out = Self::zero(self.trunc - w);
        for (m, c) in &self.terms {
            if let Some((e, rest)) = m.lower(v) {
                out.add_term(rest, c.mul(&C::from_int(e as i64)));
            }
        }
        Ok(out)
    }

    /// Apply Π ∂_{t_k}^{m_k} for a multiplicity vector indexed from k = 1.
    pub fn time_derivatives(&self, multiplicities: &[u32]) -> Result<Self, SeriesError> {
        let mut out = self.clone();
        for (i, &m) in multiplicities.iter().enumerate() {
            for _ in 0..m {
                out = out.derivative(Var::Time(i as u32 + 1))?;
            }
        }
        Ok(out)
    }

    /// Coefficient of v^e, as a series in the remaining variables, truncated
    /// at N − e·weight(v).
    pub fn coefficient_of(&self, v: Var, e: u32) -> Self {
        let n = self.trunc.saturating_sub(e * v.weight());
        let mut out = Self::zero(n);
        for (m, c) in &self.terms {
            let (f, rest) = m.split(v);
            if f == e {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Decompose by powers of `v`; keys are exponents.
    pub fn split_by(&self, v: Var) -> BTreeMap<u32, Self> {
        let mut out: BTreeMap<u32, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (f, rest) = m.split(v);
            out.entry(f)
                .or_insert_with(|| Self::zero(self.trunc.saturating_sub(f * v.weight())))
                .add_term(rest, c.clone());
        }
        out
    }

    /// Substitute series for variables; unmapped variables stay as they are.
    /// The substituted series must not lower weights, so the result is exact
    /// through the common truncation degree.
    pub fn substitute(&self, subs: &BTreeMap<Var, Self>) -> Self {
        let n = subs
            .values()
            .map(|s| s.trunc)
            .fold(self.trunc, |a, b| a.min(b));
        let mut cache: HashMap<(Var, u32), Self> = HashMap::new();
        let mut out = Self::zero(n);
        for (m, c) in &self.terms {
            let mut prod = Self::constant(c.clone(), n);
            let mut plain = Vec::new();
            for &(v, e) in m.factors() {
                match subs.get(&v) {
                    Some(s) => {
                        let p = cache
                            .entry((v, e))
                            .or_insert_with(|| s.truncate_to(n).pow(e))
                            .clone();
                        prod = prod.mul(&p);
                    }
                    None => plain.push((v, e)),
                }
            }
            if !plain.is_empty() {
                prod = prod.mul(&Self::monomial(Monomial(plain), C::one(), n));
            }
            out.absorb(prod);
        }
        out
    }

    /// Substitute t_k → t_k + s_k for the given shifts.
    pub fn shift_times(&self, shifts: &BTreeMap<u32, Self>) -> Self {
        let subs: BTreeMap<Var, Self> = shifts
            .iter()
            .map(|(&k, s)| (Var::Time(k), Self::time(k, s.trunc).add(s)))
            .collect();
        self.substitute(&subs)
    }

    /// Rename variables (e.g. to identify two points).
    pub fn rename(&self, f: impl Fn(Var) -> Var) -> Self {
        let mut out = Self::zero(self.trunc);
        for (m, c) in &self.terms {
            out.add_term(m.rename(&f), c.clone());
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> GradedSeries<D> {
        let mut out = GradedSeries::zero(self.trunc);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn to_complex(&self) -> GradedSeries<Complex64> {
        self.map_coeffs(|c| c.to_complex())
    }

    /// Largest coefficient modulus (0 for the zero series).
    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_complex().norm())
            .fold(0.0, f64::max)
    }

    /// Evaluate the truncated polynomial at numeric variable values.
    pub fn eval(&self, value: impl Fn(Var) -> Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.factors()
                    .iter()
                    .fold(c.to_complex(), |acc, &(v, e)| acc * value(v).powu(e))
            })
            .sum()
    }
}

fn weighted_terms<C>(terms: &BTreeMap<Monomial, C>, n: u32) -> Vec<(&Monomial, u32, &C)> {
    let mut v: Vec<_> = terms
        .iter()
        .map(|(m, c)| (m, m.weight(), c))
        .filter(|(_, w, _)| *w <= n)
        .collect();
    v.sort_by_key(|(_, w, _)| *w);
    v
}

impl<C: Coeff + fmt::Display> fmt::Display for GradedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O({})", self.trunc + 1);
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({c})*{m}"))
            .collect();
        write!(f, "{} + O({})", parts.join(" + "), self.trunc + 1)
    }
}

/// A finitely supported vector of times t_k, k ≥ 1.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimesVector {
    entries: BTreeMap<u32, Complex64>,
}

impl TimesVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set t_k. Panics for k = 0, which is not a time index.
    pub fn set(&mut self, k: u32, value: Complex64) {
        assert!(k >= 1, "time indices start at 1");
        if value == Complex64::new(0.0, 0.0) {
            self.entries.remove(&k);
        } else {
            self.entries.insert(k, value);
        }
    }

    pub fn get(&self, k: u32) -> Complex64 {
        self.entries.get(&k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn max_index(&self) -> u32 {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.set(k, out.get(k) + v);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::new();
        for (k, v) in self.iter() {
            out.set(k, v * s);
        }
        out
    }
}

impl FromIterator<(u32, Complex64)> for TimesVector {
    fn from_iter<I: IntoIterator<Item = (u32, Complex64)>>(iter: I) -> Self {
        let mut out = Self::new();
        for (k, v) in iter {
            out.set(k, out.get(k) + v);
        }
        out
    }
}
