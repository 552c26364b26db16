//! Laurent polynomials with half-integer exponents over the meridian
//! lattice, and formal fractions of them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::HalfMonomial;

/// An element of the integral group ring. Coefficients are never zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupRingElement {
    rank: usize,
    terms: BTreeMap<HalfMonomial, BigInt>,
}

impl GroupRingElement {
    pub fn zero(rank: usize) -> Self {
        GroupRingElement {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(rank: usize) -> Self {
        Self::monomial(HalfMonomial::identity(rank), BigInt::one())
    }

    pub fn monomial(m: HalfMonomial, c: impl Into<BigInt>) -> Self {
        let rank = m.rank();
        let mut out = Self::zero(rank);
        out.add_term(m, c.into());
        out
    }

    pub fn from_terms(rank: usize, terms: impl IntoIterator<Item = (HalfMonomial, BigInt)>) -> Self {
        let mut out = Self::zero(rank);
        for (m, c) in terms {
            assert_eq!(m.rank(), rank, "lattice mismatch");
            out.add_term(m, c);
        }
        out
    }

    /// `a - b` for monomials `a`, `b`.
    pub fn binomial(a: HalfMonomial, b: HalfMonomial) -> Self {
        let mut out = Self::monomial(a, 1);
        out.add_term(b, BigInt::from(-1));
        out
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> &BTreeMap<HalfMonomial, BigInt> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, c)| m.is_identity() && c.is_one())
    }

    /// `Some((m, c))` when the element is `c * m`.
    pub fn as_monomial(&self) -> Option<(&HalfMonomial, &BigInt)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn add_term(&mut self, m: HalfMonomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.rank != other.rank {
            Err(Error::LatticeMismatch(self.rank, other.rank))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.rank);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("lattice mismatch")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.checked_sub(other).expect("lattice mismatch")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("lattice mismatch")
    }

    pub fn neg(&self) -> Self {
        GroupRingElement {
            rank: self.rank,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut out = Self::zero(self.rank);
        for (m, x) in &self.terms {
            out.add_term(m.clone(), x * c);
        }
        out
    }

    pub fn shift(&self, m: &HalfMonomial) -> Self {
        GroupRingElement {
            rank: self.rank,
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(self.rank);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Ring homomorphism induced by sending basis element `i` to `images[i]`.
    pub fn map(&self, images: &[HalfMonomial], target_rank: usize) -> Self {
        let mut out = Self::zero(target_rank);
        for (m, c) in &self.terms {
            out.add_term(m.map(images, target_rank), c.clone());
        }
        out
    }

    pub fn content(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Per-coordinate minimum of the exponents, in half units.
    pub fn min_halves(&self) -> Option<Vec<i64>> {
        let mut it = self.terms.keys();
        let first = it.next()?.halves().to_vec();
        Some(it.fold(first, |acc, m| {
            acc.iter().zip(m.halves()).map(|(a, b)| *a.min(b)).collect()
        }))
    }

    pub fn max_halves(&self) -> Option<Vec<i64>> {
        let mut it = self.terms.keys();
        let first = it.next()?.halves().to_vec();
        Some(it.fold(first, |acc, m| {
            acc.iter().zip(m.halves()).map(|(a, b)| *a.max(b)).collect()
        }))
    }

    fn leading(&self) -> Option<(&HalfMonomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// `q` with `q * d = self`, by leading-term reduction.
    pub fn exact_div(&self, d: &Self) -> Result<Self> {
        self.check(d)?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero(self.rank));
        }
        // every exponent of q lies in [min(p) - min(d), max(p) - max(d)]
        let (pmin, pmax) = (self.min_halves().unwrap(), self.max_halves().unwrap());
        let (dmin, dmax) = (d.min_halves().unwrap(), d.max_halves().unwrap());
        let lo: Vec<i64> = pmin.iter().zip(&dmin).map(|(a, b)| a - b).collect();
        let hi: Vec<i64> = pmax.iter().zip(&dmax).map(|(a, b)| a - b).collect();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::Indivisible);
        }
        let (dm, dc) = d.leading().unwrap();
        let dm_inv = dm.inv();
        let mut rem = self.clone();
        let mut q = Self::zero(self.rank);
        while let Some((m, c)) = rem.leading() {
            let (r, zero) = c.div_rem(dc);
            if !zero.is_zero() {
                return Err(Error::Indivisible);
            }
            let qm = m.mul(&dm_inv);
            if qm
                .halves()
                .iter()
                .zip(lo.iter().zip(&hi))
                .any(|(x, (l, h))| x < l || x > h)
            {
                return Err(Error::Indivisible);
            }
            let step = Self::monomial(qm, r);
            rem = rem.sub(&step.mul(d));
            q = q.add(&step);
        }
        Ok(q)
    }

    /// Terms in descending monomial order, e.g. `-2*t^(3/2)*s^(-1) + 1`.
    pub fn render(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if m.is_identity() {
                let _ = write!(out, "{a}");
            } else if a.is_one() {
                out.push_str(&m.render(names));
            } else {
                let _ = write!(out, "{a}*{}", m.render(names));
            }
        }
        out
    }

    /// `[{"coeff": "...", "halves": [...]}, ...]` in descending order.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .rev()
                .map(|(m, c)| json!({"coeff": c.to_string(), "halves": m.halves()}))
                .collect(),
        )
    }
}

/// A formal quotient `num / den`.
#[derive(Debug, Clone)]
pub struct RingFraction {
    pub num: GroupRingElement,
    pub den: GroupRingElement,
}

impl RingFraction {
    pub fn new(num: GroupRingElement, den: GroupRingElement) -> Result<Self> {
        if num.rank() != den.rank() {
            return Err(Error::LatticeMismatch(num.rank(), den.rank()));
        }
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RingFraction { num, den })
    }

    pub fn from_element(num: GroupRingElement) -> Self {
        let rank = num.rank();
        RingFraction {
            num,
            den: GroupRingElement::one(rank),
        }
    }

    pub fn zero(rank: usize) -> Self {
        Self::from_element(GroupRingElement::zero(rank))
    }

    pub fn one(rank: usize) -> Self {
        Self::from_element(GroupRingElement::one(rank))
    }

    pub fn rank(&self) -> usize {
        self.num.rank()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn fraction_eq(&self, other: &Self) -> Result<bool> {
        let a = self.num.checked_mul(&other.den)?;
        let b = other.num.checked_mul(&self.den)?;
        Ok(a == b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        RingFraction {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return RingFraction {
                num: self.num.add(&other.num),
                den: self.den.clone(),
            };
        }
        RingFraction {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    pub fn neg(&self) -> Self {
        RingFraction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        RingFraction::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn scale_monomial(&self, m: &HalfMonomial) -> Self {
        RingFraction {
            num: self.num.shift(m),
            den: self.den.clone(),
        }
    }

    pub fn map(&self, images: &[HalfMonomial], target_rank: usize) -> Result<Self> {
        RingFraction::new(self.num.map(images, target_rank), self.den.map(images, target_rank))
    }

    /// Removes shared monomial and integer content, normalizes the sign of
    /// the denominator's least term, and clears the denominator (or the
    /// numerator) when one divides the other.
    pub fn canonicalize(&self) -> Self {
        let rank = self.rank();
        if self.num.is_zero() {
            return Self::zero(rank);
        }
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        let shift = HalfMonomial::from_halves(den.min_halves().unwrap()).inv();
        num = num.shift(&shift);
        den = den.shift(&shift);
        let g = num.content().gcd(&den.content());
        if !g.is_one() {
            num = GroupRingElement::from_terms(rank, num.terms.iter().map(|(m, c)| (m.clone(), c / &g)));
            den = GroupRingElement::from_terms(rank, den.terms.iter().map(|(m, c)| (m.clone(), c / &g)));
        }
        if let Ok(q) = num.exact_div(&den) {
            num = q;
            den = GroupRingElement::one(rank);
        } else if let Ok(q) = den.exact_div(&num) {
            // 1/q with q = den/num; normalize q the same way
            let shift = HalfMonomial::from_halves(q.min_halves().unwrap()).inv();
            num = GroupRingElement::monomial(shift.clone(), 1);
            den = q.shift(&shift);
        }
        if den.terms.iter().next().is_some_and(|(_, c)| c.is_negative()) {
            num = num.neg();
            den = den.neg();
        }
        RingFraction { num, den }
    }

    /// Canonical form with the denominator's exponents centered on zero and
    /// its leading coefficient positive. Same value, easier to read:
    /// `1/(t^(1/2) - t^(-1/2))` rather than `-t^(1/2)/(-t + 1)`.
    pub fn balanced(&self) -> Self {
        let c = self.canonicalize();
        let (Some(lo), Some(hi)) = (c.den.min_halves(), c.den.max_halves()) else {
            return c;
        };
        let mid: Vec<i64> = lo.iter().zip(&hi).map(|(a, b)| -(a + b).div_euclid(2)).collect();
        let m = HalfMonomial::from_halves(mid);
        let (mut num, mut den) = (c.num.shift(&m), c.den.shift(&m));
        if den.leading().is_some_and(|(_, k)| k.is_negative()) {
            num = num.neg();
            den = den.neg();
        }
        RingFraction { num, den }
    }

    /// The polynomial value when the denominator is a unit monomial.
    pub fn as_polynomial(&self) -> Option<GroupRingElement> {
        let c = self.canonicalize();
        let (m, k) = c.den.as_monomial()?;
        if k.is_one() {
            Some(c.num.shift(&m.inv()))
        } else if (-k).is_one() {
            Some(c.num.shift(&m.inv()).neg())
        } else {
            None
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.den.is_one() {
            return self.num.render(names);
        }
        let wrap = |p: &GroupRingElement| {
            if p.len() > 1 {
                format!("({})", p.render(names))
            } else {
                p.render(names)
            }
        };
        format!("{}/{}", wrap(&self.num), wrap(&self.den))
    }

    pub fn to_json(&self) -> Value {
        json!({"num": self.num.to_json(), "den": self.den.to_json()})
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(h: i64) -> HalfMonomial {
        HalfMonomial::from_halves(vec![h])
    }

    fn names() -> Vec<String> {
        vec!["t".to_string()]
    }

    #[test]
    fn difference_of_squares() {
        let a = GroupRingElement::binomial(t(1), t(-1));
        let b = GroupRingElement::from_terms(1, [(t(1), 1.into()), (t(-1), 1.into())]);
        assert_eq!(a.mul(&b), GroupRingElement::binomial(t(2), t(-2)));
        assert!(a.add(&a.neg()).is_zero());
    }

    #[test]
    fn exact_division_examples() {
        let p = GroupRingElement::binomial(t(2), t(0));
        let d = GroupRingElement::binomial(t(1), t(-1));
        assert_eq!(p.exact_div(&d).unwrap(), GroupRingElement::monomial(t(1), 1));
        let one = GroupRingElement::one(1);
        let d = GroupRingElement::binomial(t(-2), t(0));
        assert_eq!(one.exact_div(&d), Err(Error::Indivisible));
        assert_eq!(one.exact_div(&GroupRingElement::zero(1)), Err(Error::DivisionByZero));
    }

    #[test]
    fn fraction_examples() {
        // 1/(t^-1 - 1) = t/(1 - t), and differs from -t/(1 - t) * t^-1
        let x = RingFraction::new(GroupRingElement::one(1), GroupRingElement::binomial(t(-2), t(0))).unwrap();
        let y = RingFraction::new(
            GroupRingElement::monomial(t(2), 1),
            GroupRingElement::binomial(t(0), t(2)),
        )
        .unwrap();
        assert!(x.fraction_eq(&y).unwrap());
        let z = RingFraction::new(
            GroupRingElement::monomial(t(2), -1),
            GroupRingElement::binomial(t(0), t(2)),
        )
        .unwrap()
        .scale_monomial(&t(-2));
        assert!(!x.fraction_eq(&z).unwrap());

        let num = GroupRingElement::binomial(t(2), t(0));
        let den = GroupRingElement::binomial(t(1), t(-1)).shift(&t(1));
        let c = RingFraction::new(num, den).unwrap().canonicalize();
        assert!(c.num.is_one() && c.den.is_one());
    }

    #[test]
    fn rendering() {
        let n = vec!["t".to_string(), "s".to_string()];
        let p = GroupRingElement::from_terms(
            2,
            [
                (HalfMonomial::from_halves(vec![3, -2]), BigInt::from(-2)),
                (HalfMonomial::identity(2), BigInt::one()),
            ],
        );
        assert_eq!(p.render(&n), "-2*t^(3/2)*s^(-1) + 1");
        let f = RingFraction::new(GroupRingElement::one(1), GroupRingElement::binomial(t(1), t(-1))).unwrap();
        assert_eq!(f.render(&names()), "1/(t^(1/2) - t^(-1/2))");
    }

    #[test]
    fn unit_denominator_is_cleared() {
        let f = RingFraction::new(
            GroupRingElement::binomial(t(2), t(0)),
            GroupRingElement::monomial(t(4), -1),
        )
        .unwrap();
        let p = f.as_polynomial().unwrap();
        assert_eq!(p, GroupRingElement::binomial(t(-4), t(-2)));
    }
}
