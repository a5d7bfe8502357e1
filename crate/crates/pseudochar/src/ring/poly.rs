//! Sparse multivariate polynomials in graded-lexicographic order.
//!
//! Coefficients are [`Value`]s of the base ring; the surrounding
//! [`Ring::Polynomials`](super::Ring) descriptor fixes the variable list.
//! Terms are stored leading-first (descending grlex) with no zero
//! coefficients, so structural equality is ring equality.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::Value;
use crate::error::Result;

/// Exponent vector; length equals the number of ring variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(index: usize, nvars: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        // grlex: total degree first, then lexicographic on exponents
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    /// Descending grlex, no zero coefficients.
    pub terms: Vec<(Monomial, Value)>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly { terms: Vec::new() }
    }

    pub fn constant(nvars: usize, coeff: Value) -> Self {
        if coeff.is_zero() {
            return Self::zero();
        }
        MultiPoly {
            terms: vec![(Monomial::one(nvars), coeff)],
        }
    }

    pub fn from_map(map: BTreeMap<Monomial, Value>) -> Self {
        let mut terms: Vec<(Monomial, Value)> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.reverse();
        MultiPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    /// Coefficient of the given monomial, or None when absent.
    pub fn coefficient(&self, mono: &Monomial) -> Option<&Value> {
        self.terms
            .binary_search_by(|(m, _)| mono.cmp(m))
            .ok()
            .map(|i| &self.terms[i].1)
    }

    pub fn constant_coeff(&self) -> Option<&Value> {
        match self.terms.last() {
            Some((m, c)) if m.is_one() => Some(c),
            _ => None,
        }
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ma, ca) = &self.terms[i];
            let (mb, cb) = &other.terms[j];
            match mb.cmp(ma) {
                Ordering::Less => {
                    out.push((ma.clone(), ca.clone()));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((mb.clone(), cb.clone()));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = ca.add(cb)?;
                    if !c.is_zero() {
                        out.push((ma.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.terms[i..].iter().cloned());
        out.extend(other.terms[j..].iter().cloned());
        Ok(MultiPoly { terms: out })
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        let mut acc: BTreeMap<Monomial, Value> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca.mul(cb)?;
                match acc.remove(&m) {
                    Some(prev) => {
                        let s = prev.add(&c)?;
                        if !s.is_zero() {
                            acc.insert(m, s);
                        }
                    }
                    None => {
                        if !c.is_zero() {
                            acc.insert(m, c);
                        }
                    }
                }
            }
        }
        Ok(MultiPoly::from_map(acc))
    }

    pub fn scale(&self, coeff: &Value) -> Result<MultiPoly> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let s = c.mul(coeff)?;
            if !s.is_zero() {
                terms.push((m.clone(), s));
            }
        }
        Ok(MultiPoly { terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_order() {
        let x2y = Monomial(vec![2, 1, 0]);
        let xy2 = Monomial(vec![1, 2, 0]);
        let z3 = Monomial(vec![0, 0, 3]);
        let x = Monomial(vec![1, 0, 0]);
        assert!(x2y > xy2); // same degree, lex breaks the tie
        assert!(xy2 > z3);
        assert!(z3 > x); // higher total degree wins
    }
}
