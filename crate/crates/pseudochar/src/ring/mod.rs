//! Exact arithmetic for a constructible tower of commutative rings.
//!
//! Supported rings: the integers, the rationals, Z/n, prime fields F_p,
//! extension fields F_p[x]/(m) with m irreducible of degree at most 8, and
//! sparse multivariate polynomial rings over any of those (nesting depth at
//! most 2). Every value is kept in canonical form, so `==` is ring equality.
//! There is no floating point anywhere.

pub mod arith;
pub mod poly;
pub mod solve;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use poly::{Monomial, MultiPoly};

/// Largest supported modulus for Z/n; keeps nilpotency testing (via
/// factorization) and JSON round-trips exact.
pub const MAX_MODULUS: u64 = 1_000_000_000_000;

/// Largest supported extension-field degree.
pub const MAX_EXT_DEGREE: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtFieldDesc {
    pub p: u64,
    /// Monic irreducible modulus, little-endian coefficients, length degree+1.
    pub modulus: Vec<u64>,
}

impl ExtFieldDesc {
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyRingDesc {
    pub base: Ring,
    pub vars: Vec<String>,
}

/// Descriptor of a ring in the tower. Cheap to clone and compare.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    Integers,
    Rationals,
    IntegersMod(u64),
    PrimeField(u64),
    ExtensionField(Arc<ExtFieldDesc>),
    Polynomials(Arc<PolyRingDesc>),
}

impl Ring {
    pub fn integers() -> Ring {
        Ring::Integers
    }

    pub fn rationals() -> Ring {
        Ring::Rationals
    }

    pub fn integers_mod(n: u64) -> Result<Ring> {
        if n < 2 {
            return Err(Error::InvalidRing(format!("Z/{n} requires n >= 2")));
        }
        if n > MAX_MODULUS {
            return Err(Error::InvalidRing(format!("modulus {n} exceeds {MAX_MODULUS}")));
        }
        Ok(Ring::IntegersMod(n))
    }

    pub fn prime_field(p: u64) -> Result<Ring> {
        if !arith::is_prime(p) {
            return Err(Error::InvalidRing(format!("F{p} requires a prime, {p} is not")));
        }
        Ok(Ring::PrimeField(p))
    }

    /// F_p[x]/(modulus). The modulus must be monic and irreducible; checked
    /// by brute-force root/factor search.
    pub fn extension_field(p: u64, modulus: Vec<u64>) -> Result<Ring> {
        if !arith::is_prime(p) {
            return Err(Error::InvalidRing(format!("extension base {p} is not prime")));
        }
        let modulus: Vec<u64> = modulus.iter().map(|c| c % p).collect();
        let deg = modulus.len().saturating_sub(1);
        if !(2..=MAX_EXT_DEGREE).contains(&deg) {
            return Err(Error::InvalidRing(format!(
                "extension degree {deg} outside 2..={MAX_EXT_DEGREE}"
            )));
        }
        if modulus[deg] != 1 {
            return Err(Error::InvalidRing("extension modulus must be monic".into()));
        }
        if !fp_poly_irreducible(p, &modulus) {
            return Err(Error::InvalidRing(format!(
                "modulus {} is reducible over F{p}",
                fp_poly_to_string(&modulus)
            )));
        }
        Ok(Ring::ExtensionField(Arc::new(ExtFieldDesc { p, modulus })))
    }

    /// The field F_q for q = p^k, with the lexicographically smallest monic
    /// irreducible modulus (a deterministic choice).
    pub fn finite_field(q: u64) -> Result<Ring> {
        let factors = arith::factorize(q);
        match factors.as_slice() {
            [(p, 1)] => Ring::prime_field(*p),
            [(p, k)] => Ring::extension_field(*p, canonical_modulus(*p, *k as usize)?),
            _ => Err(Error::InvalidRing(format!("{q} is not a prime power"))),
        }
    }

    pub fn polynomials(base: Ring, vars: Vec<String>) -> Result<Ring> {
        if vars.is_empty() {
            return Err(Error::InvalidRing("polynomial ring needs at least one variable".into()));
        }
        if base.poly_depth() >= 2 {
            return Err(Error::InvalidRing(
                "polynomial nesting depth is limited to 2".into(),
            ));
        }
        let mut seen = base.tower_vars();
        for v in &vars {
            if v.is_empty() {
                return Err(Error::InvalidRing("empty variable name".into()));
            }
            if seen.contains(v) {
                return Err(Error::InvalidRing(format!("variable {v} already in the tower")));
            }
            seen.push(v.clone());
        }
        Ok(Ring::Polynomials(Arc::new(PolyRingDesc { base, vars })))
    }

    fn poly_depth(&self) -> usize {
        match self {
            Ring::Polynomials(desc) => 1 + desc.base.poly_depth(),
            _ => 0,
        }
    }

    /// All variable names in the tower, innermost ring first.
    pub fn tower_vars(&self) -> Vec<String> {
        match self {
            Ring::Polynomials(desc) => {
                let mut vs = desc.base.tower_vars();
                vs.extend(desc.vars.iter().cloned());
                vs
            }
            _ => Vec::new(),
        }
    }

    /// Adjoin `count` fresh variables, returning the extended ring and the
    /// chosen names.
    pub fn polarize(&self, count: usize, base_name: &str) -> Result<(Ring, Vec<String>)> {
        let taken = self.tower_vars();
        let mut names = Vec::with_capacity(count);
        let mut i = 1;
        while names.len() < count {
            let cand = format!("{base_name}{i}");
            if !taken.contains(&cand) {
                names.push(cand);
            }
            i += 1;
        }
        Ok((Ring::polynomials(self.clone(), names.clone())?, names))
    }

    pub fn zero(&self) -> Value {
        let data = match self {
            Ring::Integers => Data::Int(BigInt::zero()),
            Ring::Rationals => Data::Rat(BigRational::zero()),
            Ring::IntegersMod(_) | Ring::PrimeField(_) => Data::Mod(0),
            Ring::ExtensionField(desc) => Data::Ext(vec![0; desc.degree()]),
            Ring::Polynomials(_) => Data::Poly(MultiPoly::zero()),
        };
        Value { ring: self.clone(), data }
    }

    pub fn one(&self) -> Value {
        self.from_int(&BigInt::one())
    }

    /// Image of an integer under the canonical map Z -> R.
    pub fn from_int(&self, n: &BigInt) -> Value {
        let data = match self {
            Ring::Integers => Data::Int(n.clone()),
            Ring::Rationals => Data::Rat(BigRational::from_integer(n.clone())),
            Ring::IntegersMod(m) | Ring::PrimeField(m) => Data::Mod(bigint_mod_u64(n, *m)),
            Ring::ExtensionField(desc) => {
                let mut coeffs = vec![0; desc.degree()];
                coeffs[0] = bigint_mod_u64(n, desc.p);
                Data::Ext(coeffs)
            }
            Ring::Polynomials(desc) => {
                let c = desc.base.from_int(n);
                Data::Poly(MultiPoly::constant(desc.vars.len(), c))
            }
        };
        Value { ring: self.clone(), data }
    }

    pub fn from_i64(&self, n: i64) -> Value {
        self.from_int(&BigInt::from(n))
    }

    /// The variable with the given name, when this is a polynomial ring.
    pub fn var(&self, name: &str) -> Result<Value> {
        match self {
            Ring::Polynomials(desc) => {
                if let Some(i) = desc.vars.iter().position(|v| v == name) {
                    let mono = Monomial::var(i, desc.vars.len());
                    Ok(Value {
                        ring: self.clone(),
                        data: Data::Poly(MultiPoly {
                            terms: vec![(mono, desc.base.one())],
                        }),
                    })
                } else {
                    // variables of the base ring embed as constants
                    let inner = desc.base.var(name)?;
                    inner.embed(self)
                }
            }
            _ => Err(Error::InvalidRing(format!("{self} has no variable {name}"))),
        }
    }

    /// True when values of `self` embed canonically into `target`: identical
    /// ring, or constants of the base ring of a polynomial tower.
    pub fn extends_to(&self, target: &Ring) -> bool {
        if self == target {
            return true;
        }
        match target {
            Ring::Polynomials(desc) => self.extends_to(&desc.base),
            _ => false,
        }
    }

    pub fn is_field(&self) -> bool {
        matches!(
            self,
            Ring::Rationals | Ring::PrimeField(_) | Ring::ExtensionField(_)
        )
    }

    /// Number of elements for finite rings.
    pub fn size(&self) -> Option<u64> {
        match self {
            Ring::IntegersMod(n) | Ring::PrimeField(n) => Some(*n),
            Ring::ExtensionField(desc) => {
                let mut q: u64 = 1;
                for _ in 0..desc.degree() {
                    q = q.checked_mul(desc.p)?;
                }
                Some(q)
            }
            _ => None,
        }
    }

    /// All elements of a finite ring, in a deterministic order.
    pub fn elements(&self) -> Option<Vec<Value>> {
        match self {
            Ring::IntegersMod(n) | Ring::PrimeField(n) => Some(
                (0..*n)
                    .map(|a| Value {
                        ring: self.clone(),
                        data: Data::Mod(a),
                    })
                    .collect(),
            ),
            Ring::ExtensionField(desc) => {
                let d = desc.degree();
                let p = desc.p;
                let q = self.size()?;
                let mut out = Vec::with_capacity(q as usize);
                for mut idx in 0..q {
                    let mut coeffs = vec![0u64; d];
                    for c in coeffs.iter_mut() {
                        *c = idx % p;
                        idx /= p;
                    }
                    out.push(Value {
                        ring: self.clone(),
                        data: Data::Ext(coeffs),
                    });
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Units usable as character values: all units for finite rings, the
    /// constants +-1 otherwise.
    pub fn unit_constants(&self) -> Vec<Value> {
        match self {
            Ring::IntegersMod(_) | Ring::PrimeField(_) | Ring::ExtensionField(_) => self
                .elements()
                .unwrap()
                .into_iter()
                .filter(|v| v.is_unit())
                .collect(),
            Ring::Integers | Ring::Rationals => vec![self.one(), self.from_i64(-1)],
            Ring::Polynomials(desc) => desc
                .base
                .unit_constants()
                .into_iter()
                .map(|v| v.embed(self).unwrap())
                .collect(),
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Integers => write!(f, "Z"),
            Ring::Rationals => write!(f, "Q"),
            Ring::IntegersMod(n) => write!(f, "Z/{n}"),
            Ring::PrimeField(p) => write!(f, "F{p}"),
            Ring::ExtensionField(desc) => {
                write!(f, "F{}", self.size().unwrap_or(0))?;
                write!(f, "=F{}[w]/({})", desc.p, fp_poly_to_string(&desc.modulus))
            }
            Ring::Polynomials(desc) => write!(f, "{}[{}]", desc.base, desc.vars.join(",")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Data {
    Int(BigInt),
    Rat(BigRational),
    Mod(u64),
    Ext(Vec<u64>),
    Poly(MultiPoly),
}

/// An element of one of the supported rings, always in canonical form.
/// Immutable after construction; all operations are pure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Value {
    ring: Ring,
    data: Data,
}

impl Value {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub(crate) fn from_parts(ring: Ring, data: Data) -> Value {
        Value { ring, data }
    }

    pub fn is_zero(&self) -> bool {
        match &self.data {
            Data::Int(n) => n.is_zero(),
            Data::Rat(r) => r.is_zero(),
            Data::Mod(a) => *a == 0,
            Data::Ext(cs) => cs.iter().all(|&c| c == 0),
            Data::Poly(p) => p.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        *self == self.ring.one()
    }

    fn check_ring(&self, other: &Value) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(
                self.ring.to_string(),
                other.ring.to_string(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Value) -> Result<Value> {
        self.check_ring(other)?;
        let data = match (&self.data, &other.data) {
            (Data::Int(a), Data::Int(b)) => Data::Int(a + b),
            (Data::Rat(a), Data::Rat(b)) => Data::Rat(a + b),
            (Data::Mod(a), Data::Mod(b)) => {
                let n = self.modulus();
                Data::Mod(arith::add_mod(*a, *b, n))
            }
            (Data::Ext(a), Data::Ext(b)) => {
                let p = self.ext_desc().p;
                Data::Ext(
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| arith::add_mod(*x, *y, p))
                        .collect(),
                )
            }
            (Data::Poly(a), Data::Poly(b)) => Data::Poly(a.add(b)?),
            _ => unreachable!("payload kind fixed by ring"),
        };
        Ok(Value { ring: self.ring.clone(), data })
    }

    pub fn sub(&self, other: &Value) -> Result<Value> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Value {
        let data = match &self.data {
            Data::Int(a) => Data::Int(-a),
            Data::Rat(a) => Data::Rat(-a),
            Data::Mod(a) => {
                let n = self.modulus();
                Data::Mod(if *a == 0 { 0 } else { n - a })
            }
            Data::Ext(a) => {
                let p = self.ext_desc().p;
                Data::Ext(a.iter().map(|&x| if x == 0 { 0 } else { p - x }).collect())
            }
            Data::Poly(a) => Data::Poly(a.neg()),
        };
        Value { ring: self.ring.clone(), data }
    }

    pub fn mul(&self, other: &Value) -> Result<Value> {
        self.check_ring(other)?;
        let data = match (&self.data, &other.data) {
            (Data::Int(a), Data::Int(b)) => Data::Int(a * b),
            (Data::Rat(a), Data::Rat(b)) => Data::Rat(a * b),
            (Data::Mod(a), Data::Mod(b)) => Data::Mod(arith::mul_mod(*a, *b, self.modulus())),
            (Data::Ext(a), Data::Ext(b)) => {
                let desc = self.ext_desc();
                Data::Ext(ext_mul(desc, a, b))
            }
            (Data::Poly(a), Data::Poly(b)) => Data::Poly(a.mul(b)?),
            _ => unreachable!("payload kind fixed by ring"),
        };
        Ok(Value { ring: self.ring.clone(), data })
    }

    pub fn pow(&self, mut exp: u64) -> Value {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base).expect("same ring");
            }
            base = base.mul(&base).expect("same ring");
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, when this value is a unit.
    ///
    /// For polynomial rings the criterion is: constant term a unit and all
    /// other coefficients nilpotent; the inverse is computed by a
    /// terminating geometric series.
    pub fn inverse(&self) -> Option<Value> {
        match &self.data {
            Data::Int(a) => {
                if a.abs().is_one() {
                    Some(self.clone())
                } else {
                    None
                }
            }
            Data::Rat(a) => {
                if a.is_zero() {
                    None
                } else {
                    Some(Value {
                        ring: self.ring.clone(),
                        data: Data::Rat(a.recip()),
                    })
                }
            }
            Data::Mod(a) => arith::inv_mod(*a, self.modulus()).map(|inv| Value {
                ring: self.ring.clone(),
                data: Data::Mod(inv),
            }),
            Data::Ext(a) => {
                let desc = self.ext_desc();
                ext_inverse(desc, a).map(|inv| Value {
                    ring: self.ring.clone(),
                    data: Data::Ext(inv),
                })
            }
            Data::Poly(p) => {
                let desc = self.poly_desc();
                let c = p.constant_coeff().cloned().unwrap_or_else(|| desc.base.zero());
                let ci = c.inverse()?;
                for (m, coeff) in &p.terms {
                    if !m.is_one() && !coeff.is_nilpotent() {
                        return None;
                    }
                }
                // self = c (1 + m) with m nilpotent; invert the unit factor
                // by the finite geometric series.
                let c_embedded = Value {
                    ring: self.ring.clone(),
                    data: Data::Poly(MultiPoly::constant(desc.vars.len(), c)),
                };
                let ci_embedded = Value {
                    ring: self.ring.clone(),
                    data: Data::Poly(MultiPoly::constant(desc.vars.len(), ci)),
                };
                let n = self.sub(&c_embedded).ok()?;
                let m = ci_embedded.mul(&n).ok()?;
                let mut sum = self.ring.one();
                let mut power = self.ring.one();
                let mut sign = false;
                for _ in 0..256 {
                    power = power.mul(&m).ok()?;
                    if power.is_zero() {
                        let inv = ci_embedded.mul(&sum).ok()?;
                        debug_assert!(self.mul(&inv).map(|v| v.is_one()).unwrap_or(false));
                        return Some(inv);
                    }
                    sign = !sign;
                    let term = if sign { power.neg() } else { power.clone() };
                    sum = sum.add(&term).ok()?;
                }
                None
            }
        }
    }

    pub fn is_unit(&self) -> bool {
        self.inverse().is_some()
    }

    pub fn is_nilpotent(&self) -> bool {
        match &self.data {
            Data::Int(a) => a.is_zero(),
            Data::Rat(a) => a.is_zero(),
            Data::Mod(a) => {
                if *a == 0 {
                    return true;
                }
                let rad = arith::radical(self.modulus());
                a % rad == 0
            }
            Data::Ext(_) => self.is_zero(),
            Data::Poly(p) => p.terms.iter().all(|(_, c)| c.is_nilpotent()),
        }
    }

    /// Canonical image of this value in an extension ring (the same ring, or
    /// a polynomial tower over it).
    pub fn embed(&self, target: &Ring) -> Result<Value> {
        if self.ring == *target {
            return Ok(self.clone());
        }
        match target {
            Ring::Polynomials(desc) => {
                let inner = self.embed(&desc.base)?;
                Ok(Value {
                    ring: target.clone(),
                    data: Data::Poly(MultiPoly::constant(desc.vars.len(), inner)),
                })
            }
            _ => Err(Error::RingMismatch(
                self.ring.to_string(),
                target.to_string(),
            )),
        }
    }

    /// For values of a polynomial ring: the coefficient of `var^exp` where
    /// `var` is one of the outer variables, as a value of the same ring with
    /// that variable's exponent stripped. Used to read off characteristic
    /// coefficients after adjoining a fresh variable.
    pub fn coefficient_of(&self, var: &str, exp: u32) -> Result<Value> {
        let desc = match &self.ring {
            Ring::Polynomials(desc) => desc,
            _ => {
                return if exp == 0 {
                    Ok(self.clone())
                } else {
                    Ok(self.ring.zero())
                };
            }
        };
        let vi = desc
            .vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| Error::InvalidRing(format!("no variable {var} in {}", self.ring)))?;
        let p = match &self.data {
            Data::Poly(p) => p,
            _ => unreachable!(),
        };
        let mut terms = Vec::new();
        for (m, c) in &p.terms {
            if m.0[vi] == exp {
                let mut e = m.0.clone();
                e[vi] = 0;
                terms.push((Monomial(e), c.clone()));
            }
        }
        terms.sort_by(|(a, _), (b, _)| b.cmp(a));
        Ok(Value {
            ring: self.ring.clone(),
            data: Data::Poly(MultiPoly { terms }),
        })
    }

    /// Degree in the named variable (0 for constants and non-polynomials).
    pub fn degree_in(&self, var: &str) -> u32 {
        if let (Ring::Polynomials(desc), Data::Poly(p)) = (&self.ring, &self.data) {
            if let Some(vi) = desc.vars.iter().position(|v| v == var) {
                return p.terms.iter().map(|(m, _)| m.0[vi]).max().unwrap_or(0);
            }
        }
        0
    }

    /// Substitute ring values for the outer variables of a polynomial ring;
    /// the result lands in `target`, which the base ring must extend to.
    pub fn substitute(&self, assignment: &[Value], target: &Ring) -> Result<Value> {
        let (desc, p) = match (&self.ring, &self.data) {
            (Ring::Polynomials(desc), Data::Poly(p)) => (desc, p),
            _ => return self.embed(target),
        };
        if assignment.len() != desc.vars.len() {
            return Err(Error::ArityMismatch {
                expected: desc.vars.len(),
                got: assignment.len(),
            });
        }
        let mut acc = target.zero();
        for (m, c) in &p.terms {
            let mut term = c.embed(target)?;
            for (vi, e) in m.0.iter().enumerate() {
                if *e > 0 {
                    term = term.mul(&assignment[vi].pow(*e as u64))?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    pub(crate) fn as_poly(&self) -> Option<&MultiPoly> {
        match &self.data {
            Data::Poly(p) => Some(p),
            _ => None,
        }
    }

    /// The underlying integer, for values of the integer ring.
    pub fn to_bigint(&self) -> Option<&BigInt> {
        match &self.data {
            Data::Int(n) => Some(n),
            _ => None,
        }
    }

    /// Residue payload of Z/n and F_p values.
    pub fn as_residue(&self) -> Option<u64> {
        match &self.data {
            Data::Mod(a) => Some(*a),
            _ => None,
        }
    }

    /// Coefficient payload of extension-field values (little-endian).
    pub fn as_ext_coeffs(&self) -> Option<&[u64]> {
        match &self.data {
            Data::Ext(cs) => Some(cs),
            _ => None,
        }
    }

    fn modulus(&self) -> u64 {
        match &self.ring {
            Ring::IntegersMod(n) | Ring::PrimeField(n) => *n,
            _ => unreachable!(),
        }
    }

    fn ext_desc(&self) -> &ExtFieldDesc {
        match &self.ring {
            Ring::ExtensionField(desc) => desc,
            _ => unreachable!(),
        }
    }

    fn poly_desc(&self) -> &PolyRingDesc {
        match &self.ring {
            Ring::Polynomials(desc) => desc,
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.data {
            Data::Int(a) => write!(f, "{a}"),
            Data::Rat(a) => write!(f, "{a}"),
            Data::Mod(a) => write!(f, "{a}"),
            Data::Ext(cs) => {
                let s = fp_poly_to_string(cs);
                write!(f, "{}", if s.is_empty() { "0".into() } else { s })
            }
            Data::Poly(p) => {
                if p.terms.is_empty() {
                    return write!(f, "0");
                }
                let vars = self.poly_desc().vars.clone();
                let mut first = true;
                for (m, c) in &p.terms {
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    let mono: Vec<String> = m
                        .0
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(i, &e)| {
                            if e == 1 {
                                vars[i].clone()
                            } else {
                                format!("{}^{e}", vars[i])
                            }
                        })
                        .collect();
                    if mono.is_empty() {
                        write!(f, "({c})")?;
                    } else if c.is_one() {
                        write!(f, "{}", mono.join("*"))?;
                    } else {
                        write!(f, "({c})*{}", mono.join("*"))?;
                    }
                }
                Ok(())
            }
        }
    }
}

fn bigint_mod_u64(n: &BigInt, m: u64) -> u64 {
    use num_traits::ToPrimitive;
    let r = n % BigInt::from(m);
    let r = if r.is_negative() { r + BigInt::from(m) } else { r };
    r.to_u64().expect("reduced residue fits u64")
}

// --- F_p[x] helpers on little-endian coefficient vectors ---

fn fp_poly_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn fp_poly_mul(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = arith::add_mod(out[i + j], arith::mul_mod(x, y, p), p);
        }
    }
    fp_poly_trim(&mut out);
    out
}

/// Remainder of a by the monic polynomial m, in place arithmetic mod p.
fn fp_poly_rem(p: u64, a: &[u64], m: &[u64]) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    fp_poly_trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &mc) in m.iter().enumerate() {
                let idx = i + shift;
                r[idx] = arith::sub_mod(r[idx], arith::mul_mod(lead, mc, p), p);
            }
        }
        fp_poly_trim(&mut r);
        if r.len() <= dm {
            break;
        }
    }
    r
}

fn ext_mul(desc: &ExtFieldDesc, a: &[u64], b: &[u64]) -> Vec<u64> {
    let prod = fp_poly_mul(desc.p, a, b);
    let mut r = fp_poly_rem(desc.p, &prod, &desc.modulus);
    r.resize(desc.degree(), 0);
    r
}

fn ext_inverse(desc: &ExtFieldDesc, a: &[u64]) -> Option<Vec<u64>> {
    let p = desc.p;
    let mut r0: Vec<u64> = desc.modulus.clone();
    let mut r1: Vec<u64> = a.to_vec();
    fp_poly_trim(&mut r1);
    if r1.is_empty() {
        return None;
    }
    let mut s0: Vec<u64> = vec![];
    let mut s1: Vec<u64> = vec![1];
    while !r1.is_empty() {
        // divide r0 by r1
        let mut q: Vec<u64> = vec![0; r0.len().saturating_sub(r1.len()) + 1];
        let lead_inv = arith::inv_mod(*r1.last().unwrap(), p)?;
        let mut rem = r0.clone();
        while rem.len() >= r1.len() && !rem.is_empty() {
            let shift = rem.len() - r1.len();
            let c = arith::mul_mod(*rem.last().unwrap(), lead_inv, p);
            q[shift] = arith::add_mod(q[shift], c, p);
            for (i, &rc) in r1.iter().enumerate() {
                rem[i + shift] = arith::sub_mod(rem[i + shift], arith::mul_mod(c, rc, p), p);
            }
            fp_poly_trim(&mut rem);
        }
        let qs1 = fp_poly_mul(p, &q, &s1);
        let mut s2 = s0.clone();
        s2.resize(s2.len().max(qs1.len()), 0);
        for (i, &c) in qs1.iter().enumerate() {
            s2[i] = arith::sub_mod(s2[i], c, p);
        }
        fp_poly_trim(&mut s2);
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = s2;
    }
    // r0 = gcd; must be a nonzero constant
    if r0.len() != 1 {
        return None;
    }
    let ginv = arith::inv_mod(r0[0], p)?;
    let mut out: Vec<u64> = s0.iter().map(|&c| arith::mul_mod(c, ginv, p)).collect();
    out = fp_poly_rem(p, &out, &desc.modulus);
    out.resize(desc.degree(), 0);
    Some(out)
}

/// Brute-force irreducibility over F_p: no monic divisor of degree
/// 1..=deg/2 divides the modulus.
fn fp_poly_irreducible(p: u64, modulus: &[u64]) -> bool {
    let deg = modulus.len() - 1;
    for dd in 1..=deg / 2 {
        // enumerate monic polynomials of degree dd
        let mut count: u64 = 1;
        for _ in 0..dd {
            count = count.saturating_mul(p);
        }
        for idx in 0..count {
            let mut cand = vec![0u64; dd + 1];
            let mut v = idx;
            for c in cand.iter_mut().take(dd) {
                *c = v % p;
                v /= p;
            }
            cand[dd] = 1;
            if fp_poly_rem(p, modulus, &cand).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible of the given degree.
fn canonical_modulus(p: u64, degree: usize) -> Result<Vec<u64>> {
    if !(2..=MAX_EXT_DEGREE).contains(&degree) {
        return Err(Error::InvalidRing(format!(
            "extension degree {degree} outside 2..={MAX_EXT_DEGREE}"
        )));
    }
    let mut count: u64 = 1;
    for _ in 0..degree {
        count = count.saturating_mul(p);
    }
    for idx in 0..count {
        let mut cand = vec![0u64; degree + 1];
        let mut v = idx;
        for c in cand.iter_mut().take(degree) {
            *c = v % p;
            v /= p;
        }
        cand[degree] = 1;
        if fp_poly_irreducible(p, &cand) {
            return Ok(cand);
        }
    }
    Err(Error::InvalidRing(format!(
        "no irreducible of degree {degree} over F{p}"
    )))
}

fn fp_poly_to_string(coeffs: &[u64]) -> String {
    let mut parts = Vec::new();
    for (i, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let part = match i {
            0 => format!("{c}"),
            1 => {
                if c == 1 {
                    "w".into()
                } else {
                    format!("{c}w")
                }
            }
            _ => {
                if c == 1 {
                    format!("w^{i}")
                } else {
                    format!("{c}w^{i}")
                }
            }
        };
        parts.push(part);
    }
    parts.join("+")
}

/// Parse a compact ring name: `Z`, `Q`, `Z/6`, `F5`, `F4`, and polynomial
/// suffixes such as `Z[t]` or `F5[t1,t2]`.
pub fn parse_ring_name(name: &str) -> Result<Ring> {
    let name = name.trim();
    if let Some(open) = name.find('[') {
        if !name.ends_with(']') {
            return Err(Error::InvalidRing(format!("unbalanced brackets in {name}")));
        }
        let base = parse_ring_name(&name[..open])?;
        let vars: Vec<String> = name[open + 1..name.len() - 1]
            .split(',')
            .map(|v| v.trim().to_string())
            .collect();
        return Ring::polynomials(base, vars);
    }
    match name {
        "Z" => Ok(Ring::Integers),
        "Q" => Ok(Ring::Rationals),
        _ => {
            if let Some(n) = name.strip_prefix("Z/") {
                let n: u64 = n
                    .parse()
                    .map_err(|_| Error::InvalidRing(format!("bad modulus in {name}")))?;
                Ring::integers_mod(n)
            } else if let Some(q) = name.strip_prefix('F') {
                let q: u64 = q
                    .parse()
                    .map_err(|_| Error::InvalidRing(format!("bad field size in {name}")))?;
                Ring::finite_field(q)
            } else {
                Err(Error::InvalidRing(format!(
                    "unknown ring {name}; expected Z, Q, Z/<n>, F<q>, or a polynomial suffix like Z[t]"
                )))
            }
        }
    }
}

// --- JSON (descriptors and values) ---

impl Ring {
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            Ring::Integers => json!({"kind": "integers"}),
            Ring::Rationals => json!({"kind": "rationals"}),
            Ring::IntegersMod(n) => json!({"kind": "integers_mod", "n": n}),
            Ring::PrimeField(p) => json!({"kind": "prime_field", "p": p}),
            Ring::ExtensionField(desc) => {
                json!({"kind": "extension_field", "p": desc.p, "modulus": desc.modulus})
            }
            Ring::Polynomials(desc) => {
                json!({"kind": "polynomial_ring", "base": desc.base.to_json(), "variables": desc.vars})
            }
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Ring> {
        let kind = v
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| Error::Serialization("ring descriptor needs a kind".into()))?;
        match kind {
            "integers" => Ok(Ring::Integers),
            "rationals" => Ok(Ring::Rationals),
            "integers_mod" => {
                let n = v
                    .get("n")
                    .and_then(|n| n.as_u64())
                    .ok_or_else(|| Error::Serialization("integers_mod needs n".into()))?;
                Ring::integers_mod(n)
            }
            "prime_field" => {
                let p = v
                    .get("p")
                    .and_then(|p| p.as_u64())
                    .ok_or_else(|| Error::Serialization("prime_field needs p".into()))?;
                Ring::prime_field(p)
            }
            "extension_field" => {
                let p = v
                    .get("p")
                    .and_then(|p| p.as_u64())
                    .ok_or_else(|| Error::Serialization("extension_field needs p".into()))?;
                let modulus: Vec<u64> = v
                    .get("modulus")
                    .and_then(|m| m.as_array())
                    .ok_or_else(|| Error::Serialization("extension_field needs modulus".into()))?
                    .iter()
                    .map(|c| c.as_u64().ok_or_else(|| Error::Serialization("bad modulus entry".into())))
                    .collect::<Result<_>>()?;
                Ring::extension_field(p, modulus)
            }
            "polynomial_ring" => {
                let base = Ring::from_json(
                    v.get("base")
                        .ok_or_else(|| Error::Serialization("polynomial_ring needs base".into()))?,
                )?;
                let vars: Vec<String> = v
                    .get("variables")
                    .and_then(|vs| vs.as_array())
                    .ok_or_else(|| Error::Serialization("polynomial_ring needs variables".into()))?
                    .iter()
                    .map(|s| {
                        s.as_str()
                            .map(|s| s.to_string())
                            .ok_or_else(|| Error::Serialization("bad variable name".into()))
                    })
                    .collect::<Result<_>>()?;
                Ring::polynomials(base, vars)
            }
            other => Err(Error::Serialization(format!("unknown ring kind {other}"))),
        }
    }
}

impl Value {
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match &self.data {
            Data::Int(a) => json!(a.to_string()),
            Data::Rat(a) => json!(a.to_string()),
            Data::Mod(a) => json!(a),
            Data::Ext(cs) => json!(cs),
            Data::Poly(p) => {
                let terms: Vec<serde_json::Value> = p
                    .terms
                    .iter()
                    .map(|(m, c)| json!([c.to_json(), m.0]))
                    .collect();
                json!(terms)
            }
        }
    }

    pub fn from_json(ring: &Ring, v: &serde_json::Value) -> Result<Value> {
        let bad = || Error::Serialization(format!("bad value for ring {ring}: {v}"));
        match ring {
            Ring::Integers => {
                let n = json_bigint(v).ok_or_else(bad)?;
                Ok(ring.from_int(&n))
            }
            Ring::Rationals => {
                let s = match v {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Number(n) => n.to_string(),
                    _ => return Err(bad()),
                };
                let r: BigRational = s.parse().map_err(|_| bad())?;
                Ok(Value {
                    ring: ring.clone(),
                    data: Data::Rat(r),
                })
            }
            Ring::IntegersMod(n) | Ring::PrimeField(n) => {
                let a = json_bigint(v).ok_or_else(bad)?;
                Ok(Value {
                    ring: ring.clone(),
                    data: Data::Mod(bigint_mod_u64(&a, *n)),
                })
            }
            Ring::ExtensionField(desc) => {
                let arr = v.as_array().ok_or_else(bad)?;
                if arr.len() > desc.degree() {
                    return Err(bad());
                }
                let mut coeffs = vec![0u64; desc.degree()];
                for (i, c) in arr.iter().enumerate() {
                    coeffs[i] = c.as_u64().ok_or_else(bad)? % desc.p;
                }
                Ok(Value {
                    ring: ring.clone(),
                    data: Data::Ext(coeffs),
                })
            }
            Ring::Polynomials(desc) => {
                let arr = v.as_array().ok_or_else(bad)?;
                let nvars = desc.vars.len();
                let mut map = std::collections::BTreeMap::new();
                for t in arr {
                    let pair = t.as_array().ok_or_else(bad)?;
                    if pair.len() != 2 {
                        return Err(bad());
                    }
                    let coeff = Value::from_json(&desc.base, &pair[0])?;
                    let exps: Vec<u32> = pair[1]
                        .as_array()
                        .ok_or_else(bad)?
                        .iter()
                        .map(|e| e.as_u64().map(|e| e as u32).ok_or_else(bad))
                        .collect::<Result<_>>()?;
                    if exps.len() != nvars {
                        return Err(bad());
                    }
                    if coeff.is_zero() {
                        continue;
                    }
                    let prev = map.insert(Monomial(exps), coeff);
                    if prev.is_some() {
                        return Err(Error::Serialization("duplicate monomial".into()));
                    }
                }
                Ok(Value {
                    ring: ring.clone(),
                    data: Data::Poly(MultiPoly::from_map(map)),
                })
            }
        }
    }
}

fn json_bigint(v: &serde_json::Value) -> Option<BigInt> {
    match v {
        serde_json::Value::String(s) => s.parse().ok(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Some(BigInt::from(i))
            } else {
                n.as_u64().map(BigInt::from)
            }
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> Ring {
        Ring::finite_field(4).unwrap()
    }

    #[test]
    fn mod_arithmetic() {
        let z6 = Ring::integers_mod(6).unwrap();
        let four = z6.from_i64(4);
        let five = z6.from_i64(5);
        assert_eq!(four.add(&five).unwrap(), z6.from_i64(3));
    }

    #[test]
    fn f4_multiplication() {
        // w * w^2 = 1 in F_4 = F_2[w]/(w^2+w+1)
        let f = f4();
        let w = Value::from_json(&f, &serde_json::json!([0, 1])).unwrap();
        let w2 = w.mul(&w).unwrap();
        assert_eq!(w.mul(&w2).unwrap(), f.one());
        // w^2 = w + 1
        assert_eq!(w2, w.add(&f.one()).unwrap());
    }

    #[test]
    fn polynomial_difference_of_squares() {
        let r = Ring::polynomials(Ring::Integers, vec!["t1".into(), "t2".into()]).unwrap();
        let t1 = r.var("t1").unwrap();
        let t2 = r.var("t2").unwrap();
        let lhs = t1.add(&t2).unwrap().mul(&t1.sub(&t2).unwrap()).unwrap();
        let rhs = t1.mul(&t1).unwrap().sub(&t2.mul(&t2).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn unit_tests_per_ring() {
        let z6 = Ring::integers_mod(6).unwrap();
        let five = z6.from_i64(5);
        assert_eq!(five.inverse().unwrap(), five);
        assert!(!z6.from_i64(2).is_unit());

        assert!(!Ring::Integers.from_i64(2).is_unit());
        assert!(Ring::Integers.from_i64(-1).is_unit());

        // 1 + 2t is a unit in Z/4[t], equal to its own inverse
        let z4t = Ring::polynomials(Ring::integers_mod(4).unwrap(), vec!["t".into()]).unwrap();
        let u = z4t.one().add(&z4t.var("t").unwrap().mul(&z4t.from_i64(2)).unwrap()).unwrap();
        let inv = u.inverse().unwrap();
        assert_eq!(inv, u);
        assert!(u.mul(&inv).unwrap().is_one());
    }

    #[test]
    fn nilpotency() {
        let z12 = Ring::integers_mod(12).unwrap();
        assert!(z12.from_i64(6).is_nilpotent());
        assert!(!z12.from_i64(4).is_nilpotent());
        let z4t = Ring::polynomials(Ring::integers_mod(4).unwrap(), vec!["t".into()]).unwrap();
        assert!(z4t.var("t").unwrap().mul(&z4t.from_i64(2)).unwrap().is_nilpotent());
    }

    #[test]
    fn units_in_finite_fields_and_zn() {
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            let f = Ring::finite_field(q).unwrap();
            for v in f.elements().unwrap() {
                assert_eq!(v.is_unit(), !v.is_zero(), "in F{q}: {v}");
                if let Some(inv) = v.inverse() {
                    assert!(v.mul(&inv).unwrap().is_one());
                }
            }
        }
        let z = Ring::integers_mod(12).unwrap();
        for v in z.elements().unwrap() {
            let a = match v.to_json().as_u64() {
                Some(a) => a,
                None => continue,
            };
            assert_eq!(v.is_unit(), arith::gcd(a, 12) == 1);
        }
    }

    #[test]
    fn embed_and_substitute() {
        let zt = Ring::polynomials(Ring::Integers, vec!["t".into()]).unwrap();
        let two = Ring::Integers.from_i64(2);
        let two_t = two.embed(&zt).unwrap();
        assert_eq!(two_t, zt.from_i64(2));
        let t = zt.var("t").unwrap();
        let p = t.mul(&t).unwrap().add(&zt.one()).unwrap(); // t^2 + 1
        let v = p.substitute(&[Ring::Integers.from_i64(3)], &Ring::Integers).unwrap();
        assert_eq!(v, Ring::Integers.from_i64(10));
    }

    #[test]
    fn ring_mismatch_reported() {
        let a = Ring::integers_mod(4).unwrap().from_i64(1);
        let b = Ring::integers_mod(6).unwrap().from_i64(1);
        assert!(matches!(a.add(&b), Err(Error::RingMismatch(_, _))));
    }

    #[test]
    fn json_round_trip() {
        let rings = vec![
            Ring::Integers,
            Ring::Rationals,
            Ring::integers_mod(6).unwrap(),
            Ring::prime_field(5).unwrap(),
            f4(),
            Ring::polynomials(Ring::Integers, vec!["t1".into(), "t2".into()]).unwrap(),
        ];
        for r in rings {
            let j = r.to_json();
            assert_eq!(Ring::from_json(&j).unwrap(), r);
        }
        let r = Ring::polynomials(Ring::integers_mod(4).unwrap(), vec!["t".into()]).unwrap();
        let v = r.var("t").unwrap().add(&r.from_i64(3)).unwrap();
        let j = v.to_json();
        assert_eq!(Value::from_json(&r, &j).unwrap(), v);
    }

    #[test]
    fn canonical_f4_modulus() {
        // smallest irreducible quadratic over F2 is w^2+w+1
        match f4() {
            Ring::ExtensionField(desc) => assert_eq!(desc.modulus, vec![1, 1, 1]),
            _ => panic!(),
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!(parse_ring_name("Z").unwrap(), Ring::Integers);
        assert_eq!(parse_ring_name("Z/6").unwrap(), Ring::integers_mod(6).unwrap());
        assert_eq!(parse_ring_name("F5").unwrap(), Ring::prime_field(5).unwrap());
        assert_eq!(parse_ring_name("F4").unwrap(), f4());
        let zt = parse_ring_name("Z[t]").unwrap();
        assert_eq!(zt, Ring::polynomials(Ring::Integers, vec!["t".into()]).unwrap());
        assert!(parse_ring_name("F6").is_err());
        assert!(parse_ring_name("Z/1").is_err());
    }

    #[test]
    fn polarize_freshness() {
        let zt = Ring::polynomials(Ring::Integers, vec!["s1".into()]).unwrap();
        let (ext, names) = zt.polarize(2, "s").unwrap();
        assert_eq!(names, vec!["s2".to_string(), "s3".to_string()]);
        assert!(ext.var("s2").is_ok());
        // depth limit: polarizing twice exceeds nesting 2
        assert!(ext.polarize(1, "s").is_err());
    }
}
