//! Elements of group algebras B[G] and of free algebras B{X}: sparse formal
//! linear combinations with ring coefficients.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Word};
use crate::ring::{Ring, Value};

/// An element of B[G]: finitely supported map from group-element indices to
/// nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAlgebraElement {
    pub ring: Ring,
    pub group: FiniteGroup,
    coeffs: BTreeMap<usize, Value>,
}

impl GroupAlgebraElement {
    pub fn zero(ring: &Ring, group: &FiniteGroup) -> Self {
        GroupAlgebraElement {
            ring: ring.clone(),
            group: group.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(ring: &Ring, group: &FiniteGroup) -> Self {
        Self::basis(ring, group, group.identity())
    }

    /// The basis element 1 * g.
    pub fn basis(ring: &Ring, group: &FiniteGroup, g: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(g, ring.one());
        GroupAlgebraElement {
            ring: ring.clone(),
            group: group.clone(),
            coeffs,
        }
    }

    pub fn from_terms(
        ring: &Ring,
        group: &FiniteGroup,
        terms: impl IntoIterator<Item = (usize, Value)>,
    ) -> Result<Self> {
        let mut out = Self::zero(ring, group);
        for (g, c) in terms {
            out.add_term(g, c)?;
        }
        Ok(out)
    }

    pub fn add_term(&mut self, g: usize, c: Value) -> Result<()> {
        if *c.ring() != self.ring {
            return Err(Error::RingMismatch(self.ring.to_string(), c.ring().to_string()));
        }
        if g >= self.group.order() {
            return Err(Error::InvalidGroup(format!("element index {g} out of range")));
        }
        let newc = match self.coeffs.remove(&g) {
            Some(prev) => prev.add(&c)?,
            None => c,
        };
        if !newc.is_zero() {
            self.coeffs.insert(g, newc);
        }
        Ok(())
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, &Value)> {
        self.coeffs.iter().map(|(&g, c)| (g, c))
    }

    pub fn support_size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficient(&self, g: usize) -> Option<&Value> {
        self.coeffs.get(&g)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let mut out = self.clone();
        for (&g, c) in &other.coeffs {
            out.add_term(g, c.clone())?;
        }
        Ok(out)
    }

    /// Convolution product in B[G].
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let mut out = Self::zero(&self.ring, &self.group);
        for (&g, cg) in &self.coeffs {
            for (&h, ch) in &other.coeffs {
                out.add_term(self.group.mul(g, h), cg.mul(ch)?)?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Value) -> Result<Self> {
        let mut out = Self::zero(&self.ring, &self.group);
        for (&g, cg) in &self.coeffs {
            out.add_term(g, cg.mul(c)?)?;
        }
        Ok(out)
    }

    /// Coefficients embedded into an extension ring.
    pub fn embed(&self, target: &Ring) -> Result<Self> {
        let mut out = Self::zero(target, &self.group);
        for (&g, c) in &self.coeffs {
            out.add_term(g, c.embed(target)?)?;
        }
        Ok(out)
    }

    /// Pushforward along a group homomorphism u: coefficients of g collect
    /// on u(g).
    pub fn pushforward(&self, hom: &crate::group::GroupHom) -> Result<GroupAlgebraElement> {
        if hom.source != self.group {
            return Err(Error::InvalidGroup("pushforward along a different group".into()));
        }
        let mut out = GroupAlgebraElement::zero(&self.ring, &hom.target);
        for (&g, c) in &self.coeffs {
            out.add_term(hom.apply(g), c.clone())?;
        }
        Ok(out)
    }

    fn check_compat(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.to_string(), other.ring.to_string()));
        }
        if self.group != other.group {
            return Err(Error::InvalidGroup("group mismatch".into()));
        }
        Ok(())
    }
}

impl std::fmt::Display for GroupAlgebraElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(g, c)| format!("({c})*g{g}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// An element of the free algebra B{x_1..x_n}: finitely many words with
/// nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeAlgebraElement {
    pub ring: Ring,
    pub letters: usize,
    terms: BTreeMap<Word, Value>,
}

impl FreeAlgebraElement {
    pub fn zero(ring: &Ring, letters: usize) -> Self {
        FreeAlgebraElement {
            ring: ring.clone(),
            letters,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ring: &Ring, letters: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Word::empty(), ring.one());
        FreeAlgebraElement {
            ring: ring.clone(),
            letters,
            terms,
        }
    }

    pub fn letter(ring: &Ring, letters: usize, i: usize) -> Result<Self> {
        if i >= letters {
            return Err(Error::InvalidExpression(format!("letter {i} out of range")));
        }
        let mut terms = BTreeMap::new();
        terms.insert(Word::letter(i), ring.one());
        Ok(FreeAlgebraElement {
            ring: ring.clone(),
            letters,
            terms,
        })
    }

    pub fn add_term(&mut self, w: Word, c: Value) -> Result<()> {
        if *c.ring() != self.ring {
            return Err(Error::RingMismatch(self.ring.to_string(), c.ring().to_string()));
        }
        if w.max_letter().map(|l| l >= self.letters).unwrap_or(false) {
            return Err(Error::InvalidExpression("word uses letters outside the alphabet".into()));
        }
        let newc = match self.terms.remove(&w) {
            Some(prev) => prev.add(&c)?,
            None => c,
        };
        if !newc.is_zero() {
            self.terms.insert(w, newc);
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Value)> {
        self.terms.iter()
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone())?;
        }
        Ok(out)
    }

    /// Concatenation product in B{X}.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let mut out = Self::zero(&self.ring, self.letters);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), c1.mul(c2)?)?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Value) -> Result<Self> {
        let mut out = Self::zero(&self.ring, self.letters);
        for (w, cw) in &self.terms {
            out.add_term(w.clone(), cw.mul(c)?)?;
        }
        Ok(out)
    }

    pub fn embed(&self, target: &Ring) -> Result<Self> {
        let mut out = Self::zero(target, self.letters);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.embed(target)?)?;
        }
        Ok(out)
    }

    fn check_compat(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.to_string(), other.ring.to_string()));
        }
        if self.letters != other.letters {
            return Err(Error::ArityMismatch {
                expected: self.letters,
                got: other.letters,
            });
        }
        Ok(())
    }
}

/// Either kind of algebra element; the domain of a determinant law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraElement {
    Group(GroupAlgebraElement),
    Free(FreeAlgebraElement),
}

impl AlgebraElement {
    pub fn ring(&self) -> &Ring {
        match self {
            AlgebraElement::Group(x) => &x.ring,
            AlgebraElement::Free(x) => &x.ring,
        }
    }

    pub fn support_size(&self) -> usize {
        match self {
            AlgebraElement::Group(x) => x.support_size(),
            AlgebraElement::Free(x) => x.support_size(),
        }
    }

    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        match (self, other) {
            (AlgebraElement::Group(a), AlgebraElement::Group(b)) => {
                Ok(AlgebraElement::Group(a.mul(b)?))
            }
            (AlgebraElement::Free(a), AlgebraElement::Free(b)) => {
                Ok(AlgebraElement::Free(a.mul(b)?))
            }
            _ => Err(Error::Unsupported("mixed group/free product".into())),
        }
    }

    pub fn scale(&self, c: &Value) -> Result<AlgebraElement> {
        match self {
            AlgebraElement::Group(a) => Ok(AlgebraElement::Group(a.scale(c)?)),
            AlgebraElement::Free(a) => Ok(AlgebraElement::Free(a.scale(c)?)),
        }
    }

    pub fn embed(&self, target: &Ring) -> Result<AlgebraElement> {
        match self {
            AlgebraElement::Group(a) => Ok(AlgebraElement::Group(a.embed(target)?)),
            AlgebraElement::Free(a) => Ok(AlgebraElement::Free(a.embed(target)?)),
        }
    }
}

impl From<GroupAlgebraElement> for AlgebraElement {
    fn from(x: GroupAlgebraElement) -> Self {
        AlgebraElement::Group(x)
    }
}

impl From<FreeAlgebraElement> for AlgebraElement {
    fn from(x: FreeAlgebraElement) -> Self {
        AlgebraElement::Free(x)
    }
}
