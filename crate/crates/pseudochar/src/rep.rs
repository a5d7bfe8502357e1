//! Group representations: verified homomorphisms into GL_d(B), given by one
//! invertible matrix per group element.

use std::sync::Arc;

use crate::algebra::GroupAlgebraElement;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::matrix::SquareMatrix;
use crate::ring::{Ring, Value};

#[derive(Debug, PartialEq, Eq)]
struct RepInner {
    group: FiniteGroup,
    ring: Ring,
    d: usize,
    images: Vec<SquareMatrix>,
}

/// Construction checks: images[e] = I, the homomorphism law on all pairs,
/// and invertibility of every image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representation(Arc<RepInner>);

impl Representation {
    pub fn new(
        group: FiniteGroup,
        ring: Ring,
        d: usize,
        images: Vec<SquareMatrix>,
    ) -> Result<Representation> {
        if images.len() != group.order() {
            return Err(Error::InvalidRepresentation(format!(
                "need {} images, got {}",
                group.order(),
                images.len()
            )));
        }
        for m in &images {
            if *m.ring() != ring || m.dim() != d {
                return Err(Error::InvalidRepresentation(
                    "image matrix with wrong ring or dimension".into(),
                ));
            }
        }
        if images[group.identity()] != SquareMatrix::identity(&ring, d) {
            return Err(Error::InvalidRepresentation("identity must map to I".into()));
        }
        for a in group.elements() {
            for b in group.elements() {
                let lhs = images[a].mul(&images[b])?;
                if lhs != images[group.mul(a, b)] {
                    return Err(Error::InvalidRepresentation(format!(
                        "homomorphism law fails at ({a},{b})"
                    )));
                }
            }
        }
        for (g, m) in images.iter().enumerate() {
            if !m.det().is_unit() {
                return Err(Error::InvalidRepresentation(format!(
                    "image of element {g} is not invertible"
                )));
            }
        }
        Ok(Representation(Arc::new(RepInner { group, ring, d, images })))
    }

    pub fn trivial(group: &FiniteGroup, ring: &Ring, d: usize) -> Representation {
        let images = vec![SquareMatrix::identity(ring, d); group.order()];
        Representation(Arc::new(RepInner {
            group: group.clone(),
            ring: ring.clone(),
            d,
            images,
        }))
    }

    /// One-dimensional representation from a character table (unit values,
    /// multiplicativity verified by the constructor).
    pub fn from_character(group: &FiniteGroup, ring: &Ring, values: &[Value]) -> Result<Representation> {
        let images = values
            .iter()
            .map(|v| SquareMatrix::new(ring.clone(), 1, vec![v.clone()]))
            .collect::<Result<Vec<_>>>()?;
        Representation::new(group.clone(), ring.clone(), 1, images)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.0.group
    }

    pub fn ring(&self) -> &Ring {
        &self.0.ring
    }

    pub fn dim(&self) -> usize {
        self.0.d
    }

    pub fn image(&self, g: usize) -> &SquareMatrix {
        &self.0.images[g]
    }

    pub fn images(&self) -> &[SquareMatrix] {
        &self.0.images
    }

    pub fn direct_sum(&self, other: &Representation) -> Result<Representation> {
        if self.group() != other.group() {
            return Err(Error::InvalidGroup("group mismatch in direct sum".into()));
        }
        if self.ring() != other.ring() {
            return Err(Error::RingMismatch(
                self.ring().to_string(),
                other.ring().to_string(),
            ));
        }
        let images = self
            .0
            .images
            .iter()
            .zip(&other.0.images)
            .map(|(a, b)| a.direct_sum(b))
            .collect::<Result<Vec<_>>>()?;
        Representation::new(
            self.group().clone(),
            self.ring().clone(),
            self.dim() + other.dim(),
            images,
        )
    }

    /// Conjugate by an invertible matrix: g -> P rho(g) P^{-1}.
    pub fn conjugate(&self, p: &SquareMatrix, p_inv: &SquareMatrix) -> Result<Representation> {
        let images = self
            .0
            .images
            .iter()
            .map(|m| p.mul(m)?.mul(p_inv))
            .collect::<Result<Vec<_>>>()?;
        Representation::new(self.group().clone(), self.ring().clone(), self.dim(), images)
    }

    /// Extend scalars along an embedding of the coefficient ring.
    pub fn embed(&self, target: &Ring) -> Result<Representation> {
        let images = self
            .0
            .images
            .iter()
            .map(|m| m.embed(target))
            .collect::<Result<Vec<_>>>()?;
        Representation::new(self.group().clone(), target.clone(), self.dim(), images)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "group": self.group().to_json(),
            "ring": self.ring().to_json(),
            "d": self.dim(),
            "images": self.0.images.iter().map(|m| m.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Representation> {
        let group = match v.get("group") {
            Some(serde_json::Value::String(name)) => crate::group::builtin_group(name)?,
            Some(g) => FiniteGroup::from_json(g)?,
            None => return Err(Error::Serialization("representation needs a group".into())),
        };
        let ring = match v.get("ring") {
            Some(serde_json::Value::String(name)) => crate::ring::parse_ring_name(name)?,
            Some(r) => Ring::from_json(r)?,
            None => return Err(Error::Serialization("representation needs a ring".into())),
        };
        let d = v
            .get("d")
            .and_then(|d| d.as_u64())
            .ok_or_else(|| Error::Serialization("representation needs d".into()))? as usize;
        let images = v
            .get("images")
            .and_then(|i| i.as_array())
            .ok_or_else(|| Error::Serialization("representation needs images".into()))?
            .iter()
            .map(|m| SquareMatrix::from_json(&ring, d, m))
            .collect::<Result<Vec<_>>>()?;
        Representation::new(group, ring, d, images)
    }
}

/// The algebra map B[G] -> M_d(C) induced by a representation: x = sum b_i g_i
/// goes to sum b_i rho(g_i), with matrix entries embedded into the
/// coefficient ring of x.
pub fn rho_b(rep: &Representation, x: &GroupAlgebraElement) -> Result<SquareMatrix> {
    if x.group != *rep.group() {
        return Err(Error::InvalidGroup("element of a different group".into()));
    }
    if !rep.ring().extends_to(&x.ring) {
        return Err(Error::RingMismatch(rep.ring().to_string(), x.ring.to_string()));
    }
    let mut acc = SquareMatrix::zero(&x.ring, rep.dim());
    for (g, c) in x.support() {
        let m = rep.image(g).embed(&x.ring)?.scale(c)?;
        acc = acc.add(&m)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin_group;

    fn swap_rep() -> Representation {
        let g = builtin_group("C2").unwrap();
        let z = Ring::Integers;
        Representation::new(
            g.clone(),
            z.clone(),
            2,
            vec![
                SquareMatrix::identity(&z, 2),
                SquareMatrix::from_ints(&z, 2, &[0, 1, 1, 0]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rho_b_examples() {
        let rep = swap_rep();
        let z = Ring::Integers;
        let g = rep.group().clone();
        // x = 1*e
        let x = GroupAlgebraElement::one(&z, &g);
        assert_eq!(rho_b(&rep, &x).unwrap(), SquareMatrix::identity(&z, 2));
        // x = e + s
        let x = GroupAlgebraElement::from_terms(&z, &g, vec![(0, z.one()), (1, z.one())]).unwrap();
        assert_eq!(
            rho_b(&rep, &x).unwrap(),
            SquareMatrix::from_ints(&z, 2, &[1, 1, 1, 1]).unwrap()
        );
        // x = t1*e + t2*s over Z[t1,t2]
        let zt = Ring::polynomials(z.clone(), vec!["t1".into(), "t2".into()]).unwrap();
        let x = GroupAlgebraElement::from_terms(
            &zt,
            &g,
            vec![(0, zt.var("t1").unwrap()), (1, zt.var("t2").unwrap())],
        )
        .unwrap();
        let m = rho_b(&rep, &x).unwrap();
        assert_eq!(m.entry(0, 0), &zt.var("t1").unwrap());
        assert_eq!(m.entry(0, 1), &zt.var("t2").unwrap());
        assert_eq!(m.entry(1, 0), &zt.var("t2").unwrap());
        assert_eq!(m.entry(1, 1), &zt.var("t1").unwrap());
    }

    #[test]
    fn rho_b_is_multiplicative() {
        let rep = swap_rep();
        let z = Ring::Integers;
        let g = rep.group().clone();
        let x = GroupAlgebraElement::from_terms(&z, &g, vec![(0, z.from_i64(2)), (1, z.from_i64(-3))])
            .unwrap();
        let y = GroupAlgebraElement::from_terms(&z, &g, vec![(0, z.from_i64(5)), (1, z.from_i64(1))])
            .unwrap();
        let lhs = rho_b(&rep, &x.mul(&y).unwrap()).unwrap();
        let rhs = rho_b(&rep, &x).unwrap().mul(&rho_b(&rep, &y).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn bad_rep_rejected() {
        let g = builtin_group("C2").unwrap();
        let z = Ring::Integers;
        // s -> 2I is not invertible-compatible with s^2 = e
        let bad = Representation::new(
            g.clone(),
            z.clone(),
            1,
            vec![
                SquareMatrix::identity(&z, 1),
                SquareMatrix::from_ints(&z, 1, &[2]).unwrap(),
            ],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn json_roundtrip() {
        let rep = swap_rep();
        let j = rep.to_json();
        let back = Representation::from_json(&j).unwrap();
        assert_eq!(rep, back);
    }
}
