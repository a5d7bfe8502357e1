//! Determinant laws: multiplicative, degree-d homogeneous polynomial laws
//! on a group algebra B[G] or a free algebra B{X}, represented
//! operationally by an evaluator valid over B and over B with polarization
//! variables adjoined.
//!
//! Three backings cover the uses: a representation (evaluate through the
//! matrix algebra), a matrix assignment on free letters (the generic
//! matrices give the universal case), and a theta table driven through the
//! expansion tables (the image of a GL_d pseudocharacter).

use crate::algebra::{AlgebraElement, FreeAlgebraElement, GroupAlgebraElement};
use crate::amitsur::get_table;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupHom};
use crate::lafforgue::{evaluate_expression, ThetaTable, ThetaValuation};
use crate::matrix::{strip_constant, SquareMatrix};
use crate::rep::{rho_b, Representation};
use crate::ring::{Ring, Value};
use crate::sample::Sampler;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    Group(FiniteGroup),
    Free { letters: usize },
}

#[derive(Clone, Debug)]
enum DetBacking {
    Rep(Representation),
    /// Free-letter assignment into M_d(B); invertibility is not required.
    FreeRep(Vec<SquareMatrix>),
    Data(ThetaTable),
    Product(Box<Determinant>, Box<Determinant>),
    Pullback(Box<Determinant>, GroupHom),
}

#[derive(Clone, Debug)]
pub struct Determinant {
    d: usize,
    ring: Ring,
    domain: Domain,
    backing: DetBacking,
}

impl Determinant {
    pub fn from_rep(rep: &Representation) -> Determinant {
        Determinant {
            d: rep.dim(),
            ring: rep.ring().clone(),
            domain: Domain::Group(rep.group().clone()),
            backing: DetBacking::Rep(rep.clone()),
        }
    }

    /// Free-domain law from a letter -> matrix assignment.
    pub fn from_matrices(ring: &Ring, d: usize, mats: Vec<SquareMatrix>) -> Result<Determinant> {
        for m in &mats {
            if m.ring() != ring || m.dim() != d {
                return Err(Error::InvalidRepresentation(
                    "assignment matrix with wrong ring or dimension".into(),
                ));
            }
        }
        Ok(Determinant {
            d,
            ring: ring.clone(),
            domain: Domain::Free { letters: mats.len() },
            backing: DetBacking::FreeRep(mats),
        })
    }

    /// The universal case: generic matrices over Z[x{l}_{r}{c}].
    pub fn generic(d: usize, letters: usize) -> Determinant {
        let ring = crate::amitsur::generic_entry_ring(d, letters);
        let mats = crate::amitsur::generic_matrices(&ring, d, letters);
        Determinant {
            d,
            ring,
            domain: Domain::Free { letters },
            backing: DetBacking::FreeRep(mats),
        }
    }

    /// Theta-table backing; evaluation routes through the expansion tables.
    pub fn from_theta(table: ThetaTable) -> Determinant {
        Determinant {
            d: table.d,
            ring: table.ring.clone(),
            domain: Domain::Group(table.group.clone()),
            backing: DetBacking::Data(table),
        }
    }

    /// Pointwise product law, of dimension d1 + d2.
    pub fn product(&self, other: &Determinant) -> Result<Determinant> {
        if self.domain != other.domain {
            return Err(Error::Unsupported("product of laws on different domains".into()));
        }
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.to_string(), other.ring.to_string()));
        }
        Ok(Determinant {
            d: self.d + other.d,
            ring: self.ring.clone(),
            domain: self.domain.clone(),
            backing: DetBacking::Product(Box::new(self.clone()), Box::new(other.clone())),
        })
    }

    /// Pullback along a group homomorphism u: G' -> G.
    pub fn pullback(&self, hom: &GroupHom) -> Result<Determinant> {
        match &self.domain {
            Domain::Group(g) if *g == hom.target => Ok(Determinant {
                d: self.d,
                ring: self.ring.clone(),
                domain: Domain::Group(hom.source.clone()),
                backing: DetBacking::Pullback(Box::new(self.clone()), hom.clone()),
            }),
            Domain::Group(_) => Err(Error::InvalidGroup(
                "pullback homomorphism targets a different group".into(),
            )),
            Domain::Free { .. } => Err(Error::Unsupported("pullback needs a group domain".into())),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_data_backed(&self) -> bool {
        matches!(self.backing, DetBacking::Data(_))
    }

    /// The identity of the domain algebra over an extension ring.
    pub fn one_element(&self, ring: &Ring) -> AlgebraElement {
        match &self.domain {
            Domain::Group(g) => AlgebraElement::Group(GroupAlgebraElement::one(ring, g)),
            Domain::Free { letters } => {
                AlgebraElement::Free(FreeAlgebraElement::one(ring, *letters))
            }
        }
    }

    /// Evaluate the law at x, whose coefficients live in B or an extension
    /// of B by polynomial variables.
    pub fn evaluate(&self, x: &AlgebraElement) -> Result<Value> {
        let target = x.ring().clone();
        if !self.ring.extends_to(&target) {
            return Err(Error::RingMismatch(self.ring.to_string(), target.to_string()));
        }
        match (&self.domain, x) {
            (Domain::Group(g), AlgebraElement::Group(el)) if *g == el.group => {}
            (Domain::Free { letters }, AlgebraElement::Free(el)) if *letters == el.letters => {}
            _ => return Err(Error::Unsupported("element outside the law's domain".into())),
        }
        self.evaluate_unchecked(x, &target)
    }

    fn evaluate_unchecked(&self, x: &AlgebraElement, target: &Ring) -> Result<Value> {
        match &self.backing {
            DetBacking::Rep(rep) => {
                let el = match x {
                    AlgebraElement::Group(el) => el,
                    _ => unreachable!("domain checked"),
                };
                Ok(rho_b(rep, el)?.det())
            }
            DetBacking::FreeRep(mats) => {
                let el = match x {
                    AlgebraElement::Free(el) => el,
                    _ => unreachable!("domain checked"),
                };
                let mut acc = SquareMatrix::zero(target, self.d);
                for (w, c) in el.terms() {
                    let mut m = SquareMatrix::identity(target, self.d);
                    for &l in &w.0 {
                        m = m.mul(&mats[l].embed(target)?)?;
                    }
                    acc = acc.add(&m.scale(c)?)?;
                }
                Ok(acc.det())
            }
            DetBacking::Data(table) => {
                let el = match x {
                    AlgebraElement::Group(el) => el,
                    _ => unreachable!("domain checked"),
                };
                let support: Vec<(usize, &Value)> = el.support().collect();
                if support.is_empty() {
                    return Ok(target.zero());
                }
                let expansion = get_table(self.d, support.len())?;
                let tuple: Vec<usize> = support.iter().map(|(g, _)| *g).collect();
                let valuation = ThetaValuation { table, tuple: &tuple };
                let mut acc = target.zero();
                for (alpha, expr) in &expansion.coefficients {
                    let mut term = evaluate_expression(expr, &valuation, target)?;
                    for ((_, coeff), &e) in support.iter().zip(alpha) {
                        if e > 0 {
                            term = term.mul(&coeff.pow(e as u64))?;
                        }
                    }
                    acc = acc.add(&term)?;
                }
                Ok(acc)
            }
            DetBacking::Product(a, b) => {
                let va = a.evaluate_unchecked(x, target)?;
                let vb = b.evaluate_unchecked(x, target)?;
                va.mul(&vb)
            }
            DetBacking::Pullback(inner, hom) => {
                let el = match x {
                    AlgebraElement::Group(el) => el,
                    _ => unreachable!("domain checked"),
                };
                let pushed = el.pushforward(hom)?;
                inner.evaluate_unchecked(&AlgebraElement::Group(pushed), target)
            }
        }
    }

    /// Evaluate at a single group element.
    pub fn evaluate_at_element(&self, g: usize) -> Result<Value> {
        match &self.domain {
            Domain::Group(grp) => self.evaluate(&AlgebraElement::Group(GroupAlgebraElement::basis(
                &self.ring, grp, g,
            ))),
            Domain::Free { .. } => Err(Error::Unsupported("free domain has no group elements".into())),
        }
    }

    /// The coefficient Lambda_i(x): adjoin a fresh T, evaluate at T*1 - x,
    /// and read off the coefficient of T^{d-i}.
    pub fn lambda_of(&self, x: &AlgebraElement, i: usize) -> Result<Value> {
        if i > self.d {
            return Err(Error::Unsupported(format!(
                "Lambda index {i} exceeds dimension {}",
                self.d
            )));
        }
        let base = x.ring().clone();
        if !self.ring.extends_to(&base) {
            return Err(Error::RingMismatch(self.ring.to_string(), base.to_string()));
        }
        let (ext, names) = base.polarize(1, "T")?;
        let tname = &names[0];
        let t = ext.var(tname)?;
        let one = self.one_element(&ext);
        let shifted = one.scale(&t)?;
        let x_ext = x.embed(&ext)?;
        let neg_x = x_ext.scale(&ext.from_i64(-1))?;
        let arg = match (&shifted, &neg_x) {
            (AlgebraElement::Group(a), AlgebraElement::Group(b)) => AlgebraElement::Group(a.add(b)?),
            (AlgebraElement::Free(a), AlgebraElement::Free(b)) => AlgebraElement::Free(a.add(b)?),
            _ => unreachable!(),
        };
        let value = self.evaluate(&arg)?;
        let coeff = value.coefficient_of(tname, (self.d - i) as u32)?;
        strip_constant(&coeff, &base)
    }

    /// Lambda_i at a single group element.
    pub fn lambda_at_element(&self, g: usize, i: usize) -> Result<Value> {
        match &self.domain {
            Domain::Group(grp) => self.lambda_of(
                &AlgebraElement::Group(GroupAlgebraElement::basis(&self.ring, grp, g)),
                i,
            ),
            Domain::Free { .. } => Err(Error::Unsupported("free domain has no group elements".into())),
        }
    }
}

/// Verdict of the unit criterion: group-domain laws are always GL-valued
/// (D(g) D(g^{-1}) = 1); free-domain laws are GL-valued exactly when every
/// letter value is a unit.
#[derive(Clone, Debug)]
pub struct GlVerdict {
    pub gl_valued: bool,
    pub witness: Option<String>,
}

pub fn is_gl_valued(det: &Determinant) -> Result<GlVerdict> {
    match det.domain() {
        Domain::Group(g) => {
            for gamma in g.elements() {
                let v = det.evaluate_at_element(gamma)?;
                if !v.is_unit() {
                    return Ok(GlVerdict {
                        gl_valued: false,
                        witness: Some(format!("D(g{gamma}) = {v} is not a unit")),
                    });
                }
            }
            Ok(GlVerdict {
                gl_valued: true,
                witness: None,
            })
        }
        Domain::Free { letters } => {
            for l in 0..*letters {
                let x = AlgebraElement::Free(FreeAlgebraElement::letter(&det.ring, *letters, l)?);
                let v = det.evaluate(&x)?;
                if !v.is_unit() {
                    return Ok(GlVerdict {
                        gl_valued: false,
                        witness: Some(format!("D(letter {}) = {v} is not a unit", l + 1)),
                    });
                }
            }
            Ok(GlVerdict {
                gl_valued: true,
                witness: None,
            })
        }
    }
}

#[derive(Clone, Debug)]
pub struct LawVerdict {
    pub accepted: bool,
    pub checks: usize,
    pub witness: Option<String>,
}

/// Sample-based check that the law is multiplicative and homogeneous of
/// degree d, probing with polarization variables as well as plain ring
/// scalars. For theta-backed laws the product samples stay inside small
/// cyclic subgroups so that supports remain within the table budget.
pub fn check_multiplicative_homogeneous(
    det: &Determinant,
    seed: u64,
    trials: usize,
) -> Result<LawVerdict> {
    let mut sampler = Sampler::new(seed);
    let mut checks = 0usize;

    // D(1) = 1
    let one = det.one_element(&det.ring);
    let v = det.evaluate(&one)?;
    checks += 1;
    if !v.is_one() {
        return Ok(LawVerdict {
            accepted: false,
            checks,
            witness: Some(format!("D(1) = {v}")),
        });
    }

    let can_polarize = matches!(
        Ring::polynomials(det.ring.clone(), vec!["__probe".into()]),
        Ok(_)
    );

    for trial in 0..trials {
        let polarized = can_polarize && trial % 2 == 1;
        let (ring, polar_vars) = if polarized {
            let (r, names) = det.ring.polarize(3, "s")?;
            (r, names)
        } else {
            (det.ring.clone(), vec![])
        };

        let sample_element = |s: &mut Sampler| -> Result<AlgebraElement> {
            match det.domain() {
                Domain::Group(g) => {
                    let el = if det.is_data_backed() {
                        s.group_algebra_on_small_subgroup(&ring, g, 3)
                    } else {
                        s.group_algebra(&ring, g, 3)
                    };
                    Ok(AlgebraElement::Group(el))
                }
                Domain::Free { letters } => {
                    let mut el = FreeAlgebraElement::zero(&ring, *letters);
                    let terms = 1 + s.usize(2);
                    for _ in 0..terms {
                        el.add_term(s.word(*letters, 2), s.value(&ring))?;
                    }
                    Ok(AlgebraElement::Free(el))
                }
            }
        };

        let mut x = sample_element(&mut sampler)?;
        let mut y = sample_element(&mut sampler)?;
        // sprinkle polarization variables into the coefficients
        if polarized {
            let v0 = ring.var(&polar_vars[0])?;
            let v1 = ring.var(&polar_vars[1])?;
            x = x.scale(&v0)?;
            y = y.scale(&v1)?;
        }

        // multiplicativity
        let xy = x.mul(&y)?;
        if !(det.is_data_backed() && xy.support_size() > 3) {
            let lhs = det.evaluate(&xy)?;
            let rhs = det.evaluate(&x)?.mul(&det.evaluate(&y)?)?;
            checks += 1;
            if lhs != rhs {
                return Ok(LawVerdict {
                    accepted: false,
                    checks,
                    witness: Some(format!(
                        "multiplicativity fails on trial {trial}: D(xy) = {lhs}, D(x)D(y) = {rhs}"
                    )),
                });
            }
        }

        // homogeneity, with a symbolic scalar on polarized trials
        let b = if polarized {
            ring.var(&polar_vars[2])?
        } else {
            sampler.value(&ring)
        };
        let bx = x.scale(&b)?;
        let lhs = det.evaluate(&bx)?;
        let rhs = b.pow(det.dim() as u64).mul(&det.evaluate(&x)?)?;
        checks += 1;
        if lhs != rhs {
            return Ok(LawVerdict {
                accepted: false,
                checks,
                witness: Some(format!(
                    "homogeneity fails on trial {trial}: D(bx) = {lhs}, b^d D(x) = {rhs}"
                )),
            });
        }
    }
    Ok(LawVerdict {
        accepted: true,
        checks,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin_group;
    use crate::lafforgue::LafforguePC;

    fn z() -> Ring {
        Ring::Integers
    }

    fn swap_rep() -> Representation {
        let g = builtin_group("C2").unwrap();
        Representation::new(
            g.clone(),
            z(),
            2,
            vec![
                SquareMatrix::identity(&z(), 2),
                SquareMatrix::from_ints(&z(), 2, &[0, 1, 1, 0]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rep_backed_evaluations() {
        let g = builtin_group("C2").unwrap();
        // trivial d=2: D(c*e) = c^2
        let triv = Determinant::from_rep(&Representation::trivial(&g, &z(), 2));
        let x = GroupAlgebraElement::from_terms(&z(), &g, vec![(0, z().from_i64(5))]).unwrap();
        assert_eq!(triv.evaluate(&x.into()).unwrap(), z().from_i64(25));
        // swap rep: D(e + s) = 0
        let det = Determinant::from_rep(&swap_rep());
        let x = GroupAlgebraElement::from_terms(&z(), &g, vec![(0, z().one()), (1, z().one())]).unwrap();
        assert_eq!(det.evaluate(&x.into()).unwrap(), z().zero());
        // symbolic: D(t1 e + t2 s) = t1^2 - t2^2
        let zt = Ring::polynomials(z(), vec!["t1".into(), "t2".into()]).unwrap();
        let x = GroupAlgebraElement::from_terms(
            &zt,
            &g,
            vec![(0, zt.var("t1").unwrap()), (1, zt.var("t2").unwrap())],
        )
        .unwrap();
        let t1 = zt.var("t1").unwrap();
        let t2 = zt.var("t2").unwrap();
        let expect = t1.mul(&t1).unwrap().sub(&t2.mul(&t2).unwrap()).unwrap();
        assert_eq!(det.evaluate(&x.into()).unwrap(), expect);
    }

    #[test]
    fn generic_single_letter_determinant() {
        let det = Determinant::generic(2, 1);
        let ring = det.ring().clone();
        let x = FreeAlgebraElement::letter(&ring, 1, 0).unwrap();
        let v = det.evaluate(&x.into()).unwrap();
        // x11 x22 - x12 x21
        let expect = ring
            .var("x1_1_1")
            .unwrap()
            .mul(&ring.var("x1_2_2").unwrap())
            .unwrap()
            .sub(
                &ring
                    .var("x1_1_2")
                    .unwrap()
                    .mul(&ring.var("x1_2_1").unwrap())
                    .unwrap(),
            )
            .unwrap();
        assert_eq!(v, expect);
    }

    #[test]
    fn data_backed_agrees_with_rep_backed() {
        // theta harvested from chi + chi^2 over F4; spec example
        // D(e + g) = det(I + rho(g)) = 1
        let g = builtin_group("C3").unwrap();
        let f4 = Ring::finite_field(4).unwrap();
        let omega = Value::from_json(&f4, &serde_json::json!([0, 1])).unwrap();
        let chi: Vec<Value> = vec![f4.one(), omega.clone(), omega.mul(&omega).unwrap()];
        let chi2: Vec<Value> = chi.iter().map(|v| v.mul(v).unwrap()).collect();
        let rep = Representation::from_character(&g, &f4, &chi)
            .unwrap()
            .direct_sum(&Representation::from_character(&g, &f4, &chi2).unwrap())
            .unwrap();
        let rep_det = Determinant::from_rep(&rep);
        let data_det = Determinant::from_theta(ThetaTable::from_rep(&rep));
        let x = GroupAlgebraElement::from_terms(&f4, &g, vec![(0, f4.one()), (1, f4.one())]).unwrap();
        let via_data = data_det.evaluate(&AlgebraElement::Group(x.clone())).unwrap();
        let via_rep = rep_det.evaluate(&AlgebraElement::Group(x)).unwrap();
        assert_eq!(via_data, f4.one());
        assert_eq!(via_rep, via_data);
        // exhaustive agreement on all support <= 3 elements
        let elements = f4.elements().unwrap();
        let mut count = 0;
        for g1 in 0..3usize {
            for g2 in g1..3 {
                for c1 in &elements {
                    for c2 in &elements {
                        let mut el = GroupAlgebraElement::zero(&f4, &g);
                        el.add_term(g1, c1.clone()).unwrap();
                        el.add_term(g2, c2.clone()).unwrap();
                        let a = data_det.evaluate(&AlgebraElement::Group(el.clone())).unwrap();
                        let b = rep_det.evaluate(&AlgebraElement::Group(el)).unwrap();
                        assert_eq!(a, b);
                        count += 1;
                    }
                }
            }
        }
        assert!(count > 90);
    }

    #[test]
    fn lambda_of_matches_charpoly() {
        let rep = swap_rep();
        let det = Determinant::from_rep(&rep);
        for gamma in rep.group().elements() {
            let cp = rep.image(gamma).charpoly();
            for i in 0..=2 {
                assert_eq!(det.lambda_at_element(gamma, i).unwrap(), cp.lambdas[i]);
            }
        }
    }

    #[test]
    fn lambda_of_zero_element() {
        let det = Determinant::from_rep(&swap_rep());
        let g = builtin_group("C2").unwrap();
        let zero = GroupAlgebraElement::zero(&z(), &g);
        assert_eq!(det.lambda_of(&zero.clone().into(), 0).unwrap(), z().one());
        for i in 1..=2 {
            assert!(det.lambda_of(&zero.clone().into(), i).unwrap().is_zero());
        }
    }

    #[test]
    fn product_law_matches_direct_sum() {
        let g = builtin_group("C3").unwrap();
        let f4 = Ring::finite_field(4).unwrap();
        let omega = Value::from_json(&f4, &serde_json::json!([0, 1])).unwrap();
        let chi: Vec<Value> = vec![f4.one(), omega.clone(), omega.mul(&omega).unwrap()];
        let psi: Vec<Value> = chi.iter().map(|v| v.mul(v).unwrap()).collect();
        let rchi = Representation::from_character(&g, &f4, &chi).unwrap();
        let rpsi = Representation::from_character(&g, &f4, &psi).unwrap();
        let d1 = Determinant::from_rep(&rchi);
        let d2 = Determinant::from_rep(&rpsi);
        let prod = d1.product(&d2).unwrap();
        assert_eq!(prod.dim(), 2);
        let dsum = Determinant::from_rep(&rchi.direct_sum(&rpsi).unwrap());
        // exhaustive over all support <= 3 elements of F4[C3]
        let elements = f4.elements().unwrap();
        for c0 in &elements {
            for c1 in &elements {
                for c2 in &elements {
                    let mut el = GroupAlgebraElement::zero(&f4, &g);
                    el.add_term(0, c0.clone()).unwrap();
                    el.add_term(1, c1.clone()).unwrap();
                    el.add_term(2, c2.clone()).unwrap();
                    let a = prod.evaluate(&AlgebraElement::Group(el.clone())).unwrap();
                    let b = dsum.evaluate(&AlgebraElement::Group(el)).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn pullback_examples() {
        let c6 = builtin_group("C6").unwrap();
        let c3 = builtin_group("C3").unwrap();
        let f4 = Ring::finite_field(4).unwrap();
        let omega = Value::from_json(&f4, &serde_json::json!([0, 1])).unwrap();
        let chi: Vec<Value> = vec![f4.one(), omega.clone(), omega.mul(&omega).unwrap()];
        let rep = Representation::from_character(&c3, &f4, &chi).unwrap();
        let det = Determinant::from_rep(&rep);
        // reduction C6 -> C3
        let hom = GroupHom::new(c6.clone(), c3.clone(), vec![0, 1, 2, 0, 1, 2]).unwrap();
        let pulled = det.pullback(&hom).unwrap();
        // equals det_from_rep(chi o u) on every element
        let pulled_chi: Vec<Value> = (0..6).map(|i| chi[i % 3].clone()).collect();
        let composed = Representation::from_character(&c6, &f4, &pulled_chi).unwrap();
        let direct = Determinant::from_rep(&composed);
        for gamma in c6.elements() {
            assert_eq!(
                pulled.evaluate_at_element(gamma).unwrap(),
                direct.evaluate_at_element(gamma).unwrap()
            );
        }
        // identity pullback changes nothing
        let id = GroupHom::identity(&c3);
        let same = det.pullback(&id).unwrap();
        for gamma in c3.elements() {
            assert_eq!(
                same.evaluate_at_element(gamma).unwrap(),
                det.evaluate_at_element(gamma).unwrap()
            );
        }
        // trivial morphism: constant at the identity's value
        let trivial = GroupHom::new(c6.clone(), c3.clone(), vec![0; 6]).unwrap();
        let pulled = det.pullback(&trivial).unwrap();
        for gamma in c6.elements() {
            assert!(pulled.evaluate_at_element(gamma).unwrap().is_one());
        }
    }

    #[test]
    fn gl_valued_criterion() {
        // group domains are always GL-valued
        let det = Determinant::from_rep(&swap_rep());
        assert!(is_gl_valued(&det).unwrap().gl_valued);
        // free domain, singular letter
        let bad = Determinant::from_matrices(
            &z(),
            2,
            vec![SquareMatrix::from_ints(&z(), 2, &[1, 0, 0, 0]).unwrap()],
        )
        .unwrap();
        assert!(!is_gl_valued(&bad).unwrap().gl_valued);
        // free domain, det = 6 not a unit in Z
        let six = Determinant::from_matrices(
            &z(),
            2,
            vec![SquareMatrix::from_ints(&z(), 2, &[2, 0, 0, 3]).unwrap()],
        )
        .unwrap();
        assert!(!is_gl_valued(&six).unwrap().gl_valued);
        // the generic law is not GL-valued either
        assert!(!is_gl_valued(&Determinant::generic(2, 2)).unwrap().gl_valued);
    }

    #[test]
    fn multiplicative_homogeneous_accepts_honest_laws() {
        let det = Determinant::from_rep(&swap_rep());
        let v = check_multiplicative_homogeneous(&det, 11, 40).unwrap();
        assert!(v.accepted, "{:?}", v.witness);
        // generic law, symbolic identity check
        let gen2 = Determinant::generic(2, 2);
        let v = check_multiplicative_homogeneous(&gen2, 12, 10).unwrap();
        assert!(v.accepted, "{:?}", v.witness);
        // data-backed law from a real representation
        let rep = crate::sample::standard_s3_representation(&Ring::prime_field(5).unwrap()).unwrap();
        let data = Determinant::from_theta(ThetaTable::from_rep(&rep));
        let v = check_multiplicative_homogeneous(&data, 13, 40).unwrap();
        assert!(v.accepted, "{:?}", v.witness);
    }

    #[test]
    fn corrupted_theta_rejected() {
        let rep = crate::sample::standard_s3_representation(&Ring::prime_field(7).unwrap()).unwrap();
        let table = ThetaTable::from_rep(&rep);
        // corrupt a det-row entry at a 3-cycle (det 1, so 1+1 stays a unit)
        let f7 = Ring::prime_field(7).unwrap();
        let old = table.theta(2, 3).clone();
        let corrupted = table.with_entry(2, 3, old.add(&f7.one()).unwrap()).unwrap();
        let det = Determinant::from_theta(corrupted);
        let v = check_multiplicative_homogeneous(&det, 21, 200).unwrap();
        assert!(!v.accepted);
        assert!(v.witness.is_some());
    }

    #[test]
    fn theta_evaluate_spec_value() {
        // Theta from chi + chi^2 over F4, f = Lambda_2((1,2)), tuple (g, g):
        // Lambda_2(rho(g^2)) = det(rho(g^2)) = 1
        let g = builtin_group("C3").unwrap();
        let f4 = Ring::finite_field(4).unwrap();
        let omega = Value::from_json(&f4, &serde_json::json!([0, 1])).unwrap();
        let chi: Vec<Value> = vec![f4.one(), omega.clone(), omega.mul(&omega).unwrap()];
        let chi2: Vec<Value> = chi.iter().map(|v| v.mul(v).unwrap()).collect();
        let rep = Representation::from_character(&g, &f4, &chi)
            .unwrap()
            .direct_sum(&Representation::from_character(&g, &f4, &chi2).unwrap())
            .unwrap();
        let pc = LafforguePC::from_rep(&rep);
        let f = crate::lafforgue::DonkinExpression::lambda_gen(2, 2, 2, crate::group::Word(vec![0, 1]))
            .unwrap();
        assert_eq!(pc.evaluate(&f, &[1, 1]).unwrap(), f4.one());
    }
}
