//! The conversions between the three packagings of characteristic-polynomial
//! data, and the verification machinery around them:
//!
//! * `alpha` turns GL_d pseudocharacter data into a determinant law,
//! * `alpha_inverse` turns a group-domain determinant law back into
//!   pseudocharacter data (and enforces the unit criterion on free domains),
//! * `taylor_bridge` extracts the trace pseudocharacter when d! is a unit,
//! * `roundtrip_check` verifies both composites are the identity,
//! * `char_p_separation_demo` exhibits trace collisions in characteristic 2
//!   that the determinant data separates, and
//! * `semisimple_bijection_check` enumerates all 2-dimensional
//!   representations over a small finite field and checks that fingerprints
//!   classify the semisimple ones up to conjugacy over bounded extensions.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{AlgebraElement, FreeAlgebraElement, GroupAlgebraElement};
use crate::determinant::{is_gl_valued, Determinant, Domain};
use crate::error::{Error, Result};
use crate::group::{builtin_group, FiniteGroup, Word};
use crate::lafforgue::{
    evaluate_expression, DonkinExpression, GenValuation, LafforguePC, ThetaTable,
};
use crate::matrix::SquareMatrix;
use crate::rep::Representation;
use crate::ring::{Ring, Value};
use crate::sample::Sampler;
use crate::taylor::{is_taylor_pc, obstruction_prime, CheckMode, TaylorPC};

/// Outcome of a conversion or verification run. A report with a nonempty
/// defect list never counts as success.
#[derive(Clone, Debug, Serialize)]
pub struct ConversionReport {
    pub direction: String,
    pub fingerprint: String,
    pub counts: BTreeMap<String, u64>,
    pub defects: Vec<String>,
    pub elapsed_ms: u64,
}

impl ConversionReport {
    pub fn accepted(&self) -> bool {
        self.defects.is_empty()
    }
}

/// The determinant law attached to GL_d pseudocharacter data: harvest the
/// theta table through the single-letter generators, then evaluate through
/// the expansion tables.
pub fn alpha(theta: &LafforguePC) -> Result<Determinant> {
    let group = theta.group().clone();
    let ring = theta.ring().clone();
    let d = theta.dim();
    let values: Vec<Vec<Value>> = (1..=d)
        .map(|k| {
            let f = DonkinExpression::lambda_gen(1, d, k, Word::letter(0))?;
            group
                .elements()
                .map(|g| theta.evaluate(&f, &[g]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let table = ThetaTable::new(group, ring, d, values)?;
    Ok(Determinant::from_theta(table))
}

/// The inverse direction for group domains: theta(k, gamma) =
/// Lambda_k(D at gamma). Free-domain laws must satisfy the unit criterion
/// and are handled by `alpha_inverse_set`.
pub fn alpha_inverse(det: &Determinant) -> Result<LafforguePC> {
    match det.domain() {
        Domain::Group(group) => {
            let d = det.dim();
            let values: Vec<Vec<Value>> = (1..=d)
                .map(|k| {
                    group
                        .elements()
                        .map(|g| det.lambda_at_element(g, k))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            let table = ThetaTable::new(group.clone(), det.ring().clone(), d, values)?;
            Ok(LafforguePC::from_theta(table))
        }
        Domain::Free { .. } => {
            let verdict = is_gl_valued(det)?;
            if !verdict.gl_valued {
                return Err(Error::NotGlValued(
                    verdict.witness.unwrap_or_else(|| "letter value is not a unit".into()),
                ));
            }
            Err(Error::Unsupported(
                "free-domain data is set-level; use alpha_inverse_set".into(),
            ))
        }
    }
}

/// Set-level pseudocharacter data on a free alphabet, backed by a GL-valued
/// determinant law: generators evaluate through Lambda coefficients of the
/// law at word products of letters.
#[derive(Debug)]
pub struct SetPseudocharacter {
    det: Determinant,
    letters: usize,
}

struct DetValuation<'a> {
    det: &'a Determinant,
    letters: usize,
    tuple: &'a [usize],
}

impl GenValuation for DetValuation<'_> {
    fn dim(&self) -> usize {
        self.det.dim()
    }

    fn lambda(&self, k: usize, word: &Word) -> Result<Value> {
        let mut letters = Vec::with_capacity(word.0.len());
        for &slot in &word.0 {
            let x = *self.tuple.get(slot).ok_or(Error::ArityMismatch {
                expected: slot + 1,
                got: self.tuple.len(),
            })?;
            letters.push(x);
        }
        let mut el = FreeAlgebraElement::zero(self.det.ring(), self.letters);
        el.add_term(Word(letters), self.det.ring().one())?;
        self.det.lambda_of(&AlgebraElement::Free(el), k)
    }

    fn det_inv(&self, slot: usize) -> Result<Value> {
        let x = *self.tuple.get(slot).ok_or(Error::ArityMismatch {
            expected: slot + 1,
            got: self.tuple.len(),
        })?;
        let el = FreeAlgebraElement::letter(self.det.ring(), self.letters, x)?;
        let v = self.det.evaluate(&AlgebraElement::Free(el))?;
        v.inverse()
            .ok_or_else(|| Error::NotGlValued(format!("letter {x} has non-unit value")))
    }
}

impl SetPseudocharacter {
    pub fn evaluate(&self, f: &DonkinExpression, tuple: &[usize]) -> Result<Value> {
        if f.arity() != tuple.len() {
            return Err(Error::ArityMismatch {
                expected: f.arity(),
                got: tuple.len(),
            });
        }
        let valuation = DetValuation {
            det: &self.det,
            letters: self.letters,
            tuple,
        };
        evaluate_expression(f, &valuation, self.det.ring())
    }
}

/// Inverse direction on a free alphabet; requires the unit criterion.
pub fn alpha_inverse_set(det: &Determinant) -> Result<SetPseudocharacter> {
    match det.domain() {
        Domain::Free { letters } => {
            let verdict = is_gl_valued(det)?;
            if !verdict.gl_valued {
                return Err(Error::NotGlValued(
                    verdict.witness.unwrap_or_else(|| "letter value is not a unit".into()),
                ));
            }
            Ok(SetPseudocharacter {
                det: det.clone(),
                letters: *letters,
            })
        }
        Domain::Group(_) => Err(Error::Unsupported(
            "group-domain laws invert to group pseudocharacters; use alpha_inverse".into(),
        )),
    }
}

/// The trace pseudocharacter of a determinant law: T = -Lambda_1, defined
/// when d! is a unit in the value ring.
pub fn taylor_bridge(det: &Determinant) -> Result<TaylorPC> {
    let group = match det.domain() {
        Domain::Group(g) => g.clone(),
        Domain::Free { .. } => {
            return Err(Error::Unsupported("trace bridge needs a group domain".into()))
        }
    };
    let d = det.dim();
    if let Some(p) = obstruction_prime(det.ring(), d) {
        return Err(Error::NotAUnit(format!("{p} (so {d}! is not invertible in {})", det.ring())));
    }
    let values: Vec<Value> = group
        .elements()
        .map(|g| Ok(det.lambda_at_element(g, 1)?.neg()))
        .collect::<Result<_>>()?;
    TaylorPC::new(group, det.ring().clone(), d, values)
}

pub enum RoundtripInput {
    Rep(Representation),
    Theta(ThetaTable),
}

/// All elements of B[G] with the given support set and nonzero coefficients
/// drawn from `coeffs`.
fn elements_on_support(
    ring: &Ring,
    group: &FiniteGroup,
    support: &[usize],
    coeffs: &[Value],
) -> Vec<GroupAlgebraElement> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; support.len()];
    loop {
        let mut el = GroupAlgebraElement::zero(ring, group);
        for (pos, &g) in support.iter().enumerate() {
            el.add_term(g, coeffs[idx[pos]].clone()).unwrap();
        }
        if el.support_size() == support.len() {
            out.push(el);
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < coeffs.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for size in 1..=k.min(n) {
        let mut cur = Vec::new();
        fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == size {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, size, cur, out);
                cur.pop();
            }
        }
        rec(0, n, size, &mut cur, &mut out);
    }
    out.retain(|s| !s.is_empty());
    out
}

/// Verify that both composites are identities: theta tables round-trip
/// exactly, and the two determinant laws agree on every element of support
/// up to the table budget (exhaustively over small finite coefficient sets,
/// on seeded samples otherwise).
pub fn roundtrip_check(input: RoundtripInput, seed: u64) -> Result<ConversionReport> {
    let start = Instant::now();
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut defects: Vec<String> = Vec::new();

    let (theta_pc, reference_det, label) = match &input {
        RoundtripInput::Rep(rep) => (
            LafforguePC::from_rep(rep),
            Some(Determinant::from_rep(rep)),
            format!("rep d={} over {} on {}", rep.dim(), rep.ring(), rep.group().name()),
        ),
        RoundtripInput::Theta(t) => (
            LafforguePC::from_theta(t.clone()),
            None,
            format!("theta d={} over {} on {}", t.d, t.ring, t.group.name()),
        ),
    };
    let group = theta_pc.group().clone();
    let ring = theta_pc.ring().clone();
    let d = theta_pc.dim();

    let det = alpha(&theta_pc)?;
    let back = alpha_inverse(&det)?;

    // theta-level round trip: alpha_inverse(alpha(Theta)) = Theta on all
    // generator values
    let original = theta_pc.harvest()?;
    let recovered = back.harvest()?;
    for k in 1..=d {
        for g in group.elements() {
            counts.entry("theta_values_compared".into()).and_modify(|c| *c += 1).or_insert(1);
            if original.theta(k, g) != recovered.theta(k, g) {
                defects.push(format!(
                    "theta({k}, {g}): {} became {}",
                    original.theta(k, g),
                    recovered.theta(k, g)
                ));
            }
        }
    }

    // determinant-level round trip: alpha(alpha_inverse(D)) = D on elements
    // of bounded support
    let det_back = alpha(&back)?;
    let max_support = if d <= 2 { 3 } else { 2 };
    let coeffs: Vec<Value> = match ring.elements() {
        Some(els) if els.len() <= 5 => els,
        _ => {
            let mut s = Sampler::new(seed);
            let mut cs: Vec<Value> = Vec::new();
            cs.push(ring.one());
            while cs.len() < 4 {
                let v = s.nonzero_value(&ring);
                if !cs.contains(&v) {
                    cs.push(v);
                }
            }
            cs
        }
    };
    let nonzero: Vec<Value> = coeffs.into_iter().filter(|c| !c.is_zero()).collect();
    for support in subsets_up_to(group.order(), max_support) {
        for el in elements_on_support(&ring, &group, &support, &nonzero) {
            let x = AlgebraElement::Group(el);
            let lhs = det.evaluate(&x)?;
            let rhs = det_back.evaluate(&x)?;
            counts.entry("evaluations_compared".into()).and_modify(|c| *c += 1).or_insert(1);
            if lhs != rhs {
                defects.push(format!("round trip disagrees at {x:?}: {lhs} vs {rhs}"));
            }
            if let Some(reference) = &reference_det {
                let direct = reference.evaluate(&x)?;
                counts
                    .entry("reference_evaluations_compared".into())
                    .and_modify(|c| *c += 1)
                    .or_insert(1);
                if lhs != direct {
                    defects.push(format!(
                        "alpha disagrees with the representation law at {x:?}: {lhs} vs {direct}"
                    ));
                }
            }
            if defects.len() > 16 {
                break;
            }
        }
        if defects.len() > 16 {
            break;
        }
    }

    // the recovered pseudocharacter must still pass concatenation sampling
    let mut sampler = Sampler::new(seed ^ 0x5ca1ab1e);
    for _ in 0..100 {
        let n = 1 + sampler.usize(2);
        let f = crate::lafforgue::random_expression(&mut sampler, n, d, true);
        let tuple = sampler.group_tuple(&group, n + 1);
        let defect = back.lpc2_defect(&f, &tuple)?;
        counts.entry("lpc2_samples".into()).and_modify(|c| *c += 1).or_insert(1);
        if !defect.is_zero() {
            defects.push(format!("recovered data fails concatenation at {tuple:?}"));
            break;
        }
    }

    Ok(ConversionReport {
        direction: "roundtrip".into(),
        fingerprint: format!("{label}; theta={}", serde_json::to_string(&original.to_json())?),
        counts,
        defects,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// The characteristic-2 collision: two non-conjugate semisimple
/// 2-dimensional representations of C3 over F4 share a trace table while
/// their determinant rows differ; the same construction in characteristic 5
/// (over F25, the smallest field of characteristic 5 with cube roots of
/// unity) has distinct traces.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub traces_equal: bool,
    pub determinants_equal: bool,
    pub semisimple: bool,
    pub non_conjugate: bool,
    pub control_traces_distinct: bool,
    pub details: BTreeMap<String, String>,
    pub defects: Vec<String>,
}

pub fn char_p_separation_demo() -> Result<SeparationReport> {
    let mut details = BTreeMap::new();
    let mut defects = Vec::new();

    let c3 = builtin_group("C3")?;
    let f4 = Ring::finite_field(4)?;
    let omega = order_three_unit(&f4)?;
    let chi: Vec<Value> = vec![f4.one(), f4.one(), f4.one()];
    let psi: Vec<Value> = vec![f4.one(), omega.clone(), omega.mul(&omega)?];
    let rho1 = double_character(&c3, &f4, &chi)?;
    let rho2 = double_character(&c3, &f4, &psi)?;

    let t1 = crate::taylor::taylor_from_rep(&rho1);
    let t2 = crate::taylor::taylor_from_rep(&rho2);
    let traces_equal = t1.values() == t2.values();
    if !traces_equal {
        defects.push("traces over F4 were expected to coincide".into());
    }
    // both trace tables vanish identically (2 = 0)
    if !t1.values().iter().all(|v| v.is_zero()) {
        defects.push("doubled-character traces should vanish in characteristic 2".into());
    }

    let theta1 = ThetaTable::from_rep(&rho1);
    let theta2 = ThetaTable::from_rep(&rho2);
    let determinants_equal = (0..c3.order()).all(|g| theta1.theta(2, g) == theta2.theta(2, g));
    if determinants_equal {
        defects.push("determinant rows over F4 were expected to differ".into());
    }
    details.insert("theta2_rho1_at_g".into(), theta1.theta(2, 1).to_string());
    details.insert("theta2_rho2_at_g".into(), theta2.theta(2, 1).to_string());
    // pinned values: det rows at g are 1 and omega^2
    if !theta1.theta(2, 1).is_one() {
        defects.push(format!("theta(2, g) of the doubled trivial character is {}", theta1.theta(2, 1)));
    }
    if *theta2.theta(2, 1) != omega.mul(&omega)? {
        defects.push(format!("theta(2, g) of the doubled order-3 character is {}", theta2.theta(2, 1)));
    }

    let ss1 = semisimplify_dim2(&rho1)?;
    let ss2 = semisimplify_dim2(&rho2)?;
    let semisimple = ss1.semisimple && ss2.semisimple;
    if !semisimple {
        defects.push("doubled characters must be semisimple".into());
    }
    let mut non_conjugate = true;
    for k in 1..=4 {
        if conjugate_over_extension(&rho1, &rho2, k)? {
            non_conjugate = false;
        }
    }
    if !non_conjugate {
        defects.push("the two representations must not be conjugate".into());
    }

    // identical inputs give identical fingerprints
    let same = ThetaTable::from_rep(&rho2);
    if !(0..c3.order()).all(|g| same.theta(1, g) == theta2.theta(1, g) && same.theta(2, g) == theta2.theta(2, g)) {
        defects.push("fingerprint of a representation is not stable".into());
    }

    // control in characteristic 5: the smallest field of characteristic 5
    // containing cube roots of unity is F25
    let f25 = Ring::finite_field(25)?;
    let omega5 = order_three_unit(&f25)?;
    let chi5: Vec<Value> = vec![f25.one(), f25.one(), f25.one()];
    let psi5: Vec<Value> = vec![f25.one(), omega5.clone(), omega5.mul(&omega5)?];
    let rho1c = double_character(&c3, &f25, &chi5)?;
    let rho2c = double_character(&c3, &f25, &psi5)?;
    let t1c = crate::taylor::taylor_from_rep(&rho1c);
    let t2c = crate::taylor::taylor_from_rep(&rho2c);
    let control_traces_distinct = t1c.values() != t2c.values();
    if !control_traces_distinct {
        defects.push("characteristic-5 control traces unexpectedly collide".into());
    }
    details.insert("control_trace_rho1_at_g".into(), t1c.value(1).to_string());
    details.insert("control_trace_rho2_at_g".into(), t2c.value(1).to_string());

    Ok(SeparationReport {
        traces_equal,
        determinants_equal,
        semisimple,
        non_conjugate,
        control_traces_distinct,
        details,
        defects,
    })
}

fn double_character(group: &FiniteGroup, ring: &Ring, chi: &[Value]) -> Result<Representation> {
    let one_dim = Representation::from_character(group, ring, chi)?;
    one_dim.direct_sum(&one_dim)
}

/// The first element of multiplicative order 3, scanned in the canonical
/// element order.
fn order_three_unit(ring: &Ring) -> Result<Value> {
    let one = ring.one();
    for v in ring.elements().into_iter().flatten() {
        if !v.is_zero() && v != one && v.mul(&v)?.mul(&v)? == one {
            return Ok(v);
        }
    }
    Err(Error::Unsupported(format!("{ring} has no cube roots of unity")))
}

/// Result of the stable-line analysis of a 2-dimensional representation.
pub struct Semisimplification {
    pub semisimple: bool,
    pub stable_lines: usize,
    /// For reducible representations: the two line characters (equal when
    /// only one line exists, in which case semisimple is false).
    pub characters: Option<(Vec<Value>, Vec<Value>)>,
}

/// Complete and exact for dimension 2: a representation over a field is
/// semisimple iff it has no stable line (irreducible) or two distinct
/// stable lines (split).
pub fn semisimplify_dim2(rep: &Representation) -> Result<Semisimplification> {
    if rep.dim() != 2 {
        return Err(Error::Unsupported("semisimplification implemented for d = 2 only".into()));
    }
    let ring = rep.ring().clone();
    if !ring.is_field() {
        return Err(Error::Unsupported("semisimplification needs a field".into()));
    }
    let elements = ring
        .elements()
        .ok_or_else(|| Error::Unsupported("stable-line scan needs a finite field".into()))?;
    // lines of F_q^2: (1, t) for each t, plus (0, 1)
    let mut lines: Vec<(Value, Value)> = elements.iter().map(|t| (ring.one(), t.clone())).collect();
    lines.push((ring.zero(), ring.one()));

    let mut stable: Vec<(Value, Value)> = Vec::new();
    'line: for (v0, v1) in lines {
        for g in rep.group().elements() {
            let m = rep.image(g);
            let w0 = m.entry(0, 0).mul(&v0)?.add(&m.entry(0, 1).mul(&v1)?)?;
            let w1 = m.entry(1, 0).mul(&v0)?.add(&m.entry(1, 1).mul(&v1)?)?;
            // parallel iff cross-product vanishes
            let cross = w0.mul(&v1)?.sub(&w1.mul(&v0)?)?;
            if !cross.is_zero() {
                continue 'line;
            }
        }
        stable.push((v0, v1));
    }

    if stable.is_empty() {
        return Ok(Semisimplification {
            semisimple: true,
            stable_lines: 0,
            characters: None,
        });
    }

    let character_on = |line: &(Value, Value)| -> Result<Vec<Value>> {
        let (v0, v1) = line;
        rep.group()
            .elements()
            .map(|g| {
                let m = rep.image(g);
                let w0 = m.entry(0, 0).mul(v0)?.add(&m.entry(0, 1).mul(v1)?)?;
                let w1 = m.entry(1, 0).mul(v0)?.add(&m.entry(1, 1).mul(v1)?)?;
                if v0.is_zero() {
                    Ok(w1.mul(&v1.inverse().expect("projective coordinate"))?)
                } else {
                    Ok(w0.mul(&v0.inverse().expect("projective coordinate"))?)
                }
            })
            .collect()
    };

    if stable.len() >= 2 {
        let chi1 = character_on(&stable[0])?;
        let chi2 = character_on(&stable[1])?;
        Ok(Semisimplification {
            semisimple: true,
            stable_lines: stable.len(),
            characters: Some((chi1, chi2)),
        })
    } else {
        let chi = character_on(&stable[0])?;
        // quotient character: the other diagonal entry, recoverable from the
        // determinant row
        let quotient: Vec<Value> = rep
            .group()
            .elements()
            .map(|g| {
                let det = rep.image(g).det();
                det.mul(&chi[g].inverse().ok_or_else(|| Error::NotAUnit("line character".into()))?)
            })
            .collect::<Result<_>>()?;
        Ok(Semisimplification {
            semisimple: false,
            stable_lines: 1,
            characters: Some((chi, quotient)),
        })
    }
}

/// Null space of a homogeneous linear system over a field, by Gauss-Jordan.
fn field_nullspace(ring: &Ring, rows: &[Vec<Value>], cols: usize) -> Result<Vec<Vec<Value>>> {
    let mut m: Vec<Vec<Value>> = rows.to_vec();
    let nrows = m.len();
    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pr) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][col].inverse().ok_or_else(|| Error::NotAUnit("pivot".into()))?;
        for c in 0..cols {
            m[rank][c] = m[rank][c].mul(&inv)?;
        }
        for r in 0..nrows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..cols {
                    let delta = f.mul(&m[rank][c])?;
                    m[r][c] = m[r][c].sub(&delta)?;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    let pivot_set: std::collections::HashSet<usize> = pivot_cols.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![ring.zero(); cols];
        v[free] = ring.one();
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = m[r][free].neg();
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Basis of the space of matrices P with P rho1(g) = rho2(g) P for all g,
/// over the (common) base field.
fn intertwiner_basis(rep1: &Representation, rep2: &Representation) -> Result<Vec<SquareMatrix>> {
    let ring = rep1.ring().clone();
    let d = rep1.dim();
    let mut rows = Vec::new();
    for g in rep1.group().elements() {
        let a = rep1.image(g);
        let b = rep2.image(g);
        // equation (i, j): sum_k P_{ik} A_{kj} - sum_k B_{ik} P_{kj} = 0
        for i in 0..d {
            for j in 0..d {
                let mut row = vec![ring.zero(); d * d];
                for k in 0..d {
                    row[i * d + k] = row[i * d + k].add(a.entry(k, j))?;
                    row[k * d + j] = row[k * d + j].sub(b.entry(i, k))?;
                }
                rows.push(row);
            }
        }
    }
    let basis = field_nullspace(&ring, &rows, d * d)?;
    basis
        .into_iter()
        .map(|v| SquareMatrix::new(ring.clone(), d, v))
        .collect()
}

/// The field F_{q^k} containing F_q, with a compatible embedding found by
/// root search.
pub struct FieldEmbedding {
    pub src: Ring,
    pub dst: Ring,
    gen_image: Option<Value>,
}

impl FieldEmbedding {
    pub fn apply(&self, v: &Value) -> Result<Value> {
        if self.src == self.dst {
            return Ok(v.clone());
        }
        if let Some(res) = v.as_residue() {
            return Ok(self.dst.from_i64(res as i64));
        }
        if let Some(coeffs) = v.as_ext_coeffs() {
            let root = self.gen_image.as_ref().expect("extension source has a generator image");
            let mut acc = self.dst.zero();
            let mut power = self.dst.one();
            for &c in coeffs {
                acc = acc.add(&power.mul(&self.dst.from_i64(c as i64))?)?;
                power = power.mul(root)?;
            }
            return Ok(acc);
        }
        Err(Error::Unsupported("embedding source must be a finite field".into()))
    }
}

/// Extension field of F_q of relative degree k, with the canonical modulus.
pub fn extension_of(q: u64, k: usize) -> Result<Ring> {
    if k == 1 {
        return Ring::finite_field(q);
    }
    let factors = crate::ring::arith::factorize(q);
    let (p, e) = match factors.as_slice() {
        [(p, e)] => (*p, *e as usize),
        _ => return Err(Error::InvalidRing(format!("{q} is not a prime power"))),
    };
    let mut size: u64 = 1;
    for _ in 0..e * k {
        size = size
            .checked_mul(p)
            .ok_or_else(|| Error::Unsupported("extension too large".into()))?;
    }
    Ring::finite_field(size)
}

pub fn field_embedding(src: &Ring, dst: &Ring) -> Result<FieldEmbedding> {
    if src == dst {
        return Ok(FieldEmbedding {
            src: src.clone(),
            dst: dst.clone(),
            gen_image: None,
        });
    }
    match src {
        Ring::PrimeField(_) => Ok(FieldEmbedding {
            src: src.clone(),
            dst: dst.clone(),
            gen_image: None,
        }),
        Ring::ExtensionField(desc) => {
            // a root of the source modulus in the destination field
            let modulus: Vec<Value> = desc
                .modulus
                .iter()
                .map(|&c| dst.from_i64(c as i64))
                .collect();
            let root = dst
                .elements()
                .ok_or_else(|| Error::Unsupported("embedding needs a finite field".into()))?
                .into_iter()
                .find(|x| {
                    let mut acc = dst.zero();
                    for c in modulus.iter().rev() {
                        acc = acc.mul(x).unwrap().add(c).unwrap();
                    }
                    acc.is_zero()
                })
                .ok_or_else(|| {
                    Error::Unsupported(format!("{src} does not embed into {dst}"))
                })?;
            Ok(FieldEmbedding {
                src: src.clone(),
                dst: dst.clone(),
                gen_image: Some(root),
            })
        }
        _ => Err(Error::Unsupported("embedding source must be a finite field".into())),
    }
}

/// Conjugacy of two representations over the degree-k extension of their
/// base field: solved exactly through the intertwiner space, with an
/// invertible combination searched over a small grid (complete for
/// determinant degree 2 by finite polynomial identity testing).
pub fn conjugate_over_extension(rep1: &Representation, rep2: &Representation, k: usize) -> Result<bool> {
    if rep1.group() != rep2.group() || rep1.ring() != rep2.ring() || rep1.dim() != rep2.dim() {
        return Err(Error::Unsupported("conjugacy test needs matching shape".into()));
    }
    let basis = intertwiner_basis(rep1, rep2)?;
    if basis.is_empty() {
        return Ok(false);
    }
    let q = rep1
        .ring()
        .size()
        .ok_or_else(|| Error::Unsupported("conjugacy test needs a finite field".into()))?;
    let ext = extension_of(q, k)?;
    let emb = field_embedding(rep1.ring(), &ext)?;
    let d = rep1.dim();
    let basis_ext: Vec<SquareMatrix> = basis
        .iter()
        .map(|m| {
            let entries: Vec<Value> = m
                .entries()
                .iter()
                .map(|e| emb.apply(e))
                .collect::<Result<_>>()?;
            SquareMatrix::new(ext.clone(), d, entries)
        })
        .collect::<Result<_>>()?;

    let ext_size = ext.size().unwrap_or(u64::MAX);
    let m = basis_ext.len();
    let points: Vec<Value> = if ext_size <= 4 {
        ext.elements().unwrap()
    } else {
        // {0, 1, x} suffices: det of a combination has per-variable degree
        // <= 2 < 3
        let gen = ext
            .elements()
            .unwrap()
            .into_iter()
            .find(|v| !v.is_zero() && !v.is_one())
            .expect("field with more than 4 elements");
        vec![ext.zero(), ext.one(), gen]
    };
    let mut idx = vec![0usize; m];
    loop {
        let mut p = SquareMatrix::zero(&ext, d);
        for (i, b) in basis_ext.iter().enumerate() {
            p = p.add(&b.scale(&points[idx[i]])?)?;
        }
        if p.det().is_unit() {
            return Ok(true);
        }
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(false);
            }
            idx[pos] += 1;
            if idx[pos] < points.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub group: String,
    pub q: u64,
    pub d: usize,
    pub morphisms: u64,
    pub semisimple: u64,
    pub fingerprint_classes: u64,
    pub class_sizes: Vec<u64>,
    pub max_extension_degree: usize,
    pub violations: Vec<String>,
    pub partial: bool,
}

impl CensusReport {
    pub fn accepted(&self) -> bool {
        self.violations.is_empty() && !self.partial
    }
}

/// Enumerate every morphism of the group into GL_2(F_q), semisimplify,
/// group the semisimple ones by fingerprint (the theta table), and verify
/// that fingerprint classes are exactly conjugacy classes over F_{q^k},
/// k <= 4.
pub fn semisimple_bijection_check(group: &FiniteGroup, q: u64, budget: u64) -> Result<CensusReport> {
    let d = 2usize;
    let ring = Ring::finite_field(q)?;
    if group.order() > 12 {
        return Err(Error::Unsupported("census limited to groups of order <= 12".into()));
    }

    let mut report = CensusReport {
        group: group.name().to_string(),
        q,
        d,
        morphisms: 0,
        semisimple: 0,
        fingerprint_classes: 0,
        class_sizes: vec![],
        max_extension_degree: 1,
        violations: vec![],
        partial: false,
    };

    // all invertible 2x2 matrices
    let elements = ring.elements().expect("finite field");
    let mut invertible: Vec<SquareMatrix> = Vec::new();
    for a in &elements {
        for b in &elements {
            for c in &elements {
                for e in &elements {
                    let m = SquareMatrix::new(
                        ring.clone(),
                        2,
                        vec![a.clone(), b.clone(), c.clone(), e.clone()],
                    )?;
                    if m.det().is_unit() {
                        invertible.push(m);
                    }
                }
            }
        }
    }

    let gens = group.generators();
    let words = group.words_in_generators(&gens).expect("generating set");
    // candidate images, pruned by order divisibility: M^{ord(g)} = I
    let candidates: Vec<Vec<&SquareMatrix>> = gens
        .iter()
        .map(|&g| {
            let ord = group.element_order(g) as u64;
            invertible
                .iter()
                .filter(|m| {
                    let mut p = SquareMatrix::identity(&ring, 2);
                    for _ in 0..ord {
                        p = p.mul(m).unwrap();
                    }
                    p == SquareMatrix::identity(&ring, 2)
                })
                .collect()
        })
        .collect();
    let total: u64 = candidates.iter().map(|c| c.len() as u64).product();
    if total > budget {
        report.partial = true;
        report.violations.push(format!(
            "candidate space of size {total} exceeds the budget {budget}"
        ));
        return Ok(report);
    }

    // extend each candidate tuple through the word table, then verify
    let reps: Vec<Representation> = (0..total)
        .into_par_iter()
        .filter_map(|mut idx| {
            let mut choice = Vec::with_capacity(gens.len());
            for cand in &candidates {
                choice.push(cand[(idx % cand.len() as u64) as usize]);
                idx /= cand.len() as u64;
            }
            let images: Vec<SquareMatrix> = words
                .iter()
                .map(|w| {
                    let mut acc = SquareMatrix::identity(&ring, 2);
                    for &gi in w {
                        acc = acc.mul(choice[gi]).unwrap();
                    }
                    acc
                })
                .collect();
            Representation::new(group.clone(), ring.clone(), 2, images).ok()
        })
        .collect();
    report.morphisms = reps.len() as u64;

    // keep the semisimple ones, keyed by fingerprint
    let mut classes: BTreeMap<String, Vec<&Representation>> = BTreeMap::new();
    for rep in &reps {
        let ss = semisimplify_dim2(rep)?;
        if !ss.semisimple {
            continue;
        }
        report.semisimple += 1;
        let table = ThetaTable::from_rep(rep);
        let key = serde_json::to_string(&table.to_json())?;
        classes.entry(key).or_default().push(rep);
    }
    report.fingerprint_classes = classes.len() as u64;
    report.class_sizes = classes.values().map(|c| c.len() as u64).collect();

    // within each class: every member conjugate to the representative over
    // some F_{q^k}, k <= 4 (conjugacy is transitive through a common
    // overfield)
    for (key, members) in &classes {
        let representative = members[0];
        for member in &members[1..] {
            let mut found = None;
            for k in 1..=4 {
                match conjugate_over_extension(representative, member, k) {
                    Ok(true) => {
                        found = Some(k);
                        break;
                    }
                    Ok(false) => continue,
                    Err(_) => break, // extension beyond the supported degree
                }
            }
            match found {
                Some(k) => report.max_extension_degree = report.max_extension_degree.max(k),
                None => report.violations.push(format!(
                    "members of fingerprint class {key} are not conjugate within degree 4"
                )),
            }
        }
    }

    // distinct classes: representatives must not be conjugate at any k <= 4
    let reps_of_classes: Vec<&Representation> = classes.values().map(|c| c[0]).collect();
    for i in 0..reps_of_classes.len() {
        for j in i + 1..reps_of_classes.len() {
            for k in 1..=4 {
                if let Ok(true) = conjugate_over_extension(reps_of_classes[i], reps_of_classes[j], k) {
                    report.violations.push(format!(
                        "distinct fingerprint classes {i} and {j} are conjugate over degree {k}"
                    ));
                }
            }
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinant::check_multiplicative_homogeneous;

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

    fn f4_chi_chi2() -> Representation {
        let g = builtin_group("C3").unwrap();
        let f4 = Ring::finite_field(4).unwrap();
        let omega = order_three_unit(&f4).unwrap();
        let chi: Vec<Value> = vec![f4.one(), omega.clone(), omega.mul(&omega).unwrap()];
        let chi2: Vec<Value> = chi.iter().map(|v| v.mul(v).unwrap()).collect();
        Representation::from_character(&g, &f4, &chi)
            .unwrap()
            .direct_sum(&Representation::from_character(&g, &f4, &chi2).unwrap())
            .unwrap()
    }

    #[test]
    fn alpha_matches_rep_determinant() {
        // trivial d=2: alpha(Theta)(c e) = c^2
        let g = builtin_group("C2").unwrap();
        let z = Ring::Integers;
        let triv = Representation::trivial(&g, &z, 2);
        let a = alpha(&LafforguePC::from_rep(&triv)).unwrap();
        let x = GroupAlgebraElement::from_terms(&z, &g, vec![(0, z.from_i64(3))]).unwrap();
        assert_eq!(a.evaluate(&x.into()).unwrap(), z.from_i64(9));

        // swap rep: alpha(Theta)(e + s) = 0 = D(e + s)
        let rep = swap_rep();
        let a = alpha(&LafforguePC::from_rep(&rep)).unwrap();
        let direct = Determinant::from_rep(&rep);
        let x = GroupAlgebraElement::from_terms(&z, &g, vec![(0, z.one()), (1, z.one())]).unwrap();
        let lhs = a.evaluate(&AlgebraElement::Group(x.clone())).unwrap();
        assert!(lhs.is_zero());
        assert_eq!(lhs, direct.evaluate(&AlgebraElement::Group(x)).unwrap());
    }

    #[test]
    fn alpha_of_theta_backing_is_multiplicative() {
        let rep = f4_chi_chi2();
        let theta = LafforguePC::from_theta(ThetaTable::from_rep(&rep));
        let a = alpha(&theta).unwrap();
        let verdict = check_multiplicative_homogeneous(&a, 77, 60).unwrap();
        assert!(verdict.accepted, "{:?}", verdict.witness);
    }

    #[test]
    fn alpha_inverse_agrees_with_rep_data() {
        let rep = f4_chi_chi2();
        let det = Determinant::from_rep(&rep);
        let back = alpha_inverse(&det).unwrap();
        let direct = LafforguePC::from_rep(&rep);
        let g = rep.group().clone();
        // all Lambda generators with |w| <= 3 on all tuples
        for n in 1..=2usize {
            let mut words: Vec<Vec<usize>> = vec![vec![]];
            for _ in 0..3 {
                let mut next = Vec::new();
                for w in &words {
                    for l in 0..n {
                        let mut v = w.clone();
                        v.push(l);
                        next.push(v);
                    }
                }
                words.extend(next.clone());
                words = {
                    let mut seen = std::collections::HashSet::new();
                    words
                        .clone()
                        .into_iter()
                        .filter(|w| seen.insert(w.clone()))
                        .collect()
                };
            }
            for w in words.iter().filter(|w| !w.is_empty() && w.len() <= 3) {
                for k in 1..=2 {
                    let f = DonkinExpression::lambda_gen(n, 2, k, Word(w.clone())).unwrap();
                    // all tuples
                    let mut tuple = vec![0usize; n];
                    loop {
                        assert_eq!(
                            back.evaluate(&f, &tuple).unwrap(),
                            direct.evaluate(&f, &tuple).unwrap(),
                            "f={f:?} tuple={tuple:?}"
                        );
                        let mut pos = 0;
                        loop {
                            if pos == n {
                                break;
                            }
                            tuple[pos] += 1;
                            if tuple[pos] < g.order() {
                                break;
                            }
                            tuple[pos] = 0;
                            pos += 1;
                        }
                        if pos == n {
                            break;
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_inverse_trivial_character() {
        // d = 1 augmentation: theta(1, gamma) = -1 for all gamma
        let g = builtin_group("C4").unwrap();
        let z = Ring::Integers;
        let det = Determinant::from_rep(&Representation::trivial(&g, &z, 1));
        let back = alpha_inverse(&det).unwrap();
        let table = back.harvest().unwrap();
        for gamma in g.elements() {
            assert_eq!(*table.theta(1, gamma), z.from_i64(-1));
        }
    }

    #[test]
    fn free_domain_unit_criterion() {
        let z = Ring::Integers;
        let bad = Determinant::from_matrices(
            &z,
            2,
            vec![SquareMatrix::from_ints(&z, 2, &[1, 0, 0, 0]).unwrap()],
        )
        .unwrap();
        match alpha_inverse_set(&bad) {
            Err(Error::NotGlValued(_)) => {}
            other => panic!("expected NotGlValued, got {other:?}"),
        }
        // a unimodular assignment passes and evaluates generators
        let good = Determinant::from_matrices(
            &z,
            2,
            vec![SquareMatrix::from_ints(&z, 2, &[1, 1, 0, 1]).unwrap()],
        )
        .unwrap();
        let set_pc = alpha_inverse_set(&good).unwrap();
        let f = DonkinExpression::lambda_gen(1, 2, 1, Word::letter(0)).unwrap();
        // -trace of [[1,1],[0,1]] = -2
        assert_eq!(set_pc.evaluate(&f, &[0]).unwrap(), z.from_i64(-2));
        let dinv = DonkinExpression::det_inv(1, 2, 0).unwrap();
        assert!(set_pc.evaluate(&dinv, &[0]).unwrap().is_one());
    }

    #[test]
    fn taylor_bridge_examples() {
        let g = builtin_group("C2").unwrap();
        let f5 = Ring::prime_field(5).unwrap();
        // trivial d=2 over F5: constant table 2, accepted
        let det = Determinant::from_rep(&Representation::trivial(&g, &f5, 2));
        let t = taylor_bridge(&det).unwrap();
        assert!(t.values().iter().all(|v| *v == f5.from_i64(2)));
        assert!(is_taylor_pc(&t, CheckMode::Exhaustive).unwrap().accepted);

        // swap rep over Z: 2 is not a unit
        let det = Determinant::from_rep(&swap_rep());
        match taylor_bridge(&det) {
            Err(Error::NotAUnit(msg)) => assert!(msg.starts_with("2")),
            other => panic!("expected NotAUnit, got {other:?}"),
        }

        // same rep over F5 works: T(e) = 2, T(s) = 0
        let f5_rep = Representation::new(
            g.clone(),
            f5.clone(),
            2,
            vec![
                SquareMatrix::identity(&f5, 2),
                SquareMatrix::from_ints(&f5, 2, &[0, 1, 1, 0]).unwrap(),
            ],
        )
        .unwrap();
        let t = taylor_bridge(&Determinant::from_rep(&f5_rep)).unwrap();
        assert_eq!(t.value(0), &f5.from_i64(2));
        assert!(t.value(1).is_zero());
        assert!(is_taylor_pc(&t, CheckMode::Exhaustive).unwrap().accepted);

        // d = 2 over F2: rejected with the obstruction prime
        let f2 = Ring::prime_field(2).unwrap();
        let det = Determinant::from_rep(&Representation::trivial(&g, &f2, 2));
        assert!(matches!(taylor_bridge(&det), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn roundtrip_simple_inputs() {
        // trivial d = 1
        let g = builtin_group("C3").unwrap();
        let rep = Representation::trivial(&g, &Ring::Integers, 1);
        let report = roundtrip_check(RoundtripInput::Rep(rep), 3).unwrap();
        assert!(report.accepted(), "{:?}", report.defects);

        // chi + chi^2 over F4
        let report = roundtrip_check(RoundtripInput::Rep(f4_chi_chi2()), 4).unwrap();
        assert!(report.accepted(), "{:?}", report.defects);
    }

    #[test]
    fn roundtrip_detects_corruption() {
        let rep = f4_chi_chi2();
        let table = ThetaTable::from_rep(&rep);
        let f4 = table.ring.clone();
        let omega = order_three_unit(&f4).unwrap();
        // corrupt the det row at g, keeping it a unit
        let corrupted = table
            .with_entry(2, 1, table.theta(2, 1).add(&omega).unwrap())
            .unwrap();
        let report = roundtrip_check(RoundtripInput::Theta(corrupted), 5).unwrap();
        assert!(!report.accepted());
    }

    #[test]
    fn separation_demo_pins_values() {
        let report = char_p_separation_demo().unwrap();
        assert!(report.defects.is_empty(), "{:?}", report.defects);
        assert!(report.traces_equal);
        assert!(!report.determinants_equal);
        assert!(report.semisimple);
        assert!(report.non_conjugate);
        assert!(report.control_traces_distinct);
    }

    #[test]
    fn semisimplify_unipotent_collision() {
        // [[1,1],[0,1]] for C2 over F2: one stable line, not semisimple,
        // fingerprint equal to the doubled trivial character
        let g = builtin_group("C2").unwrap();
        let f2 = Ring::prime_field(2).unwrap();
        let rep = Representation::new(
            g.clone(),
            f2.clone(),
            2,
            vec![
                SquareMatrix::identity(&f2, 2),
                SquareMatrix::from_ints(&f2, 2, &[1, 1, 0, 1]).unwrap(),
            ],
        )
        .unwrap();
        let ss = semisimplify_dim2(&rep).unwrap();
        assert!(!ss.semisimple);
        assert_eq!(ss.stable_lines, 1);
        let trivial2 = Representation::trivial(&g, &f2, 2);
        let a = ThetaTable::from_rep(&rep);
        let b = ThetaTable::from_rep(&trivial2);
        for k in 1..=2 {
            for gamma in g.elements() {
                assert_eq!(a.theta(k, gamma), b.theta(k, gamma));
            }
        }
    }

    #[test]
    fn census_c2_over_f3() {
        let g = builtin_group("C2").unwrap();
        let report = semisimple_bijection_check(&g, 3, 1_000_000).unwrap();
        assert!(report.accepted(), "{:?}", report.violations);
        // 1 + sgn classes: trivial^2, trivial + sgn, sgn^2
        assert_eq!(report.fingerprint_classes, 3);
        assert_eq!(report.morphisms, 14); // I, -I, and 12 split involutions
        assert_eq!(report.semisimple, 14);
    }

    #[test]
    fn census_c3_over_f4() {
        let g = builtin_group("C3").unwrap();
        let report = semisimple_bijection_check(&g, 4, 1_000_000).unwrap();
        assert!(report.accepted(), "{:?}", report.violations);
        // multisets of two characters out of three: C(3,2) + 3 = 6
        assert_eq!(report.fingerprint_classes, 6);
    }

    #[test]
    fn field_embeddings_are_ring_maps() {
        let f4 = Ring::finite_field(4).unwrap();
        let f16 = extension_of(4, 2).unwrap();
        let emb = field_embedding(&f4, &f16).unwrap();
        let els = f4.elements().unwrap();
        for a in &els {
            for b in &els {
                let sum = emb.apply(&a.add(b).unwrap()).unwrap();
                assert_eq!(sum, emb.apply(a).unwrap().add(&emb.apply(b).unwrap()).unwrap());
                let prod = emb.apply(&a.mul(b).unwrap()).unwrap();
                assert_eq!(prod, emb.apply(a).unwrap().mul(&emb.apply(b).unwrap()).unwrap());
            }
        }
    }
}
