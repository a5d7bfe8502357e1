//! GL_d pseudocharacter data: conjugation-invariant functions of matrix
//! tuples, represented syntactically through Donkin generators
//! Lambda_k(g_{i_1}...g_{i_r}) and det(g_i)^{-1}, together with the
//! relabeling (LPC1) and concatenation (LPC2) defect checkers and a
//! randomized conjugation-invariance test.
//!
//! Representing invariant functions by generators rather than raw entry
//! polynomials makes relabeling structural and reduces the concatenation
//! condition to word coherence in the value data. Completeness of this
//! presentation for the localized invariant ring is a generation theorem,
//! used here, not re-proved.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::group::{cyclic_canonical, evaluate_word_in_group, FiniteGroup, Word};
use crate::matrix::SquareMatrix;
use crate::rep::Representation;
use crate::ring::{Ring, Value};
use crate::sample::Sampler;

/// A formal generator of the invariant-function algebra on d x d tuples.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    /// Lambda_k of the matrix product along the word (letters are slots).
    Lambda { k: usize, word: Word },
    /// det(g_slot)^{-1}.
    DetInv { slot: usize },
}

/// An integer polynomial in the formal generators, for a fixed arity n and
/// matrix size d. Words are stored cyclically canonical; the relation
/// det(g_i) = (-1)^d Lambda_d(g_i) lets the normalizer cancel
/// DetInv(i) * Lambda_d((i)) pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DonkinExpression {
    n: usize,
    d: usize,
    /// Sorted monomials: (coefficient, sorted generator multiset).
    terms: Vec<(BigInt, Vec<Gen>)>,
}

impl DonkinExpression {
    pub fn zero(n: usize, d: usize) -> Self {
        DonkinExpression { n, d, terms: vec![] }
    }

    pub fn constant(n: usize, d: usize, c: i64) -> Self {
        let mut e = Self::zero(n, d);
        if c != 0 {
            e.terms.push((BigInt::from(c), vec![]));
        }
        e
    }

    pub fn lambda_gen(n: usize, d: usize, k: usize, word: Word) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::InvalidExpression(format!("Lambda index {k} outside 1..={d}")));
        }
        if word.max_letter().map(|l| l >= n).unwrap_or(false) {
            return Err(Error::InvalidExpression(format!(
                "word uses letters beyond arity {n}"
            )));
        }
        Ok(DonkinExpression {
            n,
            d,
            terms: vec![(
                BigInt::one(),
                vec![Gen::Lambda {
                    k,
                    word: cyclic_canonical(&word),
                }],
            )],
        })
    }

    pub fn det_inv(n: usize, d: usize, slot: usize) -> Result<Self> {
        if slot >= n {
            return Err(Error::InvalidExpression(format!("slot {slot} beyond arity {n}")));
        }
        Ok(DonkinExpression {
            n,
            d,
            terms: vec![(BigInt::one(), vec![Gen::DetInv { slot }])],
        })
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[(BigInt, Vec<Gen>)] {
        &self.terms
    }

    fn check_compat(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::ArityMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self::from_raw_terms(self.n, self.d, terms))
    }

    pub fn neg(&self) -> Self {
        DonkinExpression {
            n: self.n,
            d: self.d,
            terms: self.terms.iter().map(|(c, g)| (-c, g.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let mut terms = Vec::new();
        for (c1, g1) in &self.terms {
            for (c2, g2) in &other.terms {
                let mut gens = g1.clone();
                gens.extend(g2.iter().cloned());
                terms.push((c1 * c2, gens));
            }
        }
        Ok(Self::from_raw_terms(self.n, self.d, terms))
    }

    pub fn scale(&self, c: i64) -> Self {
        let c = BigInt::from(c);
        DonkinExpression {
            n: self.n,
            d: self.d,
            terms: if c.is_zero() {
                vec![]
            } else {
                self.terms.iter().map(|(c0, g)| (c0 * &c, g.clone())).collect()
            },
        }
    }

    /// Canonicalize raw terms: canonical words, DetInv cancellation, sorted
    /// generator multisets, merged monomials, no zero coefficients.
    pub(crate) fn from_raw_terms(n: usize, d: usize, raw: Vec<(BigInt, Vec<Gen>)>) -> Self {
        let mut acc: std::collections::BTreeMap<Vec<Gen>, BigInt> = std::collections::BTreeMap::new();
        for (coeff, gens) in raw {
            let (coeff, gens) = normalize_monomial(d, coeff, gens);
            if coeff.is_zero() {
                continue;
            }
            let entry = acc.entry(gens).or_insert_with(BigInt::zero);
            *entry += coeff;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(g, c)| (c, g))
            .collect();
        DonkinExpression { n, d, terms }
    }

    /// Relabel slots through zeta (an arbitrary map into a new arity) and
    /// re-canonicalize.
    pub fn relabel(&self, zeta: &[usize], new_arity: usize) -> Result<Self> {
        if zeta.len() != self.n {
            return Err(Error::ArityMismatch {
                expected: self.n,
                got: zeta.len(),
            });
        }
        if zeta.iter().any(|&z| z >= new_arity) {
            return Err(Error::InvalidExpression("relabel target out of range".into()));
        }
        let raw = self
            .terms
            .iter()
            .map(|(c, gens)| {
                let gens = gens
                    .iter()
                    .map(|g| match g {
                        Gen::Lambda { k, word } => Gen::Lambda {
                            k: *k,
                            word: Word(word.0.iter().map(|&l| zeta[l]).collect()),
                        },
                        Gen::DetInv { slot } => Gen::DetInv { slot: zeta[*slot] },
                    })
                    .collect();
                (c.clone(), gens)
            })
            .collect();
        Ok(Self::from_raw_terms(new_arity, self.d, raw))
    }

    /// The concatenation lift: arity n -> n+1, substituting the two-letter
    /// sequence (n-1, n) for the last slot. DetInv of the last slot becomes
    /// a product of the two inverse determinants.
    pub fn concat_last_slot(&self) -> Result<Self> {
        if self.n == 0 {
            return Err(Error::InvalidExpression("needs at least one slot".into()));
        }
        let last = self.n - 1;
        let raw = self
            .terms
            .iter()
            .map(|(c, gens)| {
                let mut out = Vec::with_capacity(gens.len());
                for g in gens {
                    match g {
                        Gen::Lambda { k, word } => {
                            let mut letters = Vec::with_capacity(word.0.len() + 2);
                            for &l in &word.0 {
                                if l == last {
                                    letters.push(last);
                                    letters.push(last + 1);
                                } else {
                                    letters.push(l);
                                }
                            }
                            out.push(Gen::Lambda {
                                k: *k,
                                word: Word(letters),
                            });
                        }
                        Gen::DetInv { slot } => {
                            if *slot == last {
                                out.push(Gen::DetInv { slot: last });
                                out.push(Gen::DetInv { slot: last + 1 });
                            } else {
                                out.push(Gen::DetInv { slot: *slot });
                            }
                        }
                    }
                }
                (c.clone(), out)
            })
            .collect();
        Ok(Self::from_raw_terms(self.n + 1, self.d, raw))
    }

    /// Serialization: {"n":, "terms": [[coeff, [["L", k, word] | ["Dinv", i], ...]], ...]}
    /// with 1-based letters and slots.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(c, gens)| {
                let gjson: Vec<serde_json::Value> = gens.iter().map(gen_to_json).collect();
                json!([bigint_to_json(c), gjson])
            })
            .collect();
        json!({"n": self.n, "terms": terms})
    }

    pub fn from_json(d: usize, v: &serde_json::Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(|n| n.as_u64())
            .ok_or_else(|| Error::Serialization("expression needs n".into()))? as usize;
        let terms = v
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::Serialization("expression needs terms".into()))?;
        let mut raw = Vec::new();
        for t in terms {
            let pair = t
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Serialization("term must be [coeff, gens]".into()))?;
            let coeff = json_to_bigint(&pair[0])?;
            let gens = pair[1]
                .as_array()
                .ok_or_else(|| Error::Serialization("gens must be an array".into()))?
                .iter()
                .map(|g| gen_from_json(n, d, g))
                .collect::<Result<Vec<_>>>()?;
            raw.push((coeff, gens));
        }
        Ok(Self::from_raw_terms(n, d, raw))
    }
}

fn normalize_monomial(d: usize, mut coeff: BigInt, gens: Vec<Gen>) -> (BigInt, Vec<Gen>) {
    let mut gens: Vec<Gen> = gens
        .into_iter()
        .map(|g| match g {
            Gen::Lambda { k, word } => Gen::Lambda {
                k,
                word: cyclic_canonical(&word),
            },
            other => other,
        })
        .collect();
    gens.sort();
    // cancel DetInv(i) against Lambda_d((i)) via det(g) = (-1)^d Lambda_d(g)
    loop {
        let mut cancelled = false;
        'outer: for i in 0..gens.len() {
            if let Gen::DetInv { slot } = gens[i] {
                for j in 0..gens.len() {
                    if let Gen::Lambda { k, ref word } = gens[j] {
                        if k == d && word.0.len() == 1 && word.0[0] == slot {
                            let mut kept = Vec::with_capacity(gens.len() - 2);
                            for (idx, g) in gens.iter().enumerate() {
                                if idx != i && idx != j {
                                    kept.push(g.clone());
                                }
                            }
                            gens = kept;
                            if d % 2 == 1 {
                                coeff = -coeff;
                            }
                            cancelled = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        if !cancelled {
            break;
        }
    }
    (coeff, gens)
}

pub(crate) fn gen_to_json(g: &Gen) -> serde_json::Value {
    use serde_json::json;
    match g {
        Gen::Lambda { k, word } => {
            let letters: Vec<u64> = word.0.iter().map(|&l| (l + 1) as u64).collect();
            json!(["L", k, letters])
        }
        Gen::DetInv { slot } => json!(["Dinv", slot + 1]),
    }
}

pub(crate) fn gen_from_json(n: usize, d: usize, v: &serde_json::Value) -> Result<Gen> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Serialization("generator must be an array".into()))?;
    let tag = arr
        .first()
        .and_then(|t| t.as_str())
        .ok_or_else(|| Error::Serialization("generator needs a tag".into()))?;
    match tag {
        "L" => {
            if arr.len() != 3 {
                return Err(Error::Serialization("L generator needs [\"L\", k, word]".into()));
            }
            let k = arr[1]
                .as_u64()
                .ok_or_else(|| Error::Serialization("bad Lambda index".into()))? as usize;
            if k == 0 || k > d {
                return Err(Error::Serialization(format!("Lambda index {k} outside 1..={d}")));
            }
            let letters = arr[2]
                .as_array()
                .ok_or_else(|| Error::Serialization("bad word".into()))?
                .iter()
                .map(|l| {
                    let l = l
                        .as_u64()
                        .ok_or_else(|| Error::Serialization("bad letter".into()))?
                        as usize;
                    if l == 0 || l > n {
                        return Err(Error::Serialization(format!("letter {l} outside 1..={n}")));
                    }
                    Ok(l - 1)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Gen::Lambda {
                k,
                word: Word(letters),
            })
        }
        "Dinv" => {
            let slot = arr
                .get(1)
                .and_then(|s| s.as_u64())
                .ok_or_else(|| Error::Serialization("bad Dinv slot".into()))? as usize;
            if slot == 0 || slot > n {
                return Err(Error::Serialization(format!("slot {slot} outside 1..={n}")));
            }
            Ok(Gen::DetInv { slot: slot - 1 })
        }
        other => Err(Error::Serialization(format!("unknown generator tag {other}"))),
    }
}

fn bigint_to_json(c: &BigInt) -> serde_json::Value {
    use num_traits::ToPrimitive;
    match c.to_i64() {
        Some(i) => serde_json::json!(i),
        None => serde_json::json!(c.to_string()),
    }
}

fn json_to_bigint(v: &serde_json::Value) -> Result<BigInt> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Serialization("bad coefficient".into())),
        serde_json::Value::String(s) => s
            .parse()
            .map_err(|_| Error::Serialization("bad coefficient".into())),
        _ => Err(Error::Serialization("bad coefficient".into())),
    }
}

/// Assigns ring values to the formal generators at a fixed tuple.
pub trait GenValuation {
    fn dim(&self) -> usize;
    fn lambda(&self, k: usize, word: &Word) -> Result<Value>;
    fn det_inv(&self, slot: usize) -> Result<Value>;
}

/// Evaluate an expression under a valuation, landing in `target` (an
/// extension of the valuation's value ring). Substitution on generators is a
/// ring morphism by construction.
pub fn evaluate_expression(
    expr: &DonkinExpression,
    valuation: &dyn GenValuation,
    target: &Ring,
) -> Result<Value> {
    let mut acc = target.zero();
    for (coeff, gens) in &expr.terms {
        let mut term = target.from_int(coeff);
        for g in gens {
            let v = match g {
                Gen::Lambda { k, word } => valuation.lambda(*k, word)?,
                Gen::DetInv { slot } => valuation.det_inv(*slot)?,
            };
            term = term.mul(&v.embed(target)?)?;
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Valuation through a representation: generators evaluate on the matrix
/// tuple (rho(gamma_1), ..., rho(gamma_n)).
pub struct RepValuation<'a> {
    pub rep: &'a Representation,
    pub tuple: &'a [usize],
}

impl GenValuation for RepValuation<'_> {
    fn dim(&self) -> usize {
        self.rep.dim()
    }

    fn lambda(&self, k: usize, word: &Word) -> Result<Value> {
        let d = self.rep.dim();
        let ring = self.rep.ring();
        let mut m = SquareMatrix::identity(ring, d);
        for &l in &word.0 {
            let g = *self.tuple.get(l).ok_or(Error::ArityMismatch {
                expected: l + 1,
                got: self.tuple.len(),
            })?;
            m = m.mul(self.rep.image(g))?;
        }
        Ok(m.charpoly().lambdas[k].clone())
    }

    fn det_inv(&self, slot: usize) -> Result<Value> {
        let g = *self.tuple.get(slot).ok_or(Error::ArityMismatch {
            expected: slot + 1,
            got: self.tuple.len(),
        })?;
        let det = self.rep.image(g).det();
        det.inverse()
            .ok_or_else(|| Error::NotAUnit(format!("det of image of element {g}")))
    }
}

/// Valuation on a raw matrix tuple (no group in sight); used by the
/// conjugation-invariance test.
pub struct MatrixValuation<'a> {
    pub mats: &'a [SquareMatrix],
    pub d: usize,
    pub ring: Ring,
}

impl GenValuation for MatrixValuation<'_> {
    fn dim(&self) -> usize {
        self.d
    }

    fn lambda(&self, k: usize, word: &Word) -> Result<Value> {
        let mut m = SquareMatrix::identity(&self.ring, self.d);
        for &l in &word.0 {
            m = m.mul(&self.mats[l])?;
        }
        Ok(m.charpoly().lambdas[k].clone())
    }

    fn det_inv(&self, slot: usize) -> Result<Value> {
        self.mats[slot]
            .det()
            .inverse()
            .ok_or_else(|| Error::NotAUnit(format!("det of slot {slot}")))
    }
}

/// The finite datum of a GL_d pseudocharacter on a group: the values
/// theta(k, gamma) of Lambda_k at single elements, k = 1..d. Construction
/// enforces theta(k, e) = C(d, k) (-1)^k and that the top row consists of
/// units (so inverse determinants evaluate).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaTable {
    pub group: FiniteGroup,
    pub ring: Ring,
    pub d: usize,
    /// values[k-1][g] = theta(k, g)
    values: Vec<Vec<Value>>,
}

impl ThetaTable {
    pub fn new(group: FiniteGroup, ring: Ring, d: usize, values: Vec<Vec<Value>>) -> Result<ThetaTable> {
        if values.len() != d || values.iter().any(|row| row.len() != group.order()) {
            return Err(Error::InvalidExpression("theta table has wrong shape".into()));
        }
        let e = group.identity();
        for k in 1..=d {
            let expect = identity_lambda(&ring, d, k);
            if values[k - 1][e] != expect {
                return Err(Error::InvalidExpression(format!(
                    "theta({k}, e) must be {expect}, got {}",
                    values[k - 1][e]
                )));
            }
            for v in &values[k - 1] {
                if *v.ring() != ring {
                    return Err(Error::RingMismatch(ring.to_string(), v.ring().to_string()));
                }
            }
        }
        for (g, v) in values[d - 1].iter().enumerate() {
            if !v.is_unit() {
                return Err(Error::NotAUnit(format!("theta({d}, {g}) = {v}")));
            }
        }
        Ok(ThetaTable { group, ring, d, values })
    }

    pub fn from_rep(rep: &Representation) -> ThetaTable {
        let d = rep.dim();
        let values: Vec<Vec<Value>> = (1..=d)
            .map(|k| {
                rep.group()
                    .elements()
                    .map(|g| rep.image(g).charpoly().lambdas[k].clone())
                    .collect()
            })
            .collect();
        ThetaTable {
            group: rep.group().clone(),
            ring: rep.ring().clone(),
            d,
            values,
        }
    }

    pub fn theta(&self, k: usize, g: usize) -> &Value {
        &self.values[k - 1][g]
    }

    /// A copy with one entry replaced; re-validated.
    pub fn with_entry(&self, k: usize, g: usize, v: Value) -> Result<ThetaTable> {
        let mut values = self.values.clone();
        values[k - 1][g] = v;
        ThetaTable::new(self.group.clone(), self.ring.clone(), self.d, values)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut rows = serde_json::Map::new();
        for k in 1..=self.d {
            rows.insert(
                k.to_string(),
                serde_json::Value::Array(self.values[k - 1].iter().map(|v| v.to_json()).collect()),
            );
        }
        serde_json::Value::Object(rows)
    }
}

/// Lambda_k of the identity matrix: C(d, k) (-1)^k.
pub fn identity_lambda(ring: &Ring, d: usize, k: usize) -> Value {
    let b = num_integer::binomial(BigInt::from(d), BigInt::from(k));
    let v = ring.from_int(&b);
    if k % 2 == 1 {
        v.neg()
    } else {
        v
    }
}

pub struct ThetaValuation<'a> {
    pub table: &'a ThetaTable,
    pub tuple: &'a [usize],
}

impl GenValuation for ThetaValuation<'_> {
    fn dim(&self) -> usize {
        self.table.d
    }

    fn lambda(&self, k: usize, word: &Word) -> Result<Value> {
        let g = evaluate_word_in_group(&self.table.group, word, self.tuple)?;
        Ok(self.table.theta(k, g).clone())
    }

    fn det_inv(&self, slot: usize) -> Result<Value> {
        let g = *self.tuple.get(slot).ok_or(Error::ArityMismatch {
            expected: slot + 1,
            got: self.tuple.len(),
        })?;
        let d = self.table.d;
        let mut det = self.table.theta(d, g).clone();
        if d % 2 == 1 {
            det = det.neg();
        }
        det.inverse()
            .ok_or_else(|| Error::NotAUnit(format!("theta({d}, {g})")))
    }
}

/// A GL_d pseudocharacter of a finite group, backed either by a
/// representation or by a theta table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LafforguePC {
    group: FiniteGroup,
    ring: Ring,
    d: usize,
    backing: LpcBacking,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpcBacking {
    Rep(Representation),
    Theta(ThetaTable),
}

impl LafforguePC {
    pub fn from_rep(rep: &Representation) -> LafforguePC {
        LafforguePC {
            group: rep.group().clone(),
            ring: rep.ring().clone(),
            d: rep.dim(),
            backing: LpcBacking::Rep(rep.clone()),
        }
    }

    pub fn from_theta(table: ThetaTable) -> LafforguePC {
        LafforguePC {
            group: table.group.clone(),
            ring: table.ring.clone(),
            d: table.d,
            backing: LpcBacking::Theta(table),
        }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn backing(&self) -> &LpcBacking {
        &self.backing
    }

    /// Apply Theta_n(f) at a tuple.
    pub fn evaluate(&self, f: &DonkinExpression, tuple: &[usize]) -> Result<Value> {
        self.evaluate_in(f, tuple, &self.ring)
    }

    /// Same, landing in an extension ring.
    pub fn evaluate_in(&self, f: &DonkinExpression, tuple: &[usize], target: &Ring) -> Result<Value> {
        if f.arity() != tuple.len() {
            return Err(Error::ArityMismatch {
                expected: f.arity(),
                got: tuple.len(),
            });
        }
        if f.dim() != self.d {
            return Err(Error::ArityMismatch {
                expected: self.d,
                got: f.dim(),
            });
        }
        match &self.backing {
            LpcBacking::Rep(rep) => {
                evaluate_expression(f, &RepValuation { rep, tuple }, target)
            }
            LpcBacking::Theta(table) => {
                evaluate_expression(f, &ThetaValuation { table, tuple }, target)
            }
        }
    }

    /// The theta table of this pseudocharacter (its fingerprint).
    pub fn harvest(&self) -> Result<ThetaTable> {
        match &self.backing {
            LpcBacking::Theta(t) => Ok(t.clone()),
            LpcBacking::Rep(rep) => Ok(ThetaTable::from_rep(rep)),
        }
    }

    /// LPC1 defect: Theta_m(f)(gamma_{zeta(1)}..) - Theta_n(f^zeta)(gamma_1..).
    /// Relabeling is structural for both backings up to cyclic
    /// re-canonicalization, which is sound whenever theta is a class
    /// function (always, for representation-backed data).
    pub fn lpc1_defect(
        &self,
        f: &DonkinExpression,
        zeta: &[usize],
        tuple: &[usize],
    ) -> Result<Value> {
        let selected: Vec<usize> = zeta
            .iter()
            .map(|&z| {
                tuple.get(z).copied().ok_or(Error::ArityMismatch {
                    expected: z + 1,
                    got: tuple.len(),
                })
            })
            .collect::<Result<_>>()?;
        let lhs = self.evaluate(f, &selected)?;
        let relabeled = f.relabel(zeta, tuple.len())?;
        let rhs = self.evaluate(&relabeled, tuple)?;
        lhs.sub(&rhs)
    }

    /// LPC2 defect: Theta_{n+1}(f-hat)(gamma_1..gamma_{n+1}) minus
    /// Theta_n(f)(gamma_1.., gamma_n gamma_{n+1}).
    pub fn lpc2_defect(&self, f: &DonkinExpression, tuple: &[usize]) -> Result<Value> {
        let n = f.arity();
        if tuple.len() != n + 1 {
            return Err(Error::ArityMismatch {
                expected: n + 1,
                got: tuple.len(),
            });
        }
        let hat = f.concat_last_slot()?;
        let lhs = self.evaluate(&hat, tuple)?;
        let mut merged: Vec<usize> = tuple[..n - 1].to_vec();
        merged.push(self.group.mul(tuple[n - 1], tuple[n]));
        let rhs = self.evaluate(f, &merged)?;
        lhs.sub(&rhs)
    }
}

/// A probe for the conjugation-invariance test: either a genuine invariant
/// expression or a raw matrix entry (which must fail).
#[derive(Clone, Debug)]
pub enum InvarianceProbe {
    Expr(DonkinExpression),
    Entry { slot: usize, row: usize, col: usize },
}

#[derive(Clone, Debug)]
pub struct PitVerdict {
    pub invariant: bool,
    pub trials: usize,
    /// Description of the conjugating matrix that changed the value.
    pub witness: Option<String>,
}

/// Randomized conjugation-invariance check over F_p: evaluates the probe on
/// random invertible tuples and on their simultaneous conjugates. A
/// disagreement is definitive; agreement on all trials is the usual
/// polynomial-identity-testing verdict.
pub fn invariance_pit(
    probe: &InvarianceProbe,
    d: usize,
    p: u64,
    trials: usize,
    seed: u64,
) -> Result<PitVerdict> {
    if p < 101 {
        return Err(Error::Unsupported("invariance testing wants p >= 101".into()));
    }
    let ring = Ring::prime_field(p)?;
    let n = match probe {
        InvarianceProbe::Expr(f) => f.arity(),
        InvarianceProbe::Entry { slot, .. } => slot + 1,
    };
    let mut sampler = Sampler::new(seed);
    for t in 0..trials {
        let mats: Vec<SquareMatrix> = (0..n).map(|_| sampler.invertible_matrix(&ring, d)).collect();
        let conj = sampler.invertible_matrix(&ring, d);
        let conj_inv = conj.inverse().expect("sampled invertible");
        let conjugated: Vec<SquareMatrix> = mats
            .iter()
            .map(|m| conj.mul(m).unwrap().mul(&conj_inv).unwrap())
            .collect();
        let eval = |ms: &[SquareMatrix]| -> Result<Value> {
            match probe {
                InvarianceProbe::Expr(f) => evaluate_expression(
                    f,
                    &MatrixValuation {
                        mats: ms,
                        d,
                        ring: ring.clone(),
                    },
                    &ring,
                ),
                InvarianceProbe::Entry { slot, row, col } => Ok(ms[*slot].entry(*row, *col).clone()),
            }
        };
        let a = eval(&mats)?;
        let b = eval(&conjugated)?;
        if a != b {
            return Ok(PitVerdict {
                invariant: false,
                trials: t + 1,
                witness: Some(format!(
                    "trial {t}: conjugation by {:?} changed the value from {a} to {b}",
                    conj.entries().iter().map(|e| e.to_string()).collect::<Vec<_>>()
                )),
            });
        }
    }
    Ok(PitVerdict {
        invariant: true,
        trials,
        witness: None,
    })
}

/// A random expression mixing Lambda generators and (optionally) inverse
/// determinants; used by the property suites.
pub fn random_expression(
    sampler: &mut Sampler,
    n: usize,
    d: usize,
    allow_det_inv: bool,
) -> DonkinExpression {
    let mut expr = DonkinExpression::zero(n, d);
    let nterms = 1 + sampler.usize(2);
    for _ in 0..nterms {
        let mut term = DonkinExpression::constant(n, d, sampler.usize(5) as i64 - 2);
        if term.terms.is_empty() {
            term = DonkinExpression::constant(n, d, 1);
        }
        let ngens = 1 + sampler.usize(2);
        for _ in 0..ngens {
            let use_detinv = allow_det_inv && sampler.usize(3) == 0;
            let g = if use_detinv {
                DonkinExpression::det_inv(n, d, sampler.usize(n)).unwrap()
            } else {
                let k = 1 + sampler.usize(d);
                let mut w = sampler.word(n, 3);
                if w.is_empty() {
                    w = Word::letter(sampler.usize(n));
                }
                DonkinExpression::lambda_gen(n, d, k, w).unwrap()
            };
            term = term.mul(&g).unwrap();
        }
        expr = expr.add(&term).unwrap();
    }
    expr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin_group;
    use crate::sample::standard_s3_representation;

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
    fn lambda_of_trivial_rep() {
        // f = Lambda_1(g_1) evaluates to -trace = -2 on the trivial 2-dim rep
        let g = builtin_group("C3").unwrap();
        let rep = Representation::trivial(&g, &Ring::Integers, 2);
        let pc = LafforguePC::from_rep(&rep);
        let f = DonkinExpression::lambda_gen(1, 2, 1, Word::letter(0)).unwrap();
        for gamma in g.elements() {
            assert_eq!(pc.evaluate(&f, &[gamma]).unwrap(), Ring::Integers.from_i64(-2));
        }
    }

    #[test]
    fn lambda_on_inverse_pair() {
        // f = Lambda_1(g_1 g_2) at (gamma, gamma^{-1}) = -trace(I) = -d
        let rep = standard_s3_representation(&Ring::Integers).unwrap();
        let pc = LafforguePC::from_rep(&rep);
        let f = DonkinExpression::lambda_gen(2, 2, 1, Word(vec![0, 1])).unwrap();
        let g = rep.group().clone();
        for gamma in g.elements() {
            let inv = g.inverse_of(gamma);
            assert_eq!(pc.evaluate(&f, &[gamma, inv]).unwrap(), Ring::Integers.from_i64(-2));
        }
    }

    #[test]
    fn det_inv_of_swap() {
        let rep = swap_rep();
        let pc = LafforguePC::from_rep(&rep);
        let f = DonkinExpression::det_inv(1, 2, 0).unwrap();
        // det of the swap matrix is -1, whose inverse is -1
        assert_eq!(pc.evaluate(&f, &[1]).unwrap(), Ring::Integers.from_i64(-1));
    }

    #[test]
    fn theta_backed_agrees_with_rep_backed() {
        let rep = standard_s3_representation(&Ring::prime_field(7).unwrap()).unwrap();
        let rep_pc = LafforguePC::from_rep(&rep);
        let theta_pc = LafforguePC::from_theta(ThetaTable::from_rep(&rep));
        let mut s = Sampler::new(5);
        for _ in 0..200 {
            let n = 1 + s.usize(3);
            let f = random_expression(&mut s, n, 2, true);
            let tuple = s.group_tuple(rep.group(), n);
            assert_eq!(
                rep_pc.evaluate(&f, &tuple).unwrap(),
                theta_pc.evaluate(&f, &tuple).unwrap()
            );
        }
    }

    #[test]
    fn evaluation_is_algebra_morphism() {
        let rep = standard_s3_representation(&Ring::prime_field(11).unwrap()).unwrap();
        for pc in [
            LafforguePC::from_rep(&rep),
            LafforguePC::from_theta(ThetaTable::from_rep(&rep)),
        ] {
            let mut s = Sampler::new(17);
            for _ in 0..100 {
                let n = 1 + s.usize(2);
                let f = random_expression(&mut s, n, 2, true);
                let g = random_expression(&mut s, n, 2, true);
                let tuple = s.group_tuple(rep.group(), n);
                let sum = pc.evaluate(&f.add(&g).unwrap(), &tuple).unwrap();
                let prod = pc.evaluate(&f.mul(&g).unwrap(), &tuple).unwrap();
                let fa = pc.evaluate(&f, &tuple).unwrap();
                let ga = pc.evaluate(&g, &tuple).unwrap();
                assert_eq!(sum, fa.add(&ga).unwrap());
                assert_eq!(prod, fa.mul(&ga).unwrap());
            }
        }
    }

    #[test]
    fn detinv_lambda_cancellation() {
        // Lambda_d((i)) * DetInv(i) normalizes to the constant (-1)^d and
        // evaluation respects the relation
        let f = DonkinExpression::lambda_gen(1, 2, 2, Word::letter(0))
            .unwrap()
            .mul(&DonkinExpression::det_inv(1, 2, 0).unwrap())
            .unwrap();
        assert_eq!(f, DonkinExpression::constant(1, 2, 1));
        let f3 = DonkinExpression::lambda_gen(1, 3, 3, Word::letter(0))
            .unwrap()
            .mul(&DonkinExpression::det_inv(1, 3, 0).unwrap())
            .unwrap();
        assert_eq!(f3, DonkinExpression::constant(1, 3, -1));
    }

    #[test]
    fn cyclic_rotation_soundness_rep_backed() {
        // Theta(Lambda_k(w)) is rotation-invariant for representation-backed
        // data, by charpoly(MN) = charpoly(NM)
        let rep = standard_s3_representation(&Ring::prime_field(7).unwrap()).unwrap();
        let pc = LafforguePC::from_rep(&rep);
        let mut s = Sampler::new(23);
        for _ in 0..100 {
            let n = 1 + s.usize(3);
            let mut w = s.word(n, 4);
            if w.is_empty() {
                w = Word::letter(0);
            }
            let k = 1 + s.usize(2);
            let tuple = s.group_tuple(rep.group(), n);
            let f = DonkinExpression::lambda_gen(n, 2, k, w.clone()).unwrap();
            let mut rotated = w.0.clone();
            let shift = 1.min(rotated.len());
            rotated.rotate_left(shift);
            let f_rot = DonkinExpression::lambda_gen(n, 2, k, Word(rotated)).unwrap();
            assert_eq!(pc.evaluate(&f, &tuple).unwrap(), pc.evaluate(&f_rot, &tuple).unwrap());
        }
    }

    #[test]
    fn lpc1_identity_relabel_is_zero() {
        let rep = swap_rep();
        let pc = LafforguePC::from_rep(&rep);
        let f = DonkinExpression::lambda_gen(2, 2, 1, Word(vec![0, 1])).unwrap();
        let defect = pc.lpc1_defect(&f, &[0, 1], &[0, 1]).unwrap();
        assert!(defect.is_zero());
    }

    #[test]
    fn lpc1_zero_on_random_rep_backed() {
        let rep = standard_s3_representation(&Ring::prime_field(5).unwrap()).unwrap();
        let pc = LafforguePC::from_rep(&rep);
        let mut s = Sampler::new(31);
        for _ in 0..200 {
            let m = 1 + s.usize(3);
            let n = 1 + s.usize(3);
            let f = random_expression(&mut s, m, 2, true);
            let zeta: Vec<usize> = (0..m).map(|_| s.usize(n)).collect();
            let tuple = s.group_tuple(rep.group(), n);
            let defect = pc.lpc1_defect(&f, &zeta, &tuple).unwrap();
            assert!(defect.is_zero(), "f={f:?} zeta={zeta:?} tuple={tuple:?}");
        }
    }

    #[test]
    fn lpc1_structural_for_theta_backed_single_letters() {
        // collapsing relabel onto a corrupted element still gives zero:
        // substitution cannot see the corruption
        let g = builtin_group("C3").unwrap();
        let f4 = Ring::finite_field(4).unwrap();
        let omega = Value::from_json(&f4, &serde_json::json!([0, 1])).unwrap();
        let chi: Vec<Value> = vec![f4.one(), omega.clone(), omega.mul(&omega).unwrap()];
        let chi2: Vec<Value> = chi.iter().map(|v| v.mul(v).unwrap()).collect();
        let rep = Representation::from_character(&g, &f4, &chi)
            .unwrap()
            .direct_sum(&Representation::from_character(&g, &f4, &chi2).unwrap())
            .unwrap();
        let table = ThetaTable::from_rep(&rep);
        // corrupt theta(1, g1)
        let corrupted = table
            .with_entry(1, 1, table.theta(1, 1).add(&f4.one()).unwrap())
            .unwrap();
        let pc = LafforguePC::from_theta(corrupted);
        let f = DonkinExpression::lambda_gen(1, 2, 1, Word::letter(0)).unwrap();
        // zeta collapses two slots onto the corrupted element
        let defect = pc.lpc1_defect(&f, &[0], &[1, 1]).unwrap();
        assert!(defect.is_zero());
    }

    #[test]
    fn lpc2_zero_for_rep_backed() {
        let rep = standard_s3_representation(&Ring::prime_field(5).unwrap()).unwrap();
        let pc = LafforguePC::from_rep(&rep);
        // the 1-slot trace case of the spec: -tr(rho(a)rho(b)) + tr(rho(ab)) = 0
        let f = DonkinExpression::lambda_gen(1, 2, 1, Word::letter(0)).unwrap();
        for a in rep.group().elements() {
            for b in rep.group().elements() {
                assert!(pc.lpc2_defect(&f, &[a, b]).unwrap().is_zero());
            }
        }
        // and on random expressions
        let mut s = Sampler::new(41);
        for _ in 0..200 {
            let n = 1 + s.usize(3);
            let f = random_expression(&mut s, n, 2, true);
            let tuple = s.group_tuple(rep.group(), n + 1);
            assert!(pc.lpc2_defect(&f, &tuple).unwrap().is_zero());
        }
    }

    #[test]
    fn lpc2_detects_det_row_perturbation() {
        // the spec's cyclic(3) over F4 case: theta(2, g) += 1 produces a
        // nonzero concatenation defect
        let g = builtin_group("C3").unwrap();
        let f4 = Ring::finite_field(4).unwrap();
        let omega = Value::from_json(&f4, &serde_json::json!([0, 1])).unwrap();
        let chi: Vec<Value> = vec![f4.one(), omega.clone(), omega.mul(&omega).unwrap()];
        let chi_rep = Representation::from_character(&g, &f4, &chi).unwrap();
        let rep = chi_rep.direct_sum(&chi_rep).unwrap();
        let table = ThetaTable::from_rep(&rep);
        // theta(2, g) = omega^2; adding 1 gives omega, still a unit
        let corrupted = table
            .with_entry(2, 1, table.theta(2, 1).add(&f4.one()).unwrap())
            .unwrap();
        let pc = LafforguePC::from_theta(corrupted);
        let f = DonkinExpression::det_inv(1, 2, 0).unwrap();
        let mut found = false;
        for a in g.elements() {
            for b in g.elements() {
                if !pc.lpc2_defect(&f, &[a, b]).unwrap().is_zero() {
                    found = true;
                }
            }
        }
        assert!(found, "det-row perturbation must be visible to LPC2");
    }

    #[test]
    fn pit_accepts_invariants_rejects_entries() {
        let f = DonkinExpression::lambda_gen(2, 2, 1, Word(vec![0, 1])).unwrap();
        let v = invariance_pit(&InvarianceProbe::Expr(f), 2, 101, 20, 7).unwrap();
        assert!(v.invariant);
        let dinv = DonkinExpression::det_inv(1, 2, 0).unwrap();
        let v = invariance_pit(&InvarianceProbe::Expr(dinv), 2, 101, 20, 7).unwrap();
        assert!(v.invariant);
        let e = InvarianceProbe::Entry { slot: 0, row: 0, col: 0 };
        let v = invariance_pit(&e, 2, 101, 50, 7).unwrap();
        assert!(!v.invariant);
        assert!(v.witness.is_some());
    }

    #[test]
    fn expression_json_roundtrip() {
        let f = DonkinExpression::lambda_gen(2, 2, 1, Word::letter(0))
            .unwrap()
            .mul(&DonkinExpression::lambda_gen(2, 2, 1, Word::letter(1)).unwrap())
            .unwrap()
            .add(&DonkinExpression::lambda_gen(2, 2, 1, Word(vec![0, 1])).unwrap())
            .unwrap();
        let j = f.to_json();
        let back = DonkinExpression::from_json(2, &j).unwrap();
        assert_eq!(f, back);
        // serialized letters are 1-based
        assert_eq!(
            j["terms"][0],
            serde_json::json!([1, [["L", 1, [1]], ["L", 1, [2]]]])
        );
    }
}
