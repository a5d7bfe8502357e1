//! Seeded random generation of ring values, matrices, group-algebra
//! elements, and representations. Everything is driven by a ChaCha stream
//! cipher, so identical seeds give identical samples on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::GroupAlgebraElement;
use crate::error::Result;
use crate::group::{all_homomorphisms, builtin_group, FiniteGroup};
use crate::matrix::SquareMatrix;
use crate::rep::Representation;
use crate::ring::{Ring, Value};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn fork(&mut self) -> Sampler {
        Sampler::new(self.rng.gen())
    }

    pub fn usize(&mut self, bound: usize) -> usize {
        self.rng.gen_range(0..bound)
    }

    pub fn bool(&mut self) -> bool {
        self.rng.gen()
    }

    /// A small random value of the ring (polynomials stay sparse and of low
    /// degree so products remain tractable).
    pub fn value(&mut self, ring: &Ring) -> Value {
        match ring {
            Ring::Integers => ring.from_i64(self.rng.gen_range(-9..=9)),
            Ring::Rationals => {
                let num = self.rng.gen_range(-9..=9i64);
                let den = self.rng.gen_range(1..=9i64);
                let n = ring.from_i64(num);
                let d = ring.from_i64(den);
                n.mul(&d.inverse().unwrap()).unwrap()
            }
            Ring::IntegersMod(n) | Ring::PrimeField(n) => {
                ring.from_i64(self.rng.gen_range(0..*n) as i64)
            }
            Ring::ExtensionField(_) => {
                let els = ring.elements().unwrap();
                els[self.usize(els.len())].clone()
            }
            Ring::Polynomials(desc) => {
                let vars: Vec<String> = desc.vars.clone();
                let mut acc = ring.zero();
                let terms = self.rng.gen_range(0..=2);
                for _ in 0..terms {
                    let mut term = self.value(&desc.base).embed(ring).unwrap();
                    let degree = self.rng.gen_range(0..=2u32);
                    for _ in 0..degree {
                        let v = ring.var(&vars[self.usize(vars.len())]).unwrap();
                        term = term.mul(&v).unwrap();
                    }
                    acc = acc.add(&term).unwrap();
                }
                acc
            }
        }
    }

    pub fn nonzero_value(&mut self, ring: &Ring) -> Value {
        for _ in 0..64 {
            let v = self.value(ring);
            if !v.is_zero() {
                return v;
            }
        }
        ring.one()
    }

    pub fn unit_value(&mut self, ring: &Ring) -> Value {
        for _ in 0..64 {
            let v = self.value(ring);
            if v.is_unit() {
                return v;
            }
        }
        ring.one()
    }

    pub fn matrix(&mut self, ring: &Ring, d: usize) -> SquareMatrix {
        let entries: Vec<Value> = (0..d * d).map(|_| self.value(ring)).collect();
        SquareMatrix::new(ring.clone(), d, entries).unwrap()
    }

    /// Rejection-sampled invertible matrix; intended for fields.
    pub fn invertible_matrix(&mut self, ring: &Ring, d: usize) -> SquareMatrix {
        loop {
            let m = self.matrix(ring, d);
            if m.det().is_unit() {
                return m;
            }
        }
    }

    /// A product of elementary matrices together with its inverse; works
    /// over every supported ring since the determinant is +-1.
    pub fn unimodular_pair(&mut self, ring: &Ring, d: usize, steps: usize) -> (SquareMatrix, SquareMatrix) {
        let mut p = SquareMatrix::identity(ring, d);
        let mut p_inv = SquareMatrix::identity(ring, d);
        for _ in 0..steps {
            match self.rng.gen_range(0..3) {
                0 if d >= 2 => {
                    // add lambda * row i to row j
                    let i = self.usize(d);
                    let mut j = self.usize(d);
                    while j == i {
                        j = self.usize(d);
                    }
                    let lam = ring.from_i64(self.rng.gen_range(-2..=2i64));
                    let mut e = SquareMatrix::identity(ring, d);
                    e.set_entry(j, i, lam.clone()).unwrap();
                    let mut e_inv = SquareMatrix::identity(ring, d);
                    e_inv.set_entry(j, i, lam.neg()).unwrap();
                    p = e.mul(&p).unwrap();
                    p_inv = p_inv.mul(&e_inv).unwrap();
                }
                1 if d >= 2 => {
                    // swap two rows
                    let i = self.usize(d);
                    let mut j = self.usize(d);
                    while j == i {
                        j = self.usize(d);
                    }
                    let mut e = SquareMatrix::zero(ring, d);
                    for k in 0..d {
                        let target = if k == i { j } else if k == j { i } else { k };
                        e.set_entry(k, target, ring.one()).unwrap();
                    }
                    p = e.mul(&p).unwrap();
                    p_inv = p_inv.mul(&e).unwrap();
                }
                _ => {
                    // negate a row
                    let i = self.usize(d);
                    let mut e = SquareMatrix::identity(ring, d);
                    e.set_entry(i, i, ring.from_i64(-1)).unwrap();
                    p = e.mul(&p).unwrap();
                    p_inv = p_inv.mul(&e).unwrap();
                }
            }
        }
        (p, p_inv)
    }

    pub fn group_tuple(&mut self, group: &FiniteGroup, len: usize) -> Vec<usize> {
        (0..len).map(|_| self.usize(group.order())).collect()
    }

    pub fn word(&mut self, letters: usize, max_len: usize) -> crate::group::Word {
        let len = self.rng.gen_range(0..=max_len);
        crate::group::Word((0..len).map(|_| self.usize(letters)).collect())
    }

    /// Random element of B[G] with support of at most `max_support`.
    pub fn group_algebra(
        &mut self,
        ring: &Ring,
        group: &FiniteGroup,
        max_support: usize,
    ) -> GroupAlgebraElement {
        let support = self.rng.gen_range(0..=max_support.min(group.order()));
        let mut x = GroupAlgebraElement::zero(ring, group);
        for _ in 0..support {
            let g = self.usize(group.order());
            x.add_term(g, self.value(ring)).unwrap();
        }
        x
    }

    /// Random element supported on a cyclic subgroup of order <= max_order,
    /// so products stay within the same small support set.
    pub fn group_algebra_on_small_subgroup(
        &mut self,
        ring: &Ring,
        group: &FiniteGroup,
        max_order: usize,
    ) -> GroupAlgebraElement {
        let candidates: Vec<usize> = group
            .elements()
            .filter(|&g| group.element_order(g) <= max_order)
            .collect();
        let g = candidates[self.usize(candidates.len())];
        // the cyclic subgroup generated by g
        let mut elements = vec![group.identity()];
        let mut x = g;
        while x != group.identity() {
            elements.push(x);
            x = group.mul(x, g);
        }
        let mut out = GroupAlgebraElement::zero(ring, group);
        for &h in &elements {
            out.add_term(h, self.value(ring)).unwrap();
        }
        out
    }

    /// Random representation of exact dimension d: a direct sum of
    /// characters and permutation blocks, conjugated by a random unimodular
    /// matrix. Every group and ring admits at least the conjugated trivial
    /// sum.
    pub fn representation(&mut self, group: &FiniteGroup, ring: &Ring, d: usize) -> Result<Representation> {
        let chars = character_catalog(group, ring)?;
        let mut blocks: Vec<Representation> = Vec::new();
        let mut remaining = d;
        while remaining > 0 {
            // permutation block with probability ~1/3 when it fits
            let perm_dims: Vec<usize> = (2..=remaining.min(3)).collect();
            if !perm_dims.is_empty() && self.rng.gen_range(0..3) == 0 {
                let k = perm_dims[self.usize(perm_dims.len())];
                let sk = builtin_group(&format!("S{k}"))?;
                let homs = all_homomorphisms(group, &sk);
                let h = &homs[self.usize(homs.len())];
                blocks.push(permutation_representation(group, ring, k, &h.images)?);
                remaining -= k;
            } else {
                let table = &chars[self.usize(chars.len())];
                blocks.push(Representation::from_character(group, ring, table)?);
                remaining -= 1;
            }
        }
        let mut rep = blocks[0].clone();
        for b in &blocks[1..] {
            rep = rep.direct_sum(b)?;
        }
        let (p, p_inv) = self.unimodular_pair(ring, d, 2 * d + 2);
        rep.conjugate(&p, &p_inv)
    }
}

/// All characters (homomorphisms into the units) of a finite group with
/// values among the enumerable units of the ring.
pub fn character_catalog(group: &FiniteGroup, ring: &Ring) -> Result<Vec<Vec<Value>>> {
    let units = ring.unit_constants();
    // multiplication table of the (finite) unit set
    let index_of = |v: &Value| units.iter().position(|u| u == v);
    let mut table = vec![vec![0usize; units.len()]; units.len()];
    for (i, a) in units.iter().enumerate() {
        for (j, b) in units.iter().enumerate() {
            let p = a.mul(b)?;
            table[i][j] = index_of(&p).ok_or_else(|| {
                crate::error::Error::InvalidRing("unit set not closed under product".into())
            })?;
        }
    }
    let unit_group = FiniteGroup::from_table(format!("U({ring})"), table)?;
    let homs = all_homomorphisms(group, &unit_group);
    Ok(homs
        .into_iter()
        .map(|h| h.images.iter().map(|&i| units[i].clone()).collect())
        .collect())
}

/// The permutation representation attached to a homomorphism into S_k,
/// given by its image table of permutation indices.
pub fn permutation_representation(
    group: &FiniteGroup,
    ring: &Ring,
    k: usize,
    hom_images: &[usize],
) -> Result<Representation> {
    let sk = builtin_group(&format!("S{k}"))?;
    // reconstruct the permutations of S_k in the same lexicographic order
    let perms = permutations_lex(k);
    let _ = sk;
    let images = hom_images
        .iter()
        .map(|&pi| {
            let perm = &perms[pi];
            let mut m = SquareMatrix::zero(ring, k);
            for (i, &j) in perm.iter().enumerate() {
                m.set_entry(i, j, ring.one())?;
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Representation::new(group.clone(), ring.clone(), k, images)
}

pub fn permutations_lex(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// The 2-dimensional representation of S3 by integer matrices (the standard
/// reflection representation), base-changed to the given ring.
pub fn standard_s3_representation(ring: &Ring) -> Result<Representation> {
    let s3 = builtin_group("S3")?;
    // generators: r = 3-cycle, s = transposition
    let perms = permutations_lex(3);
    let r_idx = perms.iter().position(|p| p == &vec![1, 2, 0]).unwrap();
    let s_idx = perms.iter().position(|p| p == &vec![1, 0, 2]).unwrap();
    let r_mat = SquareMatrix::from_ints(ring, 2, &[0, -1, 1, -1])?;
    let s_mat = SquareMatrix::from_ints(ring, 2, &[0, 1, 1, 0])?;
    // build all images by expressing each element as a word in r, s
    let words = s3.words_in_generators(&[r_idx, s_idx]).unwrap();
    let gens = [r_mat, s_mat];
    let images: Vec<SquareMatrix> = words
        .iter()
        .map(|w| {
            let mut acc = SquareMatrix::identity(ring, 2);
            for &gi in w {
                acc = acc.mul(&gens[gi]).unwrap();
            }
            acc
        })
        .collect();
    Representation::new(s3, ring.clone(), 2, images)
}
