//! Finite groups given by multiplication tables, free-monoid words, and
//! verified group homomorphisms.

use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, PartialEq, Eq, Hash)]
struct GroupInner {
    name: String,
    order: usize,
    /// table[a * order + b] = index of a*b
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
}

/// A finite group with elements indexed 0..order-1. Construction verifies
/// the identity, inverse, and (for order <= 64) associativity laws.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteGroup(Arc<GroupInner>);

impl FiniteGroup {
    pub fn from_table(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<FiniteGroup> {
        let order = table.len();
        if order == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        let mut flat = Vec::with_capacity(order * order);
        for row in &table {
            if row.len() != order {
                return Err(Error::InvalidGroup("table is not square".into()));
            }
            for &v in row {
                if v >= order {
                    return Err(Error::InvalidGroup(format!("index {v} out of range")));
                }
                flat.push(v);
            }
        }
        // identity
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| flat[e * order + a] == a && flat[a * order + e] == a))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        // inverses
        let mut inverse = vec![usize::MAX; order];
        for a in 0..order {
            let inv = (0..order)
                .find(|&b| flat[a * order + b] == identity && flat[b * order + a] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
            inverse[a] = inv;
        }
        // full associativity check is cubic; bounded per the construction contract
        if order <= 64 {
            for a in 0..order {
                for b in 0..order {
                    let ab = flat[a * order + b];
                    for c in 0..order {
                        let bc = flat[b * order + c];
                        if flat[ab * order + c] != flat[a * order + bc] {
                            return Err(Error::InvalidGroup(format!(
                                "associativity fails at ({a},{b},{c})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(FiniteGroup(Arc::new(GroupInner {
            name: name.into(),
            order,
            table: flat,
            identity,
            inverse,
        })))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn identity(&self) -> usize {
        self.0.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.0.table[a * self.0.order + b]
    }

    pub fn inverse_of(&self, a: usize) -> usize {
        self.0.inverse[a]
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut n = 1;
        while x != self.0.identity {
            x = self.mul(x, a);
            n += 1;
        }
        n
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.0.order
    }

    /// A small generating set, found greedily (singletons first, then pairs,
    /// then triples).
    pub fn generators(&self) -> Vec<usize> {
        let n = self.order();
        let closure = |gens: &[usize]| -> usize {
            let mut seen = vec![false; n];
            seen[self.identity()] = true;
            let mut frontier = vec![self.identity()];
            let mut count = 1;
            while let Some(x) = frontier.pop() {
                for &g in gens {
                    let y = self.mul(x, g);
                    if !seen[y] {
                        seen[y] = true;
                        count += 1;
                        frontier.push(y);
                    }
                }
            }
            count
        };
        for a in 0..n {
            if closure(&[a]) == n {
                return vec![a];
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if closure(&[a, b]) == n {
                    return vec![a, b];
                }
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if closure(&[a, b, c]) == n {
                        return vec![a, b, c];
                    }
                }
            }
        }
        // fall back to everything
        (0..n).collect()
    }

    /// Expresses each element as a word in the given generators (BFS over
    /// the Cayley graph). Entry i is the letter sequence for element i.
    pub fn words_in_generators(&self, gens: &[usize]) -> Option<Vec<Vec<usize>>> {
        let n = self.order();
        let mut words: Vec<Option<Vec<usize>>> = vec![None; n];
        words[self.identity()] = Some(vec![]);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(self.identity());
        while let Some(x) = queue.pop_front() {
            for (gi, &g) in gens.iter().enumerate() {
                let y = self.mul(x, g);
                if words[y].is_none() {
                    let mut w = words[x].clone().unwrap();
                    w.push(gi);
                    words[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }
        words.into_iter().collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let order = self.order();
        let table: Vec<Vec<usize>> = (0..order)
            .map(|a| (0..order).map(|b| self.mul(a, b)).collect())
            .collect();
        serde_json::json!({"name": self.name(), "order": order, "table": table})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<FiniteGroup> {
        let name = v
            .get("name")
            .and_then(|n| n.as_str())
            .unwrap_or("group")
            .to_string();
        let table = v
            .get("table")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::Serialization("group needs a table".into()))?;
        let rows: Vec<Vec<usize>> = table
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Serialization("bad table row".into()))?
                    .iter()
                    .map(|e| {
                        e.as_u64()
                            .map(|e| e as usize)
                            .ok_or_else(|| Error::Serialization("bad table entry".into()))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        FiniteGroup::from_table(name, rows)
    }
}

fn cyclic(n: usize) -> Result<FiniteGroup> {
    let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    FiniteGroup::from_table(format!("C{n}"), table)
}

/// Permutations of {0..n-1} in lexicographic order.
fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next_permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

fn symmetric(n: usize) -> Result<FiniteGroup> {
    let perms = all_permutations(n);
    let index_of = |p: &Vec<usize>| perms.iter().position(|q| q == p).unwrap();
    // product convention: (a*b)(x) = b(a(x)), i.e. apply a first
    let table: Vec<Vec<usize>> = perms
        .iter()
        .map(|a| {
            perms
                .iter()
                .map(|b| {
                    let prod: Vec<usize> = (0..n).map(|x| b[a[x]]).collect();
                    index_of(&prod)
                })
                .collect()
        })
        .collect();
    FiniteGroup::from_table(format!("S{n}"), table)
}

fn dihedral(n: usize) -> Result<FiniteGroup> {
    // elements r^i s^j indexed i + n*j
    let order = 2 * n;
    let mut table = vec![vec![0usize; order]; order];
    for i in 0..n {
        for j in 0..2 {
            for k in 0..n {
                for l in 0..2 {
                    // (r^i s^j)(r^k s^l): s r^k = r^{-k} s
                    let (ri, rj) = if j == 0 {
                        ((i + k) % n, l)
                    } else {
                        ((i + n - k % n) % n, 1 - l)
                    };
                    table[i + n * j][k + n * l] = ri + n * rj;
                }
            }
        }
    }
    FiniteGroup::from_table(format!("D{n}"), table)
}

fn quaternion8() -> Result<FiniteGroup> {
    // elements: 1, i, j, k, -1, -i, -j, -k at indices 0..8
    // encode as (sign, axis) with axis in {1,i,j,k}
    let mul_axis = |a: usize, b: usize| -> (bool, usize) {
        // returns (negate, axis); axes 0=1,1=i,2=j,3=k
        match (a, b) {
            (0, x) => (false, x),
            (x, 0) => (false, x),
            (1, 1) => (true, 0),
            (2, 2) => (true, 0),
            (3, 3) => (true, 0),
            (1, 2) => (false, 3),
            (2, 1) => (true, 3),
            (2, 3) => (false, 1),
            (3, 2) => (true, 1),
            (3, 1) => (false, 2),
            (1, 3) => (true, 2),
            _ => unreachable!(),
        }
    };
    let mut table = vec![vec![0usize; 8]; 8];
    for a in 0..8 {
        for b in 0..8 {
            let (sa, xa) = (a >= 4, a % 4);
            let (sb, xb) = (b >= 4, b % 4);
            let (neg, axis) = mul_axis(xa, xb);
            let sign = (sa ^ sb) ^ neg;
            table[a][b] = axis + if sign { 4 } else { 0 };
        }
    }
    FiniteGroup::from_table("Q8", table)
}

fn klein4() -> Result<FiniteGroup> {
    let table: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
    FiniteGroup::from_table("V4", table)
}

/// Catalog of built-in groups: cyclic(n) for n <= 24, symmetric(n) for
/// n <= 5, dihedral(n) for n <= 12, quaternion8, klein4.
pub fn builtin_group(name: &str) -> Result<FiniteGroup> {
    let name = name.trim();
    let parse_arg = |s: &str| -> Option<usize> { s.parse().ok() };
    let (kind, arg) = if let Some(rest) = name.strip_prefix("cyclic(").and_then(|s| s.strip_suffix(')')) {
        ("C", parse_arg(rest))
    } else if let Some(rest) = name.strip_prefix("symmetric(").and_then(|s| s.strip_suffix(')')) {
        ("S", parse_arg(rest))
    } else if let Some(rest) = name.strip_prefix("dihedral(").and_then(|s| s.strip_suffix(')')) {
        ("D", parse_arg(rest))
    } else if let Some(rest) = name.strip_prefix('C').filter(|s| s.chars().all(|c| c.is_ascii_digit())) {
        ("C", parse_arg(rest))
    } else if let Some(rest) = name.strip_prefix('S').filter(|s| s.chars().all(|c| c.is_ascii_digit())) {
        ("S", parse_arg(rest))
    } else if let Some(rest) = name.strip_prefix('D').filter(|s| s.chars().all(|c| c.is_ascii_digit())) {
        ("D", parse_arg(rest))
    } else {
        match name {
            "quaternion8" | "Q8" => return quaternion8(),
            "klein4" | "V4" => return klein4(),
            _ => ("", None),
        }
    };
    match (kind, arg) {
        ("C", Some(n)) if (1..=24).contains(&n) => cyclic(n),
        ("S", Some(n)) if (1..=5).contains(&n) => symmetric(n),
        ("D", Some(n)) if (1..=12).contains(&n) => dihedral(n),
        _ => Err(Error::InvalidGroup(format!(
            "unknown group {name}; valid: C2..C24 (cyclic), S2..S5 (symmetric), D2..D12 (dihedral), Q8, V4"
        ))),
    }
}

/// Names of all built-in groups, for catalogs and error messages.
pub fn builtin_group_names() -> Vec<String> {
    let mut names: Vec<String> = (1..=24).map(|n| format!("C{n}")).collect();
    names.extend((2..=5).map(|n| format!("S{n}")));
    names.extend((2..=12).map(|n| format!("D{n}")));
    names.push("Q8".into());
    names.push("V4".into());
    names
}

/// A word in the free monoid on an alphabet of letters, stored as letter
/// indices. The empty word is the monoid identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn letter(i: usize) -> Word {
        Word(vec![i])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn max_letter(&self) -> Option<usize> {
        self.0.iter().copied().max()
    }

    /// Multiplicity of each letter among 0..n.
    pub fn content(&self, n: usize) -> Vec<u32> {
        let mut c = vec![0u32; n];
        for &l in &self.0 {
            c[l] += 1;
        }
        c
    }
}

/// Lexicographically minimal rotation; idempotent and rotation-invariant.
pub fn cyclic_canonical(w: &Word) -> Word {
    let n = w.0.len();
    if n <= 1 {
        return w.clone();
    }
    let mut best = 0usize;
    for start in 1..n {
        for k in 0..n {
            let a = w.0[(start + k) % n];
            let b = w.0[(best + k) % n];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    best = start;
                    break;
                }
                std::cmp::Ordering::Greater => break,
                std::cmp::Ordering::Equal => continue,
            }
        }
    }
    Word((0..n).map(|k| w.0[(best + k) % n]).collect())
}

/// Left-to-right product of the assigned group elements; the empty word
/// evaluates to the identity.
pub fn evaluate_word_in_group(
    group: &FiniteGroup,
    word: &Word,
    assignment: &[usize],
) -> Result<usize> {
    let mut acc = group.identity();
    for &l in &word.0 {
        let g = *assignment.get(l).ok_or_else(|| {
            Error::InvalidExpression(format!("letter {l} not assigned (tuple has {} entries)", assignment.len()))
        })?;
        acc = group.mul(acc, g);
    }
    Ok(acc)
}

/// A verified group homomorphism given by its image table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    pub source: FiniteGroup,
    pub target: FiniteGroup,
    pub images: Vec<usize>,
}

impl GroupHom {
    pub fn new(source: FiniteGroup, target: FiniteGroup, images: Vec<usize>) -> Result<GroupHom> {
        if images.len() != source.order() {
            return Err(Error::InvalidGroup("image table has wrong length".into()));
        }
        for a in source.elements() {
            for b in source.elements() {
                if target.mul(images[a], images[b]) != images[source.mul(a, b)] {
                    return Err(Error::InvalidGroup(format!(
                        "not a homomorphism at ({a},{b})"
                    )));
                }
            }
        }
        Ok(GroupHom { source, target, images })
    }

    pub fn identity(group: &FiniteGroup) -> GroupHom {
        GroupHom {
            source: group.clone(),
            target: group.clone(),
            images: group.elements().collect(),
        }
    }

    pub fn apply(&self, a: usize) -> usize {
        self.images[a]
    }
}

/// All homomorphisms source -> target, enumerated by generator images with
/// order-divisibility pruning. Intended for small groups.
pub fn all_homomorphisms(source: &FiniteGroup, target: &FiniteGroup) -> Vec<GroupHom> {
    let gens = source.generators();
    let words = source
        .words_in_generators(&gens)
        .expect("generators generate");
    let mut out = Vec::new();
    let mut choice = vec![0usize; gens.len()];
    let n_target = target.order();
    let candidates: Vec<Vec<usize>> = gens
        .iter()
        .map(|&g| {
            let og = source.element_order(g);
            target
                .elements()
                .filter(|&t| og % target.element_order(t) == 0)
                .collect()
        })
        .collect();
    let total: usize = candidates.iter().map(|c| c.len()).product();
    let _ = n_target;
    for mut idx in 0..total {
        for (i, cand) in candidates.iter().enumerate() {
            choice[i] = cand[idx % cand.len()];
            idx /= cand.len();
        }
        // build the full image table from words, then verify
        let images: Vec<usize> = words
            .iter()
            .map(|w| {
                let mut acc = target.identity();
                for &gi in w {
                    acc = target.mul(acc, choice[gi]);
                }
                acc
            })
            .collect();
        if let Ok(h) = GroupHom::new(source.clone(), target.clone(), images) {
            out.push(h);
        }
    }
    out
}
