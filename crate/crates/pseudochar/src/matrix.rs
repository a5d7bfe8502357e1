//! Square matrices over any supported ring, with a division-free
//! characteristic polynomial.
//!
//! The coefficient convention used everywhere in this crate is
//! det(T*I - M) = sum_{i=0}^{d} Lambda_i T^{d-i}, so Lambda_0 = 1,
//! Lambda_1 = -trace(M) and Lambda_d = (-1)^d det(M).

use crate::error::{Error, Result};
use crate::ring::{Ring, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareMatrix {
    ring: Ring,
    d: usize,
    /// Row-major, length d*d.
    entries: Vec<Value>,
}

/// Coefficients (Lambda_0, ..., Lambda_d) of det(T*I - M).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly {
    pub d: usize,
    pub lambdas: Vec<Value>,
}

impl SquareMatrix {
    pub fn new(ring: Ring, d: usize, entries: Vec<Value>) -> Result<SquareMatrix> {
        if d == 0 {
            return Err(Error::Unsupported("matrix dimension must be positive".into()));
        }
        if entries.len() != d * d {
            return Err(Error::Unsupported(format!(
                "expected {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        for e in &entries {
            if *e.ring() != ring {
                return Err(Error::RingMismatch(ring.to_string(), e.ring().to_string()));
            }
        }
        Ok(SquareMatrix { ring, d, entries })
    }

    pub fn identity(ring: &Ring, d: usize) -> SquareMatrix {
        let mut entries = vec![ring.zero(); d * d];
        for i in 0..d {
            entries[i * d + i] = ring.one();
        }
        SquareMatrix {
            ring: ring.clone(),
            d,
            entries,
        }
    }

    pub fn zero(ring: &Ring, d: usize) -> SquareMatrix {
        SquareMatrix {
            ring: ring.clone(),
            d,
            entries: vec![ring.zero(); d * d],
        }
    }

    /// Build from signed machine integers via the canonical map Z -> R.
    pub fn from_ints(ring: &Ring, d: usize, entries: &[i64]) -> Result<SquareMatrix> {
        SquareMatrix::new(
            ring.clone(),
            d,
            entries.iter().map(|&n| ring.from_i64(n)).collect(),
        )
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entry(&self, row: usize, col: usize) -> &Value {
        &self.entries[row * self.d + col]
    }

    pub fn entries(&self) -> &[Value] {
        &self.entries
    }

    pub fn set_entry(&mut self, row: usize, col: usize, v: Value) -> Result<()> {
        if *v.ring() != self.ring {
            return Err(Error::RingMismatch(self.ring.to_string(), v.ring().to_string()));
        }
        self.entries[row * self.d + col] = v;
        Ok(())
    }

    pub fn add(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        self.check_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SquareMatrix {
            ring: self.ring.clone(),
            d: self.d,
            entries,
        })
    }

    pub fn mul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        self.check_shape(other)?;
        let d = self.d;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = self.ring.zero();
                for k in 0..d {
                    acc = acc.add(&self.entry(i, k).mul(other.entry(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(SquareMatrix {
            ring: self.ring.clone(),
            d,
            entries,
        })
    }

    pub fn scale(&self, c: &Value) -> Result<SquareMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.mul(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(SquareMatrix {
            ring: self.ring.clone(),
            d: self.d,
            entries,
        })
    }

    pub fn sub(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        self.check_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SquareMatrix {
            ring: self.ring.clone(),
            d: self.d,
            entries,
        })
    }

    pub fn trace(&self) -> Value {
        let mut acc = self.ring.zero();
        for i in 0..self.d {
            acc = acc.add(self.entry(i, i)).expect("same ring");
        }
        acc
    }

    /// Map entries into an extension ring.
    pub fn embed(&self, target: &Ring) -> Result<SquareMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.embed(target))
            .collect::<Result<Vec<_>>>()?;
        Ok(SquareMatrix {
            ring: target.clone(),
            d: self.d,
            entries,
        })
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.to_string(), other.ring.to_string()));
        }
        let d = self.d + other.d;
        let mut out = SquareMatrix::zero(&self.ring, d);
        for i in 0..self.d {
            for j in 0..self.d {
                out.entries[i * d + j] = self.entry(i, j).clone();
            }
        }
        for i in 0..other.d {
            for j in 0..other.d {
                out.entries[(self.d + i) * d + (self.d + j)] = other.entry(i, j).clone();
            }
        }
        Ok(out)
    }

    /// Characteristic polynomial by the Berkowitz method: division-free, so
    /// valid over rings with zero divisors.
    pub fn charpoly(&self) -> CharPoly {
        let d = self.d;
        let ring = &self.ring;
        // c holds the coefficients for the leading principal k x k submatrix,
        // leading coefficient first.
        let mut c = vec![ring.one(), self.entry(0, 0).neg()];
        for k in 1..d {
            // new row/column index k; M is the leading k x k block
            let akk = self.entry(k, k);
            // s_j = row . M^j . col for j = 0..k-1
            let mut v: Vec<Value> = (0..k).map(|i| self.entry(i, k).clone()).collect();
            let mut s = Vec::with_capacity(k);
            let dot = |v: &[Value]| -> Value {
                let mut acc = ring.zero();
                for (i, x) in v.iter().enumerate() {
                    acc = acc.add(&self.entry(k, i).mul(x).expect("ring")).expect("ring");
                }
                acc
            };
            s.push(dot(&v));
            for _ in 1..k {
                let mut nv = Vec::with_capacity(k);
                for i in 0..k {
                    let mut acc = ring.zero();
                    for (j, x) in v.iter().enumerate() {
                        acc = acc.add(&self.entry(i, j).mul(x).expect("ring")).expect("ring");
                    }
                    nv.push(acc);
                }
                v = nv;
                s.push(dot(&v));
            }
            // Toeplitz update: newc_m = c_m - akk*c_{m-1} - sum_j s_j c_{m-2-j}
            let mut newc = vec![ring.zero(); k + 2];
            for (j, cj) in c.iter().enumerate() {
                newc[j] = newc[j].add(cj).expect("ring");
                let t = akk.mul(cj).expect("ring");
                newc[j + 1] = newc[j + 1].sub(&t).expect("ring");
                for (i, sj) in s.iter().enumerate() {
                    let idx = j + 2 + i;
                    if idx <= k + 1 {
                        let t = sj.mul(cj).expect("ring");
                        newc[idx] = newc[idx].sub(&t).expect("ring");
                    }
                }
            }
            c = newc;
        }
        CharPoly { d, lambdas: c }
    }

    /// Determinant, read off the characteristic polynomial as
    /// (-1)^d Lambda_d.
    pub fn det(&self) -> Value {
        let cp = self.charpoly();
        let top = cp.lambdas[self.d].clone();
        if self.d % 2 == 0 {
            top
        } else {
            top.neg()
        }
    }

    /// Cofactor-expansion determinant; independent cross-check oracle for
    /// small dimensions.
    pub fn det_cofactor(&self) -> Result<Value> {
        if self.d > 6 {
            return Err(Error::Unsupported("cofactor oracle limited to d <= 6".into()));
        }
        Ok(det_cofactor_rec(self))
    }

    /// Trace of the k-th exterior power: the sum of all k x k principal
    /// minors. Test oracle, d <= 6.
    pub fn exterior_trace(&self, k: usize) -> Result<Value> {
        if k > self.d {
            return Err(Error::Unsupported(format!(
                "exterior power {k} exceeds dimension {}",
                self.d
            )));
        }
        if self.d > 6 {
            return Err(Error::Unsupported("exterior_trace limited to d <= 6".into()));
        }
        if k == 0 {
            return Ok(self.ring.one());
        }
        let mut acc = self.ring.zero();
        for subset in subsets_of_size(self.d, k) {
            let minor = self.principal_minor(&subset)?;
            acc = acc.add(&minor.det_cofactor()?)?;
        }
        Ok(acc)
    }

    fn principal_minor(&self, rows: &[usize]) -> Result<SquareMatrix> {
        let k = rows.len();
        let mut entries = Vec::with_capacity(k * k);
        for &i in rows {
            for &j in rows {
                entries.push(self.entry(i, j).clone());
            }
        }
        SquareMatrix::new(self.ring.clone(), k, entries)
    }

    /// Inverse via the adjugate relation M * adj(M) = det(M) * I, valid when
    /// det is a unit.
    pub fn inverse(&self) -> Option<SquareMatrix> {
        let det = self.det();
        let det_inv = det.inverse()?;
        let d = self.d;
        if d == 1 {
            return Some(SquareMatrix {
                ring: self.ring.clone(),
                d,
                entries: vec![det_inv],
            });
        }
        let mut entries = vec![self.ring.zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                // cofactor C_{j,i} / det
                let rows: Vec<usize> = (0..d).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..d).filter(|&c| c != i).collect();
                let mut sub_entries = Vec::with_capacity((d - 1) * (d - 1));
                for &r in &rows {
                    for &c in &cols {
                        sub_entries.push(self.entry(r, c).clone());
                    }
                }
                let sub = SquareMatrix::new(self.ring.clone(), d - 1, sub_entries).ok()?;
                let mut cof = if d - 1 <= 6 { sub.det_cofactor().ok()? } else { sub.det() };
                if (i + j) % 2 == 1 {
                    cof = cof.neg();
                }
                entries[i * d + j] = cof.mul(&det_inv).ok()?;
            }
        }
        Some(SquareMatrix {
            ring: self.ring.clone(),
            d,
            entries,
        })
    }

    pub fn is_invertible(&self) -> bool {
        self.det().is_unit()
    }

    fn check_shape(&self, other: &SquareMatrix) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.to_string(), other.ring.to_string()));
        }
        if self.d != other.d {
            return Err(Error::ArityMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.entries.iter().map(|e| e.to_json()).collect())
    }

    pub fn from_json(ring: &Ring, d: usize, v: &serde_json::Value) -> Result<SquareMatrix> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Serialization("matrix must be a row-major array".into()))?;
        if arr.len() != d * d {
            return Err(Error::Serialization(format!(
                "matrix needs {} entries, got {}",
                d * d,
                arr.len()
            )));
        }
        let entries = arr
            .iter()
            .map(|e| Value::from_json(ring, e))
            .collect::<Result<Vec<_>>>()?;
        SquareMatrix::new(ring.clone(), d, entries)
    }
}

fn det_cofactor_rec(m: &SquareMatrix) -> Value {
    let d = m.dim();
    if d == 1 {
        return m.entry(0, 0).clone();
    }
    let ring = m.ring().clone();
    let mut acc = ring.zero();
    for j in 0..d {
        if m.entry(0, j).is_zero() {
            continue;
        }
        let mut entries = Vec::with_capacity((d - 1) * (d - 1));
        for r in 1..d {
            for c in 0..d {
                if c != j {
                    entries.push(m.entry(r, c).clone());
                }
            }
        }
        let sub = SquareMatrix {
            ring: ring.clone(),
            d: d - 1,
            entries,
        };
        let mut term = m.entry(0, j).mul(&det_cofactor_rec(&sub)).expect("ring");
        if j % 2 == 1 {
            term = term.neg();
        }
        acc = acc.add(&term).expect("ring");
    }
    acc
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Cofactor-expansion characteristic polynomial: expand det(T*I - M) over
/// R[T]. Oracle for the Berkowitz implementation, d <= 4.
pub fn charpoly_cofactor(m: &SquareMatrix) -> Result<CharPoly> {
    if m.dim() > 4 {
        return Err(Error::Unsupported("cofactor charpoly limited to d <= 4".into()));
    }
    let (ext, names) = m.ring().polarize(1, "T")?;
    let tname = &names[0];
    let t = ext.var(tname)?;
    let d = m.dim();
    let mut shifted = m.embed(&ext)?;
    for i in 0..d {
        let e = shifted.entry(i, i).clone();
        shifted.set_entry(i, i, t.sub(&e)?)?;
        for j in 0..d {
            if i != j {
                let e = shifted.entry(i, j).clone();
                shifted.set_entry(i, j, e.neg())?;
            }
        }
    }
    let p = shifted.det_cofactor()?;
    let mut lambdas = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let coeff = p.coefficient_of(tname, (d - i) as u32)?;
        // constant in T: strip back down to the base ring
        lambdas.push(strip_constant(&coeff, m.ring())?);
    }
    Ok(CharPoly { d, lambdas })
}

/// Interpret a polynomial-ring value with no outer-variable dependence as a
/// value of the base ring.
pub fn strip_constant(v: &Value, base: &Ring) -> Result<Value> {
    if v.ring() == base {
        return Ok(v.clone());
    }
    if let Some(p) = v.as_poly() {
        if p.is_zero() {
            return Ok(base.zero());
        }
        if p.is_constant() {
            return strip_constant(&p.terms[0].1, base);
        }
    }
    Err(Error::RingMismatch(v.ring().to_string(), base.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Ring {
        Ring::Integers
    }

    #[test]
    fn charpoly_identity() {
        let m = SquareMatrix::identity(&z(), 2);
        let cp = m.charpoly();
        let expect: Vec<Value> = [1, -2, 1].iter().map(|&n| z().from_i64(n)).collect();
        assert_eq!(cp.lambdas, expect);
    }

    #[test]
    fn charpoly_swap() {
        let m = SquareMatrix::from_ints(&z(), 2, &[0, 1, 1, 0]).unwrap();
        let cp = m.charpoly();
        let expect: Vec<Value> = [1, 0, -1].iter().map(|&n| z().from_i64(n)).collect();
        assert_eq!(cp.lambdas, expect);
    }

    #[test]
    fn charpoly_mod2_unipotent() {
        let f2 = Ring::prime_field(2).unwrap();
        let m = SquareMatrix::from_ints(&f2, 2, &[1, 1, 0, 1]).unwrap();
        let cp = m.charpoly();
        let expect: Vec<Value> = [1, 0, 1].iter().map(|&n| f2.from_i64(n)).collect();
        assert_eq!(cp.lambdas, expect);
    }

    #[test]
    fn det_examples() {
        for d in 1..=4 {
            let m = SquareMatrix::identity(&z(), d);
            assert_eq!(m.det(), z().one());
        }
        let m = SquareMatrix::from_ints(&z(), 2, &[3, 0, 0, 7]).unwrap();
        assert_eq!(m.det(), z().from_i64(21));
        let m = SquareMatrix::from_ints(&z(), 2, &[1, 1, 1, 1]).unwrap();
        assert_eq!(m.det(), z().zero());
    }

    #[test]
    fn berkowitz_agrees_with_cofactor_oracle() {
        // deterministic small-entry sweep at several dimensions
        let rings = vec![
            z(),
            Ring::integers_mod(4).unwrap(),
            Ring::prime_field(5).unwrap(),
        ];
        let mut seed = 1u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 11) as i64 - 5
        };
        for ring in &rings {
            for d in 1..=4 {
                for _ in 0..30 {
                    let entries: Vec<i64> = (0..d * d).map(|_| next()).collect();
                    let m = SquareMatrix::from_ints(ring, d, &entries).unwrap();
                    let fast = m.charpoly();
                    let slow = charpoly_cofactor(&m).unwrap();
                    assert_eq!(fast.lambdas, slow.lambdas, "d={d} ring={ring}");
                    assert_eq!(m.det(), m.det_cofactor().unwrap());
                }
            }
        }
    }

    #[test]
    fn exterior_trace_examples() {
        let m = SquareMatrix::from_ints(&z(), 3, &[2, 0, 0, 0, 3, 0, 0, 0, 5]).unwrap();
        assert_eq!(m.exterior_trace(0).unwrap(), z().one());
        assert_eq!(m.exterior_trace(1).unwrap(), z().from_i64(10));
        assert_eq!(m.exterior_trace(2).unwrap(), z().from_i64(31));
        assert_eq!(m.exterior_trace(3).unwrap(), z().from_i64(30));
        assert!(m.exterior_trace(4).is_err());
    }

    #[test]
    fn exterior_trace_sign_identity() {
        // Lambda_k = (-1)^k tr(Lambda^k M)
        let mut seed = 7u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 7) as i64 - 3
        };
        for d in 1..=4 {
            for _ in 0..20 {
                let entries: Vec<i64> = (0..d * d).map(|_| next()).collect();
                let m = SquareMatrix::from_ints(&z(), d, &entries).unwrap();
                let cp = m.charpoly();
                for k in 0..=d {
                    let mut et = m.exterior_trace(k).unwrap();
                    if k % 2 == 1 {
                        et = et.neg();
                    }
                    assert_eq!(cp.lambdas[k], et);
                }
            }
        }
    }

    #[test]
    fn cayley_hamilton() {
        let rings = vec![
            z(),
            Ring::integers_mod(4).unwrap(),
            Ring::prime_field(5).unwrap(),
        ];
        let mut seed = 3u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 9) as i64 - 4
        };
        for ring in &rings {
            for d in 1..=4 {
                for _ in 0..10 {
                    let entries: Vec<i64> = (0..d * d).map(|_| next()).collect();
                    let m = SquareMatrix::from_ints(ring, d, &entries).unwrap();
                    let cp = m.charpoly();
                    // sum Lambda_i M^{d-i}
                    let mut acc = SquareMatrix::zero(ring, d);
                    let mut mpow = SquareMatrix::identity(ring, d);
                    let mut powers = vec![mpow.clone()];
                    for _ in 0..d {
                        mpow = mpow.mul(&m).unwrap();
                        powers.push(mpow.clone());
                    }
                    for (i, lam) in cp.lambdas.iter().enumerate() {
                        acc = acc.add(&powers[d - i].scale(lam).unwrap()).unwrap();
                    }
                    assert_eq!(acc, SquareMatrix::zero(ring, d));
                }
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let f5 = Ring::prime_field(5).unwrap();
        let m = SquareMatrix::from_ints(&f5, 2, &[1, 2, 3, 4]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), SquareMatrix::identity(&f5, 2));
        let singular = SquareMatrix::from_ints(&f5, 2, &[1, 2, 2, 4]).unwrap();
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn charpoly_symbolic_generic() {
        // 2x2 generic matrix: det = ad - bc as a polynomial identity
        let r = Ring::polynomials(
            z(),
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
        )
        .unwrap();
        let m = SquareMatrix::new(
            r.clone(),
            2,
            vec![
                r.var("a").unwrap(),
                r.var("b").unwrap(),
                r.var("c").unwrap(),
                r.var("d").unwrap(),
            ],
        )
        .unwrap();
        let det = m.det();
        let expect = r
            .var("a")
            .unwrap()
            .mul(&r.var("d").unwrap())
            .unwrap()
            .sub(&r.var("b").unwrap().mul(&r.var("c").unwrap()).unwrap())
            .unwrap();
        assert_eq!(det, expect);
    }
}
