//! Trace pseudocharacters: central functions T on a finite group with
//! T(1) = d that kill the signed sum over S_{d+1} of cycle products. The
//! checker needs d! invertible in the value ring and reports precondition
//! failures separately from identity failures.

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::rep::Representation;
use crate::ring::{Ring, Value};
use crate::sample::Sampler;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaylorPC {
    pub group: FiniteGroup,
    pub ring: Ring,
    pub d: usize,
    /// values[g] = T(g)
    values: Vec<Value>,
}

impl TaylorPC {
    /// Raw constructor; the structural invariants (T(1) = d, centrality) are
    /// what `is_taylor_pc` checks, so they are not enforced here.
    pub fn new(group: FiniteGroup, ring: Ring, d: usize, values: Vec<Value>) -> Result<TaylorPC> {
        if values.len() != group.order() {
            return Err(Error::InvalidExpression("value table has wrong length".into()));
        }
        for v in &values {
            if *v.ring() != ring {
                return Err(Error::RingMismatch(ring.to_string(), v.ring().to_string()));
            }
        }
        Ok(TaylorPC { group, ring, d, values })
    }

    pub fn value(&self, g: usize) -> &Value {
        &self.values[g]
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }
}

/// The trace function of a representation.
pub fn taylor_from_rep(rep: &Representation) -> TaylorPC {
    TaylorPC {
        group: rep.group().clone(),
        ring: rep.ring().clone(),
        d: rep.dim(),
        values: rep.group().elements().map(|g| rep.image(g).trace()).collect(),
    }
}

/// Disjoint cycles of a permutation of {0..m-1}, each cycle starting at its
/// minimal element, cycles sorted by minimal element; the sign is
/// (-1)^(m - #cycles).
pub fn cycle_decompose(sigma: &[usize]) -> (Vec<Vec<usize>>, i32) {
    let m = sigma.len();
    let mut seen = vec![false; m];
    let mut cycles = Vec::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut x = sigma[start];
        while x != start {
            seen[x] = true;
            cycle.push(x);
            x = sigma[x];
        }
        cycles.push(cycle);
    }
    let sign = if (m - cycles.len()) % 2 == 0 { 1 } else { -1 };
    (cycles, sign)
}

/// Permutations of {0..m-1} in lexicographic order.
fn permutations_lex(m: usize) -> Vec<Vec<usize>> {
    crate::sample::permutations_lex(m)
}

/// The signed sum over S_{d+1} of cycle products of T at the tuple; zero is
/// the pseudocharacter condition.
pub fn taylor_defect(t: &TaylorPC, tuple: &[usize]) -> Result<Value> {
    if tuple.len() != t.d + 1 {
        return Err(Error::ArityMismatch {
            expected: t.d + 1,
            got: tuple.len(),
        });
    }
    if t.d > 6 {
        return Err(Error::Unsupported("defect sum limited to d <= 6".into()));
    }
    let mut acc = t.ring.zero();
    for sigma in permutations_lex(t.d + 1) {
        let (cycles, sign) = cycle_decompose(&sigma);
        let mut prod = t.ring.one();
        for cycle in &cycles {
            let mut g = t.group.identity();
            for &i in cycle {
                g = t.group.mul(g, tuple[i]);
            }
            prod = prod.mul(t.value(g))?;
        }
        if sign < 0 {
            prod = prod.neg();
        }
        acc = acc.add(&prod)?;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug)]
pub enum CheckMode {
    Exhaustive,
    Sampled { seed: u64, trials: usize },
}

/// Pick the exhaustive mode when the tuple space is small enough.
pub fn auto_mode(group: &FiniteGroup, d: usize, seed: u64, trials: usize) -> CheckMode {
    let tuples = (group.order() as u128).checked_pow(d as u32 + 1);
    match tuples {
        Some(t) if t <= 100_000 => CheckMode::Exhaustive,
        _ => CheckMode::Sampled { seed, trials },
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TaylorVerdict {
    pub accepted: bool,
    /// First tuple (element indices) where the identity failed.
    pub witness: Option<Vec<usize>>,
    pub precondition_failures: Vec<String>,
    pub tuples_checked: u64,
}

/// Full checker: d! invertible, T(1) = d, centrality, and the vanishing
/// defect on all tuples (exhaustive) or on seeded samples.
pub fn is_taylor_pc(t: &TaylorPC, mode: CheckMode) -> Result<TaylorVerdict> {
    let mut preconditions = Vec::new();
    // d! must be a unit; name the obstruction if not
    let mut factorial = BigInt::one();
    for k in 2..=t.d {
        factorial *= k;
    }
    if !t.ring.from_int(&factorial).is_unit() {
        let p = obstruction_prime(&t.ring, t.d).unwrap_or(0);
        preconditions.push(format!("{}! = {factorial} is not a unit in {} (prime {p})", t.d, t.ring));
    }
    if *t.value(t.group.identity()) != t.ring.from_i64(t.d as i64) {
        preconditions.push(format!(
            "T(1) = {} differs from d = {}",
            t.value(t.group.identity()),
            t.d
        ));
    }
    for a in t.group.elements() {
        for b in t.group.elements() {
            if t.value(t.group.mul(a, b)) != t.value(t.group.mul(b, a)) {
                preconditions.push(format!("centrality fails at ({a},{b})"));
            }
        }
    }
    if !preconditions.is_empty() {
        return Ok(TaylorVerdict {
            accepted: false,
            witness: None,
            precondition_failures: preconditions,
            tuples_checked: 0,
        });
    }

    let n = t.group.order() as u64;
    let len = t.d + 1;
    match mode {
        CheckMode::Exhaustive => {
            let total = n.checked_pow(len as u32).ok_or_else(|| {
                Error::Unsupported("tuple space too large for exhaustive checking".into())
            })?;
            // each tuple's defect is independent; scan in parallel and keep
            // the least failing index for a deterministic witness
            let failing = (0..total)
                .into_par_iter()
                .filter_map(|idx| {
                    let mut tuple = vec![0usize; len];
                    let mut v = idx;
                    for slot in tuple.iter_mut() {
                        *slot = (v % n) as usize;
                        v /= n;
                    }
                    match taylor_defect(t, &tuple) {
                        Ok(defect) if defect.is_zero() => None,
                        Ok(_) => Some(idx),
                        Err(_) => Some(idx),
                    }
                })
                .min();
            match failing {
                None => Ok(TaylorVerdict {
                    accepted: true,
                    witness: None,
                    precondition_failures: vec![],
                    tuples_checked: total,
                }),
                Some(idx) => {
                    let mut tuple = vec![0usize; len];
                    let mut v = idx;
                    for slot in tuple.iter_mut() {
                        *slot = (v % n) as usize;
                        v /= n;
                    }
                    Ok(TaylorVerdict {
                        accepted: false,
                        witness: Some(tuple),
                        precondition_failures: vec![],
                        tuples_checked: total,
                    })
                }
            }
        }
        CheckMode::Sampled { seed, trials } => {
            let mut sampler = Sampler::new(seed);
            for trial in 0..trials {
                let tuple = sampler.group_tuple(&t.group, len);
                let defect = taylor_defect(t, &tuple)?;
                if !defect.is_zero() {
                    return Ok(TaylorVerdict {
                        accepted: false,
                        witness: Some(tuple),
                        precondition_failures: vec![],
                        tuples_checked: trial as u64 + 1,
                    });
                }
            }
            Ok(TaylorVerdict {
                accepted: true,
                witness: None,
                precondition_failures: vec![],
                tuples_checked: trials as u64,
            })
        }
    }
}

/// The least prime p <= d that is not invertible in the ring (the reason
/// d! fails to be a unit).
pub fn obstruction_prime(ring: &Ring, d: usize) -> Option<u64> {
    (2..=d as u64)
        .filter(|&p| crate::ring::arith::is_prime(p))
        .find(|&p| !ring.from_i64(p as i64).is_unit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin_group;
    use crate::matrix::SquareMatrix;

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
    fn trace_tables() {
        let g = builtin_group("C3").unwrap();
        let triv = Representation::trivial(&g, &Ring::Integers, 2);
        let t = taylor_from_rep(&triv);
        assert!(t.values().iter().all(|v| *v == Ring::Integers.from_i64(2)));

        let t = taylor_from_rep(&swap_rep());
        assert_eq!(t.value(0), &Ring::Integers.from_i64(2));
        assert_eq!(t.value(1), &Ring::Integers.zero());

        // chi + chi^2 over F4: traces (0, 1, 1)
        let f4 = Ring::finite_field(4).unwrap();
        let omega = Value::from_json(&f4, &serde_json::json!([0, 1])).unwrap();
        let chi: Vec<Value> = vec![f4.one(), omega.clone(), omega.mul(&omega).unwrap()];
        let chi2: Vec<Value> = chi.iter().map(|v| v.mul(v).unwrap()).collect();
        let rep = Representation::from_character(&g, &f4, &chi)
            .unwrap()
            .direct_sum(&Representation::from_character(&g, &f4, &chi2).unwrap())
            .unwrap();
        let t = taylor_from_rep(&rep);
        assert!(t.value(0).is_zero());
        assert!(t.value(1).is_one());
        assert!(t.value(2).is_one());
    }

    #[test]
    fn cycle_decomposition() {
        let (cycles, sign) = cycle_decompose(&[0, 1, 2]);
        assert_eq!(cycles, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(sign, 1);
        let (cycles, sign) = cycle_decompose(&[1, 0]);
        assert_eq!(cycles, vec![vec![0, 1]]);
        assert_eq!(sign, -1);
        let (cycles, sign) = cycle_decompose(&[1, 2, 0]);
        assert_eq!(cycles, vec![vec![0, 1, 2]]);
        assert_eq!(sign, 1);
    }

    #[test]
    fn d1_defect_is_multiplicativity() {
        // for a character, defect(a, b) = T(a)T(b) - T(ab) = 0
        let g = builtin_group("C4").unwrap();
        let f5 = Ring::prime_field(5).unwrap();
        // g -> 2 has order 4 in F5*
        let chi: Vec<Value> = vec![
            f5.one(),
            f5.from_i64(2),
            f5.from_i64(4),
            f5.from_i64(3),
        ];
        let rep = Representation::from_character(&g, &f5, &chi).unwrap();
        let t = taylor_from_rep(&rep);
        for a in g.elements() {
            for b in g.elements() {
                assert!(taylor_defect(&t, &[a, b]).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn d2_trace_identity_exhaustive() {
        let t = taylor_from_rep(&swap_rep());
        let g = t.group.clone();
        for a in g.elements() {
            for b in g.elements() {
                for c in g.elements() {
                    assert!(taylor_defect(&t, &[a, b, c]).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn wrong_dimension_detected() {
        // trace of the 2-dim swap rep claimed as d = 1: defect(s, s) = -2
        let rep = swap_rep();
        let traces: Vec<Value> = rep.group().elements().map(|g| rep.image(g).trace()).collect();
        let t = TaylorPC::new(rep.group().clone(), Ring::Integers, 1, traces).unwrap();
        let defect = taylor_defect(&t, &[1, 1]).unwrap();
        assert_eq!(defect, Ring::Integers.from_i64(-2));
        // and the full checker flags T(1) != d as a precondition failure
        let verdict = is_taylor_pc(&t, CheckMode::Exhaustive).unwrap();
        assert!(!verdict.accepted);
        assert!(!verdict.precondition_failures.is_empty());
    }

    #[test]
    fn accepts_traces_when_factorial_invertible() {
        let f5 = Ring::prime_field(5).unwrap();
        let mut sampler = Sampler::new(2024);
        for gname in ["C2", "C4", "S3", "V4"] {
            let g = builtin_group(gname).unwrap();
            for d in 1..=3 {
                let rep = sampler.representation(&g, &f5, d).unwrap();
                let t = taylor_from_rep(&rep);
                let verdict = is_taylor_pc(&t, auto_mode(&g, d, 7, 500)).unwrap();
                assert!(verdict.accepted, "{gname} d={d}: {verdict:?}");
            }
        }
    }

    #[test]
    fn factorial_precondition_reported_distinctly() {
        // d = 2 over F2: the checker must name the precondition, not a
        // defect witness
        let f2 = Ring::prime_field(2).unwrap();
        let g = builtin_group("C2").unwrap();
        let rep = Representation::trivial(&g, &f2, 2);
        let t = taylor_from_rep(&rep);
        let verdict = is_taylor_pc(&t, CheckMode::Exhaustive).unwrap();
        assert!(!verdict.accepted);
        assert!(verdict.witness.is_none());
        assert!(verdict.precondition_failures[0].contains("not a unit"));
        assert_eq!(obstruction_prime(&f2, 2), Some(2));
    }

    #[test]
    fn non_central_table_rejected_with_witness() {
        let g = builtin_group("S3").unwrap();
        let z = Ring::Integers;
        // an arbitrary non-central table
        let values: Vec<Value> = (0..6).map(|i| z.from_i64(i as i64)).collect();
        let t = TaylorPC::new(g, z, 1, values).unwrap();
        let verdict = is_taylor_pc(&t, CheckMode::Exhaustive).unwrap();
        assert!(!verdict.accepted);
        assert!(verdict
            .precondition_failures
            .iter()
            .any(|f| f.contains("centrality")));
    }

    #[test]
    fn defect_symmetric_under_tuple_permutation() {
        let rep = crate::sample::standard_s3_representation(&Ring::prime_field(7).unwrap()).unwrap();
        let t = taylor_from_rep(&rep);
        let mut sampler = Sampler::new(5);
        for _ in 0..50 {
            let tuple = sampler.group_tuple(&t.group, 3);
            let base = taylor_defect(&t, &tuple).unwrap();
            for sigma in permutations_lex(3) {
                let permuted: Vec<usize> = sigma.iter().map(|&i| tuple[i]).collect();
                assert_eq!(taylor_defect(&t, &permuted).unwrap(), base);
            }
        }
    }
}
