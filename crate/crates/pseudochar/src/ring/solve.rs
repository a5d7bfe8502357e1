//! Exact Gaussian elimination over the rationals.

use num_rational::BigRational;
use num_traits::Zero;

/// Outcome of solving `A x = b` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Inconsistent,
    Solved {
        /// One particular solution (free variables set to zero).
        particular: Vec<BigRational>,
        /// Basis of the null space of A.
        nullspace: Vec<Vec<BigRational>>,
    },
}

/// Solve `A x = b` by fraction-arithmetic row reduction. `a` is row-major,
/// `b` has one entry per row.
pub fn solve_rational(a: &[Vec<BigRational>], b: &[BigRational]) -> Solution {
    assert_eq!(a.len(), b.len(), "matrix and rhs row counts differ");
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    // augmented matrix
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols, "ragged matrix");
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let pivot_row = (rank..rows).find(|&r| !m[r][col].is_zero());
        let Some(pr) = pivot_row else { continue };
        m.swap(rank, pr);
        let inv = m[rank][col].clone().recip();
        for x in m[rank].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..=cols {
                    let delta = &f * &m[rank][c];
                    m[r][c] = &m[r][c] - &delta;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }

    for row in m.iter().skip(rank) {
        if !row[cols].is_zero() {
            return Solution::Inconsistent;
        }
    }

    let mut particular = vec![BigRational::zero(); cols];
    for (r, &pc) in pivot_cols.iter().enumerate() {
        particular[pc] = m[r][cols].clone();
    }

    let mut nullspace = Vec::new();
    let pivot_set: std::collections::HashSet<usize> = pivot_cols.iter().copied().collect();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::from_integer(1.into());
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -m[r][free].clone();
        }
        nullspace.push(v);
    }

    Solution::Solved { particular, nullspace }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn identity_system() {
        let a = vec![vec![q(1), q(0)], vec![q(0), q(1)]];
        let b = vec![q(1), q(0)];
        match solve_rational(&a, &b) {
            Solution::Solved { particular, nullspace } => {
                assert_eq!(particular, vec![q(1), q(0)]);
                assert!(nullspace.is_empty());
            }
            _ => panic!("inconsistent"),
        }
    }

    #[test]
    fn rank_one_system() {
        let a = vec![vec![q(1), q(1)], vec![q(1), q(1)]];
        let b = vec![q(1), q(1)];
        match solve_rational(&a, &b) {
            Solution::Solved { particular, nullspace } => {
                assert_eq!(particular, vec![q(1), q(0)]);
                assert_eq!(nullspace, vec![vec![q(-1), q(1)]]);
            }
            _ => panic!("inconsistent"),
        }
    }

    #[test]
    fn inconsistent_reported() {
        let a = vec![vec![q(1), q(1)], vec![q(1), q(1)]];
        let b = vec![q(1), q(2)];
        assert_eq!(solve_rational(&a, &b), Solution::Inconsistent);
    }

    #[test]
    fn planted_20x20() {
        // deterministic pseudo-random integer system with a planted solution
        let n = 20;
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 19) as i64 - 9
        };
        let a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { q(next() + 40) } else { q(next()) })
                    .collect()
            })
            .collect();
        let planted: Vec<BigRational> = (0..n).map(|_| q(next())).collect();
        let b: Vec<BigRational> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| &a[i][j] * &planted[j])
                    .fold(BigRational::zero(), |acc, v| acc + v)
            })
            .collect();
        match solve_rational(&a, &b) {
            Solution::Solved { particular, nullspace } => {
                assert!(nullspace.is_empty(), "diagonally dominant system is regular");
                assert_eq!(particular, planted);
            }
            _ => panic!("inconsistent"),
        }
    }
}
