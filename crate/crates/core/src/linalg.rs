//! Exact Gaussian elimination over the rationals.

use crate::num::Q;
use num_traits::Zero;

/// Solves `a · x = b`; `None` if `a` is singular.
pub fn solve(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        // prefer the pivot with the smallest representation to limit growth
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .min_by_key(|&r| a[r][col].numer().bits() + a[r][col].denom().bits())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Q::from_integer(1.into()) / &a[col][col];
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in col..n {
                if !a[col][j].is_zero() {
                    let t = &f * &a[col][j];
                    a[r][j] -= t;
                }
            }
            let t = &f * &b[col];
            b[r] -= t;
        }
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, qf};
    use proptest::prelude::*;

    #[test]
    fn solves_small_system() {
        let a = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        let x = solve(a, vec![q(3), q(5)]).unwrap();
        assert_eq!(x, vec![qf(4, 5), qf(7, 5)]);
    }

    #[test]
    fn singular_is_none() {
        let a = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert!(solve(a, vec![q(1), q(2)]).is_none());
    }

    proptest! {
        #[test]
        fn residual_is_zero(entries in proptest::collection::vec(-9i64..10, 16), rhs in proptest::collection::vec(-9i64..10, 4)) {
            let a: Vec<Vec<Q>> = entries.chunks(4).map(|r| r.iter().map(|&x| q(x)).collect()).collect();
            let b: Vec<Q> = rhs.iter().map(|&x| q(x)).collect();
            if let Some(x) = solve(a.clone(), b.clone()) {
                for i in 0..4 {
                    let lhs: Q = (0..4).map(|j| &a[i][j] * &x[j]).sum();
                    prop_assert_eq!(&lhs, &b[i]);
                }
            }
        }
    }
}
