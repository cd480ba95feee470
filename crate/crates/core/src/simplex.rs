//! Exact phase-1 simplex for small feasibility problems.

use num_traits::{Signed, Zero};

use crate::matrix::RationalMatrix;
use crate::params::{q_int, Q};

/// Finds `x >= 0` with `G x >= h`, or `None` if the system is infeasible.
///
/// Dense tableau over exact rationals with Bland's rule, so it terminates on
/// degenerate problems.
pub fn find_nonnegative(g: &RationalMatrix, h: &[Q]) -> Option<Vec<Q>> {
    let (m, n) = (g.rows(), g.cols());
    assert_eq!(h.len(), m, "right-hand side length");
    if m == 0 {
        return Some(vec![Q::zero(); n]);
    }
    let width = n + 2 * m;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut rhs: Vec<Q> = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if h[i].is_negative() { q_int(-1) } else { q_int(1) };
        let mut row = vec![Q::zero(); width];
        for j in 0..n {
            row[j] = &g[(i, j)] * &sign;
        }
        row[n + i] = -sign.clone();
        row[n + m + i] = q_int(1);
        t.push(row);
        rhs.push(&h[i] * &sign);
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n + m + i).collect();
    let mut reduced: Vec<Q> = (0..width)
        .map(|j| if j >= n + m { Q::zero() } else { -t.iter().map(|r| &r[j]).sum::<Q>() })
        .collect();

    while let Some(e) = (0..width).find(|&j| reduced[j].is_negative()) {
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            if t[i][e].is_positive() {
                let ratio = &rhs[i] / &t[i][e];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // Phase 1 is bounded below by zero, so an entering column always has a pivot.
        let (r, _) = leave?;
        let pivot = t[r][e].clone();
        for v in t[r].iter_mut() {
            *v /= &pivot;
        }
        rhs[r] /= &pivot;
        let prow = t[r].clone();
        let prhs = rhs[r].clone();
        for i in 0..m {
            if i != r && !t[i][e].is_zero() {
                let factor = t[i][e].clone();
                for (v, p) in t[i].iter_mut().zip(&prow) {
                    *v -= &factor * p;
                }
                rhs[i] -= &factor * &prhs;
            }
        }
        let factor = reduced[e].clone();
        for (v, p) in reduced.iter_mut().zip(&prow) {
            *v -= &factor * p;
        }
        basis[r] = e;
    }

    let infeasibility: Q = (0..m).filter(|&i| basis[i] >= n + m).map(|i| rhs[i].clone()).sum();
    if infeasibility.is_positive() {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = rhs[i].clone();
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::q_ratio;

    fn check(g: &RationalMatrix, h: &[Q], x: &[Q]) {
        assert!(x.iter().all(|v| !v.is_negative()));
        let gx = g.mul_vec(x).unwrap();
        assert!(gx.iter().zip(h).all(|(a, b)| a >= b));
    }

    #[test]
    fn feasible_system() {
        let g = RationalMatrix::from_i64(&[&[1, -1], &[-1, 2], &[1, 1]]).unwrap();
        let h = vec![q_int(1), q_int(1), q_int(-5)];
        let x = find_nonnegative(&g, &h).unwrap();
        check(&g, &h, &x);
    }

    #[test]
    fn infeasible_system() {
        let g = RationalMatrix::from_i64(&[&[-1]]).unwrap();
        assert!(find_nonnegative(&g, &[q_int(1)]).is_none());
        let g = RationalMatrix::from_i64(&[&[1, 1], &[-1, -1]]).unwrap();
        assert!(find_nonnegative(&g, &[q_int(2), q_int(-1)]).is_none());
    }

    #[test]
    fn degenerate_system() {
        let g = RationalMatrix::from_rows(vec![
            vec![q_ratio(1, 2), q_ratio(1, 2)],
            vec![q_ratio(1, 2), q_ratio(1, 2)],
            vec![q_int(0), q_int(0)],
        ])
        .unwrap();
        let h = vec![q_int(1), q_int(1), q_int(0)];
        let x = find_nonnegative(&g, &h).unwrap();
        check(&g, &h, &x);
    }
}
