//! Exact expected boundary local time of the two-ball gap chain.
//!
//! The gap chain moves `+-1` with equal probability `a` away from 0 and
//! leaves 0 upward with probability `a0`. Both come from [`exact_kernel`].
//! At time `t` only gaps up to `min(t, n - t)` can matter: larger gaps are
//! unreachable or cannot return to 0 before `n`. The expectation counts
//! times `0..=n`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::gap::exact_kernel;
use crate::params::{q_to_f64, Capacity, DynamicsParams, Epsilon, Q};

struct TwoBallKernel {
    /// `P(+1) = P(-1)` from a positive gap.
    a: Q,
    /// `P(0 -> 1)`.
    a0: Q,
}

fn two_ball_kernel(epsilon: Epsilon, capacity: Capacity) -> Result<TwoBallKernel> {
    let params = DynamicsParams::new(epsilon, capacity, 2)?;
    let k1 = exact_kernel(&[1], &params)?;
    let k0 = exact_kernel(&[0], &params)?;
    let get = |k: &std::collections::BTreeMap<Vec<i64>, Q>, v: i64| k.get(&vec![v]).cloned().unwrap_or_else(Q::zero);
    if get(&k1, 1) != get(&k1, -1) || get(&k0, -1) != Q::zero() {
        return Err(Error::InvalidParams("two-ball kernel is not a symmetric reflected walk".into()));
    }
    Ok(TwoBallKernel { a: get(&k1, 1), a0: get(&k0, 1) })
}

fn window(t: usize, n: usize, start: usize) -> usize {
    (t + start).min(n - t)
}

/// `E[N_n]` for the two-ball chain started at gap `start`, exactly.
pub fn dp_expected_boundary_time_d2(epsilon: Epsilon, capacity: Capacity, n: usize, start: usize) -> Result<Q> {
    let k = two_ball_kernel(epsilon, capacity)?;
    let den: BigInt = k.a.denom().lcm(k.a0.denom());
    let to_int = |q: &Q| -> BigUint { (q.numer() * (&den / q.denom())).to_biguint().expect("probabilities are nonnegative") };
    let d_int = den.to_biguint().expect("positive denominator");
    let a = to_int(&k.a);
    let a0 = to_int(&k.a0);
    let b = &d_int - &a - &a;
    let stay0 = &d_int - &a0;

    let mut v: Vec<BigUint> = vec![BigUint::zero(); start + 1];
    v[start] = BigUint::one();
    let mut acc = if start == 0 { BigUint::one() } else { BigUint::zero() };
    let mut scale = BigUint::one();
    for t in 1..=n {
        let len = window(t, n, start) + 1;
        let mut next = vec![BigUint::zero(); len];
        for (g, slot) in next.iter_mut().enumerate() {
            let at = |i: usize| v.get(i);
            let mut x = BigUint::zero();
            match g {
                0 => {
                    if let Some(p) = at(0) {
                        x += &stay0 * p;
                    }
                    if let Some(p) = at(1) {
                        x += &a * p;
                    }
                }
                _ => {
                    if let Some(p) = at(g - 1) {
                        x += if g == 1 { &a0 * p } else { &a * p };
                    }
                    if let Some(p) = at(g) {
                        x += &b * p;
                    }
                    if let Some(p) = at(g + 1) {
                        x += &a * p;
                    }
                }
            }
            *slot = x;
        }
        v = next;
        acc = acc * &d_int + &v[0];
        scale *= &d_int;
    }
    Ok(Q::new(BigInt::from(acc), BigInt::from(scale)))
}

/// Floating-point version of [`dp_expected_boundary_time_d2`] for large `n`.
pub fn dp_expected_boundary_time_d2_f64(epsilon: Epsilon, capacity: Capacity, n: usize, start: usize) -> Result<f64> {
    let k = two_ball_kernel(epsilon, capacity)?;
    let a = q_to_f64(&k.a);
    let a0 = q_to_f64(&k.a0);
    let b = 1.0 - 2.0 * a;
    let stay0 = 1.0 - a0;
    let mut v = vec![0.0f64; start + 1];
    v[start] = 1.0;
    let mut total = if start == 0 { 1.0 } else { 0.0 };
    let mut next = Vec::new();
    for t in 1..=n {
        let len = window(t, n, start) + 1;
        next.clear();
        next.resize(len, 0.0);
        let at = |i: usize| v.get(i).copied().unwrap_or(0.0);
        next[0] = stay0 * at(0) + a * at(1);
        for (g, slot) in next.iter_mut().enumerate().skip(1) {
            let up = if g == 1 { a0 } else { a };
            *slot = up * at(g - 1) + b * at(g) + a * at(g + 1);
        }
        std::mem::swap(&mut v, &mut next);
        total += v[0];
    }
    Ok(total)
}

/// Leading-order asymptote of `E[N_n]` for the two-ball chain: the local time
/// at the running minimum of a lazy `+-1` walk with step variance
/// `2 eps (1 - eps)`, divided by the per-step leave probability.
pub fn two_ball_boundary_asymptote(epsilon: Epsilon, n: f64) -> f64 {
    let e = epsilon.value();
    (4.0 * n / (std::f64::consts::PI * e * (1.0 - e))).sqrt()
}

/// Exact value rendered to `f64`.
pub fn to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| q_to_f64(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{q_int, q_ratio};

    fn eps(s: &str) -> Epsilon {
        s.parse().unwrap()
    }

    #[test]
    fn small_cases() {
        let half = eps("1/2");
        assert_eq!(dp_expected_boundary_time_d2(half, Capacity::Unbounded, 0, 0).unwrap(), q_int(1));
        assert_eq!(dp_expected_boundary_time_d2(half, Capacity::Unbounded, 1, 0).unwrap(), q_ratio(7, 4));
        assert_eq!(dp_expected_boundary_time_d2(half, Capacity::Finite(1), 1, 0).unwrap(), q_ratio(7, 4));
    }

    #[test]
    fn exact_matches_float() {
        for e in ["0.2", "0.5", "0.8"] {
            let exact = dp_expected_boundary_time_d2(eps(e), Capacity::Unbounded, 300, 0).unwrap();
            let float = dp_expected_boundary_time_d2_f64(eps(e), Capacity::Unbounded, 300, 0).unwrap();
            assert!((to_f64(&exact) - float).abs() < 1e-9 * float, "{e}");
        }
    }

    #[test]
    fn brute_force_two_steps() {
        // Enumerate two steps by hand at gap 0 with a = 1/4: P(0 at t=1) = 3/4,
        // P(0 at t=2) = (3/4)^2 + (1/4)(1/4).
        let got = dp_expected_boundary_time_d2(eps("1/2"), Capacity::Unbounded, 2, 0).unwrap();
        assert_eq!(got, q_int(1) + q_ratio(3, 4) + q_ratio(9, 16) + q_ratio(1, 16));
    }

    #[test]
    fn started_away_from_zero() {
        let got = dp_expected_boundary_time_d2(eps("1/2"), Capacity::Unbounded, 1, 1).unwrap();
        assert_eq!(got, q_ratio(1, 4));
        let got = dp_expected_boundary_time_d2_f64(eps("1/2"), Capacity::Unbounded, 1, 1).unwrap();
        assert_eq!(got, 0.25);
    }
}
