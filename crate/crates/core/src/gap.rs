//! Gap projection, bulk increments, exact kernels and the Skorokhod
//! decomposition `W = X + R Y + alpha`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bbs::{step_in_place, BallConfig, CoinVector};
use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::params::{q_int, q_to_string, Capacity, DynamicsParams, Q};
use crate::partition::BoundaryPartition;

/// Largest ball count for which kernels are enumerated over all coins.
pub const MAX_ENUMERATION_D: usize = 12;

/// `w[i] = positions[i + 1] - positions[i] - 1`.
pub fn project(config: &BallConfig) -> Result<Vec<i64>> {
    if config.d() < 2 {
        return Err(Error::Dimension("gap vector needs at least two balls".into()));
    }
    Ok(config.positions().windows(2).map(|w| w[1] - w[0] - 1).collect())
}

/// `dX[i] = eta[i + 1] - eta[i]`.
pub fn bulk_increment(coins: &[bool]) -> Vec<i64> {
    coins.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect()
}

/// Bulk increment of the PushTASEP jump chain when particle `i` jumps:
/// `e_{i-1} - e_i` with the out-of-range unit vectors dropped.
pub fn push_bulk_increment(d: usize, i: usize) -> Vec<i64> {
    let mut dx = vec![0; d - 1];
    if i > 0 {
        dx[i - 1] += 1;
    }
    if i < d - 1 {
        dx[i] -= 1;
    }
    dx
}

pub fn is_boundary(w: &[i64]) -> bool {
    w.contains(&0)
}

/// Gap increment produced by each of the `2^d` coin vectors at gap `w`,
/// indexed by the coin mask (bit `i` is ball `i`).
pub fn coin_increments(w: &[i64], capacity: Capacity) -> Result<Vec<Vec<i64>>> {
    let d = w.len() + 1;
    if d > MAX_ENUMERATION_D {
        return Err(Error::DimensionTooLarge { found: d, max: MAX_ENUMERATION_D });
    }
    let start = BallConfig::from_gaps(w)?;
    let mut pos = vec![0; d];
    let mut coins = vec![false; d];
    let mut out = Vec::with_capacity(1 << d);
    for mask in 0..1u64 << d {
        for (i, c) in coins.iter_mut().enumerate() {
            *c = mask >> i & 1 == 1;
        }
        pos.copy_from_slice(start.positions());
        step_in_place(&mut pos, capacity, &coins);
        out.push(
            pos.windows(2)
                .zip(w)
                .map(|(p, &g)| p[1] - p[0] - 1 - g)
                .collect(),
        );
    }
    Ok(out)
}

/// Probability of each coin mask under the exact parameter.
pub fn coin_weights(params: &DynamicsParams) -> Vec<Q> {
    let d = params.d;
    let eps = params.epsilon.exact();
    let success = Q::one() - &eps;
    (0..1u64 << d)
        .map(|mask| {
            let ones = mask.count_ones() as usize;
            let mut w = Q::one();
            for _ in 0..ones {
                w *= &success;
            }
            for _ in 0..d - ones {
                w *= &eps;
            }
            w
        })
        .collect()
}

/// Exact one-step distribution of `dW` from gap `w`.
pub fn exact_kernel(w: &[i64], params: &DynamicsParams) -> Result<BTreeMap<Vec<i64>, Q>> {
    if w.len() + 1 != params.d {
        return Err(Error::Dimension(format!("gap vector of length {} for d = {}", w.len(), params.d)));
    }
    let incs = coin_increments(w, params.capacity)?;
    let mut kernel: BTreeMap<Vec<i64>, Q> = BTreeMap::new();
    for (inc, p) in incs.into_iter().zip(coin_weights(params)) {
        if p.is_zero() {
            continue;
        }
        *kernel.entry(inc).or_insert_with(Q::zero) += p;
    }
    Ok(kernel)
}

/// `E[dW | W = w]` computed exactly.
pub fn kernel_mean(w: &[i64], params: &DynamicsParams) -> Result<Vec<Q>> {
    let mut mean = vec![Q::zero(); w.len()];
    for (inc, p) in exact_kernel(w, params)? {
        for (m, v) in mean.iter_mut().zip(inc) {
            *m += &p * q_int(v);
        }
    }
    Ok(mean)
}

/// Number of times `t` with some gap equal to zero.
pub fn boundary_local_time<'a, I>(gaps: I) -> u64
where
    I: IntoIterator<Item = &'a [i64]>,
{
    gaps.into_iter().filter(|w| is_boundary(w)).count() as u64
}

/// Aligned records of `W = X + R Y + alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkorokhodTrace {
    pub w: Vec<Vec<i64>>,
    pub x: Vec<Vec<i64>>,
    pub y: Vec<Vec<u64>>,
    #[serde(serialize_with = "ser_q_rows", deserialize_with = "de_q_rows")]
    pub alpha: Vec<Vec<Q>>,
    /// Cell (0-based) occupied by `W_t`, `None` in the interior.
    pub cells: Vec<Option<usize>>,
}

fn ser_q_rows<S: serde::Serializer>(rows: &[Vec<Q>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    rows.iter()
        .map(|r| r.iter().map(q_to_string).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .serialize(s)
}

fn de_q_rows<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Q>>, D::Error> {
    let raw = Vec::<Vec<String>>::deserialize(d)?;
    raw.iter()
        .map(|r| r.iter().map(|s| crate::params::q_parse(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()
        .map_err(serde::de::Error::custom)
}

impl SkorokhodTrace {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Checks every trace invariant with exact arithmetic.
    pub fn verify(&self, r: &RationalMatrix) -> Result<()> {
        let fail = |t: usize, msg: &str| Err(Error::InvalidConfig(format!("trace step {t}: {msg}")));
        for t in 0..self.len() {
            let ry = r.mul_counts(&self.y[t])?;
            for i in 0..self.w[t].len() {
                if q_int(self.w[t][i]) != q_int(self.x[t][i]) + &ry[i] + &self.alpha[t][i] {
                    return fail(t, "W != X + RY + alpha");
                }
                if self.w[t][i] < 0 {
                    return fail(t, "negative gap");
                }
            }
            if t == 0 {
                if self.y[0].iter().any(|&v| v != 0) {
                    return fail(0, "Y does not start at zero");
                }
                continue;
            }
            let prev = t - 1;
            let dy: Vec<u64> = match self.y[t].iter().zip(&self.y[prev]).map(|(a, b)| a.checked_sub(*b)).collect() {
                Some(v) => v,
                None => return fail(t, "Y decreased"),
            };
            let active: Vec<usize> = (0..dy.len()).filter(|&j| dy[j] != 0).collect();
            match (self.cells[prev], active.as_slice()) {
                (None, []) => {
                    if self.alpha[t] != self.alpha[prev] {
                        return fail(t, "alpha moved on an interior step");
                    }
                }
                (Some(j), [a]) if *a == j && dy[j] == 1 => {}
                _ => return fail(t, "Y increment inconsistent with cell occupancy"),
            }
        }
        Ok(())
    }
}

fn assemble_trace(
    w: Vec<Vec<i64>>,
    bulk: impl Iterator<Item = Vec<i64>>,
    partition: &BoundaryPartition,
    r: &RationalMatrix,
) -> Result<SkorokhodTrace> {
    let m = partition.d() - 1;
    let k = partition.k();
    if r.rows() != m || r.cols() != k {
        return Err(Error::Dimension(format!(
            "reflection matrix is {}x{}, partition needs {m}x{k}",
            r.rows(),
            r.cols()
        )));
    }
    let n = w.len();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    let mut cells = Vec::with_capacity(n);
    x.push(w[0].clone());
    y.push(vec![0u64; k]);
    alpha.push(vec![Q::zero(); m]);
    let mut bulk = bulk;
    for t in 0..n {
        if w[t].len() != m {
            return Err(Error::Dimension(format!("gap vector of length {} at step {t}", w[t].len())));
        }
        cells.push(partition.cell_of(&w[t]));
        if t + 1 == n {
            break;
        }
        let dx = bulk.next().ok_or_else(|| Error::Dimension("fewer increments than steps".into()))?;
        let xt: Vec<i64> = x[t].iter().zip(&dx).map(|(a, b)| a + b).collect();
        let mut yt = y[t].clone();
        if let Some(j) = cells[t] {
            yt[j] += 1;
        }
        let ry = r.mul_counts(&yt)?;
        let at = (0..m).map(|i| q_int(w[t + 1][i] - xt[i]) - &ry[i]).collect();
        x.push(xt);
        y.push(yt);
        alpha.push(at);
    }
    Ok(SkorokhodTrace { w, x, y, alpha, cells })
}

/// Decomposes an SBBS trajectory given the coins of each step.
pub fn decompose_trajectory(
    configs: &[BallConfig],
    coins: &[CoinVector],
    partition: &BoundaryPartition,
    r: &RationalMatrix,
) -> Result<SkorokhodTrace> {
    if configs.is_empty() {
        return Err(Error::InvalidConfig("empty trajectory".into()));
    }
    if coins.len() + 1 != configs.len() {
        return Err(Error::Dimension(format!("{} coin vectors for {} configurations", coins.len(), configs.len())));
    }
    let w = configs.iter().map(project).collect::<Result<Vec<_>>>()?;
    assemble_trace(w, coins.iter().map(|c| bulk_increment(&c.eta)), partition, r)
}

/// Decomposes a PushTASEP jump chain given the particle chosen at each jump.
pub fn pushtasep_jump_decomposition(
    states: &[Vec<i64>],
    particles: &[usize],
    partition: &BoundaryPartition,
    r: &RationalMatrix,
) -> Result<SkorokhodTrace> {
    if states.is_empty() {
        return Err(Error::InvalidConfig("empty trajectory".into()));
    }
    if particles.len() + 1 != states.len() {
        return Err(Error::Dimension(format!("{} jumps for {} states", particles.len(), states.len())));
    }
    let d = states[0].len();
    let w = states
        .iter()
        .map(|s| BallConfig::new(s.clone()).and_then(|c| project(&c)))
        .collect::<Result<Vec<_>>>()?;
    assemble_trace(w, particles.iter().map(|&i| push_bulk_increment(d, i)), partition, r)
}
