//! Stochastic box-ball dynamics: coins, carrier sweep, trajectories and
//! soliton censuses.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Capacity, DynamicsParams, Epsilon};
use crate::rng::{RngStream, StreamRng};

/// Strictly increasing ball positions on the sites `0, 1, 2, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct BallConfig {
    positions: Vec<i64>,
}

impl BallConfig {
    pub fn new(positions: Vec<i64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidConfig("no balls".into()));
        }
        if positions[0] < 0 {
            return Err(Error::InvalidConfig(format!("negative site {}", positions[0])));
        }
        if let Some(w) = positions.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "positions not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
        Ok(Self { positions })
    }

    /// Adjacent block `0, 1, ..., d-1`.
    pub fn block(d: usize) -> Self {
        Self { positions: (0..d as i64).collect() }
    }

    /// Configuration with first ball at site 0 and the given gaps.
    pub fn from_gaps(gaps: &[i64]) -> Result<Self> {
        let mut positions = Vec::with_capacity(gaps.len() + 1);
        positions.push(0);
        for &g in gaps {
            if g < 0 {
                return Err(Error::InvalidConfig(format!("negative gap {g}")));
            }
            positions.push(positions.last().unwrap() + g + 1);
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn d(&self) -> usize {
        self.positions.len()
    }

    pub fn shifted(&self, s: i64) -> Result<Self> {
        Self::new(self.positions.iter().map(|p| p + s).collect())
    }

    pub fn into_positions(self) -> Vec<i64> {
        self.positions
    }
}

impl TryFrom<Vec<i64>> for BallConfig {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BallConfig> for Vec<i64> {
    fn from(c: BallConfig) -> Self {
        c.positions
    }
}

/// Pickup coins, one per ball in left-to-right order.
///
/// `eta[i] == true` means the attempt on ball `i` succeeds, which happens with
/// probability `1 - epsilon`. A full carrier skips the ball whatever the coin.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoinVector {
    pub eta: Vec<bool>,
}

impl CoinVector {
    pub fn new(eta: Vec<bool>) -> Self {
        Self { eta }
    }

    /// Coins from the low `d` bits of `mask`, bit `i` governing ball `i`.
    pub fn from_mask(mask: u64, d: usize) -> Self {
        Self { eta: (0..d).map(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn successes(&self) -> usize {
        self.eta.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CarrierEvent {
    Pickup { site: i64, ball: usize },
    Skip { site: i64, ball: usize },
    Drop { site: i64 },
}

/// Carrier loads and events of one sweep. `gamma[k]` is the load before
/// site `k` is scanned, so `gamma[0] == 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarrierTrace {
    pub gamma: Vec<u32>,
    pub events: Vec<CarrierEvent>,
}

/// Coin source with an exact integer threshold.
#[derive(Debug, Clone, Copy)]
pub struct CoinSampler {
    kind: SamplerKind,
}

#[derive(Debug, Clone, Copy)]
enum SamplerKind {
    Always,
    Never,
    Below(u64),
}

impl CoinSampler {
    pub fn new(epsilon: Epsilon) -> Self {
        let kind = if epsilon.is_zero() {
            SamplerKind::Always
        } else if epsilon.is_one() {
            SamplerKind::Never
        } else {
            SamplerKind::Below(epsilon.success_threshold())
        };
        Self { kind }
    }

    #[inline]
    pub fn flip<R: RngCore>(&self, rng: &mut R) -> bool {
        match self.kind {
            SamplerKind::Always => true,
            SamplerKind::Never => false,
            SamplerKind::Below(t) => rng.next_u64() < t,
        }
    }

    #[inline]
    pub fn fill<R: RngCore>(&self, rng: &mut R, out: &mut [bool]) {
        for b in out.iter_mut() {
            *b = self.flip(rng);
        }
    }
}

pub fn draw_coins<R: RngCore>(params: &DynamicsParams, rng: &mut R) -> CoinVector {
    let mut eta = vec![false; params.d];
    CoinSampler::new(params.epsilon).fill(rng, &mut eta);
    CoinVector { eta }
}

/// Site-by-site carrier sweep with a full trace.
pub fn carrier_sweep(
    config: &BallConfig,
    params: &DynamicsParams,
    coins: &CoinVector,
) -> Result<(BallConfig, CarrierTrace)> {
    let d = config.d();
    if coins.len() != d {
        return Err(Error::Dimension(format!("{} coins for {d} balls", coins.len())));
    }
    let cap = params.capacity.limit();
    let mut load: u32 = 0;
    let mut next_ball = 0;
    let mut gamma = vec![0];
    let mut events = Vec::new();
    let mut out = Vec::with_capacity(d);
    let mut site: i64 = 0;
    while next_ball < d || load > 0 {
        if next_ball < d && config.positions[next_ball] == site {
            if load < cap && coins.eta[next_ball] {
                load += 1;
                events.push(CarrierEvent::Pickup { site, ball: next_ball });
            } else {
                if load >= cap {
                    events.push(CarrierEvent::Skip { site, ball: next_ball });
                }
                out.push(site);
            }
            next_ball += 1;
        } else if load > 0 {
            load -= 1;
            events.push(CarrierEvent::Drop { site });
            out.push(site);
        }
        gamma.push(load);
        site += 1;
    }
    Ok((BallConfig { positions: out }, CarrierTrace { gamma, events }))
}

/// One SBBS step in place, without tracing. Equivalent to [`carrier_sweep`].
#[inline]
pub fn step_in_place(positions: &mut [i64], capacity: Capacity, coins: &[bool]) {
    let cap = capacity.limit();
    let mut load: u32 = 0;
    let mut out = 0;
    // One past the last site written or scanned.
    let mut cursor = i64::MIN;
    for i in 0..positions.len() {
        let p = positions[i];
        if load > 0 {
            let room = (p - cursor).min(load as i64);
            for k in 0..room {
                positions[out] = cursor + k;
                out += 1;
            }
            load -= room as u32;
        }
        if load < cap && coins[i] {
            load += 1;
        } else {
            positions[out] = p;
            out += 1;
        }
        cursor = p + 1;
    }
    for k in 0..load as i64 {
        positions[out] = cursor + k;
        out += 1;
    }
}

pub fn step(config: &BallConfig, capacity: Capacity, coins: &CoinVector) -> Result<BallConfig> {
    if coins.len() != config.d() {
        return Err(Error::Dimension(format!("{} coins for {} balls", coins.len(), config.d())));
    }
    let mut positions = config.positions.clone();
    step_in_place(&mut positions, capacity, &coins.eta);
    Ok(BallConfig { positions })
}

/// Streaming SBBS simulator with reusable buffers.
#[derive(Debug, Clone)]
pub struct Sbbs {
    positions: Vec<i64>,
    coins: Vec<bool>,
    capacity: Capacity,
    sampler: CoinSampler,
    rng: StreamRng,
}

impl Sbbs {
    pub fn new(init: &BallConfig, params: &DynamicsParams, stream: RngStream) -> Result<Self> {
        if init.d() != params.d {
            return Err(Error::Dimension(format!(
                "configuration has {} balls, params say {}",
                init.d(),
                params.d
            )));
        }
        Ok(Self {
            positions: init.positions.clone(),
            coins: vec![false; params.d],
            capacity: params.capacity,
            sampler: CoinSampler::new(params.epsilon),
            rng: stream.rng(),
        })
    }

    #[inline]
    pub fn step(&mut self) {
        self.sampler.fill(&mut self.rng, &mut self.coins);
        step_in_place(&mut self.positions, self.capacity, &self.coins);
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    /// Coins used by the most recent step.
    pub fn last_coins(&self) -> &[bool] {
        &self.coins
    }

    pub fn config(&self) -> BallConfig {
        BallConfig { positions: self.positions.clone() }
    }

    /// Writes the gap vector into `out` (length `d - 1`).
    #[inline]
    pub fn gaps_into(&self, out: &mut [i64]) {
        for (o, w) in out.iter_mut().zip(self.positions.windows(2)) {
            *o = w[1] - w[0] - 1;
        }
    }

    #[inline]
    pub fn on_boundary(&self) -> bool {
        self.positions.windows(2).any(|w| w[1] == w[0] + 1)
    }
}

/// Trajectory of `n` steps: `n + 1` configurations, starting with `init`.
pub fn sbbs_trajectory(
    init: &BallConfig,
    params: &DynamicsParams,
    n: usize,
    stream: RngStream,
) -> Result<Vec<BallConfig>> {
    Ok(sbbs_trajectory_with_coins(init, params, n, stream)?.0)
}

/// Trajectory together with the coins of each step.
pub fn sbbs_trajectory_with_coins(
    init: &BallConfig,
    params: &DynamicsParams,
    n: usize,
    stream: RngStream,
) -> Result<(Vec<BallConfig>, Vec<CoinVector>)> {
    let mut sim = Sbbs::new(init, params, stream)?;
    let mut configs = Vec::with_capacity(n + 1);
    let mut coins = Vec::with_capacity(n);
    configs.push(init.clone());
    for _ in 0..n {
        sim.step();
        coins.push(CoinVector { eta: sim.coins.clone() });
        configs.push(sim.config());
    }
    Ok((configs, coins))
}

/// Soliton content by iterated `10` elimination.
///
/// Each round deletes every adjacent `1 0` pair of the current word at once;
/// the number of pairs removed in round `j` is the number of solitons of
/// length at least `j`. Returned in non-increasing order.
pub fn soliton_census_ts(config: &BallConfig) -> Vec<usize> {
    let d = config.d();
    let pos = config.positions();
    // A run of more than d empty sites behaves like an infinite one.
    let cap = d as i64 + 1;
    let mut word = Vec::new();
    for (i, &p) in pos.iter().enumerate() {
        word.push(true);
        let gap = match pos.get(i + 1) {
            Some(&q) => q - p - 1,
            None => cap,
        };
        word.extend(std::iter::repeat_n(false, gap.min(cap) as usize));
    }
    let mut at_least = Vec::new();
    let mut next = Vec::with_capacity(word.len());
    while word.iter().any(|&b| b) {
        next.clear();
        let mut pairs = 0;
        let mut i = 0;
        while i < word.len() {
            if word[i] && i + 1 < word.len() && !word[i + 1] {
                pairs += 1;
                i += 2;
            } else {
                next.push(word[i]);
                i += 1;
            }
        }
        std::mem::swap(&mut word, &mut next);
        at_least.push(pairs);
    }
    let mut census = Vec::with_capacity(d);
    for j in (0..at_least.len()).rev() {
        let exact = at_least[j] - at_least.get(j + 1).copied().unwrap_or(0);
        census.extend(std::iter::repeat_n(j + 1, exact));
    }
    census
}

/// Lengths of maximal runs of adjacent balls, non-increasing.
pub fn run_soliton_census(config: &BallConfig) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut len = 1;
    for w in config.positions().windows(2) {
        if w[1] == w[0] + 1 {
            len += 1;
        } else {
            runs.push(len);
            len = 1;
        }
    }
    runs.push(len);
    runs.sort_unstable_by(|a, b| b.cmp(a));
    runs
}
