//! Single-trial samplers and the deterministic parallel map over trials.

use rand::RngCore;
use rayon::prelude::*;

use crate::bbs::{BallConfig, Sbbs};
use crate::error::{Error, Result};
use crate::params::DynamicsParams;
use crate::pushtasep::{PushTasep, PushTasepState};
use crate::rng::RngStream;
use crate::srbm::{srbm_endpoint, SrbmSpec};

/// Worker count from `BOXBALL_THREADS`, else the available parallelism.
pub fn default_threads() -> usize {
    std::env::var("BOXBALL_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over trial indices on a private pool; results come back in trial
/// order, so the output does not depend on `threads`.
pub fn parallel_trials<T, F>(threads: usize, trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u32) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    pool.install(|| (0..trials as u32).into_par_iter().map(&f).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbbsCheckpoint {
    pub steps: u64,
    /// Times `t` in `0..=steps` with some gap equal to zero.
    pub boundary_time: u64,
    pub displacement: Vec<i64>,
    pub gaps: Vec<i64>,
}

/// Runs one SBBS trajectory and records the state at each (ascending) step
/// count in `checkpoints`.
pub fn sbbs_checkpoints(
    params: &DynamicsParams,
    init: &BallConfig,
    checkpoints: &[u64],
    stream: RngStream,
) -> Result<Vec<SbbsCheckpoint>> {
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParams("checkpoints must be ascending".into()));
    }
    let mut sim = Sbbs::new(init, params, stream)?;
    let start = init.positions();
    let mut boundary_time = sim.on_boundary() as u64;
    let mut t = 0u64;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut gaps = vec![0; params.d.saturating_sub(1)];
    for &target in checkpoints {
        while t < target {
            sim.step();
            boundary_time += sim.on_boundary() as u64;
            t += 1;
        }
        sim.gaps_into(&mut gaps);
        out.push(SbbsCheckpoint {
            steps: t,
            boundary_time,
            displacement: sim.positions().iter().zip(start).map(|(a, b)| a - b).collect(),
            gaps: gaps.clone(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushCheckpoint {
    pub horizon: f64,
    pub events: u64,
    /// Time in `[0, horizon]` with some gap equal to zero.
    pub boundary_time: f64,
    pub displacement: Vec<i64>,
    pub gaps: Vec<i64>,
}

pub fn pushtasep_checkpoints(init: &PushTasepState, horizons: &[f64], stream: RngStream) -> Result<Vec<PushCheckpoint>> {
    if horizons.windows(2).any(|w| w[0] > w[1]) || horizons.iter().any(|h| !(*h >= 0.0)) {
        return Err(Error::InvalidParams("horizons must be nonnegative and ascending".into()));
    }
    let mut sim = PushTasep::new(init, stream)?;
    let (mut events, mut boundary_time) = (0u64, 0.0f64);
    let mut out = Vec::with_capacity(horizons.len());
    for &h in horizons {
        let (e, b) = sim.run_until(h);
        events += e;
        boundary_time += b;
        let p = sim.positions();
        out.push(PushCheckpoint {
            horizon: h,
            events,
            boundary_time,
            displacement: p.iter().zip(&init.positions).map(|(a, b)| a - b).collect(),
            gaps: p.windows(2).map(|w| w[1] - w[0] - 1).collect(),
        });
    }
    Ok(out)
}

pub fn srbm_trial(spec: &SrbmSpec, horizon: f64, dt: f64, stream: RngStream) -> Result<Vec<f64>> {
    srbm_endpoint(spec, horizon, dt, stream)
}

/// Number of times `t` in `0..=n` at which a lazy walk with
/// `P(+1) = P(-1) = a` sits at its running minimum. Simulated directly,
/// without any box-ball code.
pub fn lazy_walk_minimum_visits(a: f64, n: u64, stream: RngStream) -> u64 {
    let mut rng = stream.rng();
    let scale = 2f64.powi(64);
    let (down, up) = ((a * scale) as u64, (2.0 * a * scale).min(scale - 1.0) as u64);
    let (mut x, mut min) = (0i64, 0i64);
    let mut visits = 1;
    for _ in 0..n {
        let u = rng.next_u64();
        if u < down {
            x -= 1;
        } else if u < up {
            x += 1;
        }
        if x <= min {
            min = x;
            visits += 1;
        }
    }
    visits
}
