//! Continuous-time PushTASEP on finitely many particles.
//!
//! Particles are indexed from 0. Events come from a single rate-`d`
//! exponential clock; at each ring a uniformly chosen particle jumps one site
//! right and pushes the block of particles directly in front of it.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushTasepState {
    pub positions: Vec<i64>,
    pub clock: f64,
}

impl PushTasepState {
    pub fn new(positions: Vec<i64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidConfig("no particles".into()));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("positions not strictly increasing".into()));
        }
        Ok(Self { positions, clock: 0.0 })
    }

    pub fn d(&self) -> usize {
        self.positions.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub particle: usize,
}

/// Moves particle `i` right by one, cascading through the block ahead.
#[inline]
pub fn push_move_in_place(positions: &mut [i64], i: usize) {
    let mut j = i;
    positions[j] += 1;
    while j + 1 < positions.len() && positions[j + 1] == positions[j] {
        positions[j + 1] += 1;
        j += 1;
    }
}

pub fn push_move(state: &PushTasepState, i: usize) -> Result<PushTasepState> {
    if i >= state.d() {
        return Err(Error::InvalidParams(format!("particle {i} out of range for d = {}", state.d())));
    }
    let mut next = state.clone();
    push_move_in_place(&mut next.positions, i);
    Ok(next)
}

/// Effect of a push of particle `i` on the gap vector, applied in place.
#[inline]
pub fn push_gap_update(gaps: &mut [i64], i: usize) {
    if i > 0 {
        gaps[i - 1] += 1;
    }
    let from = i.min(gaps.len());
    if let Some(g) = gaps[from..].iter_mut().find(|g| **g > 0) {
        *g -= 1;
    }
}

/// Event-driven simulator.
#[derive(Debug, Clone)]
pub struct PushTasep {
    positions: Vec<i64>,
    time: f64,
    clock: Exp<f64>,
    rng: StreamRng,
}

impl PushTasep {
    pub fn new(init: &PushTasepState, stream: RngStream) -> Result<Self> {
        let clock = Exp::new(init.d() as f64)
            .map_err(|e| Error::InvalidParams(format!("clock rate: {e}")))?;
        Ok(Self { positions: init.positions.clone(), time: init.clock, clock, rng: stream.rng() })
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Draws the next holding time and particle without applying the move.
    #[inline]
    pub fn draw(&mut self) -> (f64, usize) {
        let hold = self.clock.sample(&mut self.rng);
        let i = self.rng.random_range(0..self.positions.len());
        (hold, i)
    }

    #[inline]
    pub fn apply(&mut self, hold: f64, i: usize) {
        self.time += hold;
        push_move_in_place(&mut self.positions, i);
    }

    #[inline]
    pub fn on_boundary(&self) -> bool {
        self.positions.windows(2).any(|w| w[1] == w[0] + 1)
    }

    /// Runs to `horizon`, returning the number of events and the time spent
    /// with some gap equal to zero.
    pub fn run_until(&mut self, horizon: f64) -> (u64, f64) {
        let mut events = 0;
        let mut boundary_time = 0.0;
        loop {
            let (hold, i) = self.draw();
            let end = self.time + hold;
            if self.on_boundary() {
                boundary_time += end.min(horizon) - self.time.min(horizon);
            }
            if end > horizon {
                self.time = horizon;
                return (events, boundary_time);
            }
            self.apply(hold, i);
            events += 1;
        }
    }

    /// Runs exactly `jumps` events of the embedded jump chain.
    pub fn run_jumps(&mut self, jumps: u64) {
        for _ in 0..jumps {
            let (hold, i) = self.draw();
            self.apply(hold, i);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushTasepTrajectory {
    pub events: Vec<JumpEvent>,
    /// `states[0]` is the initial state; `states[k]` follows `events[k - 1]`.
    pub states: Vec<PushTasepState>,
}

pub fn pushtasep_trajectory(init: &PushTasepState, horizon: f64, stream: RngStream) -> Result<PushTasepTrajectory> {
    if !(horizon >= 0.0) {
        return Err(Error::InvalidParams(format!("horizon {horizon} must be nonnegative")));
    }
    let mut sim = PushTasep::new(init, stream)?;
    let mut events = Vec::new();
    let mut states = vec![init.clone()];
    loop {
        let (hold, i) = sim.draw();
        if sim.time + hold > horizon {
            break;
        }
        sim.apply(hold, i);
        events.push(JumpEvent { time: sim.time, particle: i });
        states.push(PushTasepState { positions: sim.positions.clone(), clock: sim.time });
    }
    Ok(PushTasepTrajectory { events, states })
}

/// Jump chain of `jumps` events with the chosen particles.
pub fn pushtasep_jump_chain(init: &PushTasepState, jumps: usize, stream: RngStream) -> Result<(Vec<Vec<i64>>, Vec<usize>)> {
    let mut sim = PushTasep::new(init, stream)?;
    let mut states = Vec::with_capacity(jumps + 1);
    let mut particles = Vec::with_capacity(jumps);
    states.push(init.positions.clone());
    for _ in 0..jumps {
        let (hold, i) = sim.draw();
        sim.apply(hold, i);
        particles.push(i);
        states.push(sim.positions.clone());
    }
    Ok((states, particles))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(p: &[i64]) -> PushTasepState {
        PushTasepState::new(p.to_vec()).unwrap()
    }

    #[test]
    fn push_examples() {
        assert_eq!(push_move(&state(&[0, 1, 2]), 0).unwrap().positions, vec![1, 2, 3]);
        assert_eq!(push_move(&state(&[0, 5]), 0).unwrap().positions, vec![1, 5]);
        assert_eq!(push_move(&state(&[0, 1, 3]), 0).unwrap().positions, vec![1, 2, 3]);
        let mut gaps = vec![0, 1];
        push_gap_update(&mut gaps, 0);
        assert_eq!(gaps, vec![0, 0]);
        assert!(push_move(&state(&[0, 1]), 2).is_err());
    }

    #[test]
    fn zero_horizon_has_no_events() {
        let t = pushtasep_trajectory(&state(&[0, 1, 2]), 0.0, RngStream::new(1, 1)).unwrap();
        assert!(t.events.is_empty());
        assert_eq!(t.states.len(), 1);
    }

    #[test]
    fn event_times_increase() {
        let t = pushtasep_trajectory(&state(&[0, 1, 2]), 50.0, RngStream::new(1, 2)).unwrap();
        assert!(t.events.windows(2).all(|w| w[0].time < w[1].time));
        assert!(t.events.last().unwrap().time <= 50.0);
    }

    #[test]
    fn boundary_time_bounded_by_horizon() {
        let mut sim = PushTasep::new(&state(&[0, 1]), RngStream::new(4, 0)).unwrap();
        let (_, b) = sim.run_until(100.0);
        assert!((0.0..=100.0).contains(&b));
        assert_eq!(sim.time(), 100.0);
    }
}
