//! Reflected Brownian motion on the orthant: an Euler scheme whose reflection
//! step solves a small linear complementarity problem exactly by active-set
//! enumeration.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::reflection::completely_s;
use crate::rng::{RngStream, StreamRng};

/// Largest dimension handled by the active-set solver.
pub const MAX_SRBM_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Cumulative pushing, starting at zero.
    pub pushing: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrbmSpec {
    pub drift: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub reflection: RationalMatrix,
    pub initial: Vec<f64>,
}

impl SrbmSpec {
    /// Zero-drift spec started at the origin.
    pub fn new(covariance: Vec<Vec<f64>>, reflection: RationalMatrix) -> Result<Self> {
        let m = covariance.len();
        let spec = Self { drift: vec![0.0; m], covariance, reflection, initial: vec![0.0; m] };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.covariance.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.dim();
        if m == 0 || m > MAX_SRBM_DIM {
            return Err(Error::Dimension(format!("SRBM dimension {m} outside 1..={MAX_SRBM_DIM}")));
        }
        if self.drift.len() != m || self.initial.len() != m || self.covariance.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("inconsistent SRBM dimensions".into()));
        }
        if self.reflection.rows() != m || self.reflection.cols() != m {
            return Err(Error::Dimension("reflection matrix must be m x m".into()));
        }
        for i in 0..m {
            if self.covariance[i][i] < 0.0 {
                return Err(Error::InvalidParams("covariance has a negative diagonal entry".into()));
            }
            for j in 0..i {
                if self.covariance[i][j] != self.covariance[j][i] {
                    return Err(Error::InvalidParams("covariance is not symmetric".into()));
                }
            }
        }
        if self.initial.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidParams("initial point outside the orthant".into()));
        }
        if !completely_s(&self.reflection)? {
            return Err(Error::InvalidParams("reflection matrix is not completely-S".into()));
        }
        Ok(())
    }
}

/// Gaussian increments with covariance `Gamma * dt` and drift `theta * dt`.
#[derive(Debug, Clone)]
pub struct GaussianIncrements {
    chol: Vec<Vec<f64>>,
    drift_dt: Vec<f64>,
    z: Vec<f64>,
}

impl GaussianIncrements {
    pub fn new(covariance: &[Vec<f64>], drift: &[f64], dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParams(format!("time step {dt} must be positive")));
        }
        let m = covariance.len();
        let scaled: Vec<Vec<f64>> = covariance.iter().map(|r| r.iter().map(|v| v * dt).collect()).collect();
        Ok(Self {
            chol: cholesky_psd(&scaled)?,
            drift_dt: drift.iter().map(|t| t * dt).collect(),
            z: vec![0.0; m],
        })
    }

    #[inline]
    pub fn sample(&mut self, rng: &mut StreamRng, out: &mut [f64]) {
        for z in self.z.iter_mut() {
            *z = StandardNormal.sample(rng);
        }
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.drift_dt[i];
            for (l, z) in self.chol[i][..=i].iter().zip(&self.z) {
                acc += l * z;
            }
            *o = acc;
        }
    }
}

/// Lower Cholesky factor of a positive semidefinite matrix; zero pivots
/// produce zero columns.
pub fn cholesky_psd(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = a.len();
    let mut l = vec![vec![0.0; m]; m];
    let scale = a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    for j in 0..m {
        let mut diag = a[j][j];
        for k in 0..j {
            diag -= l[j][k] * l[j][k];
        }
        if diag < -tol {
            return Err(Error::InvalidParams("covariance is not positive semidefinite".into()));
        }
        if diag <= tol {
            continue;
        }
        let root = diag.sqrt();
        l[j][j] = root;
        for i in j + 1..m {
            let mut v = a[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            l[i][j] = v / root;
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcpSolution {
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    pub active: Vec<usize>,
}

/// Active sets ordered by cardinality, then lexicographically.
fn active_sets(m: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (0u32..1 << m).map(|mask| (0..m).filter(|&i| mask >> i & 1 == 1).collect()).collect();
    sets.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    sets
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            if factor != 0.0 {
                for c in col..n {
                    a[r][c] -= factor * a[col][c];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        for j in i + 1..n {
            v -= a[i][j] * x[j];
        }
        x[i] = v / a[i][i];
    }
    Some(x)
}

/// Small-dimension LCP `w = z + R y`, `w, y >= 0`, `w_i y_i = 0`.
#[derive(Debug, Clone)]
pub struct LcpSolver {
    r: Vec<Vec<f64>>,
    sets: Vec<Vec<usize>>,
}

impl LcpSolver {
    pub fn new(r: Vec<Vec<f64>>) -> Result<Self> {
        let m = r.len();
        if m == 0 || m > MAX_SRBM_DIM || r.iter().any(|row| row.len() != m) {
            return Err(Error::Dimension(format!("LCP matrix must be square with size 1..={MAX_SRBM_DIM}")));
        }
        Ok(Self { sets: active_sets(m), r })
    }

    fn try_set(&self, z: &[f64], set: &[usize]) -> Option<LcpSolution> {
        let m = z.len();
        if set.is_empty() {
            return z.iter().all(|&v| v >= 0.0).then(|| LcpSolution { w: z.to_vec(), y: vec![0.0; m], active: vec![] });
        }
        let scale = 1.0 + z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let tol = 1e-10 * scale;
        let a: Vec<Vec<f64>> = set.iter().map(|&i| set.iter().map(|&j| self.r[i][j]).collect()).collect();
        let b: Vec<f64> = set.iter().map(|&i| -z[i]).collect();
        let ys = solve_dense(a, b)?;
        if ys.iter().any(|&v| v < -tol || !v.is_finite()) {
            return None;
        }
        let mut y = vec![0.0; m];
        for (&i, &v) in set.iter().zip(&ys) {
            y[i] = v.max(0.0);
        }
        let mut w = vec![0.0; m];
        for i in 0..m {
            if set.contains(&i) {
                continue;
            }
            let mut v = z[i];
            for &j in set {
                v += self.r[i][j] * y[j];
            }
            if v < -tol {
                return None;
            }
            w[i] = v.max(0.0);
        }
        Some(LcpSolution { w, y, active: set.to_vec() })
    }

    /// First feasible active set in the tie-break order.
    pub fn solve(&self, z: &[f64]) -> Result<LcpSolution> {
        self.sets
            .iter()
            .find_map(|s| self.try_set(z, s))
            .ok_or_else(|| Error::NoFeasibleActiveSet(z.to_vec()))
    }

    /// Every feasible active set, in tie-break order.
    pub fn solve_all(&self, z: &[f64]) -> Vec<LcpSolution> {
        self.sets.iter().filter_map(|s| self.try_set(z, s)).collect()
    }
}

/// One-dimensional reflected Gaussian walk: `W = X - min(X)` applied stepwise.
pub fn reflected_bm_1d(variance: f64, horizon: f64, dt: f64, stream: RngStream) -> Result<PathSample> {
    if !(variance >= 0.0) {
        return Err(Error::InvalidParams(format!("variance {variance} must be nonnegative")));
    }
    let steps = step_count(horizon, dt)?;
    let mut noise = GaussianIncrements::new(&[vec![variance]], &[0.0], dt)?;
    let mut rng = stream.rng();
    let mut dx = [0.0];
    let (mut w, mut y) = (0.0f64, 0.0f64);
    let mut path = PathSample { times: vec![0.0], states: vec![vec![0.0]], pushing: vec![vec![0.0]] };
    for k in 1..=steps {
        noise.sample(&mut rng, &mut dx);
        let z = w + dx[0];
        if z >= 0.0 {
            w = z;
        } else {
            y += -z;
            w = 0.0;
        }
        path.times.push(k as f64 * dt);
        path.states.push(vec![w]);
        path.pushing.push(vec![y]);
    }
    Ok(path)
}

fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(horizon >= 0.0) {
        return Err(Error::InvalidParams(format!("need dt > 0 and horizon >= 0, got dt={dt}, horizon={horizon}")));
    }
    Ok((horizon / dt).round() as usize)
}

/// Stepwise Euler/LCP simulator.
#[derive(Debug, Clone)]
pub struct SrbmStepper {
    solver: LcpSolver,
    noise: GaussianIncrements,
    rng: StreamRng,
    w: Vec<f64>,
    y: Vec<f64>,
    dx: Vec<f64>,
    z: Vec<f64>,
}

impl SrbmStepper {
    pub fn new(spec: &SrbmSpec, dt: f64, stream: RngStream) -> Result<Self> {
        spec.validate()?;
        let m = spec.dim();
        Ok(Self {
            solver: LcpSolver::new(spec.reflection.to_f64())?,
            noise: GaussianIncrements::new(&spec.covariance, &spec.drift, dt)?,
            rng: stream.rng(),
            w: spec.initial.clone(),
            y: vec![0.0; m],
            dx: vec![0.0; m],
            z: vec![0.0; m],
        })
    }

    /// Advances one step and returns the pushing increment's active set.
    pub fn step(&mut self) -> Result<LcpSolution> {
        self.noise.sample(&mut self.rng, &mut self.dx);
        for i in 0..self.w.len() {
            self.z[i] = self.w[i] + self.dx[i];
        }
        let sol = self.solver.solve(&self.z)?;
        self.w.copy_from_slice(&sol.w);
        for (acc, v) in self.y.iter_mut().zip(&sol.y) {
            *acc += v;
        }
        Ok(sol)
    }

    pub fn state(&self) -> &[f64] {
        &self.w
    }

    pub fn pushing(&self) -> &[f64] {
        &self.y
    }

    /// Last pre-reflection point `z = W_k + dX_k`.
    pub fn last_z(&self) -> &[f64] {
        &self.z
    }
}

pub fn srbm_euler(spec: &SrbmSpec, horizon: f64, dt: f64, stream: RngStream) -> Result<PathSample> {
    let steps = step_count(horizon, dt)?;
    let mut sim = SrbmStepper::new(spec, dt, stream)?;
    let mut path = PathSample {
        times: vec![0.0],
        states: vec![spec.initial.clone()],
        pushing: vec![vec![0.0; spec.dim()]],
    };
    for k in 1..=steps {
        sim.step()?;
        path.times.push(k as f64 * dt);
        path.states.push(sim.state().to_vec());
        path.pushing.push(sim.pushing().to_vec());
    }
    Ok(path)
}

/// State at `horizon` without storing the path.
pub fn srbm_endpoint(spec: &SrbmSpec, horizon: f64, dt: f64, stream: RngStream) -> Result<Vec<f64>> {
    let steps = step_count(horizon, dt)?;
    let mut sim = SrbmStepper::new(spec, dt, stream)?;
    for _ in 0..steps {
        sim.step()?;
    }
    Ok(sim.state().to_vec())
}

/// Largest coordinate range of `values` over grid points in `[t1, t2]`.
pub fn oscillation_of(times: &[f64], values: &[Vec<f64>], t1: f64, t2: f64) -> Result<f64> {
    if !(t1 < t2) {
        return Err(Error::EmptyWindow(t1, t2));
    }
    let window: Vec<&Vec<f64>> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t1 && **t <= t2)
        .map(|(_, v)| v)
        .collect();
    let first = window.first().ok_or(Error::EmptyWindow(t1, t2))?;
    let mut osc = 0.0f64;
    for i in 0..first.len() {
        let (lo, hi) = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[i]), hi.max(v[i])));
        osc = osc.max(hi - lo);
    }
    Ok(osc)
}

pub fn oscillation(path: &PathSample, t1: f64, t2: f64) -> Result<f64> {
    oscillation_of(&path.times, &path.states, t1, t2)
}
