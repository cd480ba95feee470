//! Seeded Monte Carlo experiments.
//!
//! An [`ExperimentConfig`] names one experiment and its parameters. Running
//! it yields per-trial CSV rows (every row repeats the parameters) and a list
//! of [`EstimateReport`]s with the pass band each one was held to. Trials use
//! the stream `(seed, component << 32 | trial)` and are aggregated in trial
//! order, so outputs are byte-identical for any worker count.

pub mod dp;
pub mod trials;

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bbs::BallConfig;
use crate::error::{Error, Result};
use crate::params::{Capacity, DynamicsParams, Epsilon};
use crate::pushtasep::PushTasepState;
use crate::reflection::{sigma_pt, standard_matrices};
use crate::rng::RngStream;
use crate::srbm::SrbmSpec;
use crate::stats::{half_normal_cdf, ks_one_sample, ks_two_sample, log_log_slope, MeanEstimate};

pub use dp::{dp_expected_boundary_time_d2, dp_expected_boundary_time_d2_f64, two_ball_boundary_asymptote};
pub use trials::{
    default_threads, lazy_walk_minimum_visits, parallel_trials, pushtasep_checkpoints, sbbs_checkpoints, PushCheckpoint,
    SbbsCheckpoint,
};

/// Largest `n` for which the DP agreement experiment uses exact rationals.
pub const EXACT_DP_LIMIT: u64 = 2_000;

const KS_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    BoundaryTime,
    BallPositions,
    PushtasepBoundary,
    DiffusiveLimit,
    CrossModel,
    SrbmComparison,
    DpAgreement,
    SbbsVsPushtasep,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::BoundaryTime => "boundary_time",
            ExperimentKind::BallPositions => "ball_positions",
            ExperimentKind::PushtasepBoundary => "pushtasep_boundary",
            ExperimentKind::DiffusiveLimit => "diffusive_limit",
            ExperimentKind::CrossModel => "cross_model",
            ExperimentKind::SrbmComparison => "srbm_comparison",
            ExperimentKind::DpAgreement => "dp_agreement",
            ExperimentKind::SbbsVsPushtasep => "sbbs_vs_pushtasep",
        }
    }

    fn default_n(&self) -> Vec<u64> {
        match self {
            ExperimentKind::BoundaryTime | ExperimentKind::PushtasepBoundary => vec![10_000, 40_000, 160_000],
            ExperimentKind::BallPositions => vec![1_000_000],
            ExperimentKind::DpAgreement => vec![100, 1_000, 10_000],
            ExperimentKind::SbbsVsPushtasep => vec![50],
            _ => vec![10_000],
        }
    }

    fn default_tolerance(&self) -> f64 {
        match self {
            ExperimentKind::BoundaryTime => 0.1,
            ExperimentKind::BallPositions => 0.15,
            ExperimentKind::PushtasepBoundary => 0.05,
            ExperimentKind::DiffusiveLimit => 0.03,
            ExperimentKind::CrossModel => 0.05,
            ExperimentKind::SrbmComparison => 0.06,
            ExperimentKind::DpAgreement => 3.0,
            ExperimentKind::SbbsVsPushtasep => 0.05,
        }
    }

    fn min_trials(&self) -> usize {
        match self {
            ExperimentKind::DiffusiveLimit | ExperimentKind::CrossModel | ExperimentKind::SrbmComparison => 500,
            ExperimentKind::SbbsVsPushtasep => 100,
            _ => 2,
        }
    }
}

fn default_epsilon() -> Epsilon {
    Epsilon::from_ratio(1, 2).expect("1/2 is a probability")
}

fn default_capacity() -> Capacity {
    Capacity::Unbounded
}

fn default_d() -> usize {
    2
}

fn default_dt() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_epsilon")]
    pub epsilon: Epsilon,
    #[serde(default = "default_capacity")]
    pub capacity: Capacity,
    #[serde(default = "default_d")]
    pub d: usize,
    /// Step counts, or time horizons for PushTASEP-based experiments.
    #[serde(default)]
    pub n: Vec<u64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Initial gaps; the adjacent block when absent.
    #[serde(default)]
    pub initial_gaps: Option<Vec<i64>>,
    /// SRBM time step.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Pass-band parameter; its meaning is stated in each report's rule.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, epsilon: Epsilon, capacity: Capacity, d: usize, trials: usize, seed: u64) -> Self {
        Self {
            experiment,
            epsilon,
            capacity,
            d,
            n: Vec::new(),
            trials,
            seed,
            initial_gaps: None,
            dt: default_dt(),
            tolerance: None,
            output: None,
        }
    }

    pub fn with_n(mut self, n: Vec<u64>) -> Self {
        self.n = n;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Fills defaults and validates.
    pub fn resolved(&self) -> Result<Self> {
        let mut c = self.clone();
        if c.n.is_empty() {
            c.n = c.experiment.default_n();
        }
        c.n.sort_unstable();
        c.n.dedup();
        if c.tolerance.is_none() {
            c.tolerance = Some(c.experiment.default_tolerance());
        }
        if c.trials < c.experiment.min_trials() {
            return Err(Error::InsufficientSamples { needed: c.experiment.min_trials(), got: c.trials });
        }
        if c.d < 2 {
            return Err(Error::InvalidParams("experiments need d >= 2".into()));
        }
        if let Some(g) = &c.initial_gaps {
            if g.len() + 1 != c.d {
                return Err(Error::Dimension(format!("{} initial gaps for d = {}", g.len(), c.d)));
            }
        }
        match c.experiment {
            ExperimentKind::DiffusiveLimit | ExperimentKind::DpAgreement if c.d != 2 => {
                return Err(Error::InvalidParams(format!("{} needs d = 2", c.experiment.name())));
            }
            ExperimentKind::CrossModel | ExperimentKind::SrbmComparison if c.d > 5 => {
                return Err(Error::InvalidParams("SRBM comparisons support d <= 5".into()));
            }
            ExperimentKind::SrbmComparison if c.capacity.is_unit() => {
                return Err(Error::InvalidParams("srbm_comparison needs capacity >= 2; use cross_model for c = 1".into()));
            }
            ExperimentKind::DiffusiveLimit | ExperimentKind::CrossModel | ExperimentKind::SrbmComparison
                if c.epsilon.is_zero() || c.epsilon.is_one() =>
            {
                return Err(Error::InvalidParams("diffusive experiments need 0 < epsilon < 1".into()));
            }
            ExperimentKind::SbbsVsPushtasep if c.epsilon.is_one() => {
                return Err(Error::InvalidParams("epsilon = 1 freezes the dynamics".into()));
            }
            ExperimentKind::DpAgreement if c.n.iter().any(|&n| n > 10_000) => {
                return Err(Error::InvalidParams("DP oracle supports n <= 10^4".into()));
            }
            _ => {}
        }
        if !(c.dt > 0.0) {
            return Err(Error::InvalidParams("dt must be positive".into()));
        }
        Ok(c)
    }

    fn params(&self) -> Result<DynamicsParams> {
        DynamicsParams::new(self.epsilon, self.capacity, self.d)
    }

    fn init(&self) -> Result<BallConfig> {
        match &self.initial_gaps {
            Some(g) => BallConfig::from_gaps(g),
            None => Ok(BallConfig::block(self.d)),
        }
    }

    fn tol(&self) -> f64 {
        self.tolerance.unwrap_or_else(|| self.experiment.default_tolerance())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub estimate: f64,
    pub se: Option<f64>,
    pub trials: usize,
    pub prediction: Option<f64>,
    pub rule: String,
    /// `None` for diagnostics that carry no pass band.
    pub pass: Option<bool>,
}

impl EstimateReport {
    fn diagnostic(name: impl Into<String>, estimate: f64, se: Option<f64>, trials: usize, prediction: Option<f64>) -> Self {
        Self { name: name.into(), estimate, se, trials, prediction, rule: "diagnostic".into(), pass: None }
    }

    fn banded(
        name: impl Into<String>,
        estimate: f64,
        se: Option<f64>,
        trials: usize,
        prediction: Option<f64>,
        rule: String,
        pass: bool,
    ) -> Self {
        Self { name: name.into(), estimate, se, trials, prediction, rule, pass: Some(pass) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub estimates: Vec<EstimateReport>,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    estimates: &'a [EstimateReport],
    predictions: serde_json::Map<String, serde_json::Value>,
    pass: bool,
}

impl ExperimentResult {
    /// True when every banded estimate passes.
    pub fn pass(&self) -> bool {
        self.estimates.iter().all(|e| e.pass != Some(false))
    }

    pub fn estimate(&self, name: &str) -> Option<&EstimateReport> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn summary_json(&self) -> Result<String> {
        let predictions = self
            .estimates
            .iter()
            .filter_map(|e| e.prediction.map(|p| (e.name.clone(), serde_json::json!(p))))
            .collect();
        let s = Summary { config: &self.config, estimates: &self.estimates, predictions, pass: self.pass() };
        Ok(serde_json::to_string_pretty(&s)?)
    }

    /// Writes the CSV to `path` and the summary next to it as
    /// `<path>.summary.json`.
    pub fn write_files(&self, path: &Path) -> Result<PathBuf> {
        self.write_csv(std::fs::File::create(path)?)?;
        let summary = summary_path(path);
        std::fs::write(&summary, self.summary_json()? + "\n")?;
        Ok(summary)
    }
}

pub fn summary_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".summary.json");
    PathBuf::from(s)
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    prefix: Vec<String>,
}

impl Table {
    fn new(c: &ExperimentConfig, columns: &[String]) -> Self {
        let mut header: Vec<String> =
            ["experiment", "epsilon", "capacity", "d", "seed", "trial"].iter().map(|s| s.to_string()).collect();
        header.extend(columns.iter().cloned());
        let prefix = vec![
            c.experiment.name().to_string(),
            c.epsilon.to_string(),
            c.capacity.to_string(),
            c.d.to_string(),
            c.seed.to_string(),
        ];
        Self { header, rows: Vec::new(), prefix }
    }

    fn push(&mut self, trial: usize, values: Vec<String>) {
        let mut row = self.prefix.clone();
        row.push(trial.to_string());
        row.extend(values);
        self.rows.push(row);
    }
}

fn numbered(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}_{i}")).collect()
}

/// Leading coefficient `sqrt(2 eps^3 (1 - eps)^3 / pi)` of the two-ball
/// boundary time as printed in the corollary-style closed form.
pub fn closed_form_boundary_coefficient(epsilon: Epsilon) -> f64 {
    let e = epsilon.value();
    (2.0 * e.powi(3) * (1.0 - e).powi(3) / PI).sqrt()
}

/// Closed-form `sqrt(2 eps^3 (1 - eps)^5 / pi)` excess coefficient.
pub fn closed_form_excess_coefficient(epsilon: Epsilon) -> f64 {
    let e = epsilon.value();
    (2.0 * e.powi(3) * (1.0 - e).powi(5) / PI).sqrt()
}

/// Excess coefficients `(first ball, second ball)` for `d = 2` as given by the
/// closed form.
pub fn closed_form_two_ball_excess(epsilon: Epsilon, capacity: Capacity) -> (f64, f64) {
    let e = epsilon.value();
    let base = closed_form_excess_coefficient(epsilon);
    if capacity.is_unit() {
        (0.0, e * base)
    } else {
        ((1.0 - e).powi(2) * base, base)
    }
}

/// Excess coefficients implied by the one-step identity
/// `E[dzeta] = (1 - eps) + kappa 1(gap = 0)` and the boundary-time asymptote.
pub fn exact_identity_two_ball_excess(epsilon: Epsilon, capacity: Capacity) -> (f64, f64) {
    let e = epsilon.value();
    let lt = two_ball_boundary_asymptote(epsilon, 1.0);
    if capacity.is_unit() {
        (0.0, e * (1.0 - e) * lt)
    } else {
        ((1.0 - e).powi(2) * lt, (1.0 - e) * lt)
    }
}

pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let c = config.resolved()?;
    match c.experiment {
        ExperimentKind::BoundaryTime => boundary_time(&c, threads),
        ExperimentKind::BallPositions => ball_positions(&c, threads),
        ExperimentKind::PushtasepBoundary => pushtasep_boundary(&c, threads),
        ExperimentKind::DiffusiveLimit => diffusive_limit(&c, threads),
        ExperimentKind::CrossModel => cross_model(&c, threads),
        ExperimentKind::SrbmComparison => srbm_comparison(&c, threads),
        ExperimentKind::DpAgreement => dp_agreement(&c, threads),
        ExperimentKind::SbbsVsPushtasep => sbbs_vs_pushtasep(&c, threads),
    }
}

fn sbbs_runs(c: &ExperimentConfig, params: &DynamicsParams, steps: &[u64], threads: usize) -> Result<Vec<Vec<SbbsCheckpoint>>> {
    let init = c.init()?;
    parallel_trials(threads, c.trials, |t| sbbs_checkpoints(params, &init, steps, RngStream::for_trial(c.seed, 0, t)))
}

fn push_runs(c: &ExperimentConfig, horizons: &[f64], threads: usize) -> Result<Vec<Vec<PushCheckpoint>>> {
    let init = PushTasepState::new(c.init()?.into_positions())?;
    parallel_trials(threads, c.trials, |t| pushtasep_checkpoints(&init, horizons, RngStream::for_trial(c.seed, 1, t)))
}

fn boundary_time(c: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let params = c.params()?;
    let runs = sbbs_runs(c, &params, &c.n, threads)?;
    let mut table = Table::new(c, &["n".into(), "boundary_time".into()]);
    for (t, run) in runs.iter().enumerate() {
        for cp in run {
            table.push(t, vec![cp.steps.to_string(), cp.boundary_time.to_string()]);
        }
    }
    let mut estimates = Vec::new();
    let mut means = Vec::new();
    for (k, &n) in c.n.iter().enumerate() {
        let xs: Vec<f64> = runs.iter().map(|r| r[k].boundary_time as f64).collect();
        let m = MeanEstimate::from_samples(&xs);
        means.push(m.mean);
        estimates.push(EstimateReport::diagnostic(format!("mean_boundary_time_n{n}"), m.mean, Some(m.se), m.n, None));
    }
    let tol = c.tol();
    let frozen = c.epsilon.is_zero() || c.epsilon.is_one();
    let n_max = *c.n.last().expect("resolved config has n");
    if c.d == 2 && !frozen {
        let m = MeanEstimate::from_samples(&runs.iter().map(|r| r[c.n.len() - 1].boundary_time as f64).collect::<Vec<_>>());
        let sqrt_n = (n_max as f64).sqrt();
        let closed = closed_form_boundary_coefficient(c.epsilon) * sqrt_n;
        let ratio = m.mean / closed;
        estimates.push(EstimateReport::banded(
            "boundary_time_ratio_to_closed_form",
            ratio,
            Some(m.se / closed),
            m.n,
            Some(1.0),
            format!("E[N_n] / sqrt(2 eps^3 (1-eps)^3 n / pi) in [{}, {}] at n = {n_max}", 1.0 - tol, 1.0 + tol),
            (ratio - 1.0).abs() <= tol,
        ));
        let lt = two_ball_boundary_asymptote(c.epsilon, n_max as f64);
        estimates.push(EstimateReport::diagnostic(
            "boundary_time_ratio_to_local_time_asymptote",
            m.mean / lt,
            Some(m.se / lt),
            m.n,
            Some(1.0),
        ));
    }
    if c.n.len() >= 2 && means.iter().all(|&m| m > 0.0) && !frozen {
        let xs: Vec<f64> = c.n.iter().map(|&n| n as f64).collect();
        let slope = log_log_slope(&xs, &means)?;
        let pass = (slope - 0.5).abs() <= 0.05;
        let report = if c.d >= 3 {
            EstimateReport::banded("log_log_slope", slope, None, c.trials, Some(0.5), "slope in [0.45, 0.55]".into(), pass)
        } else {
            EstimateReport::diagnostic("log_log_slope", slope, None, c.trials, Some(0.5))
        };
        estimates.push(report);
    }
    Ok(ExperimentResult { config: c.clone(), header: table.header, rows: table.rows, estimates })
}

fn ball_positions(c: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let params = c.params()?;
    let runs = sbbs_runs(c, &params, &c.n, threads)?;
    let mut cols = vec!["n".to_string()];
    cols.extend(numbered("displacement", c.d));
    cols.push("boundary_time".into());
    let mut table = Table::new(c, &cols);
    for (t, run) in runs.iter().enumerate() {
        for cp in run {
            let mut v = vec![cp.steps.to_string()];
            v.extend(cp.displacement.iter().map(|x| x.to_string()));
            v.push(cp.boundary_time.to_string());
            table.push(t, v);
        }
    }
    let k = c.n.len() - 1;
    let n = c.n[k] as f64;
    let drift = (1.0 - c.epsilon.value()) * n;
    let coefficients: Vec<MeanEstimate> = (0..c.d)
        .map(|i| {
            let xs: Vec<f64> = runs.iter().map(|r| (r[k].displacement[i] as f64 - drift) / n.sqrt()).collect();
            MeanEstimate::from_samples(&xs)
        })
        .collect();
    let mut estimates = Vec::new();
    let tol = c.tol();
    if c.d == 2 {
        let (first, second) = closed_form_two_ball_excess(c.epsilon, c.capacity);
        let (first_id, second_id) = exact_identity_two_ball_excess(c.epsilon, c.capacity);
        let s = &coefficients[1];
        estimates.push(EstimateReport::banded(
            "second_ball_excess_coefficient",
            s.mean,
            Some(s.se),
            s.n,
            Some(second),
            format!("|estimate / prediction - 1| <= {tol}"),
            second != 0.0 && (s.mean / second - 1.0).abs() <= tol,
        ));
        let f = &coefficients[0];
        let z = f.z_score(first);
        estimates.push(EstimateReport::banded(
            "first_ball_excess_coefficient",
            f.mean,
            Some(f.se),
            f.n,
            Some(first),
            "|z| < 3 against the prediction".into(),
            z.abs() < 3.0,
        ));
        estimates.push(EstimateReport::diagnostic("second_ball_excess_exact_identity", s.mean, Some(s.se), s.n, Some(second_id)));
        estimates.push(EstimateReport::diagnostic("first_ball_excess_exact_identity", f.mean, Some(f.se), f.n, Some(first_id)));
    } else {
        for (i, m) in coefficients.iter().enumerate() {
            estimates.push(EstimateReport::banded(
                format!("ball_{}_excess_coefficient", i + 1),
                m.mean,
                Some(m.se),
                m.n,
                None,
                "excess >= -3 SE (displacement at least (1-eps) n up to noise)".into(),
                m.mean >= -3.0 * m.se,
            ));
        }
    }
    Ok(ExperimentResult { config: c.clone(), header: table.header, rows: table.rows, estimates })
}

fn pushtasep_boundary(c: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let horizons: Vec<f64> = c.n.iter().map(|&n| n as f64).collect();
    let runs = push_runs(c, &horizons, threads)?;
    let mut cols = vec!["horizon".to_string(), "events".into(), "boundary_time".into()];
    cols.extend(numbered("displacement", c.d));
    let mut table = Table::new(c, &cols);
    for (t, run) in runs.iter().enumerate() {
        for cp in run {
            let mut v = vec![fmt_f64(cp.horizon), cp.events.to_string(), fmt_f64(cp.boundary_time)];
            v.extend(cp.displacement.iter().map(|x| x.to_string()));
            table.push(t, v);
        }
    }
    let mut estimates = Vec::new();
    let mut means = Vec::new();
    for (k, &h) in horizons.iter().enumerate() {
        let m = MeanEstimate::from_samples(&runs.iter().map(|r| r[k].boundary_time).collect::<Vec<_>>());
        means.push(m.mean);
        estimates.push(EstimateReport::diagnostic(format!("mean_boundary_time_T{h}"), m.mean, Some(m.se), m.n, None));
    }
    if horizons.len() >= 2 && horizons[0] > 0.0 && means.iter().all(|&m| m > 0.0) {
        let slope = log_log_slope(&horizons, &means)?;
        let tol = c.tol();
        estimates.push(EstimateReport::banded(
            "log_log_slope",
            slope,
            None,
            c.trials,
            Some(0.5),
            format!("slope in [{}, {}]", 0.5 - tol, 0.5 + tol),
            (slope - 0.5).abs() <= tol,
        ));
    }
    let k = horizons.len() - 1;
    let t_max = horizons[k];
    if t_max > 0.0 {
        for i in 0..c.d {
            let xs: Vec<f64> = runs.iter().map(|r| r[k].displacement[i] as f64).collect();
            let m = MeanEstimate::from_samples(&xs);
            let sigma = m.se * (m.n as f64).sqrt() / t_max.sqrt();
            let ratio = m.mean / t_max;
            let band = 5.0 * sigma / t_max.sqrt();
            estimates.push(EstimateReport::banded(
                format!("particle_{}_speed", i + 1),
                ratio,
                Some(m.se / t_max),
                m.n,
                Some(1.0),
                format!("|E[xi_T]/T - 1| <= 5 sigma_hat / sqrt(T) = {band}"),
                (ratio - 1.0).abs() <= band,
            ));
        }
    }
    Ok(ExperimentResult { config: c.clone(), header: table.header, rows: table.rows, estimates })
}

/// SBBS steps matching diffusive time 1 for unit capacity or `d = 2`.
pub fn unit_capacity_steps(epsilon: Epsilon, n: u64) -> u64 {
    let e = epsilon.value();
    (n as f64 / (e * (1.0 - e))).floor() as u64
}

/// SBBS steps matching diffusive time 1 for capacity at least 2.
pub fn carrier_steps(epsilon: Epsilon, n: u64) -> u64 {
    (n as f64 / (1.0 - epsilon.value())).floor() as u64
}

fn diffusive_limit(c: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let params = c.params()?;
    let n = c.n[0];
    let steps = unit_capacity_steps(c.epsilon, n);
    let runs = sbbs_runs(c, &params, &[steps], threads)?;
    let scale = (n as f64).sqrt();
    let samples: Vec<f64> = runs.iter().map(|r| r[0].gaps[0] as f64 / scale).collect();
    let mut table = Table::new(c, &["n".into(), "steps".into(), "gap".into(), "scaled_gap".into()]);
    for (t, r) in runs.iter().enumerate() {
        table.push(t, vec![n.to_string(), steps.to_string(), r[0].gaps[0].to_string(), fmt_f64(samples[t])]);
    }
    let e = c.epsilon.value();
    let sigma = (2.0 * e * (1.0 - e) * steps as f64 / n as f64).sqrt();
    let ks = ks_one_sample(&samples, |x| half_normal_cdf(x, sigma), KS_ALPHA)?;
    let unit = ks_one_sample(&samples, |x| half_normal_cdf(x, 1.0), KS_ALPHA)?;
    let tol = c.tol();
    let estimates = vec![
        EstimateReport::banded(
            "ks_half_normal_matched_variance",
            ks.statistic,
            None,
            ks.n,
            Some(sigma),
            format!("KS D < {tol} against |N(0, sigma^2)| with sigma^2 = 2 eps (1-eps) steps / n"),
            ks.statistic < tol,
        ),
        EstimateReport::diagnostic("ks_half_normal_unit_variance", unit.statistic, None, unit.n, Some(1.0)),
    ];
    Ok(ExperimentResult { config: c.clone(), header: table.header, rows: table.rows, estimates })
}

fn scaled(gaps: &[i64], n: u64) -> Vec<f64> {
    let s = (n as f64).sqrt();
    gaps.iter().map(|&g| g as f64 / s).collect()
}

fn compare_samples(
    c: &ExperimentConfig,
    left: &[Vec<f64>],
    right: &[Vec<f64>],
    label: &str,
    tol: f64,
) -> Result<Vec<EstimateReport>> {
    let m = left[0].len();
    let mut out = Vec::new();
    for i in 0..m {
        let a: Vec<f64> = left.iter().map(|v| v[i]).collect();
        let b: Vec<f64> = right.iter().map(|v| v[i]).collect();
        let ks = ks_two_sample(&a, &b, KS_ALPHA)?;
        out.push(EstimateReport::banded(
            format!("ks_{label}_coordinate_{}", i + 1),
            ks.statistic,
            None,
            c.trials,
            None,
            format!("two-sample KS D < {tol}"),
            ks.statistic < tol,
        ));
    }
    let radial = |v: &[Vec<f64>]| v.iter().map(|x| x.iter().map(|y| y * y).sum::<f64>().sqrt()).collect::<Vec<_>>();
    let ks = ks_two_sample(&radial(left), &radial(right), KS_ALPHA)?;
    out.push(EstimateReport::diagnostic(format!("ks_{label}_radial"), ks.statistic, None, c.trials, None));
    Ok(out)
}

fn cross_model(c: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let params = DynamicsParams::new(c.epsilon, Capacity::Finite(1), c.d)?;
    let n = c.n[0];
    let steps = unit_capacity_steps(c.epsilon, n);
    let sbbs = sbbs_runs(c, &params, &[steps], threads)?;
    let push = push_runs(c, &[n as f64], threads)?;
    let mut cols = vec!["model".to_string(), "n".into(), "time".into()];
    cols.extend(numbered("scaled_gap", c.d - 1));
    let mut table = Table::new(c, &cols);
    let left: Vec<Vec<f64>> = sbbs.iter().map(|r| scaled(&r[0].gaps, n)).collect();
    let right: Vec<Vec<f64>> = push.iter().map(|r| scaled(&r[0].gaps, n)).collect();
    for (t, v) in left.iter().enumerate() {
        let mut row = vec!["sbbs_unit_capacity".into(), n.to_string(), steps.to_string()];
        row.extend(v.iter().map(|x| fmt_f64(*x)));
        table.push(t, row);
    }
    for (t, v) in right.iter().enumerate() {
        let mut row = vec!["pushtasep".into(), n.to_string(), n.to_string()];
        row.extend(v.iter().map(|x| fmt_f64(*x)));
        table.push(t, row);
    }
    let estimates = compare_samples(c, &left, &right, "sbbs_vs_pushtasep", c.tol())?;
    Ok(ExperimentResult { config: c.clone(), header: table.header, rows: table.rows, estimates })
}

/// SRBM limit of the capacity-`c >= 2` gap process in diffusive time:
/// covariance `eps Sigma_PT`, reflection `hatR`.
pub fn sbbs_limit_spec(epsilon: Epsilon, capacity: Capacity, d: usize) -> Result<SrbmSpec> {
    let e = epsilon.value();
    let cov: Vec<Vec<f64>> = sigma_pt(d).to_f64().into_iter().map(|r| r.into_iter().map(|v| v * e).collect()).collect();
    SrbmSpec::new(cov, standard_matrices(d, epsilon, capacity)?.hat_r)
}

fn srbm_comparison(c: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let params = c.params()?;
    let n = c.n[0];
    let steps = carrier_steps(c.epsilon, n);
    let sbbs = sbbs_runs(c, &params, &[steps], threads)?;
    let spec = sbbs_limit_spec(c.epsilon, c.capacity, c.d)?;
    let srbm = parallel_trials(threads, c.trials, |t| trials::srbm_trial(&spec, 1.0, c.dt, RngStream::for_trial(c.seed, 2, t)))?;
    let mut cols = vec!["model".to_string(), "n".into(), "time".into()];
    cols.extend(numbered("scaled_gap", c.d - 1));
    let mut table = Table::new(c, &cols);
    let left: Vec<Vec<f64>> = sbbs.iter().map(|r| scaled(&r[0].gaps, n)).collect();
    for (t, v) in left.iter().enumerate() {
        let mut row = vec!["sbbs".into(), n.to_string(), steps.to_string()];
        row.extend(v.iter().map(|x| fmt_f64(*x)));
        table.push(t, row);
    }
    for (t, v) in srbm.iter().enumerate() {
        let mut row = vec!["srbm".into(), n.to_string(), "1".into()];
        row.extend(v.iter().map(|x| fmt_f64(*x)));
        table.push(t, row);
    }
    let estimates = compare_samples(c, &left, &srbm, "sbbs_vs_srbm", c.tol())?;
    Ok(ExperimentResult { config: c.clone(), header: table.header, rows: table.rows, estimates })
}

fn dp_agreement(c: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let params = c.params()?;
    let start = c.initial_gaps.as_ref().map_or(0, |g| g[0]) as usize;
    let mut table = Table::new(c, &["n".into(), "boundary_time".into()]);
    let mut estimates = Vec::new();
    let z_max = c.tol();
    // Each n gets its own stream component so the checks are independent.
    for (k, &n) in c.n.iter().enumerate() {
        let init = c.init()?;
        let runs = parallel_trials(threads, c.trials, |t| {
            sbbs_checkpoints(&params, &init, &[n], RngStream::for_trial(c.seed, 3 + k as u32, t))
        })?;
        for (t, r) in runs.iter().enumerate() {
            table.push(t, vec![n.to_string(), r[0].boundary_time.to_string()]);
        }
        let m = MeanEstimate::from_samples(&runs.iter().map(|r| r[0].boundary_time as f64).collect::<Vec<_>>());
        let exact = if n <= EXACT_DP_LIMIT {
            dp::to_f64(&dp_expected_boundary_time_d2(c.epsilon, c.capacity, n as usize, start)?)
        } else {
            dp_expected_boundary_time_d2_f64(c.epsilon, c.capacity, n as usize, start)?
        };
        let z = m.z_score(exact);
        estimates.push(EstimateReport::banded(
            format!("dp_vs_monte_carlo_n{n}"),
            m.mean,
            Some(m.se),
            m.n,
            Some(exact),
            format!("|mean - DP| <= {z_max} SE"),
            z.abs() <= z_max,
        ));
    }
    Ok(ExperimentResult { config: c.clone(), header: table.header, rows: table.rows, estimates })
}

fn sbbs_vs_pushtasep(c: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let params = c.params()?;
    let horizon = c.n[0];
    let steps = carrier_steps(c.epsilon, horizon);
    let sbbs = sbbs_runs(c, &params, &[steps], threads)?;
    let push = push_runs(c, &[horizon as f64], threads)?;
    let mut cols = vec!["model".to_string(), "horizon".into(), "time".into()];
    cols.extend(numbered("displacement", c.d));
    let mut table = Table::new(c, &cols);
    let left: Vec<Vec<f64>> = sbbs.iter().map(|r| r[0].displacement.iter().map(|&x| x as f64).collect()).collect();
    let right: Vec<Vec<f64>> = push.iter().map(|r| r[0].displacement.iter().map(|&x| x as f64).collect()).collect();
    for (t, r) in sbbs.iter().enumerate() {
        let mut row = vec!["sbbs".into(), horizon.to_string(), steps.to_string()];
        row.extend(r[0].displacement.iter().map(|x| x.to_string()));
        table.push(t, row);
    }
    for (t, r) in push.iter().enumerate() {
        let mut row = vec!["pushtasep".into(), horizon.to_string(), horizon.to_string()];
        row.extend(r[0].displacement.iter().map(|x| x.to_string()));
        table.push(t, row);
    }
    let estimates = compare_samples(c, &left, &right, "sbbs_vs_pushtasep", c.tol())?;
    Ok(ExperimentResult { config: c.clone(), header: table.header, rows: table.rows, estimates })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "boundary_time", "trials": 10}"#).unwrap();
        let r = c.resolved().unwrap();
        assert_eq!(r.n, vec![10_000, 40_000, 160_000]);
        assert_eq!(r.tolerance, Some(0.1));
        assert_eq!(r.capacity, Capacity::Unbounded);
        assert!(ExperimentConfig::from_json(r#"{"experiment": "boundary_time", "trials": 10, "bogus": 1}"#).is_err());
        let small = ExperimentConfig::from_json(r#"{"experiment": "diffusive_limit", "trials": 10}"#).unwrap();
        assert!(matches!(small.resolved(), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn frozen_boundary_time() {
        let mut c = ExperimentConfig::new(ExperimentKind::BoundaryTime, "1".parse().unwrap(), Capacity::Unbounded, 3, 4, 1)
            .with_n(vec![10, 100]);
        c.initial_gaps = Some(vec![3, 3]);
        let r = run_experiment(&c, 1).unwrap();
        assert_eq!(r.estimate("mean_boundary_time_n100").unwrap().estimate, 0.0);
        c.initial_gaps = Some(vec![0, 3]);
        let r = run_experiment(&c, 1).unwrap();
        assert_eq!(r.estimate("mean_boundary_time_n100").unwrap().estimate, 101.0);
    }

    #[test]
    fn csv_is_thread_independent() {
        let c = ExperimentConfig::new(ExperimentKind::BallPositions, "0.3".parse().unwrap(), Capacity::Finite(2), 3, 16, 9)
            .with_n(vec![200]);
        let a = run_experiment(&c, 1).unwrap().csv_string().unwrap();
        let b = run_experiment(&c, 3).unwrap().csv_string().unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("experiment,epsilon,capacity,d,seed,trial,n,displacement_1"));
        assert!(!a.contains('\r'));
    }
}
