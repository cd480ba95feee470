//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a pass band or certificate failed, 2 usage
//! error, 3 validation error (including out-of-range flag values).

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use boxball::bbs::{sbbs_trajectory_with_coins, soliton_census_ts};
use boxball::experiments::{default_threads, run_experiment, sbbs_limit_spec, summary_path, ExperimentConfig};
use boxball::gap::decompose_trajectory;
use boxball::io::{check_trajectory, read_sbbs_trajectory, write_path, write_pushtasep, write_sbbs_trajectory, write_trace};
use boxball::matrix::RationalMatrix;
use boxball::params::q_to_string;
use boxball::partition::{build_partition, pushtasep_partition, BoundaryPartition};
use boxball::pushtasep::{pushtasep_trajectory, PushTasepState};
use boxball::reflection::{
    analytic_principal_reflection, certificate_report, completely_s, r_pt, reflection_matrix, sigma_pt, standard_matrices,
    verify_certificate, verify_witness, weakly_completely_s, SCheck,
};
use boxball::srbm::{srbm_euler, SrbmSpec};
use boxball::{BallConfig, Capacity, DynamicsParams, Epsilon, Error, RngStream};

#[derive(Parser, Debug)]
#[command(name = "boxball", version, about = "Stochastic box-ball systems, PushTASEP and their Skorokhod decompositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the SBBS and write the trajectory with its coins as CSV.
    Simulate(SimulateArgs),
    /// Simulate the continuous-time PushTASEP up to a horizon.
    Pushtasep(PushtasepArgs),
    /// Print the boundary-cell partition as JSON.
    Partition(PartitionArgs),
    /// Print the reflection matrix and the standard matrices as JSON.
    Reflect(ModelArgs),
    /// Search for a weakly-completely-S certificate.
    Scertify(ScertifyArgs),
    /// Decompose a trajectory written by `simulate` into W = X + R Y + alpha.
    Decompose(DecomposeArgs),
    /// Simulate a reflected Brownian motion by projected Euler steps.
    Srbm(SrbmArgs),
    /// Run a Monte Carlo experiment from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, visible_alias = "epsilon", default_value = "0.5")]
    eps: Epsilon,
    #[arg(long, default_value = "inf")]
    capacity: Capacity,
    /// Number of balls; the default start is the block 0..d.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Initial positions, comma separated; overrides --d.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Option<Vec<i64>>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Also print the soliton census of the start and end configurations.
    #[arg(long)]
    census: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct PushtasepArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Option<Vec<i64>>,
    #[arg(long, default_value_t = 10.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "inf")]
    capacity: Capacity,
    /// Use the PushTASEP partition instead of the SBBS one.
    #[arg(long)]
    pushtasep: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, visible_alias = "epsilon", default_value = "0.5")]
    eps: Epsilon,
    #[arg(long, default_value = "inf")]
    capacity: Capacity,
    #[arg(long)]
    pushtasep: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ScertifyArgs {
    #[arg(long, required_unless_present = "matrix")]
    d: Option<usize>,
    #[arg(long, visible_alias = "epsilon", default_value = "0.5")]
    eps: Epsilon,
    #[arg(long, default_value = "inf")]
    capacity: Capacity,
    #[arg(long)]
    pushtasep: bool,
    /// JSON file `{"r": [["p/q", ...], ...], "f": [[1], [2], ...]}` with 1-based f sets.
    #[arg(long, conflicts_with_all = ["d", "pushtasep"])]
    matrix: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long, visible_alias = "epsilon")]
    eps: Epsilon,
    #[arg(long)]
    capacity: Capacity,
    /// Trajectory CSV from `simulate`; stdin when absent.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
enum SrbmModel {
    /// Covariance eps Sigma_PT and reflection hatR.
    Sbbs,
    /// Covariance Sigma_PT and reflection R_PT.
    Pushtasep,
}

#[derive(Args, Debug)]
struct SrbmArgs {
    #[arg(long, value_enum, default_value = "sbbs")]
    model: SrbmModel,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, visible_alias = "epsilon", default_value = "0.5")]
    eps: Epsilon,
    #[arg(long, default_value = "inf")]
    capacity: Capacity,
    /// JSON `SrbmSpec`; overrides the model flags.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Write every `stride`-th grid point.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; defaults to BOXBALL_THREADS or the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// CSV output; the summary goes to `<out>.summary.json`. Overrides the
    /// config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Validation(Error),
    Band(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Validation(e.into())
    }
}

type CliResult = Result<(), Failure>;

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn echo(out: &mut dyn Write, config: &Value) -> Result<(), Error> {
    writeln!(out, "# {config}")?;
    Ok(())
}

fn write_json(out: &Option<PathBuf>, value: &Value) -> Result<(), Error> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn initial(d: usize, init: &Option<Vec<i64>>) -> Result<BallConfig, Error> {
    match init {
        Some(p) => BallConfig::new(p.clone()),
        None if d == 0 => Err(Error::InvalidParams("d must be at least 1".into())),
        None => Ok(BallConfig::block(d)),
    }
}

fn simulate(a: SimulateArgs) -> CliResult {
    let init = initial(a.d, &a.init)?;
    let params = DynamicsParams::new(a.eps, a.capacity, init.d())?;
    let (configs, coins) = sbbs_trajectory_with_coins(&init, &params, a.steps, RngStream::new(a.seed, a.stream))?;
    let config = json!({
        "subcommand": "simulate",
        "eps": a.eps,
        "capacity": a.capacity,
        "d": init.d(),
        "init": init.positions(),
        "steps": a.steps,
        "seed": a.seed,
        "stream": a.stream,
    });
    let mut out = sink(&a.output.out)?;
    echo(&mut out, &config)?;
    write_sbbs_trajectory(&mut out, &configs, &coins)?;
    out.flush()?;
    if a.census {
        let last = configs.last().expect("trajectory includes the start");
        eprintln!("census_start: {:?}", soliton_census_ts(&init));
        eprintln!("census_end: {:?}", soliton_census_ts(last));
    }
    Ok(())
}

fn pushtasep(a: PushtasepArgs) -> CliResult {
    let init = PushTasepState::new(initial(a.d, &a.init)?.into_positions())?;
    let traj = pushtasep_trajectory(&init, a.horizon, RngStream::new(a.seed, a.stream))?;
    let config = json!({
        "subcommand": "pushtasep",
        "d": init.d(),
        "init": init.positions,
        "horizon": a.horizon,
        "seed": a.seed,
        "stream": a.stream,
    });
    let mut out = sink(&a.output.out)?;
    echo(&mut out, &config)?;
    write_pushtasep(&mut out, &traj)?;
    out.flush()?;
    Ok(())
}

fn partition_for(d: usize, capacity: Capacity, pushtasep: bool) -> Result<BoundaryPartition, Error> {
    if d < 2 {
        return Err(Error::InvalidParams("partitions need d >= 2".into()));
    }
    if pushtasep {
        pushtasep_partition(d)
    } else {
        build_partition(d, capacity)
    }
}

fn partition(a: PartitionArgs) -> CliResult {
    let p = partition_for(a.d, a.capacity, a.pushtasep)?;
    let config = json!({"subcommand": "partition", "d": a.d, "capacity": a.capacity, "pushtasep": a.pushtasep});
    let mut v = serde_json::to_value(&p).map_err(Error::from)?;
    v["config"] = config;
    v["principal_ok"] = json!(p.principal_ok());
    write_json(&a.output.out, &v)?;
    Ok(())
}

fn matrix_json(m: &RationalMatrix) -> Value {
    json!(m.to_strings())
}

fn reflect(a: ModelArgs) -> CliResult {
    let p = partition_for(a.d, a.capacity, a.pushtasep)?;
    let r = reflection_matrix(&p, a.eps)?;
    let std = standard_matrices(a.d, a.eps, a.capacity)?;
    let mut v = json!({
        "config": {"subcommand": "reflect", "d": a.d, "eps": a.eps, "capacity": a.capacity, "pushtasep": a.pushtasep},
        "k": p.k(),
        "f": p.cells().iter().map(|c| c.f.clone()).collect::<Vec<_>>(),
        "representatives": p.cells().iter().map(|c| c.representative.clone()).collect::<Vec<_>>(),
        "r": matrix_json(&r),
        "hat_r": matrix_json(&std.hat_r),
        "sigma_pt": matrix_json(&sigma_pt(a.d)),
        "r_pt": matrix_json(&r_pt(a.d)),
    });
    if !a.pushtasep {
        let analytic = (1..a.d)
            .map(|j| analytic_principal_reflection(j, a.eps, a.capacity, a.d))
            .collect::<Result<Vec<_>, _>>()?;
        let matches = p.principal_ok() && analytic.iter().enumerate().all(|(j, col)| &r.column(j) == col);
        v["analytic_principal"] =
            json!(analytic.iter().map(|c| c.iter().map(q_to_string).collect::<Vec<_>>()).collect::<Vec<_>>());
        v["principal_columns_match"] = json!(matches);
    }
    write_json(&a.output.out, &v)?;
    Ok(())
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixInput {
    r: RationalMatrix,
    f: Vec<Vec<usize>>,
}

fn scertify(a: ScertifyArgs) -> CliResult {
    let (r, f, config) = match &a.matrix {
        Some(path) => {
            let input: MatrixInput = serde_json::from_str(&std::fs::read_to_string(path)?).map_err(Error::from)?;
            if input.f.iter().flatten().any(|&i| i == 0) {
                return Err(Error::InvalidParams("f sets are 1-based".into()).into());
            }
            let f = input.f.iter().map(|s| s.iter().map(|i| i - 1).collect()).collect();
            (input.r, f, json!({"subcommand": "scertify", "matrix": path}))
        }
        None => {
            let d = a.d.expect("clap requires --d without --matrix");
            let p = partition_for(d, a.capacity, a.pushtasep)?;
            let config = json!({
                "subcommand": "scertify", "d": d, "eps": a.eps, "capacity": a.capacity, "pushtasep": a.pushtasep,
            });
            (reflection_matrix(&p, a.eps)?, p.f_sets(), config)
        }
    };
    let check = weakly_completely_s(&r, &f)?;
    let verified = match &check {
        SCheck::Certified(c) => verify_certificate(&r, c),
        SCheck::Infeasible(w) => verify_witness(&r, w),
    };
    let mut v = certificate_report(&check);
    v["config"] = config;
    v["r"] = matrix_json(&r);
    v["verified"] = json!(verified);
    if r.rows() == r.cols() {
        v["completely_s"] = json!(completely_s(&r)?);
    }
    write_json(&a.output.out, &v)?;
    if check.is_certified() {
        Ok(())
    } else {
        Err(Failure::Band("no weakly-completely-S certificate; see the witness".into()))
    }
}

fn decompose(a: DecomposeArgs) -> CliResult {
    let mut text = String::new();
    match &a.input {
        Some(p) => File::open(p)?.read_to_string(&mut text)?,
        None => io::stdin().read_to_string(&mut text)?,
    };
    let (configs, coins) = read_sbbs_trajectory(text.as_bytes())?;
    check_trajectory(&configs, &coins, a.capacity)?;
    let d = configs[0].d();
    let p = partition_for(d, a.capacity, false)?;
    let r = reflection_matrix(&p, a.eps)?;
    let trace = decompose_trajectory(&configs, &coins, &p, &r)?;
    trace.verify(&r)?;
    let config = json!({
        "subcommand": "decompose", "eps": a.eps, "capacity": a.capacity, "d": d, "steps": coins.len(), "k": p.k(),
        "input": a.input,
    });
    let mut out = sink(&a.output.out)?;
    echo(&mut out, &config)?;
    write_trace(&mut out, &trace)?;
    out.flush()?;
    Ok(())
}

fn srbm(a: SrbmArgs) -> CliResult {
    let spec = match &a.spec {
        Some(path) => {
            let spec: SrbmSpec = serde_json::from_str(&std::fs::read_to_string(path)?).map_err(Error::from)?;
            spec.validate()?;
            spec
        }
        None => match a.model {
            SrbmModel::Sbbs => sbbs_limit_spec(a.eps, a.capacity, a.d)?,
            SrbmModel::Pushtasep => {
                if a.d < 2 {
                    return Err(Error::InvalidParams("d must be at least 2".into()).into());
                }
                SrbmSpec::new(sigma_pt(a.d).to_f64(), r_pt(a.d))?
            }
        },
    };
    let path = srbm_euler(&spec, a.horizon, a.dt, RngStream::new(a.seed, a.stream))?;
    let config = json!({
        "subcommand": "srbm",
        "model": if a.spec.is_some() { Value::Null } else { json!(a.model) },
        "d": spec.dim() + 1,
        "eps": a.eps,
        "capacity": a.capacity,
        "spec": spec,
        "horizon": a.horizon,
        "dt": a.dt,
        "stride": a.stride,
        "seed": a.seed,
        "stream": a.stream,
    });
    let mut out = sink(&a.output.out)?;
    echo(&mut out, &config)?;
    write_path(&mut out, &path, a.stride)?;
    out.flush()?;
    Ok(())
}

fn experiment(a: ExperimentArgs) -> CliResult {
    let mut config = ExperimentConfig::from_json(&std::fs::read_to_string(&a.config)?)?;
    if a.out.is_some() {
        config.output = a.out.clone();
    }
    let threads = a.threads.filter(|&t| t > 0).unwrap_or_else(default_threads);
    let result = run_experiment(&config, threads)?;
    let echo_line = serde_json::to_value(&result.config).map_err(Error::from)?;
    match &result.config.output {
        Some(path) => {
            let mut out = sink(&Some(path.clone()))?;
            echo(&mut out, &echo_line)?;
            result.write_csv(&mut out)?;
            out.flush()?;
            std::fs::write(summary_path(path), result.summary_json()? + "\n")?;
        }
        None => {
            let mut out = sink(&None)?;
            echo(&mut out, &echo_line)?;
            result.write_csv(&mut out)?;
            out.flush()?;
            eprintln!("{}", result.summary_json()?);
        }
    }
    for e in &result.estimates {
        let status = match e.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INFO",
        };
        eprintln!("{status} {} = {} ({})", e.name, e.estimate, e.rule);
    }
    if result.pass() {
        Ok(())
    } else {
        Err(Failure::Band(format!("{} failed a pass band", result.config.experiment.name())))
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Pushtasep(a) => pushtasep(a),
        Command::Partition(a) => partition(a),
        Command::Reflect(a) => reflect(a),
        Command::Scertify(a) => scertify(a),
        Command::Decompose(a) => decompose(a),
        Command::Srbm(a) => srbm(a),
        Command::Experiment(a) => experiment(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                _ if !e.use_stderr() => 0,
                ErrorKind::ValueValidation => 3,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Band(msg)) => {
            eprintln!("boxball: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Validation(e)) => {
            eprintln!("boxball: {e}");
            ExitCode::from(3)
        }
    }
}
