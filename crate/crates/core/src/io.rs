//! CSV formats shared by the CLI and the tests.
//!
//! All writers use LF line endings, exact rationals as `p/q` and the shortest
//! round-trip decimal for floats.

use std::io::{Read, Write};

use crate::bbs::{step, BallConfig, CoinVector};
use crate::error::{Error, Result};
use crate::gap::SkorokhodTrace;
use crate::params::{q_to_string, Capacity};
use crate::pushtasep::PushTasepTrajectory;
use crate::srbm::PathSample;

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn numbered(prefix: &str, k: usize) -> impl Iterator<Item = String> + '_ {
    (1..=k).map(move |i| format!("{prefix}_{i}"))
}

/// Writes `t, x_1..x_d, eta_1..eta_d`; row `t` carries the coins of the step
/// that produced it, so row 0 has empty coin fields.
pub fn write_sbbs_trajectory<W: Write>(out: W, configs: &[BallConfig], coins: &[CoinVector]) -> Result<()> {
    if configs.is_empty() || coins.len() + 1 != configs.len() {
        return Err(Error::Dimension(format!("{} coin vectors for {} configurations", coins.len(), configs.len())));
    }
    let d = configs[0].d();
    let mut w = writer(out);
    let header: Vec<String> = std::iter::once("t".to_string()).chain(numbered("x", d)).chain(numbered("eta", d)).collect();
    w.write_record(&header)?;
    for (t, cfg) in configs.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(cfg.positions().iter().map(|x| x.to_string()));
        match t.checked_sub(1).map(|s| &coins[s]) {
            Some(c) => row.extend(c.eta.iter().map(|&b| u8::from(b).to_string())),
            None => row.extend(std::iter::repeat_n(String::new(), d)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad {what} field {s:?}")))
}

/// Reads the format of [`write_sbbs_trajectory`].
pub fn read_sbbs_trajectory<R: Read>(input: R) -> Result<(Vec<BallConfig>, Vec<CoinVector>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = r.headers()?.clone();
    let xs: Vec<usize> = (0..header.len()).filter(|&i| header[i].starts_with("x_")).collect();
    let etas: Vec<usize> = (0..header.len()).filter(|&i| header[i].starts_with("eta_")).collect();
    let t_col = header.iter().position(|h| h == "t").ok_or_else(|| Error::Parse("missing column t".into()))?;
    if xs.is_empty() || xs.len() != etas.len() {
        return Err(Error::Parse("expected matching x_i and eta_i columns".into()));
    }
    let mut configs = Vec::new();
    let mut coins = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let t: usize = parse_field(&rec[t_col], "t")?;
        if t != k {
            return Err(Error::Parse(format!("row {k} has t = {t}")));
        }
        let pos = xs.iter().map(|&i| parse_field(&rec[i], "position")).collect::<Result<Vec<i64>>>()?;
        configs.push(BallConfig::new(pos)?);
        if k > 0 {
            let eta = etas
                .iter()
                .map(|&i| match rec[i].trim() {
                    "1" => Ok(true),
                    "0" => Ok(false),
                    s => Err(Error::Parse(format!("bad coin {s:?}"))),
                })
                .collect::<Result<Vec<bool>>>()?;
            coins.push(CoinVector::new(eta));
        }
    }
    if configs.is_empty() {
        return Err(Error::Parse("trajectory has no rows".into()));
    }
    Ok((configs, coins))
}

/// Checks that each configuration follows from the previous one and its coins.
pub fn check_trajectory(configs: &[BallConfig], coins: &[CoinVector], capacity: Capacity) -> Result<()> {
    for (t, (pair, c)) in configs.windows(2).zip(coins).enumerate() {
        if step(&pair[0], capacity, c)? != pair[1] {
            return Err(Error::InvalidConfig(format!("step {} is not the carrier sweep of its coins", t + 1)));
        }
    }
    Ok(())
}

/// Writes `t, w_i, x_i, y_j, alpha_i, cell` with a 1-based cell id.
pub fn write_trace<W: Write>(out: W, trace: &SkorokhodTrace) -> Result<()> {
    let m = trace.w.first().map_or(0, Vec::len);
    let k = trace.y.first().map_or(0, Vec::len);
    let mut w = writer(out);
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(numbered("w", m))
        .chain(numbered("x", m))
        .chain(numbered("y", k))
        .chain(numbered("alpha", m))
        .chain(std::iter::once("cell".to_string()))
        .collect();
    w.write_record(&header)?;
    for t in 0..trace.len() {
        let mut row = vec![t.to_string()];
        row.extend(trace.w[t].iter().map(|v| v.to_string()));
        row.extend(trace.x[t].iter().map(|v| v.to_string()));
        row.extend(trace.y[t].iter().map(|v| v.to_string()));
        row.extend(trace.alpha[t].iter().map(q_to_string));
        row.push(trace.cells[t].map_or(String::new(), |c| (c + 1).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pushtasep<W: Write>(out: W, traj: &PushTasepTrajectory) -> Result<()> {
    let d = traj.states[0].positions.len();
    let mut w = writer(out);
    let header: Vec<String> =
        ["event".to_string(), "time".into(), "particle".into()].into_iter().chain(numbered("x", d)).collect();
    w.write_record(&header)?;
    for (k, s) in traj.states.iter().enumerate() {
        let particle = k.checked_sub(1).map_or(String::new(), |e| (traj.events[e].particle + 1).to_string());
        let mut row = vec![k.to_string(), format!("{}", s.clock), particle];
        row.extend(s.positions.iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every `stride`-th grid point of an SRBM path.
pub fn write_path<W: Write>(out: W, path: &PathSample, stride: usize) -> Result<()> {
    let m = path.states.first().map_or(0, Vec::len);
    let mut w = writer(out);
    let header: Vec<String> = std::iter::once("time".to_string()).chain(numbered("z", m)).chain(numbered("y", m)).collect();
    w.write_record(&header)?;
    let last = path.times.len().saturating_sub(1);
    for k in (0..path.times.len()).filter(|&k| k % stride.max(1) == 0 || k == last) {
        let mut row = vec![format!("{}", path.times[k])];
        row.extend(path.states[k].iter().map(|v| format!("{v}")));
        row.extend(path.pushing[k].iter().map(|v| format!("{v}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbs::sbbs_trajectory_with_coins;
    use crate::params::DynamicsParams;
    use crate::rng::RngStream;

    #[test]
    fn trajectory_round_trip() {
        let p = DynamicsParams::new("0.4".parse().unwrap(), Capacity::Finite(2), 4).unwrap();
        let (configs, coins) = sbbs_trajectory_with_coins(&BallConfig::block(4), &p, 30, RngStream::new(3, 0)).unwrap();
        let mut buf = Vec::new();
        write_sbbs_trajectory(&mut buf, &configs, &coins).unwrap();
        assert!(!buf.contains(&b'\r'));
        let (c2, k2) = read_sbbs_trajectory(buf.as_slice()).unwrap();
        assert_eq!((c2, k2), (configs.clone(), coins.clone()));
        check_trajectory(&configs, &coins, Capacity::Finite(2)).unwrap();
        let mut bad = coins;
        bad[0].eta[0] = !bad[0].eta[0];
        assert!(check_trajectory(&configs, &bad, Capacity::Finite(2)).is_err());
    }
}
