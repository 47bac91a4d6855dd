//! Simulated markets: environment generation, trials, metrics, tuning.

pub mod config;
pub mod env;
pub mod mechanism;
pub mod metrics;
pub mod tune;

pub use config::SimConfig;
pub use env::{generate_schedule, EnvConfig, PatienceDist};
pub use mechanism::{Mechanism, MechanismParams, Trial};
pub use metrics::{Estimate, Summary, TrialMetrics};
pub use tune::{TuneSpec, Tuned};

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::market::RandomSource;

/// One line of the results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub trial: u64,
    pub mechanism: String,
    pub alloc_eff: f64,
    pub net_eff: f64,
    pub revenue: f64,
    pub n_trades: usize,
    pub opt_value: f64,
    pub seed: u64,
}

impl ResultRow {
    pub fn metrics(&self) -> TrialMetrics {
        TrialMetrics {
            alloc_eff: self.alloc_eff,
            net_eff: self.net_eff,
            revenue: self.revenue,
            n_trades: self.n_trades,
            opt_value: self.opt_value,
        }
    }
}

/// Generate trial `index` of the run seeded with `seed`.
pub fn make_trial(env: &EnvConfig, seed: u64, index: u64) -> Result<Trial> {
    let source = RandomSource::new(seed).with_trial(index);
    let schedule = generate_schedule(env, &source)?;
    Ok(Trial::new(index, source, schedule))
}

/// Build the named mechanisms for `cfg`.
pub fn mechanisms(cfg: &SimConfig, names: &[&str]) -> Result<Vec<Mechanism>> {
    names.iter().map(|n| Mechanism::from_name(n, &cfg.params, cfg.env.k, cfg.env.initial_mean)).collect()
}

/// Run every mechanism on the same `trials` markets. Rows come ordered by
/// trial, then by the order of `mechanisms`, whatever the thread schedule.
pub fn compare(env: &EnvConfig, mechanisms: &[Mechanism], trials: usize, seed: u64) -> Result<Vec<ResultRow>> {
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let trial = make_trial(env, seed, i)?;
            mechanisms
                .iter()
                .map(|m| {
                    let x = trial.run(m)?;
                    Ok(ResultRow {
                        trial: i,
                        mechanism: m.name().to_string(),
                        alloc_eff: x.alloc_eff,
                        net_eff: x.net_eff,
                        revenue: x.revenue,
                        n_trades: x.n_trades,
                        opt_value: x.opt_value,
                        seed,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Per-mechanism means and standard errors, in first-seen order.
pub fn summarize(rows: &[ResultRow]) -> Vec<Summary> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.mechanism.as_str()) {
            names.push(&r.mechanism);
        }
    }
    names
        .into_iter()
        .map(|n| {
            let m: Vec<TrialMetrics> = rows.iter().filter(|r| r.mechanism == n).map(ResultRow::metrics).collect();
            Summary::of(n, &m)
        })
        .collect()
}

/// Mean allocative efficiency of `name` under `cfg` over `trials` markets.
pub fn mean_alloc_eff(cfg: &SimConfig, name: &str, trials: usize, seed: u64) -> Result<f64> {
    let rows = compare(&cfg.env, &mechanisms(cfg, &[name])?, trials, seed)?;
    Ok(rows.iter().map(|r| r.alloc_eff).sum::<f64>() / rows.len().max(1) as f64)
}

/// Tune parameter `param` of mechanism `name` for mean allocative
/// efficiency; every grid point sees the same markets.
pub fn tune_param(cfg: &SimConfig, name: &str, param: &str, spec: TuneSpec, trials: usize, seed: u64) -> Result<Tuned> {
    let spec = TuneSpec { integer: spec.integer || config::is_integer_param(param), ..spec };
    cfg.clone().set_param(param, spec.lo)?;
    tune::tune(spec, |x| {
        let mut c = cfg.clone();
        c.set_param(param, x)?;
        mean_alloc_eff(&c, name, trials, seed)
    })
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize().map(|r| r.map_err(Into::into)).collect()
}

pub fn save_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_csv(std::fs::File::create(path)?, rows)
}
