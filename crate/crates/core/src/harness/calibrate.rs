use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, HintSpec, OfulSpec, PolicySpec, SeedSpec};
use super::runner::{run_experiment, RunOptions};
use crate::error::{BanditError, Result};
use crate::instances::{InstanceKind, InstanceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub dim: usize,
    pub q95_regret: f64,
    pub median_regret: f64,
    /// `q95 / (d·ln T·√T)`.
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub rows: Vec<CalibrationRow>,
    /// Largest per-dimension fit.
    pub w: f64,
}

/// OFUL's 95th-percentile regret on random unit-norm instances, normalized
/// by `d·ln T·√T`, maximized over `dims`.
pub fn calibrate_w(dims: &[usize], horizon: u64, seeds: SeedSpec, opts: RunOptions) -> Result<Calibration> {
    if dims.is_empty() {
        return Err(BanditError::config("dims", "empty list"));
    }
    let mut rows = Vec::new();
    for &dim in dims {
        let cfg = ExperimentConfig {
            name: format!("calibrate-d{dim}"),
            horizon,
            record_every: horizon,
            seeds: seeds.clone(),
            instance: InstanceSpec {
                dim,
                noise_sigma: 1.0,
                seed: None,
                kind: InstanceKind::RandomUnit,
            },
            hint: HintSpec::Perfect,
            policy: PolicySpec::Oful {
                oful: OfulSpec::default(),
            },
        };
        let run = run_experiment(&cfg, opts)?;
        if let Some(seed) = run.failed_seeds.first() {
            return Err(BanditError::state(format!("calibration run d={dim} failed on seed {seed}")));
        }
        let q = run.regret.expect("at least one seed");
        let t = horizon as f64;
        rows.push(CalibrationRow {
            dim,
            q95_regret: q.q95,
            median_regret: q.median,
            w: q.q95 / (dim as f64 * t.ln() * t.sqrt()),
        });
    }
    let w = rows.iter().map(|r| r.w).fold(0.0, f64::max);
    Ok(Calibration {
        horizon,
        seeds: seeds.seeds(),
        rows,
        w,
    })
}
