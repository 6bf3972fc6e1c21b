use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PolicySpec};
use super::runner::{in_pool, run_seed, RunOptions, RunSummary};
use crate::error::{BanditError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub g: f64,
    pub median_hint_regret: f64,
    pub median_regret: f64,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierTable {
    pub rows: Vec<FrontierRow>,
    pub runs: Vec<RunSummary>,
}

impl FrontierTable {
    pub fn csv(&self) -> String {
        let mut s = String::from("g,median_hint_regret,median_regret,product\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.g, r.median_hint_regret, r.median_regret, r.product));
        }
        s
    }
}

/// `cfg` with its frontier target replaced.
pub fn with_g(cfg: &ExperimentConfig, g_value: f64) -> Result<ExperimentConfig> {
    let mut out = cfg.clone();
    match &mut out.policy {
        PolicySpec::Frontier { g, .. } => *g = g_value,
        other => {
            return Err(BanditError::config(
                "policy.type",
                format!("frontier sweeps need the frontier policy, got `{}`", other.name()),
            ))
        }
    }
    out.name = format!("{}-g{}", cfg.name, g_value);
    Ok(out)
}

/// One experiment per `G`, on the same instances and seeds.
pub fn sweep_frontier(cfg: &ExperimentConfig, g_values: &[f64], opts: RunOptions) -> Result<FrontierTable> {
    if g_values.is_empty() {
        return Err(BanditError::config("g_values", "empty list"));
    }
    let cfgs = g_values
        .iter()
        .map(|&g| {
            let c = with_g(cfg, g)?;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let seeds = cfg.seeds.seeds();
    let jobs: Vec<(usize, u64)> = (0..cfgs.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let mut outcomes = in_pool(opts, || {
        jobs.par_iter().map(|&(i, s)| run_seed(&cfgs[i], s)).collect::<Vec<_>>()
    })?
    .into_iter();
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (c, &g) in cfgs.iter().zip(g_values) {
        let run = RunSummary::from_outcomes(c, outcomes.by_ref().take(seeds.len()).collect());
        let rh = run.median_hint_regret().unwrap_or(f64::NAN);
        let r = run.median_regret().unwrap_or(f64::NAN);
        rows.push(FrontierRow {
            g,
            median_hint_regret: rh,
            median_regret: r,
            product: rh * r,
        });
        runs.push(run);
    }
    Ok(FrontierTable { rows, runs })
}
