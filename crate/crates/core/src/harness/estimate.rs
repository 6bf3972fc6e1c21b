use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PolicySpec};
use super::runner::{in_pool, RunOptions, Streams, Transition};
use crate::environment::Environment;
use crate::error::{BanditError, Result};

use rayon::prelude::*;

/// Output of the estimation phases for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub seed: u64,
    pub theta_norm: f64,
    /// `‖P⊥_h θ*‖` for the first hint.
    pub true_r_perp: f64,
    pub r: Option<f64>,
    pub r_perp: Option<f64>,
    /// Samples spent estimating `‖θ*‖`.
    pub norm_samples: Option<u64>,
    /// Samples spent before committing.
    pub total_samples: u64,
    pub committed: Option<String>,
    pub eliminated: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub config_hash: String,
    pub records: Vec<EstimateRecord>,
}

fn estimate_seed(cfg: &ExperimentConfig, seed: u64) -> EstimateRecord {
    let mut rec = EstimateRecord {
        seed,
        theta_norm: f64::NAN,
        true_r_perp: f64::NAN,
        r: None,
        r_perp: None,
        norm_samples: None,
        total_samples: 0,
        committed: None,
        eliminated: Vec::new(),
        error: None,
    };
    if let Err(e) = estimate_into(cfg, seed, &mut rec) {
        rec.error = Some(e.to_string());
    }
    rec
}

fn estimate_into(cfg: &ExperimentConfig, seed: u64, rec: &mut EstimateRecord) -> Result<()> {
    let streams = Streams::new(seed);
    let gen = cfg.instance.build::<f64, _>(&mut streams.instance(&cfg.instance))?;
    let hints = cfg.hint.resolve(&gen, &mut streams.hints())?;
    let theta = gen.instance.theta_star();
    rec.theta_norm = gen.instance.theta_norm();
    rec.true_r_perp = crate::vecmath::norm(&crate::vecmath::project_orth(theta, hints[0].as_slice())?);
    let mut policy = cfg.policy.build(&hints, cfg.horizon, streams.policy())?;
    let mut env = Environment::new(gen.instance.clone(), hints, cfg.horizon, streams.env(), None)?;
    for _ in 0..cfg.horizon {
        let a = policy.next_action()?;
        let y = env.pull(&a)?;
        policy.observe(y)?;
        for ev in policy.drain_events().into_iter().map(Transition::from) {
            if rec.norm_samples.is_none() && (ev.phase == "phase2" || ev.phase == "tournament") {
                rec.norm_samples = Some(ev.round);
                rec.r = ev.r;
            }
            if let Some(e) = ev.eliminated {
                rec.eliminated.push(e);
            }
            if ev.phase.starts_with("commit") {
                rec.r_perp = ev.r_perp;
                rec.committed = Some(ev.phase);
                rec.total_samples = ev.round;
                return Ok(());
            }
        }
    }
    rec.total_samples = env.ledger().round();
    Ok(())
}

/// Runs each seed until its policy commits, recording the estimates and the
/// samples they took.
pub fn estimate(cfg: &ExperimentConfig, opts: RunOptions) -> Result<EstimateReport> {
    cfg.validate()?;
    if !matches!(
        cfg.policy,
        PolicySpec::ParetoBandit { .. } | PolicySpec::Frontier { .. } | PolicySpec::MultiHint { .. }
    ) {
        return Err(BanditError::config(
            "policy.type",
            format!("`{}` has no estimation phase", cfg.policy.name()),
        ));
    }
    let seeds = cfg.seeds.seeds();
    let records = in_pool(opts, || seeds.par_iter().map(|&s| estimate_seed(cfg, s)).collect())?;
    Ok(EstimateReport {
        config_hash: cfg.hash(),
        records,
    })
}
