use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::environment::{Environment, RegretLedger};
use crate::error::{BanditError, Result};
use crate::instances::InstanceSpec;
use crate::policies::PhaseEvent;
use crate::rng::RandomSource;

/// Version of the trace and summary layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// Independent random streams of one replication, derived from its seed
/// alone so scheduling cannot change them.
#[derive(Debug, Clone)]
pub struct Streams {
    root: RandomSource,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self {
            root: RandomSource::new(seed, 0),
        }
    }

    pub fn env(&self) -> RandomSource {
        self.root.child(1)
    }

    pub fn policy(&self) -> RandomSource {
        self.root.child(2)
    }

    /// A fixed instance seed overrides the replication seed.
    pub fn instance(&self, spec: &InstanceSpec) -> RandomSource {
        match spec.seed {
            Some(s) => RandomSource::new(s, 3),
            None => self.root.child(3),
        }
    }

    pub fn hints(&self) -> RandomSource {
        self.root.child(4)
    }
}

/// Serializable copy of a policy event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub round: u64,
    pub phase: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_perp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eliminated: Option<String>,
}

impl From<PhaseEvent> for Transition {
    fn from(e: PhaseEvent) -> Self {
        Self {
            round: e.round,
            phase: e.phase.to_string(),
            r: e.r,
            r_perp: e.r_perp,
            eliminated: e.eliminated,
        }
    }
}

/// Result of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub rounds: u64,
    pub cum_regret: f64,
    /// Regret against the best registered hint; absent without hints.
    pub cum_hint_regret: Option<f64>,
    pub hint_gaps: Vec<f64>,
    pub theta_norm: f64,
    pub identity_residual: f64,
    pub transitions: Vec<Transition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub trace: Vec<String>,
}

impl SeedOutcome {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Nearest-rank quantiles: the `p`-quantile of `n` sorted values is the
/// value at 1-based rank `max(1, ⌈p·n⌉)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

pub fn nearest_rank(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&p) {
        return None;
    }
    let rank = ((p * sorted.len() as f64).ceil() as usize).max(1);
    Some(sorted[rank - 1])
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
        v.sort_by(f64::total_cmp);
        Some(Self {
            q05: nearest_rank(&v, 0.05)?,
            q25: nearest_rank(&v, 0.25)?,
            median: nearest_rank(&v, 0.5)?,
            q75: nearest_rank(&v, 0.75)?,
            q95: nearest_rank(&v, 0.95)?,
            max: *v.last()?,
        })
    }
}

/// When, across seeds, a phase was first entered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub seeds: usize,
    pub first_round: Quantiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub name: String,
    pub config_hash: String,
    pub policy: String,
    pub horizon: u64,
    pub failed_seeds: Vec<u64>,
    pub regret: Option<Quantiles>,
    pub hint_regret: Option<Quantiles>,
    pub max_identity_residual: f64,
    pub phases: BTreeMap<String, PhaseStats>,
    pub seeds: Vec<SeedOutcome>,
}

impl RunSummary {
    fn ok(&self) -> impl Iterator<Item = &SeedOutcome> {
        self.seeds.iter().filter(|s| !s.failed())
    }

    pub fn median_regret(&self) -> Option<f64> {
        self.regret.as_ref().map(|q| q.median)
    }

    pub fn median_hint_regret(&self) -> Option<f64> {
        self.hint_regret.as_ref().map(|q| q.median)
    }

    pub fn trace_csv(&self) -> String {
        let n_hints = self.seeds.first().map_or(0, |s| s.hint_gaps.len());
        let mut out = RegretLedger::<f64>::csv_header(n_hints);
        out.push('\n');
        for s in &self.seeds {
            for row in &s.trace {
                out.push_str(row);
                out.push('\n');
            }
        }
        out
    }

    pub fn from_outcomes(cfg: &ExperimentConfig, seeds: Vec<SeedOutcome>) -> Self {
        let regrets: Vec<f64> = seeds.iter().filter(|s| !s.failed()).map(|s| s.cum_regret).collect();
        let hint_regrets: Vec<f64> = seeds
            .iter()
            .filter(|s| !s.failed())
            .filter_map(|s| s.cum_hint_regret)
            .collect();
        let mut firsts: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for s in &seeds {
            let mut seen = std::collections::BTreeSet::new();
            for t in &s.transitions {
                if seen.insert(t.phase.clone()) {
                    firsts.entry(t.phase.clone()).or_default().push(t.round as f64);
                }
            }
        }
        let phases = firsts
            .into_iter()
            .filter_map(|(k, v)| {
                Some((
                    k,
                    PhaseStats {
                        seeds: v.len(),
                        first_round: Quantiles::of(&v)?,
                    },
                ))
            })
            .collect();
        let mut summary = Self {
            schema_version: SCHEMA_VERSION,
            name: cfg.name.clone(),
            config_hash: cfg.hash(),
            policy: cfg.policy.name().to_string(),
            horizon: cfg.horizon,
            failed_seeds: seeds.iter().filter(|s| s.failed()).map(|s| s.seed).collect(),
            regret: Quantiles::of(&regrets),
            hint_regret: Quantiles::of(&hint_regrets),
            max_identity_residual: 0.0,
            phases,
            seeds,
        };
        summary.max_identity_residual = summary.ok().map(|s| s.identity_residual).fold(0.0, f64::max);
        summary
    }
}

fn drive(cfg: &ExperimentConfig, seed: u64, out: &mut SeedOutcome) -> Result<()> {
    let streams = Streams::new(seed);
    let gen = cfg.instance.build::<f64, _>(&mut streams.instance(&cfg.instance))?;
    let hints = cfg.hint.resolve(&gen, &mut streams.hints())?;
    let mut policy = cfg.policy.build(&hints, cfg.horizon, streams.policy())?;
    let mut env = Environment::new(
        gen.instance.clone(),
        hints,
        cfg.horizon,
        streams.env(),
        Some(cfg.record_every),
    )?;
    out.theta_norm = gen.instance.theta_norm();
    out.hint_gaps = env.ledger().hint_gaps().to_vec();
    let mut step = || -> Result<()> {
        for _ in 0..cfg.horizon {
            env.set_phase(policy.phase());
            let a = policy.next_action()?;
            let y = env.pull(&a)?;
            policy.observe(y)?;
            out.transitions.extend(policy.drain_events().into_iter().map(Transition::from));
        }
        Ok(())
    };
    let result = step();
    env.finish_trace();
    let ledger = env.ledger();
    out.rounds = ledger.round();
    out.cum_regret = ledger.cum_regret();
    out.cum_hint_regret = ledger.best_hint().map(|b| ledger.cum_hint_regret()[b]);
    out.identity_residual = ledger.decomposition_residual();
    out.trace = ledger.csv_rows(&cfg.name, seed);
    result
}

/// Runs one replication; errors are recorded, never propagated.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> SeedOutcome {
    let mut out = SeedOutcome {
        seed,
        rounds: 0,
        cum_regret: f64::NAN,
        cum_hint_regret: None,
        hint_gaps: Vec::new(),
        theta_norm: f64::NAN,
        identity_residual: 0.0,
        transitions: Vec::new(),
        error: None,
        trace: Vec::new(),
    };
    if let Err(e) = drive(cfg, seed, &mut out) {
        out.error = Some(e.to_string());
    }
    out
}

/// Worker count; `None` uses rayon's default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub threads: Option<usize>,
}

/// Validates `cfg` and runs every seed, aggregating in seed order.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    let seeds = cfg.seeds.seeds();
    let outcomes = in_pool(opts, || seeds.par_iter().map(|&s| run_seed(cfg, s)).collect::<Vec<_>>())?;
    Ok(RunSummary::from_outcomes(cfg, outcomes))
}

pub(crate) fn in_pool<T: Send>(opts: RunOptions, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(BanditError::config("threads", "must be >= 1"));
        }
        b = b.num_threads(n);
    }
    let pool = b
        .build()
        .map_err(|e| BanditError::state(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
