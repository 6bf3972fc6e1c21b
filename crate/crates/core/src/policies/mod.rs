//! Decision-making policies behind one interface.
//!
//! A policy only ever sees its own actions and the rewards fed back to it.
//! The caller (usually the harness) owns the environment and mediates every
//! pull, so no policy can reach the parameter vector or the regret ledger.

mod frontier;
mod multi_hint;
mod oful;
mod pareto;
mod play_hint;
mod switch;
mod two_arm;

use std::sync::Arc;

use crate::environment::Bandit;
use crate::error::{BanditError, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::vecmath::ActionVec;

pub use frontier::{FrontierBandit, FrontierConfig};
pub use multi_hint::{MultiHintBandit, MultiHintConfig};
pub use oful::{optimistic_direction, Oful, OfulConfig};
pub use pareto::{EstimatorKnobs, ParetoBandit, ParetoBanditConfig, Phase2Cap, DEFAULT_W};
pub use play_hint::PlayHint;
pub use switch::{Switch, SwitchBranch, SwitchConfig};
pub use two_arm::{HintFavoringMab, TwoArmConfig};

/// A phase transition or elimination, reported for the trace stream.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEvent {
    /// Rewards observed by the policy before the event.
    pub round: u64,
    pub phase: &'static str,
    pub r: Option<f64>,
    pub r_perp: Option<f64>,
    pub eliminated: Option<String>,
}

impl PhaseEvent {
    pub(crate) fn new(round: u64, phase: &'static str) -> Self {
        Self {
            round,
            phase,
            r: None,
            r_perp: None,
            eliminated: None,
        }
    }
}

/// Sequential decision rule. Calls alternate strictly:
/// `next_action`, `observe`, `next_action`, ...
pub trait Policy<S: Scalar>: Send {
    fn next_action(&mut self) -> Result<ActionVec<S>>;

    fn observe(&mut self, reward: S) -> Result<()>;

    /// Label of the current phase, used for trace rows.
    fn phase(&self) -> &'static str {
        "main"
    }

    /// Events emitted since the last call.
    fn drain_events(&mut self) -> Vec<PhaseEvent> {
        Vec::new()
    }
}

impl<S: Scalar> Policy<S> for Box<dyn Policy<S>> {
    fn next_action(&mut self) -> Result<ActionVec<S>> {
        (**self).next_action()
    }

    fn observe(&mut self, reward: S) -> Result<()> {
        (**self).observe(reward)
    }

    fn phase(&self) -> &'static str {
        (**self).phase()
    }

    fn drain_events(&mut self) -> Vec<PhaseEvent> {
        (**self).drain_events()
    }
}

/// What a fallback constructor is given.
#[derive(Debug, Clone)]
pub struct FallbackRequest {
    pub dim: usize,
    /// Rounds the fallback will be asked to play.
    pub horizon: u64,
    pub rng: RandomSource,
}

/// Builds the hint-agnostic policy a meta-policy delegates to.
pub type FallbackFactory<S> = Arc<dyn Fn(FallbackRequest) -> Result<Box<dyn Policy<S>>> + Send + Sync>;

/// Factory producing [`Oful`] with the given settings.
pub fn oful_factory<S: Scalar>(cfg: OfulConfig) -> FallbackFactory<S> {
    Arc::new(move |req: FallbackRequest| {
        Ok(Box::new(Oful::<S>::new(req.dim, cfg)?) as Box<dyn Policy<S>>)
    })
}

/// Enforces strict alternation of `next_action` and `observe`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Turn {
    pending: bool,
    observed: u64,
}

impl Turn {
    pub(crate) fn begin(&mut self) -> Result<()> {
        if self.pending {
            return Err(BanditError::state("next_action called twice without observe"));
        }
        self.pending = true;
        Ok(())
    }

    pub(crate) fn end(&mut self) -> Result<()> {
        if !self.pending {
            return Err(BanditError::state("observe called without a pending action"));
        }
        self.pending = false;
        self.observed += 1;
        Ok(())
    }

    /// Rewards consumed so far.
    pub(crate) fn observed(&self) -> u64 {
        self.observed
    }
}

/// Plays `rounds` rounds of `policy` against `bandit`.
pub fn run_policy<S, P, B>(policy: &mut P, bandit: &mut B, rounds: u64) -> Result<()>
where
    S: Scalar,
    P: Policy<S> + ?Sized,
    B: Bandit<S> + ?Sized,
{
    for _ in 0..rounds {
        let a = policy.next_action()?;
        let y = bandit.pull(&a)?;
        policy.observe(y)?;
    }
    Ok(())
}
