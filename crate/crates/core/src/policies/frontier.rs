use super::pareto::{Engine, Variant};
use super::{EstimatorKnobs, FallbackFactory, PhaseEvent, Policy, SwitchBranch};
use crate::error::{BanditError, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::vecmath::ActionVec;

#[derive(Debug, Clone)]
pub struct FrontierConfig<S> {
    pub hint: ActionVec<S>,
    pub horizon: u64,
    pub delta_prob: f64,
    /// Target hint-based regret, at most `√T`.
    pub g: f64,
    pub c0: f64,
    pub c1: f64,
    pub knobs: EstimatorKnobs,
}

impl<S: Scalar> FrontierConfig<S> {
    pub fn new(hint: ActionVec<S>, horizon: u64, g: f64) -> Self {
        Self {
            hint,
            horizon,
            delta_prob: 0.1,
            g,
            c0: 4.0,
            c1: 1.0,
            knobs: EstimatorKnobs::default(),
        }
    }
}

/// [`ParetoBandit`](super::ParetoBandit) tuned to an arbitrary point of the
/// trade-off, with sign selection scheduled by [`HintFavoringMab`](super::HintFavoringMab).
pub struct FrontierBandit<S: Scalar> {
    engine: Engine<S>,
}

impl<S: Scalar> FrontierBandit<S> {
    pub fn new(cfg: FrontierConfig<S>, factory: FallbackFactory<S>, rng: RandomSource) -> Result<Self> {
        let root = (cfg.horizon as f64).sqrt();
        if !(cfg.g > 0.0) || cfg.g > root {
            return Err(BanditError::domain(format!("G must lie in (0, √T = {root}], got {}", cfg.g)));
        }
        if !(cfg.c1 > 0.0 && cfg.c0 > cfg.c1) || !cfg.c0.is_finite() {
            return Err(BanditError::domain(format!(
                "need c0 > c1 > 0, got c0 = {}, c1 = {}",
                cfg.c0, cfg.c1
            )));
        }
        let variant = Variant::Frontier {
            g: cfg.g,
            c0: cfg.c0,
            c1: cfg.c1,
        };
        Ok(Self {
            engine: Engine::new(cfg.hint, cfg.horizon, cfg.delta_prob, variant, cfg.knobs, factory, rng, None)?,
        })
    }

    pub fn phase_index(&self) -> u8 {
        self.engine.phase_index()
    }

    pub fn switch_branch(&self) -> Option<SwitchBranch> {
        self.engine.switch_branch()
    }
}

impl<S: Scalar> Policy<S> for FrontierBandit<S> {
    fn next_action(&mut self) -> Result<ActionVec<S>> {
        self.engine.next_action()
    }

    fn observe(&mut self, reward: S) -> Result<()> {
        self.engine.observe(reward)
    }

    fn phase(&self) -> &'static str {
        self.engine.phase_label()
    }

    fn drain_events(&mut self) -> Vec<PhaseEvent> {
        self.engine.take_events()
    }
}
