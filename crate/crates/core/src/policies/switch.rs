use super::{FallbackFactory, FallbackRequest, Policy, Turn};
use crate::error::{BanditError, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::vecmath::ActionVec;

#[derive(Debug, Clone)]
pub struct SwitchConfig<S> {
    pub hint: ActionVec<S>,
    /// Lower estimate of the hint's instantaneous regret.
    pub r_hat: S,
    pub horizon: u64,
    /// Worst-case regret bound of the fallback over `horizon` rounds.
    pub r_lb: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchBranch {
    Hint,
    Fallback,
}

impl<S: Scalar> SwitchConfig<S> {
    fn validate(&self) -> Result<()> {
        if !(self.r_hat >= S::zero()) || !self.r_hat.is_finite() {
            return Err(BanditError::domain(format!("r_hat must be finite and >= 0, got {}", self.r_hat)));
        }
        if self.r_lb.is_nan() {
            return Err(BanditError::domain("R_LB is NaN"));
        }
        Ok(())
    }

    /// Plays the hint iff `r_hat·T ≤ R_LB`.
    pub fn branch(&self) -> SwitchBranch {
        let total = self.r_hat * S::from_u64(self.horizon).unwrap();
        if total <= self.r_lb {
            SwitchBranch::Hint
        } else {
            SwitchBranch::Fallback
        }
    }
}

/// Commits once, at construction, to the hint or to a fallback policy.
pub struct Switch<S: Scalar> {
    hint: ActionVec<S>,
    branch: SwitchBranch,
    fallback: Option<Box<dyn Policy<S>>>,
    turn: Turn,
}

impl<S: Scalar> std::fmt::Debug for Switch<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Switch").field("branch", &self.branch).finish_non_exhaustive()
    }
}

impl<S: Scalar> Switch<S> {
    pub fn new(cfg: SwitchConfig<S>, fallback: Box<dyn Policy<S>>) -> Result<Self> {
        cfg.validate()?;
        let branch = cfg.branch();
        Ok(Self {
            hint: cfg.hint,
            branch,
            fallback: (branch == SwitchBranch::Fallback).then_some(fallback),
            turn: Turn::default(),
        })
    }

    /// Builds the fallback only if the fallback branch is taken.
    pub fn with_factory(cfg: SwitchConfig<S>, factory: &FallbackFactory<S>, rng: RandomSource) -> Result<Self> {
        cfg.validate()?;
        let branch = cfg.branch();
        let fallback = match branch {
            SwitchBranch::Hint => None,
            SwitchBranch::Fallback => Some(factory(FallbackRequest {
                dim: cfg.hint.dim(),
                horizon: cfg.horizon,
                rng,
            })?),
        };
        Ok(Self {
            hint: cfg.hint,
            branch,
            fallback,
            turn: Turn::default(),
        })
    }

    pub fn branch(&self) -> SwitchBranch {
        self.branch
    }

    pub fn hint(&self) -> &ActionVec<S> {
        &self.hint
    }
}

impl<S: Scalar> Policy<S> for Switch<S> {
    fn next_action(&mut self) -> Result<ActionVec<S>> {
        self.turn.begin()?;
        match self.fallback.as_mut() {
            None => Ok(self.hint.clone()),
            Some(f) => f.next_action(),
        }
    }

    fn observe(&mut self, reward: S) -> Result<()> {
        self.turn.end()?;
        match self.fallback.as_mut() {
            None => Ok(()),
            Some(f) => f.observe(reward),
        }
    }

    fn phase(&self) -> &'static str {
        match self.branch {
            SwitchBranch::Hint => "commit-hint",
            SwitchBranch::Fallback => "commit-fallback",
        }
    }
}
