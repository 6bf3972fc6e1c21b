use super::{Policy, Turn};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::vecmath::ActionVec;

/// Plays the hint every round.
#[derive(Debug, Clone)]
pub struct PlayHint<S> {
    hint: ActionVec<S>,
    turn: Turn,
}

impl<S: Scalar> PlayHint<S> {
    pub fn new(hint: ActionVec<S>) -> Self {
        Self {
            hint,
            turn: Turn::default(),
        }
    }
}

impl<S: Scalar> Policy<S> for PlayHint<S> {
    fn next_action(&mut self) -> Result<ActionVec<S>> {
        self.turn.begin()?;
        Ok(self.hint.clone())
    }

    fn observe(&mut self, _reward: S) -> Result<()> {
        self.turn.end()
    }

    fn phase(&self) -> &'static str {
        "hint"
    }
}
