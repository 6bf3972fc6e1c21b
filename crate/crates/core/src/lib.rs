//! Stochastic linear bandits on the unit ball, with policies that exploit an
//! initial hint about the optimal action while keeping worst-case regret
//! within a constant of a hint-agnostic learner.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the harness uses.

pub mod concentration;
pub mod environment;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod instances;
pub mod policies;
pub mod rng;
pub mod scalar;
pub mod vecmath;

pub use environment::{Bandit, BanditInstance, Environment, RegretLedger};
pub use error::{BanditError, Result};
pub use policies::Policy;
pub use rng::RandomSource;
pub use scalar::Scalar;
pub use vecmath::ActionVec;

pub type Action = ActionVec<f64>;
pub type Instance = BanditInstance<f64>;
pub type Simulation = Environment<f64>;
pub type Ledger = RegretLedger<f64>;
pub type NormEstimator = estimator::EstimateNorm<f64>;
pub type NormEstimatorHp = estimator::EstimateNormHp<f64>;
pub type ParetoBandit = policies::ParetoBandit<f64>;
pub type FrontierBandit = policies::FrontierBandit<f64>;
pub type MultiHintBandit = policies::MultiHintBandit<f64>;
pub type Oful = policies::Oful<f64>;
