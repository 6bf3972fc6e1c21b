//! The hidden bandit instance and the regret ledger the harness keeps on it.
//!
//! Policies never see anything in this module. They interact through the
//! [`Bandit`] trait, which hands back rewards and nothing else.

use std::fmt::Write as _;

use crate::error::{BanditError, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::vecmath::{dot, norm, project_orth, ActionVec};

/// Ground truth of a simulation: `y = ⟨a, θ*⟩ + σ g`.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance<S> {
    theta_star: Vec<S>,
    noise_sigma: S,
    theta_norm: S,
}

impl<S: Scalar> BanditInstance<S> {
    pub fn new(theta_star: Vec<S>, noise_sigma: S) -> Result<Self> {
        if theta_star.is_empty() {
            return Err(BanditError::domain("theta* must have dimension >= 1"));
        }
        let theta_norm = norm(&theta_star);
        if !(theta_norm > S::zero()) || !theta_norm.is_finite() {
            return Err(BanditError::domain("theta* must be finite and nonzero"));
        }
        if !(noise_sigma >= S::zero()) || !noise_sigma.is_finite() {
            return Err(BanditError::domain(format!(
                "noise sigma must be finite and >= 0, got {noise_sigma}"
            )));
        }
        Ok(Self {
            theta_star,
            noise_sigma,
            theta_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    pub fn theta_star(&self) -> &[S] {
        &self.theta_star
    }

    pub fn theta_norm(&self) -> S {
        self.theta_norm
    }

    pub fn noise_sigma(&self) -> S {
        self.noise_sigma
    }

    pub fn with_noise(&self, noise_sigma: S) -> Result<Self> {
        Self::new(self.theta_star.clone(), noise_sigma)
    }

    /// `a* = θ* / ‖θ*‖`.
    pub fn optimal_action(&self) -> ActionVec<S> {
        ActionVec::normalized(&self.theta_star).expect("nonzero theta")
    }

    pub fn expected_reward(&self, action: &[S]) -> S {
        dot(&self.theta_star, action)
    }

    /// `r(a*, a) = ‖θ*‖ − ⟨θ*, a⟩`, clamped at zero against ball slack.
    pub fn instantaneous_regret(&self, action: &[S]) -> S {
        (self.theta_norm - self.expected_reward(action)).max(S::zero())
    }

    /// The two-sided bound `½‖P⊥_a θ*‖²/‖θ*‖ ≤ r(a*, a) ≤ 3‖P⊥_a θ*‖²/‖θ*‖`
    /// for unit actions with `⟨a, θ*⟩ ≥ −‖θ*‖/2`.
    pub fn regret_sandwich_bounds(&self, action: &[S]) -> Result<(S, S)> {
        if action.len() != self.dim() {
            return Err(BanditError::domain("action dimension mismatch"));
        }
        if (norm(action) - S::one()).abs() > S::orth_tol() {
            return Err(BanditError::domain("sandwich bounds need a unit action"));
        }
        if self.expected_reward(action) < -self.theta_norm / S::lit(2.0) {
            return Err(BanditError::domain(
                "sandwich bounds need <a, theta*> >= -|theta*|/2",
            ));
        }
        let off = project_orth(&self.theta_star, action)?;
        let q = dot(&off, &off) / self.theta_norm;
        Ok((q / S::lit(2.0), S::lit(3.0) * q))
    }
}

/// Anything a policy can be run against.
pub trait Bandit<S: Scalar> {
    fn dim(&self) -> usize;
    fn pull(&mut self, action: &ActionVec<S>) -> Result<S>;
}

/// One down-sampled ledger snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRow<S> {
    pub t: u64,
    pub cum_regret: S,
    pub cum_hint_regret: Vec<S>,
    pub phase: String,
}

/// Cumulative pseudo-regret and per-hint regret.
#[derive(Debug, Clone)]
pub struct RegretLedger<S> {
    t: u64,
    cum_regret: S,
    hint_values: Vec<S>,
    hint_gaps: Vec<S>,
    cum_hint_regret: Vec<S>,
    record_every: Option<u64>,
    phase: String,
    trace: Vec<LedgerRow<S>>,
}

impl<S: Scalar> RegretLedger<S> {
    fn new(instance: &BanditInstance<S>, hints: &[ActionVec<S>], record_every: Option<u64>) -> Self {
        let hint_values: Vec<S> = hints
            .iter()
            .map(|h| instance.expected_reward(h.as_slice()))
            .collect();
        let hint_gaps = hint_values
            .iter()
            .map(|&v| instance.theta_norm() - v)
            .collect();
        Self {
            t: 0,
            cum_regret: S::zero(),
            cum_hint_regret: vec![S::zero(); hints.len()],
            hint_values,
            hint_gaps,
            record_every: record_every.filter(|&k| k > 0),
            phase: String::new(),
            trace: Vec::new(),
        }
    }

    fn record(&mut self, instance: &BanditInstance<S>, action: &[S]) {
        let reward = instance.expected_reward(action);
        self.t += 1;
        self.cum_regret = self.cum_regret + instance.instantaneous_regret(action);
        for (acc, &hv) in self.cum_hint_regret.iter_mut().zip(&self.hint_values) {
            *acc = *acc + (hv - reward);
        }
        if let Some(k) = self.record_every {
            if self.t % k == 0 {
                self.trace.push(self.snapshot());
            }
        }
    }

    pub fn snapshot(&self) -> LedgerRow<S> {
        LedgerRow {
            t: self.t,
            cum_regret: self.cum_regret,
            cum_hint_regret: self.cum_hint_regret.clone(),
            phase: self.phase.clone(),
        }
    }

    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn cum_regret(&self) -> S {
        self.cum_regret
    }

    pub fn cum_hint_regret(&self) -> &[S] {
        &self.cum_hint_regret
    }

    /// `r(a*, h_j)` for every registered hint.
    pub fn hint_gaps(&self) -> &[S] {
        &self.hint_gaps
    }

    /// Index of the registered hint with the smallest gap.
    pub fn best_hint(&self) -> Option<usize> {
        (0..self.hint_gaps.len()).min_by(|&a, &b| {
            self.hint_gaps[a]
                .partial_cmp(&self.hint_gaps[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    pub fn phase(&self) -> &str {
        &self.phase
    }

    pub fn trace(&self) -> &[LedgerRow<S>] {
        &self.trace
    }

    /// Max over hints of `|Reg(t) − t·r(a*,h) − Reg_h(t)|`.
    pub fn decomposition_residual(&self) -> S {
        let t = S::from_u64(self.t).unwrap();
        self.hint_gaps
            .iter()
            .zip(&self.cum_hint_regret)
            .map(|(&gap, &hr)| (self.cum_regret - (t * gap + hr)).abs())
            .fold(S::zero(), S::max)
    }

    /// Header of the trace CSV for `n_hints` registered hints.
    pub fn csv_header(n_hints: usize) -> String {
        let mut s = String::from("run_id,seed,t,cum_regret,cum_hint_regret");
        for j in 0..n_hints {
            let _ = write!(s, ",cum_hint_regret_h{j}");
        }
        s.push_str(",phase");
        s
    }

    /// Trace rows as CSV lines; `cum_hint_regret` is the column of the best
    /// registered hint (empty when no hint is registered).
    pub fn csv_rows(&self, run_id: &str, seed: u64) -> Vec<String> {
        let best = self.best_hint();
        self.trace
            .iter()
            .map(|row| {
                let mut s = format!("{run_id},{seed},{},{}", row.t, row.cum_regret);
                match best {
                    Some(b) => {
                        let _ = write!(s, ",{}", row.cum_hint_regret[b]);
                    }
                    None => s.push(','),
                }
                for v in &row.cum_hint_regret {
                    let _ = write!(s, ",{v}");
                }
                let _ = write!(s, ",{}", row.phase);
                s
            })
            .collect()
    }
}

/// A running simulation: instance, noise stream, horizon and ledger.
#[derive(Debug, Clone)]
pub struct Environment<S> {
    instance: BanditInstance<S>,
    hints: Vec<ActionVec<S>>,
    horizon: u64,
    rng: RandomSource,
    ledger: RegretLedger<S>,
}

impl<S: Scalar> Environment<S> {
    /// Hints are registered once, here; their ledger columns are fixed.
    pub fn new(
        instance: BanditInstance<S>,
        hints: Vec<ActionVec<S>>,
        horizon: u64,
        rng: RandomSource,
        record_every: Option<u64>,
    ) -> Result<Self> {
        if let Some(h) = hints.iter().find(|h| h.dim() != instance.dim()) {
            return Err(BanditError::domain(format!(
                "hint dimension {} does not match instance dimension {}",
                h.dim(),
                instance.dim()
            )));
        }
        let ledger = RegretLedger::new(&instance, &hints, record_every);
        Ok(Self {
            instance,
            hints,
            horizon,
            rng,
            ledger,
        })
    }

    pub fn instance(&self) -> &BanditInstance<S> {
        &self.instance
    }

    pub fn hints(&self) -> &[ActionVec<S>] {
        &self.hints
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn ledger(&self) -> &RegretLedger<S> {
        &self.ledger
    }

    pub fn set_phase(&mut self, label: &str) {
        if self.ledger.phase != label {
            self.ledger.phase.clear();
            self.ledger.phase.push_str(label);
        }
    }

    /// Appends a final snapshot unless the last recorded row already is one.
    pub fn finish_trace(&mut self) {
        if self.ledger.record_every.is_some()
            && self.ledger.trace.last().map(|r| r.t) != Some(self.ledger.t)
        {
            let row = self.ledger.snapshot();
            self.ledger.trace.push(row);
        }
    }

    /// `⟨a, θ*⟩ + σ g`; records regret for every registered hint.
    pub fn pull(&mut self, action: &ActionVec<S>) -> Result<S> {
        if action.dim() != self.instance.dim() {
            return Err(BanditError::domain("action dimension mismatch"));
        }
        if action.norm() > S::one() + S::ball_slack() {
            return Err(BanditError::domain("action outside the unit ball"));
        }
        if self.ledger.t >= self.horizon {
            return Err(BanditError::Budget {
                horizon: self.horizon,
            });
        }
        let g = S::standard_normal(&mut self.rng);
        self.ledger.record(&self.instance, action.as_slice());
        Ok(self.instance.expected_reward(action.as_slice()) + self.instance.noise_sigma * g)
    }
}

impl<S: Scalar> Bandit<S> for Environment<S> {
    fn dim(&self) -> usize {
        self.instance.dim()
    }

    fn pull(&mut self, action: &ActionVec<S>) -> Result<S> {
        Environment::pull(self, action)
    }
}
