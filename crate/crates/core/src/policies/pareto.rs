use rand::Rng;

use super::{FallbackFactory, HintFavoringMab, PhaseEvent, Policy, Switch, SwitchBranch, SwitchConfig, Turn, TwoArmConfig};
use crate::concentration::{anytime_hoeffding_width, intervals_disjoint, ConfidenceInterval};
use crate::error::{BanditError, Result};
use crate::estimator::{hp_instance_count, EstimateNormHp, UpdateOutcome};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::vecmath::{effective_dim, ActionVec};

/// Worst-case scaling constant: the 95th percentile of OFUL regret on
/// random unit instances, divided by `d·ln T·√T`, maximized over
/// `d ∈ {2, 4, 8, 16, 20}` at `T = 5·10⁴` (0.196), rounded up.
pub const DEFAULT_W: f64 = 0.2;

/// Scale of the orthogonal-norm estimate in the commit rule.
const RHAT_SCALE: f64 = 0.06 / (2.0 * 25.0);

/// Ceiling on orthogonal-norm estimation before committing without an
/// estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Phase2Cap {
    /// Enough updates for the estimator to detect any orthogonal component
    /// large enough to flip the commit decision.
    #[default]
    Auto,
    /// Fixed number of updates of either sign estimator.
    Updates(u64),
    /// Estimate until the horizon runs out.
    Unbounded,
}

/// Knobs shared by every policy built on the norm estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EstimatorKnobs {
    /// Overrides the median-of-means instance count.
    pub instances: Option<usize>,
    pub phase2_cap: Phase2Cap,
}

impl EstimatorKnobs {
    pub(crate) fn instance_count(&self, delta_prob: f64) -> Result<usize> {
        match self.instances {
            Some(0) => Err(BanditError::domain("instance count override must be >= 1")),
            Some(k) => Ok(k),
            None => hp_instance_count(delta_prob),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParetoBanditConfig<S> {
    pub hint: ActionVec<S>,
    pub horizon: u64,
    pub delta_prob: f64,
    pub w: f64,
    pub knobs: EstimatorKnobs,
}

impl<S: Scalar> ParetoBanditConfig<S> {
    pub fn new(hint: ActionVec<S>, horizon: u64) -> Self {
        Self {
            hint,
            horizon,
            delta_prob: 0.1,
            w: DEFAULT_W,
            knobs: EstimatorKnobs::default(),
        }
    }
}

/// Parameters that differ between the trade-off-point algorithm and the
/// frontier variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Variant {
    Pareto { w: f64 },
    Frontier { g: f64, c0: f64, c1: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Thresholds {
    pub delta: f64,
    /// Exit when `exit_factor·r⊥²/r ≥ exit_level`.
    pub exit_factor: f64,
    pub exit_level: f64,
    /// `r̂ = rhat_factor·r⊥²/r`.
    pub rhat_factor: f64,
    pub r_lb: f64,
}

impl Variant {
    pub(crate) fn thresholds(&self, r: f64, d: usize, horizon: u64) -> Thresholds {
        let t = horizon as f64;
        let dl = d as f64 * t.ln();
        match *self {
            Variant::Pareto { w } => Thresholds {
                delta: 1.0 / (r.sqrt() * t.powf(0.25)),
                exit_factor: RHAT_SCALE,
                exit_level: 10.0 * w * dl / t.sqrt(),
                rhat_factor: RHAT_SCALE,
                r_lb: w * dl * t.sqrt(),
            },
            Variant::Frontier { g, c0, c1 } => Thresholds {
                delta: g.sqrt() / (r * t).sqrt(),
                exit_factor: 1.0,
                exit_level: c0 * dl / g,
                rhat_factor: 1.0,
                r_lb: c1 * dl * t / g,
            },
        }
    }
}

/// Updates after which an orthogonal component of squared norm `q2` would
/// have been detected by most inner estimators.
pub(crate) fn detection_updates(delta: f64, d_eff: usize, q2: f64, horizon: u64) -> u64 {
    let lil = (40.0 * (2.0 * horizon as f64).ln()).ln();
    let n = 120.0 * (2.0 + delta * delta) * lil * d_eff as f64 / (delta * delta * q2);
    if n.is_finite() {
        n.ceil().max(1.0) as u64
    } else {
        u64::MAX
    }
}

const SIGN_LABELS: [&str; 2] = ["+h", "-h"];

enum Schedule {
    /// Every active sign once per outer step.
    Alternate,
    Mab(HintFavoringMab),
}

struct OrthStage<S: Scalar> {
    r: S,
    th: Thresholds,
    signs: [EstimateNormHp<S>; 2],
    active: Vec<usize>,
    schedule: Schedule,
    queue: Vec<usize>,
    pos: usize,
    /// Unperturbed-sample totals at the start of the current call.
    before: (S, u64),
    step_returns: [Option<S>; 2],
    cap: u64,
    delta_prob: f64,
}

enum Stage<S: Scalar> {
    Norm(EstimateNormHp<S>),
    Orth(Box<OrthStage<S>>),
    Commit(Switch<S>),
}

/// Three-phase engine shared by [`ParetoBandit`] and the frontier variant.
pub(crate) struct Engine<S: Scalar> {
    hint: ActionVec<S>,
    horizon: u64,
    delta_prob: f64,
    variant: Variant,
    knobs: EstimatorKnobs,
    factory: FallbackFactory<S>,
    rng: RandomSource,
    stage: Stage<S>,
    events: Vec<PhaseEvent>,
    turn: Turn,
}

impl<S: Scalar> Engine<S> {
    pub(crate) fn new(
        hint: ActionVec<S>,
        horizon: u64,
        delta_prob: f64,
        variant: Variant,
        knobs: EstimatorKnobs,
        factory: FallbackFactory<S>,
        rng: RandomSource,
        known_norm: Option<S>,
    ) -> Result<Self> {
        if !hint.is_unit() {
            return Err(BanditError::domain(format!("hint must be a unit vector, norm {}", hint.norm())));
        }
        if hint.dim() < 2 {
            return Err(BanditError::domain("hint dimension must be >= 2"));
        }
        if horizon < 2 {
            return Err(BanditError::domain("horizon must be >= 2"));
        }
        if !(delta_prob > 0.0 && delta_prob < 1.0) {
            return Err(BanditError::domain(format!("failure probability must lie in (0,1), got {delta_prob}")));
        }
        let k = knobs.instance_count(delta_prob / 4.0)?;
        let norm = EstimateNormHp::with_instances(ActionVec::zeros(hint.dim()), S::one(), k, &rng.child(1))?;
        let mut engine = Self {
            hint,
            horizon,
            delta_prob,
            variant,
            knobs,
            factory,
            rng,
            stage: Stage::Norm(norm),
            events: vec![PhaseEvent::new(0, "phase1")],
            turn: Turn::default(),
        };
        if let Some(r) = known_norm {
            if !(r > S::zero()) || !r.is_finite() {
                return Err(BanditError::domain(format!("norm estimate must be > 0, got {r}")));
            }
            engine.events.clear();
            engine.enter_orth(r, 0)?;
        }
        Ok(engine)
    }

    pub(crate) fn phase_index(&self) -> u8 {
        match self.stage {
            Stage::Norm(_) => 1,
            Stage::Orth(_) => 2,
            Stage::Commit(_) => 3,
        }
    }

    pub(crate) fn phase_label(&self) -> &'static str {
        match &self.stage {
            Stage::Norm(_) => "phase1",
            Stage::Orth(_) => "phase2",
            Stage::Commit(s) => s.phase(),
        }
    }

    pub(crate) fn switch_branch(&self) -> Option<SwitchBranch> {
        match &self.stage {
            Stage::Commit(s) => Some(s.branch()),
            _ => None,
        }
    }

    pub(crate) fn take_events(&mut self) -> Vec<PhaseEvent> {
        std::mem::take(&mut self.events)
    }

    pub(crate) fn next_action(&mut self) -> Result<ActionVec<S>> {
        self.turn.begin()?;
        match &mut self.stage {
            Stage::Norm(hp) => Ok(hp.next_action().clone()),
            Stage::Orth(o) => {
                if o.queue.is_empty() {
                    o.queue = match &mut o.schedule {
                        Schedule::Alternate => o.active.clone(),
                        Schedule::Mab(m) => vec![m.next_arm()],
                    };
                    o.pos = 0;
                    o.step_returns = [None, None];
                    o.before = o.signs[o.queue[0]].hint_samples();
                }
                let s = o.queue[o.pos];
                Ok(o.signs[s].next_action().clone())
            }
            Stage::Commit(sw) => sw.next_action(),
        }
    }

    pub(crate) fn observe(&mut self, reward: S) -> Result<()> {
        self.turn.end()?;
        let round = self.turn.observed();
        match &mut self.stage {
            Stage::Norm(hp) => {
                if let UpdateOutcome::Returned(r) = hp.observe(reward)? {
                    self.enter_orth(r, round)?;
                }
                Ok(())
            }
            Stage::Orth(_) => self.observe_orth(reward, round),
            Stage::Commit(sw) => sw.observe(reward),
        }
    }

    fn enter_orth(&mut self, r: S, round: u64) -> Result<()> {
        let d = self.hint.dim();
        let th = self.variant.thresholds(r.as_f64(), d, self.horizon);
        let k = self.knobs.instance_count(self.delta_prob / 4.0)?;
        let delta = S::lit(th.delta);
        let plus = EstimateNormHp::with_instances(self.hint.clone(), delta, k, &self.rng.child(2))?;
        let minus = EstimateNormHp::with_instances(self.hint.neg(), delta, k, &self.rng.child(3))?;
        let schedule = match self.variant {
            Variant::Pareto { .. } => Schedule::Alternate,
            Variant::Frontier { g, .. } => Schedule::Mab(HintFavoringMab::new(TwoArmConfig {
                g,
                horizon: self.horizon,
                delta_prob: self.delta_prob,
                sigma: 1.0,
            })?),
        };
        let cap = match self.knobs.phase2_cap {
            Phase2Cap::Unbounded => u64::MAX,
            Phase2Cap::Updates(n) => n,
            Phase2Cap::Auto => {
                // smallest ‖P⊥θ*‖² whose estimate would commit to the fallback
                let q2 = th.r_lb * r.as_f64() / (th.rhat_factor * self.horizon as f64);
                detection_updates(th.delta, effective_dim(self.hint.as_slice()), q2, self.horizon)
            }
        };
        let mut ev = PhaseEvent::new(round, "phase2");
        ev.r = Some(r.as_f64());
        self.events.push(ev);
        self.stage = Stage::Orth(Box::new(OrthStage {
            r,
            th,
            signs: [plus, minus],
            active: vec![0, 1],
            schedule,
            queue: Vec::new(),
            pos: 0,
            before: (S::zero(), 0),
            step_returns: [None, None],
            cap,
            delta_prob: self.delta_prob,
        }));
        Ok(())
    }

    fn observe_orth(&mut self, reward: S, round: u64) -> Result<()> {
        let Stage::Orth(o) = &mut self.stage else {
            unreachable!("called in phase 2 only")
        };
        let s = o.queue[o.pos];
        match o.signs[s].observe(reward)? {
            UpdateOutcome::InProgress => return Ok(()),
            UpdateOutcome::Returned(v) => o.step_returns[s] = Some(v),
            UpdateOutcome::Completed => {}
        }
        if let Schedule::Mab(m) = &mut o.schedule {
            let (sum, n) = o.signs[s].hint_samples();
            let (sum0, n0) = o.before;
            if let Some(loser) = m.record(s, (sum - sum0).as_f64(), n - n0)? {
                o.active.retain(|&a| a != loser);
                let mut ev = PhaseEvent::new(round, "phase2");
                ev.eliminated = Some(SIGN_LABELS[loser].to_string());
                self.events.push(ev);
            }
        }
        o.pos += 1;
        if o.pos < o.queue.len() {
            let next = o.queue[o.pos];
            o.before = o.signs[next].hint_samples();
            return Ok(());
        }
        o.queue.clear();
        if matches!(o.schedule, Schedule::Alternate) && o.active.len() == 2 {
            if let Some(loser) = o.sign_elimination() {
                o.active.retain(|&a| a != loser);
                let mut ev = PhaseEvent::new(round, "phase2");
                ev.eliminated = Some(SIGN_LABELS[loser].to_string());
                self.events.push(ev);
            }
        }
        let exit = o.exit_value();
        let capped = o.active.iter().any(|&a| o.signs[a].updates() >= o.cap);
        match exit {
            Some(v) => self.commit(Some(v), round),
            None if capped => {
                let best = o
                    .active
                    .iter()
                    .filter_map(|&a| o.signs[a].estimate())
                    .fold(None, |acc: Option<S>, v| Some(acc.map_or(v, |a| a.max(v))));
                self.commit(best, round)
            }
            None => Ok(()),
        }
    }

    fn commit(&mut self, r_perp: Option<S>, round: u64) -> Result<()> {
        let Stage::Orth(o) = &self.stage else {
            unreachable!("commit leaves phase 2")
        };
        let mut pick_rng = self.rng.child(4);
        let pick = o.active[pick_rng.random_range(0..o.active.len())];
        let hint = o.signs[pick].hint().clone();
        let rf = o.r.as_f64();
        let r_hat = r_perp.map_or(0.0, |v| o.th.rhat_factor * v.as_f64().powi(2) / rf);
        let remaining = self.horizon.saturating_sub(round);
        let r_lb = o.th.r_lb;
        let cfg = SwitchConfig {
            hint,
            r_hat: S::lit(r_hat),
            horizon: remaining,
            r_lb: S::lit(r_lb),
        };
        let sw = Switch::with_factory(cfg, &self.factory, self.rng.child(5))?;
        let mut ev = PhaseEvent::new(round, sw.phase());
        ev.r = Some(rf);
        ev.r_perp = r_perp.map(|v| v.as_f64());
        self.events.push(ev);
        self.stage = Stage::Commit(sw);
        Ok(())
    }
}

impl<S: Scalar> OrthStage<S> {
    fn hint_interval(&self, s: usize) -> Option<ConfidenceInterval<f64>> {
        let (sum, n) = self.signs[s].hint_samples();
        if n == 0 {
            return None;
        }
        let w = anytime_hoeffding_width(n, 1.0, self.delta_prob).ok()?;
        ConfidenceInterval::new(sum.as_f64() / n as f64, w).ok()
    }

    fn sign_elimination(&self) -> Option<usize> {
        let (a, b) = (self.hint_interval(0)?, self.hint_interval(1)?);
        intervals_disjoint(&a, &b).then(|| if a.center < b.center { 0 } else { 1 })
    }

    /// `+h` is examined before `-h`.
    fn exit_value(&self) -> Option<S> {
        let rf = self.r.as_f64();
        for &s in &self.active {
            if let Some(v) = self.step_returns[s] {
                if self.th.exit_factor * v.as_f64().powi(2) / rf >= self.th.exit_level {
                    return Some(v);
                }
            }
        }
        match self.active.as_slice() {
            [only] => self.step_returns[*only],
            _ => None,
        }
    }
}

/// Estimates `‖θ*‖`, then the hint's orthogonal error under both signs, then
/// commits to the hint or to the fallback.
pub struct ParetoBandit<S: Scalar> {
    engine: Engine<S>,
}

impl<S: Scalar> ParetoBandit<S> {
    pub fn new(cfg: ParetoBanditConfig<S>, factory: FallbackFactory<S>, rng: RandomSource) -> Result<Self> {
        if !(cfg.w > 0.0) || !cfg.w.is_finite() {
            return Err(BanditError::domain(format!("W must be > 0, got {}", cfg.w)));
        }
        Ok(Self {
            engine: Engine::new(
                cfg.hint,
                cfg.horizon,
                cfg.delta_prob,
                Variant::Pareto { w: cfg.w },
                cfg.knobs,
                factory,
                rng,
                None,
            )?,
        })
    }

    /// Skips the first phase, taking `r` as the estimate of `‖θ*‖`.
    pub fn with_norm_estimate(
        cfg: ParetoBanditConfig<S>,
        r: S,
        factory: FallbackFactory<S>,
        rng: RandomSource,
    ) -> Result<Self> {
        if !(cfg.w > 0.0) || !cfg.w.is_finite() {
            return Err(BanditError::domain(format!("W must be > 0, got {}", cfg.w)));
        }
        Ok(Self {
            engine: Engine::new(
                cfg.hint,
                cfg.horizon,
                cfg.delta_prob,
                Variant::Pareto { w: cfg.w },
                cfg.knobs,
                factory,
                rng,
                Some(r),
            )?,
        })
    }

    /// 1, 2 or 3.
    pub fn phase_index(&self) -> u8 {
        self.engine.phase_index()
    }

    pub fn switch_branch(&self) -> Option<SwitchBranch> {
        self.engine.switch_branch()
    }
}

impl<S: Scalar> Policy<S> for ParetoBandit<S> {
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
