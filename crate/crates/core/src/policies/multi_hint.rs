use rand::Rng;

use super::pareto::DEFAULT_W;
use super::{EstimatorKnobs, FallbackFactory, ParetoBandit, ParetoBanditConfig, PhaseEvent, PlayHint, Policy, Turn};
use crate::concentration::{intervals_disjoint, union_anytime_width, ConfidenceInterval};
use crate::error::{BanditError, Result};
use crate::estimator::{EstimateNormHp, UpdateOutcome};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::vecmath::{dot, ActionVec};

#[derive(Debug, Clone)]
pub struct MultiHintConfig<S> {
    /// Candidate hints. Each is run under both signs.
    pub hints: Vec<ActionVec<S>>,
    pub horizon: u64,
    pub delta_prob: f64,
    /// Exploration ratio; `⌈m^{1/3}⌉` when unset.
    pub b: Option<u64>,
    pub w: f64,
    pub c0: f64,
    pub knobs: EstimatorKnobs,
}

impl<S: Scalar> MultiHintConfig<S> {
    pub fn new(hints: Vec<ActionVec<S>>, horizon: u64) -> Self {
        Self {
            hints,
            horizon,
            delta_prob: 0.1,
            b: None,
            w: DEFAULT_W,
            c0: 4.0,
            knobs: EstimatorKnobs::default(),
        }
    }
}

/// Distinct hints up to sign, then the negation-closed candidate set.
fn candidate_set<S: Scalar>(hints: &[ActionVec<S>]) -> Result<(usize, Vec<ActionVec<S>>)> {
    let Some(first) = hints.first() else {
        return Err(BanditError::domain("need at least one hint"));
    };
    let d = first.dim();
    let mut base: Vec<&ActionVec<S>> = Vec::new();
    for h in hints {
        if h.dim() != d {
            return Err(BanditError::domain("hints must share one dimension"));
        }
        if !h.is_unit() {
            return Err(BanditError::domain(format!("hints must be unit vectors, got norm {}", h.norm())));
        }
        let dup = base
            .iter()
            .any(|b| (dot(b.as_slice(), h.as_slice()).abs() - S::one()).abs() <= S::orth_tol());
        if !dup {
            base.push(h);
        }
    }
    let set = base.iter().flat_map(|h| [(*h).clone(), h.neg()]).collect();
    Ok((base.len(), set))
}

struct Tournament<S: Scalar> {
    r: S,
    arms: Vec<EstimateNormHp<S>>,
    active: Vec<usize>,
    queue: Vec<usize>,
    pos: usize,
    step_returns: Vec<Option<S>>,
    started_at: u64,
    budget: u64,
    /// Removal threshold on `r⊥²/r`.
    removal_level: f64,
}

enum Stage<S: Scalar> {
    Norm(EstimateNormHp<S>),
    Tournament(Box<Tournament<S>>),
    /// Inner policy and the round it started at.
    Commit(Box<dyn Policy<S>>, u64),
}

/// Elimination tournament over several hints and their negations, followed
/// by the single-hint algorithm on a survivor.
pub struct MultiHintBandit<S: Scalar> {
    cfg: MultiHintConfig<S>,
    m: usize,
    candidates: Vec<ActionVec<S>>,
    b: u64,
    factory: FallbackFactory<S>,
    rng: RandomSource,
    stage: Stage<S>,
    events: Vec<PhaseEvent>,
    turn: Turn,
}

impl<S: Scalar> MultiHintBandit<S> {
    pub fn new(cfg: MultiHintConfig<S>, factory: FallbackFactory<S>, rng: RandomSource) -> Result<Self> {
        let (m, candidates) = candidate_set(&cfg.hints)?;
        if cfg.horizon < 2 {
            return Err(BanditError::domain("horizon must be >= 2"));
        }
        if !(cfg.delta_prob > 0.0 && cfg.delta_prob < 1.0) {
            return Err(BanditError::domain("failure probability must lie in (0,1)"));
        }
        if !(cfg.w > 0.0) || !(cfg.c0 > 0.0) {
            return Err(BanditError::domain("W and c0 must be > 0"));
        }
        if candidates[0].dim() < 2 {
            return Err(BanditError::domain("hint dimension must be >= 2"));
        }
        let b = match cfg.b {
            Some(0) => return Err(BanditError::domain("exploration ratio must be >= 1")),
            Some(b) => b,
            None => ((m as f64).cbrt() - 1e-9).ceil().max(1.0) as u64,
        };
        let k = cfg.knobs.instance_count(cfg.delta_prob / 4.0)?;
        let d = candidates[0].dim();
        let norm = EstimateNormHp::with_instances(ActionVec::zeros(d), S::one(), k, &rng.child(1))?;
        Ok(Self {
            cfg,
            m,
            candidates,
            b,
            factory,
            rng,
            stage: Stage::Norm(norm),
            events: vec![PhaseEvent::new(0, "phase1")],
            turn: Turn::default(),
        })
    }

    /// Number of distinct hints up to sign.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn exploration_ratio(&self) -> u64 {
        self.b
    }

    /// The negation-closed candidate set, `+h` before `-h` for each hint.
    pub fn candidates(&self) -> &[ActionVec<S>] {
        &self.candidates
    }

    /// Indices into [`candidates`](Self::candidates) still in the tournament.
    pub fn surviving(&self) -> Option<&[usize]> {
        match &self.stage {
            Stage::Tournament(t) => Some(&t.active),
            _ => None,
        }
    }

    fn label(&self, i: usize) -> String {
        format!("h{}{}", i / 2, if i % 2 == 0 { '+' } else { '-' })
    }

    fn enter_tournament(&mut self, r: S, round: u64) -> Result<()> {
        let t = self.cfg.horizon as f64;
        let d = self.candidates[0].dim() as f64;
        let delta = S::lit((self.m as f64).sqrt() / (r.as_f64().sqrt() * t.powf(0.25)));
        let k = self.cfg.knobs.instance_count(self.cfg.delta_prob / (4.0 * self.m as f64))?;
        let arms = self
            .candidates
            .iter()
            .enumerate()
            .map(|(i, h)| EstimateNormHp::with_instances(h.clone(), delta, k, &self.rng.child(10 + i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let n = arms.len();
        let mut ev = PhaseEvent::new(round, "tournament");
        ev.r = Some(r.as_f64());
        self.events.push(ev);
        self.stage = Stage::Tournament(Box::new(Tournament {
            r,
            arms,
            active: (0..n).collect(),
            queue: Vec::new(),
            pos: 0,
            step_returns: vec![None; n],
            started_at: round,
            budget: self.cfg.horizon / self.b,
            removal_level: self.cfg.c0 * self.cfg.w * d * t.ln() / t.sqrt(),
        }));
        Ok(())
    }

    fn interval(&self, t: &Tournament<S>, i: usize) -> Option<ConfidenceInterval<f64>> {
        let (sum, n) = t.arms[i].hint_samples();
        if n == 0 {
            return None;
        }
        let w = union_anytime_width(n, 1.0, self.cfg.delta_prob, self.m).ok()?;
        ConfidenceInterval::new(sum.as_f64() / n as f64, w).ok()
    }

    fn end_of_iteration(&mut self, round: u64) -> Result<()> {
        let Stage::Tournament(t) = &self.stage else {
            unreachable!("tournament only")
        };
        let cis: Vec<_> = t.active.iter().map(|&i| (i, self.interval(t, i))).collect();
        let mut losers: Vec<usize> = cis
            .iter()
            .filter_map(|&(i, ci)| {
                let ci = ci?;
                cis.iter()
                    .any(|&(_, other)| other.is_some_and(|o| o.center > ci.center && intervals_disjoint(&ci, &o)))
                    .then_some(i)
            })
            .collect();
        let mut survivors: Vec<usize> = t.active.iter().copied().filter(|i| !losers.contains(i)).collect();
        let rf = t.r.as_f64();
        for &i in t.active.iter() {
            if survivors.len() <= 1 {
                break;
            }
            if let (true, Some(v)) = (survivors.contains(&i), t.step_returns[i]) {
                if v.as_f64().powi(2) / rf >= t.removal_level {
                    survivors.retain(|&j| j != i);
                    losers.push(i);
                }
            }
        }
        let used = round - t.started_at;
        let done = survivors.len() <= 1 || used >= t.budget;
        for &i in &losers {
            let mut ev = PhaseEvent::new(round, "tournament");
            ev.eliminated = Some(self.label(i));
            self.events.push(ev);
        }
        let Stage::Tournament(t) = &mut self.stage else {
            unreachable!("tournament only")
        };
        t.active = survivors;
        if done {
            self.commit(round)?;
        }
        Ok(())
    }

    fn commit(&mut self, round: u64) -> Result<()> {
        let Stage::Tournament(t) = &self.stage else {
            unreachable!("tournament only")
        };
        let mut pick_rng = self.rng.child(4);
        let pick = t.active[pick_rng.random_range(0..t.active.len())];
        let hint = self.candidates[pick].clone();
        let remaining = self.cfg.horizon.saturating_sub(round);
        let policy: Box<dyn Policy<S>> = if remaining < 2 {
            Box::new(PlayHint::new(hint))
        } else {
            let cfg = ParetoBanditConfig {
                hint,
                horizon: remaining,
                delta_prob: self.cfg.delta_prob,
                w: self.cfg.w,
                knobs: self.cfg.knobs,
            };
            Box::new(ParetoBandit::with_norm_estimate(cfg, t.r, self.factory.clone(), self.rng.child(5))?)
        };
        let mut ev = PhaseEvent::new(round, "single-hint");
        ev.r = Some(t.r.as_f64());
        self.events.push(ev);
        self.stage = Stage::Commit(policy, round);
        Ok(())
    }
}

impl<S: Scalar> Policy<S> for MultiHintBandit<S> {
    fn next_action(&mut self) -> Result<ActionVec<S>> {
        self.turn.begin()?;
        match &mut self.stage {
            Stage::Norm(hp) => Ok(hp.next_action().clone()),
            Stage::Tournament(t) => {
                if t.queue.is_empty() {
                    t.queue = t.active.clone();
                    t.pos = 0;
                    t.step_returns.iter_mut().for_each(|v| *v = None);
                }
                let i = t.queue[t.pos];
                Ok(t.arms[i].next_action().clone())
            }
            Stage::Commit(p, _) => p.next_action(),
        }
    }

    fn observe(&mut self, reward: S) -> Result<()> {
        self.turn.end()?;
        let round = self.turn.observed();
        match &mut self.stage {
            Stage::Norm(hp) => {
                if let UpdateOutcome::Returned(r) = hp.observe(reward)? {
                    self.enter_tournament(r, round)?;
                }
                Ok(())
            }
            Stage::Tournament(t) => {
                let i = t.queue[t.pos];
                match t.arms[i].observe(reward)? {
                    UpdateOutcome::InProgress => return Ok(()),
                    UpdateOutcome::Returned(v) => t.step_returns[i] = Some(v),
                    UpdateOutcome::Completed => {}
                }
                t.pos += 1;
                if t.pos < t.queue.len() {
                    return Ok(());
                }
                t.queue.clear();
                self.end_of_iteration(round)
            }
            Stage::Commit(p, _) => p.observe(reward),
        }
    }

    fn phase(&self) -> &'static str {
        match &self.stage {
            Stage::Norm(_) => "phase1",
            Stage::Tournament(_) => "tournament",
            Stage::Commit(p, _) => p.phase(),
        }
    }

    fn drain_events(&mut self) -> Vec<PhaseEvent> {
        let mut out = std::mem::take(&mut self.events);
        if let Stage::Commit(p, start) = &mut self.stage {
            out.extend(p.drain_events().into_iter().map(|mut e| {
                e.round += *start;
                e
            }));
        }
        out
    }
}
