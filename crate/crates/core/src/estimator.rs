//! Low-regret estimation of `‖P⊥_h θ*‖` by playing a hint and one fixed
//! perturbation of it, plus median-of-means amplification.
//!
//! Both estimators are step machines: [`next_action`](EstimateNorm::next_action)
//! names the action to play and [`observe`](EstimateNorm::observe) consumes the
//! reward. `play_and_update` drives exactly one update against a pull callback.

use crate::concentration::{estimator_width, LIL_CONSTANT};
use crate::error::{BanditError, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::vecmath::{effective_dim, norm_sq, perturb, sample_projected_gaussian, ActionVec};

/// Leading constant of the median-of-means instance count.
pub const HP_INSTANCE_CONSTANT: f64 = 560.0;

/// Result of feeding one reward to an estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateOutcome<S> {
    /// The current update still needs more pulls.
    InProgress,
    /// An update finished without producing an estimate.
    Completed,
    /// An update finished and produced this estimate.
    Returned(S),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Hint,
    Perturbed,
}

/// One row of an estimator's diagnostic trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorTraceRow<S> {
    pub n: u64,
    pub xbar: S,
    pub width: S,
    pub returned: bool,
}

/// Constant-probability estimator of `‖P⊥_h θ*‖`.
#[derive(Debug, Clone)]
pub struct EstimateNorm<S> {
    h: ActionVec<S>,
    delta: S,
    p: Vec<S>,
    perturbed: ActionVec<S>,
    d_eff: usize,
    h_norm_sq: S,
    p_norm_sq: S,
    /// `√(‖p‖² + ‖h‖²)`
    lift: S,
    n: u64,
    y_sum: S,
    z_sum: S,
    xbar: S,
    /// `12(1 + ‖h‖² + ‖p‖²)`: a return needs `x̄²·n ≥ scale·ln(40 ln 2n)`.
    scale: S,
    /// `ln(40 ln 2m)` at the last power of two `m ≤ n`; a lower bound for
    /// the current value since the function increases.
    lil_floor: S,
    stage: Stage,
    returned: Option<S>,
    trace: Option<Vec<EstimatorTraceRow<S>>>,
}

impl<S: Scalar> EstimateNorm<S> {
    /// Samples the fixed perturbation `p ~ N_h(0, Δ²/d′)` once.
    pub fn new(h: ActionVec<S>, delta: S, rng: &mut RandomSource) -> Result<Self> {
        if !(delta > S::zero()) || !delta.is_finite() {
            return Err(BanditError::domain(format!("perturbation magnitude must be > 0, got {delta}")));
        }
        if !(h.is_zero() || h.is_unit()) {
            return Err(BanditError::domain(format!(
                "reference action must be zero or unit, got norm {}",
                h.norm()
            )));
        }
        if !h.is_zero() && h.dim() < 2 {
            return Err(BanditError::domain("orthogonal perturbation needs d >= 2"));
        }
        let d_eff = effective_dim(h.as_slice());
        let p = loop {
            let p = sample_projected_gaussian(h.as_slice(), delta * delta, rng)?;
            // p = 0 has probability zero; it would make the zero-hint probe undefined
            if norm_sq(&p) > S::zero() {
                break p;
            }
        };
        let perturbed = perturb(&h, &p)?;
        let h_norm_sq = norm_sq(h.as_slice());
        let p_norm_sq = norm_sq(&p);
        Ok(Self {
            lift: (p_norm_sq + h_norm_sq).sqrt(),
            h,
            delta,
            p,
            perturbed,
            d_eff,
            h_norm_sq,
            p_norm_sq,
            n: 0,
            y_sum: S::zero(),
            z_sum: S::zero(),
            xbar: S::zero(),
            scale: S::lit(12.0) * (S::one() + h_norm_sq + p_norm_sq),
            lil_floor: S::zero(),
            stage: Stage::Hint,
            returned: None,
            trace: None,
        })
    }

    /// Keeps `(n, x̄_n, b_n, returned)` for every completed update.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn hint(&self) -> &ActionVec<S> {
        &self.h
    }

    pub fn perturbation(&self) -> &[S] {
        &self.p
    }

    pub fn perturbed_action(&self) -> &ActionVec<S> {
        &self.perturbed
    }

    pub fn delta(&self) -> S {
        self.delta
    }

    pub fn effective_dim(&self) -> usize {
        self.d_eff
    }

    /// Completed updates.
    pub fn updates(&self) -> u64 {
        self.n
    }

    pub fn ybar(&self) -> S {
        self.mean(self.y_sum)
    }

    pub fn zbar(&self) -> S {
        self.mean(self.z_sum)
    }

    pub fn xbar(&self) -> S {
        self.xbar
    }

    /// `b_n` at the last completed update (infinite before the first).
    pub fn width(&self) -> S {
        if self.n == 0 {
            S::infinity()
        } else {
            estimator_width(self.n, self.h_norm_sq, self.p_norm_sq).expect("n >= 1")
        }
    }

    pub fn returned(&self) -> Option<S> {
        self.returned
    }

    pub fn trace(&self) -> Option<&[EstimatorTraceRow<S>]> {
        self.trace.as_deref()
    }

    /// Whether the next pull is the unperturbed reference action.
    pub fn awaiting_hint(&self) -> bool {
        self.stage == Stage::Hint
    }

    /// Whether an update is half done.
    pub fn mid_update(&self) -> bool {
        self.stage == Stage::Perturbed
    }

    fn mean(&self, sum: S) -> S {
        if self.n == 0 {
            S::zero()
        } else {
            sum / S::from_u64(self.n).unwrap()
        }
    }

    pub fn next_action(&self) -> Result<&ActionVec<S>> {
        if self.returned.is_some() {
            return Err(BanditError::state("estimator already returned"));
        }
        Ok(match self.stage {
            Stage::Hint => &self.h,
            Stage::Perturbed => &self.perturbed,
        })
    }

    pub fn observe(&mut self, reward: S) -> Result<UpdateOutcome<S>> {
        if self.returned.is_some() {
            return Err(BanditError::state("estimator already returned"));
        }
        match self.stage {
            Stage::Hint => {
                self.y_sum = self.y_sum + reward;
                self.stage = Stage::Perturbed;
                Ok(UpdateOutcome::InProgress)
            }
            Stage::Perturbed => {
                self.z_sum = self.z_sum + reward;
                self.stage = Stage::Hint;
                self.n += 1;
                let nf = S::from_u64(self.n).unwrap();
                let ybar = self.y_sum / nf;
                let zbar = self.z_sum / nf;
                self.xbar = zbar * self.lift - ybar;
                if self.n.is_power_of_two() {
                    let lil = (S::lit(LIL_CONSTANT) * (S::lit(2.0) * nf).ln()).ln();
                    self.lil_floor = lil;
                }
                // exact test only when the cheap necessary condition holds;
                // the margin absorbs rounding in the squared form
                let maybe = self.xbar * self.xbar * nf >= S::lit(0.999) * self.scale * self.lil_floor;
                let hit = (maybe || self.trace.is_some()) && {
                    let width = estimator_width(self.n, self.h_norm_sq, self.p_norm_sq)?;
                    if let Some(trace) = self.trace.as_mut() {
                        trace.push(EstimatorTraceRow {
                            n: self.n,
                            xbar: self.xbar,
                            width,
                            returned: false,
                        });
                    }
                    self.xbar.abs() >= S::lit(2.0) * width
                };
                if let Some(row) = self.trace.as_mut().and_then(|t| t.last_mut()) {
                    row.returned = hit;
                }
                if hit {
                    let d_eff = S::from_usize(self.d_eff).unwrap();
                    let value = d_eff.sqrt() / self.delta * self.xbar.abs();
                    self.returned = Some(value);
                    Ok(UpdateOutcome::Returned(value))
                } else {
                    Ok(UpdateOutcome::Completed)
                }
            }
        }
    }

    /// One full update: plays `h`, then the perturbed action.
    pub fn play_and_update<F>(&mut self, mut pull: F) -> Result<Option<S>>
    where
        F: FnMut(&ActionVec<S>) -> Result<S>,
    {
        if self.mid_update() {
            return Err(BanditError::state("update already in progress"));
        }
        loop {
            let action = self.next_action()?.clone();
            let y = pull(&action)?;
            match self.observe(y)? {
                UpdateOutcome::InProgress => continue,
                UpdateOutcome::Completed => return Ok(None),
                UpdateOutcome::Returned(v) => return Ok(Some(v)),
            }
        }
    }
}

/// `k = ⌈560 ln(1/δ)⌉`, at least 1.
pub fn hp_instance_count(delta_prob: f64) -> Result<usize> {
    if !(delta_prob > 0.0 && delta_prob < 1.0) {
        return Err(BanditError::domain(format!(
            "failure probability must lie in (0,1), got {delta_prob}"
        )));
    }
    let raw = HP_INSTANCE_CONSTANT * (1.0 / delta_prob).ln();
    // absorb rounding in ln so that δ = e^-1 gives exactly 560
    Ok(((raw - 1e-9).ceil() as usize).max(1))
}

/// `⌈0.67 k⌉` in exact integer arithmetic.
pub fn hp_return_threshold(k: usize) -> usize {
    (67 * k).div_ceil(100)
}

/// Lower median: the `⌈n/2⌉`-th order statistic.
pub fn lower_median<S: Scalar>(values: &[S]) -> Option<S> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Some(v[values.len().div_ceil(2) - 1])
}

/// High-probability estimator: median over `k` independent [`EstimateNorm`]s.
///
/// While fewer than `⌈0.67k⌉` inner instances have returned, one update
/// advances every still-active inner instance once, in index order (two pulls
/// each). Once the threshold is met the median is returned, and every later
/// update plays the unperturbed reference action once and returns the median
/// again.
#[derive(Debug, Clone)]
pub struct EstimateNormHp<S> {
    h: ActionVec<S>,
    inner: Vec<EstimateNorm<S>>,
    active: Vec<usize>,
    returns: Vec<S>,
    threshold: usize,
    queue: Vec<usize>,
    pos: usize,
    median: Option<S>,
    hint_sum: S,
    hint_count: u64,
    updates: u64,
    pulls: u64,
}

impl<S: Scalar> EstimateNormHp<S> {
    /// `k = ⌈560 ln(1/δ)⌉` inner instances.
    pub fn new(h: ActionVec<S>, delta: S, delta_prob: f64, rng: &RandomSource) -> Result<Self> {
        let k = hp_instance_count(delta_prob)?;
        Self::with_instances(h, delta, k, rng)
    }

    /// Explicit instance count. Inner instance `i` draws its perturbation
    /// from `rng.child(i)`.
    pub fn with_instances(h: ActionVec<S>, delta: S, k: usize, rng: &RandomSource) -> Result<Self> {
        if k == 0 {
            return Err(BanditError::domain("need at least one inner instance"));
        }
        let inner = (0..k)
            .map(|i| EstimateNorm::new(h.clone(), delta, &mut rng.child(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            h,
            inner,
            active: (0..k).collect(),
            returns: Vec::new(),
            threshold: hp_return_threshold(k),
            queue: Vec::new(),
            pos: 0,
            median: None,
            hint_sum: S::zero(),
            hint_count: 0,
            updates: 0,
            pulls: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.inner.len()
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn hint(&self) -> &ActionVec<S> {
        &self.h
    }

    pub fn inner(&self) -> &[EstimateNorm<S>] {
        &self.inner
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn returns(&self) -> &[S] {
        &self.returns
    }

    /// The emitted median, once committed.
    pub fn estimate(&self) -> Option<S> {
        self.median
    }

    pub fn is_committed(&self) -> bool {
        self.median.is_some()
    }

    /// Completed calls to the update procedure.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    /// Whether an update is partially executed.
    pub fn mid_update(&self) -> bool {
        !self.queue.is_empty()
    }

    /// Rewards collected while playing the unperturbed reference action.
    pub fn hint_samples(&self) -> (S, u64) {
        (self.hint_sum, self.hint_count)
    }

    pub fn hint_mean(&self) -> Option<S> {
        (self.hint_count > 0).then(|| self.hint_sum / S::from_u64(self.hint_count).unwrap())
    }

    pub fn next_action(&mut self) -> &ActionVec<S> {
        if self.median.is_some() {
            return &self.h;
        }
        if self.queue.is_empty() {
            self.queue = self.active.clone();
            self.pos = 0;
        }
        let i = self.queue[self.pos];
        self.inner[i].next_action().expect("active instances have not returned")
    }

    /// Feeds the reward for the action last named by [`next_action`](Self::next_action).
    pub fn observe(&mut self, reward: S) -> Result<UpdateOutcome<S>> {
        self.pulls += 1;
        if let Some(m) = self.median {
            self.hint_sum = self.hint_sum + reward;
            self.hint_count += 1;
            self.updates += 1;
            return Ok(UpdateOutcome::Returned(m));
        }
        if self.queue.is_empty() {
            return Err(BanditError::state("observe called without a pending action"));
        }
        let i = self.queue[self.pos];
        if self.inner[i].awaiting_hint() {
            self.hint_sum = self.hint_sum + reward;
            self.hint_count += 1;
        }
        match self.inner[i].observe(reward)? {
            UpdateOutcome::InProgress => return Ok(UpdateOutcome::InProgress),
            UpdateOutcome::Returned(v) => {
                self.returns.push(v);
                self.active.retain(|&j| j != i);
            }
            UpdateOutcome::Completed => {}
        }
        self.pos += 1;
        if self.pos < self.queue.len() {
            return Ok(UpdateOutcome::InProgress);
        }
        self.queue.clear();
        self.pos = 0;
        self.updates += 1;
        if self.returns.len() >= self.threshold {
            let m = lower_median(&self.returns).expect("nonempty");
            self.median = Some(m);
            Ok(UpdateOutcome::Returned(m))
        } else {
            Ok(UpdateOutcome::Completed)
        }
    }

    /// One full update against `pull`.
    pub fn play_and_update<F>(&mut self, mut pull: F) -> Result<Option<S>>
    where
        F: FnMut(&ActionVec<S>) -> Result<S>,
    {
        if self.mid_update() {
            return Err(BanditError::state("update already in progress"));
        }
        loop {
            let action = self.next_action().clone();
            let y = pull(&action)?;
            match self.observe(y)? {
                UpdateOutcome::InProgress => continue,
                UpdateOutcome::Completed => return Ok(None),
                UpdateOutcome::Returned(v) => return Ok(Some(v)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{BanditInstance, Environment};
    use crate::vecmath::{dot, norm};

    fn av(v: Vec<f64>) -> ActionVec<f64> {
        ActionVec::new(v).unwrap()
    }

    #[test]
    fn stopping_shortcut_matches_exact_rule() {
        // the traced path evaluates the width every update
        for seed in 0..40u64 {
            let theta = vec![0.4, 3.0, -2.0, 1.5];
            let h = ActionVec::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
            let run = |traced: bool| {
                let mut e = EstimateNorm::new(h.clone(), 2.0, &mut RandomSource::new(seed, 1)).unwrap();
                if traced {
                    e = e.with_trace();
                }
                let inst = BanditInstance::new(theta.clone(), 1.0).unwrap();
                let mut env = Environment::new(inst, vec![], 1 << 24, RandomSource::new(seed, 2), None).unwrap();
                loop {
                    if let Some(v) = e.play_and_update(|a| env.pull(a)).unwrap() {
                        return (e.updates(), v);
                    }
                }
            };
            assert_eq!(run(false), run(true));
        }
    }

    fn noiseless(theta: Vec<f64>) -> impl FnMut(&ActionVec<f64>) -> Result<f64> {
        move |a: &ActionVec<f64>| Ok(dot(&theta, a.as_slice()))
    }

    #[test]
    fn zero_hint_uses_full_dimension() {
        let mut rng = RandomSource::new(0, 0);
        let e = EstimateNorm::new(ActionVec::<f64>::zeros(3), 1.0, &mut rng).unwrap();
        assert_eq!(e.effective_dim(), 3);
        assert!(e.perturbation().iter().all(|&x| x != 0.0));
    }

    #[test]
    fn unit_hint_perturbation_is_orthogonal() {
        let mut rng = RandomSource::new(0, 1);
        let e = EstimateNorm::new(av(vec![0.0, 1.0, 0.0, 0.0]), 0.2, &mut rng).unwrap();
        assert_eq!(e.effective_dim(), 3);
        assert_eq!(e.perturbation()[1], 0.0);
    }

    #[test]
    fn rejects_invalid_reference() {
        let mut rng = RandomSource::new(0, 1);
        assert!(EstimateNorm::new(av(vec![0.5, 0.0]), 0.2, &mut rng).is_err());
        assert!(EstimateNorm::new(av(vec![1.0, 0.0]), 0.0, &mut rng).is_err());
        assert!(EstimateNorm::new(av(vec![1.0]), 0.1, &mut rng).is_err());
    }

    #[test]
    fn perturbation_energy_matches_delta() {
        let mut rng = RandomSource::new(5, 5);
        let h = av(vec![0.6, 0.8, 0.0, 0.0, 0.0]);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| norm_sq(EstimateNorm::new(h.clone(), 0.3, &mut rng).unwrap().perturbation()))
            .sum::<f64>()
            / n as f64;
        assert!((mean / 0.09 - 1.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn noiseless_aligned_hint_never_returns() {
        let mut rng = RandomSource::new(3, 0);
        let mut e = EstimateNorm::new(av(vec![1.0, 0.0]), 0.5, &mut rng).unwrap();
        let mut pull = noiseless(vec![1.0, 0.0]);
        for _ in 0..5000 {
            assert_eq!(e.play_and_update(&mut pull).unwrap(), None);
            assert!(e.xbar().abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_return_time_matches_scan() {
        let mut rng = RandomSource::new(8, 2);
        let h = av(vec![1.0, 0.0, 0.0]);
        let theta = vec![0.7, 2.0, -1.5];
        let mut e = EstimateNorm::new(h, 1.0, &mut rng).unwrap();
        let p = e.perturbation().to_vec();
        let c = dot(&p, &theta);
        // oracle: first n with |c| >= 2 b_n, widths computed from the closed form
        let pp = norm_sq(&p);
        let expect_n = (1u64..)
            .find(|&n| {
                let nf = n as f64;
                let b = (3.0 * (2.0 + pp) * (40.0 * (2.0 * nf).ln()).ln() / nf).sqrt();
                c.abs() >= 2.0 * b
            })
            .unwrap();
        let mut pull = noiseless(theta);
        let mut got = None;
        while got.is_none() {
            got = e.play_and_update(&mut pull).unwrap();
        }
        assert_eq!(e.updates(), expect_n);
        let want = (2f64).sqrt() * c.abs();
        assert!((got.unwrap() - want).abs() < 1e-9 * want);
        assert!(e.play_and_update(&mut pull).is_err());
    }

    #[test]
    fn xbar_identity_after_every_update() {
        let theta = vec![0.3, -0.5, 0.8, 0.1];
        let inst = BanditInstance::new(theta, 1.0).unwrap();
        let mut env = Environment::new(inst, vec![], 10_000, RandomSource::new(1, 1), None).unwrap();
        let mut e = EstimateNorm::new(av(vec![0.0, 0.0, 1.0, 0.0]), 0.2, &mut RandomSource::new(2, 0))
            .unwrap()
            .with_trace();
        let p0 = e.perturbation().to_vec();
        for _ in 0..300 {
            if e.play_and_update(|a| env.pull(a)).unwrap().is_some() {
                break;
            }
            let lift = (norm_sq(&p0) + 1.0).sqrt();
            assert!((e.xbar() - (e.zbar() * lift - e.ybar())).abs() < 1e-12);
            assert_eq!(e.perturbation(), &p0[..]);
        }
        for row in e.trace().unwrap() {
            let b: f64 = estimator_width(row.n, 1.0, norm_sq(&p0)).unwrap();
            assert!((row.width - b).abs() < 1e-15);
            assert_eq!(row.returned, row.xbar.abs() >= 2.0 * b);
        }
    }

    #[test]
    fn instance_count_examples() {
        assert_eq!(hp_instance_count((-1.0f64).exp()).unwrap(), 560);
        assert_eq!(hp_instance_count(0.5).unwrap(), 389);
        assert!(hp_instance_count(1.0).is_err());
        assert!(hp_instance_count(0.0).is_err());
        assert_eq!(hp_instance_count(0.999_999_999).unwrap(), 1);
        assert_eq!(hp_return_threshold(1), 1);
        assert_eq!(hp_return_threshold(3), 3);
        assert_eq!(hp_return_threshold(100), 67);
        assert_eq!(hp_return_threshold(40), 27);
    }

    #[test]
    fn lower_median_examples() {
        assert_eq!(lower_median(&[0.1, 30.0, 0.2]), Some(0.2));
        assert_eq!(lower_median(&[4.0, 1.0, 3.0, 2.0]), Some(2.0));
        assert_eq!(lower_median::<f64>(&[]), None);
    }

    #[test]
    fn hp_perturbations_are_distinct() {
        let hp = EstimateNormHp::with_instances(av(vec![1.0, 0.0, 0.0]), 0.1, 50, &RandomSource::new(4, 0))
            .unwrap();
        for i in 0..50 {
            for j in 0..i {
                assert_ne!(hp.inner()[i].perturbation(), hp.inner()[j].perturbation());
            }
        }
    }

    #[test]
    fn hp_with_single_instance_matches_inner() {
        let theta = vec![0.7, 0.2, -0.4];
        let h = av(vec![1.0, 0.0, 0.0]);
        let rng = RandomSource::new(8, 2);
        let mut single = EstimateNorm::new(h.clone(), 0.3, &mut rng.child(0)).unwrap();
        let mut hp = EstimateNormHp::with_instances(h, 0.3, 1, &rng).unwrap();
        let mut pull = noiseless(theta);
        loop {
            let a = single.play_and_update(&mut pull).unwrap();
            let b = hp.play_and_update(&mut pull).unwrap();
            assert_eq!(a, b);
            if a.is_some() {
                break;
            }
        }
        // committed: exactly one unperturbed pull per further update
        let before = hp.pulls();
        let mut seen = Vec::new();
        let v = hp
            .play_and_update(|a| {
                seen.push(a.clone());
                Ok(0.7)
            })
            .unwrap();
        assert_eq!(v, hp.estimate());
        assert_eq!(hp.pulls(), before + 1);
        assert_eq!(seen, vec![av(vec![1.0, 0.0, 0.0])]);
    }

    #[test]
    fn hp_pull_accounting_and_median() {
        // three inner instances probing three different magnitudes
        let h = av(vec![1.0, 0.0, 0.0]);
        let rng = RandomSource::new(17, 0);
        let mut hp = EstimateNormHp::with_instances(h, 0.3, 3, &rng).unwrap();
        let theta = vec![0.5, 2.0, -1.0];
        let mut pull = noiseless(theta.clone());
        let mut result = None;
        while result.is_none() {
            let active = hp.active().len() as u64;
            let before = hp.pulls();
            result = hp.play_and_update(&mut pull).unwrap();
            assert_eq!(hp.pulls() - before, 2 * active);
        }
        let expected: Vec<f64> = hp
            .inner()
            .iter()
            .map(|e| 2f64.sqrt() / 0.3 * dot(e.perturbation(), &theta).abs())
            .collect();
        assert_eq!(hp.returns().len(), 3);
        let want = lower_median(&expected).unwrap();
        assert!((result.unwrap() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn hint_samples_track_unperturbed_pulls() {
        let h = av(vec![0.0, 1.0]);
        let mut hp = EstimateNormHp::with_instances(h, 0.1, 4, &RandomSource::new(1, 0)).unwrap();
        for _ in 0..3 {
            hp.play_and_update(|a| Ok(if a.as_slice() == [0.0, 1.0] { 1.0 } else { -5.0 }))
                .unwrap();
        }
        let (sum, count) = hp.hint_samples();
        assert_eq!(count, 12);
        assert_eq!(sum, 12.0);
        assert_eq!(hp.hint_mean(), Some(1.0));
        assert!(norm(hp.hint().as_slice()) == 1.0);
    }
}
