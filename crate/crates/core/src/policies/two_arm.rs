use crate::concentration::{anytime_hoeffding_width, intervals_disjoint, ConfidenceInterval};
use crate::error::{BanditError, Result};

/// Settings of the hint-favoring two-arm scheduler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoArmConfig {
    /// Target regret against the hint arm.
    pub g: f64,
    pub horizon: u64,
    pub delta_prob: f64,
    /// Sub-Gaussian scale of a single reward sample.
    pub sigma: f64,
}

/// Asymmetric elimination between a hint arm (0) and an alternative (1).
///
/// Arm 1 is pulled only while it has had fewer pulls than arm 0, fewer than
/// `⌈2·G·ln T⌉` pulls in total, and its upper confidence bound exceeds the
/// lower bound of arm 0. An arm is eliminated as soon as the two confidence
/// intervals are disjoint; the survivor is then pulled forever.
#[derive(Debug, Clone)]
pub struct HintFavoringMab {
    cfg: TwoArmConfig,
    budget: u64,
    pulls: [u64; 2],
    sums: [f64; 2],
    counts: [u64; 2],
    eliminated: Option<usize>,
}

impl HintFavoringMab {
    pub fn new(cfg: TwoArmConfig) -> Result<Self> {
        if !(cfg.g > 0.0) || !cfg.g.is_finite() {
            return Err(BanditError::domain(format!("G must be > 0, got {}", cfg.g)));
        }
        if cfg.horizon < 2 {
            return Err(BanditError::domain("horizon must be >= 2"));
        }
        if !(cfg.delta_prob > 0.0 && cfg.delta_prob < 1.0) {
            return Err(BanditError::domain("failure probability must lie in (0,1)"));
        }
        if !(cfg.sigma >= 0.0) {
            return Err(BanditError::domain("sigma must be >= 0"));
        }
        let budget = (2.0 * cfg.g * (cfg.horizon as f64).ln()).ceil() as u64;
        Ok(Self {
            cfg,
            budget,
            pulls: [0; 2],
            sums: [0.0; 2],
            counts: [0; 2],
            eliminated: None,
        })
    }

    /// Maximum number of pulls of arm 1.
    pub fn exploration_budget(&self) -> u64 {
        self.budget
    }

    pub fn pulls(&self) -> [u64; 2] {
        self.pulls
    }

    pub fn eliminated(&self) -> Option<usize> {
        self.eliminated
    }

    pub fn active_arms(&self) -> Vec<usize> {
        (0..2).filter(|&a| Some(a) != self.eliminated).collect()
    }

    pub fn mean(&self, arm: usize) -> Option<f64> {
        (self.counts[arm] > 0).then(|| self.sums[arm] / self.counts[arm] as f64)
    }

    /// Two-sided interval for an arm's mean, joint over both arms and all
    /// sample counts.
    pub fn interval(&self, arm: usize) -> Option<ConfidenceInterval<f64>> {
        let mean = self.mean(arm)?;
        let w = anytime_hoeffding_width(self.counts[arm], self.cfg.sigma, self.cfg.delta_prob / 2.0).ok()?;
        ConfidenceInterval::new(mean, w).ok()
    }

    /// Chooses the next arm and counts the pull.
    pub fn next_arm(&mut self) -> usize {
        let arm = match self.eliminated {
            Some(e) => 1 - e,
            None => {
                let explore = self.pulls[1] < self.pulls[0]
                    && self.pulls[1] < self.budget
                    && match (self.interval(0), self.interval(1)) {
                        (Some(i0), Some(i1)) => i1.upper() > i0.lower(),
                        _ => true,
                    };
                usize::from(explore)
            }
        };
        self.pulls[arm] += 1;
        arm
    }

    /// Adds `count` reward samples summing to `sum` for `arm`; returns the
    /// arm eliminated by this record, if any.
    pub fn record(&mut self, arm: usize, sum: f64, count: u64) -> Result<Option<usize>> {
        if arm > 1 {
            return Err(BanditError::domain(format!("arm index {arm} out of range")));
        }
        self.sums[arm] += sum;
        self.counts[arm] += count;
        if self.eliminated.is_some() {
            return Ok(None);
        }
        if let (Some(i0), Some(i1)) = (self.interval(0), self.interval(1)) {
            if intervals_disjoint(&i0, &i1) {
                let loser = if i0.center < i1.center { 0 } else { 1 };
                self.eliminated = Some(loser);
                return Ok(Some(loser));
            }
        }
        Ok(None)
    }
}
