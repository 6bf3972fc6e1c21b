use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{BanditError, Result};
use crate::instances::{gen_hint_of_quality, GeneratedInstance, InstanceSpec};
use crate::policies::{
    oful_factory, EstimatorKnobs, FallbackFactory, FrontierBandit, FrontierConfig, MultiHintBandit,
    MultiHintConfig, Oful, OfulConfig, ParetoBandit, ParetoBanditConfig, Phase2Cap, PlayHint, Policy, Switch,
    SwitchConfig, DEFAULT_W,
};
use crate::rng::RandomSource;
use crate::vecmath::{random_unit, ActionVec};

fn default_record_every() -> u64 {
    64
}

fn default_delta() -> f64 {
    0.1
}

fn default_w() -> f64 {
    DEFAULT_W
}

fn default_c0() -> f64 {
    4.0
}

fn default_c1() -> f64 {
    1.0
}

fn one() -> f64 {
    1.0
}

/// Replication seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List { list: Vec<u64> },
    Range { base_seed: u64, n_reps: u64 },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::List { list } => list.clone(),
            SeedSpec::Range { base_seed, n_reps } => (0..*n_reps).map(|i| base_seed + i).collect(),
        }
    }
}

/// How the hint (or hints) are derived from the instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum HintSpec {
    /// `a*`.
    Perfect,
    /// `−a*`.
    Negated,
    /// Random rotation of `a*` with instantaneous regret `r_h`.
    Quality { r_h: f64 },
    Explicit { vector: Vec<f64> },
    /// The direction the instance family was generated around.
    Anchor,
    /// Uniform direction with instantaneous regret at least `min_regret`.
    Random {
        #[serde(default)]
        min_regret: f64,
    },
    /// Several hints, listed, then `fill.count` random ones.
    Multi {
        hints: Vec<HintSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fill: Option<RandomFill>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomFill {
    pub count: usize,
    #[serde(default)]
    pub min_regret: f64,
}

const MAX_REJECTIONS: usize = 100_000;

impl HintSpec {
    pub fn resolve<R: Rng + ?Sized>(&self, gen: &GeneratedInstance<f64>, rng: &mut R) -> Result<Vec<ActionVec<f64>>> {
        let inst = &gen.instance;
        let d = inst.dim();
        let random = |min_regret: f64, rng: &mut R| -> Result<ActionVec<f64>> {
            for _ in 0..MAX_REJECTIONS {
                let h = ActionVec::new(random_unit(d, rng))?;
                if inst.instantaneous_regret(h.as_slice()) >= min_regret {
                    return Ok(h);
                }
            }
            Err(BanditError::domain(format!("no random hint with regret >= {min_regret} found")))
        };
        Ok(match self {
            HintSpec::Perfect => vec![inst.optimal_action()],
            HintSpec::Negated => vec![inst.optimal_action().neg()],
            HintSpec::Quality { r_h } => vec![gen_hint_of_quality(inst, *r_h, rng)?],
            HintSpec::Explicit { vector } => {
                if vector.len() != d {
                    return Err(BanditError::domain(format!("hint has {} coordinates, instance has {d}", vector.len())));
                }
                vec![ActionVec::normalized(vector)?]
            }
            HintSpec::Anchor => vec![gen
                .anchor
                .clone()
                .ok_or_else(|| BanditError::domain("this instance kind has no anchor direction"))?],
            HintSpec::Random { min_regret } => vec![random(*min_regret, rng)?],
            HintSpec::Multi { hints, fill } => {
                let mut out = Vec::new();
                for h in hints {
                    if matches!(h, HintSpec::Multi { .. }) {
                        return Err(BanditError::domain("hint lists do not nest"));
                    }
                    out.extend(h.resolve(gen, rng)?);
                }
                if let Some(f) = fill {
                    for _ in 0..f.count {
                        out.push(random(f.min_regret, rng)?);
                    }
                }
                if out.is_empty() {
                    return Err(BanditError::domain("empty hint list"));
                }
                out
            }
        })
    }
}

/// Ceiling on orthogonal-norm estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapSpec {
    #[default]
    Auto,
    Unbounded,
    Updates(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(default)]
    pub phase2_cap: CapSpec,
}

impl EstimatorSpec {
    pub fn knobs(&self) -> EstimatorKnobs {
        EstimatorKnobs {
            instances: self.instances,
            phase2_cap: match self.phase2_cap {
                CapSpec::Auto => Phase2Cap::Auto,
                CapSpec::Unbounded => Phase2Cap::Unbounded,
                CapSpec::Updates(n) => Phase2Cap::Updates(n),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfulSpec {
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "one")]
    pub s_bound: f64,
    #[serde(default = "one")]
    pub noise_scale: f64,
}

impl Default for OfulSpec {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            delta: default_delta(),
            s_bound: 1.0,
            noise_scale: 1.0,
        }
    }
}

impl OfulSpec {
    pub fn config(&self) -> OfulConfig {
        OfulConfig {
            lambda: self.lambda,
            delta_prob: self.delta,
            s_bound: self.s_bound,
            noise_scale: self.noise_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    ParetoBandit {
        #[serde(default = "default_w")]
        w: f64,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default)]
        estimator: EstimatorSpec,
        #[serde(default)]
        fallback: OfulSpec,
    },
    Frontier {
        g: f64,
        #[serde(default = "default_c0")]
        c0: f64,
        #[serde(default = "default_c1")]
        c1: f64,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default)]
        estimator: EstimatorSpec,
        #[serde(default)]
        fallback: OfulSpec,
    },
    MultiHint {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<u64>,
        #[serde(default = "default_w")]
        w: f64,
        #[serde(default = "default_c0")]
        c0: f64,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default)]
        estimator: EstimatorSpec,
        #[serde(default)]
        fallback: OfulSpec,
    },
    Oful {
        #[serde(flatten)]
        oful: OfulSpec,
    },
    PlayHint,
    Switch {
        r_hat: f64,
        r_lb: f64,
        #[serde(default)]
        fallback: OfulSpec,
    },
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::ParetoBandit { .. } => "pareto_bandit",
            PolicySpec::Frontier { .. } => "frontier",
            PolicySpec::MultiHint { .. } => "multi_hint",
            PolicySpec::Oful { .. } => "oful",
            PolicySpec::PlayHint => "play_hint",
            PolicySpec::Switch { .. } => "switch",
        }
    }

    fn factory(fallback: &OfulSpec) -> FallbackFactory<f64> {
        oful_factory(fallback.config())
    }

    /// Instantiates the policy for one replication.
    pub fn build(&self, hints: &[ActionVec<f64>], horizon: u64, rng: RandomSource) -> Result<Box<dyn Policy<f64>>> {
        let d = hints.first().map(|h| h.dim()).ok_or_else(|| BanditError::domain("no hint resolved"))?;
        let single = || -> Result<ActionVec<f64>> {
            match hints {
                [h] => Ok(h.clone()),
                _ => Err(BanditError::domain(format!("policy takes one hint, {} given", hints.len()))),
            }
        };
        Ok(match self {
            PolicySpec::ParetoBandit { w, delta, estimator, fallback } => {
                let cfg = ParetoBanditConfig {
                    hint: single()?,
                    horizon,
                    delta_prob: *delta,
                    w: *w,
                    knobs: estimator.knobs(),
                };
                Box::new(ParetoBandit::new(cfg, Self::factory(fallback), rng)?)
            }
            PolicySpec::Frontier { g, c0, c1, delta, estimator, fallback } => {
                let cfg = FrontierConfig {
                    hint: single()?,
                    horizon,
                    delta_prob: *delta,
                    g: *g,
                    c0: *c0,
                    c1: *c1,
                    knobs: estimator.knobs(),
                };
                Box::new(FrontierBandit::new(cfg, Self::factory(fallback), rng)?)
            }
            PolicySpec::MultiHint { b, w, c0, delta, estimator, fallback } => {
                let cfg = MultiHintConfig {
                    hints: hints.to_vec(),
                    horizon,
                    delta_prob: *delta,
                    b: *b,
                    w: *w,
                    c0: *c0,
                    knobs: estimator.knobs(),
                };
                Box::new(MultiHintBandit::new(cfg, Self::factory(fallback), rng)?)
            }
            PolicySpec::Oful { oful } => Box::new(Oful::<f64>::new(d, oful.config())?),
            PolicySpec::PlayHint => Box::new(PlayHint::new(single()?)),
            PolicySpec::Switch { r_hat, r_lb, fallback } => {
                let cfg = SwitchConfig {
                    hint: single()?,
                    r_hat: *r_hat,
                    horizon,
                    r_lb: *r_lb,
                };
                Box::new(Switch::new(cfg, Box::new(Oful::<f64>::new(d, fallback.config())?))?)
            }
        })
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub horizon: u64,
    #[serde(default = "default_record_every")]
    pub record_every: u64,
    pub seeds: SeedSpec,
    pub instance: InstanceSpec,
    pub hint: HintSpec,
    pub policy: PolicySpec,
}

fn default_name() -> String {
    "run".to_string()
}

fn config_err(path: &str, message: impl Into<String>) -> BanditError {
    BanditError::config(path, message)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(&path.display().to_string(), format!("cannot read: {e}")))?;
        Self::from_toml(&text).map_err(|e| match e {
            BanditError::Config { path: p, message } if p == "<document>" => {
                config_err(&path.display().to_string(), message)
            }
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config types always serialize")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks constructor preconditions, reporting the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(config_err("horizon", "must be >= 2"));
        }
        if self.record_every == 0 {
            return Err(config_err("record_every", "must be >= 1"));
        }
        if self.seeds.seeds().is_empty() {
            return Err(config_err("seeds", "no seeds"));
        }
        if self.instance.dim == 0 {
            return Err(config_err("instance.dim", "must be >= 1"));
        }
        if !(self.instance.noise_sigma >= 0.0) {
            return Err(config_err("instance.noise_sigma", "must be >= 0"));
        }
        let root_t = (self.horizon as f64).sqrt();
        let check_delta = |delta: f64| {
            if delta > 0.0 && delta < 1.0 {
                Ok(())
            } else {
                Err(config_err("policy.delta", format!("must lie in (0,1), got {delta}")))
            }
        };
        match &self.policy {
            PolicySpec::ParetoBandit { w, delta, .. } | PolicySpec::MultiHint { w, delta, .. } => {
                check_delta(*delta)?;
                if !(*w > 0.0) {
                    return Err(config_err("policy.w", "must be > 0"));
                }
            }
            PolicySpec::Frontier { g, c0, c1, delta, .. } => {
                check_delta(*delta)?;
                if !(*g > 0.0 && *g <= root_t) {
                    return Err(config_err("policy.g", format!("must lie in (0, √T = {root_t}], got {g}")));
                }
                if !(*c1 > 0.0 && c0 > c1) {
                    return Err(config_err("policy.c0", "need c0 > c1 > 0"));
                }
            }
            PolicySpec::Oful { oful } => check_delta(oful.delta)?,
            PolicySpec::Switch { r_hat, .. } => {
                if !(*r_hat >= 0.0) {
                    return Err(config_err("policy.r_hat", "must be >= 0"));
                }
            }
            PolicySpec::PlayHint => {}
        }
        let multi = matches!(self.hint, HintSpec::Multi { .. });
        let wants_multi = matches!(self.policy, PolicySpec::MultiHint { .. } | PolicySpec::Oful { .. });
        if multi && !wants_multi {
            return Err(config_err("hint", "a hint list needs the multi_hint policy"));
        }
        if let HintSpec::Explicit { vector } = &self.hint {
            if vector.len() != self.instance.dim {
                return Err(config_err("hint.vector", format!("expected {} coordinates", self.instance.dim)));
            }
        }
        // dry-run the first replication's construction
        let seed = self.seeds.seeds()[0];
        let streams = super::runner::Streams::new(seed);
        let gen = self
            .instance
            .build::<f64, _>(&mut streams.instance(&self.instance))
            .map_err(|e| config_err("instance", e.to_string()))?;
        let hints = self
            .hint
            .resolve(&gen, &mut streams.hints())
            .map_err(|e| config_err("hint", e.to_string()))?;
        self.policy
            .build(&hints, self.horizon, streams.policy())
            .map_err(|e| config_err("policy", e.to_string()))?;
        Ok(())
    }
}
