//! Flat run configuration: one JSON object, unknown keys rejected, every
//! field overridable from the command line.

use codelab_core::generator::ObjectiveConfig;
use codelab_core::webenv::{catalog, lookup, SUITE_LEVELS, SUITE_TASKS};
use codelab_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Code,
    PopregretOnly,
    Paired,
    Minimax,
    Dr,
    Cl,
    Alp,
}

impl Algo {
    pub const ALL: [Algo; 7] = [
        Algo::Code,
        Algo::PopregretOnly,
        Algo::Paired,
        Algo::Minimax,
        Algo::Dr,
        Algo::Cl,
        Algo::Alp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Code => "code",
            Algo::PopregretOnly => "popregret_only",
            Algo::Paired => "paired",
            Algo::Minimax => "minimax",
            Algo::Dr => "dr",
            Algo::Cl => "cl",
            Algo::Alp => "alp",
        }
    }

    /// Algorithms whose generator reward is a population regret estimate.
    pub fn needs_population(self) -> bool {
        matches!(self, Algo::Code | Algo::PopregretOnly | Algo::Paired)
    }
}

impl std::str::FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Web,
    Grid,
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Domain::Web => "web",
            Domain::Grid => "grid",
        })
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "web" => Ok(Domain::Web),
            "grid" => Ok(Domain::Grid),
            _ => Err(Error::Config(format!("unknown domain {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub algo: Algo,
    pub domain: Domain,
    /// Population size n_a.
    pub population: usize,
    /// Episodes per agent per iteration (M).
    pub episodes_per_agent: usize,
    /// Placement slots per design (N).
    pub design_budget: usize,
    /// Page-count ceiling for web designs (K).
    pub max_pages: usize,
    pub gamma: f64,
    /// Difficulty weight in the combined generator reward.
    pub alpha: f64,
    /// Success threshold for growing difficulty.
    pub beta: f64,
    /// Failure threshold for shrinking difficulty.
    pub delta: f64,
    pub step_penalty: f64,
    pub iterations: usize,
    /// Root seed; runs refuse to start without one.
    pub seed: Option<u64>,
    pub generator_lr: f64,
    pub learner_lr: f64,
    pub generator_entropy: f64,
    pub learner_entropy: f64,
    pub value_coeff: f64,
    pub grad_clip: f64,
    pub generator_hidden: usize,
    pub learner_hidden: usize,
    pub learner_embed: usize,
    /// Restricted primitive catalog; empty means the full 40.
    pub catalog: Vec<String>,
    /// Strip potentials and step costs: episodes pay only terminal ±1.
    pub binary_reward_only: bool,
    /// Skip agent updates (diagnostic: environments face frozen policies).
    pub freeze_learners: bool,
    /// Multiply the difficulty term by |best return|.
    pub scale_by_best: bool,
    /// Use the older additive SKIP-mass loss instead of the thresholded
    /// difficulty objective.
    pub legacy_budget: bool,
    /// Add the difficulty term to the paired baseline's reward.
    pub paired_difficulty: bool,
    /// Fixed web step budget; unset means each site's own page-derived one.
    pub web_horizon: Option<usize>,
    pub grid_size: usize,
    pub grid_horizon: usize,
    /// Episode-collection threads; 1 is serial. Results are identical
    /// either way.
    pub workers: usize,
    /// Evaluate the first agent every this many iterations (0 = never).
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub eval_task: String,
    pub eval_level: usize,
    /// Checkpoint every this many iterations (0 = final only).
    pub checkpoint_every: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Code,
            domain: Domain::Web,
            population: 2,
            episodes_per_agent: 2,
            design_budget: 10,
            max_pages: 10,
            gamma: 0.99,
            alpha: 0.8,
            beta: 0.0,
            delta: 0.0,
            step_penalty: 0.01,
            iterations: 1000,
            seed: None,
            generator_lr: 1e-3,
            learner_lr: 1e-3,
            generator_entropy: 0.01,
            learner_entropy: 0.01,
            value_coeff: 0.5,
            grad_clip: 5.0,
            generator_hidden: 100,
            learner_hidden: 100,
            learner_embed: 32,
            catalog: Vec::new(),
            binary_reward_only: false,
            freeze_learners: false,
            scale_by_best: true,
            legacy_budget: false,
            paired_difficulty: false,
            web_horizon: None,
            grid_size: codelab_core::gridenv::DEFAULT_GRID_SIZE,
            grid_horizon: codelab_core::gridenv::DEFAULT_GRID_HORIZON,
            workers: 1,
            eval_every: 0,
            eval_episodes: 20,
            eval_task: "login".into(),
            eval_level: 1,
            checkpoint_every: 0,
        }
    }
}

impl TrainingConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: TrainingConfig =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Apply one `key=value` override, JSON-typed on the value side.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut tree = serde_json::to_value(&*self).expect("config serializes");
        let slot = tree
            .get_mut(key)
            .ok_or_else(|| Error::Config(format!("unknown config key {key:?}")))?;
        *slot = match slot {
            serde_json::Value::String(_) => serde_json::Value::String(value.to_string()),
            _ => serde_json::from_str(value)
                .map_err(|e| Error::Config(format!("value for {key}: {e}")))?,
        };
        let parsed: TrainingConfig = serde_json::from_value(tree)
            .map_err(|e| Error::Config(format!("override {key}={value}: {e}")))?;
        *self = parsed;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if self.delta > self.beta {
            return Err(Error::Config(format!(
                "failure threshold delta {} above success threshold beta {}",
                self.delta, self.beta
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if self.episodes_per_agent == 0 {
            return Err(Error::Config("episodes_per_agent must be at least 1".into()));
        }
        if self.population == 0 {
            return Err(Error::Config("population must be at least 1".into()));
        }
        if self.algo.needs_population() && self.population < 2 {
            return Err(Error::Config(format!(
                "algorithm {} estimates regret across agents and needs population >= 2",
                self.algo
            )));
        }
        if self.design_budget == 0 || self.max_pages == 0 {
            return Err(Error::Config("design_budget and max_pages must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.grid_size < 3 {
            return Err(Error::Config("grid_size must be at least 3".into()));
        }
        if self.generator_hidden == 0 || self.learner_hidden == 0 || self.learner_embed == 0 {
            return Err(Error::Config("network widths must be positive".into()));
        }
        for name in &self.catalog {
            lookup(name)?;
        }
        if self.eval_every > 0 || self.checkpoint_every > 0 {
            // eval settings only have to be valid when something reads them
            self.validate_eval_target()?;
        }
        self.objective_config().validate()
    }

    pub fn validate_eval_target(&self) -> Result<()> {
        if self.domain == Domain::Web {
            if !SUITE_TASKS.contains(&self.eval_task.as_str()) {
                return Err(Error::Config(format!("unknown eval task {:?}", self.eval_task)));
            }
            if !SUITE_LEVELS.contains(&self.eval_level) {
                return Err(Error::Config(format!("eval level {} out of range", self.eval_level)));
            }
        }
        Ok(())
    }

    /// The run's seed; training refuses to start without an explicit one.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::Config("no seed: pass --seed, set CODE_LAB_SEED, or put it in the config".into())
        })
    }

    /// The primitive names the generator may place.
    pub fn effective_catalog(&self) -> Vec<String> {
        if self.catalog.is_empty() {
            catalog().iter().map(|spec| spec.name.to_string()).collect()
        } else {
            self.catalog.clone()
        }
    }

    pub fn objective_config(&self) -> ObjectiveConfig {
        ObjectiveConfig {
            alpha: self.alpha,
            beta: self.beta,
            delta: self.delta,
            n_max: self.design_budget as f64,
            scale_by_best: self.scale_by_best,
            legacy_budget: self.legacy_budget,
        }
    }
}
