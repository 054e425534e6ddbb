//! The curriculum-strategy interface and its by-name registry.
//!
//! Every algorithm answers two questions each iteration: what environment
//! should the population face, and what scalar reward (if any) does the
//! design policy earn for it. Everything else — episode collection, agent
//! updates, metrics — is shared by the driver.

use codelab_core::generator::pop_regret;
use codelab_core::{Error, Result};

use crate::algos;
use crate::config::{Algo, TrainingConfig};
use crate::state::{DomainDesign, DomainRollout, IterationStats, TrainerState};

pub struct Proposal {
    pub design: DomainDesign,
    /// Present when the design came from the policy; consumed by the update.
    pub rollout: Option<DomainRollout>,
}

pub struct Objective {
    /// Logged regret estimate (0 when the algorithm defines none).
    pub regret: f64,
    /// Logged difficulty term (0 when unused).
    pub difficulty: f64,
    /// Scalar reward for the design policy; `None` skips its update.
    pub reward: Option<f64>,
    /// Coefficient for the older additive SKIP-budget loss, already scaled.
    pub legacy_best: Option<f64>,
}

pub trait CurriculumStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether the strategy samples from (and updates) the design policy.
    fn trains_generator(&self) -> bool {
        true
    }

    fn validate(&self, _cfg: &TrainingConfig) -> Result<()> {
        Ok(())
    }

    fn propose(&self, st: &mut TrainerState) -> Result<Proposal>;

    fn objective(&self, st: &mut TrainerState, stats: &IterationStats) -> Result<Objective>;
}

/// Population regret when defined, 0 for single-agent runs: keeps the
/// metrics column meaningful across algorithms.
pub(crate) fn logged_regret(stats: &IterationStats) -> f64 {
    if stats.mean_returns.len() >= 2 {
        pop_regret(&stats.mean_returns).expect("two or more agents")
    } else {
        0.0
    }
}

type Ctor = fn() -> Box<dyn CurriculumStrategy>;

/// Every selectable algorithm, by config/CLI name.
pub const REGISTRY: &[(&str, Ctor)] = &[
    ("code", || Box::new(algos::code::CodeStrategy { regret_only: false })),
    ("popregret_only", || Box::new(algos::code::CodeStrategy { regret_only: true })),
    ("paired", || Box::new(algos::paired::PairedStrategy)),
    ("minimax", || Box::new(algos::minimax::MinimaxStrategy)),
    ("dr", || Box::new(algos::dr::DrStrategy)),
    ("cl", || Box::new(algos::cl::ClStrategy)),
    ("alp", || Box::new(algos::alp::AlpStrategy)),
];

pub fn registered_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|(name, _)| *name).collect()
}

pub fn by_name(name: &str) -> Result<Box<dyn CurriculumStrategy>> {
    REGISTRY
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, ctor)| ctor())
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown strategy {name:?}; registered: {}",
                registered_names().join(", ")
            ))
        })
}

pub fn strategy_for(algo: Algo) -> Box<dyn CurriculumStrategy> {
    by_name(algo.name()).expect("every algorithm is registered")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_algo_is_registered_under_its_own_name() {
        for algo in Algo::ALL {
            let strategy = by_name(algo.name()).unwrap();
            assert_eq!(strategy.name(), algo.name());
        }
        assert_eq!(REGISTRY.len(), Algo::ALL.len());
    }

    #[test]
    fn unknown_name_lists_the_registry() {
        let err = match by_name("sgd") {
            Err(e) => e.to_string(),
            Ok(_) => panic!("sgd is not a strategy"),
        };
        assert!(err.contains("code") && err.contains("alp"), "{err}");
    }

    #[test]
    fn only_procedural_strategies_skip_the_generator() {
        for (name, ctor) in REGISTRY {
            let expected = !matches!(*name, "dr" | "cl");
            assert_eq!(ctor().trains_generator(), expected, "{name}");
        }
    }
}
