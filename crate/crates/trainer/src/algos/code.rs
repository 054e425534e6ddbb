//! The compositional design strategy: population regret blended with the
//! thresholded difficulty budget. With `regret_only` the difficulty weight
//! is dropped entirely (the pure population-regret ablation).

use codelab_core::generator::{difficulty_objective, generator_reward, pop_regret};
use codelab_core::Result;

use crate::state::{IterationStats, TrainerState};
use crate::strategy::{CurriculumStrategy, Objective, Proposal};

pub struct CodeStrategy {
    pub regret_only: bool,
}

impl CurriculumStrategy for CodeStrategy {
    fn name(&self) -> &'static str {
        if self.regret_only {
            "popregret_only"
        } else {
            "code"
        }
    }

    fn propose(&self, st: &mut TrainerState) -> Result<Proposal> {
        let (design, rollout) = st.sample_design()?;
        Ok(Proposal { design, rollout: Some(rollout) })
    }

    fn objective(&self, st: &mut TrainerState, stats: &IterationStats) -> Result<Objective> {
        let regret = pop_regret(&stats.mean_returns)?;
        if self.regret_only {
            return Ok(Objective { regret, difficulty: 0.0, reward: Some(regret), legacy_best: None });
        }
        if st.cfg.legacy_budget {
            // Older additive form: the α-weighted best return multiplies the
            // SKIP log-prob sum inside the loss; the reward keeps only the
            // regret share.
            return Ok(Objective {
                regret,
                difficulty: 0.0,
                reward: Some(generator_reward(regret, 0.0, st.cfg.alpha)),
                legacy_best: Some(st.cfg.alpha * stats.best_return),
            });
        }
        let difficulty =
            difficulty_objective(stats.best_return, stats.n_hat, &st.cfg.objective_config());
        let reward = generator_reward(regret, difficulty, st.cfg.alpha);
        Ok(Objective { regret, difficulty, reward: Some(reward), legacy_best: None })
    }
}
