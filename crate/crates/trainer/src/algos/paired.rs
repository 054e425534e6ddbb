//! The fixed-antagonist baseline: agent 0 is the antagonist forever, the
//! rest are protagonists, and the design policy is paid the antagonist's
//! best episode minus the protagonists' mean.

use codelab_core::generator::{difficulty_objective, generator_reward, paired_regret};
use codelab_core::{Error, Result};

use crate::config::TrainingConfig;
use crate::state::{IterationStats, TrainerState};
use crate::strategy::{CurriculumStrategy, Objective, Proposal};

pub const ANTAGONIST: usize = 0;

pub struct PairedStrategy;

impl CurriculumStrategy for PairedStrategy {
    fn name(&self) -> &'static str {
        "paired"
    }

    fn validate(&self, cfg: &TrainingConfig) -> Result<()> {
        if cfg.population < 2 {
            return Err(Error::Config(
                "paired needs an antagonist and at least one protagonist".into(),
            ));
        }
        Ok(())
    }

    fn propose(&self, st: &mut TrainerState) -> Result<Proposal> {
        let (design, rollout) = st.sample_design()?;
        Ok(Proposal { design, rollout: Some(rollout) })
    }

    fn objective(&self, st: &mut TrainerState, stats: &IterationStats) -> Result<Objective> {
        let antagonist = &stats.episode_returns[ANTAGONIST];
        let protagonist: Vec<f64> = stats
            .episode_returns
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != ANTAGONIST)
            .flat_map(|(_, rs)| rs.iter().copied())
            .collect();
        let regret = paired_regret(antagonist, &protagonist)?;
        if st.cfg.paired_difficulty {
            let difficulty =
                difficulty_objective(stats.best_return, stats.n_hat, &st.cfg.objective_config());
            let reward = generator_reward(regret, difficulty, st.cfg.alpha);
            return Ok(Objective { regret, difficulty, reward: Some(reward), legacy_best: None });
        }
        Ok(Objective { regret, difficulty: 0.0, reward: Some(regret), legacy_best: None })
    }
}
