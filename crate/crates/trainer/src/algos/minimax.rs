//! The pure adversary baseline: the design policy is paid the negative of
//! the population's mean return, nothing else.

use codelab_core::Result;

use crate::state::{IterationStats, TrainerState};
use crate::strategy::{logged_regret, CurriculumStrategy, Objective, Proposal};

pub struct MinimaxStrategy;

impl CurriculumStrategy for MinimaxStrategy {
    fn name(&self) -> &'static str {
        "minimax"
    }

    fn propose(&self, st: &mut TrainerState) -> Result<Proposal> {
        let (design, rollout) = st.sample_design()?;
        Ok(Proposal { design, rollout: Some(rollout) })
    }

    fn objective(&self, _st: &mut TrainerState, stats: &IterationStats) -> Result<Objective> {
        let mean =
            stats.mean_returns.iter().sum::<f64>() / stats.mean_returns.len() as f64;
        Ok(Objective {
            regret: logged_regret(stats),
            difficulty: 0.0,
            reward: Some(-mean),
            legacy_best: None,
        })
    }
}
