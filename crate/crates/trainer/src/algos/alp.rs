//! Learning-progress baseline: the design policy is paid how much the
//! first agent's mean return moved since the previous iteration. The first
//! iteration has no predecessor and pays zero.

use codelab_core::Result;

use crate::state::{IterationStats, TrainerState};
use crate::strategy::{logged_regret, CurriculumStrategy, Objective, Proposal};

pub fn alp_reward(prev_return: f64, cur_return: f64) -> f64 {
    (cur_return - prev_return).abs()
}

pub struct AlpStrategy;

impl CurriculumStrategy for AlpStrategy {
    fn name(&self) -> &'static str {
        "alp"
    }

    fn propose(&self, st: &mut TrainerState) -> Result<Proposal> {
        let (design, rollout) = st.sample_design()?;
        Ok(Proposal { design, rollout: Some(rollout) })
    }

    fn objective(&self, st: &mut TrainerState, stats: &IterationStats) -> Result<Objective> {
        let cur = stats.mean_returns[0];
        let reward = st.prev_return.map(|prev| alp_reward(prev, cur)).unwrap_or(0.0);
        st.prev_return = Some(cur);
        Ok(Objective {
            regret: logged_regret(stats),
            difficulty: 0.0,
            reward: Some(reward),
            legacy_best: None,
        })
    }
}
