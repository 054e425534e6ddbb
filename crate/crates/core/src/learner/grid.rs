//! The gridworld policy: a dense trunk over the flattened cell volume and
//! agent features, with separate action and value heads.

use crate::nn::losses::{argmax, sample_index_from_logp};
use crate::nn::{Activation, DenseLayer, DenseStack, ParamSet, Tape, ValueId};
use crate::gridenv::{GridObservation, GridAction, GRID_ACTIONS, GRID_AGENT_FEATURES, GRID_CHANNELS};
use crate::{Error, Result};

use super::web::Pick;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLearnerConfig {
    pub hidden: usize,
    pub grid_size: usize,
}

impl Default for GridLearnerConfig {
    fn default() -> Self {
        Self { hidden: 100, grid_size: crate::gridenv::DEFAULT_GRID_SIZE }
    }
}

impl GridLearnerConfig {
    pub fn input_dim(&self) -> usize {
        self.grid_size * self.grid_size * GRID_CHANNELS + GRID_AGENT_FEATURES
    }
}

pub struct GridStepEval {
    pub action: GridAction,
    pub index: usize,
    pub log_prob: ValueId,
    pub value: ValueId,
    pub entropy: ValueId,
}

pub struct GridLearner {
    pub cfg: GridLearnerConfig,
    trunk: DenseStack,
    policy: DenseLayer,
    value: DenseLayer,
}

impl GridLearner {
    pub fn init(
        cfg: GridLearnerConfig,
        ps: &mut ParamSet,
        rng: &mut crate::rng::RandomStream,
    ) -> Result<Self> {
        if cfg.hidden == 0 || cfg.grid_size < 3 {
            return Err(Error::Config("grid learner needs hidden > 0 and size >= 3".into()));
        }
        let h = cfg.hidden;
        let trunk =
            DenseStack::init(ps, "agent.trunk", cfg.input_dim(), h, h, Activation::Tanh, rng);
        let policy =
            DenseLayer::init(ps, "agent.policy", h, GRID_ACTIONS.len(), Activation::Identity, rng);
        let value = DenseLayer::init(ps, "agent.value", h, 1, Activation::Identity, rng);
        Ok(Self { cfg, trunk, policy, value })
    }

    pub fn policy_forward(
        &self,
        tape: &mut Tape,
        ps: &ParamSet,
        obs: &GridObservation,
    ) -> Result<(ValueId, ValueId, ValueId)> {
        let want = self.cfg.input_dim();
        let got = obs.grid.len() + obs.agent.len();
        if got != want {
            return Err(Error::Contract(format!(
                "observation has {got} features, policy expects {want}"
            )));
        }
        let mut input = obs.grid.clone();
        input.extend_from_slice(&obs.agent);
        let x = tape.constant_vec(input);
        let h = self.trunk.forward(tape, ps, x)?;
        let logits = self.policy.forward(tape, ps, h)?;
        let log_probs = tape.log_softmax(logits)?;
        let entropy = tape.entropy_from_logits(logits)?;
        let v_vec = self.value.forward(tape, ps, h)?;
        let value = tape.gather(v_vec, 0)?;
        Ok((log_probs, value, entropy))
    }

    pub fn act(
        &self,
        tape: &mut Tape,
        ps: &ParamSet,
        obs: &GridObservation,
        pick: Pick,
    ) -> Result<GridStepEval> {
        let (log_probs, value, entropy) = self.policy_forward(tape, ps, obs)?;
        let logp = &tape.value(log_probs).data;
        let index = match pick {
            Pick::Sample(rng) => sample_index_from_logp(logp, rng),
            Pick::Greedy => argmax(logp),
            Pick::Force(i) => {
                if i >= GRID_ACTIONS.len() {
                    return Err(Error::Contract(format!("forced action {i} out of range")));
                }
                i
            }
        };
        let log_prob = tape.gather(log_probs, index)?;
        Ok(GridStepEval { action: GRID_ACTIONS[index], index, log_prob, value, entropy })
    }
}
