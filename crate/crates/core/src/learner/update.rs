//! The actor-critic update shared by both navigation policies.

use crate::nn::losses::{a2c_loss_on_tape, discounted_returns};
use crate::nn::{Optimizer, ParamSet, Tape, Tensor, ValueId};
use crate::{Error, Result};

/// Everything one episode leaves behind: the tape its policy steps were
/// recorded on, the per-step scalar nodes, and the realized rewards.
pub struct EpisodeTrace {
    pub tape: Tape,
    pub log_probs: Vec<ValueId>,
    pub values: Vec<ValueId>,
    pub entropies: Vec<ValueId>,
    pub rewards: Vec<f64>,
}

/// One optimizer step on the mean actor-critic loss over a batch of
/// episodes. Gradients are accumulated across the episodes' tapes, so a
/// multi-episode batch is a single update. Returns the batch loss.
pub fn update_learner(
    ps: &mut ParamSet,
    episodes: Vec<EpisodeTrace>,
    gamma: f64,
    entropy_coeff: f64,
    value_coeff: f64,
    opt: &mut Optimizer,
) -> Result<f64> {
    if episodes.is_empty() {
        return Err(Error::Contract("learner update over zero episodes".into()));
    }
    let weight = 1.0 / episodes.len() as f64;
    let mut total: Vec<Option<Tensor>> = (0..ps.len()).map(|_| None).collect();
    let mut loss_total = 0.0;
    let mut any_steps = false;
    for ep in episodes {
        // An episode that ended before its first decision (the task was
        // already solved at reset) contributes nothing.
        if ep.log_probs.is_empty() {
            continue;
        }
        any_steps = true;
        let mut tape = ep.tape;
        let returns = discounted_returns(&ep.rewards, gamma);
        let root = a2c_loss_on_tape(
            &mut tape,
            &ep.log_probs,
            &ep.values,
            &returns,
            &ep.entropies,
            entropy_coeff,
            value_coeff,
        )?;
        let scaled = tape.scale(root, weight);
        let value = tape.scalar(scaled);
        if !value.is_finite() {
            return Err(Error::Numeric(format!("learner loss is not finite: {value}")));
        }
        loss_total += value;
        for (slot, grad) in total.iter_mut().zip(tape.backward(scaled)?) {
            match (slot.as_mut(), grad) {
                (Some(acc), Some(g)) => {
                    for (a, b) in acc.data.iter_mut().zip(g.data.iter()) {
                        *a += b;
                    }
                }
                (None, Some(g)) => *slot = Some(g),
                _ => {}
            }
        }
    }
    if !any_steps {
        return Ok(0.0);
    }
    opt.apply(ps, &total)?;
    Ok(loss_total)
}
