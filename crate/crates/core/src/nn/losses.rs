//! Categorical sampling and the actor-critic loss terms.

use crate::nn::tape::{log_softmax_values, Tape, ValueId};
use crate::rng::RandomStream;
use crate::{Error, Result};

/// Sample an index from softmax(logits) by inverse CDF on the seeded stream.
/// Returns (index, log_prob, entropy) as plain values.
pub fn sample_categorical(
    logits: &[f64],
    rng: &mut RandomStream,
) -> Result<(usize, f64, f64)> {
    if logits.is_empty() {
        return Err(Error::Domain("categorical head over zero choices".into()));
    }
    let logp = log_softmax_values(logits);
    let idx = sample_index_from_logp(&logp, rng);
    let entropy: f64 = logp.iter().map(|lp| -lp.exp() * lp).sum();
    Ok((idx, logp[idx], entropy))
}

/// Greedy argmax, lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn sample_index_from_logp(logp: &[f64], rng: &mut RandomStream) -> usize {
    let u = rng.uniform();
    let mut cum = 0.0;
    for (i, lp) in logp.iter().enumerate() {
        cum += lp.exp();
        if u < cum {
            return i;
        }
    }
    logp.len() - 1
}

/// Categorical head evaluated on the tape: log-prob of the sampled index and
/// the distribution's entropy come back as scalar nodes, so they can join a
/// policy-gradient loss.
pub struct CategoricalDraw {
    pub index: usize,
    pub log_prob: ValueId,
    pub entropy: ValueId,
}

pub fn sample_categorical_on_tape(
    tape: &mut Tape,
    logits: ValueId,
    rng: &mut RandomStream,
) -> Result<CategoricalDraw> {
    let logp = tape.log_softmax(logits)?;
    let idx = sample_index_from_logp(&tape.value(logp).data, rng);
    finish_draw(tape, logits, logp, idx)
}

/// Same head, but with the outcome forced. Used when re-scoring a stored
/// decision sequence: the log-probs must come out bit-identical.
pub fn force_categorical_on_tape(
    tape: &mut Tape,
    logits: ValueId,
    index: usize,
) -> Result<CategoricalDraw> {
    let logp = tape.log_softmax(logits)?;
    finish_draw(tape, logits, logp, index)
}

fn finish_draw(
    tape: &mut Tape,
    logits: ValueId,
    logp: ValueId,
    index: usize,
) -> Result<CategoricalDraw> {
    let log_prob = tape.gather(logp, index)?;
    let entropy = tape.entropy_from_logits(logits)?;
    Ok(CategoricalDraw { index, log_prob, entropy })
}

/// Discounted Monte Carlo returns: G_t = sum_i gamma^i r_{t+i}.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + gamma * acc;
        out[t] = acc;
    }
    out
}

/// Plain-value actor-critic loss terms over one trajectory:
///   policy_loss  = -sum_t (G_t - v_t) * log_prob_t   (advantage detached)
///   value_loss   =  sum_t (G_t - v_t)^2
///   entropy_bonus = coeff * sum_t H_t
pub fn a2c_losses(
    log_probs: &[f64],
    values: &[f64],
    returns: &[f64],
    entropies: &[f64],
    entropy_coeff: f64,
) -> Result<(f64, f64, f64)> {
    let n = log_probs.len();
    if values.len() != n || returns.len() != n || entropies.len() != n {
        return Err(Error::Dimension(format!(
            "a2c_losses: lengths {} / {} / {} / {}",
            n,
            values.len(),
            returns.len(),
            entropies.len()
        )));
    }
    let mut policy = 0.0;
    let mut value = 0.0;
    let mut ent = 0.0;
    for t in 0..n {
        let adv = returns[t] - values[t];
        policy -= adv * log_probs[t];
        value += adv * adv;
        ent += entropies[t];
    }
    Ok((policy, value, entropy_coeff * ent))
}

/// Tape variant. `log_probs`, `values`, `entropies` are scalar nodes from the
/// trajectory; returns are plain numbers. Advantages are detached: the policy
/// term sees the critic's value only as a constant.
pub fn a2c_loss_on_tape(
    tape: &mut Tape,
    log_probs: &[ValueId],
    values: &[ValueId],
    returns: &[f64],
    entropies: &[ValueId],
    entropy_coeff: f64,
    value_coeff: f64,
) -> Result<ValueId> {
    let n = log_probs.len();
    if values.len() != n || returns.len() != n || entropies.len() != n {
        return Err(Error::Dimension("a2c_loss_on_tape: trajectory lengths differ".into()));
    }
    let mut total: Option<ValueId> = None;
    for t in 0..n {
        let g = returns[t];
        let v_detached = tape.scalar(values[t]);
        let adv = g - v_detached;

        // policy: -adv * logp
        let p_term = tape.scale(log_probs[t], -adv);
        // value: (g - v)^2 = g^2 - 2 g v + v^2
        let g_node = tape.constant_scalar(g);
        let diff = tape.sub(g_node, values[t])?;
        let v_term_raw = tape.mul(diff, diff)?;
        let v_term = tape.scale(v_term_raw, value_coeff);
        // entropy bonus subtracts
        let e_term = tape.scale(entropies[t], -entropy_coeff);

        let step = tape.add(p_term, v_term)?;
        let step = tape.add(step, e_term)?;
        total = Some(match total {
            None => step,
            Some(acc) => tape.add(acc, step)?,
        });
    }
    match total {
        Some(t) => Ok(t),
        None => Ok(tape.constant_scalar(0.0)),
    }
}
