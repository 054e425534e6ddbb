//! The environment-designer policy.
//!
//! A noise vector seeds an autoregressive rollout: one categorical head picks
//! the page count k, then a recurrent core emits one placement per budget
//! slot — a primitive (or SKIP) and, for the web domain, a page in [0, k).
//! Every decision's log-prob lands on the same autodiff tape, so one
//! policy-gradient step can credit a scalar reward to the whole design.
//!
//! Sampling and re-scoring share one code path: re-scoring replays stored
//! decisions through identical tape ops, which makes the recomputed
//! log-probs bit-equal to the sampled ones.

use crate::gridenv::{GridDesign, Subtask, ALL_SUBTASKS};
use crate::nn::losses::sample_index_from_logp;
use crate::nn::{DenseStack, Optimizer, ParamSet, RecurrentCell, Tape, ValueId};
use crate::rng::RandomStream;
use crate::webenv::{catalog, WebsiteDesign};
use crate::{Error, Result};
use std::collections::BTreeSet;

/// Parameter total of the original implementation this architecture follows.
/// Our reconstruction lands 101 higher: the page-count head distinguishes
/// all k ∈ {0..K}, which is one output row (100 weights + 1 bias) more than
/// a K-way head.
pub const REPORTED_WEB_GENERATOR_PARAMS: usize = 152_461;

#[derive(Debug, Clone, PartialEq)]
pub struct WebGeneratorConfig {
    /// Width of the noise vector, every hidden layer, and the core.
    pub hidden: usize,
    /// Largest page count K; the count head ranges over {0..K}.
    pub max_pages: usize,
    /// Placement slots per design (N).
    pub budget: usize,
    /// Primitive names the placement head ranges over, in head order.
    /// SKIP is appended implicitly as the final choice.
    pub catalog: Vec<String>,
}

impl Default for WebGeneratorConfig {
    fn default() -> Self {
        Self {
            hidden: 100,
            max_pages: 10,
            budget: 10,
            catalog: catalog::catalog().iter().map(|p| p.name.to_string()).collect(),
        }
    }
}

impl WebGeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.max_pages == 0 || self.budget == 0 {
            return Err(Error::Config("generator dimensions must be positive".into()));
        }
        if self.catalog.is_empty() {
            return Err(Error::Config("generator catalog is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for name in &self.catalog {
            catalog::lookup(name)?;
            if !seen.insert(name.as_str()) {
                return Err(Error::Config(format!("duplicate catalog entry {name}")));
            }
        }
        Ok(())
    }

    /// Index of the SKIP choice in the placement head.
    pub fn skip_index(&self) -> usize {
        self.catalog.len()
    }
}

/// One placement decision: a head choice plus the page it landed on.
/// `page` is `None` exactly when the choice is SKIP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepDecision {
    pub choice: usize,
    pub page: Option<usize>,
}

/// The stored outcome of a rollout, sufficient to replay it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct WebDecisions {
    pub noise: Vec<f64>,
    pub k: usize,
    pub steps: Vec<StepDecision>,
}

/// Tape-side residue of a rollout: every chosen decision's log-prob, the
/// SKIP log-prob at each placement slot, and each head's entropy.
pub struct RolloutTrace {
    pub tape: Tape,
    pub decision_log_probs: Vec<ValueId>,
    pub skip_log_probs: Vec<ValueId>,
    pub entropies: Vec<ValueId>,
}

impl RolloutTrace {
    /// N̂ = −Σ_slots log π(SKIP): how much probability mass the policy
    /// holds away from SKIP, the difficulty currency.
    pub fn n_hat(&self) -> f64 {
        -self.skip_log_probs.iter().map(|id| self.tape.scalar(*id)).sum::<f64>()
    }

    pub fn skip_log_prob_sum(&self) -> f64 {
        self.skip_log_probs.iter().map(|id| self.tape.scalar(*id)).sum()
    }

    pub fn decision_log_prob_values(&self) -> Vec<f64> {
        self.decision_log_probs.iter().map(|id| self.tape.scalar(*id)).collect()
    }
}

pub struct WebRollout {
    pub trace: RolloutTrace,
    pub noise: Vec<f64>,
    pub k: usize,
    pub steps: Vec<StepDecision>,
    pub design: WebsiteDesign,
}

impl WebRollout {
    pub fn decisions(&self) -> WebDecisions {
        WebDecisions { noise: self.noise.clone(), k: self.k, steps: self.steps.clone() }
    }
}

pub struct WebGenerator {
    pub cfg: WebGeneratorConfig,
    encode: DenseStack,
    page_count: DenseStack,
    core: RecurrentCell,
    primitive: DenseStack,
    page: DenseStack,
    carry: DenseStack,
}

impl WebGenerator {
    pub fn init(cfg: WebGeneratorConfig, ps: &mut ParamSet, rng: &mut RandomStream) -> Result<Self> {
        cfg.validate()?;
        let h = cfg.hidden;
        let choices = cfg.catalog.len() + 1;
        let embed_in = choices + cfg.max_pages + 1;
        use crate::nn::Activation::Identity;
        let encode = DenseStack::init(ps, "gen.encode", h, h, h, Identity, rng);
        let page_count = DenseStack::init(ps, "gen.page_count", h, h, cfg.max_pages + 1, Identity, rng);
        let core = RecurrentCell::init(ps, "gen.core", h, h, rng);
        let primitive = DenseStack::init(ps, "gen.primitive", h, h, choices, Identity, rng);
        let page = DenseStack::init(ps, "gen.page", h, h, cfg.max_pages, Identity, rng);
        let carry = DenseStack::init(ps, "gen.carry", embed_in, h, h, Identity, rng);
        Ok(Self { cfg, encode, page_count, core, primitive, page, carry })
    }

    pub fn sample(&self, ps: &ParamSet, rng: &mut RandomStream) -> Result<WebRollout> {
        let noise: Vec<f64> = (0..self.cfg.hidden).map(|_| rng.normal()).collect();
        self.roll(ps, noise, None, Some(rng))
    }

    /// Replay stored decisions; log-probs come back bit-equal to sampling.
    pub fn rescore(&self, ps: &ParamSet, decisions: &WebDecisions) -> Result<WebRollout> {
        self.validate_decisions(decisions)?;
        self.roll(ps, decisions.noise.clone(), Some(decisions), None)
    }

    fn validate_decisions(&self, d: &WebDecisions) -> Result<()> {
        if d.noise.len() != self.cfg.hidden {
            return Err(Error::Contract(format!(
                "noise length {} vs hidden {}",
                d.noise.len(),
                self.cfg.hidden
            )));
        }
        if d.k > self.cfg.max_pages {
            return Err(Error::Contract(format!("k={} above max pages {}", d.k, self.cfg.max_pages)));
        }
        if d.steps.len() != self.cfg.budget {
            return Err(Error::Contract(format!(
                "{} placement records vs budget {}",
                d.steps.len(),
                self.cfg.budget
            )));
        }
        let skip = self.cfg.skip_index();
        for (i, s) in d.steps.iter().enumerate() {
            if s.choice > skip {
                return Err(Error::Contract(format!("slot {i}: choice {} out of head", s.choice)));
            }
            if s.choice == skip && s.page.is_some() {
                return Err(Error::Contract(format!("slot {i}: SKIP carries a page")));
            }
            if s.choice != skip {
                if d.k == 0 {
                    return Err(Error::Contract(format!("slot {i}: placement in a 0-page design")));
                }
                match s.page {
                    None => {
                        return Err(Error::Contract(format!("slot {i}: placement without a page")))
                    }
                    Some(p) if p >= d.k => {
                        return Err(Error::Contract(format!("slot {i}: page {p} not below k={}", d.k)))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    fn roll(
        &self,
        ps: &ParamSet,
        noise: Vec<f64>,
        forced: Option<&WebDecisions>,
        mut rng: Option<&mut RandomStream>,
    ) -> Result<WebRollout> {
        let mut tape = Tape::new();
        let mut decision_log_probs = Vec::new();
        let mut skip_log_probs = Vec::new();
        let mut entropies = Vec::new();

        let o = tape.constant_vec(noise.clone());
        let h0 = self.encode.forward(&mut tape, ps, o)?;

        let k_logits = self.page_count.forward(&mut tape, ps, h0)?;
        let k_logp = tape.log_softmax(k_logits)?;
        let k = choose(&tape.value(k_logp).data, forced.map(|d| d.k), &mut rng)?;
        decision_log_probs.push(tape.gather(k_logp, k)?);
        entropies.push(tape.entropy_from_logits(k_logits)?);

        let skip = self.cfg.skip_index();
        let choices = self.cfg.catalog.len() + 1;
        let mut state = self.core.zero_state(&mut tape);
        let mut x = h0;
        let mut steps = Vec::with_capacity(self.cfg.budget);
        let mut design = WebsiteDesign::new(k);

        for slot in 0..self.cfg.budget {
            state = self.core.step(&mut tape, ps, x, state)?;

            let prim_logits = self.primitive.forward(&mut tape, ps, state.h)?;
            let prim_logp = tape.log_softmax(prim_logits)?;
            // A 0-page design has nowhere to place anything: the slot is
            // forced to SKIP without consuming randomness, so replays agree.
            let choice = if k == 0 {
                skip
            } else {
                choose(
                    &tape.value(prim_logp).data,
                    forced.map(|d| d.steps[slot].choice),
                    &mut rng,
                )?
            };
            decision_log_probs.push(tape.gather(prim_logp, choice)?);
            skip_log_probs.push(tape.gather(prim_logp, skip)?);
            entropies.push(tape.entropy_from_logits(prim_logits)?);

            let page = if choice == skip {
                None
            } else {
                let page_logits_full = self.page.forward(&mut tape, ps, state.h)?;
                let page_logits = tape.slice(page_logits_full, 0, k)?;
                let page_logp = tape.log_softmax(page_logits)?;
                let p = choose(
                    &tape.value(page_logp).data,
                    forced.map(|d| d.steps[slot].page.unwrap_or(usize::MAX)),
                    &mut rng,
                )?;
                decision_log_probs.push(tape.gather(page_logp, p)?);
                entropies.push(tape.entropy_from_logits(page_logits)?);
                Some(p)
            };

            if let Some(p) = page {
                design = design.put(&self.cfg.catalog[choice], p);
            } else {
                design = design.skip();
            }
            steps.push(StepDecision { choice, page });

            let mut embed = vec![0.0; choices + self.cfg.max_pages + 1];
            embed[choice] = 1.0;
            if let Some(p) = page {
                embed[choices + p] = 1.0;
            }
            embed[choices + self.cfg.max_pages] = k as f64 / self.cfg.max_pages as f64;
            let e = tape.constant_vec(embed);
            x = self.carry.forward(&mut tape, ps, e)?;
        }

        Ok(WebRollout {
            trace: RolloutTrace { tape, decision_log_probs, skip_log_probs, entropies },
            noise,
            k,
            steps,
            design,
        })
    }

    /// One-line JSON of a rollout for debugging.
    pub fn dump_rollout(&self, rollout: &WebRollout) -> String {
        let skip = self.cfg.skip_index();
        let steps: Vec<serde_json::Value> = rollout
            .steps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "choice": if s.choice == skip { "SKIP" } else { self.cfg.catalog[s.choice].as_str() },
                    "page": s.page,
                })
            })
            .collect();
        serde_json::json!({
            "k": rollout.k,
            "steps": steps,
            "decision_log_probs": rollout.trace.decision_log_prob_values(),
            "n_hat": rollout.trace.n_hat(),
        })
        .to_string()
    }
}

fn choose(
    logp: &[f64],
    forced: Option<usize>,
    rng: &mut Option<&mut RandomStream>,
) -> Result<usize> {
    match forced {
        Some(i) => {
            if i >= logp.len() {
                return Err(Error::Contract(format!(
                    "forced decision {i} outside a {}-way head",
                    logp.len()
                )));
            }
            Ok(i)
        }
        None => match rng.as_deref_mut() {
            Some(r) => Ok(sample_index_from_logp(logp, r)),
            None => Err(Error::Contract("sampling a decision without an rng".into())),
        },
    }
}

/// Assemble the policy-gradient loss on the rollout's own tape:
///   −reward · Σ log π(decision) − entropy_coeff · Σ H
/// plus, when `legacy_best_return` is set, the budget term
///   R_best · Σ log π(SKIP).
pub fn generator_loss(
    trace: &mut RolloutTrace,
    reward: f64,
    entropy_coeff: f64,
    legacy_best_return: Option<f64>,
) -> Result<ValueId> {
    let tape = &mut trace.tape;
    let sum_lp = tape.sum_scalars(&trace.decision_log_probs)?;
    let mut loss = tape.scale(sum_lp, -reward);
    let sum_ent = tape.sum_scalars(&trace.entropies)?;
    let ent_term = tape.scale(sum_ent, -entropy_coeff);
    loss = tape.add(loss, ent_term)?;
    if let Some(r_best) = legacy_best_return {
        let sum_skip = tape.sum_scalars(&trace.skip_log_probs)?;
        let budget_term = tape.scale(sum_skip, r_best);
        loss = tape.add(loss, budget_term)?;
    }
    Ok(loss)
}

/// One policy-gradient step on `generator_loss`. Returns the loss value.
/// A non-finite loss is a training fault.
pub fn update_generator(
    ps: &mut ParamSet,
    mut trace: RolloutTrace,
    reward: f64,
    entropy_coeff: f64,
    legacy_best_return: Option<f64>,
    opt: &mut Optimizer,
) -> Result<f64> {
    let loss = generator_loss(&mut trace, reward, entropy_coeff, legacy_best_return)?;
    let value = trace.tape.scalar(loss);
    if !value.is_finite() {
        return Err(Error::Numeric(format!("generator loss is not finite: {value}")));
    }
    let grads = trace.tape.backward(loss)?;
    opt.apply(ps, &grads)?;
    Ok(value)
}

// ── Grid domain ─────────────────────────────────────────────────────────
//
// The grid designer drops both page heads: a design is a set of subtasks, so
// each slot picks one of the five subtasks or SKIP and the chosen set is
// closed under the subtask workflow's dependencies.

#[derive(Debug, Clone, PartialEq)]
pub struct GridGeneratorConfig {
    pub hidden: usize,
    /// Placement slots; one per subtask by default.
    pub budget: usize,
}

impl Default for GridGeneratorConfig {
    fn default() -> Self {
        Self { hidden: 100, budget: ALL_SUBTASKS.len() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridDecisions {
    pub noise: Vec<f64>,
    pub steps: Vec<usize>,
}

pub struct GridRollout {
    pub trace: RolloutTrace,
    pub noise: Vec<f64>,
    pub steps: Vec<usize>,
    pub design: GridDesign,
}

impl GridRollout {
    pub fn decisions(&self) -> GridDecisions {
        GridDecisions { noise: self.noise.clone(), steps: self.steps.clone() }
    }
}

pub struct GridGenerator {
    pub cfg: GridGeneratorConfig,
    encode: DenseStack,
    core: RecurrentCell,
    primitive: DenseStack,
    carry: DenseStack,
}

impl GridGenerator {
    pub const SKIP: usize = ALL_SUBTASKS.len();

    pub fn init(cfg: GridGeneratorConfig, ps: &mut ParamSet, rng: &mut RandomStream) -> Result<Self> {
        if cfg.hidden == 0 || cfg.budget == 0 {
            return Err(Error::Config("generator dimensions must be positive".into()));
        }
        let h = cfg.hidden;
        let choices = ALL_SUBTASKS.len() + 1;
        use crate::nn::Activation::Identity;
        let encode = DenseStack::init(ps, "gen.encode", h, h, h, Identity, rng);
        let core = RecurrentCell::init(ps, "gen.core", h, h, rng);
        let primitive = DenseStack::init(ps, "gen.primitive", h, h, choices, Identity, rng);
        let carry = DenseStack::init(ps, "gen.carry", choices, h, h, Identity, rng);
        Ok(Self { cfg, encode, core, primitive, carry })
    }

    pub fn sample(&self, ps: &ParamSet, rng: &mut RandomStream) -> Result<GridRollout> {
        let noise: Vec<f64> = (0..self.cfg.hidden).map(|_| rng.normal()).collect();
        self.roll(ps, noise, None, Some(rng))
    }

    pub fn rescore(&self, ps: &ParamSet, decisions: &GridDecisions) -> Result<GridRollout> {
        if decisions.noise.len() != self.cfg.hidden {
            return Err(Error::Contract(format!(
                "noise length {} vs hidden {}",
                decisions.noise.len(),
                self.cfg.hidden
            )));
        }
        if decisions.steps.len() != self.cfg.budget {
            return Err(Error::Contract(format!(
                "{} records vs budget {}",
                decisions.steps.len(),
                self.cfg.budget
            )));
        }
        self.roll(ps, decisions.noise.clone(), Some(decisions), None)
    }

    fn roll(
        &self,
        ps: &ParamSet,
        noise: Vec<f64>,
        forced: Option<&GridDecisions>,
        mut rng: Option<&mut RandomStream>,
    ) -> Result<GridRollout> {
        let mut tape = Tape::new();
        let mut decision_log_probs = Vec::new();
        let mut skip_log_probs = Vec::new();
        let mut entropies = Vec::new();

        let o = tape.constant_vec(noise.clone());
        let h0 = self.encode.forward(&mut tape, ps, o)?;
        let mut state = self.core.zero_state(&mut tape);
        let mut x = h0;
        let choices = ALL_SUBTASKS.len() + 1;
        let mut steps = Vec::with_capacity(self.cfg.budget);
        let mut selected: Vec<Subtask> = Vec::new();

        for slot in 0..self.cfg.budget {
            state = self.core.step(&mut tape, ps, x, state)?;
            let logits = self.primitive.forward(&mut tape, ps, state.h)?;
            let logp = tape.log_softmax(logits)?;
            let choice = choose(
                &tape.value(logp).data,
                forced.map(|d| d.steps[slot]),
                &mut rng,
            )?;
            decision_log_probs.push(tape.gather(logp, choice)?);
            skip_log_probs.push(tape.gather(logp, Self::SKIP)?);
            entropies.push(tape.entropy_from_logits(logits)?);
            if choice != Self::SKIP {
                selected.push(ALL_SUBTASKS[choice]);
            }
            steps.push(choice);

            let mut embed = vec![0.0; choices];
            embed[choice] = 1.0;
            let e = tape.constant_vec(embed);
            x = self.carry.forward(&mut tape, ps, e)?;
        }

        let design = GridDesign::closed(selected);
        Ok(GridRollout {
            trace: RolloutTrace { tape, decision_log_probs, skip_log_probs, entropies },
            noise,
            steps,
            design,
        })
    }
}
