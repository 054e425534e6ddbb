//! Held-out evaluation: success-rate measurement on fixed designs and the
//! task × level suite table.
//!
//! Training samples actions; evaluation decodes greedily. Each measured
//! episode renders its own site from a fixed stream, so instruction values
//! vary across episodes but never across calls.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use codelab_core::gridenv::{build_grid, grid_observation, GridDesign};
use codelab_core::learner::{GridLearner, Pick, WebLearner};
use codelab_core::nn::{ParamSet, Tape};
use codelab_core::rng::RandomStream;
use codelab_core::webenv::{
    optimal_actions, render::render, test_suite, NavAction, RenderedSite, WebEpisode,
    WebsiteDesign,
};
use codelab_core::{Error, Result};

pub enum WebPolicy<'a> {
    Learner { learner: &'a WebLearner, ps: &'a ParamSet },
    /// Oracle: replays the optimal action script.
    Scripted,
    /// Uniform over (element, field ∪ click) at every step.
    Random,
}

pub fn web_success_rate(
    policy: &WebPolicy,
    design: &WebsiteDesign,
    episodes: usize,
    step_penalty: f64,
    base: &RandomStream,
) -> Result<f64> {
    if episodes == 0 {
        return Err(Error::Config("evaluation needs at least one episode".into()));
    }
    let mut wins = 0usize;
    for e in 0..episodes {
        let site =
            Arc::new(render(design, &mut base.child_indexed("render", e as u64))?);
        let won = match policy {
            WebPolicy::Learner { learner, ps } => {
                greedy_web_episode(learner, ps, &site, step_penalty)?
            }
            WebPolicy::Scripted => scripted_episode(&site, step_penalty)?,
            WebPolicy::Random => {
                random_web_episode(&site, step_penalty, &mut base.child_indexed("policy", e as u64))?
            }
        };
        wins += usize::from(won);
    }
    Ok(wins as f64 / episodes as f64)
}

fn greedy_web_episode(
    learner: &WebLearner,
    ps: &ParamSet,
    site: &Arc<RenderedSite>,
    step_penalty: f64,
) -> Result<bool> {
    let mut ep = WebEpisode::new(site.clone(), step_penalty)?;
    loop {
        let mut tape = Tape::new();
        let action = {
            let obs = ep.observe();
            learner.act(&mut tape, ps, &obs, Pick::Greedy)?.action
        };
        let out = ep.step(action)?;
        if out.done {
            return Ok(out.succeeded);
        }
    }
}

fn scripted_episode(site: &Arc<RenderedSite>, step_penalty: f64) -> Result<bool> {
    let mut ep = WebEpisode::new(site.clone(), step_penalty)?;
    for action in optimal_actions(site) {
        let out = ep.step(action)?;
        if out.done {
            return Ok(out.succeeded);
        }
    }
    Ok(ep.succeeded())
}

fn random_web_episode(
    site: &Arc<RenderedSite>,
    step_penalty: f64,
    rng: &mut RandomStream,
) -> Result<bool> {
    let mut ep = WebEpisode::new(site.clone(), step_penalty)?;
    loop {
        let action = {
            let obs = ep.observe();
            let element = obs.actionable[rng.below(obs.actionable.len())].element;
            let f = rng.below(obs.instruction.len() + 1);
            NavAction { element, field: (f < obs.instruction.len()).then_some(f) }
        };
        let out = ep.step(action)?;
        if out.done {
            return Ok(out.succeeded);
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn grid_success_rate(
    learner: &GridLearner,
    ps: &ParamSet,
    design: &GridDesign,
    episodes: usize,
    size: usize,
    horizon: usize,
    step_penalty: f64,
    base: &RandomStream,
) -> Result<f64> {
    if episodes == 0 {
        return Err(Error::Config("evaluation needs at least one episode".into()));
    }
    let mut wins = 0usize;
    for e in 0..episodes {
        let mut world = build_grid(
            design,
            &mut base.child_indexed("world", e as u64),
            size,
            horizon,
            step_penalty,
        )?;
        while !world.is_done() {
            let mut tape = Tape::new();
            let obs = grid_observation(&world);
            let step = learner.act(&mut tape, ps, &obs, Pick::Greedy)?;
            world.step(step.action)?;
        }
        wins += usize::from(world.succeeded());
    }
    Ok(wins as f64 / episodes as f64)
}

/// Success percentages per task and level, in the evaluation table layout:
/// one row per task, one column per level.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessTable {
    /// task → level → success fraction.
    pub cells: BTreeMap<String, BTreeMap<usize, f64>>,
}

impl SuccessTable {
    pub fn render_text(&self) -> String {
        let levels: Vec<usize> = self
            .cells
            .values()
            .flat_map(|row| row.keys().copied())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut out = String::from("task");
        for l in &levels {
            let _ = write!(out, "\tL{l}");
        }
        out.push('\n');
        for (task, row) in &self.cells {
            out.push_str(task);
            for l in &levels {
                match row.get(l) {
                    Some(v) => {
                        let _ = write!(out, "\t{:.1}", v * 100.0);
                    }
                    None => out.push_str("\t-"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.cells).expect("table serializes")
    }
}

/// Run a policy over the whole evaluation suite.
pub fn evaluate_web_suite(
    policy: &WebPolicy,
    episodes: usize,
    step_penalty: f64,
    base: &RandomStream,
) -> Result<SuccessTable> {
    let mut cells: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for (level, tasks) in test_suite() {
        for (task, design) in tasks {
            let stream = base.child(&format!("{task}-l{level}"));
            let rate = web_success_rate(policy, &design, episodes, step_penalty, &stream)?;
            cells.entry(task).or_default().insert(level, rate);
        }
    }
    Ok(SuccessTable { cells })
}
