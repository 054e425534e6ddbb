//! Mutable training state: the design policy, the agent population, and the
//! episode-collection machinery shared by every curriculum strategy.
//!
//! Random streams are split by label from one root, never shared: the design
//! sample, the render, and every (agent, episode) pair get their own
//! pre-derived stream. Because derivation ignores consumption order, episode
//! collection parallelized across agents is bit-identical to the serial run.

use std::sync::Arc;

use codelab_core::generator::{
    update_generator, GridGenerator, GridGeneratorConfig, GridRollout, WebGenerator,
    WebGeneratorConfig, WebRollout,
};
use codelab_core::gridenv::{build_grid, grid_observation, GridDesign};
use codelab_core::learner::{
    update_learner, EpisodeTrace, GridLearner, GridLearnerConfig, Pick, WebLearner,
    WebLearnerConfig,
};
use codelab_core::nn::{OptimKind, Optimizer, ParamSet, Tape};
use codelab_core::rng::RandomStream;
use codelab_core::webenv::{render::render, RenderedSite, WebEpisode, WebsiteDesign};
use codelab_core::{Error, Result};

use crate::config::{Domain, TrainingConfig};

pub enum GeneratorHandle {
    Web(WebGenerator),
    Grid(GridGenerator),
}

pub struct GeneratorPack {
    pub handle: GeneratorHandle,
    pub opt: Optimizer,
}

pub enum LearnerHandle {
    Web(WebLearner),
    Grid(GridLearner),
}

#[derive(Debug, Clone)]
pub enum DomainDesign {
    Web(WebsiteDesign),
    Grid(GridDesign),
}

impl DomainDesign {
    /// Placements that consume budget (for grid: chosen subtasks).
    pub fn non_skip(&self) -> usize {
        match self {
            DomainDesign::Web(d) => d.non_skip_count(),
            DomainDesign::Grid(d) => d.subtasks.len(),
        }
    }

    pub fn active_count(&self) -> usize {
        match self {
            DomainDesign::Web(d) => d.active_count(),
            DomainDesign::Grid(d) => d.subtasks.len(),
        }
    }

    pub fn passive_count(&self) -> usize {
        match self {
            DomainDesign::Web(d) => d.passive_count(),
            DomainDesign::Grid(_) => 0,
        }
    }
}

pub enum DomainRollout {
    Web(WebRollout),
    Grid(GridRollout),
}

impl DomainRollout {
    pub fn n_hat(&self) -> f64 {
        match self {
            DomainRollout::Web(r) => r.trace.n_hat(),
            DomainRollout::Grid(r) => r.trace.n_hat(),
        }
    }
}

pub struct Agent {
    pub ps: ParamSet,
    pub learner: LearnerHandle,
    pub opt: Optimizer,
}

impl Agent {
    fn init(cfg: &TrainingConfig, mut rng: RandomStream) -> Result<Self> {
        let mut ps = ParamSet::new();
        let learner = match cfg.domain {
            Domain::Web => LearnerHandle::Web(WebLearner::init(
                WebLearnerConfig { hidden: cfg.learner_hidden, embed_dim: cfg.learner_embed },
                &mut ps,
                &mut rng,
            )?),
            Domain::Grid => LearnerHandle::Grid(GridLearner::init(
                GridLearnerConfig { hidden: cfg.learner_hidden, grid_size: cfg.grid_size },
                &mut ps,
                &mut rng,
            )?),
        };
        let opt = Optimizer::new(OptimKind::adam(), cfg.learner_lr, Some(cfg.grad_clip), &ps);
        Ok(Self { ps, learner, opt })
    }
}

/// Everything strategies read after the population has trained on a design.
pub struct IterationStats {
    /// Raw episode returns, `[agent][episode]`.
    pub episode_returns: Vec<Vec<f64>>,
    /// Per-agent mean over the iteration's episodes.
    pub mean_returns: Vec<f64>,
    /// Best mean; ties go to the lowest agent index.
    pub best_agent: usize,
    pub best_return: f64,
    /// SKIP mass of the design rollout; 0 for procedural designs.
    pub n_hat: f64,
}

pub struct TrainerState {
    pub cfg: TrainingConfig,
    pub root: RandomStream,
    pub iter: usize,
    pub gen_ps: ParamSet,
    pub generator: Option<GeneratorPack>,
    pub agents: Vec<Agent>,
    /// Previous iteration's first-agent mean return (learning-progress
    /// memory).
    pub prev_return: Option<f64>,
}

impl TrainerState {
    pub fn new(cfg: TrainingConfig, needs_generator: bool) -> Result<Self> {
        cfg.validate()?;
        let seed = cfg.require_seed()?;
        let root = RandomStream::from_seed(seed);

        let mut gen_ps = ParamSet::new();
        let generator = if needs_generator {
            let mut init = root.child("generator-init");
            let handle = match cfg.domain {
                Domain::Web => GeneratorHandle::Web(WebGenerator::init(
                    WebGeneratorConfig {
                        hidden: cfg.generator_hidden,
                        max_pages: cfg.max_pages,
                        budget: cfg.design_budget,
                        catalog: cfg.effective_catalog(),
                    },
                    &mut gen_ps,
                    &mut init,
                )?),
                Domain::Grid => GeneratorHandle::Grid(GridGenerator::init(
                    GridGeneratorConfig {
                        hidden: cfg.generator_hidden,
                        budget: cfg.design_budget,
                    },
                    &mut gen_ps,
                    &mut init,
                )?),
            };
            let opt =
                Optimizer::new(OptimKind::adam(), cfg.generator_lr, Some(cfg.grad_clip), &gen_ps);
            Some(GeneratorPack { handle, opt })
        } else {
            None
        };

        let agents = (0..cfg.population)
            .map(|i| Agent::init(&cfg, root.child_indexed("agent-init", i as u64)))
            .collect::<Result<Vec<_>>>()?;

        Ok(Self { cfg, root, iter: 0, gen_ps, generator, agents, prev_return: None })
    }

    /// This iteration's label-space root.
    pub fn iter_stream(&self) -> RandomStream {
        self.root.child_indexed("iter", self.iter as u64)
    }

    /// Sample a design from the policy, keeping the rollout for the update.
    pub fn sample_design(&mut self) -> Result<(DomainDesign, DomainRollout)> {
        let mut stream = self.iter_stream().child("design");
        let pack = self
            .generator
            .as_ref()
            .ok_or_else(|| Error::Contract("strategy has no design policy to sample".into()))?;
        match &pack.handle {
            GeneratorHandle::Web(g) => {
                let rollout = g.sample(&self.gen_ps, &mut stream)?;
                Ok((DomainDesign::Web(rollout.design.clone()), DomainRollout::Web(rollout)))
            }
            GeneratorHandle::Grid(g) => {
                let rollout = g.sample(&self.gen_ps, &mut stream)?;
                Ok((DomainDesign::Grid(rollout.design.clone()), DomainRollout::Grid(rollout)))
            }
        }
    }

    /// One policy-gradient step on the design policy.
    pub fn apply_generator_update(
        &mut self,
        rollout: DomainRollout,
        reward: f64,
        legacy_best: Option<f64>,
    ) -> Result<f64> {
        let pack = self
            .generator
            .as_mut()
            .ok_or_else(|| Error::Contract("no design policy to update".into()))?;
        let trace = match rollout {
            DomainRollout::Web(r) => r.trace,
            DomainRollout::Grid(r) => r.trace,
        };
        update_generator(
            &mut self.gen_ps,
            trace,
            reward,
            self.cfg.generator_entropy,
            legacy_best,
            &mut pack.opt,
        )
    }

    /// Each agent collects its episodes on the design (optionally in
    /// parallel), then receives its actor-critic update in agent order.
    pub fn collect_and_update(&mut self, design: &DomainDesign, n_hat: f64) -> Result<IterationStats> {
        let iter_stream = self.iter_stream();
        let site = match design {
            DomainDesign::Web(d) => {
                Some(Arc::new(render(d, &mut iter_stream.child("render"))?))
            }
            DomainDesign::Grid(_) => None,
        };

        let mut collected = self.collect_episodes(design, site.as_ref(), &iter_stream)?;

        let mut episode_returns = Vec::with_capacity(self.agents.len());
        for (i, (traces, returns)) in collected.drain(..).enumerate() {
            if !self.cfg.freeze_learners {
                let agent = &mut self.agents[i];
                update_learner(
                    &mut agent.ps,
                    traces,
                    self.cfg.gamma,
                    self.cfg.learner_entropy,
                    self.cfg.value_coeff,
                    &mut agent.opt,
                )?;
            }
            episode_returns.push(returns);
        }

        let mean_returns: Vec<f64> = episode_returns
            .iter()
            .map(|rs| rs.iter().sum::<f64>() / rs.len() as f64)
            .collect();
        let (best_agent, best_return) = mean_returns
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });

        Ok(IterationStats { episode_returns, mean_returns, best_agent, best_return, n_hat })
    }

    fn collect_episodes(
        &self,
        design: &DomainDesign,
        site: Option<&Arc<RenderedSite>>,
        iter_stream: &RandomStream,
    ) -> Result<Vec<(Vec<EpisodeTrace>, Vec<f64>)>> {
        let n = self.agents.len();
        let one = |i: usize| -> Result<(Vec<EpisodeTrace>, Vec<f64>)> {
            let agent = &self.agents[i];
            let agent_stream = iter_stream.child_indexed("agent", i as u64);
            let mut traces = Vec::with_capacity(self.cfg.episodes_per_agent);
            let mut returns = Vec::with_capacity(self.cfg.episodes_per_agent);
            for m in 0..self.cfg.episodes_per_agent {
                let mut ep_stream = agent_stream.child_indexed("ep", m as u64);
                let (trace, ret) = match (&agent.learner, design) {
                    (LearnerHandle::Web(l), DomainDesign::Web(_)) => self.run_web_episode(
                        l,
                        &agent.ps,
                        site.expect("web designs are rendered"),
                        &mut ep_stream,
                    )?,
                    (LearnerHandle::Grid(l), DomainDesign::Grid(d)) => {
                        self.run_grid_episode(l, &agent.ps, d, &mut ep_stream)?
                    }
                    _ => {
                        return Err(Error::Contract(
                            "agent and design belong to different domains".into(),
                        ))
                    }
                };
                traces.push(trace);
                returns.push(ret);
            }
            Ok((traces, returns))
        };

        if self.cfg.workers <= 1 || n <= 1 {
            return (0..n).map(one).collect();
        }

        let workers = self.cfg.workers.min(n);
        let mut slots: Vec<Option<Result<(Vec<EpisodeTrace>, Vec<f64>)>>> =
            (0..n).map(|_| None).collect();
        std::thread::scope(|scope| {
            let mut handles = Vec::with_capacity(workers);
            for w in 0..workers {
                let one = &one;
                handles.push(scope.spawn(move || {
                    (w..n).step_by(workers).map(|i| (i, one(i))).collect::<Vec<_>>()
                }));
            }
            for handle in handles {
                for (i, res) in handle.join().expect("collector thread panicked") {
                    slots[i] = Some(res);
                }
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("every agent index was assigned to a worker"))
            .collect()
    }

    fn run_web_episode(
        &self,
        learner: &WebLearner,
        ps: &ParamSet,
        site: &Arc<RenderedSite>,
        stream: &mut RandomStream,
    ) -> Result<(EpisodeTrace, f64)> {
        let mut ep = match self.cfg.web_horizon {
            Some(h) => WebEpisode::with_horizon(site.clone(), self.cfg.step_penalty, h)?,
            None => WebEpisode::new(site.clone(), self.cfg.step_penalty)?,
        };
        let mut tape = Tape::new();
        let (mut lps, mut vals, mut ents) = (Vec::new(), Vec::new(), Vec::new());
        let mut rewards = Vec::new();
        loop {
            let step = {
                let obs = ep.observe();
                learner.act(&mut tape, ps, &obs, Pick::Sample(stream))?
            };
            let out = ep.step(step.action)?;
            lps.push(step.log_prob);
            vals.push(step.value);
            ents.push(step.entropy);
            rewards.push(out.reward);
            if out.done {
                if self.cfg.binary_reward_only {
                    binarize(&mut rewards, out.succeeded);
                }
                break;
            }
        }
        let ret = rewards.iter().sum();
        Ok((
            EpisodeTrace { tape, log_probs: lps, values: vals, entropies: ents, rewards },
            ret,
        ))
    }

    fn run_grid_episode(
        &self,
        learner: &GridLearner,
        ps: &ParamSet,
        design: &GridDesign,
        stream: &mut RandomStream,
    ) -> Result<(EpisodeTrace, f64)> {
        let mut world_stream = stream.child("world");
        let mut world = build_grid(
            design,
            &mut world_stream,
            self.cfg.grid_size,
            self.cfg.grid_horizon,
            self.cfg.step_penalty,
        )?;
        let mut tape = Tape::new();
        let (mut lps, mut vals, mut ents) = (Vec::new(), Vec::new(), Vec::new());
        let mut rewards = Vec::new();
        while !world.is_done() {
            let obs = grid_observation(&world);
            let step = learner.act(&mut tape, ps, &obs, Pick::Sample(stream))?;
            let out = world.step(step.action)?;
            lps.push(step.log_prob);
            vals.push(step.value);
            ents.push(step.entropy);
            rewards.push(out.reward);
            if out.done {
                if self.cfg.binary_reward_only {
                    binarize(&mut rewards, out.succeeded);
                }
                break;
            }
        }
        let ret = rewards.iter().sum();
        Ok((
            EpisodeTrace { tape, log_probs: lps, values: vals, entropies: ents, rewards },
            ret,
        ))
    }
}

/// Replace shaped rewards with a single terminal ±1.
fn binarize(rewards: &mut [f64], succeeded: bool) {
    for r in rewards.iter_mut() {
        *r = 0.0;
    }
    if let Some(last) = rewards.last_mut() {
        *last = if succeeded { 1.0 } else { -1.0 };
    }
}
