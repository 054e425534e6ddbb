//! The iteration driver: one strategy, one population, one metrics log.
//!
//! Iteration order is fixed for every strategy: propose a design, render it,
//! let each agent collect and learn, score the design, update the design
//! policy, record metrics. Agent updates always precede the design-policy
//! update.

use std::time::Instant;

use codelab_core::gridenv::{GridDesign, ALL_SUBTASKS};
use codelab_core::rng::RandomStream;
use codelab_core::webenv::suite_design;
use codelab_core::{Error, Result};

use crate::config::{Domain, TrainingConfig};
use crate::eval;
use crate::metrics::{MetricsLog, MetricsRecord};
use crate::state::{DomainRollout, LearnerHandle, TrainerState};
use crate::strategy::{strategy_for, CurriculumStrategy, Proposal};

pub struct Trainer {
    pub state: TrainerState,
    pub strategy: Box<dyn CurriculumStrategy>,
    pub log: MetricsLog,
}

impl Trainer {
    pub fn new(cfg: TrainingConfig) -> Result<Self> {
        cfg.validate()?;
        let strategy = strategy_for(cfg.algo);
        strategy.validate(&cfg)?;
        let state = TrainerState::new(cfg, strategy.trains_generator())?;
        Ok(Self { state, strategy, log: MetricsLog::new() })
    }

    pub fn step(&mut self) -> Result<MetricsRecord> {
        let start = Instant::now();
        let Proposal { design, rollout } = self.strategy.propose(&mut self.state)?;
        let n_hat = rollout.as_ref().map(DomainRollout::n_hat).unwrap_or(0.0);

        let stats = self.state.collect_and_update(&design, n_hat)?;
        let objective = self.strategy.objective(&mut self.state, &stats)?;

        if let Some(reward) = objective.reward {
            let rollout = rollout.ok_or_else(|| {
                Error::Contract("strategy produced a reward without a policy rollout".into())
            })?;
            self.state.apply_generator_update(rollout, reward, objective.legacy_best)?;
        }

        let cfg = &self.state.cfg;
        let eval_success = if cfg.eval_every > 0 && (self.state.iter + 1) % cfg.eval_every == 0 {
            Some(self.evaluate_first_agent()?)
        } else {
            None
        };

        let record = MetricsRecord {
            iter: self.state.iter,
            algo: self.strategy.name().to_string(),
            regret: objective.regret,
            difficulty: objective.difficulty,
            n_hat,
            non_skip: design.non_skip(),
            active_count: design.active_count(),
            passive_count: design.passive_count(),
            returns: stats.mean_returns.clone(),
            best_return: stats.best_return,
            best_agent: stats.best_agent,
            eval_success,
            wall_ms: start.elapsed().as_millis() as u64,
        };
        self.log.push(record.clone())?;
        self.state.iter += 1;
        Ok(record)
    }

    pub fn run(&mut self) -> Result<()> {
        while self.state.iter < self.state.cfg.iterations {
            self.step()?;
        }
        Ok(())
    }

    /// Held-out success of agent 0 on the configured evaluation target.
    /// The measurement streams depend only on the seed, never on the
    /// iteration, so successive calls measure the same environments.
    pub fn evaluate_first_agent(&self) -> Result<f64> {
        let cfg = &self.state.cfg;
        cfg.validate_eval_target()?;
        let agent = &self.state.agents[0];
        let base = RandomStream::from_seed(cfg.require_seed()?).child("eval");
        match (&agent.learner, cfg.domain) {
            (LearnerHandle::Web(learner), Domain::Web) => {
                let design = suite_design(&cfg.eval_task, cfg.eval_level)?;
                eval::web_success_rate(
                    &eval::WebPolicy::Learner { learner, ps: &agent.ps },
                    &design,
                    cfg.eval_episodes,
                    cfg.step_penalty,
                    &base,
                )
            }
            (LearnerHandle::Grid(learner), Domain::Grid) => eval::grid_success_rate(
                learner,
                &agent.ps,
                &GridDesign::closed(ALL_SUBTASKS),
                cfg.eval_episodes,
                cfg.grid_size,
                cfg.grid_horizon,
                cfg.step_penalty,
                &base,
            ),
            _ => Err(Error::Contract("agent domain does not match config".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Algo;

    fn tiny_cfg(algo: Algo, domain: Domain) -> TrainingConfig {
        TrainingConfig {
            algo,
            domain,
            population: 2,
            episodes_per_agent: 1,
            design_budget: 3,
            max_pages: 2,
            iterations: 2,
            seed: Some(5),
            generator_hidden: 8,
            learner_hidden: 8,
            learner_embed: 4,
            catalog: vec!["username".into(), "password".into()],
            grid_size: 5,
            grid_horizon: 12,
            ..TrainingConfig::default()
        }
    }

    #[test]
    fn every_algorithm_completes_a_tiny_web_run() {
        for algo in Algo::ALL {
            let mut trainer = Trainer::new(tiny_cfg(algo, Domain::Web)).unwrap();
            trainer.run().unwrap_or_else(|e| panic!("{algo}: {e}"));
            assert_eq!(trainer.log.records.len(), 2, "{algo}");
            for r in &trainer.log.records {
                assert_eq!(r.algo, algo.name());
                assert!(r.regret >= 0.0, "{algo}: regret {}", r.regret);
            }
        }
    }

    #[test]
    fn every_algorithm_completes_a_tiny_grid_run() {
        for algo in Algo::ALL {
            let mut trainer = Trainer::new(tiny_cfg(algo, Domain::Grid)).unwrap();
            trainer.run().unwrap_or_else(|e| panic!("{algo}: {e}"));
            assert_eq!(trainer.log.records.len(), 2, "{algo}");
        }
    }

    #[test]
    fn logged_regret_matches_the_population_identity() {
        let mut trainer = Trainer::new(tiny_cfg(Algo::Code, Domain::Web)).unwrap();
        trainer.run().unwrap();
        for r in &trainer.log.records {
            let expected =
                codelab_core::generator::pop_regret(&r.returns).unwrap();
            assert_eq!(r.regret, expected);
            let best = r.returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(r.best_return, best);
            assert_eq!(r.returns[r.best_agent], best);
        }
    }
}
