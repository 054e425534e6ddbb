//! Checkpoint layout: one directory per snapshot holding the design
//! policy's parameters, each agent's parameters, and the config that
//! produced them. Parameters reload bit-exactly.

use std::path::Path;

use codelab_core::generator::{
    GridGenerator, GridGeneratorConfig, WebGenerator, WebGeneratorConfig,
};
use codelab_core::learner::{GridLearner, GridLearnerConfig, WebLearner, WebLearnerConfig};
use codelab_core::nn::ParamSet;
use codelab_core::rng::RandomStream;
use codelab_core::{Error, Result};

use crate::config::{Domain, TrainingConfig};
use crate::state::{GeneratorHandle, LearnerHandle, TrainerState};

pub fn save_checkpoint(dir: &Path, state: &TrainerState) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.json"), state.cfg.to_json())?;
    if state.generator.is_some() {
        state.gen_ps.save_file(&dir.join("generator.json"))?;
    }
    for (i, agent) in state.agents.iter().enumerate() {
        agent.ps.save_file(&dir.join(format!("agent_{i}.json")))?;
    }
    Ok(())
}

pub struct Checkpoint {
    pub config: TrainingConfig,
    pub generator: Option<ParamSet>,
    pub agents: Vec<ParamSet>,
}

pub fn load_checkpoint(dir: &Path) -> Result<Checkpoint> {
    let config_text = std::fs::read_to_string(dir.join("config.json"))
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))?;
    let config = TrainingConfig::from_json(&config_text)?;
    let gen_path = dir.join("generator.json");
    let generator = if gen_path.exists() { Some(ParamSet::load_file(&gen_path)?) } else { None };
    let mut agents = Vec::new();
    for i in 0.. {
        let path = dir.join(format!("agent_{i}.json"));
        if !path.exists() {
            break;
        }
        agents.push(ParamSet::load_file(&path)?);
    }
    if agents.is_empty() {
        return Err(Error::Contract(format!("{}: checkpoint has no agents", dir.display())));
    }
    Ok(Checkpoint { config, generator, agents })
}

/// Rebuild a usable policy around saved agent parameters. The network is
/// re-initialized only to define its structure; every value then comes from
/// the checkpoint.
pub fn rebuild_learner(cfg: &TrainingConfig, saved: &ParamSet) -> Result<(LearnerHandle, ParamSet)> {
    let mut ps = ParamSet::new();
    let mut scratch = RandomStream::from_seed(0);
    let handle = match cfg.domain {
        Domain::Web => LearnerHandle::Web(WebLearner::init(
            WebLearnerConfig { hidden: cfg.learner_hidden, embed_dim: cfg.learner_embed },
            &mut ps,
            &mut scratch,
        )?),
        Domain::Grid => LearnerHandle::Grid(GridLearner::init(
            GridLearnerConfig { hidden: cfg.learner_hidden, grid_size: cfg.grid_size },
            &mut ps,
            &mut scratch,
        )?),
    };
    ps.restore_from(saved)?;
    Ok((handle, ps))
}

/// Rebuild the design policy around saved generator parameters.
pub fn rebuild_generator(
    cfg: &TrainingConfig,
    saved: &ParamSet,
) -> Result<(GeneratorHandle, ParamSet)> {
    let mut ps = ParamSet::new();
    let mut scratch = RandomStream::from_seed(0);
    let handle = match cfg.domain {
        Domain::Web => GeneratorHandle::Web(WebGenerator::init(
            WebGeneratorConfig {
                hidden: cfg.generator_hidden,
                max_pages: cfg.max_pages,
                budget: cfg.design_budget,
                catalog: cfg.effective_catalog(),
            },
            &mut ps,
            &mut scratch,
        )?),
        Domain::Grid => GeneratorHandle::Grid(GridGenerator::init(
            GridGeneratorConfig { hidden: cfg.generator_hidden, budget: cfg.design_budget },
            &mut ps,
            &mut scratch,
        )?),
    };
    ps.restore_from(saved)?;
    Ok((handle, ps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Algo;
    use crate::run::Trainer;

    #[test]
    fn checkpoints_round_trip_bit_exactly() {
        let cfg = TrainingConfig {
            algo: Algo::Code,
            iterations: 1,
            seed: Some(3),
            generator_hidden: 6,
            learner_hidden: 6,
            learner_embed: 4,
            design_budget: 2,
            max_pages: 2,
            episodes_per_agent: 1,
            catalog: vec!["username".into()],
            ..TrainingConfig::default()
        };
        let mut trainer = Trainer::new(cfg).unwrap();
        trainer.run().unwrap();

        let dir = std::env::temp_dir().join(format!("ckpt-test-{}", std::process::id()));
        save_checkpoint(&dir, &trainer.state).unwrap();
        let loaded = load_checkpoint(&dir).unwrap();
        std::fs::remove_dir_all(&dir).unwrap();

        assert_eq!(loaded.config, trainer.state.cfg);
        assert_eq!(loaded.agents.len(), 2);
        let saved = loaded.generator.unwrap();
        for id in trainer.state.gen_ps.ids() {
            assert_eq!(saved.get(id).data, trainer.state.gen_ps.get(id).data);
        }
        let (_, ps0) = rebuild_learner(&loaded.config, &loaded.agents[0]).unwrap();
        for id in trainer.state.agents[0].ps.ids() {
            assert_eq!(ps0.get(id).data, trainer.state.agents[0].ps.get(id).data);
        }
    }
}
