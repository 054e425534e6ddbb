//! Scheduled curriculum: every catalog primitive is included independently
//! with a probability that climbs linearly from 0.1 at the first iteration
//! to 1.0 at the last, on a page drawn uniformly from k ~ U{1..K} pages.

use codelab_core::gridenv::{GridDesign, ALL_SUBTASKS};
use codelab_core::rng::RandomStream;
use codelab_core::webenv::{Placement, WebsiteDesign};
use codelab_core::Result;

use crate::config::{Domain, TrainingConfig};
use crate::state::{DomainDesign, IterationStats, TrainerState};
use crate::strategy::{logged_regret, CurriculumStrategy, Objective, Proposal};

pub fn cl_inclusion_probability(iteration: usize, total_iterations: usize) -> f64 {
    const P0: f64 = 0.1;
    if total_iterations <= 1 {
        return 1.0;
    }
    let frac = (iteration as f64 / (total_iterations - 1) as f64).min(1.0);
    P0 + (1.0 - P0) * frac
}

pub fn cl_design(rng: &mut RandomStream, iteration: usize, cfg: &TrainingConfig) -> WebsiteDesign {
    cl_design_with_probability(rng, cl_inclusion_probability(iteration, cfg.iterations), cfg)
}

pub fn cl_design_with_probability(
    rng: &mut RandomStream,
    p: f64,
    cfg: &TrainingConfig,
) -> WebsiteDesign {
    let k = 1 + rng.below(cfg.max_pages);
    let mut design = WebsiteDesign::new(k);
    for name in cfg.effective_catalog() {
        if rng.coin(p) {
            let page = rng.below(k);
            design.placements.push(Placement::Put { primitive: name, page });
        }
    }
    design
}

pub fn cl_grid_design(rng: &mut RandomStream, iteration: usize, cfg: &TrainingConfig) -> GridDesign {
    let p = cl_inclusion_probability(iteration, cfg.iterations);
    GridDesign::closed(ALL_SUBTASKS.into_iter().filter(|_| rng.coin(p)))
}

pub struct ClStrategy;

impl CurriculumStrategy for ClStrategy {
    fn name(&self) -> &'static str {
        "cl"
    }

    fn trains_generator(&self) -> bool {
        false
    }

    fn propose(&self, st: &mut TrainerState) -> Result<Proposal> {
        let mut rng = st.iter_stream().child("design");
        let design = match st.cfg.domain {
            Domain::Web => DomainDesign::Web(cl_design(&mut rng, st.iter, &st.cfg)),
            Domain::Grid => DomainDesign::Grid(cl_grid_design(&mut rng, st.iter, &st.cfg)),
        };
        Ok(Proposal { design, rollout: None })
    }

    fn objective(&self, _st: &mut TrainerState, stats: &IterationStats) -> Result<Objective> {
        Ok(Objective {
            regret: logged_regret(stats),
            difficulty: 0.0,
            reward: None,
            legacy_best: None,
        })
    }
}
