//! Domain randomization: designs drawn from fixed uniform distributions,
//! no design policy at all.
//!
//! Web designs draw a page count k ~ U{0..K}, then fill each of the N slots
//! uniformly from catalog ∪ {SKIP, NULL} (NULL occupies a slot without
//! rendering anything), with a uniform page for everything that renders.
//! k = 0 forces every slot to SKIP.

use codelab_core::gridenv::{GridDesign, ALL_SUBTASKS};
use codelab_core::rng::RandomStream;
use codelab_core::webenv::{Placement, WebsiteDesign};
use codelab_core::Result;

use crate::config::{Domain, TrainingConfig};
use crate::state::{DomainDesign, IterationStats, TrainerState};
use crate::strategy::{logged_regret, CurriculumStrategy, Objective, Proposal};

pub fn dr_design(rng: &mut RandomStream, cfg: &TrainingConfig) -> WebsiteDesign {
    let names = cfg.effective_catalog();
    let k = rng.below(cfg.max_pages + 1);
    let mut design = WebsiteDesign::new(k);
    for _ in 0..cfg.design_budget {
        if k == 0 {
            design.placements.push(Placement::Skip);
            continue;
        }
        let draw = rng.below(names.len() + 2);
        let placement = if draw == names.len() {
            Placement::Skip
        } else {
            let page = rng.below(k);
            if draw == names.len() + 1 {
                Placement::Null { page }
            } else {
                Placement::Put { primitive: names[draw].clone(), page }
            }
        };
        design.placements.push(placement);
    }
    design
}

pub fn dr_grid_design(rng: &mut RandomStream, cfg: &TrainingConfig) -> GridDesign {
    let mut chosen = Vec::new();
    for _ in 0..cfg.design_budget {
        let draw = rng.below(ALL_SUBTASKS.len() + 1);
        if draw < ALL_SUBTASKS.len() {
            chosen.push(ALL_SUBTASKS[draw]);
        }
    }
    GridDesign::closed(chosen)
}

pub struct DrStrategy;

impl CurriculumStrategy for DrStrategy {
    fn name(&self) -> &'static str {
        "dr"
    }

    fn trains_generator(&self) -> bool {
        false
    }

    fn propose(&self, st: &mut TrainerState) -> Result<Proposal> {
        let mut rng = st.iter_stream().child("design");
        let design = match st.cfg.domain {
            Domain::Web => DomainDesign::Web(dr_design(&mut rng, &st.cfg)),
            Domain::Grid => DomainDesign::Grid(dr_grid_design(&mut rng, &st.cfg)),
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
