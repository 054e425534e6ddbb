//! The design-side policy: an autoregressive sampler over environment
//! layouts plus the scalar objectives that reward it.

pub mod objectives;
pub mod policy;

pub use objectives::{
    difficulty_objective, generator_reward, legacy_budget_loss, paired_regret, pop_regret,
    ObjectiveConfig,
};
pub use policy::{
    generator_loss, update_generator, GridDecisions, GridGenerator, GridGeneratorConfig,
    GridRollout, RolloutTrace, StepDecision, WebDecisions, WebGenerator, WebGeneratorConfig,
    WebRollout, REPORTED_WEB_GENERATOR_PARAMS,
};
