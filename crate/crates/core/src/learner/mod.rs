//! Task-solving policies and their shared advantage-actor-critic update.

mod grid;
mod update;
mod web;

pub use grid::{GridLearner, GridLearnerConfig, GridStepEval};
pub use update::{update_learner, EpisodeTrace};
pub use web::{
    hash_bucket, Pick, PolicyEval, StepEval, WebLearner, WebLearnerConfig, HASH_BUCKETS,
    REPORTED_WEB_LEARNER_PARAMS,
};
