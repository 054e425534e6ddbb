//! Curriculum training over generated environments.
//!
//! A design policy proposes tasks, a population of agents trains on them,
//! and a pluggable strategy decides what the design policy is paid. The
//! strategies live behind one trait in a by-name registry: the compositional
//! regret + difficulty objective, its regret-only ablation, the fixed-
//! antagonist and pure-adversary baselines, two procedural baselines, and a
//! learning-progress baseline.

pub mod algos;
pub mod checkpoint;
pub mod config;
pub mod eval;
pub mod metrics;
pub mod probe;
pub mod run;
pub mod state;
pub mod strategy;

pub use config::{Algo, Domain, TrainingConfig};
pub use metrics::{MetricsLog, MetricsRecord, METRICS_SCHEMA_VERSION};
pub use probe::{degenerate_case_probe, ProbeReport};
pub use run::Trainer;
pub use state::{DomainDesign, DomainRollout, IterationStats, LearnerHandle, TrainerState};
pub use strategy::{by_name, registered_names, strategy_for, CurriculumStrategy, Objective, Proposal};
