//! Degenerate-case diagnostic: does an objective push designs toward
//! maximal complexity regardless of learner competence?
//!
//! The probe forces binary-only terminal rewards (so partial credit cannot
//! soften the signal), runs the configured algorithm, and reports how the
//! non-SKIP fraction and the logged difficulty term moved.

use codelab_core::Result;

use crate::config::TrainingConfig;
use crate::run::Trainer;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// Fraction of the design budget spent on non-SKIP placements, per
    /// iteration.
    pub non_skip_fraction: Vec<f64>,
    pub difficulty: Vec<f64>,
    /// Mean non-SKIP fraction over the leading window.
    pub first_window_mean: f64,
    /// Mean non-SKIP fraction over the trailing window.
    pub last_window_mean: f64,
    pub difficulty_mean: f64,
    pub window: usize,
}

pub fn degenerate_case_probe(cfg: &TrainingConfig, iterations: usize) -> Result<ProbeReport> {
    let mut cfg = cfg.clone();
    cfg.iterations = iterations;
    cfg.binary_reward_only = true;
    let mut trainer = Trainer::new(cfg)?;
    trainer.run()?;
    Ok(report_from(&trainer))
}

pub fn report_from(trainer: &Trainer) -> ProbeReport {
    let budget = trainer.state.cfg.design_budget as f64;
    let non_skip_fraction: Vec<f64> =
        trainer.log.records.iter().map(|r| r.non_skip as f64 / budget).collect();
    let difficulty: Vec<f64> = trainer.log.records.iter().map(|r| r.difficulty).collect();
    let window = 100.min(non_skip_fraction.len() / 2).max(1);
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    ProbeReport {
        first_window_mean: mean(&non_skip_fraction[..window]),
        last_window_mean: mean(&non_skip_fraction[non_skip_fraction.len() - window..]),
        difficulty_mean: mean(&difficulty),
        non_skip_fraction,
        difficulty,
        window,
    }
}
