//! Scalar objectives that turn population returns into a generator reward.

use crate::{Error, Result};

/// Knobs for the difficulty/regret mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveConfig {
    /// Mixture weight: reward = (1−α)·regret + α·difficulty.
    pub alpha: f64,
    /// Success threshold: best return strictly above it counts as solved.
    pub beta: f64,
    /// Failure threshold: best return strictly below it counts as failed.
    pub delta: f64,
    /// Normalizer for the SKIP-mass term.
    pub n_max: f64,
    /// Multiply the difficulty term by |best return|.
    pub scale_by_best: bool,
    /// Use the older budget objective instead of the difficulty term.
    pub legacy_budget: bool,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            beta: 0.0,
            delta: 0.0,
            n_max: 10.0,
            scale_by_best: true,
            legacy_budget: false,
        }
    }
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [0,1], got {}", self.alpha)));
        }
        if self.delta > self.beta {
            return Err(Error::Config(format!(
                "failure threshold delta={} above success threshold beta={}",
                self.delta, self.beta
            )));
        }
        if !(self.n_max > 0.0) {
            return Err(Error::Config(format!("n_max must be positive, got {}", self.n_max)));
        }
        Ok(())
    }
}

/// Best agent's mean return minus the population mean. Nonnegative, zero iff
/// all agents tie; the spread of the population is the regret signal.
pub fn pop_regret(mean_returns: &[f64]) -> Result<f64> {
    if mean_returns.len() < 2 {
        return Err(Error::Config(format!(
            "population regret needs at least 2 agents, got {}",
            mean_returns.len()
        )));
    }
    let best = mean_returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = mean_returns.iter().sum::<f64>() / mean_returns.len() as f64;
    Ok(best - mean)
}

/// Best single antagonist episode minus the protagonist's mean episode.
/// May be negative when the protagonist is the stronger policy.
pub fn paired_regret(antagonist_returns: &[f64], protagonist_returns: &[f64]) -> Result<f64> {
    if antagonist_returns.is_empty() || protagonist_returns.is_empty() {
        return Err(Error::Domain("paired regret over empty return lists".into()));
    }
    let best = antagonist_returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = protagonist_returns.iter().sum::<f64>() / protagonist_returns.len() as f64;
    Ok(best - mean)
}

/// Threshold-gated SKIP-mass objective:
///   +N̂/N_max if the best return beats β, −N̂/N_max if it falls below δ,
///   0 in between (strict inequalities). `scale_by_best` multiplies by the
/// magnitude of the best return, so barely-solved tasks push gently.
pub fn difficulty_objective(best_mean_return: f64, n_hat: f64, cfg: &ObjectiveConfig) -> f64 {
    let gate = if best_mean_return > cfg.beta {
        1.0
    } else if best_mean_return < cfg.delta {
        -1.0
    } else {
        0.0
    };
    let mut value = gate * n_hat / cfg.n_max;
    if cfg.scale_by_best {
        value *= best_mean_return.abs();
    }
    value
}

/// Older budget shaping kept for ablations: minimizing
/// R_best · Σ log π(SKIP) grows non-SKIP mass whenever the task is solvable.
/// `skip_log_prob_sum` is Σ log π(SKIP), i.e. −N̂.
pub fn legacy_budget_loss(skip_log_prob_sum: f64, best_mean_return: f64) -> f64 {
    best_mean_return * skip_log_prob_sum
}

/// Convex combination of the two signals.
pub fn generator_reward(regret: f64, difficulty: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * regret + alpha * difficulty
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn pop_regret_examples() {
        assert_eq!(pop_regret(&[0.3, 0.3]).unwrap(), 0.0);
        assert!((pop_regret(&[0.5, 0.1]).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(pop_regret(&[1.0, -1.0, 0.0]).unwrap(), 1.0);
        assert!(pop_regret(&[0.5]).is_err());
    }

    #[test]
    fn pop_regret_two_agent_identity_and_permutation() {
        let mut rng = RandomStream::from_seed(31);
        for _ in 0..200 {
            let a = rng.uniform_in(-1.0, 1.0);
            let b = rng.uniform_in(-1.0, 1.0);
            let r = pop_regret(&[a, b]).unwrap();
            assert!((r - (a - b).abs() / 2.0).abs() < 1e-12);
            assert_eq!(r, pop_regret(&[b, a]).unwrap());
            assert!(r >= 0.0);
        }
    }

    #[test]
    fn paired_regret_examples() {
        assert!((paired_regret(&[0.2, 0.6], &[0.1, 0.3]).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(paired_regret(&[-1.0, -1.0], &[0.0, 0.0]).unwrap(), -1.0);
        let same = [0.4, -0.2, 0.1];
        assert!(paired_regret(&same, &same).unwrap() >= 0.0);
        assert!(paired_regret(&[], &[0.0]).is_err());
    }

    #[test]
    fn difficulty_thresholds_are_strict() {
        let cfg = ObjectiveConfig { scale_by_best: false, n_max: 20.0, ..Default::default() };
        assert!((difficulty_objective(0.5, 2.0, &cfg) - 0.1).abs() < 1e-15);
        assert!((difficulty_objective(-0.3, 2.0, &cfg) + 0.1).abs() < 1e-15);
        assert_eq!(difficulty_objective(0.0, 2.0, &cfg), 0.0);
    }

    #[test]
    fn difficulty_scaling_and_monotonicity() {
        let cfg = ObjectiveConfig { scale_by_best: true, n_max: 10.0, ..Default::default() };
        assert!((difficulty_objective(0.5, 2.0, &cfg) - 0.1 * 0.5 * 2.0).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..50 {
            let d = difficulty_objective(1.0, i as f64 * 0.3, &cfg);
            assert!(d >= prev, "difficulty not monotone in skip mass");
            prev = d;
        }
    }

    #[test]
    fn legacy_budget_examples() {
        assert_eq!(legacy_budget_loss(-3.0, 0.0), 0.0);
        assert_eq!(legacy_budget_loss(-3.0, 1.0), -3.0);
        assert!(legacy_budget_loss(-0.5, 0.7) < 0.0);
    }

    #[test]
    fn reward_mixture() {
        assert_eq!(generator_reward(0.3, 9.9, 0.0), 0.3);
        assert_eq!(generator_reward(9.9, 0.4, 1.0), 0.4);
        assert!((generator_reward(0.2, 0.1, 0.8) - 0.12).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(ObjectiveConfig::default().validate().is_ok());
        assert!(ObjectiveConfig { alpha: 1.2, ..Default::default() }.validate().is_err());
        assert!(ObjectiveConfig { delta: 0.5, beta: 0.0, ..Default::default() }
            .validate()
            .is_err());
        assert!(ObjectiveConfig { n_max: 0.0, ..Default::default() }.validate().is_err());
    }
}
