//! Sequential-decision view of a task net.
//!
//! Hidden state is the marking; actions are transition firings. Potential
//! reward is split evenly over the distinct field colors and paid on the
//! first firing that supplies each color; the last outstanding color absorbs
//! any float rounding residue, so an episode that completes the task collects
//! exactly 1.0 of potential reward before the terminal bonus.

use std::collections::BTreeSet;

use super::{Marking, PetriTaskNet};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct NetPomdp {
    net: PetriTaskNet,
    marking: Marking,
    credited: BTreeSet<String>,
    paid: f64,
    steps: usize,
    horizon: usize,
    step_penalty: f64,
    done: bool,
    succeeded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PomdpStep {
    pub reward: f64,
    pub done: bool,
    pub succeeded: bool,
}

impl NetPomdp {
    /// Wrap a net. Refuses nets whose structural validation fails.
    pub fn new(net: PetriTaskNet, horizon: usize, step_penalty: f64) -> Result<Self> {
        let report = net.validate();
        if !report.is_valid() {
            return Err(Error::Structure(format!(
                "refusing invalid net: {}",
                report.violations.join("; ")
            )));
        }
        let marking = net.initial_marking();
        Ok(Self {
            net,
            marking,
            credited: BTreeSet::new(),
            paid: 0.0,
            steps: 0,
            horizon,
            step_penalty,
            done: false,
            succeeded: false,
        })
    }

    pub fn net(&self) -> &PetriTaskNet {
        &self.net
    }

    pub fn marking(&self) -> &Marking {
        &self.marking
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn available_actions(&self) -> Vec<usize> {
        if self.done {
            Vec::new()
        } else {
            self.net.enabled(&self.marking)
        }
    }

    /// Colors already credited with their potential reward share.
    pub fn credited(&self) -> &BTreeSet<String> {
        &self.credited
    }

    /// Spend one timestep without firing anything: pays the step penalty and
    /// can time the episode out, but leaves the marking alone.
    pub fn noop(&mut self) -> Result<PomdpStep> {
        if self.done {
            return Err(Error::Contract("episode is already terminal".into()));
        }
        self.steps += 1;
        let mut reward = -self.step_penalty;
        if self.steps >= self.horizon {
            self.done = true;
            reward += -1.0;
        }
        Ok(PomdpStep { reward, done: self.done, succeeded: false })
    }

    /// Fire `transition`. Errors if the episode is over or the transition is
    /// not enabled; the trajectory-level caller decides how to map invalid
    /// attempts to no-ops.
    pub fn step(&mut self, transition: usize) -> Result<PomdpStep> {
        if self.done {
            return Err(Error::Contract("episode is already terminal".into()));
        }
        let next = self.net.fire(&self.marking, transition)?;
        self.marking = next;
        self.steps += 1;

        let mut reward = -self.step_penalty;
        if let Some(color) = &self.net.transitions[transition].emit {
            if !self.credited.contains(color) && !self.net.colors.is_empty() {
                self.credited.insert(color.clone());
                let share = 1.0 / self.net.colors.len() as f64;
                // The last color pays the residue when repeated addition of
                // the share would miss 1.0. `paid` sits within ulps of
                // 1 - share, so 1.0 - paid is exact (Sterbenz).
                let pay = if self.credited.len() == self.net.colors.len()
                    && self.paid + share != 1.0
                {
                    1.0 - self.paid
                } else {
                    share
                };
                self.paid += pay;
                reward += pay;
            }
        }
        if self.net.is_final(&self.marking) {
            self.done = true;
            self.succeeded = true;
            reward += 1.0;
        } else if self.steps >= self.horizon {
            self.done = true;
            reward += -1.0;
        }
        Ok(PomdpStep { reward, done: self.done, succeeded: self.succeeded })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri::{compose, PrimitiveNet};

    fn simple_pomdp(horizon: usize) -> NetPomdp {
        let prims = vec![
            PrimitiveNet::active("username", "username"),
            PrimitiveNet::active("password", "password"),
        ];
        let net = compose(&prims, &[2]).unwrap();
        NetPomdp::new(net, horizon, 0.0).unwrap()
    }

    #[test]
    fn optimal_episode_potential_sums_to_one() {
        let mut env = simple_pomdp(10);
        let t0 = env.net().primitives[0].transitions[0];
        let t1 = env.net().primitives[1].transitions[0];
        let gate = env.net().gates[0];

        let mut potential = 0.0;
        let s = env.step(t0).unwrap();
        potential += s.reward;
        let s = env.step(t1).unwrap();
        potential += s.reward;
        assert_eq!(potential, 1.0);

        let s = env.step(gate).unwrap();
        assert!(s.done && s.succeeded);
        assert_eq!(s.reward, 1.0);
    }

    #[test]
    fn noops_run_down_the_clock() {
        let mut env = simple_pomdp(3);
        assert_eq!(env.noop().unwrap(), PomdpStep { reward: 0.0, done: false, succeeded: false });
        env.noop().unwrap();
        let s = env.noop().unwrap();
        assert!(s.done && !s.succeeded);
        assert_eq!(s.reward, -1.0);
        assert!(env.noop().is_err());
    }

    #[test]
    fn timeout_pays_minus_one() {
        let mut env = simple_pomdp(1);
        let t0 = env.net().primitives[0].transitions[0];
        let s = env.step(t0).unwrap();
        assert!(s.done && !s.succeeded);
        assert_eq!(s.reward, 0.5 - 1.0);
    }

    #[test]
    fn potential_sum_exact_for_any_color_count() {
        // 1/7 is not exactly representable and seven repeated adds of it
        // miss 1.0; the residue rule has to close the gap without touching
        // counts like 5 where every share already lands exactly.
        for count in 1..=12usize {
            let prims: Vec<PrimitiveNet> = (0..count)
                .map(|i| {
                    let name = format!("field{i}");
                    PrimitiveNet::active(&name, &name)
                })
                .collect();
            let net = compose(&prims, &[count]).unwrap();
            let mut env = NetPomdp::new(net, count + 2, 0.0).unwrap();
            let share = 1.0 / count as f64;
            let mut potential = 0.0;
            for p in 0..count {
                let t = env.net().primitives[p].transitions[0];
                let s = env.step(t).unwrap();
                if count == 5 {
                    assert_eq!(s.reward, share);
                }
                potential += s.reward;
            }
            assert_eq!(potential, 1.0, "colors = {count}");
            let s = env.step(env.net().gates[0]).unwrap();
            assert!(s.succeeded);
        }
    }

    #[test]
    fn disabled_transition_errors() {
        let mut env = simple_pomdp(10);
        let gate = env.net().gates[0];
        assert!(env.step(gate).is_err());
    }

    #[test]
    fn duplicate_color_credited_once() {
        let prims = vec![
            PrimitiveNet::active("username", "username"),
            PrimitiveNet::active("username", "username"),
        ];
        let net = compose(&prims, &[2]).unwrap();
        let mut env = NetPomdp::new(net, 10, 0.0).unwrap();
        let ta = env.net().primitives[0].transitions[0];
        let tb = env.net().primitives[1].transitions[0];
        let s = env.step(ta).unwrap();
        assert_eq!(s.reward, 1.0);
        let s = env.step(tb).unwrap();
        assert_eq!(s.reward, 0.0);
    }

    #[test]
    fn invalid_net_refused() {
        let mut net = compose(&[PrimitiveNet::active("city", "city")], &[1]).unwrap();
        net.initial.clear();
        net.initial.push(0); // control only, entry never marked
        assert!(NetPomdp::new(net, 10, 0.0).is_err());
    }
}
