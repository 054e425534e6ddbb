//! First-passage probabilities in the corridor MDP: a random walk from
//! state 0 toward state N under a step budget of N + 2L, with P(right) = p.
//!
//! Three quantities, all in exact rational arithmetic:
//! - `p_reach_formula`: Σ_{t=0}^{L} C(N+2t, t) p^{N+t} (1−p)^t. The binomial
//!   counts every interleaving of N+t rights and t lefts, a superset of the
//!   first-passage paths of the walk on the unbounded line, so it dominates
//!   `p_reach_bruteforce` under `OriginRule::Unbounded`. Rules that recycle
//!   the left action at the origin can exceed it (see the pinned
//!   counterexamples): a stay costs a step but needs no compensating right.
//! - `p_reach_bound`: p^N (1+p−p²)^L. Tabulated for inspection only: for
//!   C(N+2t, t) > C(L, t) it can fall below the formula (e.g. N=2, L=1,
//!   p=1/2 gives formula 1/2 vs bound 5/16), so nothing asserts it.
//! - `p_reach_bruteforce`: exact dynamic program over (position, step) with
//!   absorption at N, under a configurable rule for the left action at the
//!   origin. Budget capped at 24 steps.

use crate::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Largest admissible step budget N + 2L for the exact enumeration.
pub const MAX_WALK_BUDGET: usize = 24;

/// What the left action does in state 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OriginRule {
    /// Left is a no-op: the walker stays at 0 and the step is spent.
    Stay,
    /// Left is unavailable: the walker moves right with probability 1.
    ForcedRight,
    /// The line continues below 0: left moves to −1 and every retreat must
    /// be paid back. The only rule under which the path-count formula is an
    /// upper bound.
    Unbounded,
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k.min(n - k) {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

fn pow(x: &BigRational, n: usize) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..n {
        out *= x;
    }
    out
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Nearest f64, for presentation; the exact value stays rational.
pub fn approx(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("reachability values fit in f64")
}

/// Parse "0.3", ".5", "1", or "3/10" into an exact rational in [0, 1].
pub fn parse_probability(text: &str) -> Result<BigRational> {
    let parse = |s: &str| -> Result<BigRational> {
        if s.is_empty() || s.contains(['-', '+']) {
            return Err(bad_probability(s));
        }
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| bad_probability(s))?;
            let den: i64 = den.trim().parse().map_err(|_| bad_probability(s))?;
            if den == 0 {
                return Err(bad_probability(s));
            }
            return Ok(rational(num, den));
        }
        let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        let int: i64 = int_part.parse().map_err(|_| bad_probability(s))?;
        if frac_part.is_empty() {
            return Ok(BigRational::from(BigInt::from(int)));
        }
        if frac_part.len() > 18 || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad_probability(s));
        }
        let frac: i64 = frac_part.parse().map_err(|_| bad_probability(s))?;
        let den = 10i64.pow(frac_part.len() as u32);
        Ok(BigRational::from(BigInt::from(int)) + rational(frac, den))
    };
    let value = parse(text.trim())?;
    if value < BigRational::zero() || value > BigRational::one() {
        return Err(bad_probability(text));
    }
    Ok(value)
}

fn bad_probability(text: &str) -> Error {
    Error::Config(format!("not a probability: {text:?}"))
}

pub fn p_reach_formula(n: usize, l: usize, p: &BigRational) -> BigRational {
    let q = BigRational::one() - p;
    let mut total = BigRational::zero();
    for t in 0..=l {
        let paths = BigRational::from(binomial(n + 2 * t, t));
        total += paths * pow(p, n + t) * pow(&q, t);
    }
    total
}

pub fn p_reach_bound(n: usize, l: usize, p: &BigRational) -> BigRational {
    let inner = BigRational::one() + p - p * p;
    pow(p, n) * pow(&inner, l)
}

pub fn p_reach_bruteforce(
    n: usize,
    l: usize,
    p: &BigRational,
    rule: OriginRule,
) -> Result<BigRational> {
    let budget = n + 2 * l;
    if budget > MAX_WALK_BUDGET {
        return Err(Error::Capacity(format!(
            "walk enumeration needs N + 2L <= {MAX_WALK_BUDGET}, got {budget}"
        )));
    }
    if n == 0 {
        return Ok(BigRational::one());
    }
    let q = BigRational::one() - p;
    // Positions live in [-budget, n); the offset keeps indices nonnegative.
    // Stay and ForcedRight never leave [0, n) but share the representation.
    let offset = budget;
    let goal = offset + n;
    let mut dist = vec![BigRational::zero(); goal];
    dist[offset] = BigRational::one();
    let mut reached = BigRational::zero();
    for _ in 0..budget {
        let mut next = vec![BigRational::zero(); goal];
        for (idx, mass) in dist.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            if idx == offset && rule == OriginRule::ForcedRight {
                if idx + 1 == goal {
                    reached += mass;
                } else {
                    next[idx + 1] += mass;
                }
                continue;
            }
            if idx == offset && rule == OriginRule::Stay {
                next[idx] += mass * &q;
            } else {
                // idx = 0 means position -budget, unreachable before the
                // loop's final step produces `next`, never consumed from it.
                debug_assert!(idx > 0);
                next[idx - 1] += mass * &q;
            }
            if idx + 1 == goal {
                reached += mass * p;
            } else {
                next[idx + 1] += mass * p;
            }
        }
        dist = next;
    }
    Ok(reached)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_corridor() {
        let p = rational(1, 2);
        assert_eq!(p_reach_formula(1, 0, &p), rational(1, 2));
        for rule in [OriginRule::Stay, OriginRule::Unbounded] {
            assert_eq!(p_reach_bruteforce(1, 0, &p, rule).unwrap(), rational(1, 2));
        }
    }

    #[test]
    fn budget_zero_is_p_to_the_n() {
        for n in 1..=6 {
            for (num, den) in [(3, 10), (1, 2), (7, 10)] {
                let p = rational(num, den);
                assert_eq!(p_reach_formula(n, 0, &p), pow(&p, n));
                for rule in [OriginRule::Stay, OriginRule::Unbounded] {
                    assert_eq!(p_reach_bruteforce(n, 0, &p, rule).unwrap(), pow(&p, n));
                }
            }
        }
    }

    #[test]
    fn stay_rule_three_step_example() {
        // N=1, L=1: success on step 1, or stay-then-right, or stay-stay-right
        let p = rational(1, 2);
        let brute = p_reach_bruteforce(1, 1, &p, OriginRule::Stay).unwrap();
        assert_eq!(brute, rational(7, 8));
        assert_eq!(p_reach_formula(1, 1, &p), rational(7, 8));
    }

    #[test]
    fn origin_rules_order_pointwise() {
        let p = rational(3, 10);
        for n in 1..=4 {
            for l in 0..=3 {
                let free = p_reach_bruteforce(n, l, &p, OriginRule::Unbounded).unwrap();
                let stay = p_reach_bruteforce(n, l, &p, OriginRule::Stay).unwrap();
                let forced = p_reach_bruteforce(n, l, &p, OriginRule::ForcedRight).unwrap();
                assert!(free <= stay, "n={n} l={l}");
                assert!(stay <= forced, "n={n} l={l}");
            }
        }
    }

    #[test]
    fn formula_dominates_walk_and_walk_shrinks_with_n() {
        for (num, den) in [(3, 10), (1, 2), (7, 10)] {
            let p = rational(num, den);
            for l in 0..=3 {
                let mut prev: Option<BigRational> = None;
                for n in 1..=6 {
                    let brute = p_reach_bruteforce(n, l, &p, OriginRule::Unbounded).unwrap();
                    let formula = p_reach_formula(n, l, &p);
                    assert!(brute <= formula, "n={n} l={l} p={num}/{den}");
                    if let Some(prev) = prev {
                        assert!(brute <= prev, "not monotone at n={n}");
                    }
                    prev = Some(brute);
                }
            }
        }
    }

    #[test]
    fn boundary_rules_can_beat_the_arrangement_count() {
        // A stay consumes a step without a compensating right, so for small p
        // the stay walk overshoots the formula: its mass never drains left.
        let p = rational(3, 10);
        let stay = p_reach_bruteforce(1, 1, &p, OriginRule::Stay).unwrap();
        assert_eq!(stay, rational(657, 1000));
        assert_eq!(p_reach_formula(1, 1, &p), rational(489, 1000));
        assert!(stay > p_reach_formula(1, 1, &p));

        // Same cause breaks geometric decay for the stay rule at even odds.
        let half = rational(1, 2);
        let n1 = p_reach_bruteforce(1, 3, &half, OriginRule::Stay).unwrap();
        let n2 = p_reach_bruteforce(2, 3, &half, OriginRule::Stay).unwrap();
        assert_eq!(n1, rational(127, 128));
        assert_eq!(n2, rational(201, 256));
        assert!(n2 > rational(3, 4) * n1);
    }

    #[test]
    fn geometric_decay_at_even_odds() {
        // P(N+1) ≤ (p + (1−p)p) · P(N): one forced right plus at most one
        // recoverable retreat per extra rung. Holds for the unbounded walk.
        let p = rational(1, 2);
        let rate = &p + (BigRational::one() - &p) * &p;
        for l in 0..=3 {
            for n in 1..=5 {
                let here = p_reach_bruteforce(n, l, &p, OriginRule::Unbounded).unwrap();
                let next = p_reach_bruteforce(n + 1, l, &p, OriginRule::Unbounded).unwrap();
                assert!(next <= &rate * &here, "n={n} l={l}");
            }
        }
    }

    #[test]
    fn oversized_budget_is_a_capacity_error() {
        let p = rational(1, 2);
        let err = p_reach_bruteforce(20, 3, &p, OriginRule::Stay).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
        assert!(p_reach_bruteforce(18, 3, &p, OriginRule::Stay).is_ok());
    }

    #[test]
    fn stated_bound_can_undershoot_the_formula() {
        // the documented discrepancy: the closed form is not an upper bound
        let p = rational(1, 2);
        let formula = p_reach_formula(2, 1, &p);
        let bound = p_reach_bound(2, 1, &p);
        assert_eq!(formula, rational(1, 2));
        assert_eq!(bound, rational(5, 16));
        assert!(bound < formula);
    }

    #[test]
    fn probability_parsing_is_exact() {
        assert_eq!(parse_probability("0.3").unwrap(), rational(3, 10));
        assert_eq!(parse_probability(".5").unwrap(), rational(1, 2));
        assert_eq!(parse_probability("3/10").unwrap(), rational(3, 10));
        assert_eq!(parse_probability("1").unwrap(), BigRational::one());
        assert_eq!(parse_probability("0").unwrap(), BigRational::zero());
        assert_eq!(parse_probability(" 0.25 ").unwrap(), rational(1, 4));
        for bad in ["1.5", "-0.1", "3/0", "0.5x", "", "half"] {
            assert!(parse_probability(bad).is_err(), "{bad:?} should not parse");
        }
        assert_eq!(approx(&rational(3, 10)), 0.3);
    }
}
